use rmt_entangle::ensembles::{EnsembleKind, EnsembleSpec};
use rmt_entangle::entanglement::cue_mean_q;

use super::{gate, pool, series_seed, write_panels, write_references, write_summary, Series};
use crate::bundle::Bundle;
use crate::config::{Params, Settings};
use crate::error::CliError;

pub fn run(settings: &Settings, bundle: &mut Bundle) -> Result<(), CliError> {
    let Params::Interpolating { dim, deltas, q_samples } = &settings.params else {
        unreachable!("settings resolved for another experiment");
    };
    let mut series = Vec::with_capacity(deltas.len() + 1);
    for (i, &delta) in deltas.iter().enumerate() {
        let spec = EnsembleSpec::new(
            EnsembleKind::Interpolating { delta },
            *dim,
            series_seed(settings.seed, i as u64 + 1),
        )?;
        let pooled = pool(&spec, settings.samples, *q_samples, true)?;
        series.push(Series::from_pooled(format!("delta={delta}"), &pooled, &settings.bins)?);
    }
    let cue = EnsembleSpec::new(EnsembleKind::CueHurwitz, *dim, series_seed(settings.seed, 0))?;
    let pooled = pool(&cue, settings.samples, *q_samples, true)?;
    let mut cue_series = Series::from_pooled("cue", &pooled, &settings.bins)?;
    cue_series.metric("mean_q_exact", cue_mean_q(*dim));
    series.push(cue_series);

    write_panels(bundle, &series)?;
    write_summary(bundle, &series)?;
    write_references(bundle, &settings.bins)?;

    // KS of element amplitudes against e^{-x} should fall as δ grows
    let mut ladder: Vec<(f64, f64)> = deltas
        .iter()
        .zip(&series)
        .map(|(&d, s)| (d, s.get("ks_elements_exp").unwrap_or(f64::NAN)))
        .collect();
    ladder.sort_by(|a, b| a.0.total_cmp(&b.0));
    let decreasing = ladder.windows(2).all(|w| w[1].1 < w[0].1);
    let last = ladder.last().map_or(f64::NAN, |l| l.1);
    gate(bundle, "element_ks_ladder_decreasing", last, "strictly decreasing in delta", decreasing);

    let cue_q = series.last().and_then(|s| s.get("mean_q")).unwrap_or(f64::NAN);
    let exact = cue_mean_q(*dim);
    gate(
        bundle,
        "cue_mean_q",
        cue_q,
        &format!("within 0.002 of {exact:.5}"),
        (cue_q - exact).abs() <= 0.002,
    );
    for (s, &delta) in series.iter().zip(deltas) {
        if delta == 0.0 {
            let mean = s.get("mean_q").unwrap_or(f64::NAN);
            gate(bundle, "delta_zero_q_is_zero", mean, "all Q = 0", mean == 0.0);
        }
    }
    Ok(())
}
