use rmt_entangle::ensembles::{EnsembleKind, EnsembleSpec};
use rmt_entangle::entanglement::cue_mean_q;
use rmt_entangle::stats::ks_two_sample;

use super::{gate, pool, series_seed, write_panels, write_references, write_summary, Series};
use crate::bundle::Bundle;
use crate::config::{Params, Settings};
use crate::error::CliError;

pub fn run(settings: &Settings, bundle: &mut Bundle) -> Result<(), CliError> {
    let Params::PseudoRandom { dim, iterations } = &settings.params else {
        unreachable!("settings resolved for another experiment");
    };
    let n = settings.samples;
    let cue = EnsembleSpec::new(EnsembleKind::CueHurwitz, *dim, series_seed(settings.seed, 0))?;
    let cue_pooled = pool(&cue, n, n, true)?;

    let mut series = Vec::with_capacity(iterations.len() + 1);
    let mut ks_q = Vec::with_capacity(iterations.len());
    for (i, &m) in iterations.iter().enumerate() {
        let spec = EnsembleSpec::new(
            EnsembleKind::PseudoRandom { iterations: m },
            *dim,
            series_seed(settings.seed, i as u64 + 1),
        )?;
        let pooled = pool(&spec, n, n, true)?;
        let mut s = Series::from_pooled(format!("m={m}"), &pooled, &settings.bins)?;
        let ks = ks_two_sample(&pooled.q, &cue_pooled.q)?;
        s.metric("ks_q_vs_cue", ks);
        ks_q.push((m, ks));
        series.push(s);
    }
    let mut cue_series = Series::from_pooled("cue", &cue_pooled, &settings.bins)?;
    cue_series.metric("mean_q_exact", cue_mean_q(*dim));
    series.push(cue_series);

    write_panels(bundle, &series)?;
    write_summary(bundle, &series)?;
    write_references(bundle, &settings.bins)?;

    ks_q.sort_by_key(|p| p.0);
    let monotone = ks_q.windows(2).all(|w| w[1].1 <= w[0].1);
    let last = ks_q.last().map_or(f64::NAN, |p| p.1);
    gate(bundle, "q_ks_monotone_in_m", last, "non-increasing in m", monotone);
    for &(m, ks) in &ks_q {
        match m {
            2 => gate(bundle, "m2_q_ks_vs_cue", ks, "> 0.1", ks > 0.1),
            40 => gate(bundle, "m40_q_ks_vs_cue", ks, "<= 0.05", ks <= 0.05),
            _ => {}
        }
    }
    Ok(())
}
