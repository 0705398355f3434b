use rmt_entangle::ensembles::{EnsembleKind, EnsembleSpec};
use rmt_entangle::entanglement::cue_mean_q;

use super::{gate, pool, series_seed, write_panels, write_references, write_summary, Series};
use crate::bundle::Bundle;
use crate::config::{Params, Settings};
use crate::error::CliError;

pub fn run(settings: &Settings, bundle: &mut Bundle) -> Result<(), CliError> {
    let Params::Counterexamples { dim } = &settings.params else {
        unreachable!("settings resolved for another experiment");
    };
    let n = settings.samples;
    let kinds = [
        ("cue", EnsembleKind::CueHurwitz),
        ("diagonal", EnsembleKind::DiagonalCueSpectrum),
        ("conjugated", EnsembleKind::ConjugatedDiagonal),
    ];
    let mut series = Vec::with_capacity(kinds.len());
    let mut all_zero = true;
    for (i, (label, kind)) in kinds.into_iter().enumerate() {
        let spec = EnsembleSpec::new(kind, *dim, series_seed(settings.seed, i as u64))?;
        let pooled = pool(&spec, n, n, true)?;
        if label == "diagonal" {
            all_zero = pooled.q.iter().all(|&q| q == 0.0);
        }
        let mut s = Series::from_pooled(label, &pooled, &settings.bins)?;
        if let Some(max) = pooled.q.iter().copied().reduce(f64::max) {
            s.metric("max_q", max);
        }
        if label == "cue" {
            s.metric("mean_q_exact", cue_mean_q(*dim));
        }
        series.push(s);
    }

    write_panels(bundle, &series)?;
    write_summary(bundle, &series)?;
    write_references(bundle, &settings.bins)?;

    let metric = |label: &str, name: &str| {
        series
            .iter()
            .find(|s| s.label == label)
            .and_then(|s| s.get(name))
            .unwrap_or(f64::NAN)
    };
    let diag_max = metric("diagonal", "max_q");
    gate(bundle, "diagonal_q_identically_zero", diag_max, "all Q == 0", all_zero);
    let ks_poisson = metric("conjugated", "ks_spacings_poisson");
    gate(bundle, "conjugated_spacing_ks_poisson", ks_poisson, "<= 0.02", ks_poisson <= 0.02);
    let dq = (metric("conjugated", "mean_q") - metric("cue", "mean_q")).abs();
    gate(bundle, "conjugated_mean_q_vs_cue", dq, "<= 0.002", dq <= 0.002);
    let ks_elements = metric("conjugated", "ks_elements_exp");
    gate(bundle, "conjugated_element_ks_exp", ks_elements, "<= 0.02", ks_elements <= 0.02);
    Ok(())
}
