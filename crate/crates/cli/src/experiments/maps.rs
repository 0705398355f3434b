use rmt_entangle::entanglement::cue_mean_q;
use rmt_entangle::maps::{MapKind, MapSpec};
use rmt_entangle::stats::{exponential_cdf, ks_distance, Histogram};

use super::{evolve, gate, write_histograms, write_references, write_summary, write_traces, Series};
use crate::bundle::Bundle;
use crate::config::{Params, Settings};
use crate::error::CliError;

/// Window over which the regular sawtooth's oscillation range is measured.
const OSCILLATION_WINDOW: u64 = 50;

pub fn run(settings: &Settings, bundle: &mut Bundle) -> Result<(), CliError> {
    let Params::Maps { dim, sawtooth_k, harper_gamma, t_max, hist_times } = &settings.params else {
        unreachable!("settings resolved for another experiment");
    };
    let mut maps: Vec<MapSpec> = Vec::new();
    maps.extend(sawtooth_k.iter().map(|&k| MapSpec { kind: MapKind::Sawtooth { k }, dim: *dim }));
    maps.extend(harper_gamma.iter().map(|&gamma| MapSpec { kind: MapKind::Harper { gamma }, dim: *dim }));
    maps.push(MapSpec { kind: MapKind::Baker, dim: *dim });

    let cue = cue_mean_q(*dim);
    let mut traces = Vec::with_capacity(maps.len());
    let mut series = Vec::with_capacity(maps.len() + 1);
    let mut hists: Vec<(String, Histogram)> = Vec::new();
    for spec in &maps {
        let u = spec.build()?;
        let label = spec.label();
        let evo = evolve(std::slice::from_ref(&u), *t_max, hist_times, &label)?;
        let mut s = Series::new(label.clone());
        let last = *evo.trace.mean_q.last().expect("t_max >= 1");
        s.metric("mean_q_t_max", last);
        let window: Vec<f64> = evo
            .trace
            .times
            .iter()
            .zip(&evo.trace.mean_q)
            .filter(|(&t, _)| t <= OSCILLATION_WINDOW)
            .map(|(_, &q)| q)
            .collect();
        let range = window.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            - window.iter().copied().fold(f64::INFINITY, f64::min);
        s.metric("oscillation_range_t50", range);
        let late: Vec<f64> = evo
            .trace
            .times
            .iter()
            .zip(&evo.trace.mean_q)
            .filter(|(&t, _)| (50..=100).contains(&t))
            .map(|(_, &q)| q)
            .collect();
        if !late.is_empty() {
            s.metric("mean_q_t50_to_t100", late.iter().sum::<f64>() / late.len() as f64);
        }
        for (t, xs) in &evo.snapshots {
            let b = &settings.bins.amplitude;
            hists.push((format!("{label} t={t}"), Histogram::from_samples(b.lo, b.hi, b.count, xs)?));
            s.metric(&format!("ks_elements_exp_t{t}"), ks_distance(xs, exponential_cdf)?);
        }

        match spec.kind {
            MapKind::Sawtooth { k } if k < 0.0 => {
                gate(bundle, format!("{label}_oscillation_range"), range, "> 0.05", range > 0.05)
            }
            MapKind::Sawtooth { .. } | MapKind::Harper { .. } if is_chaotic(spec.kind) => gate(
                bundle,
                format!("{label}_approaches_cue"),
                last,
                &format!("within 0.002 of {cue:.5} at t_max"),
                (last - cue).abs() <= 0.002,
            ),
            MapKind::Baker => {
                if let Some(ks) = s.get("ks_elements_exp_t1") {
                    gate(bundle, "baker_t1_element_ks_exp", ks, "> 0.1", ks > 0.1);
                }
                if let Some(ks) = s.get("ks_elements_exp_t100") {
                    gate(bundle, "baker_t100_element_ks_exp", ks, "< 0.05", ks < 0.05);
                }
            }
            _ => {}
        }
        series.push(s);
        traces.push(evo.trace);
    }
    let mut cue_series = Series::new("cue");
    cue_series.metric("mean_q_exact", cue);
    series.push(cue_series);

    write_traces(bundle, "traces.csv", &traces)?;
    write_histograms(bundle, "element_hist.csv", hists.iter().map(|(l, h)| (l.as_str(), h)))?;
    write_summary(bundle, &series)?;
    write_references(bundle, &settings.bins)?;
    Ok(())
}

/// Sawtooth with `k > 0` and Harper with `γ >= 1` are the chaotic members
/// of the default parameter sets.
fn is_chaotic(kind: MapKind) -> bool {
    match kind {
        MapKind::Sawtooth { k } => k > 0.0,
        MapKind::Harper { gamma } => gamma >= 1.0,
        MapKind::Baker => false,
    }
}
