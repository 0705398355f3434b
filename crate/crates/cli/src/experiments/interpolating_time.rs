use std::io::Write;

use rmt_entangle::ensembles::{EnsembleKind, EnsembleSpec};
use rmt_entangle::entanglement::cue_mean_q;
use rmt_entangle::stats::{ks_two_sample, Histogram};

use super::{
    approach_rate, evolve, gate, Evolution, monotone_within_noise, series_seed, write_histograms, write_references,
    write_summary, write_traces, Series,
};
use crate::bundle::Bundle;
use crate::config::{Params, Settings};
use crate::error::CliError;

pub fn run(settings: &Settings, bundle: &mut Bundle) -> Result<(), CliError> {
    let Params::InterpolatingTime { dim, deltas, t_max, pairs } = &settings.params else {
        unreachable!("settings resolved for another experiment");
    };
    let cue = cue_mean_q(*dim);
    let mut evolutions = Vec::with_capacity(2);
    for (i, &delta) in deltas.iter().enumerate() {
        let spec = EnsembleSpec::new(
            EnsembleKind::Interpolating { delta },
            *dim,
            series_seed(settings.seed, i as u64),
        )?;
        let ops = spec.sample_many(settings.samples)?;
        let snaps: Vec<u64> = pairs.iter().map(|p| p[i]).collect();
        evolutions.push(evolve(&ops, *t_max, &snaps, &format!("delta={delta}"))?);
    }

    let mut series = Vec::with_capacity(3);
    for evo in &evolutions {
        let mut s = Series::new(evo.trace.population.clone());
        let rate = approach_rate(&evo.trace, cue).unwrap_or(f64::NAN);
        s.metric("approach_rate", rate);
        let monotone = monotone_within_noise(&evo.trace);
        gate(
            bundle,
            format!("{}_monotone", evo.trace.population),
            *evo.trace.mean_q.last().expect("t_max >= 1"),
            "no drop beyond 3 stderr",
            monotone,
        );
        gate(bundle, format!("{}_approach_rate", evo.trace.population), rate, "> 0", rate > 0.0);
        series.push(s);
    }
    let mut cue_series = Series::new("cue");
    cue_series.metric("mean_q_exact", cue);
    series.push(cue_series);

    let (slow, fast) = (&evolutions[0], &evolutions[1]);
    let mut table = Vec::with_capacity(pairs.len());
    let mut hists: Vec<(String, Histogram)> = Vec::new();
    let b = &settings.bins.amplitude;
    for &[ts, tf] in pairs {
        let (qs, ses) = slow.trace.at(ts).expect("pair time within t_max");
        let (qf, sef) = fast.trace.at(tf).expect("pair time within t_max");
        let xs = snapshot(slow, ts);
        let xf = snapshot(fast, tf);
        let ks = ks_two_sample(xs, xf)?;
        hists.push((
            format!("{} t={ts}", slow.trace.population),
            Histogram::from_samples(b.lo, b.hi, b.count, xs)?,
        ));
        hists.push((
            format!("{} t={tf}", fast.trace.population),
            Histogram::from_samples(b.lo, b.hi, b.count, xf)?,
        ));
        gate(bundle, format!("pair_{ts}_{tf}_mean_q"), (qs - qf).abs(), "<= 0.01", (qs - qf).abs() <= 0.01);
        gate(bundle, format!("pair_{ts}_{tf}_element_ks"), ks, "<= 0.05", ks <= 0.05);
        table.push((ts, tf, qs, ses, qf, sef, ks));
    }

    let traces: Vec<_> = evolutions.iter().map(|e| e.trace.clone()).collect();
    write_traces(bundle, "traces.csv", &traces)?;
    write_histograms(bundle, "element_hist.csv", hists.iter().map(|(l, h)| (l.as_str(), h)))?;
    bundle.write("matched_pairs.csv", |w| {
        writeln!(w, "t_slow,t_fast,mean_q_slow,stderr_slow,mean_q_fast,stderr_fast,abs_diff,ks_elements")?;
        for (ts, tf, qs, ses, qf, sef, ks) in &table {
            writeln!(
                w,
                "{ts},{tf},{qs:.12},{ses:.12},{qf:.12},{sef:.12},{:.12},{ks:.12}",
                (qs - qf).abs()
            )?;
        }
        Ok(())
    })?;
    write_summary(bundle, &series)?;
    write_references(bundle, &settings.bins)?;
    Ok(())
}

fn snapshot(evo: &Evolution, t: u64) -> &[f64] {
    evo.snapshots
        .iter()
        .find(|(s, _)| *s == t)
        .map(|(_, xs)| xs.as_slice())
        .expect("pair times are snapshots")
}
