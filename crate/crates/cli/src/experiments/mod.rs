//! Experiment runners. Each one fills a [`Bundle`] with CSV files and
//! records its acceptance gates as [`Check`]s.
//!
//! Every CSV has a header row. Histogram files are in long format with a
//! leading `series` column so one file carries all series of a panel.

mod counterexamples;
mod dimension_scan;
mod export;
mod interpolating;
mod interpolating_time;
mod maps;
mod pseudorandom;

use std::io::Write;

use rayon::prelude::*;

use rmt_entangle::ensembles::EnsembleSpec;
use rmt_entangle::entanglement::{powers_at, q_over_basis, EntanglementTrace};
use rmt_entangle::linalg::{eig_unitary, UnitaryMatrix};
use rmt_entangle::stats::{
    eigenangle_spacings, eigenvector_amplitudes, exponential_cdf, ks_distance,
    rescaled_element_amplitudes, write_reference_curves, Histogram, MeanStderr, SpacingLaw,
};

use crate::bundle::{Bundle, Check};
use crate::config::{Bins, BinSpec, Experiment, Settings};
use crate::error::CliError;

pub fn run(settings: &Settings, bundle: &mut Bundle) -> Result<(), CliError> {
    match settings.experiment {
        Experiment::FigInterpolating => interpolating::run(settings, bundle),
        Experiment::FigPseudorandom => pseudorandom::run(settings, bundle),
        Experiment::FigDimensionScan => dimension_scan::run(settings, bundle),
        Experiment::FigMaps => maps::run(settings, bundle),
        Experiment::FigInterpolatingTime => interpolating_time::run(settings, bundle),
        Experiment::Counterexamples => counterexamples::run(settings, bundle),
        Experiment::Export => export::run(settings, bundle),
    }
}

/// Seed of series `index`, derived from the run seed so that series are
/// independent but the whole run is fixed by one number.
pub fn series_seed(seed: u64, index: u64) -> u64 {
    seed ^ (index + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn histogram(spec: &BinSpec, xs: &[f64]) -> Result<Histogram, CliError> {
    Ok(Histogram::from_samples(spec.lo, spec.hi, spec.count, xs)?)
}

/// Raw pooled observables of one ensemble.
#[derive(Default)]
pub struct Pooled {
    pub elements: Vec<f64>,
    pub eigenvectors: Vec<f64>,
    pub spacings: Vec<f64>,
    pub q: Vec<f64>,
}

/// Draws `max(spectral, q_samples)` operators. Element amplitudes and, if
/// `spectra` is set, eigenvector amplitudes and spacings come from the
/// first `spectral`; one-iteration `Q` values from the first `q_samples`.
pub fn pool(spec: &EnsembleSpec, spectral: usize, q_samples: usize, spectra: bool) -> Result<Pooled, CliError> {
    let total = spectral.max(q_samples) as u64;
    let parts: Vec<Pooled> = (0..total)
        .into_par_iter()
        .map(|i| -> Result<Pooled, CliError> {
            let u = spec.sample(i)?;
            let mut p = Pooled::default();
            if (i as usize) < spectral {
                p.elements = rescaled_element_amplitudes(&u);
                if spectra {
                    let d = eig_unitary(&u)?;
                    p.eigenvectors = eigenvector_amplitudes(&d);
                    p.spacings = eigenangle_spacings(&d).spacings;
                }
            }
            if (i as usize) < q_samples {
                p.q = q_over_basis(u.matrix())?;
            }
            Ok(p)
        })
        .collect::<Result<_, _>>()?;
    let mut out = Pooled::default();
    for p in parts {
        out.elements.extend(p.elements);
        out.eigenvectors.extend(p.eigenvectors);
        out.spacings.extend(p.spacings);
        out.q.extend(p.q);
    }
    Ok(out)
}

/// Histograms and scalar metrics of one series.
pub struct Series {
    pub label: String,
    pub elements: Option<Histogram>,
    pub eigenvectors: Option<Histogram>,
    pub spacings: Option<Histogram>,
    pub q: Option<Histogram>,
    pub metrics: Vec<(String, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            elements: None,
            eigenvectors: None,
            spacings: None,
            q: None,
            metrics: Vec::new(),
        }
    }

    pub fn metric(&mut self, name: &str, value: f64) {
        self.metrics.push((name.to_string(), value));
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    /// Fills histograms and the standard metrics from `pooled`.
    pub fn from_pooled(label: impl Into<String>, pooled: &Pooled, bins: &Bins) -> Result<Self, CliError> {
        let mut s = Self::new(label);
        if !pooled.elements.is_empty() {
            let h = histogram(&bins.amplitude, &pooled.elements)?;
            s.metric("elements_overflow", h.overflow as f64);
            s.elements = Some(h);
            s.metric("ks_elements_exp", ks_distance(&pooled.elements, exponential_cdf)?);
        }
        if !pooled.eigenvectors.is_empty() {
            let h = histogram(&bins.amplitude, &pooled.eigenvectors)?;
            s.metric("eigenvectors_overflow", h.overflow as f64);
            s.eigenvectors = Some(h);
            s.metric("ks_eigenvectors_exp", ks_distance(&pooled.eigenvectors, exponential_cdf)?);
        }
        if !pooled.spacings.is_empty() {
            let h = histogram(&bins.spacing, &pooled.spacings)?;
            s.metric("spacings_overflow", h.overflow as f64);
            s.spacings = Some(h);
            s.metric(
                "ks_spacings_wigner_dyson",
                ks_distance(&pooled.spacings, |x| SpacingLaw::WignerDysonGue.cdf(x))?,
            );
            s.metric(
                "ks_spacings_poisson",
                ks_distance(&pooled.spacings, |x| SpacingLaw::Poisson.cdf(x))?,
            );
        }
        if !pooled.q.is_empty() {
            s.q = Some(histogram(&bins.q, &pooled.q)?);
            let m = MeanStderr::from_samples(&pooled.q)?;
            s.metric("mean_q", m.mean);
            s.metric("stderr_q", m.stderr);
            s.metric("count_q", m.count as f64);
        }
        Ok(s)
    }
}

pub const HIST_HEADER: &str = "series,bin_left,bin_right,count,density";

/// Writes one long-format histogram file from `(label, histogram)` pairs.
pub fn write_histograms<'a>(
    bundle: &mut Bundle,
    name: &str,
    series: impl IntoIterator<Item = (&'a str, &'a Histogram)>,
) -> Result<(), CliError> {
    let rows: Vec<(&str, &Histogram)> = series.into_iter().collect();
    bundle.write(name, |w| {
        writeln!(w, "{HIST_HEADER}")?;
        for (label, h) in rows {
            h.write_rows(&mut *w, &format!("{label},"))?;
        }
        Ok(())
    })
}

/// The four standard panels: element, eigenvector, spacing and `Q`
/// histograms, each skipped when no series carries it.
pub fn write_panels(bundle: &mut Bundle, series: &[Series]) -> Result<(), CliError> {
    type Pick = fn(&Series) -> Option<&Histogram>;
    let panels: [(&str, Pick); 4] = [
        ("element_hist.csv", |s| s.elements.as_ref()),
        ("eigvec_hist.csv", |s| s.eigenvectors.as_ref()),
        ("spacing_hist.csv", |s| s.spacings.as_ref()),
        ("q_hist.csv", |s| s.q.as_ref()),
    ];
    for (name, pick) in panels {
        if series.iter().any(|s| pick(s).is_some()) {
            write_histograms(
                bundle,
                name,
                series.iter().filter_map(|s| pick(s).map(|h| (s.label.as_str(), h))),
            )?;
        }
    }
    Ok(())
}

/// `series,metric,value` rows.
pub fn write_summary(bundle: &mut Bundle, series: &[Series]) -> Result<(), CliError> {
    bundle.write("summary.csv", |w| {
        writeln!(w, "series,metric,value")?;
        for s in series {
            for (metric, value) in &s.metrics {
                writeln!(w, "{},{metric},{value:.12}", s.label)?;
            }
        }
        Ok(())
    })
}

/// Reference densities on a 0.02 grid covering both amplitude and spacing
/// ranges.
pub fn write_references(bundle: &mut Bundle, bins: &Bins) -> Result<(), CliError> {
    let hi = bins.amplitude.hi.max(bins.spacing.hi).max(0.0);
    let steps = (hi / 0.02).round() as usize;
    let grid: Vec<f64> = (0..=steps).map(|i| i as f64 * 0.02).collect();
    bundle.write("reference_curves.csv", |w| Ok(write_reference_curves(w, &grid)?))
}

pub fn write_traces(bundle: &mut Bundle, name: &str, traces: &[EntanglementTrace]) -> Result<(), CliError> {
    bundle.write(name, |w| {
        for (i, t) in traces.iter().enumerate() {
            t.write_csv(&mut *w, i == 0)?;
        }
        Ok(())
    })
}

/// `⟨Q(t)⟩` for `t = 1..=t_max` over all basis states of all `operators`,
/// plus pooled rescaled element amplitudes of `Uᵗ` at `snapshots`.
pub struct Evolution {
    pub trace: EntanglementTrace,
    pub snapshots: Vec<(u64, Vec<f64>)>,
}

pub fn evolve(
    operators: &[UnitaryMatrix],
    t_max: u64,
    snapshots: &[u64],
    population: &str,
) -> Result<Evolution, CliError> {
    let times: Vec<u64> = (1..=t_max).collect();
    let mut snap_times = snapshots.to_vec();
    snap_times.sort_unstable();
    snap_times.dedup();
    let per_op: Vec<(Vec<Vec<f64>>, Vec<Vec<f64>>)> = operators
        .par_iter()
        .map(|u| -> Result<_, CliError> {
            let n = u.dim() as f64;
            let mut qs = Vec::with_capacity(times.len());
            let mut snaps = Vec::with_capacity(snap_times.len());
            for (t, p) in powers_at(u, &times)? {
                qs.push(q_over_basis(&p)?);
                if snap_times.binary_search(&t).is_ok() {
                    snaps.push(p.entries().iter().map(|z| n * z.norm_sqr()).collect());
                }
            }
            Ok((qs, snaps))
        })
        .collect::<Result<_, _>>()?;

    let mut pooled_q: Vec<Vec<f64>> = vec![Vec::new(); times.len()];
    let mut pooled_snaps: Vec<Vec<f64>> = vec![Vec::new(); snap_times.len()];
    for (qs, snaps) in per_op {
        for (acc, q) in pooled_q.iter_mut().zip(qs) {
            acc.extend(q);
        }
        for (acc, s) in pooled_snaps.iter_mut().zip(snaps) {
            acc.extend(s);
        }
    }
    let mut trace = EntanglementTrace {
        times: times.clone(),
        mean_q: Vec::with_capacity(times.len()),
        stderr: Vec::with_capacity(times.len()),
        population: population.to_string(),
    };
    for qs in &pooled_q {
        let m = MeanStderr::from_samples(qs)?;
        trace.mean_q.push(m.mean);
        trace.stderr.push(m.stderr);
    }
    Ok(Evolution {
        trace,
        snapshots: snap_times.into_iter().zip(pooled_snaps).collect(),
    })
}

/// Least-squares rate `λ` of `target − ⟨Q(t)⟩ ≈ A·e^{−λt}` over points where
/// the gap is positive; `None` with fewer than two such points.
pub fn approach_rate(trace: &EntanglementTrace, target: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = trace
        .times
        .iter()
        .zip(&trace.mean_q)
        .filter(|(_, &q)| target - q > 0.0)
        .map(|(&t, &q)| (t as f64, (target - q).ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(-sxy / sxx)
}

/// True when no step drops by more than three combined standard errors.
pub fn monotone_within_noise(trace: &EntanglementTrace) -> bool {
    trace
        .mean_q
        .windows(2)
        .zip(trace.stderr.windows(2))
        .all(|(q, se)| q[1] >= q[0] - 3.0 * (se[0] + se[1]))
}

pub fn gate(bundle: &mut Bundle, name: impl Into<String>, value: f64, gate: &str, passed: bool) {
    bundle.check(Check::new(name, value, gate, passed));
}
