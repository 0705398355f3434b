//! The Meyer-Wallach measure `Q = 2 − (2/n)·Σ_j Tr[ρ_j²]`, its CUE average,
//! the amplitude-moment estimator of `⟨Q⟩`, and `⟨Q(t)⟩` traces averaged
//! over computational basis states.

use std::collections::HashMap;
use std::io::Write;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    matrix_power, qubit_count, reduced_density_bit, reduced_density_qubit, ComplexMatrix,
    PureState, UnitaryMatrix, ACCUMULATED_TOL,
};
use crate::stats::MeanStderr;

const Q_SLACK: f64 = 1e-12;

fn clamp_q(q: f64) -> f64 {
    if (-Q_SLACK..0.0).contains(&q) {
        0.0
    } else if (1.0..=1.0 + Q_SLACK).contains(&q) {
        1.0
    } else {
        q
    }
}

fn register_size(dim: usize) -> Result<usize> {
    match qubit_count(dim) {
        Some(n) if n >= 1 => Ok(n),
        Some(_) => Err(Error::Domain("Q needs at least one qubit".into())),
        None => Err(Error::NotPowerOfTwo(dim)),
    }
}

/// `Q` of a normalized `n`-qubit state.
pub fn q_measure(state: &PureState) -> Result<f64> {
    let n = register_size(state.dim())?;
    let mut purity_sum = 0.0;
    for j in 1..=n {
        purity_sum += reduced_density_qubit(state, j)?.normalized_purity();
    }
    Ok(clamp_q(2.0 - 2.0 * purity_sum / n as f64))
}

/// `Q` of raw amplitudes; the caller guarantees a power-of-two length.
fn q_of_amplitudes(amps: &[C64], n: usize) -> f64 {
    let purity_sum: f64 = (0..n).map(|bit| reduced_density_bit(amps, bit).normalized_purity()).sum();
    clamp_q(2.0 - 2.0 * purity_sum / n as f64)
}

/// CUE average `(N−2)/(N+1)`.
pub fn cue_mean_q(dim: usize) -> f64 {
    assert!(dim >= 2, "cue_mean_q needs N >= 2");
    let n = dim as f64;
    (n - 2.0) / (n + 1.0)
}

/// `Q(U e_k)` for every basis state `e_k`, i.e. for every column.
pub fn q_over_basis(u: &ComplexMatrix) -> Result<Vec<f64>> {
    let n = register_size(u.dim())?;
    let columns = u.transpose();
    Ok((0..u.dim())
        .map(|k| q_of_amplitudes(columns.row(k), n))
        .collect())
}

/// Mean and standard error of `Q(Uᵗ e_k)` over all basis states.
pub fn mean_q_over_basis(u: &UnitaryMatrix, t: u64) -> Result<MeanStderr> {
    let p = matrix_power(u, t)?;
    let qs = q_over_basis(p.matrix())?;
    MeanStderr::from_samples(&qs)
}

/// Amplitude-moment estimator
/// `4(Σ_{m≤N/2}Σ_{n>N/2}⟨p_m p_n⟩ − Σ_{q≤N/2}⟨p_q p_{q+N/2}⟩)` with
/// `p = |c|²`, moments averaged over `samples`.
///
/// The split at `N/2` is the cut of qubit 1 (most significant bit).
pub fn q_from_amplitude_moments<S: AsRef<[f64]>>(samples: &[S]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let dim = samples[0].as_ref().len();
    register_size(dim)?;
    let half = dim / 2;
    let mut values = Vec::with_capacity(samples.len());
    for s in samples {
        let p = s.as_ref();
        if p.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: p.len(),
            });
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized(total));
        }
        let low: f64 = p[..half].iter().sum();
        let high: f64 = p[half..].iter().sum();
        let paired: f64 = p[..half].iter().zip(&p[half..]).map(|(a, b)| a * b).sum();
        values.push(4.0 * (low * high - paired));
    }
    Ok(MeanStderr::from_samples(&values)?.mean)
}

/// `⟨Q(t)⟩` with standard errors, pooled over basis states and samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntanglementTrace {
    pub times: Vec<u64>,
    pub mean_q: Vec<f64>,
    pub stderr: Vec<f64>,
    pub population: String,
}

impl EntanglementTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn at(&self, t: u64) -> Option<(f64, f64)> {
        self.times
            .iter()
            .position(|&x| x == t)
            .map(|i| (self.mean_q[i], self.stderr[i]))
    }

    /// Writes `t,mean_q,stderr,population_tag` rows, with header when
    /// `header` is set.
    pub fn write_csv<W: Write>(&self, mut w: W, header: bool) -> std::io::Result<()> {
        if header {
            writeln!(w, "t,mean_q,stderr,population_tag")?;
        }
        for i in 0..self.len() {
            writeln!(
                w,
                "{},{:.12},{:.12},{}",
                self.times[i], self.mean_q[i], self.stderr[i], self.population
            )?;
        }
        Ok(())
    }
}

/// Powers `Uᵗ` at the requested (ascending, deduplicated) times. Gaps are
/// bridged by cached `U^Δ` factors so sparse time lists stay cheap.
pub fn powers_at(u: &UnitaryMatrix, times: &[u64]) -> Result<Vec<(u64, ComplexMatrix)>> {
    let mut sorted: Vec<u64> = times.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut steps: HashMap<u64, ComplexMatrix> = HashMap::new();
    let mut current = ComplexMatrix::identity(u.dim());
    let mut now = 0;
    let mut out = Vec::with_capacity(sorted.len());
    for t in sorted {
        let delta = t - now;
        if delta > 0 {
            if !steps.contains_key(&delta) {
                let step = matrix_power(u, delta)?.into_matrix();
                steps.insert(delta, step);
            }
            current = steps[&delta].matmul(&current)?;
            now = t;
        }
        let certified = UnitaryMatrix::certify_with(current, ACCUMULATED_TOL)?;
        current = certified.into_matrix();
        out.push((t, current.clone()));
    }
    Ok(out)
}

/// Per-time `Q` values over all basis states for each operator.
pub fn q_values_at(operators: &[UnitaryMatrix], times: &[u64]) -> Result<Vec<(u64, Vec<f64>)>> {
    let per_op: Vec<Vec<(u64, Vec<f64>)>> = operators
        .par_iter()
        .map(|u| {
            powers_at(u, times)?
                .into_iter()
                .map(|(t, p)| Ok((t, q_over_basis(&p)?)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut merged: Vec<(u64, Vec<f64>)> = Vec::new();
    for op in per_op {
        for (i, (t, qs)) in op.into_iter().enumerate() {
            if merged.len() <= i {
                merged.push((t, Vec::new()));
            }
            merged[i].1.extend(qs);
        }
    }
    Ok(merged)
}

/// `⟨Q(t)⟩` over every basis state of every operator in `operators`.
pub fn entanglement_trace(
    operators: &[UnitaryMatrix],
    times: &[u64],
    population: impl Into<String>,
) -> Result<EntanglementTrace> {
    if operators.is_empty() || times.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut trace = EntanglementTrace {
        times: Vec::new(),
        mean_q: Vec::new(),
        stderr: Vec::new(),
        population: population.into(),
    };
    for (t, qs) in q_values_at(operators, times)? {
        let stats = MeanStderr::from_samples(&qs)?;
        trace.times.push(t);
        trace.mean_q.push(stats.mean);
        trace.stderr.push(stats.stderr);
    }
    Ok(trace)
}
