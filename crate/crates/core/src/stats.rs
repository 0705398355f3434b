//! Empirical distributions and the reference laws they are compared with.
//!
//! Rescaled amplitudes `x = N|U_ij|²` and `y = N|c^l_k|²` are compared with
//! the exponential law `e^{−x}`; unfolded eigenangle spacings with the GUE
//! Wigner surmise or the Poisson law. Closeness is always measured by the
//! Kolmogorov-Smirnov sup distance.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{SpectralDecomposition, UnitaryMatrix};

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Sample mean with standard error `s/√n` (`s` the `n−1` standard deviation).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanStderr {
    pub mean: f64,
    pub stderr: f64,
    pub count: usize,
}

impl MeanStderr {
    pub fn from_samples(xs: &[f64]) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::EmptyInput);
        }
        let n = xs.len();
        let mean = xs.iter().copied().collect::<CompensatedSum>().value() / n as f64;
        let stderr = if n > 1 {
            let ss = xs
                .iter()
                .map(|&x| (x - mean) * (x - mean))
                .collect::<CompensatedSum>()
                .value();
            (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt()
        } else {
            0.0
        };
        Ok(Self {
            mean,
            stderr,
            count: n,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    Counts,
    Density,
}

/// Binned counts over strictly increasing edges. Values outside the edges
/// are tallied in `underflow`/`overflow` and excluded from the density, so
/// the density always integrates to one over the binned range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub normalization: Normalization,
    pub underflow: u64,
    pub overflow: u64,
}

impl Histogram {
    pub fn with_edges(bin_edges: Vec<f64>, normalization: Normalization) -> Result<Self> {
        if bin_edges.len() < 2 {
            return Err(Error::Domain("histogram needs at least two edges".into()));
        }
        if !bin_edges.windows(2).all(|w| w[0] < w[1]) || bin_edges.iter().any(|e| !e.is_finite()) {
            return Err(Error::Domain("histogram edges must be finite and strictly increasing".into()));
        }
        let bins = bin_edges.len() - 1;
        Ok(Self {
            bin_edges,
            counts: vec![0; bins],
            normalization,
            underflow: 0,
            overflow: 0,
        })
    }

    /// `bins` equal-width bins on `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if bins == 0 || !(lo < hi) {
            return Err(Error::Domain(format!("invalid uniform binning [{lo}, {hi}] x {bins}")));
        }
        let width = (hi - lo) / bins as f64;
        let mut edges: Vec<f64> = (0..bins).map(|i| lo + width * i as f64).collect();
        edges.push(hi);
        Self::with_edges(edges, Normalization::Density)
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    /// Bins are half-open `[e_i, e_{i+1})` except the last, which includes
    /// its right edge.
    pub fn add(&mut self, x: f64) {
        let lo = self.bin_edges[0];
        let hi = *self.bin_edges.last().expect("edges");
        if x.is_nan() || x < lo {
            self.underflow += 1;
        } else if x > hi {
            self.overflow += 1;
        } else if x == hi {
            *self.counts.last_mut().expect("bins") += 1;
        } else {
            let idx = self.bin_edges.partition_point(|&e| e <= x) - 1;
            self.counts[idx] += 1;
        }
    }

    pub fn fill(&mut self, xs: &[f64]) {
        for &x in xs {
            self.add(x);
        }
    }

    pub fn from_samples(lo: f64, hi: f64, bins: usize, xs: &[f64]) -> Result<Self> {
        let mut h = Self::uniform(lo, hi, bins)?;
        h.fill(xs);
        Ok(h)
    }

    /// Adds the counts of `other`, which must share the same edges.
    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if self.bin_edges != other.bin_edges {
            return Err(Error::Domain("cannot merge histograms with different edges".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.underflow += other.underflow;
        self.overflow += other.overflow;
        Ok(())
    }

    pub fn in_range(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn densities(&self) -> Vec<f64> {
        let total = self.in_range() as f64;
        self.counts
            .iter()
            .zip(self.bin_edges.windows(2))
            .map(|(&c, w)| {
                if total == 0.0 {
                    0.0
                } else {
                    c as f64 / (total * (w[1] - w[0]))
                }
            })
            .collect()
    }

    /// Counts or densities, per `normalization`.
    pub fn values(&self) -> Vec<f64> {
        match self.normalization {
            Normalization::Counts => self.counts.iter().map(|&c| c as f64).collect(),
            Normalization::Density => self.densities(),
        }
    }

    /// Rows `bin_left,bin_right,count,density`, each prefixed by `prefix`
    /// (e.g. a series label and a comma) when given.
    pub fn write_rows<W: Write>(&self, mut w: W, prefix: &str) -> std::io::Result<()> {
        for ((edges, &count), density) in self
            .bin_edges
            .windows(2)
            .zip(&self.counts)
            .zip(self.densities())
        {
            writeln!(
                w,
                "{prefix}{:.6},{:.6},{},{:.12}",
                edges[0], edges[1], count, density
            )?;
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "bin_left,bin_right,count,density")?;
        self.write_rows(w, "")
    }
}

/// Unfolded nearest-neighbour eigenangle spacings; unit mean.
#[derive(Clone, Debug, PartialEq)]
pub struct SpacingSample {
    pub spacings: Vec<f64>,
}

impl SpacingSample {
    pub fn mean(&self) -> f64 {
        self.spacings.iter().copied().collect::<CompensatedSum>().value() / self.spacings.len() as f64
    }
}

/// `N·|U_ij|²` for every entry.
pub fn rescaled_element_amplitudes(u: &UnitaryMatrix) -> Vec<f64> {
    let n = u.dim() as f64;
    u.matrix().entries().iter().map(|z| n * z.norm_sqr()).collect()
}

/// `N·|c^l_k|²` for every component of every eigenvector.
pub fn eigenvector_amplitudes(decomp: &SpectralDecomposition) -> Vec<f64> {
    let n = decomp.dim() as f64;
    decomp
        .eigenvectors
        .iter()
        .flat_map(|v| v.amplitudes().iter().map(move |z| n * z.norm_sqr()))
        .collect()
}

/// Spacings of sorted angles in `[0, 2π)`, rescaled by `N/(2π)`, including
/// the wrap-around gap so that there are exactly `N` of them.
pub fn spacings_from_angles(sorted_angles: &[f64]) -> SpacingSample {
    let n = sorted_angles.len();
    let scale = n as f64 / TAU;
    let mut spacings: Vec<f64> = sorted_angles
        .windows(2)
        .map(|w| (w[1] - w[0]) * scale)
        .collect();
    if n >= 1 {
        spacings.push((sorted_angles[0] + TAU - sorted_angles[n - 1]) * scale);
    }
    SpacingSample { spacings }
}

pub fn eigenangle_spacings(decomp: &SpectralDecomposition) -> SpacingSample {
    spacings_from_angles(&decomp.eigenangles)
}

/// Finite-`N` amplitude density `(N−1)(1−η)^{N−2}` on `[0, 1]`.
pub fn ref_pdf_cue_element_finite(dim: usize, eta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Domain(format!("eta must lie in [0, 1], got {eta}")));
    }
    if dim < 2 {
        return Err(Error::Domain(format!("dimension must be >= 2, got {dim}")));
    }
    let n = dim as f64;
    Ok((n - 1.0) * (1.0 - eta).powi(dim as i32 - 2))
}

/// CDF of [`ref_pdf_cue_element_finite`]: `1 − (1−η)^{N−1}`.
pub fn cue_element_finite_cdf(dim: usize, eta: f64) -> f64 {
    let eta = eta.clamp(0.0, 1.0);
    1.0 - (1.0 - eta).powi(dim as i32 - 1)
}

/// Limit law `e^{−y}` of the rescaled amplitude.
pub fn ref_pdf_cue_element_limit(y: f64) -> Result<f64> {
    if y < 0.0 || y.is_nan() {
        return Err(Error::Domain(format!("y must be non-negative, got {y}")));
    }
    Ok((-y).exp())
}

/// `1 − e^{−x}` for `x ≥ 0`, zero below.
pub fn exponential_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -(-x).exp_m1()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpacingLaw {
    /// GUE Wigner surmise `(32/π²)s²e^{−4s²/π}`.
    WignerDysonGue,
    /// `e^{−s}`.
    Poisson,
}

impl SpacingLaw {
    pub fn pdf(&self, s: f64) -> f64 {
        if s < 0.0 {
            return 0.0;
        }
        match self {
            Self::WignerDysonGue => 32.0 / (PI * PI) * s * s * (-4.0 * s * s / PI).exp(),
            Self::Poisson => (-s).exp(),
        }
    }

    pub fn cdf(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match self {
            Self::WignerDysonGue => {
                let u = 2.0 * s / PI.sqrt();
                libm::erf(u) - 4.0 * s / PI * (-4.0 * s * s / PI).exp()
            }
            Self::Poisson => exponential_cdf(s),
        }
    }
}

pub fn ref_pdf_spacing(law: SpacingLaw, s: f64) -> f64 {
    law.pdf(s)
}

/// `sup_x |F_n(x) − F(x)|` between the empirical CDF of `samples` and `cdf`.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut worst: f64 = 0.0;
    let mut i = 0;
    while i < xs.len() {
        // step through ties so the ECDF jump is taken once
        let mut j = i;
        while j + 1 < xs.len() && xs[j + 1] == xs[i] {
            j += 1;
        }
        let f = cdf(xs[i]);
        let below = i as f64 / n;
        let above = (j + 1) as f64 / n;
        worst = worst.max((f - below).abs()).max((above - f).abs());
        i = j + 1;
    }
    Ok(worst)
}

/// Two-sample KS statistic `sup_x |F_a(x) − F_b(x)|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut worst: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        worst = worst.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(worst)
}

/// Rows `x,exp_law,wigner_dyson,poisson` of the reference densities on
/// `grid`.
pub fn write_reference_curves<W: Write>(mut w: W, grid: &[f64]) -> std::io::Result<()> {
    writeln!(w, "x,exp_law,wigner_dyson,poisson")?;
    for &x in grid {
        let x = x.max(0.0);
        writeln!(
            w,
            "{:.6},{:.12},{:.12},{:.12}",
            x,
            (-x).exp(),
            SpacingLaw::WignerDysonGue.pdf(x),
            SpacingLaw::Poisson.pdf(x)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::substream;
    use crate::linalg::{eig_unitary, UnitaryMatrix};
    use rand::Rng;

    // composite Simpson on [a, b]; test-only oracle
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let n = n + n % 2;
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + h * i as f64);
        }
        s * h / 3.0
    }

    #[test]
    fn finite_pdf_values_and_normalization() {
        assert_eq!(ref_pdf_cue_element_finite(256, 0.0).unwrap(), 255.0);
        assert_eq!(ref_pdf_cue_element_finite(256, 1.0).unwrap(), 0.0);
        assert!(ref_pdf_cue_element_finite(8, 1.1).is_err());
        assert!(ref_pdf_cue_element_finite(8, -0.1).is_err());
        for n in [4, 16, 256] {
            let integral = simpson(|e| ref_pdf_cue_element_finite(n, e).unwrap(), 0.0, 1.0, 20000);
            assert!((integral - 1.0).abs() < 1e-9, "N={n}: {integral}");
        }
    }

    #[test]
    fn limit_pdf_and_convergence() {
        assert_eq!(ref_pdf_cue_element_limit(0.0).unwrap(), 1.0);
        assert!(ref_pdf_cue_element_limit(-1.0).is_err());
        let integral = simpson(|y| ref_pdf_cue_element_limit(y).unwrap(), 0.0, 60.0, 20000);
        assert!((integral - 1.0).abs() < 1e-9);
        // density of y = Nη is N⁻¹·pdf_finite(N, y/N)
        let n = 256.0;
        let rescaled = ref_pdf_cue_element_finite(256, 1.0 / n).unwrap() / n;
        assert!((rescaled - (-1.0f64).exp()).abs() <= 0.01);
    }

    #[test]
    fn spacing_laws_normalized_with_unit_mean() {
        for law in [SpacingLaw::WignerDysonGue, SpacingLaw::Poisson] {
            let mass = simpson(|s| law.pdf(s), 0.0, 60.0, 60000);
            let mean = simpson(|s| s * law.pdf(s), 0.0, 60.0, 60000);
            assert!((mass - 1.0).abs() < 1e-6, "{law:?} mass {mass}");
            assert!((mean - 1.0).abs() < 1e-6, "{law:?} mean {mean}");
        }
        assert_eq!(ref_pdf_spacing(SpacingLaw::Poisson, 0.0), 1.0);
        assert_eq!(ref_pdf_spacing(SpacingLaw::WignerDysonGue, 0.0), 0.0);
    }

    #[test]
    fn spacing_cdfs_match_quadrature() {
        for law in [SpacingLaw::WignerDysonGue, SpacingLaw::Poisson] {
            for s in [0.1, 0.5, 1.0, 2.0, 3.5] {
                let q = simpson(|x| law.pdf(x), 0.0, s, 4000);
                assert!((law.cdf(s) - q).abs() < 1e-10, "{law:?} at {s}");
            }
        }
        for eta in [0.001, 0.01, 0.2] {
            let q = simpson(|e| ref_pdf_cue_element_finite(32, e).unwrap(), 0.0, eta, 4000);
            assert!((cue_element_finite_cdf(32, eta) - q).abs() < 1e-10);
        }
    }

    #[test]
    fn ks_on_quantiles_and_constants() {
        let n = 1000;
        let xs: Vec<f64> = (1..=n)
            .map(|k| -(1.0 - k as f64 / (n + 1) as f64).ln())
            .collect();
        let d = ks_distance(&xs, exponential_cdf).unwrap();
        assert!(d <= 1.0 / (n + 1) as f64 + 1e-12, "{d}");

        let constant = vec![0.7; 50];
        assert!(ks_distance(&constant, exponential_cdf).unwrap() >= 0.5);
        assert!(matches!(ks_distance(&[], exponential_cdf), Err(Error::EmptyInput)));
    }

    #[test]
    fn ks_random_exponentials() {
        let mut rng = substream(2024, 0);
        let xs: Vec<f64> = (0..100_000).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let d = ks_distance(&xs, exponential_cdf).unwrap();
        assert!(d <= 0.006, "{d}");
    }

    #[test]
    fn two_sample_ks_basics() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(ks_two_sample(&a, &a).unwrap(), 0.0);
        assert_eq!(ks_two_sample(&a, &[10.0, 11.0]).unwrap(), 1.0);
        assert!((ks_two_sample(&a, &[2.5]).unwrap() - 0.5).abs() < 1e-15);
        assert!(ks_two_sample(&a, &[]).is_err());
    }

    #[test]
    fn equally_spaced_angles_have_unit_spacings() {
        let n = 12;
        let angles: Vec<f64> = (0..n).map(|k| TAU * k as f64 / n as f64 + 0.1).collect();
        let s = spacings_from_angles(&angles);
        assert_eq!(s.spacings.len(), n);
        assert!(s.spacings.iter().all(|x| (x - 1.0).abs() < 1e-12));
    }

    #[test]
    fn element_amplitudes_of_diagonal() {
        let u = UnitaryMatrix::from_phases(&[0.1, 0.2, 0.3, 0.4]);
        let xs = rescaled_element_amplitudes(&u);
        assert_eq!(xs.iter().filter(|&&x| (x - 4.0).abs() < 1e-12).count(), 4);
        assert_eq!(xs.iter().filter(|&&x| x == 0.0).count(), 12);
    }

    #[test]
    fn identity_eigenvector_amplitudes() {
        let d = eig_unitary(&UnitaryMatrix::identity(8)).unwrap();
        let ys = eigenvector_amplitudes(&d);
        assert_eq!(ys.iter().filter(|&&y| (y - 8.0).abs() < 1e-9).count(), 8);
        assert_eq!(ys.iter().filter(|&&y| y.abs() < 1e-9).count(), 56);
    }

    #[test]
    fn histogram_edges_and_density() {
        let mut h = Histogram::uniform(0.0, 4.0, 4).unwrap();
        h.fill(&[0.0, 0.5, 1.0, 3.999, 4.0, -1.0, 5.0, f64::NAN]);
        assert_eq!(h.counts, vec![2, 1, 0, 2]);
        assert_eq!((h.underflow, h.overflow), (2, 1));
        let integral: f64 = h.densities().iter().sum::<f64>() * 1.0;
        assert!((integral - 1.0).abs() < 1e-12);
        assert!(Histogram::with_edges(vec![0.0, 0.0, 1.0], Normalization::Counts).is_err());
        assert!(Histogram::uniform(1.0, 0.0, 3).is_err());
    }

    #[test]
    fn histogram_csv() {
        let h = Histogram::from_samples(0.0, 2.0, 2, &[0.5, 1.5, 1.6]).unwrap();
        let mut buf = Vec::new();
        h.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "bin_left,bin_right,count,density\n\
             0.000000,1.000000,1,0.333333333333\n\
             1.000000,2.000000,2,0.666666666667\n"
        );
    }

    #[test]
    fn mean_stderr_values() {
        let m = MeanStderr::from_samples(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m.mean, 2.5);
        // s² = 5/3
        assert!((m.stderr - (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(MeanStderr::from_samples(&[7.0]).unwrap().stderr, 0.0);
        assert!(MeanStderr::from_samples(&[]).is_err());
    }
}
