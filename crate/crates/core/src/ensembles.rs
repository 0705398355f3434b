//! Unitary ensembles: Hurwitz-parameterized CUE, the δ-interpolating family
//! between diagonal random phases and CUE, a QR-based Haar oracle, and two
//! counterexample constructions that decouple spectra from matrix elements.
//!
//! # Random streams
//!
//! Sample `i` of an ensemble with seed `s` draws from
//! `ChaCha8Rng::seed_from_u64(s)` switched to stream `i`
//! (see [`substream`]). Samples are therefore reproducible individually and
//! independent of evaluation order or thread count.
//!
//! # Hurwitz angle order
//!
//! Angles are drawn as: `α`; then for `s = 1..N−1` (outer) and
//! `r = 0..s−1` (inner) the pair `ξ_rs, ψ_rs`; then `χ_s` once `r` is
//! exhausted. Interpolating ensembles then draw the `N` phases of the
//! diagonal factor.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuits::sample_pseudo_random;
use crate::error::{Error, Result};
use crate::linalg::{eig_unitary, qubit_count, ComplexMatrix, UnitaryMatrix};
use crate::maps;

pub type SampleRng = ChaCha8Rng;

/// Side on which the interpolating ensemble's diagonal phase matrix acts.
pub const INTERPOLATING_PHASE_SIDE: &str = "left";

/// Independent RNG for sample `index` of a run seeded with `seed`.
pub fn substream(seed: u64, index: u64) -> SampleRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn uniform_angle<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> f64 {
    TAU * scale * rng.random::<f64>()
}

/// Elementary two-level rotation `E^{(i,j)}(φ, ψ, χ)` with 1-based `i < j`.
pub fn elementary_rotation(
    dim: usize,
    i: usize,
    j: usize,
    phi: f64,
    psi: f64,
    chi: f64,
) -> Result<UnitaryMatrix> {
    if i == 0 || i >= j || j > dim {
        return Err(Error::Index(format!(
            "rotation indices must satisfy 1 <= i < j <= {dim}, got ({i}, {j})"
        )));
    }
    let [[a, b], [c, d]] = rotation_block(phi, psi, chi);
    let mut m = ComplexMatrix::identity(dim);
    let (i, j) = (i - 1, j - 1);
    m.set(i, i, a);
    m.set(i, j, b);
    m.set(j, i, c);
    m.set(j, j, d);
    UnitaryMatrix::certify(m)
}

/// The 2×2 block `[[e^{iψ}cosφ, e^{iχ}sinφ], [−e^{−iχ}sinφ, e^{−iψ}cosφ]]`.
pub fn rotation_block(phi: f64, psi: f64, chi: f64) -> [[C64; 2]; 2] {
    let (s, c) = phi.sin_cos();
    let a = C64::from_polar(c, psi);
    let b = C64::from_polar(s, chi);
    [[a, b], [-b.conj(), a.conj()]]
}

/// Euler angles of one Hurwitz-parameterized draw.
///
/// `phi[s-1][r]` and `psi[s-1][r]` hold `φ_rs`, `ψ_rs` for `s = 1..N−1`,
/// `r = 0..s−1`; `chi[s-1]` holds `χ_s`.
#[derive(Clone, Debug, PartialEq)]
pub struct HurwitzAngles {
    pub dim: usize,
    pub phi: Vec<Vec<f64>>,
    pub psi: Vec<Vec<f64>>,
    pub chi: Vec<f64>,
    pub alpha: f64,
    pub delta: f64,
}

impl HurwitzAngles {
    /// Draws angles on the δ-constricted intervals: `ψ, χ, α` uniform on
    /// `[0, 2πδ)` and `φ_rs = arcsin(δ·ξ^{1/(2r+2)})`.
    pub fn sample<R: Rng + ?Sized>(dim: usize, delta: f64, rng: &mut R) -> Result<Self> {
        check_delta(delta)?;
        if dim < 2 {
            return Err(Error::Domain(format!("ensemble dimension must be >= 2, got {dim}")));
        }
        let alpha = uniform_angle(rng, delta);
        let mut phi = Vec::with_capacity(dim - 1);
        let mut psi = Vec::with_capacity(dim - 1);
        let mut chi = Vec::with_capacity(dim - 1);
        for s in 1..dim {
            let mut phi_s = Vec::with_capacity(s);
            let mut psi_s = Vec::with_capacity(s);
            for r in 0..s {
                let xi: f64 = rng.random();
                phi_s.push((delta * xi.powf(1.0 / (2 * r + 2) as f64)).asin());
                psi_s.push(uniform_angle(rng, delta));
            }
            phi.push(phi_s);
            psi.push(psi_s);
            chi.push(uniform_angle(rng, delta));
        }
        Ok(Self {
            dim,
            phi,
            psi,
            chi,
            alpha,
            delta,
        })
    }

    /// `e^{iα}·E_1·E_2⋯E_{N−1}` with
    /// `E_s = E^{(N−s,N−s+1)}(φ_{s−1,s}, ψ_{s−1,s}, 0) ⋯ E^{(N−1,N)}(φ_{0s}, ψ_{0s}, χ_s)`.
    pub fn to_unitary(&self) -> Result<UnitaryMatrix> {
        let n = self.dim;
        // Work on the transpose so that right-multiplying by a rotation
        // touches two contiguous rows instead of two strided columns.
        let mut t = ComplexMatrix::identity(n).into_entries();
        for s in 1..n {
            for r in (0..s).rev() {
                let chi = if r == 0 { self.chi[s - 1] } else { 0.0 };
                let block = rotation_block(self.phi[s - 1][r], self.psi[s - 1][r], chi);
                // 1-based pair (N−r−1, N−r)
                rotate_rows(&mut t, n, n - r - 2, n - r - 1, block);
            }
        }
        let global = C64::from_polar(1.0, self.alpha);
        for z in &mut t {
            *z *= global;
        }
        let transposed = ComplexMatrix::new(n, t)?;
        UnitaryMatrix::certify(transposed.transpose())
    }
}

/// In the transposed representation `T = Uᵀ`, applies `U ← U·E` where `E`
/// is `block` on 0-based indices `(i, j)`.
fn rotate_rows(t: &mut [C64], n: usize, i: usize, j: usize, block: [[C64; 2]; 2]) {
    let [[a, b], [c, d]] = block;
    let (head, tail) = t.split_at_mut(j * n);
    let row_i = &mut head[i * n..(i + 1) * n];
    let row_j = &mut tail[..n];
    for (x, y) in row_i.iter_mut().zip(row_j.iter_mut()) {
        let (ui, uj) = (*x, *y);
        *x = ui * a + uj * c;
        *y = ui * b + uj * d;
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&delta) {
        Ok(())
    } else {
        Err(Error::Domain(format!("delta must lie in [0, 1], got {delta}")))
    }
}

/// CUE draw via the Hurwitz parameterization.
pub fn sample_cue_hurwitz<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<UnitaryMatrix> {
    HurwitzAngles::sample(dim, 1.0, rng)?.to_unitary()
}

/// Interpolating-ensemble draw: `D·e^{iα}E_1⋯E_{N−1}` with δ-constricted
/// angles and `D` a diagonal of i.i.d. phases uniform on `[0, 2π)`.
pub fn sample_interpolating<R: Rng + ?Sized>(
    dim: usize,
    delta: f64,
    rng: &mut R,
) -> Result<UnitaryMatrix> {
    let core = HurwitzAngles::sample(dim, delta, rng)?.to_unitary()?;
    let phases = random_phases(dim, rng);
    UnitaryMatrix::certify(core.matrix().left_mul_diagonal(&phases)?)
}

fn random_phases<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    (0..dim)
        .map(|_| C64::from_polar(1.0, uniform_angle(rng, 1.0)))
        .collect()
}

/// Haar unitary from the QR factorization of a complex Ginibre matrix,
/// with column phases fixed so the triangular factor has a positive
/// diagonal.
pub fn sample_cue_qr_oracle<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<UnitaryMatrix> {
    if dim < 2 {
        return Err(Error::Domain(format!("ensemble dimension must be >= 2, got {dim}")));
    }
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let ginibre = DMatrix::<C64>::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * scale, im * scale)
    });
    let qr = ginibre.qr();
    let (q, r) = qr.unpack();
    let m = ComplexMatrix::from_fn(dim, |i, j| {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        q[(i, j)] * phase
    });
    UnitaryMatrix::certify(m)
}

/// Diagonal unitary carrying the spectrum of `u`, eigenvalues in ascending
/// angle order.
pub fn diagonal_from_cue_spectrum(u: &UnitaryMatrix) -> Result<UnitaryMatrix> {
    let decomp = eig_unitary(u)?;
    Ok(UnitaryMatrix::from_phases(&decomp.eigenangles))
}

/// `U·diag(e^{iθ})·U†` for the given phases.
pub fn conjugate_diagonal(u: &UnitaryMatrix, phases: &[f64]) -> Result<UnitaryMatrix> {
    let d: Vec<C64> = phases.iter().map(|&a| C64::from_polar(1.0, a)).collect();
    let ud = u.matrix().right_mul_diagonal(&d)?;
    UnitaryMatrix::certify(ud.matmul(&u.matrix().adjoint())?)
}

/// `U_CUE·D·U_CUE†` with `D` carrying i.i.d. phases uniform on `[0, 2π)`.
pub fn conjugated_diagonal<R: Rng + ?Sized>(
    u_cue: &UnitaryMatrix,
    rng: &mut R,
) -> Result<UnitaryMatrix> {
    let phases: Vec<f64> = (0..u_cue.dim()).map(|_| uniform_angle(rng, 1.0)).collect();
    conjugate_diagonal(u_cue, &phases)
}

/// Sampling recipe.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnsembleKind {
    CueHurwitz,
    Interpolating { delta: f64 },
    CueQrOracle,
    DiagonalCueSpectrum,
    ConjugatedDiagonal,
    PseudoRandom { iterations: usize },
    Baker,
    Sawtooth { k: f64 },
    Harper { gamma: f64 },
}

impl EnsembleKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::CueHurwitz => "cue_hurwitz",
            Self::Interpolating { .. } => "interpolating",
            Self::CueQrOracle => "cue_qr_oracle",
            Self::DiagonalCueSpectrum => "diagonal_cue_spectrum",
            Self::ConjugatedDiagonal => "conjugated_diagonal",
            Self::PseudoRandom { .. } => "pseudo_random",
            Self::Baker => "baker",
            Self::Sawtooth { .. } => "sawtooth",
            Self::Harper { .. } => "harper",
        }
    }

    /// Short human-readable label, e.g. `interpolating(delta=0.9)`.
    pub fn label(&self) -> String {
        match self {
            Self::Interpolating { delta } => format!("interpolating(delta={delta})"),
            Self::PseudoRandom { iterations } => format!("pseudo_random(m={iterations})"),
            Self::Sawtooth { k } => format!("sawtooth(k={k})"),
            Self::Harper { gamma } => format!("harper(gamma={gamma})"),
            other => other.name().to_string(),
        }
    }

    /// Deterministic kinds produce the same matrix for every seed and index.
    pub fn is_deterministic(&self) -> bool {
        matches!(self, Self::Baker | Self::Sawtooth { .. } | Self::Harper { .. })
    }

    fn needs_qubits(&self) -> bool {
        matches!(self, Self::PseudoRandom { .. })
    }
}

/// A sampling recipe plus dimension and seed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    #[serde(flatten)]
    pub kind: EnsembleKind,
    pub dim: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, dim: usize, seed: u64) -> Result<Self> {
        let spec = Self { kind, dim, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::Domain(format!("dimension must be >= 2, got {}", self.dim)));
        }
        if self.kind.needs_qubits() && qubit_count(self.dim).is_none() {
            return Err(Error::NotPowerOfTwo(self.dim));
        }
        match self.kind {
            EnsembleKind::Interpolating { delta } => check_delta(delta),
            EnsembleKind::PseudoRandom { iterations } if iterations == 0 => {
                Err(Error::Domain("pseudo-random iterations must be >= 1".into()))
            }
            EnsembleKind::PseudoRandom { .. } if self.dim < 4 => {
                Err(Error::Domain("pseudo-random operators need at least 2 qubits".into()))
            }
            EnsembleKind::Baker if self.dim % 2 != 0 => {
                Err(Error::Domain(format!("baker map needs even dimension, got {}", self.dim)))
            }
            EnsembleKind::Sawtooth { k } if !k.is_finite() => {
                Err(Error::Domain("sawtooth k must be finite".into()))
            }
            EnsembleKind::Harper { gamma } if !gamma.is_finite() => {
                Err(Error::Domain("harper gamma must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    /// Draws sample `index`.
    pub fn sample(&self, index: u64) -> Result<UnitaryMatrix> {
        self.validate()?;
        let mut rng = substream(self.seed, index);
        let n = self.dim;
        match self.kind {
            EnsembleKind::CueHurwitz => sample_cue_hurwitz(n, &mut rng),
            EnsembleKind::Interpolating { delta } => sample_interpolating(n, delta, &mut rng),
            EnsembleKind::CueQrOracle => sample_cue_qr_oracle(n, &mut rng),
            EnsembleKind::DiagonalCueSpectrum => {
                diagonal_from_cue_spectrum(&sample_cue_hurwitz(n, &mut rng)?)
            }
            EnsembleKind::ConjugatedDiagonal => {
                let u = sample_cue_hurwitz(n, &mut rng)?;
                conjugated_diagonal(&u, &mut rng)
            }
            EnsembleKind::PseudoRandom { iterations } => {
                let qubits = n.trailing_zeros() as usize;
                Ok(sample_pseudo_random(qubits, iterations, &mut rng)?.into_unitary())
            }
            EnsembleKind::Baker => maps::baker(n),
            EnsembleKind::Sawtooth { k } => maps::sawtooth(n, k),
            EnsembleKind::Harper { gamma } => maps::harper(n, gamma),
        }
    }

    /// Samples `0..count`, in parallel over indices.
    pub fn sample_many(&self, count: usize) -> Result<Vec<UnitaryMatrix>> {
        self.validate()?;
        if self.kind.is_deterministic() {
            let u = self.sample(0)?;
            return Ok(vec![u; count]);
        }
        (0..count as u64)
            .into_par_iter()
            .map(|i| self.sample(i))
            .collect()
    }

    /// Parameters for file headers.
    pub fn params(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self.kind).expect("ensemble kind serializes");
        if let EnsembleKind::Interpolating { .. } = self.kind {
            v["phase_side"] = INTERPOLATING_PHASE_SIDE.into();
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn rotation_zero_angles_is_identity() {
        let e = elementary_rotation(5, 2, 4, 0.0, 0.0, 1.234).unwrap();
        assert!(e.matrix().max_abs_diff(&ComplexMatrix::identity(5)) < 1e-15);
    }

    #[test]
    fn rotation_quarter_turn() {
        let e = elementary_rotation(2, 1, 2, FRAC_PI_2, 0.0, 0.0).unwrap();
        let expected = [[c(0.0, 0.0), c(1.0, 0.0)], [c(-1.0, 0.0), c(0.0, 0.0)]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((e.get(i, j) - expected[i][j]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn rotation_block_has_unit_determinant() {
        for &(phi, psi, chi) in &[(0.3, 1.1, -2.0), (1.2, 5.0, 0.4), (0.0, 3.0, 3.0)] {
            let [[a, b], [cc, d]] = rotation_block(phi, psi, chi);
            let det = a * d - b * cc;
            assert!((det - c(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn rotation_rejects_bad_indices() {
        assert!(elementary_rotation(4, 2, 2, 0.1, 0.0, 0.0).is_err());
        assert!(elementary_rotation(4, 3, 2, 0.1, 0.0, 0.0).is_err());
        assert!(elementary_rotation(4, 0, 2, 0.1, 0.0, 0.0).is_err());
        assert!(elementary_rotation(4, 3, 5, 0.1, 0.0, 0.0).is_err());
    }

    #[test]
    fn hurwitz_matches_explicit_rotation_product() {
        let mut rng = substream(11, 0);
        let angles = HurwitzAngles::sample(4, 1.0, &mut rng).unwrap();
        let fast = angles.to_unitary().unwrap();

        let n = 4;
        let mut acc = ComplexMatrix::identity(n);
        for s in 1..n {
            for r in (0..s).rev() {
                let chi = if r == 0 { angles.chi[s - 1] } else { 0.0 };
                let e = elementary_rotation(
                    n,
                    n - r - 1,
                    n - r,
                    angles.phi[s - 1][r],
                    angles.psi[s - 1][r],
                    chi,
                )
                .unwrap();
                acc = acc.matmul(e.matrix()).unwrap();
            }
        }
        let slow = acc.scale(C64::from_polar(1.0, angles.alpha));
        assert!(fast.matrix().max_abs_diff(&slow) < 1e-14);
    }

    #[test]
    fn hurwitz_angles_respect_intervals() {
        let mut rng = substream(5, 3);
        let delta = 0.4;
        let a = HurwitzAngles::sample(16, delta, &mut rng).unwrap();
        let hi = TAU * delta;
        assert!((0.0..hi).contains(&a.alpha));
        assert!(a.chi.iter().all(|x| (0.0..hi).contains(x)));
        for (s, row) in a.psi.iter().enumerate() {
            assert_eq!(row.len(), s + 1);
            assert!(row.iter().all(|x| (0.0..hi).contains(x)));
        }
        // sin φ_rs ≤ δ
        assert!(a.phi.iter().flatten().all(|p| p.sin() <= delta + 1e-15));
    }

    #[test]
    fn cue_rows_are_normalized() {
        let u = sample_cue_hurwitz(32, &mut substream(1, 0)).unwrap();
        assert!(u.unitarity_residual() <= 1e-10);
        for i in 0..32 {
            let mean: f64 = u.matrix().row(i).iter().map(|z| z.norm_sqr()).sum::<f64>() / 32.0;
            assert!((mean - 1.0 / 32.0).abs() < 1e-14);
        }
    }

    #[test]
    fn delta_zero_is_diagonal_phases() {
        let u = sample_interpolating(16, 0.0, &mut substream(2, 0)).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                let z = u.get(i, j);
                if i == j {
                    assert!((z.norm() - 1.0).abs() < 1e-14);
                } else {
                    assert!(z.norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn delta_out_of_range_is_rejected() {
        let mut rng = substream(0, 0);
        assert!(matches!(sample_interpolating(4, 1.5, &mut rng), Err(Error::Domain(_))));
        assert!(matches!(sample_interpolating(4, -0.1, &mut rng), Err(Error::Domain(_))));
    }

    #[test]
    fn qr_oracle_is_unitary() {
        let u = sample_cue_qr_oracle(64, &mut substream(3, 0)).unwrap();
        assert!(u.unitarity_residual() <= 1e-10);
    }

    #[test]
    fn diagonal_spectrum_is_diagonal_and_sorted() {
        let u = sample_cue_hurwitz(16, &mut substream(4, 0)).unwrap();
        let d = diagonal_from_cue_spectrum(&u).unwrap();
        assert!(d.matrix().is_diagonal());
        let angles: Vec<f64> = d.matrix().diagonal().iter().map(|z| z.arg().rem_euclid(TAU)).collect();
        assert!(angles.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        let orig = eig_unitary(&u).unwrap().eigenangles;
        for (a, b) in angles.iter().zip(&orig) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn conjugation_preserves_spectrum() {
        let mut rng = substream(6, 0);
        let u = sample_cue_hurwitz(24, &mut rng).unwrap();
        let mut phases: Vec<f64> = (0..24).map(|_| TAU * rng.random::<f64>()).collect();
        let w = conjugate_diagonal(&u, &phases).unwrap();
        phases.sort_by(f64::total_cmp);
        let got = eig_unitary(&w).unwrap().eigenangles;
        for (a, b) in got.iter().zip(&phases) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn spec_sampling_is_deterministic() {
        let spec = EnsembleSpec::new(EnsembleKind::Interpolating { delta: 0.7 }, 16, 99).unwrap();
        assert_eq!(spec.sample(4).unwrap(), spec.sample(4).unwrap());
        assert_ne!(spec.sample(4).unwrap(), spec.sample(5).unwrap());
        let many = spec.sample_many(6).unwrap();
        assert_eq!(many[4], spec.sample(4).unwrap());
    }

    #[test]
    fn spec_validation() {
        assert!(EnsembleSpec::new(EnsembleKind::CueHurwitz, 1, 0).is_err());
        assert!(EnsembleSpec::new(EnsembleKind::PseudoRandom { iterations: 2 }, 12, 0).is_err());
        assert!(EnsembleSpec::new(EnsembleKind::PseudoRandom { iterations: 0 }, 16, 0).is_err());
        assert!(EnsembleSpec::new(EnsembleKind::Baker, 7, 0).is_err());
        assert!(EnsembleSpec::new(EnsembleKind::Interpolating { delta: 2.0 }, 8, 0).is_err());
        assert!(EnsembleSpec::new(EnsembleKind::Sawtooth { k: 1.5 }, 12, 0).is_ok());
    }

    #[test]
    fn spec_serde_shape() {
        let spec = EnsembleSpec::new(EnsembleKind::Harper { gamma: 0.1 }, 8, 3).unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(json, r#"{"kind":"harper","gamma":0.1,"dim":8,"seed":3}"#);
        let back: EnsembleSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
    }
}
