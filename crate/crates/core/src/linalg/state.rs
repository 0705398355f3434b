use num_complex::Complex64 as C64;

use super::matrix::UnitaryMatrix;
use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-12;

/// Normalized state vector. Qubit 1 is the most significant bit of the
/// basis index.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    /// Wraps `amplitudes`, rejecting vectors whose norm² is off by more
    /// than 1e-12.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::EmptyInput);
        }
        let norm2 = norm_sqr(&amplitudes);
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm2));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::EmptyInput);
        }
        let norm = norm_sqr(&amplitudes).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized(norm * norm));
        }
        for z in &mut amplitudes {
            *z /= norm;
        }
        Ok(Self { amplitudes })
    }

    /// Computational basis state `e_index`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::Index(format!("basis index {index} out of range for dim {dim}")));
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// `n` with `N = 2ⁿ`, if the dimension is a power of two.
    pub fn qubit_count(&self) -> Option<usize> {
        qubit_count(self.dim())
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    pub fn inner(&self, other: &Self) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub(crate) fn qubit_count(dim: usize) -> Option<usize> {
    if dim >= 1 && dim.is_power_of_two() {
        Some(dim.trailing_zeros() as usize)
    } else {
        None
    }
}

/// Single-qubit density matrix `[[ρ00, ρ01], [ρ10, ρ11]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix2 {
    pub entries: [[C64; 2]; 2],
}

impl DensityMatrix2 {
    pub fn trace(&self) -> C64 {
        self.entries[0][0] + self.entries[1][1]
    }

    /// Eigenvalues in ascending order, before clamping.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.entries[0][0].re;
        let d = self.entries[1][1].re;
        let b = self.entries[0][1];
        let half_trace = 0.5 * (a + d);
        let radius = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        [half_trace - radius, half_trace + radius]
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let e = &self.entries;
        e[0][0].im.abs() <= tol
            && e[1][1].im.abs() <= tol
            && (e[0][1] - e[1][0].conj()).norm() <= tol
    }

    /// `Tr[ρ²]`, computed from eigenvalues with negatives inside the PSD
    /// tolerance clamped to zero.
    pub fn purity(&self) -> f64 {
        let [lo, hi] = self.eigenvalues();
        let lo = if lo < 0.0 && lo >= -PSD_TOL { 0.0 } else { lo };
        lo * lo + hi * hi
    }

    /// `Tr[ρ²]/(Tr ρ)²`. Dividing out the trace removes the rounding drift of
    /// `|c|²` sums, so a product state gives exactly 1.
    pub fn normalized_purity(&self) -> f64 {
        let a = self.entries[0][0].re;
        let d = self.entries[1][1].re;
        let b = self.entries[0][1];
        let tr = a + d;
        (a * a + d * d + 2.0 * b.norm_sqr()) / (tr * tr)
    }
}

/// Reduced density matrix of qubit `qubit` (1-based, 1 = most significant
/// bit) of `state`.
pub fn reduced_density_qubit(state: &PureState, qubit: usize) -> Result<DensityMatrix2> {
    let n = state.qubit_count().ok_or(Error::NotPowerOfTwo(state.dim()))?;
    if qubit == 0 || qubit > n {
        return Err(Error::Index(format!("qubit {qubit} out of range 1..={n}")));
    }
    Ok(reduced_density_bit(state.amplitudes(), n - qubit))
}

/// Partial trace onto the qubit stored at bit position `bit` (0 = least
/// significant) of the basis index. `amps.len()` must be a power of two.
pub(crate) fn reduced_density_bit(amps: &[C64], bit: usize) -> DensityMatrix2 {
    let mask = 1usize << bit;
    let mut p0 = 0.0;
    let mut p1 = 0.0;
    let mut coherence = C64::new(0.0, 0.0);
    for (b, &c0) in amps.iter().enumerate() {
        if b & mask != 0 {
            continue;
        }
        let c1 = amps[b | mask];
        p0 += c0.norm_sqr();
        p1 += c1.norm_sqr();
        coherence += c0 * c1.conj();
    }
    DensityMatrix2 {
        entries: [
            [C64::new(p0, 0.0), coherence],
            [coherence.conj(), C64::new(p1, 0.0)],
        ],
    }
}

/// `U|ψ⟩`.
pub fn apply(u: &UnitaryMatrix, state: &PureState) -> Result<PureState> {
    let out = u.matrix().mul_vec(state.amplitudes())?;
    Ok(PureState { amplitudes: out })
}

impl UnitaryMatrix {
    /// Column `k`, i.e. the image of basis state `e_k`.
    pub fn column_state(&self, k: usize) -> PureState {
        PureState {
            amplitudes: self.matrix().column(k),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dft_matrix;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn assert_rho(rho: &DensityMatrix2, expected: [[f64; 2]; 2]) {
        for i in 0..2 {
            for j in 0..2 {
                assert!(
                    (rho.entries[i][j] - c(expected[i][j])).norm() < 1e-12,
                    "{rho:?}"
                );
            }
        }
    }

    #[test]
    fn product_state_reduces_to_pure() {
        let s = PureState::basis(4, 0).unwrap();
        assert_rho(&reduced_density_qubit(&s, 1).unwrap(), [[1.0, 0.0], [0.0, 0.0]]);
        // |01⟩: qubit 1 in |0⟩, qubit 2 in |1⟩
        let s = PureState::basis(4, 1).unwrap();
        assert_rho(&reduced_density_qubit(&s, 1).unwrap(), [[1.0, 0.0], [0.0, 0.0]]);
        assert_rho(&reduced_density_qubit(&s, 2).unwrap(), [[0.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn bell_and_ghz_are_maximally_mixed() {
        let h = 1.0 / 2f64.sqrt();
        let bell = PureState::new(vec![c(h), c(0.0), c(0.0), c(h)]).unwrap();
        assert_rho(&reduced_density_qubit(&bell, 1).unwrap(), [[0.5, 0.0], [0.0, 0.5]]);

        let mut ghz = vec![c(0.0); 8];
        ghz[0] = c(h);
        ghz[7] = c(h);
        let ghz = PureState::new(ghz).unwrap();
        for j in 1..=3 {
            assert_rho(&reduced_density_qubit(&ghz, j).unwrap(), [[0.5, 0.0], [0.0, 0.5]]);
        }
    }

    #[test]
    fn partial_trace_errors() {
        let s = PureState::normalized(vec![c(1.0); 3]).unwrap();
        assert!(matches!(reduced_density_qubit(&s, 1), Err(Error::NotPowerOfTwo(3))));
        let s = PureState::basis(4, 0).unwrap();
        assert!(reduced_density_qubit(&s, 0).is_err());
        assert!(reduced_density_qubit(&s, 3).is_err());
    }

    #[test]
    fn normalization_is_enforced() {
        assert!(matches!(
            PureState::new(vec![c(1.0), c(1.0)]),
            Err(Error::NotNormalized(_))
        ));
        assert!(PureState::normalized(vec![c(0.0); 2]).is_err());
    }

    #[test]
    fn apply_basis_gives_column() {
        let f = dft_matrix(4);
        let out = apply(&f, &PureState::basis(4, 0).unwrap()).unwrap();
        for z in out.amplitudes() {
            assert!((z - c(0.5)).norm() < 1e-15);
        }
        let e2 = apply(&f, &PureState::basis(4, 2).unwrap()).unwrap();
        assert_eq!(e2.amplitudes(), f.column_state(2).amplitudes());
        assert!(apply(&f, &PureState::basis(2, 0).unwrap()).is_err());
    }

    #[test]
    fn apply_identity_is_noop() {
        let s = PureState::normalized(vec![C64::new(0.3, -0.1), C64::new(-0.7, 0.2)]).unwrap();
        let out = apply(&UnitaryMatrix::identity(2), &s).unwrap();
        assert_eq!(out, s);
    }
}
