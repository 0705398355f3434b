use std::f64::consts::TAU;

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64 as C64;

use super::matrix::{ComplexMatrix, UnitaryMatrix};
use super::state::PureState;
use crate::error::{Error, Result};

/// Tolerance on eigen-residuals and eigenvector orthonormality.
pub const SPECTRAL_TOL: f64 = 1e-8;

const MAX_SWEEPS_PER_DIM: usize = 200;

/// Eigenangles in `[0, 2π)` sorted ascending, with matching eigenvectors.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenangles: Vec<f64>,
    pub eigenvectors: Vec<PureState>,
    /// Max-abs entry of `U v_k − e^{iθ_k} v_k`.
    pub residuals: Vec<f64>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenangles.len()
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        self.eigenangles
            .iter()
            .map(|&a| C64::from_polar(1.0, a))
            .collect()
    }

    /// `V·diag(e^{iθ})·V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.dim();
        let lambdas = self.eigenvalues();
        ComplexMatrix::from_fn(n, |i, j| {
            self.eigenvectors
                .iter()
                .zip(&lambdas)
                .map(|(v, &l)| v.amplitudes()[i] * l * v.amplitudes()[j].conj())
                .sum()
        })
    }

    /// Largest `|⟨v_k|v_l⟩ − δ_kl|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, vk) in self.eigenvectors.iter().enumerate() {
            for (l, vl) in self.eigenvectors.iter().enumerate().skip(k) {
                let target = if k == l { 1.0 } else { 0.0 };
                worst = worst.max((vk.inner(vl) - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

/// Eigendecomposition of a certified unitary.
///
/// Uses the complex Schur form `U = Z T Z†`. For a normal matrix `T` is
/// diagonal, so the Schur vectors are the eigenvectors and come out
/// orthonormal even inside degenerate eigenspaces.
pub fn eig_unitary(u: &UnitaryMatrix) -> Result<SpectralDecomposition> {
    let n = u.dim();
    let m = DMatrix::from_row_slice(n, n, u.matrix().entries());
    let schur = Schur::try_new(m, f64::EPSILON, MAX_SWEEPS_PER_DIM * n.max(1))
        .ok_or(Error::ConvergenceFailure { residual: f64::NAN })?;
    let (z, t) = schur.unpack();

    let mut pairs: Vec<(f64, Vec<C64>)> = (0..n)
        .map(|k| {
            let angle = t[(k, k)].arg().rem_euclid(TAU);
            // rem_euclid can round up to exactly 2π
            let angle = if angle >= TAU { 0.0 } else { angle };
            let v: Vec<C64> = z.column(k).iter().copied().collect();
            (angle, v)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut eigenangles = Vec::with_capacity(n);
    let mut eigenvectors = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    for (angle, v) in pairs {
        let state = PureState::normalized(v)?;
        let uv = u.matrix().mul_vec(state.amplitudes())?;
        let lambda = C64::from_polar(1.0, angle);
        let residual = uv
            .iter()
            .zip(state.amplitudes())
            .map(|(a, b)| (a - lambda * b).norm())
            .fold(0.0, f64::max);
        eigenangles.push(angle);
        eigenvectors.push(state);
        residuals.push(residual);
    }

    let decomp = SpectralDecomposition {
        eigenangles,
        eigenvectors,
        residuals,
    };
    let worst = decomp.residuals.iter().copied().fold(0.0, f64::max);
    if !(worst <= SPECTRAL_TOL) {
        return Err(Error::ConvergenceFailure { residual: worst });
    }
    let ortho = decomp.orthonormality_residual();
    if !(ortho <= SPECTRAL_TOL) {
        return Err(Error::ToleranceExceeded {
            what: "eigenvector orthonormality",
            residual: ortho,
            tolerance: SPECTRAL_TOL,
        });
    }
    Ok(decomp)
}
