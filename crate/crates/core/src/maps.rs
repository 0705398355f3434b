//! Quantized chaotic maps on an `N`-dimensional Hilbert space, indices
//! `0..N−1` with no half-integer offsets. DFTs use the crate-wide forward
//! sign `e^{−2πi·jk/N}`.

use std::f64::consts::{FRAC_PI_4, PI, TAU};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dft_matrix, ComplexMatrix, UnitaryMatrix, ACCUMULATED_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "map", rename_all = "snake_case")]
pub enum MapKind {
    Baker,
    Sawtooth { k: f64 },
    Harper { gamma: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapSpec {
    #[serde(flatten)]
    pub kind: MapKind,
    pub dim: usize,
}

impl MapSpec {
    pub fn build(&self) -> Result<UnitaryMatrix> {
        match self.kind {
            MapKind::Baker => baker(self.dim),
            MapKind::Sawtooth { k } => sawtooth(self.dim, k),
            MapKind::Harper { gamma } => harper(self.dim, gamma),
        }
    }

    pub fn label(&self) -> String {
        match self.kind {
            MapKind::Baker => "baker".into(),
            MapKind::Sawtooth { k } => format!("sawtooth(k={k})"),
            MapKind::Harper { gamma } => format!("harper(gamma={gamma})"),
        }
    }
}

/// Balazs–Voros baker's map `F_N^{−1}·(F_{N/2} ⊕ F_{N/2})`.
pub fn baker(dim: usize) -> Result<UnitaryMatrix> {
    if dim < 2 || dim % 2 != 0 {
        return Err(Error::Domain(format!("baker map needs even dimension >= 2, got {dim}")));
    }
    let half = dim / 2;
    let fh = dft_matrix(half);
    let block = ComplexMatrix::from_fn(dim, |i, j| {
        if i / half == j / half {
            fh.get(i % half, j % half)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let f_inv = dft_matrix(dim).adjoint();
    UnitaryMatrix::certify(f_inv.matrix().matmul(&block)?)
}

/// Quantum sawtooth map with entries
/// `U[n][m] = e^{−iπ/4}/√N · e^{ikπm²/N} · e^{iπ(n−m)²/N}`.
///
/// Certified at 1e-8 on construction.
pub fn sawtooth(dim: usize, k: f64) -> Result<UnitaryMatrix> {
    if dim < 2 {
        return Err(Error::Domain(format!("sawtooth needs dimension >= 2, got {dim}")));
    }
    let n_f = dim as f64;
    let norm = 1.0 / n_f.sqrt();
    let m = ComplexMatrix::from_fn(dim, |row, col| {
        let kick = k * PI * (col * col) as f64 / n_f;
        let d = row.abs_diff(col);
        // e^{iπd²/N} has period 2N in d²
        let free = PI * ((d * d) % (2 * dim)) as f64 / n_f;
        C64::from_polar(norm, kick + free - FRAC_PI_4)
    });
    UnitaryMatrix::certify_with(m, ACCUMULATED_TOL)
}

/// Quantum Harper map `D_q·F^{−1}·D_p·F` with
/// `D_x = diag(e^{iNγ·cos(2πx/N)})`. The momentum kick acts first.
pub fn harper(dim: usize, gamma: f64) -> Result<UnitaryMatrix> {
    if dim < 2 {
        return Err(Error::Domain(format!("harper needs dimension >= 2, got {dim}")));
    }
    let n_f = dim as f64;
    let kick: Vec<C64> = (0..dim)
        .map(|x| C64::from_polar(1.0, n_f * gamma * (TAU * x as f64 / n_f).cos()))
        .collect();
    let f = dft_matrix(dim);
    let momentum = f.adjoint().matrix().right_mul_diagonal(&kick)?;
    let m = momentum.matmul(f.matrix())?.left_mul_diagonal(&kick)?;
    UnitaryMatrix::certify(m)
}
