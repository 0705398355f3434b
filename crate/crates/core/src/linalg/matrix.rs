use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Default certification tolerance for freshly constructed unitaries.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Looser tolerance used after long products such as matrix powers.
pub const ACCUMULATED_TOL: f64 = 1e-8;

/// Dense square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        if self.dim <= 8 {
            for i in 0..self.dim {
                let row: Vec<String> = self
                    .row(i)
                    .iter()
                    .map(|z| format!("{:+.4}{:+.4}i", z.re, z.im))
                    .collect();
                writeln!(f, "  [{}]", row.join(", "))?;
            }
        }
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("matrix dimension must be positive".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: entries.len(),
            });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { dim, entries })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let dim = diag.len();
        let mut m = Self::zeros(dim);
        for (i, &d) in diag.iter().enumerate() {
            m.entries[i * dim + i] = d;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        Self { dim, entries }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.entries[row * self.dim + col] = value;
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<C64> {
        self.entries
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.dim).map(|i| self.get(i, j)).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i))
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|&z| z * factor).collect(),
        }
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: rhs.dim,
            });
        }
        let n = self.dim;
        let mut out = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            let out_row = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let b_row = &rhs.entries[k * n..(k + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(Self { dim: n, entries: out })
    }

    /// Multiplies row `i` by `d[i]`, i.e. returns `diag(d)·self`.
    pub fn left_mul_diagonal(&self, d: &[C64]) -> Result<Self> {
        if d.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: d.len(),
            });
        }
        let mut out = self.clone();
        for (i, &di) in d.iter().enumerate() {
            for z in &mut out.entries[i * self.dim..(i + 1) * self.dim] {
                *z *= di;
            }
        }
        Ok(out)
    }

    /// Multiplies column `j` by `d[j]`, i.e. returns `self·diag(d)`.
    pub fn right_mul_diagonal(&self, d: &[C64]) -> Result<Self> {
        if d.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: d.len(),
            });
        }
        let mut out = self.clone();
        for row in out.entries.chunks_mut(self.dim) {
            for (z, &dj) in row.iter_mut().zip(d) {
                *z *= dj;
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: v.len(),
            });
        }
        Ok(self
            .entries
            .chunks(self.dim)
            .map(|row| row.iter().zip(v).map(|(&a, &b)| a * b).sum())
            .collect())
    }

    /// Max-abs entry of `self† self − I`.
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.dim;
        // (U†U)_{ij} = Σ_k conj(U_ki) U_kj, accumulated row by row of U.
        let mut gram = vec![C64::new(0.0, 0.0); n * n];
        for k in 0..n {
            let row = self.row(k);
            for (i, &uki) in row.iter().enumerate() {
                let c = uki.conj();
                let g = &mut gram[i * n..(i + 1) * n];
                for (gij, &ukj) in g.iter_mut().zip(row) {
                    *gij += c * ukj;
                }
            }
        }
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                let d = gram[i * n + j] - C64::new(target, 0.0);
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "max_abs_diff on mismatched dims");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|i| {
            (0..self.dim).all(|j| i == j || self.get(i, j) == C64::new(0.0, 0.0))
        })
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }
}

/// A [`ComplexMatrix`] whose unitarity has been checked at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    matrix: ComplexMatrix,
    unitarity_residual: f64,
}

impl UnitaryMatrix {
    /// Certifies `matrix` against [`UNITARITY_TOL`].
    pub fn certify(matrix: ComplexMatrix) -> Result<Self> {
        Self::certify_with(matrix, UNITARITY_TOL)
    }

    pub fn certify_with(matrix: ComplexMatrix, tolerance: f64) -> Result<Self> {
        let residual = matrix.unitarity_residual();
        if residual.is_nan() || residual > tolerance {
            return Err(Error::ToleranceExceeded {
                what: "unitarity",
                residual,
                tolerance,
            });
        }
        Ok(Self {
            matrix,
            unitarity_residual: residual,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
            unitarity_residual: 0.0,
        }
    }

    /// Diagonal unitary `diag(e^{iθ_k})`.
    pub fn from_phases(angles: &[f64]) -> Self {
        let diag: Vec<C64> = angles.iter().map(|&a| C64::from_polar(1.0, a)).collect();
        let matrix = ComplexMatrix::from_diagonal(&diag);
        let residual = matrix.unitarity_residual();
        Self {
            matrix,
            unitarity_residual: residual,
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn unitarity_residual(&self) -> f64 {
        self.unitarity_residual
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.matrix.get(row, col)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            unitarity_residual: self.unitarity_residual,
        }
    }

    /// `self · rhs`, re-certified at [`UNITARITY_TOL`].
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        Self::certify(self.matrix.matmul(&rhs.matrix)?)
    }
}

/// Unitary DFT with entries `N^{-1/2}·exp(−2πi·jk/N)`.
pub fn dft_matrix(dim: usize) -> UnitaryMatrix {
    assert!(dim >= 1, "DFT dimension must be positive");
    let norm = 1.0 / (dim as f64).sqrt();
    let matrix = ComplexMatrix::from_fn(dim, |j, k| {
        // reduce jk mod N before scaling so large products keep full precision
        let phase = -2.0 * PI * ((j * k) % dim) as f64 / dim as f64;
        C64::from_polar(norm, phase)
    });
    let residual = matrix.unitarity_residual();
    UnitaryMatrix {
        matrix,
        unitarity_residual: residual,
    }
}

/// `Uᵗ` by repeated squaring, re-certified at [`ACCUMULATED_TOL`].
pub fn matrix_power(u: &UnitaryMatrix, t: u64) -> Result<UnitaryMatrix> {
    let mut result: Option<ComplexMatrix> = None;
    let mut base = u.matrix.clone();
    let mut e = t;
    while e > 0 {
        if e & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => r.matmul(&base)?,
            });
        }
        e >>= 1;
        if e > 0 {
            base = base.matmul(&base)?;
        }
    }
    match result {
        None => Ok(UnitaryMatrix::identity(u.dim())),
        Some(m) => UnitaryMatrix::certify_with(m, ACCUMULATED_TOL),
    }
}
