//! Dense complex linear algebra for `N ≤ 4096`.
//!
//! Matrices are row-major. The DFT uses the forward sign `e^{−2πi·jk/N}`
//! throughout the crate. Qubit 1 is the most significant bit of a basis
//! index.

mod matrix;
mod spectral;
mod state;

pub use matrix::{
    dft_matrix, matrix_power, ComplexMatrix, UnitaryMatrix, ACCUMULATED_TOL, UNITARITY_TOL,
};
pub use spectral::{eig_unitary, SpectralDecomposition, SPECTRAL_TOL};
pub use state::{apply, reduced_density_qubit, DensityMatrix2, PureState};

pub(crate) use state::{qubit_count, reduced_density_bit};
