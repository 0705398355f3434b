//! Random-unitary ensembles, quantized chaotic maps and the statistics that
//! tie an operator's matrix elements to the multi-qubit entanglement it
//! generates from computational basis states.
//!
//! The crate is organized bottom-up:
//!
//! - [`linalg`]: dense complex matrices, certified unitaries, pure states,
//!   the DFT, unitary eigendecomposition and single-qubit partial traces.
//! - [`ensembles`]: Hurwitz-parameterized CUE, interpolating ensembles, a QR
//!   based Haar oracle and the two counterexample constructions.
//! - [`circuits`]: pseudo-random operators built from Haar SU(2) layers and
//!   nearest-neighbour `σz⊗σz` couplings.
//! - [`maps`]: quantum baker, sawtooth and Harper maps.
//! - [`entanglement`]: the Meyer-Wallach measure `Q`, its CUE average and
//!   time traces averaged over basis states.
//! - [`stats`]: histograms, spacings, reference laws and KS distances.
//! - [`export`]: the matrix interchange format.

pub mod circuits;
pub mod ensembles;
pub mod entanglement;
pub mod error;
pub mod export;
pub mod linalg;
pub mod maps;
pub mod stats;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Crate version, recorded in output manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
