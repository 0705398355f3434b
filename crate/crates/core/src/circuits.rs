//! Pseudo-random operators: `m` rounds of independent Haar SU(2) rotations
//! on every qubit followed by nearest-neighbour `σz⊗σz` coupling on an open
//! chain, then one final rotation layer.

use std::f64::consts::{FRAC_PI_4, TAU};

use num_complex::Complex64 as C64;
use rand::Rng;

use crate::ensembles::{rotation_block, substream};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, UnitaryMatrix};

/// Coupling constant of the `σz⊗σz` evolution.
pub const COUPLING_ANGLE: f64 = FRAC_PI_4;

pub type Su2 = [[C64; 2]; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PseudoRandomSpec {
    pub qubit_count: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl PseudoRandomSpec {
    pub fn new(qubit_count: usize, iterations: usize, seed: u64) -> Result<Self> {
        if qubit_count < 2 {
            return Err(Error::Domain(format!("need at least 2 qubits, got {qubit_count}")));
        }
        if qubit_count > 12 {
            return Err(Error::Domain(format!("at most 12 qubits supported, got {qubit_count}")));
        }
        if iterations == 0 {
            return Err(Error::Domain("iterations must be >= 1".into()));
        }
        Ok(Self {
            qubit_count,
            iterations,
            seed,
        })
    }

    pub fn coupling_angle(&self) -> f64 {
        COUPLING_ANGLE
    }

    pub fn dim(&self) -> usize {
        1 << self.qubit_count
    }
}

/// Haar-random SU(2): the rotation block with `φ = arcsin √ξ` and
/// `ψ, χ` uniform on `[0, 2π)`, drawn in the order `ξ, ψ, χ`.
pub fn random_su2_block<R: Rng + ?Sized>(rng: &mut R) -> Su2 {
    let xi: f64 = rng.random();
    let psi = TAU * rng.random::<f64>();
    let chi = TAU * rng.random::<f64>();
    rotation_block(xi.sqrt().asin(), psi, chi)
}

pub fn random_su2<R: Rng + ?Sized>(rng: &mut R) -> UnitaryMatrix {
    let [[a, b], [c, d]] = random_su2_block(rng);
    let m = ComplexMatrix::new(2, vec![a, b, c, d]).expect("2x2 block");
    UnitaryMatrix::certify_with(m, 1e-14).expect("SU(2) block is unitary")
}

/// Diagonal of `exp(i·(π/4)·Σ_j σz^j σz^{j+1})`, open chain, qubit 1 = MSB.
pub fn coupling_phases(qubit_count: usize) -> Vec<C64> {
    let dim = 1usize << qubit_count;
    (0..dim)
        .map(|b| {
            let z = |j: usize| -> i32 {
                if (b >> (qubit_count - j)) & 1 == 0 {
                    1
                } else {
                    -1
                }
            };
            let sum: i32 = (1..qubit_count).map(|j| z(j) * z(j + 1)).sum();
            C64::from_polar(1.0, COUPLING_ANGLE * sum as f64)
        })
        .collect()
}

pub fn nearest_neighbor_coupling(qubit_count: usize) -> Result<UnitaryMatrix> {
    if qubit_count < 2 {
        return Err(Error::Domain(format!("need at least 2 qubits, got {qubit_count}")));
    }
    UnitaryMatrix::certify(ComplexMatrix::from_diagonal(&coupling_phases(qubit_count)))
}

/// A pseudo-random operator together with the rotation layers it was built
/// from. `layers[t][q]` acts on qubit `q + 1`.
#[derive(Clone, Debug)]
pub struct PseudoRandomOperator {
    pub qubit_count: usize,
    pub layers: Vec<Vec<Su2>>,
    unitary: UnitaryMatrix,
}

impl PseudoRandomOperator {
    pub fn unitary(&self) -> &UnitaryMatrix {
        &self.unitary
    }

    pub fn into_unitary(self) -> UnitaryMatrix {
        self.unitary
    }

    /// Rebuilds the operator from `layers` with explicit Kronecker products.
    pub fn rebuild(&self) -> Result<ComplexMatrix> {
        let coupling = ComplexMatrix::from_diagonal(&coupling_phases(self.qubit_count));
        let mut acc = ComplexMatrix::identity(1 << self.qubit_count);
        for (t, layer) in self.layers.iter().enumerate() {
            if t > 0 {
                acc = coupling.matmul(&acc)?;
            }
            acc = kron_layer(layer).matmul(&acc)?;
        }
        Ok(acc)
    }
}

fn kron_layer(layer: &[Su2]) -> ComplexMatrix {
    let mut acc = ComplexMatrix::identity(1);
    for g in layer {
        let d = acc.dim();
        acc = ComplexMatrix::from_fn(2 * d, |i, j| acc.get(i / 2, j / 2) * g[i % 2][j % 2]);
    }
    acc
}

/// Applies `gate` on qubit `qubit` (1-based, MSB) to `m` from the left.
fn apply_gate_left(m: &mut [C64], dim: usize, qubit_count: usize, qubit: usize, gate: &Su2) {
    let mask = 1usize << (qubit_count - qubit);
    for b in 0..dim {
        if b & mask != 0 {
            continue;
        }
        let (head, tail) = m.split_at_mut((b | mask) * dim);
        let row0 = &mut head[b * dim..(b + 1) * dim];
        let row1 = &mut tail[..dim];
        for (x, y) in row0.iter_mut().zip(row1.iter_mut()) {
            let (u0, u1) = (*x, *y);
            *x = gate[0][0] * u0 + gate[0][1] * u1;
            *y = gate[1][0] * u0 + gate[1][1] * u1;
        }
    }
}

/// `R_{m+1}·(U_nnc·R_m)⋯(U_nnc·R_1)` with fresh rotations per qubit and layer,
/// drawn layer by layer, qubit 1 first.
pub fn sample_pseudo_random<R: Rng + ?Sized>(
    qubit_count: usize,
    iterations: usize,
    rng: &mut R,
) -> Result<PseudoRandomOperator> {
    PseudoRandomSpec::new(qubit_count, iterations, 0)?;
    let dim = 1usize << qubit_count;
    let phases = coupling_phases(qubit_count);
    let mut m = ComplexMatrix::identity(dim).into_entries();
    let mut layers = Vec::with_capacity(iterations + 1);
    for t in 0..=iterations {
        if t > 0 {
            for (row, &p) in m.chunks_mut(dim).zip(&phases) {
                for z in row {
                    *z *= p;
                }
            }
        }
        let layer: Vec<Su2> = (0..qubit_count).map(|_| random_su2_block(rng)).collect();
        for (q, gate) in layer.iter().enumerate() {
            apply_gate_left(&mut m, dim, qubit_count, q + 1, gate);
        }
        layers.push(layer);
    }
    let unitary = UnitaryMatrix::certify(ComplexMatrix::new(dim, m)?)?;
    Ok(PseudoRandomOperator {
        qubit_count,
        layers,
        unitary,
    })
}

/// Builds the operator described by `spec` from its seed.
pub fn pseudo_random_operator(spec: &PseudoRandomSpec) -> Result<PseudoRandomOperator> {
    let mut rng = substream(spec.seed, 0);
    sample_pseudo_random(spec.qubit_count, spec.iterations, &mut rng)
}
