use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

use rmt_entangle::circuits::random_su2;
use rmt_entangle::ensembles::{sample_cue_hurwitz, substream, EnsembleKind, EnsembleSpec};
use rmt_entangle::entanglement::{q_from_amplitude_moments, q_measure};
use rmt_entangle::export::{read_binary, read_csv, write_binary, write_csv, MatrixHeader};
use rmt_entangle::linalg::{apply, eig_unitary, matrix_power, PureState, UnitaryMatrix};
use rmt_entangle::stats::{ks_distance, ks_two_sample, spacings_from_angles, Histogram};

fn random_state(seed: u64, dim: usize) -> PureState {
    let mut rng = substream(seed, 0);
    let v: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    PureState::normalized(v).unwrap()
}

/// Kronecker product of single-qubit gates, qubit 1 leftmost.
fn local_product(gates: &[UnitaryMatrix]) -> UnitaryMatrix {
    let mut acc = vec![C64::new(1.0, 0.0)];
    let mut dim = 1;
    for g in gates {
        let mut next = vec![C64::new(0.0, 0.0); dim * dim * 4];
        for i in 0..dim {
            for j in 0..dim {
                for a in 0..2 {
                    for b in 0..2 {
                        next[(2 * i + a) * 2 * dim + 2 * j + b] = acc[i * dim + j] * g.get(a, b);
                    }
                }
            }
        }
        acc = next;
        dim *= 2;
    }
    UnitaryMatrix::certify(rmt_entangle::linalg::ComplexMatrix::new(dim, acc).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn q_is_bounded(seed in any::<u64>(), n in 1usize..=6) {
        let q = q_measure(&random_state(seed, 1 << n)).unwrap();
        prop_assert!((0.0..=1.0).contains(&q));
    }

    #[test]
    fn q_ignores_global_phase(seed in any::<u64>(), n in 1usize..=6, theta in 0.0..std::f64::consts::TAU) {
        let s = random_state(seed, 1 << n);
        let phase = C64::from_polar(1.0, theta);
        let rotated = PureState::new(s.amplitudes().iter().map(|z| z * phase).collect()).unwrap();
        let d = (q_measure(&s).unwrap() - q_measure(&rotated).unwrap()).abs();
        prop_assert!(d <= 1e-12);
    }

    #[test]
    fn q_ignores_local_unitaries(seed in any::<u64>(), n in 2usize..=5) {
        let s = random_state(seed, 1 << n);
        let mut rng = substream(seed, 1);
        let gates: Vec<UnitaryMatrix> = (0..n).map(|_| random_su2(&mut rng)).collect();
        let moved = apply(&local_product(&gates), &s).unwrap();
        let d = (q_measure(&s).unwrap() - q_measure(&moved).unwrap()).abs();
        prop_assert!(d <= 1e-12);
    }

    #[test]
    fn q_ignores_qubit_permutations(seed in any::<u64>(), n in 2usize..=6, swap in any::<(usize, usize)>()) {
        let s = random_state(seed, 1 << n);
        let (a, b) = (swap.0 % n, swap.1 % n);
        let permuted: Vec<C64> = (0..1usize << n)
            .map(|k| {
                let (ba, bb) = ((k >> a) & 1, (k >> b) & 1);
                let src = (k & !(1 << a) & !(1 << b)) | (bb << a) | (ba << b);
                s.amplitudes()[src]
            })
            .collect();
        let p = PureState::new(permuted).unwrap();
        let d = (q_measure(&s).unwrap() - q_measure(&p).unwrap()).abs();
        prop_assert!(d <= 1e-12);
    }

    #[test]
    fn moment_estimate_lies_in_unit_interval(seed in any::<u64>(), n in 1usize..=6) {
        // low·high ≤ 1/4 and the paired products are a subset of low·high
        let s = random_state(seed, 1 << n);
        let p = s.probabilities();
        let est = q_from_amplitude_moments(&[p]).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&est));
    }

    #[test]
    fn power_additivity(seed in any::<u64>(), a in 0u64..40, b in 0u64..40) {
        let mut rng = substream(seed, 0);
        let u = sample_cue_hurwitz(16, &mut rng).unwrap();
        let lhs = matrix_power(&u, a).unwrap().compose(&matrix_power(&u, b).unwrap()).unwrap();
        let rhs = matrix_power(&u, a + b).unwrap();
        prop_assert!(lhs.matrix().max_abs_diff(rhs.matrix()) <= 1e-8);
    }

    #[test]
    fn spectral_round_trip(seed in any::<u64>(), dim in 2usize..=32) {
        let mut rng = substream(seed, 0);
        let u = sample_cue_hurwitz(dim, &mut rng).unwrap();
        let d = eig_unitary(&u).unwrap();
        prop_assert!(d.reconstruct().max_abs_diff(u.matrix()) <= 1e-8);
        prop_assert!(d.orthonormality_residual() <= 1e-8);
        prop_assert!(d.eigenangles.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(d.eigenangles.iter().all(|&a| (0.0..std::f64::consts::TAU).contains(&a)));
    }

    #[test]
    fn ks_is_order_invariant(mut xs in prop::collection::vec(0.0f64..5.0, 1..200)) {
        let cdf = |x: f64| 1.0 - (-x).exp();
        let d1 = ks_distance(&xs, cdf).unwrap();
        xs.reverse();
        let d2 = ks_distance(&xs, cdf).unwrap();
        prop_assert_eq!(d1, d2);
        prop_assert!((0.0..=1.0).contains(&d1));
        prop_assert_eq!(ks_two_sample(&xs, &xs).unwrap(), 0.0);
    }

    #[test]
    fn histogram_conserves_counts(xs in prop::collection::vec(-1.0f64..3.0, 0..300), bins in 1usize..40) {
        let h = Histogram::from_samples(0.0, 2.0, bins, &xs).unwrap();
        prop_assert_eq!(h.in_range() + h.underflow + h.overflow, xs.len() as u64);
        if h.in_range() > 0 {
            let width = 2.0 / bins as f64;
            let mass: f64 = h.densities().iter().map(|d| d * width).sum();
            prop_assert!((mass - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn unfolded_spacings_have_unit_mean(mut angles in prop::collection::vec(0.0f64..std::f64::consts::TAU, 2..100)) {
        angles.sort_by(f64::total_cmp);
        let s = spacings_from_angles(&angles);
        prop_assert_eq!(s.spacings.len(), angles.len());
        prop_assert!((s.mean() - 1.0).abs() <= 1e-12);
        prop_assert!(s.spacings.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn export_round_trips(seed in any::<u64>(), index in 0u64..1000, dim in 1usize..=16) {
        let spec = EnsembleSpec::new(EnsembleKind::CueHurwitz, dim.max(2), seed).unwrap();
        let u = spec.sample(index).unwrap().into_matrix();
        let header = MatrixHeader {
            dim: u.dim(),
            kind: spec.kind.name().into(),
            params: spec.params(),
            seed,
            sample_index: index,
        };
        let mut bin = Vec::new();
        write_binary(&mut bin, &header, &u).unwrap();
        prop_assert_eq!(read_binary(bin.as_slice()).unwrap(), (header.clone(), u.clone()));
        let mut csv = Vec::new();
        write_csv(&mut csv, &header, &u).unwrap();
        prop_assert_eq!(read_csv(csv.as_slice()).unwrap(), (header, u));
    }

    #[test]
    fn sampling_is_deterministic(seed in any::<u64>(), index in 0u64..1000, delta in 0.05f64..=1.0) {
        let spec = EnsembleSpec::new(EnsembleKind::Interpolating { delta }, 8, seed).unwrap();
        let again = EnsembleSpec::new(EnsembleKind::Interpolating { delta }, 8, seed).unwrap();
        prop_assert_eq!(spec.sample(index).unwrap(), again.sample(index).unwrap());
        prop_assert!(spec.sample(index).unwrap().unitarity_residual() <= 1e-10);
    }
}
