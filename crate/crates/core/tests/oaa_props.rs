mod common;

use bechain::block_encoding::random_near_identity_set;
use bechain::linalg::{c, random_gaussian, unitary_with_first_column, CMatrix};
use bechain::mcm::{block_product, gadget_pmacg};
use bechain::oaa::{grover_boost, oaa_ambe, reflect_initial, reflect_signal, AAProblem};
use common::{dist, id, qr_unitary, rng};
use proptest::prelude::*;

/// Two-qubit problem with good amplitude `sin θ` on the first signal branch.
fn planar(theta: f64, phase: f64) -> CMatrix {
    let col = [c(theta.sin(), 0.0), c(0.0, 0.0), c(theta.cos() * phase.cos(), theta.cos() * phase.sin()), c(0.0, 0.0)];
    unitary_with_first_column(&col).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn amplitude_follows_sine_law(theta in 0.01f64..1.5, phase in -3.0f64..3.0, k in 0usize..12) {
        let b = grover_boost(&AAProblem::new(planar(theta, phase), 1, Some(k)).unwrap()).unwrap();
        let want = (((2 * k + 1) as f64) * theta).sin().abs();
        prop_assert!((b.alpha_after - want).abs() <= 1e-10);
        prop_assert!((b.probability - want * want).abs() <= 1e-10);
    }

    #[test]
    fn reflections_are_involutions(seed in any::<u64>(), total in 2usize..=4) {
        let u0 = qr_unitary(1 << total, &mut rng(seed));
        let r0 = reflect_initial(&u0).unwrap();
        prop_assert!(dist(&r0.matmul(&r0), &id(1 << total)) < 1e-12);
        for sig in 1..total {
            let rs = reflect_signal(sig, total).unwrap();
            prop_assert!(dist(&rs.matmul(&rs), &id(1 << total)) < 1e-15);
        }
    }

    #[test]
    fn fidelity_tracks_gadget_error(seed in any::<u64>(), k in 4usize..=10, cc in 0.1f64..1.0) {
        let encs = random_near_identity_set(1, 1, k, cc / k as f64, seed).unwrap();
        let circ = gadget_pmacg(&encs, 1).unwrap();
        let input = random_gaussian(2, 1, &mut rng(seed ^ 1)).into_data();
        let out = oaa_ambe(&circ, &block_product(&encs).unwrap(), &input).unwrap();
        let rel = out.eps / out.target_norm;
        prop_assert!(out.fidelity >= 1.0 - rel * rel - 1e-12);
    }
}

#[test]
fn near_identity_instances_meet_literal_bound() {
    for seed in 0..10 {
        let encs = random_near_identity_set(1, 1, 8, 0.5 / 8.0, seed).unwrap();
        let circ = gadget_pmacg(&encs, 1).unwrap();
        let input = random_gaussian(2, 1, &mut rng(seed + 100)).into_data();
        let out = oaa_ambe(&circ, &block_product(&encs).unwrap(), &input).unwrap();
        assert!(out.fidelity >= 1.0 - out.eps * out.eps, "seed {seed}");
        assert!(out.boost.probability >= 0.8, "seed {seed}");
    }
}

#[test]
fn bad_problems_are_rejected() {
    assert!(AAProblem::new(qr_unitary(4, &mut rng(0)), 2, None).is_err());
    assert!(AAProblem::new(qr_unitary(4, &mut rng(0)), 0, None).is_err());
    assert!(AAProblem::new(CMatrix::identity(4).scale_real(2.0), 1, None).is_err());
    // No overlap with the good subspace.
    let swap = CMatrix::from_fn(4, 4, |i, j| c(if (i + 2) % 4 == j { 1.0 } else { 0.0 }, 0.0));
    assert!(grover_boost(&AAProblem::new(swap, 1, None).unwrap()).is_err());
}
