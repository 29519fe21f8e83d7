mod common;

use std::sync::Arc;

use bechain::appgen::{
    dyson_propagators, dyson_sequence, trotter_sequence, DysonConfig, DysonSpec, Family, JsonMatrix, Pauli,
    TrotterConfig, TrotterSpec,
};
use bechain::block_encoding::deviation;
use bechain::cli::sequence_gadget_check;
use bechain::linalg::{c, pauli_x, pauli_z, CMatrix};
use bechain::mcm::block_product;
use common::{dist, hermitian_with_norm, id, rng, spectral};
use proptest::prelude::*;

fn exact_evolution(h: &CMatrix, t: f64) -> CMatrix {
    // e^{-iHt} through the spectral oracle on cos and sin parts.
    let re = spectral(h, |x| (x * t).cos());
    let im = spectral(h, |x| -(x * t).sin());
    &re + &im.scale(c(0.0, 1.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn trotter_sequence_properties(seed in any::<u64>(), l in 1usize..=3, t in -2.0f64..2.0, k in 1usize..=12) {
        let mut r = rng(seed);
        let terms: Vec<CMatrix> = (0..l).map(|_| hermitian_with_norm(2, 0.7, &mut r)).collect();
        let seq = trotter_sequence(&TrotterSpec::new(terms.clone(), t, k).unwrap()).unwrap();
        prop_assert_eq!(seq.encodings.len(), l * k);
        let limit = seq.c / seq.encodings.len() as f64;
        for be in &seq.encodings {
            prop_assert!(dist(&be.unitary.adjoint().matmul(&be.unitary), &id(be.dim())) <= 1e-9);
            prop_assert!(deviation(be) <= limit * (1.0 + 1e-9));
        }
        // The block product is the first-order product formula.
        let mut want = id(2);
        for _ in 0..k {
            for h in &terms {
                want = exact_evolution(h, t / k as f64).matmul(&want);
            }
        }
        prop_assert!(dist(&block_product(&seq.encodings).unwrap(), &want) <= 1e-10);
    }

    #[test]
    fn dyson_sequence_properties(scale in 0.1f64..1.0, omega in 0.0f64..3.0, k in 2usize..=10) {
        let h = pauli_x();
        let a: bechain::appgen::Generator = {
            let h = h.scale(c(0.0, -scale));
            Arc::new(move |t: f64| h.scale_real((omega * t).cos()))
        };
        let spec = DysonSpec::new(a, scale, 1.0, k, 64).unwrap();
        let seq = dyson_sequence(&spec).unwrap();
        for be in &seq.encodings {
            prop_assert!(dist(&be.unitary.adjoint().matmul(&be.unitary), &id(be.dim())) <= 1e-9);
        }
        prop_assert!(seq.profile.eta_max <= seq.eta_limit() * 1.1);
        // Commuting generator: the exact interval propagator is a rotation.
        let xi = dyson_propagators(&spec, 64).unwrap();
        let dt = 1.0 / k as f64;
        for (j, x) in xi.iter().enumerate() {
            let (t0, t1) = (j as f64 * dt, (j + 1) as f64 * dt);
            let integral = if omega == 0.0 { dt } else { ((omega * t1).sin() - (omega * t0).sin()) / omega };
            let want = exact_evolution(&h, scale * integral);
            prop_assert!(dist(x, &want) <= 1e-4 * dt);
        }
    }
}

#[test]
fn dyson_step_doubling_converges() {
    let family = Family::PauliPair { first: Pauli::X, second: Pauli::Z, c1: 0.6, c2: 0.4, omega: 2.0 };
    let cfg = DysonConfig { family, lambda: 1.0, t_total: 1.0, k: 8, micro_steps: 256 };
    let spec = cfg.to_spec().unwrap();
    let coarse = dyson_propagators(&spec, 256).unwrap();
    let fine = dyson_propagators(&spec, 512).unwrap();
    for (a, b) in coarse.iter().zip(&fine) {
        assert!(dist(a, b) <= 1e-8, "{}", dist(a, b));
    }
}

#[test]
fn non_unitary_intervals_use_general_dilation() {
    let m = CMatrix::diag_real(&[-0.3, -0.1]);
    let cfg = DysonConfig {
        family: Family::Constant { matrix: JsonMatrix::from_matrix(&m) },
        lambda: 0.3,
        t_total: 1.0,
        k: 8,
        micro_steps: 32,
    };
    let seq = dyson_sequence(&cfg.to_spec().unwrap()).unwrap();
    let want = CMatrix::diag_real(&[(-0.3f64).exp(), (-0.1f64).exp()]);
    assert!(dist(&block_product(&seq.encodings).unwrap(), &want) < 1e-10);
    // Dissipative steps deviate like the square root of ‖I - Ξ‖.
    let gap = 1.0 - (-0.3f64 / 8.0).exp();
    assert!(seq.profile.eta_max <= 2.0 * gap.sqrt(), "{}", seq.profile.eta_max);
}

#[test]
fn trotter_feeds_macg() {
    let half = |m: CMatrix| JsonMatrix::from_matrix(&m.scale_real(0.5));
    let cfg = TrotterConfig { terms: vec![half(pauli_x()), half(pauli_z())], t: 1.0, k: 16 };
    let seq = trotter_sequence(&cfg.to_spec().unwrap()).unwrap();
    assert!(seq.profile.eta_max <= seq.eta_limit());
    let (e, bound) = sequence_gadget_check(&seq, 1).unwrap();
    assert!(e <= bound, "{e} > {bound}");
}

#[test]
fn configs_parse_from_json() {
    let t: TrotterConfig = serde_json::from_str(r#"{"terms": [[[[0.5,0],[0,0]],[[0,0],[-0.5,0]]]], "t": 1.0, "K": 4}"#).unwrap();
    assert_eq!(t.k, 4);
    let d: DysonConfig = serde_json::from_str(
        r#"{"family": {"type": "pauli_pair", "first": "X", "second": "Y", "c1": 0.5, "c2": 0.5, "omega": 1.0},
            "lambda": 1.0, "T": 1.0, "K": 4}"#,
    )
    .unwrap();
    assert_eq!(d.micro_steps, 256);
    assert!(serde_json::from_str::<DysonConfig>(r#"{"family": {"type": "nope"}, "lambda": 1, "T": 1, "K": 1}"#).is_err());
}
