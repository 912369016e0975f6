mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use approx::assert_abs_diff_eq;
use common::{apply_dense, c, dense_expm, dense_spectrum, kron_dense, max_abs_diff};
use nalgebra::DMatrix;
use proptest::prelude::*;
use qaoalab::models::{build_model, to_dense, Family, GroundSpace};
use qaoalab::simulator::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KINDS: [GeneratorKind; 5] = [
    GeneratorKind::Zz,
    GeneratorKind::X,
    GeneratorKind::Z,
    GeneratorKind::Zzz,
    GeneratorKind::Xxyy,
];

fn layer(state: &StateVector, kind: GeneratorKind, theta: f64) -> StateVector {
    apply_layer(state, &Generator::new(kind, state.n()).unwrap(), theta).unwrap()
}

fn overlap(a: &StateVector, b: &StateVector) -> f64 {
    fidelity(a, b).unwrap()
}

#[test]
fn layers_match_dense_exponential() {
    let n = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for kind in KINDS {
        let h = kron_dense(n, &kind.terms(n));
        for k in 0..100 {
            let psi = StateVector::random(n, &mut rng);
            let theta = if k == 0 { 0.37 } else { rng.gen_range(-2.0 * PI..2.0 * PI) };
            let expected = apply_dense(&dense_expm(&h, theta), psi.amplitudes());
            let got = layer(&psi, kind, theta);
            assert!(max_abs_diff(got.amplitudes(), &expected) <= 1e-10, "{kind:?} θ={theta}");
        }
    }
}

#[test]
fn x_layer_on_x_polarized_is_phase() {
    let psi = product_state_x(2, XDirection::Plus);
    let theta = 0.41;
    let out = layer(&psi, GeneratorKind::X, theta);
    let phase = c(0.0, 2.0 * theta).exp();
    for (a, b) in out.amplitudes().iter().zip(psi.amplitudes()) {
        assert_abs_diff_eq!((a - b * phase).norm(), 0.0, epsilon = 1e-14);
    }
}

#[test]
fn zz_layer_on_up_up_is_phase() {
    let theta = 0.23;
    let out = layer(&StateVector::basis(2, 0), GeneratorKind::Zz, theta);
    assert_abs_diff_eq!((out.amplitudes()[0] - c(0.0, 2.0 * theta).exp()).norm(), 0.0, epsilon = 1e-14);
}

#[test]
fn product_states() {
    let p = product_state_x(2, XDirection::Plus);
    let m = product_state_x(2, XDirection::Minus);
    let re = |s: &StateVector| s.amplitudes().iter().map(|a| a.re).collect::<Vec<_>>();
    assert_eq!(re(&p), vec![0.5; 4]);
    assert_eq!(re(&m), vec![0.5, -0.5, -0.5, 0.5]);
    let field = build_model(Family::Fm, 3, 1.0, 0.0).unwrap();
    let zz = build_model(Family::Fm, 3, 0.0, 0.0).unwrap();
    // ⟨ΣX⟩ = −(⟨H⟩ − ⟨H_zz⟩) with h_x = 1
    let sx = -(energy(&product_state_x(3, XDirection::Plus), &field).unwrap()
        - energy(&product_state_x(3, XDirection::Plus), &zz).unwrap());
    assert_abs_diff_eq!(sx, 3.0, epsilon = 1e-12);
}

#[test]
fn sector_ground_support_and_energy() {
    let n = 6;
    let psi = xxyy_sector_ground(n, -2).unwrap();
    // ΣZ = −2: four down spins (bit 1)
    for (b, a) in psi.amplitudes().iter().enumerate() {
        if (b as u32).count_ones() != 4 {
            assert_eq!(a.norm(), 0.0);
        }
    }
    let h = kron_dense(n, &GeneratorKind::Xxyy.terms(n));
    let idx: Vec<usize> = (0..1usize << n).filter(|b| b.count_ones() == 4).collect();
    assert_eq!(idx.len(), 15);
    let block = DMatrix::from_fn(15, 15, |r, s| h[(idx[r], idx[s])]);
    let e0 = dense_spectrum(&block)[0];
    let hpsi = apply_dense(&h, psi.amplitudes());
    let e: f64 = psi.amplitudes().iter().zip(&hpsi).map(|(a, b)| (a.conj() * b).re).sum();
    assert_abs_diff_eq!(e, e0, epsilon = 1e-10);
}

#[test]
fn sector_ground_is_translation_symmetric() {
    let psi = xxyy_sector_ground(3, -1).unwrap();
    assert_abs_diff_eq!(overlap(&psi, &psi.translate()), 1.0, epsilon = 1e-10);
    assert!(xxyy_sector_ground(4, 1).is_err());
    assert!(xxyy_sector_ground(4, 6).is_err());
}

#[test]
fn fidelity_cases() {
    let up = StateVector::basis(2, 0);
    let down = StateVector::basis(2, 3);
    assert_abs_diff_eq!(overlap(&up, &up), 1.0, epsilon = 1e-15);
    assert_eq!(overlap(&up, &down), 0.0);
    let g = GroundSpace::from_states(-2.0, vec![up, down], 1e-9).unwrap();
    assert_abs_diff_eq!(fidelity(&product_state_x(2, XDirection::Plus), &g).unwrap(), 0.5, epsilon = 1e-14);
    assert!(fidelity(&StateVector::basis(3, 0), &StateVector::basis(2, 0)).is_err());
}

#[test]
fn energy_cases() {
    let m = build_model(Family::Fm, 2, 0.0, 0.0).unwrap();
    assert_abs_diff_eq!(energy(&StateVector::basis(2, 0), &m).unwrap(), -2.0, epsilon = 1e-14);
    for (family, hx, hz) in [(Family::Fm, 0.7, 0.3), (Family::Afm, 1.3, -0.2), (Family::Threespin, 0.4, -1.0)] {
        let m = build_model(family, 5, hx, hz).unwrap();
        assert_abs_diff_eq!(energy(&product_state_x(5, XDirection::Plus), &m).unwrap(), -5.0 * hx, epsilon = 1e-12);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let m = build_model(Family::Afm, 5, 0.9, 0.4).unwrap();
    let h = to_dense(&m).unwrap();
    for _ in 0..10 {
        let psi = StateVector::random(5, &mut rng);
        let hpsi = apply_dense(&h, psi.amplitudes());
        let e: f64 = psi.amplitudes().iter().zip(&hpsi).map(|(a, b)| (a.conj() * b).re).sum();
        assert_abs_diff_eq!(energy(&psi, &m).unwrap(), e, epsilon = 1e-11);
    }
}

#[test]
fn periodic_generators_repeat_after_pi() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for kind in [GeneratorKind::Zz, GeneratorKind::X, GeneratorKind::Z, GeneratorKind::Zzz] {
        for n in 3..=6 {
            let psi = StateVector::random(n, &mut rng);
            let theta = rng.gen_range(0.0..PI);
            let a = layer(&psi, kind, theta);
            let b = layer(&psi, kind, theta + PI);
            assert_abs_diff_eq!(overlap(&a, &b), 1.0, epsilon = 1e-10);
        }
    }
}

#[test]
fn zz_half_period_is_phase() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let n = rng.gen_range(2..=6);
        let psi = StateVector::random(n, &mut rng);
        let theta = rng.gen_range(0.0..PI);
        let a = layer(&psi, GeneratorKind::Zz, theta);
        let b = layer(&psi, GeneratorKind::Zz, theta + FRAC_PI_2);
        assert_abs_diff_eq!(overlap(&a, &b), 1.0, epsilon = 1e-10);
    }
}

#[test]
fn parity_flip_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..100 {
        let n = rng.gen_range(2..=6);
        let psi = StateVector::random(n, &mut rng);
        let (t2, t3) = (rng.gen_range(0.0..PI), rng.gen_range(0.0..PI));
        let lhs = layer(&layer(&psi, GeneratorKind::X, t2), GeneratorKind::Z, t3 + FRAC_PI_2);
        let rhs = layer(&layer(&psi.apply_z_parity(), GeneratorKind::X, -t2), GeneratorKind::Z, t3);
        assert_abs_diff_eq!(overlap(&lhs, &rhs), 1.0, epsilon = 1e-10);
    }
}

#[test]
fn parity_maps_plus_to_minus() {
    for n in 1..=6 {
        let flipped = product_state_x(n, XDirection::Plus).apply_z_parity();
        assert_eq!(flipped, product_state_x(n, XDirection::Minus));
    }
}

#[test]
fn dimension_mismatch_and_small_systems() {
    let g = Generator::new(GeneratorKind::Zz, 3).unwrap();
    assert!(apply_layer(&StateVector::basis(2, 0), &g, 0.1).is_err());
    assert!(Generator::new(GeneratorKind::Zzz, 2).is_err());
    assert!(GeneratorKind::parse("YY").is_err());
    assert_eq!(GeneratorKind::parse("xxyy").unwrap(), GeneratorKind::Xxyy);
}

#[test]
fn json_dump_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let psi = StateVector::random(3, &mut rng);
    let back = StateVector::from_json(&psi.to_json()).unwrap();
    assert!(max_abs_diff(psi.amplitudes(), back.amplitudes()) < 1e-15);
}

fn arb_state() -> impl Strategy<Value = (StateVector, f64, f64, usize)> {
    (2usize..=6, any::<u64>(), -10.0f64..10.0, -10.0f64..10.0, 0usize..KINDS.len()).prop_map(|(n, seed, a, b, k)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (StateVector::random(n, &mut rng), a, b, k)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn layers_preserve_norm((psi, theta, _, k) in arb_state()) {
        let kind = KINDS[k];
        prop_assume!(psi.n() >= 3 || kind != GeneratorKind::Zzz);
        let out = layer(&psi, kind, theta);
        prop_assert!((out.norm() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn layers_compose_additively((psi, a, b, k) in arb_state()) {
        let kind = KINDS[k];
        prop_assume!(psi.n() >= 3 || kind != GeneratorKind::Zzz);
        let two = layer(&layer(&psi, kind, a), kind, b);
        let one = layer(&psi, kind, a + b);
        prop_assert!(max_abs_diff(two.amplitudes(), one.amplitudes()) <= 1e-10);
    }
}
