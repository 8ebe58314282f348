mod common;

use common::{concurrence_oracle, mixed_state, pure_state, random_state, sandwich, uhlmann};
use num_complex::Complex64;
use pairtomo::linalg::CMat4;
use pairtomo::metrics::{concurrence, fidelity_mixed, fidelity_to_pure, purity, relative_phase};
use pairtomo::random::local_unitary;
use pairtomo::rng::stream;
use pairtomo::state::{bell_state, born_probability, product_ket, projector2q, werner};
use pairtomo::{BasisState, DensityMatrix, DensityMatrix32, JonesVector};
use proptest::prelude::*;

fn jones(h_re: f64, h_im: f64, v_re: f64, v_im: f64) -> Option<JonesVector> {
    JonesVector::normalized(Complex64::new(h_re, h_im), Complex64::new(v_re, v_im)).ok()
}

proptest! {
    #[test]
    fn projector_is_idempotent_with_unit_trace(
        a in prop::array::uniform4(-1.0f64..1.0),
        b in prop::array::uniform4(-1.0f64..1.0),
    ) {
        let (Some(s), Some(i)) = (jones(a[0], a[1], a[2], a[3]), jones(b[0], b[1], b[2], b[3])) else {
            return Ok(());
        };
        let p = *projector2q(&s, &i).matrix();
        prop_assert!((p * p).max_abs_diff(&p) < 1e-12);
        prop_assert!((p.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn born_probabilities_sum_to_one_per_basis_pair(seed in 0u64..10_000, sb in 0usize..3, ib in 0usize..3) {
        let rho = random_state(seed, seed);
        let pair = |k: usize| [BasisState::ALL[2 * k], BasisState::ALL[2 * k + 1]];
        let mut total = 0.0;
        for s in pair(sb) {
            for i in pair(ib) {
                let p = born_probability(&rho, &projector2q(&s.jones(), &i.jones()));
                prop_assert!(p >= 0.0);
                total += p;
            }
        }
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fidelity_to_pure_is_local_unitary_invariant(seed in 0u64..10_000) {
        let rho = mixed_state(seed);
        let target = pure_state(seed);
        let u = local_unitary(&mut stream(seed, "test-unitary", 0));
        let f0 = fidelity_to_pure(&rho, &target).unwrap();
        let f1 = fidelity_to_pure(&rho.transform(&u), &target.transform(&u)).unwrap();
        prop_assert!((f0 - f1).abs() < 1e-12);
    }

    #[test]
    fn relative_phase_recovers_bell_phase(theta in -3.1f64..3.1) {
        let rho = bell_state(theta).unwrap();
        prop_assert!((relative_phase(&rho).unwrap() - theta).abs() < 1e-12);
        prop_assert!((concurrence(&rho) - 1.0).abs() < 1e-9);
        prop_assert!((purity(&rho) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn mixed_fidelity_matches_uhlmann_oracle_and_is_symmetric() {
    for k in 0..100 {
        let a = random_state(1, 2 * k);
        let b = random_state(2, 2 * k + 1);
        let fab = fidelity_mixed(&a, &b);
        let fba = fidelity_mixed(&b, &a);
        assert!((fab - fba).abs() < 1e-9, "asymmetric at {k}: {fab} vs {fba}");
        let oracle = uhlmann(&a, &b);
        assert!((fab - oracle).abs() < 1e-8, "pair {k}: {fab} vs oracle {oracle}");
        assert!((0.0..=1.0 + 1e-12).contains(&fab));
    }
}

#[test]
fn mixed_fidelity_agrees_with_pure_formula() {
    for k in 0..50 {
        let rho = mixed_state(100 + k);
        let psi = pure_state(200 + k);
        let f_pure = fidelity_to_pure(&rho, &psi).unwrap();
        assert!((fidelity_mixed(&rho, &psi) - f_pure).abs() < 1e-9);
    }
}

#[test]
fn concurrence_matches_wootters_oracle() {
    for k in 0..100 {
        let rho = random_state(3, k);
        let c = concurrence(&rho);
        let oracle = concurrence_oracle(&rho);
        assert!((c - oracle).abs() < 1e-7, "state {k}: {c} vs {oracle}");
    }
}

#[test]
fn werner_concurrence_grid() {
    for k in 0..=20 {
        let p = k as f64 * 0.05;
        let expected = ((3.0 * p - 1.0) / 2.0).max(0.0);
        let c = concurrence(&werner(p).unwrap());
        assert!((c - expected).abs() < 1e-8, "p={p}: {c} vs {expected}");
    }
}

#[test]
fn circular_projector_matches_hand_expansion() {
    // |R>|L> = (1, i, -i, 1) / 2
    let ket = [
        Complex64::new(0.5, 0.0),
        Complex64::new(0.0, 0.5),
        Complex64::new(0.0, -0.5),
        Complex64::new(0.5, 0.0),
    ];
    let p: CMat4<f64> = *projector2q(&BasisState::R.jones(), &BasisState::L.jones()).matrix();
    assert!((p[(0, 0)] - Complex64::new(0.25, 0.0)).norm() < 1e-15);
    for i in 0..4 {
        for j in 0..4 {
            assert!((p[(i, j)] - ket[i] * ket[j].conj()).norm() < 1e-15, "entry ({i}, {j})");
        }
    }
    let dd: CMat4<f64> = *projector2q(&BasisState::D.jones(), &BasisState::D.jones()).matrix();
    for i in 0..4 {
        for j in 0..4 {
            assert!((dd[(i, j)] - Complex64::new(0.25, 0.0)).norm() < 1e-15);
        }
    }
    let rho = bell_state(0.0).unwrap();
    let p = born_probability(&rho, &projector2q(&BasisState::R.jones(), &BasisState::L.jones()));
    assert!((p - sandwich(&ket, rho.matrix(), &ket).re).abs() < 1e-15);
    assert!((p - 0.5).abs() < 1e-15);
}

#[test]
fn bell_state_has_no_diagonal_antidiagonal_coincidences() {
    let rho = bell_state(0.0).unwrap();
    let da = product_ket(&BasisState::D.jones(), &BasisState::A.jones());
    assert!(sandwich(&da, rho.matrix(), &da).norm() < 1e-15);
    let p = born_probability(&rho, &projector2q(&BasisState::D.jones(), &BasisState::A.jones()));
    assert!(p.abs() < 1e-15);
    let p = born_probability(&rho, &projector2q(&BasisState::D.jones(), &BasisState::D.jones()));
    assert!((p - 0.5).abs() < 1e-15);
}

#[test]
fn product_state_has_zero_concurrence_and_undefined_phase() {
    let ket = product_ket(&BasisState::H.jones(), &BasisState::V.jones());
    let rho = DensityMatrix::pure(&ket).unwrap();
    assert!(concurrence(&rho).abs() < 1e-12);
    assert!(relative_phase(&rho).is_err());
    assert!(relative_phase(&DensityMatrix::maximally_mixed()).is_err());
}

#[test]
fn density_matrix_rejects_invalid_input() {
    let mut m = CMat4::<f64>::identity().scale(0.25);
    m[(0, 1)] = Complex64::new(0.1, 0.0);
    assert!(DensityMatrix::new(m).is_err());
    let mut m = CMat4::<f64>::identity().scale(0.25);
    m[(0, 0)] = Complex64::new(f64::NAN, 0.0);
    assert!(DensityMatrix::new(m).is_err());
    assert!(DensityMatrix::new(CMat4::<f64>::identity().scale(0.5)).is_err());
    assert!(werner(1.5).is_err());
    assert!(JonesVector::new(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)).is_err());
}

#[test]
fn single_precision_metrics() {
    let rho: DensityMatrix32 = bell_state(0.3f32).unwrap();
    assert!((relative_phase(&rho).unwrap() - 0.3).abs() < 1e-5);
    assert!((concurrence(&rho) - 1.0).abs() < 1e-4);
    let w: DensityMatrix32 = werner(0.8f32).unwrap();
    assert!((concurrence(&w) - 0.7).abs() < 1e-4);
    let f = fidelity_mixed(&rho, &bell_state(0.3f32).unwrap());
    assert!((f - 1.0).abs() < 1e-3);
}
