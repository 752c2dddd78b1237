// Copyright 2026 The eeqt Authors
// SPDX-License-Identifier: Apache-2.0

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::linalg::{expm, hermitian_eigen, ComplexVector};
use crate::model::random::{random_density, random_hermitian, random_model};
use crate::model::{
    build_model, builtin_model, BuiltinParams, CouplingFamily, PureHybridState, Schedule,
};

fn s(label: usize) -> Sector {
    Sector::new(label)
}

fn detector(omega: f64, kappa: f64) -> HybridModel {
    builtin_model(
        "qubit-detector",
        &BuiltinParams {
            omega,
            kappa,
            ..Default::default()
        },
    )
    .unwrap()
}

fn pure(psi: &[f64], alpha: usize, m: usize) -> HybridDensityState {
    let state = PureHybridState::new(ComplexVector::from_real(psi), s(alpha)).unwrap();
    HybridDensityState::from_pure(&state, m).unwrap()
}

fn random_state(rng: &mut ChaCha8Rng, n: usize, m: usize) -> HybridDensityState {
    let weights: Vec<f64> = (0..m)
        .map(|_| rand::Rng::random::<f64>(rng) + 0.1)
        .collect();
    let total: f64 = weights.iter().sum();
    let blocks = weights
        .iter()
        .map(|w| random_density(rng, n).scale(re(w / total)))
        .collect();
    HybridDensityState::new(blocks).unwrap()
}

fn random_observable(rng: &mut ChaCha8Rng, n: usize, m: usize) -> HybridObservable {
    HybridObservable::new((0..m).map(|_| random_hermitian(rng, n, 1.0)).collect()).unwrap()
}

/// Sector 1 of the detector receives nothing, so its block follows
/// `e^{Kt} ρ e^{K*t}` exactly.
fn detector_oracle_p2(omega: f64, kappa: f64, psi: &[f64], t: f64) -> f64 {
    let model = detector(omega, kappa);
    let k = model.effective_generator(s(1), 0.0).unwrap();
    let u = expm(&k.scale(re(t))).unwrap();
    let v = u.apply(&ComplexVector::from_real(psi));
    1.0 - v.norm_sq()
}

#[test]
fn hand_computed_rhs_for_a_single_click() {
    let model = detector(0.0, 2.0);
    let rho = pure(&[0.0, 1.0], 1, 2);
    let d = liouville_rhs(&model, rho.as_blocks(), 0.0).unwrap();
    let p1 = ComplexMatrix::basis_projector(2, 1);
    assert_abs_diff_eq!(
        d.blocks()[0].sub(&p1.scale(re(-2.0))).frobenius_norm(),
        0.0,
        epsilon = 1e-15
    );
    assert_abs_diff_eq!(
        d.blocks()[1].sub(&p1.scale(re(2.0))).frobenius_norm(),
        0.0,
        epsilon = 1e-15
    );
}

#[test]
fn hand_computed_heisenberg_rhs_of_pointer() {
    // d/dt δ_{α,2} = Σ_β g_βα* δ_{β,2} g_βα - ½{Λ_α, δ_{α,2}}: in sector 1
    // this is g_21* g_21 = κ P1, in sector 2 it vanishes.
    let model = detector(1.0, 0.5);
    let a = HybridObservable::pointer(2, 2, s(2));
    let d = heisenberg_rhs(&model, a.as_blocks(), 0.0).unwrap();
    let expected = ComplexMatrix::basis_projector(2, 1).scale(re(0.5));
    assert_abs_diff_eq!(
        d.blocks()[0].sub(&expected).frobenius_norm(),
        0.0,
        epsilon = 1e-15
    );
    assert!(d.blocks()[1].is_zero());
}

#[test]
fn click_probability_matches_exponential_law() {
    for kappa in [0.5, 1.0, 2.0] {
        let model = detector(0.0, kappa);
        let times: Vec<f64> = (0..=10).map(|k| 0.5 * k as f64).collect();
        let out = integrate_master(&model, &pure(&[0.0, 1.0], 1, 2), 5.0, 1e-3, &times).unwrap();
        for (t, rho) in out {
            let p = reduce_classical(&rho);
            assert_abs_diff_eq!(p[1], 1.0 - (-kappa * t).exp(), epsilon = 1e-10);
            assert_abs_diff_eq!(p[0] + p[1], 1.0, epsilon = 1e-12);
        }
    }
}

#[test]
fn driven_detector_matches_propagator_oracle() {
    let model = detector(1.0, 1.0);
    let times = [0.5, 1.0, 2.0, 4.0];
    let out = integrate_master(&model, &pure(&[1.0, 0.0], 1, 2), 4.0, 1e-3, &times).unwrap();
    for (t, rho) in out {
        let p2 = reduce_classical(&rho)[1];
        assert_abs_diff_eq!(
            p2,
            detector_oracle_p2(1.0, 1.0, &[1.0, 0.0], t),
            epsilon = 1e-10
        );
    }
}

#[test]
fn rk4_error_is_fourth_order() {
    let model = detector(1.0, 1.0);
    let rho0 = pure(&[1.0, 0.0], 1, 2);
    let exact = detector_oracle_p2(1.0, 1.0, &[1.0, 0.0], 1.0);
    // Coarse steps are not positivity preserving, so measure the order on
    // the observable side, which runs the same RK4 without that check.
    let pointer = HybridObservable::pointer(2, 2, s(2));
    let err = |dt: f64| {
        let at = integrate_heisenberg(&model, &pointer, 1.0, dt).unwrap();
        (expectation(&at, &rho0).unwrap() - exact).abs()
    };
    let ratio = err(0.1) / err(0.05);
    assert!((12.0..20.0).contains(&ratio), "error ratio {ratio}");
}

#[test]
fn closed_system_is_unitary() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = random_hermitian(&mut rng, 4, 2.0);
    let model = build_model(4, 1, vec![h.clone().into()], CouplingFamily::new(1)).unwrap();
    let rho0 = random_state(&mut rng, 4, 1);
    let out = integrate_master(&model, &rho0, 1.0, 1e-3, &[1.0]).unwrap();
    let eig = hermitian_eigen(&h);
    let u = eig.reconstruct_with(|l| (-I * l).exp());
    let oracle = u.matmul(&rho0.blocks()[0]).matmul(&u.adjoint());
    assert_abs_diff_eq!(
        out[0].1.blocks()[0].sub(&oracle).frobenius_norm(),
        0.0,
        epsilon = 1e-9
    );
}

#[test]
fn identity_and_pointer_expectations() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rho = random_state(&mut rng, 3, 3);
    assert_abs_diff_eq!(
        expectation(&HybridObservable::identity(3, 3), &rho).unwrap(),
        1.0,
        epsilon = 1e-12
    );
    let p = reduce_classical(&rho);
    for (a, pa) in p.iter().enumerate() {
        let pointer = HybridObservable::pointer(3, 3, Sector::from_index(a));
        assert_abs_diff_eq!(expectation(&pointer, &rho).unwrap(), *pa, epsilon = 1e-14);
    }
    assert_abs_diff_eq!(reduce_quantum(&rho).trace().re, 1.0, epsilon = 1e-12);
}

#[test]
fn identity_is_heisenberg_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let model = random_model(&mut rng, 3, 3, 2.0);
    let one = HybridObservable::identity(3, 3);
    let d = heisenberg_rhs(&model, one.as_blocks(), 0.0).unwrap();
    for b in d.blocks() {
        assert!(b.frobenius_norm() < 1e-13);
    }
}

#[test]
fn duality_on_random_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let model = random_model(&mut rng, 3, 2, 2.0);
        let rho0 = random_state(&mut rng, 3, 2);
        let a0 = random_observable(&mut rng, 3, 2);
        let out = integrate_master(&model, &rho0, 1.0, 1e-2, &[1.0]).unwrap();
        let at = integrate_heisenberg(&model, &a0, 1.0, 1e-2).unwrap();
        let lhs = expectation(&at, &rho0).unwrap();
        let rhs = expectation(&a0, &out[0].1).unwrap();
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
    }
}

#[test]
fn duality_with_breakpoints() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let h1 = Schedule::piecewise(
        vec![0.3, 0.7],
        vec![
            random_hermitian(&mut rng, 2, 1.0),
            random_hermitian(&mut rng, 2, 1.0),
            random_hermitian(&mut rng, 2, 1.0),
        ],
    )
    .unwrap();
    let g = Schedule::piecewise(vec![0.5], vec![ComplexMatrix::identity(2), pauli_x()]).unwrap();
    let couplings = CouplingFamily::new(2)
        .with(s(2), s(1), g)
        .with(s(1), s(2), pauli_x());
    let model = build_model(2, 2, vec![h1, ComplexMatrix::zeros(2, 2).into()], couplings).unwrap();
    let rho0 = random_state(&mut rng, 2, 2);
    let a0 = random_observable(&mut rng, 2, 2);
    let out = integrate_master(&model, &rho0, 1.0, 1e-2, &[1.0]).unwrap();
    let at = integrate_heisenberg(&model, &a0, 1.0, 1e-2).unwrap();
    assert_abs_diff_eq!(
        expectation(&at, &rho0).unwrap(),
        expectation(&a0, &out[0].1).unwrap(),
        epsilon = 1e-12
    );
}

fn pauli_x() -> ComplexMatrix {
    crate::linalg::pauli::x()
}

#[test]
fn trace_and_positivity_on_random_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..10 {
        let model = random_model(&mut rng, 3, 3, 2.0);
        let rho0 = random_state(&mut rng, 3, 3);
        let times = [2.0, 5.0];
        let out = integrate_master(&model, &rho0, 5.0, 1e-3, &times).unwrap();
        for (_, rho) in out {
            assert_abs_diff_eq!(rho.as_blocks().total_trace().re, 1.0, epsilon = 1e-8);
            assert!(rho.min_eigenvalue().1 >= -1e-7);
        }
    }
}

#[test]
fn samples_at_zero_and_duplicates() {
    let model = detector(1.0, 1.0);
    let rho0 = pure(&[1.0, 0.0], 1, 2);
    let out = integrate_master(&model, &rho0, 1.0, 1e-2, &[0.0, 0.5, 0.5, 1.0]).unwrap();
    let times: Vec<f64> = out.iter().map(|(t, _)| *t).collect();
    assert_eq!(times, vec![0.0, 0.5, 0.5, 1.0]);
    assert_eq!(out[0].1, rho0);
    assert_eq!(out[1].1, out[2].1);
}

#[test]
fn invalid_inputs_are_rejected() {
    let model = detector(1.0, 1.0);
    let rho0 = pure(&[1.0, 0.0], 1, 2);
    assert!(matches!(
        integrate_master(&model, &rho0, 1.0, 0.0, &[]),
        Err(MasterError::InvalidParams(_))
    ));
    assert!(matches!(
        integrate_master(&model, &rho0, 1.0, 0.1, &[2.0]),
        Err(MasterError::InvalidParams(_))
    ));
    assert!(matches!(
        integrate_master(&model, &rho0, 1.0, 0.1, &[0.5, 0.2]),
        Err(MasterError::InvalidParams(_))
    ));
    let wrong = pure(&[1.0, 0.0], 1, 3);
    assert!(matches!(
        integrate_master(&model, &wrong, 1.0, 0.1, &[]),
        Err(MasterError::DimensionMismatch(_))
    ));

    let half = ComplexMatrix::identity(2).scale(re(0.25));
    assert!(HybridDensityState::new(vec![half.clone(), half.clone()]).is_ok());
    assert!(HybridDensityState::new(vec![half.clone(), half.scale(re(2.0))]).is_err());
    let negative = ComplexMatrix::diag_real(&[1.5, -0.5]);
    assert!(HybridDensityState::new(vec![negative, ComplexMatrix::zeros(2, 2)]).is_err());
    assert!(HybridObservable::new(vec![ComplexMatrix::from_rows(&[
        [re(0.0), re(1.0)],
        [re(0.0), re(0.0)]
    ])])
    .is_err());
}

#[test]
fn large_steps_trip_the_drift_monitor() {
    let model = detector(1.0, 50.0);
    let rho0 = pure(&[0.0, 1.0], 1, 2);
    let err = integrate_master(&model, &rho0, 1.0, 0.5, &[1.0]).unwrap_err();
    assert!(
        matches!(err, MasterError::TraceDriftExceeded { .. }),
        "{err}"
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn generators_are_adjoint(seed in any::<u64>(), n in 1usize..4, m in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng, n, m, 2.0);
        let rho = random_state(&mut rng, n, m);
        let a = random_observable(&mut rng, n, m);
        let lr = liouville_rhs(&model, rho.as_blocks(), 0.0).unwrap();
        let la = heisenberg_rhs(&model, a.as_blocks(), 0.0).unwrap();
        let pair = |x: &BlockDiagonal, y: &BlockDiagonal| -> Complex64 {
            x.blocks().iter().zip(y.blocks()).map(|(p, q)| trace_of_product(p, q)).sum()
        };
        let lhs = pair(a.as_blocks(), &lr);
        let rhs = pair(&la, rho.as_blocks());
        prop_assert!((lhs - rhs).norm() < 1e-12);
        prop_assert!(lr.total_trace().norm() < 1e-12);
    }
}
