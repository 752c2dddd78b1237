// Copyright 2026 The eeqt Authors
// SPDX-License-Identifier: Apache-2.0

use approx::assert_abs_diff_eq;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::linalg::{expm, ComplexVector, I};
use crate::master::{integrate_master, reduce_classical};
use crate::model::random::random_hermitian;
use crate::model::{build_model, builtin_model, BuiltinParams, CouplingFamily};

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

fn start(psi: &[f64]) -> PureHybridState {
    PureHybridState::new(ComplexVector::from_real(psi), s(1)).unwrap()
}

fn pure_density(psi: &[f64], alpha: usize, m: usize) -> HybridDensityState {
    let state = PureHybridState::new(ComplexVector::from_real(psi), s(alpha)).unwrap();
    HybridDensityState::from_pure(&state, m).unwrap()
}

#[test]
fn single_closed_trajectory_is_its_own_projector() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let h = random_hermitian(&mut rng, 3, 1.0);
    let model = build_model(3, 1, vec![h.clone().into()], CouplingFamily::new(1)).unwrap();
    let initial = PureHybridState::new(ComplexVector::basis(3, 0), s(1)).unwrap();
    let params = TrajectoryParams::fixed_dt(1e-2, 1.0).with_sample_times(vec![1.0]);
    let result = run_ensemble(&model, &initial, &params, 1, 7, 1).unwrap();
    let v = expm(&h.scale(-I)).unwrap().apply(&initial.psi);
    let expected = ComplexMatrix::outer(&v, &v);
    assert!(
        result.empirical_states[0].blocks()[0]
            .sub(&expected)
            .frobenius_norm()
            < 1e-12
    );
    assert!(result.events[0].is_empty());
}

#[test]
fn click_fraction_matches_binomial_band() {
    let model = detector(0.0, 1.0);
    let params = TrajectoryParams::fixed_dt(1e-3, 1.0).with_sample_times(vec![0.0, 1.0]);
    let result = run_ensemble(&model, &start(&[0.0, 1.0]), &params, 10_000, 42, 0).unwrap();
    let p2 = reduce_classical(&result.empirical_states[1])[1];
    assert!((p2 - (1.0 - (-1.0f64).exp())).abs() < 0.015, "p2 = {p2}");
    assert_eq!(result.occupation_counts[0], vec![10_000, 0]);
}

#[test]
fn results_do_not_depend_on_workers_or_reruns() {
    let model = detector(1.0, 1.0);
    let params = TrajectoryParams::fixed_dt(1e-2, 2.0).with_sample_times(vec![0.5, 1.0, 2.0]);
    let initial = start(&[1.0, 0.0]);
    let a = run_ensemble(&model, &initial, &params, 1000, 9, 1).unwrap();
    let b = run_ensemble(&model, &initial, &params, 1000, 9, 4).unwrap();
    let c = run_ensemble(&model, &initial, &params, 1000, 9, 1).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
    let d = run_ensemble(&model, &initial, &params, 1000, 10, 1).unwrap();
    assert_ne!(a, d);
}

#[test]
fn empirical_states_are_normalized_and_match_counts() {
    let model = builtin_model(
        "n-level-counter",
        &BuiltinParams {
            levels: 3,
            ..Default::default()
        },
    )
    .unwrap();
    let initial = PureHybridState::new(ComplexVector::basis(3, 0), s(1)).unwrap();
    let times: Vec<f64> = (0..=8).map(|k| 0.5 * k as f64).collect();
    let params = TrajectoryParams::norm_threshold(4.0).with_sample_times(times);
    let result = run_ensemble(&model, &initial, &params, 600, 3, 0).unwrap();
    for (k, rho) in result.empirical_states.iter().enumerate() {
        assert_abs_diff_eq!(rho.as_blocks().total_trace().re, 1.0, epsilon = 1e-12);
        assert_eq!(result.occupation_counts[k].iter().sum::<u64>(), 600);
        let direct = result.occupation_frequencies(k);
        for (p, q) in reduce_classical(rho).iter().zip(&direct) {
            assert_abs_diff_eq!(p, q, epsilon = 1e-12);
        }
    }
}

#[test]
fn trace_distance_examples() {
    let a = pure_density(&[1.0, 0.0], 1, 2);
    let b = pure_density(&[0.0, 1.0], 1, 2);
    let c = pure_density(&[1.0, 0.0], 2, 2);
    assert_eq!(trace_distance(&a, &a).unwrap(), 0.0);
    assert_abs_diff_eq!(trace_distance(&a, &b).unwrap(), 1.0, epsilon = 1e-14);
    assert_abs_diff_eq!(trace_distance(&a, &c).unwrap(), 1.0, epsilon = 1e-14);
    let plus = pure_density(&[0.5f64.sqrt(), 0.5f64.sqrt()], 1, 2);
    // Pure states: sqrt(1 - |<u,v>|^2).
    assert_abs_diff_eq!(
        trace_distance(&a, &plus).unwrap(),
        0.5f64.sqrt(),
        epsilon = 1e-12
    );
    assert!(trace_distance(&a, &pure_density(&[1.0, 0.0], 1, 3)).is_err());
}

#[test]
fn exponential_first_passage() {
    let model = detector(0.0, 2.0);
    let params = TrajectoryParams::fixed_dt(1e-3, 20.0).first_event_only();
    let n = 4000;
    let result = run_ensemble(&model, &start(&[0.0, 1.0]), &params, n, 5, 0).unwrap();
    let stats = event_statistics(&result, &model, 0.1);
    let click = stats.channel(s(1), s(2)).unwrap();
    assert_eq!(click.count, n);
    assert!((click.first_passage.mean - 0.5).abs() < 3.0 * 0.5 / (n as f64).sqrt());
    assert_eq!(stats.channel(s(2), s(1)).unwrap().count, 0);
    assert_eq!(click.histogram.counts.iter().sum::<u64>(), n as u64);
    let d = ks_one_sample(&result.first_event_times(), |t| 1.0 - (-2.0 * t).exp());
    assert!(d < ks_critical_1pct(n), "KS {d}");
}

#[test]
fn dark_state_never_clicks() {
    let model = detector(0.0, 1.0);
    let params = TrajectoryParams::fixed_dt(1e-2, 5.0).with_sample_times(vec![5.0]);
    let result = run_ensemble(&model, &start(&[1.0, 0.0]), &params, 200, 1, 0).unwrap();
    let stats = event_statistics(&result, &model, 0.5);
    assert!(stats.channels.iter().all(|c| c.count == 0));
    assert_eq!(stats.occupation, vec![(5.0, vec![1.0, 0.0])]);
}

#[test]
fn agrees_with_master_within_threshold() {
    let model = detector(1.0, 1.0);
    let times = vec![0.5, 1.0, 2.0];
    let params = TrajectoryParams::fixed_dt(1e-3, 2.0).with_sample_times(times.clone());
    let result = run_ensemble(&model, &start(&[1.0, 0.0]), &params, 4000, 11, 0).unwrap();
    let exact =
        integrate_master(&model, &pure_density(&[1.0, 0.0], 1, 2), 2.0, 1e-3, &times).unwrap();
    for (emp, (_, rho)) in result.empirical_states.iter().zip(&exact) {
        let d = trace_distance(emp, rho).unwrap();
        let threshold = comparison_threshold(emp, 4000, 1e-3);
        assert!(d <= threshold, "distance {d} above {threshold}");
    }
}

#[test]
fn threshold_vanishes_for_deterministic_pure_ensembles() {
    let rho = pure_density(&[1.0, 0.0], 1, 2);
    assert_abs_diff_eq!(comparison_threshold(&rho, 100, 0.0), 0.0, epsilon = 1e-12);
    let mixed = HybridDensityState::new(vec![
        ComplexMatrix::basis_projector(2, 0).scale(re(0.5)),
        ComplexMatrix::basis_projector(2, 1).scale(re(0.5)),
    ])
    .unwrap();
    // Each block: sqrt(2 * (0.5 - 0.25) / 100).
    let expected = THRESHOLD_SIGMAS * 0.5 * 2.0 * (0.5f64 / 100.0).sqrt();
    assert_abs_diff_eq!(
        comparison_threshold(&mixed, 100, 0.0),
        expected,
        epsilon = 1e-14
    );
}

#[test]
fn errors_carry_the_trajectory_index() {
    let model = detector(0.0, 100.0);
    let params = TrajectoryParams::fixed_dt(0.1, 1.0);
    match run_ensemble(&model, &start(&[0.0, 1.0]), &params, 3, 1, 1) {
        Err(EnsembleError::Trajectory {
            index: 0,
            source: PdpError::RateGuard { .. },
        }) => {}
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn invalid_requests() {
    let model = detector(1.0, 1.0);
    let params = TrajectoryParams::fixed_dt(1e-2, 1.0);
    assert!(matches!(
        run_ensemble(&model, &start(&[1.0, 0.0]), &params, 0, 1, 1),
        Err(EnsembleError::InvalidParams(_))
    ));
    let truncated = params.with_sample_times(vec![1.0]).first_event_only();
    assert!(matches!(
        run_ensemble(&model, &start(&[0.0, 1.0]), &truncated, 10, 1, 1),
        Err(EnsembleError::InvalidParams(_))
    ));
}
