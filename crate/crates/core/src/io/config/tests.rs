// Copyright 2026 The eeqt Authors
// SPDX-License-Identifier: Apache-2.0

use super::*;
use crate::linalg::{pauli, re};

const MINIMAL: &str = r#"
[model]
builtin = "qubit-detector"
parameters = { omega = 1.0, kappa = 1.0 }

[initial]
psi = [[1.0, 0.0], [0.0, 0.0]]
alpha = 1

[run]
scheme = "fixed-dt"
dt = 1e-3
t_end = 2.0
sample_times = [0.5, 1.0, 2.0]
n_trajectories = 100
master_seed = 7
"#;

const EXPLICIT: &str = r#"
[model]
n = 2
m = 2
labels = ["ready", "clicked"]

[[model.hamiltonians]]
alpha = 1
matrix = [[[0.0, 0.0], [0.5, 0.0]], [[0.5, 0.0], [0.0, 0.0]]]

[[model.hamiltonians]]
alpha = 2
matrix = [[[0.0, 0.0], [0.5, 0.0]], [[0.5, 0.0], [0.0, 0.0]]]

[[model.couplings]]
from = 1
to = 2
matrix = [[[0.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]

[initial]
psi = [[1.0, 0.0], [0.0, 0.0]]
alpha = 1

[run]
scheme = "norm-threshold"
t_end = 1.0
"#;

fn s(label: usize) -> Sector {
    Sector::new(label)
}

fn schema_path(err: ConfigError) -> String {
    match err {
        ConfigError::Schema { path, .. } => path,
        other => panic!("expected a schema error, got {other}"),
    }
}

#[test]
fn minimal_builtin_matches_library_model() {
    let spec = parse_config(MINIMAL).unwrap();
    let reference = builtin_model("qubit-detector", &BuiltinParams::default()).unwrap();
    for a in 1..=2 {
        assert_eq!(
            spec.model.hamiltonian(s(a), 0.0).unwrap(),
            reference.hamiltonian(s(a), 0.0).unwrap()
        );
    }
    assert_eq!(
        spec.model.coupling(s(2), s(1), 0.0).unwrap(),
        reference.coupling(s(2), s(1), 0.0).unwrap()
    );
    assert_eq!(spec.run.scheme, Scheme::FixedDt { dt: 1e-3 });
    assert_eq!(spec.run.sample_times, vec![0.5, 1.0, 2.0]);
    assert_eq!(spec.run.n_trajectories, 100);
    assert_eq!(spec.run.master_seed, 7);
    assert_eq!(spec.initial.alpha, s(1));
}

#[test]
fn explicit_model_reproduces_the_detector() {
    let spec = parse_config(EXPLICIT).unwrap();
    let reference = builtin_model("qubit-detector", &BuiltinParams::default()).unwrap();
    assert_eq!(spec.model.labels(), reference.labels());
    assert_eq!(
        spec.model.hamiltonian(s(1), 0.0).unwrap(),
        &pauli::x().scale(re(0.5))
    );
    assert_eq!(
        spec.model.lambda_operator(s(1), 0.0).unwrap(),
        reference.lambda_operator(s(1), 0.0).unwrap()
    );
    assert!(spec.model.coupling(s(1), s(2), 0.0).unwrap().is_none());
    assert_eq!(spec.run.sample_times, vec![1.0]);
    assert!(matches!(spec.run.scheme, Scheme::NormThreshold(_)));
}

#[test]
fn diagonal_coupling_is_located() {
    let text = EXPLICIT.replace("from = 1\nto = 2", "from = 1\nto = 1");
    match parse_config(&text).unwrap_err() {
        ConfigError::Model { path, source } => {
            assert_eq!(path, "model.couplings[0]");
            assert_eq!(source, ModelError::NonzeroDiagonalCoupling { alpha: s(1) });
        }
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn missing_t_end_names_the_field() {
    let text = MINIMAL.replace("t_end = 2.0\n", "");
    let err = parse_config(&text).unwrap_err();
    assert!(err.to_string().contains("run.t_end"), "{err}");
    assert_eq!(schema_path(err), "run.t_end");
}

#[test]
fn syntax_errors_carry_the_line() {
    let text = MINIMAL.replace("dt = 1e-3", "dt = = 1e-3");
    match parse_config(&text).unwrap_err() {
        ConfigError::Syntax { line, .. } => assert_eq!(line, 12),
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn schema_violations_carry_paths() {
    let wrong_type = MINIMAL.replace("dt = 1e-3", "dt = \"fast\"");
    assert_eq!(
        schema_path(parse_config(&wrong_type).unwrap_err()),
        "run.dt"
    );
    let unknown = MINIMAL.replace("master_seed = 7", "master_seed = 7\nseeed = 3");
    assert_eq!(
        schema_path(parse_config(&unknown).unwrap_err()),
        "run.seeed"
    );
    let bad_param = MINIMAL.replace("kappa = 1.0", "kapa = 1.0");
    assert_eq!(
        schema_path(parse_config(&bad_param).unwrap_err()),
        "model.parameters.kapa"
    );
    let no_dt = MINIMAL.replace("dt = 1e-3\n", "");
    assert_eq!(schema_path(parse_config(&no_dt).unwrap_err()), "run.dt");
    let late_sample = MINIMAL.replace("2.0]", "3.0]");
    assert_eq!(
        schema_path(parse_config(&late_sample).unwrap_err()),
        "run.sample_times[2]"
    );
    let bad_alpha = MINIMAL.replace("alpha = 1", "alpha = 3");
    assert_eq!(
        schema_path(parse_config(&bad_alpha).unwrap_err()),
        "initial.alpha"
    );
    let short_psi = MINIMAL.replace("psi = [[1.0, 0.0], [0.0, 0.0]]", "psi = [[1.0, 0.0]]");
    assert_eq!(
        schema_path(parse_config(&short_psi).unwrap_err()),
        "initial.psi"
    );
    let ragged = EXPLICIT.replacen(
        "[[0.0, 0.0], [0.5, 0.0]], [[0.5, 0.0], [0.0, 0.0]]",
        "[[0.0, 0.0]]",
        1,
    );
    assert_eq!(
        schema_path(parse_config(&ragged).unwrap_err()),
        "model.hamiltonians[0].matrix"
    );
    let mixed = MINIMAL.replace(
        "builtin = \"qubit-detector\"",
        "builtin = \"qubit-detector\"\nn = 2",
    );
    assert_eq!(schema_path(parse_config(&mixed).unwrap_err()), "model.n");
}

#[test]
fn non_hermitian_hamiltonian_is_located() {
    let text = EXPLICIT.replacen(
        "[[0.0, 0.0], [0.5, 0.0]], [[0.5, 0.0], [0.0, 0.0]]",
        "[[0.0, 0.0], [0.5, 0.0]], [[0.0, 0.0], [0.0, 0.0]]",
        2,
    );
    match parse_config(&text).unwrap_err() {
        ConfigError::Model { path, source } => {
            assert_eq!(path, "model.hamiltonians[0]");
            assert!(matches!(source, ModelError::NonHermitianHamiltonian { .. }));
        }
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn unknown_builtin_is_located() {
    let text = MINIMAL.replace("qubit-detector", "qubit-detektor");
    match parse_config(&text).unwrap_err() {
        ConfigError::Model { path, .. } => assert_eq!(path, "model.builtin"),
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn initial_state_is_normalized() {
    let text = MINIMAL.replace(
        "psi = [[1.0, 0.0], [0.0, 0.0]]",
        "psi = [[3.0, 0.0], [0.0, 4.0]]",
    );
    let spec = parse_config(&text).unwrap();
    assert!((spec.initial.psi[0].re - 0.6).abs() < 1e-15);
    assert!((spec.initial.psi[1].im - 0.8).abs() < 1e-15);
    let zero = MINIMAL.replace(
        "psi = [[1.0, 0.0], [0.0, 0.0]]",
        "psi = [[0.0, 0.0], [0.0, 0.0]]",
    );
    assert!(matches!(
        parse_config(&zero).unwrap_err(),
        ConfigError::Model { .. }
    ));
}

#[test]
fn piecewise_entries() {
    let text = EXPLICIT.replacen(
        "alpha = 1\nmatrix = [[[0.0, 0.0], [0.5, 0.0]], [[0.5, 0.0], [0.0, 0.0]]]",
        "alpha = 1\nbreakpoints = [0.5]\nvalues = [[[[0.0, 0.0], [0.5, 0.0]], [[0.5, 0.0], [0.0, 0.0]]], [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-1.0, 0.0]]]]",
        1,
    );
    let spec = parse_config(&text).unwrap();
    assert_eq!(spec.model.breakpoints(), &[0.5]);
    assert_eq!(spec.model.hamiltonian(s(1), 0.7).unwrap(), &pauli::z());
    let both = EXPLICIT.replacen("alpha = 1\n", "alpha = 1\nbreakpoints = [0.5]\n", 1);
    assert_eq!(
        schema_path(parse_config(&both).unwrap_err()),
        "model.hamiltonians[0]"
    );
}

#[test]
fn toml_round_trip() {
    for text in [MINIMAL, EXPLICIT] {
        let spec = parse_config(text).unwrap();
        let again = parse_config(&spec.to_toml()).unwrap();
        assert_eq!(again.raw, spec.raw);
        assert_eq!(again.run, spec.run);
        assert_eq!(again.initial, spec.initial);
    }
}

#[test]
fn overrides_revalidate() {
    let spec = parse_config(MINIMAL).unwrap();
    let changed = spec
        .with_overrides(Some(99), Some(SchemeName::NormThreshold))
        .unwrap();
    assert_eq!(changed.run.master_seed, 99);
    assert!(matches!(changed.run.scheme, Scheme::NormThreshold(_)));
    assert!(changed.to_toml().contains("norm-threshold"));
    let explicit = parse_config(EXPLICIT).unwrap();
    let err = explicit
        .with_overrides(None, Some(SchemeName::FixedDt))
        .unwrap_err();
    assert_eq!(schema_path(err), "run.dt");
    assert!(spec.with_overrides(Some(u64::MAX), None).is_err());
}
