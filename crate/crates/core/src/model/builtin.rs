// Copyright 2026 The eeqt Authors
// SPDX-License-Identifier: Apache-2.0

//! Ready-made models.
//!
//! * `qubit-detector`: a driven qubit watched by a yes/no counter. Both
//!   sectors carry `H = (Ω/2) σx`; the only coupling is
//!   `g_21 = √κ |1><1|`, so the counter clicks (1 → 2) at a rate given by
//!   the population of `|1>` and then stays clicked.
//! * `feedback-switch`: as `qubit-detector`, but the clicked sector runs
//!   `H_2 = (Ω'/2) σx`. The Hamiltonian depends on the recorder state, so
//!   the record feeds back on the quantum dynamics.
//! * `n-level-counter`: an `n`-level system with nearest-neighbour drive
//!   `H = (Ω/2) Σ_k (|k><k+1| + |k+1><k|)` in every sector and a chain of
//!   `n + 1` counter states; `g_{α+1,α} = √κ |α><α|`, where `|α>` is the
//!   α-th basis vector (1-based). Counter state α therefore advances when
//!   the system is found in level α.

use serde::{Deserialize, Serialize};

use crate::linalg::{pauli, re, ComplexMatrix};

use super::{build_model, CouplingFamily, HybridModel, ModelError, Sector};

pub const BUILTIN_NAMES: [&str; 3] = ["qubit-detector", "feedback-switch", "n-level-counter"];

/// Parameters of the built-in models; unused ones are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BuiltinParams {
    /// Rabi frequency Ω.
    pub omega: f64,
    /// Detection rate κ.
    pub kappa: f64,
    /// Drive Ω' in the clicked sector of `feedback-switch`.
    pub omega_prime: f64,
    /// Quantum dimension of `n-level-counter`.
    pub levels: usize,
}

impl Default for BuiltinParams {
    fn default() -> Self {
        Self {
            omega: 1.0,
            kappa: 1.0,
            omega_prime: 0.0,
            levels: 2,
        }
    }
}

pub fn builtin_model(name: &str, params: &BuiltinParams) -> Result<HybridModel, ModelError> {
    check_finite("omega", params.omega)?;
    check_finite("omega_prime", params.omega_prime)?;
    check_finite("kappa", params.kappa)?;
    if params.kappa < 0.0 {
        return Err(ModelError::InvalidParameter {
            name: "kappa",
            reason: format!("must be non-negative, got {}", params.kappa),
        });
    }
    let sqrt_kappa = params.kappa.sqrt();
    match name {
        "qubit-detector" | "feedback-switch" => {
            let h1 = pauli::x().scale(re(params.omega / 2.0));
            let h2 = if name == "qubit-detector" {
                h1.clone()
            } else {
                pauli::x().scale(re(params.omega_prime / 2.0))
            };
            let g = ComplexMatrix::basis_projector(2, 1).scale(re(sqrt_kappa));
            build_model(
                2,
                2,
                vec![h1.into(), h2.into()],
                CouplingFamily::new(2).with(Sector::new(2), Sector::new(1), g),
            )?
            .with_labels(vec!["ready".into(), "clicked".into()])
        }
        "n-level-counter" => {
            let n = params.levels;
            if n == 0 {
                return Err(ModelError::InvalidParameter {
                    name: "levels",
                    reason: "must be at least 1".into(),
                });
            }
            let m = n + 1;
            let mut h = ComplexMatrix::zeros(n, n);
            for k in 0..n.saturating_sub(1) {
                h[(k, k + 1)] = re(params.omega / 2.0);
                h[(k + 1, k)] = re(params.omega / 2.0);
            }
            let mut couplings = CouplingFamily::new(m);
            for level in 0..n {
                couplings.set(
                    Sector::from_index(level + 1),
                    Sector::from_index(level),
                    ComplexMatrix::basis_projector(n, level).scale(re(sqrt_kappa)),
                );
            }
            build_model(n, m, vec![h.into(); m], couplings)?
                .with_labels((0..m).map(|c| format!("count {c}")).collect())
        }
        other => Err(ModelError::UnknownBuiltin(other.to_string())),
    }
}

fn check_finite(name: &'static str, value: f64) -> Result<(), ModelError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            name,
            reason: format!("must be finite, got {value}"),
        })
    }
}
