// Copyright 2026 The eeqt Authors
// SPDX-License-Identifier: Apache-2.0

//! Norm-threshold scheme: draw `r`, integrate the unnormalized flow
//! `ψ' = K_α ψ`, and jump when `‖ψ‖²` first falls below `r`.
//!
//! The linear ODE is stepped with classical RK4. Within each breakpoint
//! interval the step is uniform and bounded by `‖K‖_F h ≤ c`, where
//! `c = min(0.1, (120 ode_tol)^(1/5))` makes the local RK4 remainder
//! `(‖K‖h)^5 / 120` at most `ode_tol`. A crossing inside a step is located
//! by bisection on a single RK4 step of variable length, down to `root_tol`
//! in time.

use serde::{Deserialize, Serialize};

use crate::linalg::{re, ComplexMatrix, ComplexVector};
use crate::model::{HybridModel, PureHybridState, Sector};

use super::PdpError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormThresholdOptions {
    pub ode_tol: f64,
    pub root_tol: f64,
}

impl Default for NormThresholdOptions {
    fn default() -> Self {
        Self {
            ode_tol: 1e-10,
            root_tol: 1e-10,
        }
    }
}

impl NormThresholdOptions {
    pub fn validate(&self) -> Result<(), PdpError> {
        if !(self.ode_tol > 0.0 && self.ode_tol.is_finite()) {
            return Err(PdpError::InvalidParams(format!(
                "ode_tol must be positive, got {}",
                self.ode_tol
            )));
        }
        if !(self.root_tol > 0.0 && self.root_tol.is_finite()) {
            return Err(PdpError::InvalidParams(format!(
                "root_tol must be positive, got {}",
                self.root_tol
            )));
        }
        Ok(())
    }

    /// Largest admissible `‖K‖_F h`.
    fn step_bound(&self) -> f64 {
        (120.0 * self.ode_tol).powf(0.2).min(0.1)
    }
}

/// Result of following the no-jump flow towards a stop time.
#[derive(Debug, Clone)]
pub(crate) enum Advance {
    /// `‖ψ‖²` fell below the threshold at `t`.
    Crossed { t: f64, psi: ComplexVector },
    /// Reached the stop time without crossing.
    Reached { psi: ComplexVector },
}

fn rk4_step(k: &ComplexMatrix, psi: &ComplexVector, h: f64) -> ComplexVector {
    let k1 = k.apply(psi);
    let k2 = k.apply(&psi.add_scaled(re(0.5 * h), &k1));
    let k3 = k.apply(&psi.add_scaled(re(0.5 * h), &k2));
    let k4 = k.apply(&psi.add_scaled(re(h), &k3));
    let incr = k1
        .add_scaled(re(2.0), &k2)
        .add_scaled(re(2.0), &k3)
        .add_scaled(re(1.0), &k4);
    psi.add_scaled(re(h / 6.0), &incr)
}

/// Integrates the unnormalized flow of sector `alpha` from `t0` to at most
/// `t_stop`, stopping early at the first time `‖ψ‖² < r`.
pub(crate) fn advance_until_threshold(
    model: &HybridModel,
    alpha: Sector,
    psi: &ComplexVector,
    t0: f64,
    t_stop: f64,
    r: f64,
    opts: &NormThresholdOptions,
) -> Result<Advance, PdpError> {
    let mut psi = psi.clone();
    let mut t = t0;
    while t < t_stop {
        let seg_end = model.next_breakpoint(t).min(t_stop);
        let k = model.effective_generator(alpha, t)?;
        let knorm = k.frobenius_norm();
        if knorm == 0.0 {
            t = seg_end;
            continue;
        }
        let span = seg_end - t;
        let steps = (span * knorm / opts.step_bound()).ceil().max(1.0);
        if steps > 1e12 {
            return Err(PdpError::IntegrationError(format!(
                "{steps:e} RK4 steps needed on [{t}, {seg_end}]"
            )));
        }
        let steps = steps as u64;
        let h = span / steps as f64;
        for j in 0..steps {
            let start = t + j as f64 * h;
            let next = rk4_step(k, &psi, h);
            if !next.is_finite() {
                return Err(PdpError::IntegrationError(format!(
                    "non-finite state at t = {start}"
                )));
            }
            if next.norm_sq() < r {
                let (lo_h, hi_h) = bisect(k, &psi, h, r, opts.root_tol);
                debug_assert!(lo_h < hi_h);
                return Ok(Advance::Crossed {
                    t: start + hi_h,
                    psi: rk4_step(k, &psi, hi_h),
                });
            }
            psi = next;
        }
        t = seg_end;
    }
    Ok(Advance::Reached { psi })
}

/// Shrinks `(0, h]` around the first sign change of `‖ψ(τ)‖² - r`.
fn bisect(k: &ComplexMatrix, psi: &ComplexVector, h: f64, r: f64, root_tol: f64) -> (f64, f64) {
    let (mut lo, mut hi) = (0.0, h);
    while hi - lo > root_tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if rk4_step(k, psi, mid).norm_sq() < r {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

/// Jump time for threshold `r ∈ (0, 1)` starting from `state` at `t0`.
///
/// Returns the crossing time and the unnormalized state there, or
/// `f64::INFINITY` together with the state at `t_end` when `‖ψ‖²` stays
/// above `r` up to `t_end`.
pub fn sample_jump_time_norm_method(
    state: &PureHybridState,
    model: &HybridModel,
    t0: f64,
    r: f64,
    opts: &NormThresholdOptions,
    t_end: f64,
) -> Result<(f64, ComplexVector), PdpError> {
    opts.validate()?;
    if !(r > 0.0 && r < 1.0) {
        return Err(PdpError::InvalidParams(format!(
            "threshold must lie in (0, 1), got {r}"
        )));
    }
    match advance_until_threshold(model, state.alpha, &state.psi, t0, t_end, r, opts)? {
        Advance::Crossed { t, psi } => Ok((t, psi)),
        Advance::Reached { psi } => Ok((f64::INFINITY, psi)),
    }
}
