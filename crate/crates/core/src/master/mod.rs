// Copyright 2026 The eeqt Authors
// SPDX-License-Identifier: Apache-2.0

//! Ensemble dynamics of the coupled system.
//!
//! States evolve by the Liouville equation in Lindblad form, sector by
//! sector:
//!
//! ```text
//! dρ_α/dt = -i[H_α, ρ_α] + Σ_β g_αβ ρ_β g_αβ* - ½{Λ_α, ρ_α}
//! ```
//!
//! and observables by the dual (Heisenberg) equation
//!
//! ```text
//! dA_α/dt = i[H_α, A_α] + Σ_β g_βα* A_β g_βα - ½{Λ_α, A_α}.
//! ```
//!
//! The gain term of sector α collects what flows in from every other
//! sector β through `g_αβ`; the loss term uses `Λ_α`, which collects what
//! flows out. The two pictures are exact adjoints, so
//! `<A(t)>_ρ(0) = <A(0)>_ρ(t)`; the tests check this to rounding.
//!
//! Integration is classical fixed-step RK4. Breakpoints of time-dependent
//! models and requested sample times are step boundaries. Each step is
//! followed by Hermitian symmetrization. The total trace is monitored but
//! never renormalized.

mod state;

pub use state::{
    BlockDiagonal, HybridDensityState, HybridObservable, HERMITIAN_TOL, POSITIVITY_TOL, TRACE_TOL,
};

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{re, ComplexMatrix, I};
use crate::model::{HybridModel, ModelError, Sector};

/// Largest tolerated drift of the total trace during integration.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-8;
/// Largest imaginary part tolerated in an expectation value.
const EXPECTATION_IMAG_TOL: f64 = 1e-10;
/// Slack when deciding whether a segment needs one more RK4 step.
const STEP_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MasterError {
    #[error("total trace drifted by {drift:e} at t = {t}")]
    TraceDriftExceeded { t: f64, drift: f64 },
    #[error("block {sector} has eigenvalue {min_eigenvalue:e} at t = {t}")]
    InvariantViolation {
        t: f64,
        sector: Sector,
        min_eigenvalue: f64,
    },
    #[error("invalid hybrid state: {0}")]
    InvalidState(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("expectation value has imaginary part {imag:e}")]
    NonRealExpectation { imag: f64 },
    #[error("invalid integration parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn check_model_shape(model: &HybridModel, x: &BlockDiagonal) -> Result<(), MasterError> {
    if x.n() != model.n() || x.m() != model.m() {
        return Err(MasterError::DimensionMismatch(format!(
            "operator has {} blocks of size {}, model has m = {}, n = {}",
            x.m(),
            x.n(),
            model.m(),
            model.n()
        )));
    }
    Ok(())
}

/// `XY + YX` and `XY - YX` share both products.
fn products(x: &ComplexMatrix, y: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    (x.matmul(y), y.matmul(x))
}

/// Right-hand side of the Liouville equation at time `t`.
pub fn liouville_rhs(
    model: &HybridModel,
    rho: &BlockDiagonal,
    t: f64,
) -> Result<BlockDiagonal, MasterError> {
    check_model_shape(model, rho)?;
    Ok(liouville_rhs_epoch(model, model.epoch_index(t), rho))
}

fn liouville_rhs_epoch(model: &HybridModel, epoch: usize, rho: &BlockDiagonal) -> BlockDiagonal {
    let e = model.epoch(epoch);
    let m = model.m();
    let blocks = (0..m)
        .map(|alpha| {
            let r = &rho.blocks()[alpha];
            let (hr, rh) = products(&e.hamiltonians[alpha], r);
            let (lr, rl) = products(&e.lambdas[alpha], r);
            // -i[H, ρ] - ½{Λ, ρ}
            let mut d = hr.sub(&rh).scale(-I);
            d.add_scaled_assign(re(-0.5), &lr.add(&rl));
            // Σ_β g_αβ ρ_β g_αβ*
            for beta in 0..m {
                if let Some(g) = &e.couplings[alpha * m + beta] {
                    let gain = g.matmul(&rho.blocks()[beta]).matmul(&g.adjoint());
                    d.add_scaled_assign(re(1.0), &gain);
                }
            }
            d
        })
        .collect();
    BlockDiagonal::new(blocks).expect("shape preserved")
}

/// Right-hand side of the Heisenberg equation at time `t`.
pub fn heisenberg_rhs(
    model: &HybridModel,
    a: &BlockDiagonal,
    t: f64,
) -> Result<BlockDiagonal, MasterError> {
    check_model_shape(model, a)?;
    Ok(heisenberg_rhs_epoch(model, model.epoch_index(t), a))
}

fn heisenberg_rhs_epoch(model: &HybridModel, epoch: usize, a: &BlockDiagonal) -> BlockDiagonal {
    let e = model.epoch(epoch);
    let m = model.m();
    let blocks = (0..m)
        .map(|alpha| {
            let x = &a.blocks()[alpha];
            let (hx, xh) = products(&e.hamiltonians[alpha], x);
            let (lx, xl) = products(&e.lambdas[alpha], x);
            // i[H, A] - ½{Λ, A}
            let mut d = hx.sub(&xh).scale(I);
            d.add_scaled_assign(re(-0.5), &lx.add(&xl));
            // Σ_β g_βα* A_β g_βα
            for beta in 0..m {
                if let Some(g) = &e.couplings[beta * m + alpha] {
                    let gain = g.adjoint().matmul(&a.blocks()[beta]).matmul(g);
                    d.add_scaled_assign(re(1.0), &gain);
                }
            }
            d
        })
        .collect();
    BlockDiagonal::new(blocks).expect("shape preserved")
}

fn rk4(x: &BlockDiagonal, h: f64, f: impl Fn(&BlockDiagonal) -> BlockDiagonal) -> BlockDiagonal {
    let k1 = f(x);
    let k2 = f(&x.add_scaled(0.5 * h, &k1));
    let k3 = f(&x.add_scaled(0.5 * h, &k2));
    let k4 = f(&x.add_scaled(h, &k3));
    let incr = k1
        .add_scaled(2.0, &k2)
        .add_scaled(2.0, &k3)
        .add_scaled(1.0, &k4);
    x.add_scaled(h / 6.0, &incr)
}

fn check_step(dt: f64) -> Result<(), MasterError> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(MasterError::InvalidParams(format!(
            "dt must be positive, got {dt}"
        )))
    }
}

fn steps_for(span: f64, dt: f64) -> u64 {
    ((span / dt) - STEP_SLACK).ceil().max(1.0) as u64
}

/// Segment boundaries of `[0, t_end]`: breakpoints strictly inside and the
/// given extra stops.
fn segment_stops(model: &HybridModel, t_end: f64, extra: &[f64]) -> Vec<f64> {
    let mut stops: Vec<f64> = model
        .breakpoints()
        .iter()
        .copied()
        .filter(|&b| b > 0.0 && b < t_end)
        .chain(extra.iter().copied().filter(|&s| s > 0.0 && s < t_end))
        .chain(std::iter::once(t_end))
        .collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    stops
}

/// Integrates the Liouville equation from `ρ(0) = rho0` and returns the
/// state at each of `sample_times` (ascending, within `[0, t_end]`).
///
/// Every returned state is re-validated; a negative eigenvalue below
/// `-POSITIVITY_TOL` is an `InvariantViolation`. The total trace is
/// checked after every step against `TRACE_DRIFT_LIMIT`.
pub fn integrate_master(
    model: &HybridModel,
    rho0: &HybridDensityState,
    t_end: f64,
    dt: f64,
    sample_times: &[f64],
) -> Result<Vec<(f64, HybridDensityState)>, MasterError> {
    check_step(dt)?;
    check_model_shape(model, rho0.as_blocks())?;
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(MasterError::InvalidParams(format!(
            "t_end must be finite and >= 0, got {t_end}"
        )));
    }
    if sample_times.iter().any(|&s| !(0.0..=t_end).contains(&s)) {
        return Err(MasterError::InvalidParams(
            "sample times must lie in [0, t_end]".into(),
        ));
    }
    if sample_times.windows(2).any(|w| w[0] > w[1]) {
        return Err(MasterError::InvalidParams(
            "sample times must be ascending".into(),
        ));
    }

    let trace0 = rho0.as_blocks().total_trace().re;
    let mut out = Vec::with_capacity(sample_times.len());
    let mut next_sample = 0;
    let mut rho = rho0.as_blocks().clone();
    let mut t = 0.0;

    emit_samples(0.0, &rho, sample_times, &mut next_sample, &mut out)?;
    if t_end == 0.0 {
        return Ok(out);
    }

    for stop in segment_stops(model, t_end, sample_times) {
        let epoch = model.epoch_index(t);
        let span = stop - t;
        let n = steps_for(span, dt);
        let h = span / n as f64;
        for j in 0..n {
            rho = rk4(&rho, h, |x| liouville_rhs_epoch(model, epoch, x)).hermitian_part();
            let drift = (rho.total_trace().re - trace0).abs();
            if drift > TRACE_DRIFT_LIMIT || !drift.is_finite() {
                return Err(MasterError::TraceDriftExceeded {
                    t: t + (j + 1) as f64 * h,
                    drift,
                });
            }
        }
        t = stop;
        emit_samples(t, &rho, sample_times, &mut next_sample, &mut out)?;
    }
    Ok(out)
}

/// Records every pending sample time `<= t` with the current state.
fn emit_samples(
    t: f64,
    rho: &BlockDiagonal,
    sample_times: &[f64],
    next: &mut usize,
    out: &mut Vec<(f64, HybridDensityState)>,
) -> Result<(), MasterError> {
    while let Some(&s) = sample_times.get(*next).filter(|&&s| s <= t) {
        // Trace and Hermiticity are maintained by the integrator, so only
        // positivity can fail here.
        let (sector, min_eigenvalue) = rho.min_eigenvalue();
        if min_eigenvalue < -POSITIVITY_TOL {
            return Err(MasterError::InvariantViolation {
                t,
                sector,
                min_eigenvalue,
            });
        }
        out.push((s, HybridDensityState::from_blocks(rho.clone())?));
        *next += 1;
    }
    Ok(())
}

/// Evolves an observable in the Heisenberg picture over `[0, t]`.
///
/// For time-dependent models the generators are applied in reverse time
/// order, so that `<A(t)>_ρ(0) = <A>_ρ(t)` holds for the same schedule.
/// The step grid matches [`integrate_master`] on the same interval.
pub fn integrate_heisenberg(
    model: &HybridModel,
    a0: &HybridObservable,
    t: f64,
    dt: f64,
) -> Result<HybridObservable, MasterError> {
    check_step(dt)?;
    check_model_shape(model, a0.as_blocks())?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(MasterError::InvalidParams(format!(
            "t must be finite and >= 0, got {t}"
        )));
    }
    let mut a = a0.as_blocks().clone();
    if t == 0.0 {
        return Ok(a0.clone());
    }
    let stops = segment_stops(model, t, &[]);
    let starts: Vec<f64> = std::iter::once(0.0).chain(stops.iter().copied()).collect();
    for (&start, &stop) in starts.iter().zip(&stops).rev() {
        let epoch = model.epoch_index(start);
        let span = stop - start;
        let n = steps_for(span, dt);
        let h = span / n as f64;
        for _ in 0..n {
            a = rk4(&a, h, |x| heisenberg_rhs_epoch(model, epoch, x)).hermitian_part();
        }
    }
    HybridObservable::from_blocks(a)
}

/// `<A>_ρ = Σ_α Tr(A_α ρ_α)`.
pub fn expectation(a: &HybridObservable, rho: &HybridDensityState) -> Result<f64, MasterError> {
    if !a.as_blocks().same_shape(rho.as_blocks()) {
        return Err(MasterError::DimensionMismatch(format!(
            "observable ({} blocks of {}) vs state ({} blocks of {})",
            a.as_blocks().m(),
            a.as_blocks().n(),
            rho.m(),
            rho.n()
        )));
    }
    let value: Complex64 = a
        .blocks()
        .iter()
        .zip(rho.blocks())
        .map(|(x, r)| trace_of_product(x, r))
        .sum();
    if value.im.abs() > EXPECTATION_IMAG_TOL {
        return Err(MasterError::NonRealExpectation { imag: value.im });
    }
    Ok(value.re)
}

/// `Tr(XY)` without forming the product.
fn trace_of_product(x: &ComplexMatrix, y: &ComplexMatrix) -> Complex64 {
    let n = x.rows();
    (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| x[(i, j)] * y[(j, i)])
        .sum()
}

/// Effective quantum state `Σ_α ρ_α`.
pub fn reduce_quantum(rho: &HybridDensityState) -> ComplexMatrix {
    rho.blocks()
        .iter()
        .skip(1)
        .fold(rho.blocks()[0].clone(), |acc, b| acc.add(b))
}

/// Classical occupation probabilities `p_α = Tr ρ_α`.
pub fn reduce_classical(rho: &HybridDensityState) -> Vec<f64> {
    rho.blocks().iter().map(|b| b.trace().re).collect()
}

#[cfg(test)]
mod tests;
