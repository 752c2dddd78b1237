// Copyright 2026 The eeqt Authors
// SPDX-License-Identifier: Apache-2.0

//! Thinning scheme: one Bernoulli trial with success probability `λ dt` per
//! step of length `dt`.

use std::sync::atomic::{AtomicBool, Ordering};

use rand::Rng;

use crate::linalg::{expm, expm_apply, re, ComplexMatrix, ComplexVector};
use crate::model::{EventRecord, HybridModel, PureHybridState, Sector};

use super::PdpError;

/// `λ dt` above this aborts the run.
pub const RATE_DT_ERROR: f64 = 0.5;
/// `λ dt` above this logs a warning (once per process).
pub const RATE_DT_WARN: f64 = 0.1;

/// Squared norms below this cannot be renormalized meaningfully.
const DEAD_NORM_SQ: f64 = 1e-300;

static RATE_WARNED: AtomicBool = AtomicBool::new(false);

/// Deterministic no-jump evolution over `dt`: `exp(K_α(t0) dt) ψ`,
/// renormalized. The generator is frozen at its value at `t0`.
pub fn evolve_no_jump(
    state: &PureHybridState,
    model: &HybridModel,
    t0: f64,
    dt: f64,
) -> Result<PureHybridState, PdpError> {
    if dt.is_nan() || dt < 0.0 {
        return Err(PdpError::InvalidParams(format!(
            "dt must be >= 0, got {dt}"
        )));
    }
    let k = model.effective_generator(state.alpha, t0)?;
    let psi = expm_apply(k, &state.psi, dt)?;
    renormalize(psi, state.alpha, t0 + dt)
}

fn renormalize(psi: ComplexVector, alpha: Sector, t: f64) -> Result<PureHybridState, PdpError> {
    let norm_sq = psi.norm_sq();
    if !norm_sq.is_finite() || norm_sq < DEAD_NORM_SQ {
        return Err(PdpError::DeadBranch { t, norm_sq });
    }
    Ok(PureHybridState {
        psi: psi.scale(re(1.0 / norm_sq.sqrt())),
        alpha,
    })
}

/// One step of the fixed-dt scheme.
///
/// Draws `r` uniformly from `[0, 1)` and jumps when `r < λ(ψ, α) dt`, with
/// `λ` evaluated at the step start `t`. On a jump a second uniform draw
/// selects the destination and the state becomes `g_βα ψ / ‖g_βα ψ‖`.
/// Otherwise `ψ` flows deterministically for `dt`. Either way the returned
/// state belongs to time `t + dt`, and an event is stamped `t + dt`: the
/// trial covers `(t, t + dt]`. The draw order is fixed, so a seed
/// reproduces a run bit for bit.
pub fn step_fixed_dt<R: Rng + ?Sized>(
    state: &PureHybridState,
    model: &HybridModel,
    t: f64,
    dt: f64,
    rng: &mut R,
) -> Result<(PureHybridState, Option<EventRecord>), PdpError> {
    step_with(state, model, t, dt, rng, |psi| {
        let k = model.effective_generator(state.alpha, t)?;
        Ok(expm_apply(k, psi, dt)?)
    })
}

pub(crate) fn step_with<R: Rng + ?Sized>(
    state: &PureHybridState,
    model: &HybridModel,
    t: f64,
    dt: f64,
    rng: &mut R,
    flow: impl FnOnce(&ComplexVector) -> Result<ComplexVector, PdpError>,
) -> Result<(PureHybridState, Option<EventRecord>), PdpError> {
    let rate = model.jump_rate(&state.psi, state.alpha, t)?;
    let rate_dt = rate * dt;
    if rate_dt > RATE_DT_ERROR {
        return Err(PdpError::RateGuard { t, rate_dt });
    }
    if rate_dt > RATE_DT_WARN && !RATE_WARNED.swap(true, Ordering::Relaxed) {
        log::warn!("jump probability per step {rate_dt:.3} exceeds {RATE_DT_WARN}; reduce dt");
    }

    let r: f64 = rng.random();
    if r < rate_dt {
        let (next, mut event) = jump(state, model, t, rng)?;
        event.time = t + dt;
        return Ok((next, Some(event)));
    }
    let psi = flow(&state.psi)?;
    Ok((renormalize(psi, state.alpha, t + dt)?, None))
}

/// Draws a destination and applies the corresponding coupling. `psi` must
/// be a unit vector.
pub(crate) fn jump<R: Rng + ?Sized>(
    state: &PureHybridState,
    model: &HybridModel,
    t: f64,
    rng: &mut R,
) -> Result<(PureHybridState, EventRecord), PdpError> {
    let probs = model.jump_probabilities(&state.psi, state.alpha, t)?;
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut dest = None;
    for (b, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        dest = Some(b);
        acc += p;
        if u < acc {
            break;
        }
    }
    let to = Sector::from_index(dest.expect("jump_probabilities has positive mass"));
    let g = model
        .coupling(to, state.alpha, t)?
        .expect("positive probability implies a coupling");
    let landed = g.apply(&state.psi);
    let norm_sq = landed.norm_sq();
    if norm_sq.is_nan() || norm_sq <= 0.0 {
        return Err(PdpError::ZeroJumpAmplitude {
            t,
            from: state.alpha,
            to,
        });
    }
    let next = PureHybridState {
        psi: landed.scale(re(1.0 / norm_sq.sqrt())),
        alpha: to,
    };
    Ok((next, EventRecord::new(t, state.alpha, to)))
}

/// `exp(K_α dt)` for every breakpoint interval and sector.
pub(crate) struct PropagatorTable {
    m: usize,
    matrices: Vec<ComplexMatrix>,
}

impl PropagatorTable {
    pub fn new(model: &HybridModel, dt: f64) -> Result<Self, PdpError> {
        let epochs = model.breakpoints().len() + 1;
        let mut matrices = Vec::with_capacity(epochs * model.m());
        for e in 0..epochs {
            for k in &model.epoch(e).generators {
                matrices.push(expm(&k.scale(re(dt)))?);
            }
        }
        Ok(Self {
            m: model.m(),
            matrices,
        })
    }

    pub fn get(&self, epoch: usize, alpha: Sector) -> &ComplexMatrix {
        &self.matrices[epoch * self.m + alpha.index()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli, Complex64, I};
    use crate::model::{build_model, builtin_model, BuiltinParams, CouplingFamily};

    /// Always yields zero, so every uniform draw is 0.
    struct ZeroRng;

    impl rand::RngCore for ZeroRng {
        fn next_u32(&mut self) -> u32 {
            0
        }
        fn next_u64(&mut self) -> u64 {
            0
        }
        fn fill_bytes(&mut self, dst: &mut [u8]) {
            dst.fill(0);
        }
    }
    use std::f64::consts::FRAC_PI_2;

    fn detector(omega: f64, kappa: f64) -> HybridModel {
        let params = BuiltinParams {
            omega,
            kappa,
            ..Default::default()
        };
        builtin_model("qubit-detector", &params).unwrap()
    }

    #[test]
    fn closed_form_rotation() {
        let model = build_model(2, 1, vec![pauli::x().into()], CouplingFamily::new(1)).unwrap();
        let s = PureHybridState::new(ComplexVector::basis(2, 0), Sector::new(1)).unwrap();
        let out = evolve_no_jump(&s, &model, 0.0, FRAC_PI_2).unwrap();
        assert!((out.psi[0]).norm() < 1e-15);
        assert!((out.psi[1] + I).norm() < 1e-15);
        assert!((out.psi.norm_sq() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dark_state_is_fixed() {
        let model = detector(0.0, 1.0);
        let s = PureHybridState::new(ComplexVector::basis(2, 0), Sector::new(1)).unwrap();
        for dt in [0.0, 0.1, 10.0] {
            assert_eq!(evolve_no_jump(&s, &model, 0.0, dt).unwrap(), s);
        }
    }

    #[test]
    fn conditional_decay_of_excited_amplitude() {
        // K_1 = -κ/2 |1><1|, so (a, b) -> (a, b e^{-κ dt/2}) before renormalizing.
        let kappa = 1.3;
        let dt = 0.7;
        let model = detector(0.0, kappa);
        let (a, b) = (Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8));
        let s = PureHybridState::new(ComplexVector::from(vec![a, b]), Sector::new(1)).unwrap();
        let out = evolve_no_jump(&s, &model, 0.0, dt).unwrap();
        let damped = b * (-kappa * dt / 2.0).exp();
        let norm = (a.norm_sqr() + damped.norm_sqr()).sqrt();
        assert!((out.psi[0] - a / norm).norm() < 1e-14);
        assert!((out.psi[1] - damped / norm).norm() < 1e-14);
    }

    #[test]
    fn dead_branch_detected() {
        let model = detector(0.0, 1.0);
        let s = PureHybridState::new(ComplexVector::basis(2, 1), Sector::new(1)).unwrap();
        assert!(matches!(
            evolve_no_jump(&s, &model, 0.0, 2000.0),
            Err(PdpError::DeadBranch { .. })
        ));
        assert!(evolve_no_jump(&s, &model, 0.0, -1.0).is_err());
    }

    #[test]
    fn forced_jump_projects_onto_detector_support() {
        let model = detector(0.0, 1.0);
        let s = PureHybridState::new(ComplexVector::basis(2, 1), Sector::new(1)).unwrap();
        // An all-zero generator yields r = 0 < λ dt.
        let mut rng = ZeroRng;
        let (next, event) = step_fixed_dt(&s, &model, 0.25, 1e-3, &mut rng).unwrap();
        let event = event.expect("forced jump");
        assert_eq!((event.from, event.to), (Sector::new(1), Sector::new(2)));
        assert_eq!(event.time, 0.25 + 1e-3);
        assert_eq!(next.alpha, Sector::new(2));
        assert_eq!(next.psi, ComplexVector::basis(2, 1));
    }

    #[test]
    fn dark_sector_never_jumps() {
        let model = detector(1.0, 1.0);
        let mut s = PureHybridState::new(ComplexVector::basis(2, 1), Sector::new(2)).unwrap();
        let mut rng = ZeroRng;
        for k in 0..100 {
            let (next, event) = step_fixed_dt(&s, &model, k as f64 * 0.01, 0.01, &mut rng).unwrap();
            assert!(event.is_none());
            s = next;
        }
    }

    #[test]
    fn per_step_jump_probability_is_rate_times_dt() {
        // λ = κ = 1 exactly for ψ = |1>; count jumps in fresh single steps.
        let model = detector(0.0, 1.0);
        let s = PureHybridState::new(ComplexVector::basis(2, 1), Sector::new(1)).unwrap();
        let dt = 0.05;
        let mut rng = super::super::TrajectorySeed::new(11).rng();
        let trials = 40_000;
        let jumps = (0..trials)
            .filter(|_| {
                step_fixed_dt(&s, &model, 0.0, dt, &mut rng)
                    .unwrap()
                    .1
                    .is_some()
            })
            .count();
        let p = jumps as f64 / trials as f64;
        let sigma = (dt * (1.0 - dt) / trials as f64).sqrt();
        assert!((p - dt).abs() < 4.0 * sigma, "p = {p}");
    }

    #[test]
    fn rate_guard_trips() {
        let model = detector(0.0, 1.0);
        let s = PureHybridState::new(ComplexVector::basis(2, 1), Sector::new(1)).unwrap();
        let mut rng = ZeroRng;
        assert!(matches!(
            step_fixed_dt(&s, &model, 0.0, 0.6, &mut rng),
            Err(PdpError::RateGuard { .. })
        ));
    }
}
