// Copyright 2026 The eeqt Authors
// SPDX-License-Identifier: Apache-2.0

//! Individual-system sample paths.
//!
//! A trajectory alternates deterministic flow of `(ψ, α)` under the
//! effective generator `K_α` with random events `α → β`. Two schemes
//! generate the event times:
//!
//! * [`Scheme::FixedDt`] tests for a jump once per step with probability
//!   `λ(ψ, α) dt`;
//! * [`Scheme::NormThreshold`] integrates the unnormalized flow until the
//!   squared norm drops below a uniform draw.
//!
//! Both produce the same process in the limit `dt → 0`; the test suites
//! compare them statistically.

mod fixed_dt;
mod norm_threshold;
mod seed;

pub use fixed_dt::{evolve_no_jump, step_fixed_dt, RATE_DT_ERROR, RATE_DT_WARN};
pub use norm_threshold::{sample_jump_time_norm_method, NormThresholdOptions};
pub use seed::TrajectorySeed;

use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::linalg::LinalgError;
use crate::model::{EventRecord, HybridModel, ModelError, PureHybridState, Sector};

pub(crate) use fixed_dt::PropagatorTable;
use fixed_dt::{jump, step_with};
use norm_threshold::{advance_until_threshold, Advance};

/// Default cap on the number of events in one trajectory.
pub const DEFAULT_MAX_EVENTS: usize = 1_000_000;

/// Relative slack when matching sample times to the step grid.
const GRID_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PdpError {
    #[error("state vector collapsed to squared norm {norm_sq:e} at t = {t}")]
    DeadBranch { t: f64, norm_sq: f64 },
    #[error("jump probability per step λ·dt = {rate_dt:.3} at t = {t} exceeds {RATE_DT_ERROR}")]
    RateGuard { t: f64, rate_dt: f64 },
    #[error("jump {from} -> {to} at t = {t} has zero amplitude")]
    ZeroJumpAmplitude { t: f64, from: Sector, to: Sector },
    #[error("more than {max_events} events before t_end")]
    RunawayJumps { max_events: usize },
    #[error("integration failed: {0}")]
    IntegrationError(String),
    #[error("invalid trajectory parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    FixedDt { dt: f64 },
    NormThreshold(NormThresholdOptions),
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::FixedDt { .. } => "fixed-dt",
            Scheme::NormThreshold(_) => "norm-threshold",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::FixedDt { dt } => write!(f, "fixed-dt(dt={dt})"),
            Scheme::NormThreshold(o) => {
                write!(
                    f,
                    "norm-threshold(ode_tol={}, root_tol={})",
                    o.ode_tol, o.root_tol
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryParams {
    pub scheme: Scheme,
    pub t_end: f64,
    /// Non-decreasing times in `[0, t_end]` at which to record the state.
    pub sample_times: Vec<f64>,
    /// Exceeding this many events is an error.
    pub max_events: usize,
    /// Stop quietly once this many events have occurred. Snapshots after
    /// the stop are not recorded.
    pub event_limit: Option<usize>,
}

impl TrajectoryParams {
    pub fn new(scheme: Scheme, t_end: f64) -> Self {
        Self {
            scheme,
            t_end,
            sample_times: Vec::new(),
            max_events: DEFAULT_MAX_EVENTS,
            event_limit: None,
        }
    }

    pub fn fixed_dt(dt: f64, t_end: f64) -> Self {
        Self::new(Scheme::FixedDt { dt }, t_end)
    }

    pub fn norm_threshold(t_end: f64) -> Self {
        Self::new(
            Scheme::NormThreshold(NormThresholdOptions::default()),
            t_end,
        )
    }

    pub fn with_sample_times(mut self, sample_times: Vec<f64>) -> Self {
        self.sample_times = sample_times;
        self
    }

    /// Stop after the first event; convenient for waiting-time statistics.
    pub fn first_event_only(mut self) -> Self {
        self.event_limit = Some(1);
        self
    }

    pub fn validate(&self) -> Result<(), PdpError> {
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(PdpError::InvalidParams(format!(
                "t_end must be finite and >= 0, got {}",
                self.t_end
            )));
        }
        match self.scheme {
            Scheme::FixedDt { dt } => {
                if !(dt > 0.0 && dt.is_finite()) {
                    return Err(PdpError::InvalidParams(format!(
                        "dt must be positive, got {dt}"
                    )));
                }
            }
            Scheme::NormThreshold(opts) => opts.validate()?,
        }
        if self
            .sample_times
            .iter()
            .any(|&s| !(0.0..=self.t_end).contains(&s))
        {
            return Err(PdpError::InvalidParams(
                "sample times must lie in [0, t_end]".into(),
            ));
        }
        if self.sample_times.windows(2).any(|w| w[0] > w[1]) {
            return Err(PdpError::InvalidParams(
                "sample times must be ascending".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryResult {
    pub events: Vec<EventRecord>,
    /// `(sample time, state)` pairs in sample-time order.
    pub snapshots: Vec<(f64, PureHybridState)>,
    pub seed: TrajectorySeed,
    pub scheme: Scheme,
}

impl TrajectoryResult {
    pub fn first_event(&self) -> Option<&EventRecord> {
        self.events.first()
    }
}

/// Runs one trajectory from `t = 0` to `params.t_end`.
///
/// The result is a deterministic function of the arguments. Snapshots
/// follow the right-continuous convention: a sample time that coincides
/// with a jump sees the post-jump state. Under `FixedDt` a sample time
/// between grid points `k dt` sees the state at the last grid point not
/// after it, events are stamped with the grid point that ends their step,
/// and the final step is shortened to end exactly at `t_end`.
pub fn run_trajectory(
    model: &HybridModel,
    initial: &PureHybridState,
    params: &TrajectoryParams,
    seed: TrajectorySeed,
) -> Result<TrajectoryResult, PdpError> {
    params.validate()?;
    let propagators = prepare_propagators(model, params)?;
    run_trajectory_prepared(model, initial, params, seed, propagators.as_ref())
}

pub(crate) fn prepare_propagators(
    model: &HybridModel,
    params: &TrajectoryParams,
) -> Result<Option<PropagatorTable>, PdpError> {
    match params.scheme {
        Scheme::FixedDt { dt } => Ok(Some(PropagatorTable::new(model, dt)?)),
        Scheme::NormThreshold(_) => Ok(None),
    }
}

/// As [`run_trajectory`], reusing precomputed propagators for fixed-dt
/// runs. `params` must already be validated.
pub(crate) fn run_trajectory_prepared(
    model: &HybridModel,
    initial: &PureHybridState,
    params: &TrajectoryParams,
    seed: TrajectorySeed,
    propagators: Option<&PropagatorTable>,
) -> Result<TrajectoryResult, PdpError> {
    model.check_sector(initial.alpha)?;
    if initial.psi.dim() != model.n() {
        return Err(PdpError::InvalidParams(format!(
            "initial state has dimension {}, model has {}",
            initial.psi.dim(),
            model.n()
        )));
    }
    let mut rng = seed.rng();
    let mut log = EventLog::new(params);
    match params.scheme {
        Scheme::FixedDt { dt } => {
            let table = propagators.expect("fixed-dt run needs propagators");
            run_fixed_dt(model, initial, params, dt, table, &mut rng, &mut log)?
        }
        Scheme::NormThreshold(opts) => {
            run_norm_threshold(model, initial, params, &opts, &mut rng, &mut log)?
        }
    }
    Ok(TrajectoryResult {
        events: log.events,
        snapshots: log.snapshots,
        seed,
        scheme: params.scheme,
    })
}

struct EventLog {
    events: Vec<EventRecord>,
    snapshots: Vec<(f64, PureHybridState)>,
    max_events: usize,
    event_limit: Option<usize>,
}

impl EventLog {
    fn new(params: &TrajectoryParams) -> Self {
        Self {
            events: Vec::new(),
            snapshots: Vec::with_capacity(params.sample_times.len()),
            max_events: params.max_events,
            event_limit: params.event_limit,
        }
    }

    /// Records an event; returns `true` when the run should halt.
    fn push(&mut self, event: EventRecord) -> Result<bool, PdpError> {
        self.events.push(event);
        if self.events.len() > self.max_events {
            return Err(PdpError::RunawayJumps {
                max_events: self.max_events,
            });
        }
        Ok(self
            .event_limit
            .is_some_and(|limit| self.events.len() >= limit))
    }
}

fn run_fixed_dt<R: Rng + ?Sized>(
    model: &HybridModel,
    initial: &PureHybridState,
    params: &TrajectoryParams,
    dt: f64,
    table: &PropagatorTable,
    rng: &mut R,
    log: &mut EventLog,
) -> Result<(), PdpError> {
    let t_end = params.t_end;
    let n_steps = if t_end > 0.0 {
        ((t_end / dt) - GRID_SLACK).ceil().max(1.0) as u64
    } else {
        0
    };
    // Grid index whose state each sample time sees.
    let sample_steps: Vec<u64> = params
        .sample_times
        .iter()
        .map(|&s| {
            if s >= t_end {
                n_steps
            } else {
                (((s / dt) + GRID_SLACK).floor() as u64).min(n_steps)
            }
        })
        .collect();
    let mut next_sample = 0;
    let mut state = initial.clone();
    let record = |state: &PureHybridState, k: u64, log: &mut EventLog, next_sample: &mut usize| {
        while *next_sample < sample_steps.len() && sample_steps[*next_sample] == k {
            log.snapshots
                .push((params.sample_times[*next_sample], state.clone()));
            *next_sample += 1;
        }
    };
    record(&state, 0, log, &mut next_sample);

    for k in 0..n_steps {
        let t = k as f64 * dt;
        let last = k + 1 == n_steps;
        let h = if last { t_end - t } else { dt };
        let (next, event) = if last && h != dt {
            step_fixed_dt(&state, model, t, h, rng)?
        } else {
            let propagator = table.get(model.epoch_index(t), state.alpha);
            step_with(&state, model, t, h, rng, |psi| Ok(propagator.apply(psi)))?
        };
        state = next;
        if let Some(event) = event {
            if log.push(event)? {
                return Ok(());
            }
        }
        record(&state, k + 1, log, &mut next_sample);
    }
    Ok(())
}

/// Uniform draw in the open interval `(0, 1)`.
fn draw_threshold<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let r: f64 = rng.random();
        if r > 0.0 {
            return r;
        }
    }
}

fn run_norm_threshold<R: Rng + ?Sized>(
    model: &HybridModel,
    initial: &PureHybridState,
    params: &TrajectoryParams,
    opts: &NormThresholdOptions,
    rng: &mut R,
    log: &mut EventLog,
) -> Result<(), PdpError> {
    let mut alpha = initial.alpha;
    let mut psi = initial.psi.clone();
    let mut t = 0.0;
    let mut r = draw_threshold(rng);
    let mut samples = params.sample_times.iter().copied().peekable();

    loop {
        let stop = samples.peek().copied().unwrap_or(params.t_end);
        match advance_until_threshold(model, alpha, &psi, t, stop, r, opts)? {
            Advance::Crossed {
                t: t_jump,
                psi: at_jump,
            } => {
                let unit = at_jump.normalized().ok_or(PdpError::DeadBranch {
                    t: t_jump,
                    norm_sq: at_jump.norm_sq(),
                })?;
                let before = PureHybridState { psi: unit, alpha };
                let (after, event) = jump(&before, model, t_jump, rng)?;
                t = t_jump;
                alpha = after.alpha;
                psi = after.psi;
                r = draw_threshold(rng);
                if log.push(event)? {
                    return Ok(());
                }
            }
            Advance::Reached { psi: at_stop } => {
                psi = at_stop;
                t = stop;
                match samples.peek() {
                    Some(_) => {
                        let sample_time = samples.next().expect("peeked");
                        let unit = psi.normalized().ok_or(PdpError::DeadBranch {
                            t,
                            norm_sq: psi.norm_sq(),
                        })?;
                        log.snapshots
                            .push((sample_time, PureHybridState { psi: unit, alpha }));
                    }
                    None => return Ok(()),
                }
            }
        }
    }
}
