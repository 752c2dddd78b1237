// Copyright 2026 The eeqt Authors
// SPDX-License-Identifier: Apache-2.0

//! Monte Carlo averages of trajectories and their comparison with the
//! master equation.
//!
//! Trajectory `i` of an ensemble draws from random stream `i` of the master
//! seed. Work is split into fixed chunks of [`CHUNK_SIZE`] consecutive
//! indices; each chunk sums its projectors in index order and the chunk
//! sums are added in chunk order. The floating-point result therefore does
//! not depend on the number of workers.

mod stats;

pub use stats::{
    ks_critical_1pct, ks_critical_two_sample_1pct, ks_one_sample, ks_two_sample, Histogram,
    Summary, KS_COEFF_1PCT,
};

use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::{hermitian_eigenvalues, re, ComplexMatrix};
use crate::master::{BlockDiagonal, HybridDensityState, MasterError};
use crate::model::{EventRecord, HybridModel, PureHybridState, Sector};
use crate::pdp::{
    prepare_propagators, run_trajectory_prepared, PdpError, PropagatorTable, TrajectoryParams,
    TrajectorySeed,
};

/// Trajectories per unit of parallel work.
pub const CHUNK_SIZE: usize = 256;

/// Multiple of the Monte Carlo standard error used by [`comparison_threshold`].
pub const THRESHOLD_SIGMAS: f64 = 3.0;

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("trajectory {index}: {source}")]
    Trajectory {
        index: usize,
        #[source]
        source: PdpError,
    },
    #[error("invalid ensemble parameters: {0}")]
    InvalidParams(String),
    #[error("could not start worker pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Master(#[from] MasterError),
    #[error(transparent)]
    Pdp(#[from] PdpError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub n_trajectories: usize,
    pub master_seed: u64,
    pub sample_times: Vec<f64>,
    /// Average of `|ψ><ψ|` placed in block α, one per sample time.
    pub empirical_states: Vec<HybridDensityState>,
    /// Number of trajectories in each sector, one row per sample time.
    pub occupation_counts: Vec<Vec<u64>>,
    /// Event records of every trajectory, by trajectory index.
    pub events: Vec<Vec<EventRecord>>,
}

impl EnsembleResult {
    /// Direct frequency of each sector at sample `k`.
    pub fn occupation_frequencies(&self, k: usize) -> Vec<f64> {
        let n = self.n_trajectories as f64;
        self.occupation_counts[k]
            .iter()
            .map(|&c| c as f64 / n)
            .collect()
    }

    /// Time of the first event of each trajectory; `INFINITY` if none.
    pub fn first_event_times(&self) -> Vec<f64> {
        self.events
            .iter()
            .map(|ev| ev.first().map_or(f64::INFINITY, |e| e.time))
            .collect()
    }

    /// All event times of channel `from → to`, trajectory by trajectory.
    pub fn channel_times(&self, from: Sector, to: Sector) -> Vec<f64> {
        self.events
            .iter()
            .flatten()
            .filter(|e| e.from == from && e.to == to)
            .map(|e| e.time)
            .collect()
    }
}

struct ChunkSums {
    states: Vec<BlockDiagonal>,
    counts: Vec<Vec<u64>>,
    events: Vec<Vec<EventRecord>>,
}

fn run_chunk(
    model: &HybridModel,
    initial: &PureHybridState,
    params: &TrajectoryParams,
    master_seed: u64,
    range: std::ops::Range<usize>,
    propagators: Option<&PropagatorTable>,
) -> Result<ChunkSums, EnsembleError> {
    let (n, m) = (model.n(), model.m());
    let samples = params.sample_times.len();
    let mut sums = ChunkSums {
        states: vec![BlockDiagonal::zeros(n, m); samples],
        counts: vec![vec![0; m]; samples],
        events: Vec::with_capacity(range.len()),
    };
    for index in range {
        let seed = TrajectorySeed::with_stream(master_seed, index as u64);
        let traj = run_trajectory_prepared(model, initial, params, seed, propagators)
            .map_err(|source| EnsembleError::Trajectory { index, source })?;
        if traj.snapshots.len() != samples {
            return Err(EnsembleError::InvalidParams(format!(
                "trajectory {index} stopped early and recorded {} of {samples} snapshots; \
                 an event limit cannot be combined with sample times",
                traj.snapshots.len()
            )));
        }
        for (k, (_, state)) in traj.snapshots.iter().enumerate() {
            let a = state.alpha.index();
            let projector = ComplexMatrix::outer(&state.psi, &state.psi);
            sums.states[k].blocks_mut()[a].add_scaled_assign(re(1.0), &projector);
            sums.counts[k][a] += 1;
        }
        sums.events.push(traj.events);
    }
    Ok(sums)
}

/// Runs `n` trajectories from `initial` and averages them at
/// `params.sample_times`.
///
/// `workers = 0` uses all available cores. The result is identical for
/// every worker count.
pub fn run_ensemble(
    model: &HybridModel,
    initial: &PureHybridState,
    params: &TrajectoryParams,
    n: usize,
    master_seed: u64,
    workers: usize,
) -> Result<EnsembleResult, EnsembleError> {
    if n == 0 {
        return Err(EnsembleError::InvalidParams(
            "need at least one trajectory".into(),
        ));
    }
    params.validate()?;
    let propagators = prepare_propagators(model, params)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| EnsembleError::ThreadPool(e.to_string()))?;
    let chunks: Vec<_> = (0..n)
        .step_by(CHUNK_SIZE)
        .map(|s| s..(s + CHUNK_SIZE).min(n))
        .collect();
    log::debug!("running {n} trajectories in {} chunks", chunks.len());
    let partial: Vec<ChunkSums> = pool.install(|| {
        chunks
            .into_par_iter()
            .map(|range| {
                run_chunk(
                    model,
                    initial,
                    params,
                    master_seed,
                    range,
                    propagators.as_ref(),
                )
            })
            .collect::<Result<_, _>>()
    })?;

    let (dim, m) = (model.n(), model.m());
    let samples = params.sample_times.len();
    let mut states = vec![BlockDiagonal::zeros(dim, m); samples];
    let mut counts = vec![vec![0u64; m]; samples];
    let mut events = Vec::with_capacity(n);
    for chunk in partial {
        for k in 0..samples {
            states[k] = states[k].add_scaled(1.0, &chunk.states[k]);
            for (c, d) in counts[k].iter_mut().zip(&chunk.counts[k]) {
                *c += d;
            }
        }
        events.extend(chunk.events);
    }
    let inv = 1.0 / n as f64;
    let empirical_states = states
        .into_iter()
        .map(|s| HybridDensityState::from_blocks(BlockDiagonal::zeros(dim, m).add_scaled(inv, &s)))
        .collect::<Result<_, _>>()?;
    Ok(EnsembleResult {
        n_trajectories: n,
        master_seed,
        sample_times: params.sample_times.clone(),
        empirical_states,
        occupation_counts: counts,
        events,
    })
}

/// `½ Σ_α ‖ρ_α - σ_α‖_1`, the trace norm of the block-diagonal difference.
pub fn trace_distance(
    rho: &HybridDensityState,
    sigma: &HybridDensityState,
) -> Result<f64, EnsembleError> {
    if !rho.as_blocks().same_shape(sigma.as_blocks()) {
        return Err(EnsembleError::Master(MasterError::DimensionMismatch(
            format!(
                "{} blocks of {} vs {} blocks of {}",
                rho.m(),
                rho.n(),
                sigma.m(),
                sigma.n()
            ),
        )));
    }
    let total: f64 = rho
        .blocks()
        .iter()
        .zip(sigma.blocks())
        .map(|(a, b)| {
            hermitian_eigenvalues(&a.sub(b).hermitian_part())
                .iter()
                .map(|l| l.abs())
                .sum::<f64>()
        })
        .sum();
    Ok(0.5 * total)
}

/// Self-calibrated tolerance for `trace_distance(empirical, exact)`.
///
/// For an average of `N` pure terms, the expected squared Frobenius error
/// of block α is `(p_α - ‖ρ_α‖_F²) / N`, and the trace norm of an `n × n`
/// block is at most `√n` times its Frobenius norm. The threshold is
/// [`THRESHOLD_SIGMAS`] times the resulting bound, estimated from the
/// empirical state itself, plus a `bias` allowance for time discretization.
pub fn comparison_threshold(
    empirical: &HybridDensityState,
    n_trajectories: usize,
    bias: f64,
) -> f64 {
    let dim = empirical.n() as f64;
    let n = n_trajectories as f64;
    let se: f64 = empirical
        .blocks()
        .iter()
        .map(|b| {
            let p = b.trace().re;
            let purity = b.frobenius_norm().powi(2);
            (dim * (p - purity).max(0.0) / n).sqrt()
        })
        .sum();
    THRESHOLD_SIGMAS * 0.5 * se + bias
}

/// Per-channel summary of an ensemble's events.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelStatistics {
    pub from: Sector,
    pub to: Sector,
    /// Total number of events in this channel.
    pub count: usize,
    /// First occurrence of this channel in each trajectory that has one.
    pub first_passage: Summary,
    /// Gaps between consecutive events of this channel within a trajectory.
    pub inter_event: Summary,
    pub histogram: Histogram,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventStatistics {
    /// All `m² - m` ordered channels, by source then destination.
    pub channels: Vec<ChannelStatistics>,
    /// `(t, p_1..p_m)` from direct counting.
    pub occupation: Vec<(f64, Vec<f64>)>,
}

impl EventStatistics {
    pub fn channel(&self, from: Sector, to: Sector) -> Option<&ChannelStatistics> {
        self.channels.iter().find(|c| c.from == from && c.to == to)
    }
}

pub fn event_statistics(
    result: &EnsembleResult,
    model: &HybridModel,
    bin_width: f64,
) -> EventStatistics {
    let channels = model
        .event_channels()
        .into_iter()
        .map(|(from, to)| {
            let mut first = Vec::new();
            let mut gaps = Vec::new();
            for traj in &result.events {
                let times: Vec<f64> = traj
                    .iter()
                    .filter(|e| e.from == from && e.to == to)
                    .map(|e| e.time)
                    .collect();
                if let Some(&t) = times.first() {
                    first.push(t);
                }
                gaps.extend(times.windows(2).map(|w| w[1] - w[0]));
            }
            let all = result.channel_times(from, to);
            ChannelStatistics {
                from,
                to,
                count: all.len(),
                first_passage: Summary::of(&first),
                inter_event: Summary::of(&gaps),
                histogram: Histogram::new(bin_width, &all),
            }
        })
        .collect();
    let occupation = result
        .sample_times
        .iter()
        .enumerate()
        .map(|(k, &t)| (t, result.occupation_frequencies(k)))
        .collect();
    EventStatistics {
        channels,
        occupation,
    }
}

#[cfg(test)]
mod tests;
