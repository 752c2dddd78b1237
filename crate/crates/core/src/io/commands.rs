// Copyright 2026 The eeqt Authors
// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::path::PathBuf;

use thiserror::Error;

use crate::ensemble::{
    comparison_threshold, event_statistics, run_ensemble, trace_distance, EnsembleError,
    EnsembleResult,
};
use crate::linalg::{hermitian_eigenvalues, ComplexMatrix};
use crate::master::{
    integrate_master, reduce_classical, reduce_quantum, HybridDensityState, MasterError,
};
use crate::pdp::{run_trajectory, PdpError, Scheme, TrajectorySeed};

use super::config::{ConfigError, SchemeName, SimulationSpec};
use super::output::{write_table, Table};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "EEQT_OUT_DIR";
/// Output directory used when neither the flag, the config, nor the
/// environment names one.
pub const DEFAULT_OUT_DIR: &str = "eeqt-out";

#[derive(Debug, Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("trajectory failed: {0}")]
    Trajectory(#[from] PdpError),
    #[error("ensemble failed: {0}")]
    Ensemble(#[from] EnsembleError),
    #[error("master equation failed: {0}")]
    Master(#[from] MasterError),
}

/// Settings that come from the command line rather than the config.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    /// Worker threads; 0 means one per core. Never changes results.
    pub workers: usize,
    pub seed: Option<u64>,
    pub scheme: Option<SchemeName>,
    /// Solve the master equation with every coupling moved to the
    /// transposed slot. `compare` must then fail.
    pub debug_transpose_couplings: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    /// Human-readable summary for the terminal.
    pub report: String,
    pub files: Vec<PathBuf>,
    /// Set by `compare` only.
    pub verdict: Option<Verdict>,
}

/// Flag, then config, then `EEQT_OUT_DIR`, then [`DEFAULT_OUT_DIR`].
pub fn resolve_out_dir(spec: &SimulationSpec, opts: &RunOptions) -> PathBuf {
    opts.out
        .clone()
        .or_else(|| spec.raw.outputs.directory.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

struct Sink {
    dir: PathBuf,
    comment: String,
    spec: SimulationSpec,
    files: Vec<PathBuf>,
}

impl Sink {
    fn open(command: &str, spec: &SimulationSpec, opts: &RunOptions) -> Result<Self, CommandError> {
        let spec = spec.with_overrides(opts.seed, opts.scheme)?;
        let dir = resolve_out_dir(&spec, opts);
        std::fs::create_dir_all(&dir).map_err(|source| CommandError::Io {
            path: dir.clone(),
            source,
        })?;
        let comment = format!(
            "eeqt {command}: seed={}, scheme={}, n_trajectories={}, master_dt={}",
            spec.run.master_seed, spec.run.scheme, spec.run.n_trajectories, spec.run.master_dt
        );
        let mut sink = Self {
            dir,
            comment,
            spec,
            files: Vec::new(),
        };
        let toml = sink.spec.to_toml();
        let path = sink.dir.join("run.toml");
        std::fs::write(&path, toml).map_err(|source| CommandError::Io {
            path: path.clone(),
            source,
        })?;
        sink.files.push(path);
        Ok(sink)
    }

    fn write(&mut self, table: &Table) -> Result<(), CommandError> {
        let paths = write_table(
            &self.dir,
            table,
            &self.comment,
            &self.spec.raw.outputs.formats,
        )
        .map_err(|source| CommandError::Io {
            path: self.dir.join(&table.name),
            source,
        })?;
        self.files.extend(paths);
        Ok(())
    }

    fn finish(self, report: String, verdict: Option<Verdict>) -> CommandOutput {
        log::info!("wrote {} files to {}", self.files.len(), self.dir.display());
        CommandOutput {
            report,
            files: self.files,
            verdict,
        }
    }
}

fn num(x: f64) -> String {
    x.to_string()
}

/// Summary of the model, its event channels, and the run plan.
pub fn cmd_validate(spec: &SimulationSpec) -> String {
    let model = &spec.model;
    let mut r = String::new();
    let kind = spec.raw.model.builtin.as_deref().unwrap_or("explicit");
    let _ = writeln!(r, "model: {kind}, n = {}, m = {}", model.n(), model.m());
    let _ = writeln!(r, "classical states:");
    for (a, label) in model.labels().iter().enumerate() {
        let _ = writeln!(r, "  {}  {label}", a + 1);
    }
    let starts: Vec<f64> = std::iter::once(0.0)
        .chain(model.breakpoints().iter().copied())
        .collect();
    let _ = writeln!(r, "damping spectra (eigenvalues of Λ_α):");
    for &t in &starts {
        if starts.len() > 1 {
            let _ = writeln!(r, "  from t = {t}:");
        }
        for a in 1..=model.m() {
            let alpha = crate::model::Sector::new(a);
            let lambda = model.lambda_operator(alpha, t).expect("sector in range");
            let spectrum: Vec<String> = hermitian_eigenvalues(lambda)
                .iter()
                .map(|l| format!("{l:.6}"))
                .collect();
            let _ = writeln!(r, "    Λ_{a}: [{}]", spectrum.join(", "));
        }
    }
    let channels = model.event_channels();
    let active = model.active_channels();
    let _ = writeln!(r, "event channels (m² - m = {}):", channels.len());
    for (from, to) in channels {
        let mark = if active.contains(&(from, to)) {
            "active"
        } else {
            "absent"
        };
        let _ = writeln!(r, "  {from} -> {to}  {mark}");
    }
    let run = &spec.run;
    let _ = writeln!(
        r,
        "run: scheme = {}, t_end = {}, {} sample times, n_trajectories = {}, master_seed = {}",
        run.scheme,
        run.t_end,
        run.sample_times.len(),
        run.n_trajectories,
        run.master_seed
    );
    r
}

/// One trajectory: its events and snapshots.
pub fn cmd_trajectory(
    spec: &SimulationSpec,
    opts: &RunOptions,
) -> Result<CommandOutput, CommandError> {
    let mut sink = Sink::open("trajectory", spec, opts)?;
    let spec = sink.spec.clone();
    let params = spec.run.trajectory_params();
    let traj = run_trajectory(
        &spec.model,
        &spec.initial,
        &params,
        TrajectorySeed::new(spec.run.master_seed),
    )?;

    let mut events = Table::new("trajectory_events", ["t", "from_alpha", "to_alpha"]);
    for e in &traj.events {
        events.push(vec![num(e.time), e.from.to_string(), e.to.to_string()]);
    }
    let mut header = vec!["t".to_string(), "alpha".to_string()];
    for k in 1..=spec.model.n() {
        header.push(format!("psi_{k}_re"));
        header.push(format!("psi_{k}_im"));
    }
    let mut snapshots = Table::new("trajectory_snapshots", header);
    for (t, state) in &traj.snapshots {
        let mut row = vec![num(*t), state.alpha.to_string()];
        for z in state.psi.iter() {
            row.push(num(z.re));
            row.push(num(z.im));
        }
        snapshots.push(row);
    }
    sink.write(&events)?;
    sink.write(&snapshots)?;
    let report = format!(
        "trajectory: {} events, final classical state {}",
        traj.events.len(),
        traj.snapshots
            .last()
            .map_or_else(|| "-".to_string(), |(_, s)| s.alpha.to_string())
    );
    Ok(sink.finish(report, None))
}

fn occupation_table(
    name: &str,
    m: usize,
    rows: impl IntoIterator<Item = (f64, Vec<f64>)>,
) -> Table {
    let header = std::iter::once("t".to_string()).chain((1..=m).map(|a| format!("p_{a}")));
    let mut table = Table::new(name, header);
    for (t, p) in rows {
        table.push(
            std::iter::once(num(t))
                .chain(p.into_iter().map(num))
                .collect(),
        );
    }
    table
}

fn density_tables(prefix: &str, samples: &[(f64, &HybridDensityState)]) -> [Table; 3] {
    let mut occupation = Vec::new();
    let mut density = Table::new(
        format!("{prefix}_density"),
        ["t", "sector", "row", "col", "re", "im"],
    );
    let mut reduced = Table::new(format!("{prefix}_reduced"), ["t", "row", "col", "re", "im"]);
    let push_entries = |table: &mut Table, prefix: Vec<String>, b: &ComplexMatrix| {
        for i in 0..b.rows() {
            for j in 0..b.cols() {
                let mut row = prefix.clone();
                row.extend([
                    (i + 1).to_string(),
                    (j + 1).to_string(),
                    num(b[(i, j)].re),
                    num(b[(i, j)].im),
                ]);
                table.push(row);
            }
        }
    };
    let mut m = 0;
    for &(t, rho) in samples {
        m = rho.m();
        occupation.push((t, reduce_classical(rho)));
        for (a, b) in rho.blocks().iter().enumerate() {
            push_entries(&mut density, vec![num(t), (a + 1).to_string()], b);
        }
        push_entries(&mut reduced, vec![num(t)], &reduce_quantum(rho));
    }
    [
        occupation_table(&format!("{prefix}_occupation"), m, occupation),
        density,
        reduced,
    ]
}

fn ensemble_tables(spec: &SimulationSpec, result: &EnsembleResult) -> Vec<Table> {
    let samples: Vec<(f64, &HybridDensityState)> = result
        .sample_times
        .iter()
        .copied()
        .zip(&result.empirical_states)
        .collect();
    let mut tables: Vec<Table> = density_tables("ensemble", &samples).into();
    let stats = event_statistics(result, &spec.model, spec.run.bin_width);
    // Direct counts rather than traces of the averaged blocks.
    tables[0] = occupation_table(
        "ensemble_occupation",
        spec.model.m(),
        stats.occupation.clone(),
    );
    let mut summary = Table::new(
        "ensemble_event_stats",
        [
            "from_alpha",
            "to_alpha",
            "count",
            "first_count",
            "first_mean",
            "first_var",
            "inter_count",
            "inter_mean",
            "inter_var",
        ],
    );
    let mut histogram = Table::new(
        "ensemble_event_histogram",
        ["from_alpha", "to_alpha", "bin_start", "count"],
    );
    for c in &stats.channels {
        summary.push(vec![
            c.from.to_string(),
            c.to.to_string(),
            c.count.to_string(),
            c.first_passage.count.to_string(),
            num(c.first_passage.mean),
            num(c.first_passage.variance),
            c.inter_event.count.to_string(),
            num(c.inter_event.mean),
            num(c.inter_event.variance),
        ]);
        for (start, count) in c.histogram.bins() {
            histogram.push(vec![
                c.from.to_string(),
                c.to.to_string(),
                num(start),
                count.to_string(),
            ]);
        }
    }
    tables.push(summary);
    tables.push(histogram);
    tables
}

fn run_spec_ensemble(
    spec: &SimulationSpec,
    opts: &RunOptions,
) -> Result<EnsembleResult, CommandError> {
    Ok(run_ensemble(
        &spec.model,
        &spec.initial,
        &spec.run.trajectory_params(),
        spec.run.n_trajectories,
        spec.run.master_seed,
        opts.workers,
    )?)
}

/// Empirical occupations, density blocks, reduced states, and event
/// statistics of `n_trajectories` trajectories.
pub fn cmd_ensemble(
    spec: &SimulationSpec,
    opts: &RunOptions,
) -> Result<CommandOutput, CommandError> {
    let mut sink = Sink::open("ensemble", spec, opts)?;
    let spec = sink.spec.clone();
    let result = run_spec_ensemble(&spec, opts)?;
    for table in ensemble_tables(&spec, &result) {
        sink.write(&table)?;
    }
    let first = result.first_event_times();
    let clicked = first.iter().filter(|t| t.is_finite()).count();
    let report = format!(
        "ensemble: {} trajectories, {clicked} with at least one event",
        result.n_trajectories
    );
    Ok(sink.finish(report, None))
}

fn solve_master(
    spec: &SimulationSpec,
    opts: &RunOptions,
) -> Result<Vec<(f64, HybridDensityState)>, CommandError> {
    let rho0 = HybridDensityState::from_pure(&spec.initial, spec.model.m())?;
    let transposed;
    let model = if opts.debug_transpose_couplings {
        log::warn!("debug: solving the master equation with transposed couplings");
        transposed = spec.model.with_transposed_couplings();
        &transposed
    } else {
        &spec.model
    };
    Ok(integrate_master(
        model,
        &rho0,
        spec.run.t_end,
        spec.run.master_dt,
        &spec.run.sample_times,
    )?)
}

/// The master-equation solution at the sample times.
pub fn cmd_master(spec: &SimulationSpec, opts: &RunOptions) -> Result<CommandOutput, CommandError> {
    let mut sink = Sink::open("master", spec, opts)?;
    let spec = sink.spec.clone();
    let solution = solve_master(&spec, opts)?;
    let samples: Vec<(f64, &HybridDensityState)> = solution.iter().map(|(t, r)| (*t, r)).collect();
    for table in density_tables("master", &samples) {
        sink.write(&table)?;
    }
    let report = format!(
        "master: {} samples up to t = {}",
        solution.len(),
        spec.run.t_end
    );
    Ok(sink.finish(report, None))
}

/// Time-discretization allowance added to the statistical threshold.
fn scheme_bias(scheme: &Scheme) -> f64 {
    match scheme {
        Scheme::FixedDt { dt } => *dt,
        Scheme::NormThreshold(_) => 0.0,
    }
}

/// Runs both engines and checks their trace distance against the
/// self-calibrated threshold at every sample time.
pub fn cmd_compare(
    spec: &SimulationSpec,
    opts: &RunOptions,
) -> Result<CommandOutput, CommandError> {
    let mut sink = Sink::open("compare", spec, opts)?;
    let spec = sink.spec.clone();
    let result = run_spec_ensemble(&spec, opts)?;
    let solution = solve_master(&spec, opts)?;
    for table in ensemble_tables(&spec, &result) {
        sink.write(&table)?;
    }
    let samples: Vec<(f64, &HybridDensityState)> = solution.iter().map(|(t, r)| (*t, r)).collect();
    for table in density_tables("master", &samples) {
        sink.write(&table)?;
    }

    let bias = scheme_bias(&spec.run.scheme);
    let mut table = Table::new("comparison", ["t", "trace_distance", "threshold"]);
    let mut report = String::new();
    let mut pass = true;
    for (emp, (t, exact)) in result.empirical_states.iter().zip(&solution) {
        let d = trace_distance(emp, exact)?;
        let threshold = comparison_threshold(emp, result.n_trajectories, bias);
        let ok = d <= threshold;
        pass &= ok;
        table.push(vec![num(*t), num(d), num(threshold)]);
        let _ = writeln!(
            report,
            "t = {t:<8} trace distance {d:.5}  threshold {threshold:.5}  {}",
            if ok { "ok" } else { "EXCEEDED" }
        );
    }
    sink.write(&table)?;
    let verdict = if pass { Verdict::Pass } else { Verdict::Fail };
    let _ = write!(report, "{}", if pass { "PASS" } else { "FAIL" });
    Ok(sink.finish(report, Some(verdict)))
}
