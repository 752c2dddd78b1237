// Copyright 2026 The eeqt Authors
// SPDX-License-Identifier: Apache-2.0

//! TOML run configurations.
//!
//! ```toml
//! [model]
//! builtin = "qubit-detector"
//! parameters = { omega = 1.0, kappa = 1.0 }
//!
//! [initial]
//! psi = [[1.0, 0.0], [0.0, 0.0]]   # complex amplitudes as [re, im]
//! alpha = 1
//!
//! [run]
//! scheme = "fixed-dt"
//! dt = 1e-3
//! t_end = 2.0
//! sample_times = [0.5, 1.0, 2.0]
//! n_trajectories = 20000
//! master_seed = 1
//! ```
//!
//! An explicit model replaces `builtin`/`parameters` with `n`, `m`,
//! optional `labels`, and arrays of `[[model.hamiltonians]]` (keyed by
//! `alpha`) and `[[model.couplings]]` (keyed by `from` and `to`). Each
//! entry has either a constant `matrix` or `breakpoints` plus one more
//! entry in `values`. Sectors without a Hamiltonian evolve freely; absent
//! couplings are zero.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{ComplexMatrix, ComplexVector};
use crate::model::{
    build_model, builtin_model, BuiltinParams, CouplingFamily, HybridModel, ModelError,
    PureHybridState, Schedule, Sector,
};
use crate::pdp::{NormThresholdOptions, Scheme, TrajectoryParams};

/// Squared-norm deviation of the initial ψ above which normalizing it is
/// reported.
pub const NORMALIZATION_WARN: f64 = 1e-6;

const DEFAULT_N_TRAJECTORIES: usize = 1000;
const DEFAULT_MASTER_DT: f64 = 1e-3;
const DEFAULT_BIN_WIDTH: f64 = 0.1;

pub type ComplexEntry = [f64; 2];
pub type MatrixEntries = Vec<Vec<ComplexEntry>>;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}{}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Schema {
        path: String,
        message: String,
        line: Option<usize>,
    },
    #[error("{path}: {source}")]
    Model {
        path: String,
        #[source]
        source: ModelError,
    },
}

impl ConfigError {
    fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Schema {
            path: path.into(),
            message: message.into(),
            line: None,
        }
    }

    /// Field path of the offending entry, if the error has one.
    pub fn path(&self) -> Option<&str> {
        match self {
            Self::Schema { path, .. } | Self::Model { path, .. } => Some(path),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeName {
    FixedDt,
    NormThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Tsv,
}

impl Format {
    pub fn delimiter(self) -> u8 {
        match self {
            Format::Csv => b',',
            Format::Tsv => b'\t',
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Tsv => "tsv",
        }
    }
}

/// The configuration as written, before validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSpec {
    pub model: ModelSection,
    pub initial: InitialSection,
    pub run: RunSection,
    #[serde(default)]
    pub outputs: OutputSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameters: Option<BuiltinParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hamiltonians: Vec<HamiltonianEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub couplings: Vec<CouplingEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianEntry {
    pub alpha: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixEntries>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breakpoints: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<MatrixEntries>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingEntry {
    pub from: usize,
    pub to: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixEntries>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breakpoints: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<MatrixEntries>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub psi: Vec<ComplexEntry>,
    pub alpha: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub scheme: SchemeName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ode_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root_tol: Option<f64>,
    pub t_end: f64,
    /// Defaults to `[t_end]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_times: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_trajectories: Option<usize>,
    #[serde(default)]
    pub master_seed: u64,
    /// RK4 step of the master-equation solver. Defaults to `1e-3`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_dt: Option<f64>,
    /// Width of event-time histogram bins. Defaults to `0.1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bin_width: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<PathBuf>,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: None,
            formats: default_formats(),
        }
    }
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv]
}

/// Validated run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub scheme: Scheme,
    pub t_end: f64,
    pub sample_times: Vec<f64>,
    pub n_trajectories: usize,
    pub master_seed: u64,
    pub master_dt: f64,
    pub bin_width: f64,
}

impl RunSpec {
    pub fn trajectory_params(&self) -> TrajectoryParams {
        TrajectoryParams::new(self.scheme, self.t_end).with_sample_times(self.sample_times.clone())
    }
}

/// A fully validated configuration.
#[derive(Debug, Clone)]
pub struct SimulationSpec {
    /// The configuration as parsed, including any overrides applied.
    pub raw: RawSpec,
    pub model: HybridModel,
    pub initial: PureHybridState,
    pub run: RunSpec,
}

impl SimulationSpec {
    /// Replaces the seed and/or scheme and re-validates.
    pub fn with_overrides(
        &self,
        seed: Option<u64>,
        scheme: Option<SchemeName>,
    ) -> Result<Self, ConfigError> {
        let mut raw = self.raw.clone();
        if let Some(seed) = seed {
            raw.run.master_seed = seed;
        }
        if let Some(scheme) = scheme {
            raw.run.scheme = scheme;
        }
        validate(raw)
    }

    /// The configuration as TOML; parsing it back yields the same spec.
    pub fn to_toml(&self) -> String {
        toml::to_string(&self.raw).expect("configuration is serializable")
    }
}

pub fn load_config(path: &Path) -> Result<SimulationSpec, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<SimulationSpec, ConfigError> {
    validate(parse_raw(text)?)
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

pub fn parse_raw(text: &str) -> Result<RawSpec, ConfigError> {
    let de = toml::Deserializer::parse(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
        ConfigError::Syntax {
            line,
            column,
            message: e.message().to_owned(),
        }
    })?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let mut path = e.path().to_string();
        let inner = e.into_inner();
        let message = inner.message().to_owned();
        // Missing fields are reported at their parent table.
        if let Some(field) = message
            .strip_prefix("missing field `")
            .and_then(|rest| rest.strip_suffix('`'))
        {
            path = if path == "." {
                field.to_owned()
            } else {
                format!("{path}.{field}")
            };
        }
        ConfigError::Schema {
            path,
            message,
            line: inner.span().map(|s| line_col(text, s.start).0),
        }
    })
}

fn to_matrix(entries: &MatrixEntries, n: usize, path: &str) -> Result<ComplexMatrix, ConfigError> {
    if entries.len() != n || entries.iter().any(|row| row.len() != n) {
        return Err(ConfigError::schema(
            path,
            format!("expected a {n} x {n} matrix"),
        ));
    }
    let rows: Vec<Vec<_>> = entries
        .iter()
        .map(|row| {
            row.iter()
                .map(|&[re, im]| num_complex::Complex64::new(re, im))
                .collect()
        })
        .collect();
    let m = ComplexMatrix::from_rows(&rows);
    if !m.is_finite() {
        return Err(ConfigError::schema(path, "entries must be finite"));
    }
    Ok(m)
}

fn to_schedule(
    matrix: &Option<MatrixEntries>,
    breakpoints: &Option<Vec<f64>>,
    values: &Option<Vec<MatrixEntries>>,
    n: usize,
    path: &str,
) -> Result<Schedule<ComplexMatrix>, ConfigError> {
    match (matrix, breakpoints, values) {
        (Some(m), None, None) => Ok(to_matrix(m, n, &format!("{path}.matrix"))?.into()),
        (None, Some(b), Some(v)) => {
            let values = v
                .iter()
                .enumerate()
                .map(|(j, m)| to_matrix(m, n, &format!("{path}.values[{j}]")))
                .collect::<Result<_, _>>()?;
            Schedule::piecewise(b.clone(), values).map_err(|source| ConfigError::Model {
                path: path.to_owned(),
                source,
            })
        }
        _ => Err(ConfigError::schema(
            path,
            "give either `matrix` or both `breakpoints` and `values`",
        )),
    }
}

fn check_label(value: usize, m: usize, path: String) -> Result<Sector, ConfigError> {
    if (1..=m).contains(&value) {
        Ok(Sector::new(value))
    } else {
        Err(ConfigError::schema(
            path,
            format!("classical state {value} out of range 1..={m}"),
        ))
    }
}

fn build_explicit(section: &ModelSection) -> Result<HybridModel, ConfigError> {
    let n = section
        .n
        .ok_or_else(|| ConfigError::schema("model.n", "missing field `n` (or give `builtin`)"))?;
    let m = section
        .m
        .ok_or_else(|| ConfigError::schema("model.m", "missing field `m` (or give `builtin`)"))?;
    if n == 0 {
        return Err(ConfigError::schema("model.n", "must be at least 1"));
    }
    if m == 0 {
        return Err(ConfigError::schema("model.m", "must be at least 1"));
    }
    let mut hamiltonians: Vec<Option<Schedule<ComplexMatrix>>> = vec![None; m];
    let mut h_entry = vec![0; m];
    for (i, h) in section.hamiltonians.iter().enumerate() {
        let path = format!("model.hamiltonians[{i}]");
        let alpha = check_label(h.alpha, m, format!("{path}.alpha"))?;
        if hamiltonians[alpha.index()].is_some() {
            return Err(ConfigError::schema(
                format!("{path}.alpha"),
                format!("H_{alpha} given twice"),
            ));
        }
        hamiltonians[alpha.index()] =
            Some(to_schedule(&h.matrix, &h.breakpoints, &h.values, n, &path)?);
        h_entry[alpha.index()] = i;
    }
    let mut couplings = CouplingFamily::new(m);
    for (i, g) in section.couplings.iter().enumerate() {
        let path = format!("model.couplings[{i}]");
        let from = check_label(g.from, m, format!("{path}.from"))?;
        let to = check_label(g.to, m, format!("{path}.to"))?;
        let schedule = to_schedule(&g.matrix, &g.breakpoints, &g.values, n, &path)?;
        if from == to {
            if schedule.values().iter().all(ComplexMatrix::is_zero) {
                continue;
            }
            return Err(ConfigError::Model {
                path,
                source: ModelError::NonzeroDiagonalCoupling { alpha: from },
            });
        }
        if couplings.get(to, from).is_some() {
            return Err(ConfigError::schema(
                path,
                format!("g_{to}{from} given twice"),
            ));
        }
        couplings.set(to, from, schedule);
    }
    let hamiltonians = hamiltonians
        .into_iter()
        .map(|h| h.unwrap_or_else(|| ComplexMatrix::zeros(n, n).into()))
        .collect();
    build_model(n, m, hamiltonians, couplings).map_err(|source| {
        let path = match &source {
            ModelError::NonHermitianHamiltonian { alpha, .. } => {
                format!("model.hamiltonians[{}]", h_entry[alpha.index()])
            }
            _ => "model".to_owned(),
        };
        ConfigError::Model { path, source }
    })
}

fn build_section_model(section: &ModelSection) -> Result<HybridModel, ConfigError> {
    let model = match &section.builtin {
        Some(name) => {
            let explicit = [
                ("n", section.n.is_some()),
                ("m", section.m.is_some()),
                ("hamiltonians", !section.hamiltonians.is_empty()),
                ("couplings", !section.couplings.is_empty()),
            ];
            if let Some((field, _)) = explicit.iter().find(|(_, set)| *set) {
                return Err(ConfigError::schema(
                    format!("model.{field}"),
                    "cannot be combined with `builtin`",
                ));
            }
            let params = section.parameters.clone().unwrap_or_default();
            builtin_model(name, &params).map_err(|source| ConfigError::Model {
                path: match source {
                    ModelError::UnknownBuiltin(_) => "model.builtin".into(),
                    _ => "model.parameters".into(),
                },
                source,
            })?
        }
        None => {
            if section.parameters.is_some() {
                return Err(ConfigError::schema(
                    "model.parameters",
                    "only valid with `builtin`",
                ));
            }
            build_explicit(section)?
        }
    };
    match &section.labels {
        Some(labels) => model
            .with_labels(labels.clone())
            .map_err(|source| ConfigError::Model {
                path: "model.labels".into(),
                source,
            }),
        None => Ok(model),
    }
}

fn positive(value: f64, path: &str) -> Result<f64, ConfigError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(ConfigError::schema(
            path,
            format!("must be positive and finite, got {value}"),
        ))
    }
}

fn validate(raw: RawSpec) -> Result<SimulationSpec, ConfigError> {
    let model = build_section_model(&raw.model)?;

    let init = &raw.initial;
    if init.psi.len() != model.n() {
        return Err(ConfigError::schema(
            "initial.psi",
            format!(
                "expected {} amplitudes, found {}",
                model.n(),
                init.psi.len()
            ),
        ));
    }
    let alpha = check_label(init.alpha, model.m(), "initial.alpha".into())?;
    let psi: ComplexVector = init
        .psi
        .iter()
        .map(|&[re, im]| num_complex::Complex64::new(re, im))
        .collect::<Vec<_>>()
        .into();
    if !psi.is_finite() {
        return Err(ConfigError::schema(
            "initial.psi",
            "amplitudes must be finite",
        ));
    }
    let norm_sq = psi.norm_sq();
    if (norm_sq - 1.0).abs() > NORMALIZATION_WARN {
        log::warn!("initial.psi has squared norm {norm_sq}; normalizing");
    }
    let initial =
        PureHybridState::normalizing(psi, alpha).map_err(|source| ConfigError::Model {
            path: "initial.psi".into(),
            source,
        })?;

    let run = &raw.run;
    let t_end = run.t_end;
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(ConfigError::schema(
            "run.t_end",
            format!("must be finite and >= 0, got {t_end}"),
        ));
    }
    let scheme = match run.scheme {
        SchemeName::FixedDt => {
            let dt = run
                .dt
                .ok_or_else(|| ConfigError::schema("run.dt", "required by the fixed-dt scheme"))?;
            Scheme::FixedDt {
                dt: positive(dt, "run.dt")?,
            }
        }
        SchemeName::NormThreshold => {
            let defaults = NormThresholdOptions::default();
            Scheme::NormThreshold(NormThresholdOptions {
                ode_tol: positive(run.ode_tol.unwrap_or(defaults.ode_tol), "run.ode_tol")?,
                root_tol: positive(run.root_tol.unwrap_or(defaults.root_tol), "run.root_tol")?,
            })
        }
    };
    let sample_times = run.sample_times.clone().unwrap_or_else(|| vec![t_end]);
    if let Some(k) = sample_times
        .iter()
        .position(|&s| !(0.0..=t_end).contains(&s))
    {
        return Err(ConfigError::schema(
            format!("run.sample_times[{k}]"),
            "must lie in [0, t_end]",
        ));
    }
    if let Some(k) = sample_times.windows(2).position(|w| w[0] > w[1]) {
        return Err(ConfigError::schema(
            format!("run.sample_times[{}]", k + 1),
            "sample times must be ascending",
        ));
    }
    let n_trajectories = run.n_trajectories.unwrap_or(DEFAULT_N_TRAJECTORIES);
    if n_trajectories == 0 {
        return Err(ConfigError::schema(
            "run.n_trajectories",
            "must be at least 1",
        ));
    }
    if run.master_seed > i64::MAX as u64 {
        return Err(ConfigError::schema(
            "run.master_seed",
            "must fit in a signed 64-bit integer",
        ));
    }
    let run = RunSpec {
        scheme,
        t_end,
        sample_times,
        n_trajectories,
        master_seed: run.master_seed,
        master_dt: positive(run.master_dt.unwrap_or(DEFAULT_MASTER_DT), "run.master_dt")?,
        bin_width: positive(run.bin_width.unwrap_or(DEFAULT_BIN_WIDTH), "run.bin_width")?,
    };
    if raw.outputs.formats.is_empty() {
        return Err(ConfigError::schema(
            "outputs.formats",
            "name at least one format",
        ));
    }
    Ok(SimulationSpec {
        raw,
        model,
        initial,
        run,
    })
}

#[cfg(test)]
mod tests;
