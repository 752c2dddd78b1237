// Copyright 2026 The eeqt Authors
// SPDX-License-Identifier: Apache-2.0

//! Model definition: Hamiltonians `H_α`, couplings `g_βα`, and the
//! operators derived from them.
//!
//! Index convention: `g_βα` maps the α-sector into the β-sector, so it
//! drives the event `α → β`. The damping operator of sector α collects the
//! couplings that leave α,
//!
//! ```text
//! Λ_α = Σ_β g_βα* g_βα,
//! ```
//!
//! and the deterministic flow between events is generated by
//! `K_α = -i H_α - Λ_α / 2`.

mod builtin;
pub mod random;
mod schedule;
mod state;

pub use builtin::{builtin_model, BuiltinParams, BUILTIN_NAMES};
pub use schedule::Schedule;
pub use state::{EventRecord, PureHybridState, Sector, NORM_TOLERANCE};

use thiserror::Error;

use crate::linalg::{inner, re, ComplexMatrix, ComplexVector, LinalgError, I};

/// Hermiticity tolerance applied to every Hamiltonian value.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Slack below zero tolerated in `<ψ, Λ ψ>` before it counts as a broken Λ.
const RATE_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("Hamiltonian H_{alpha} is not Hermitian at t = {t}")]
    NonHermitianHamiltonian { alpha: Sector, t: f64 },
    #[error("diagonal coupling g_{alpha}{alpha} must vanish identically")]
    NonzeroDiagonalCoupling { alpha: Sector },
    #[error("dimension mismatch in {component}: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        component: String,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("{component} has non-finite entries")]
    NonFinite { component: String },
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("classical state {alpha} out of range 1..={m}")]
    SectorOutOfRange { alpha: usize, m: usize },
    #[error("no jump possible out of sector {alpha}: total rate is zero")]
    NoJumpPossible { alpha: Sector },
    #[error("negative jump rate {rate} in sector {alpha}")]
    NegativeRate { alpha: Sector, rate: f64 },
    #[error("state vector has squared norm {norm_sq}, expected 1")]
    NotNormalized { norm_sq: f64 },
    #[error("unknown built-in model '{0}'")]
    UnknownBuiltin(String),
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("{count} labels given for {m} classical states")]
    LabelCount { count: usize, m: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// The `m × m` array of coupling schedules; absent entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingFamily {
    m: usize,
    entries: Vec<Option<Schedule<ComplexMatrix>>>,
}

impl CouplingFamily {
    pub fn new(m: usize) -> Self {
        Self {
            m,
            entries: vec![None; m * m],
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Sets `g_{to,from}`, the coupling driving `from → to`. Panics when
    /// either index is out of range.
    pub fn set(&mut self, to: Sector, from: Sector, g: impl Into<Schedule<ComplexMatrix>>) {
        let k = self.slot(to, from);
        self.entries[k] = Some(g.into());
    }

    pub fn with(mut self, to: Sector, from: Sector, g: impl Into<Schedule<ComplexMatrix>>) -> Self {
        self.set(to, from, g);
        self
    }

    pub fn get(&self, to: Sector, from: Sector) -> Option<&Schedule<ComplexMatrix>> {
        self.entries[self.slot(to, from)].as_ref()
    }

    /// Iterates `(to, from, schedule)` over the present entries.
    pub fn iter(&self) -> impl Iterator<Item = (Sector, Sector, &Schedule<ComplexMatrix>)> {
        self.entries.iter().enumerate().filter_map(move |(k, e)| {
            e.as_ref().map(|s| {
                (
                    Sector::from_index(k / self.m),
                    Sector::from_index(k % self.m),
                    s,
                )
            })
        })
    }

    fn slot(&self, to: Sector, from: Sector) -> usize {
        assert!(
            to.index() < self.m && from.index() < self.m,
            "coupling index out of range"
        );
        to.index() * self.m + from.index()
    }
}

/// Operators in force on one interval between schedule breakpoints.
#[derive(Debug, Clone)]
pub(crate) struct Epoch {
    pub hamiltonians: Vec<ComplexMatrix>,
    /// `couplings[to * m + from]`; zero couplings are stored as `None`.
    pub couplings: Vec<Option<ComplexMatrix>>,
    pub lambdas: Vec<ComplexMatrix>,
    pub generators: Vec<ComplexMatrix>,
    /// Destinations reachable from each sector.
    pub destinations: Vec<Vec<Sector>>,
}

/// A validated model. Immutable after construction.
#[derive(Debug, Clone)]
pub struct HybridModel {
    n: usize,
    m: usize,
    labels: Vec<String>,
    hamiltonians: Vec<Schedule<ComplexMatrix>>,
    couplings: CouplingFamily,
    breakpoints: Vec<f64>,
    epochs: Vec<Epoch>,
}

/// Validates the families and precomputes `Λ_α` and `K_α` on every
/// interval between breakpoints.
pub fn build_model(
    n: usize,
    m: usize,
    hamiltonians: Vec<Schedule<ComplexMatrix>>,
    couplings: CouplingFamily,
) -> Result<HybridModel, ModelError> {
    if n == 0 || m == 0 {
        return Err(ModelError::DimensionMismatch {
            component: "model".into(),
            expected: (1, 1),
            found: (n, m),
        });
    }
    if hamiltonians.len() != m {
        return Err(ModelError::DimensionMismatch {
            component: "hamiltonians".into(),
            expected: (m, 1),
            found: (hamiltonians.len(), 1),
        });
    }
    if couplings.m() != m {
        return Err(ModelError::DimensionMismatch {
            component: "couplings".into(),
            expected: (m, m),
            found: (couplings.m(), couplings.m()),
        });
    }

    let check_values = |name: String, s: &Schedule<ComplexMatrix>| -> Result<(), ModelError> {
        s.validate()?;
        for v in s.values() {
            if v.shape() != (n, n) {
                return Err(ModelError::DimensionMismatch {
                    component: name,
                    expected: (n, n),
                    found: v.shape(),
                });
            }
            if !v.is_finite() {
                return Err(ModelError::NonFinite { component: name });
            }
        }
        Ok(())
    };
    for (a, h) in hamiltonians.iter().enumerate() {
        check_values(format!("H_{}", a + 1), h)?;
    }
    for (to, from, g) in couplings.iter() {
        check_values(format!("g_{to}{from}"), g)?;
        if to == from && g.values().iter().any(|v| !v.is_zero()) {
            return Err(ModelError::NonzeroDiagonalCoupling { alpha: to });
        }
    }

    let mut breakpoints: Vec<f64> = hamiltonians
        .iter()
        .flat_map(|h| h.breakpoints().iter().copied())
        .chain(
            couplings
                .iter()
                .flat_map(|(_, _, g)| g.breakpoints().iter().copied()),
        )
        .collect();
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();

    let epochs = (0..=breakpoints.len())
        .map(|k| {
            let t = representative_time(&breakpoints, k);
            make_epoch(n, m, &hamiltonians, &couplings, t)
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(HybridModel {
        n,
        m,
        labels: (1..=m).map(|a| a.to_string()).collect(),
        hamiltonians,
        couplings,
        breakpoints,
        epochs,
    })
}

/// A time inside interval `k` of the breakpoint partition; midpoints for
/// bounded intervals.
fn representative_time(breakpoints: &[f64], k: usize) -> f64 {
    match (k.checked_sub(1).map(|i| breakpoints[i]), breakpoints.get(k)) {
        (None, None) => 0.0,
        (None, Some(&end)) => {
            if end > 0.0 {
                end / 2.0
            } else {
                end - 1.0
            }
        }
        (Some(start), Some(&end)) => 0.5 * (start + end),
        (Some(start), None) => start,
    }
}

fn make_epoch(
    n: usize,
    m: usize,
    hamiltonians: &[Schedule<ComplexMatrix>],
    couplings: &CouplingFamily,
    t: f64,
) -> Result<Epoch, ModelError> {
    let mut hs = Vec::with_capacity(m);
    for (a, h) in hamiltonians.iter().enumerate() {
        let h = h.at(t);
        if !h.is_hermitian(HERMITIAN_TOLERANCE) {
            return Err(ModelError::NonHermitianHamiltonian {
                alpha: Sector::from_index(a),
                t,
            });
        }
        // Within tolerance; store the exactly Hermitian part.
        hs.push(h.hermitian_part());
    }
    let mut gs: Vec<Option<ComplexMatrix>> = vec![None; m * m];
    for (to, from, g) in couplings.iter() {
        let value = g.at(t);
        if to != from && !value.is_zero() {
            gs[to.index() * m + from.index()] = Some(value.clone());
        }
    }
    let mut lambdas = Vec::with_capacity(m);
    let mut generators = Vec::with_capacity(m);
    let mut destinations = Vec::with_capacity(m);
    for from in 0..m {
        let mut lambda = ComplexMatrix::zeros(n, n);
        let mut dest = Vec::new();
        for to in 0..m {
            if let Some(g) = &gs[to * m + from] {
                lambda = lambda.add(&g.adjoint().matmul(g));
                dest.push(Sector::from_index(to));
            }
        }
        // Exact Hermitian symmetry keeps K + K* = -Λ an identity.
        let lambda = lambda.hermitian_part();
        let generator = hs[from].scale(-I).add(&lambda.scale(re(-0.5)));
        lambdas.push(lambda);
        generators.push(generator);
        destinations.push(dest);
    }
    Ok(Epoch {
        hamiltonians: hs,
        couplings: gs,
        lambdas,
        generators,
        destinations,
    })
}

impl HybridModel {
    /// Quantum dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of classical states.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, ModelError> {
        if labels.len() != self.m {
            return Err(ModelError::LabelCount {
                count: labels.len(),
                m: self.m,
            });
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn hamiltonian_schedules(&self) -> &[Schedule<ComplexMatrix>] {
        &self.hamiltonians
    }

    pub fn coupling_schedules(&self) -> &CouplingFamily {
        &self.couplings
    }

    /// Sorted union of every schedule breakpoint.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Index of the breakpoint interval containing `t`.
    pub fn epoch_index(&self, t: f64) -> usize {
        self.breakpoints.partition_point(|&b| b <= t)
    }

    /// First breakpoint strictly after `t`, or infinity.
    pub fn next_breakpoint(&self, t: f64) -> f64 {
        self.breakpoints
            .get(self.epoch_index(t))
            .copied()
            .unwrap_or(f64::INFINITY)
    }

    pub(crate) fn epoch(&self, k: usize) -> &Epoch {
        &self.epochs[k]
    }

    pub(crate) fn epoch_at(&self, t: f64) -> &Epoch {
        &self.epochs[self.epoch_index(t)]
    }

    pub fn check_sector(&self, alpha: Sector) -> Result<(), ModelError> {
        if alpha.index() < self.m {
            Ok(())
        } else {
            Err(ModelError::SectorOutOfRange {
                alpha: alpha.label(),
                m: self.m,
            })
        }
    }

    pub fn hamiltonian(&self, alpha: Sector, t: f64) -> Result<&ComplexMatrix, ModelError> {
        self.check_sector(alpha)?;
        Ok(&self.epoch_at(t).hamiltonians[alpha.index()])
    }

    /// `g_{to,from}(t)`, or `None` when that coupling vanishes.
    pub fn coupling(
        &self,
        to: Sector,
        from: Sector,
        t: f64,
    ) -> Result<Option<&ComplexMatrix>, ModelError> {
        self.check_sector(to)?;
        self.check_sector(from)?;
        Ok(self.epoch_at(t).couplings[to.index() * self.m + from.index()].as_ref())
    }

    /// `Λ_α(t) = Σ_β g_βα(t)* g_βα(t)`: sums the couplings leaving α.
    pub fn lambda_operator(&self, alpha: Sector, t: f64) -> Result<&ComplexMatrix, ModelError> {
        self.check_sector(alpha)?;
        Ok(&self.epoch_at(t).lambdas[alpha.index()])
    }

    /// `K_α(t) = -i H_α(t) - Λ_α(t)/2`.
    pub fn effective_generator(&self, alpha: Sector, t: f64) -> Result<&ComplexMatrix, ModelError> {
        self.check_sector(alpha)?;
        Ok(&self.epoch_at(t).generators[alpha.index()])
    }

    /// Total jump rate `λ(ψ, α) = <ψ, Λ_α ψ>` for a unit vector `psi`.
    pub fn jump_rate(&self, psi: &ComplexVector, alpha: Sector, t: f64) -> Result<f64, ModelError> {
        debug_assert!(
            (psi.norm_sq() - 1.0).abs() < 1e-6,
            "jump_rate expects a unit vector"
        );
        let lambda = self.lambda_operator(alpha, t)?;
        let rate = inner(psi, &lambda.try_apply(psi)?)?.re;
        clamp_rate(rate, alpha)
    }

    /// Destination probabilities `p_β = ‖g_βα ψ‖² / λ(ψ, α)` over all β.
    ///
    /// The denominator is the sum of the numerators, which equals `λ(ψ, α)`
    /// by the definition of `Λ_α`; using it keeps the vector exactly
    /// normalized.
    pub fn jump_probabilities(
        &self,
        psi: &ComplexVector,
        alpha: Sector,
        t: f64,
    ) -> Result<Vec<f64>, ModelError> {
        self.check_sector(alpha)?;
        let epoch = self.epoch_at(t);
        let mut weights = vec![0.0; self.m];
        for &to in &epoch.destinations[alpha.index()] {
            let g = epoch.couplings[to.index() * self.m + alpha.index()]
                .as_ref()
                .expect("destination without coupling");
            weights[to.index()] = g.try_apply(psi)?.norm_sq();
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 || !total.is_finite() {
            return Err(ModelError::NoJumpPossible { alpha });
        }
        for w in &mut weights {
            *w /= total;
        }
        Ok(weights)
    }

    /// Every ordered pair `(from, to)` with `from ≠ to`: `m² - m` channels.
    pub fn event_channels(&self) -> Vec<(Sector, Sector)> {
        let m = self.m;
        (0..m)
            .flat_map(|a| (0..m).filter(move |&b| b != a).map(move |b| (a, b)))
            .map(|(a, b)| (Sector::from_index(a), Sector::from_index(b)))
            .collect()
    }

    /// Channels whose coupling is nonzero on at least one interval.
    pub fn active_channels(&self) -> Vec<(Sector, Sector)> {
        self.event_channels()
            .into_iter()
            .filter(|&(from, to)| {
                self.epochs
                    .iter()
                    .any(|e| e.couplings[to.index() * self.m + from.index()].is_some())
            })
            .collect()
    }

    /// The model with every coupling moved to the transposed slot,
    /// `g'_αβ = g_βα`. Used to check that a wrong index convention is
    /// detectable.
    pub fn with_transposed_couplings(&self) -> HybridModel {
        let mut family = CouplingFamily::new(self.m);
        for (to, from, g) in self.couplings.iter() {
            if to != from {
                family.set(from, to, g.clone());
            }
        }
        let model = build_model(self.n, self.m, self.hamiltonians.clone(), family)
            .expect("transposing couplings keeps a valid model valid");
        HybridModel {
            labels: self.labels.clone(),
            ..model
        }
    }
}

fn clamp_rate(rate: f64, alpha: Sector) -> Result<f64, ModelError> {
    if rate >= 0.0 {
        Ok(rate)
    } else if rate >= -RATE_GUARD {
        Ok(0.0)
    } else {
        Err(ModelError::NegativeRate { alpha, rate })
    }
}
