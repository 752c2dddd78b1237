// Copyright 2026 The eeqt Authors
// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64;

use crate::linalg::{hermitian_eigenvalues, re, ComplexMatrix};
use crate::model::{PureHybridState, Sector};

use super::MasterError;

/// Hermiticity tolerance for hybrid states and observables.
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Allowed deviation of the total trace from 1.
pub const TRACE_TOL: f64 = 1e-9;
/// Most negative eigenvalue accepted in a density block.
pub const POSITIVITY_TOL: f64 = 1e-7;

/// A block-diagonal operator `diag(X_1, ..., X_m)` with `n × n` blocks.
///
/// This is the raw carrier for hybrid states, observables, and their time
/// derivatives; it enforces shape only.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDiagonal {
    blocks: Vec<ComplexMatrix>,
}

impl BlockDiagonal {
    pub fn new(blocks: Vec<ComplexMatrix>) -> Result<Self, MasterError> {
        let n = blocks.first().map(|b| b.rows()).ok_or_else(|| {
            MasterError::InvalidState("a hybrid operator needs at least one block".into())
        })?;
        if let Some((a, b)) = blocks.iter().enumerate().find(|(_, b)| b.shape() != (n, n)) {
            return Err(MasterError::DimensionMismatch(format!(
                "block {} is {:?}, expected ({n}, {n})",
                a + 1,
                b.shape()
            )));
        }
        Ok(Self { blocks })
    }

    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            blocks: vec![ComplexMatrix::zeros(n, n); m],
        }
    }

    pub fn n(&self) -> usize {
        self.blocks[0].rows()
    }

    pub fn m(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[ComplexMatrix] {
        &self.blocks
    }

    pub fn block(&self, alpha: Sector) -> &ComplexMatrix {
        &self.blocks[alpha.index()]
    }

    pub(crate) fn blocks_mut(&mut self) -> &mut [ComplexMatrix] {
        &mut self.blocks
    }

    pub fn into_blocks(self) -> Vec<ComplexMatrix> {
        self.blocks
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, s: f64, other: &Self) -> Self {
        let mut out = self.clone();
        for (a, b) in out.blocks.iter_mut().zip(&other.blocks) {
            a.add_scaled_assign(re(s), b);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_scaled(-1.0, other)
    }

    pub fn hermitian_part(&self) -> Self {
        Self {
            blocks: self
                .blocks
                .iter()
                .map(ComplexMatrix::hermitian_part)
                .collect(),
        }
    }

    /// `Σ_α Tr X_α`.
    pub fn total_trace(&self) -> Complex64 {
        self.blocks.iter().map(ComplexMatrix::trace).sum()
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.n() == other.n() && self.m() == other.m()
    }

    /// Sector and value of the smallest eigenvalue over all blocks.
    /// Blocks are assumed Hermitian.
    pub fn min_eigenvalue(&self) -> (Sector, f64) {
        self.blocks
            .iter()
            .enumerate()
            .map(|(a, b)| (Sector::from_index(a), hermitian_eigenvalues(b)[0]))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("at least one block")
    }
}

/// Statistical state `ρ = diag(ρ_1, ..., ρ_m)`: Hermitian positive blocks
/// with `Σ_α Tr ρ_α = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridDensityState(BlockDiagonal);

impl HybridDensityState {
    pub fn new(blocks: Vec<ComplexMatrix>) -> Result<Self, MasterError> {
        Self::from_blocks(BlockDiagonal::new(blocks)?)
    }

    pub fn from_blocks(blocks: BlockDiagonal) -> Result<Self, MasterError> {
        for (a, b) in blocks.blocks().iter().enumerate() {
            if !b.is_hermitian(HERMITIAN_TOL) {
                return Err(MasterError::InvalidState(format!(
                    "block {} is not Hermitian",
                    a + 1
                )));
            }
        }
        let trace = blocks.total_trace();
        if (trace - re(1.0)).norm() > TRACE_TOL {
            return Err(MasterError::InvalidState(format!(
                "total trace is {trace}, expected 1"
            )));
        }
        let (sector, min_eigenvalue) = blocks.min_eigenvalue();
        if min_eigenvalue < -POSITIVITY_TOL {
            return Err(MasterError::InvalidState(format!(
                "block {sector} has eigenvalue {min_eigenvalue:e}"
            )));
        }
        Ok(Self(blocks))
    }

    /// `|ψ><ψ|` placed in block α.
    pub fn from_pure(state: &PureHybridState, m: usize) -> Result<Self, MasterError> {
        let n = state.psi.dim();
        let mut blocks = BlockDiagonal::zeros(n, m);
        if state.alpha.index() >= m {
            return Err(MasterError::InvalidState(format!(
                "classical state {} out of range 1..={m}",
                state.alpha
            )));
        }
        blocks.blocks_mut()[state.alpha.index()] = ComplexMatrix::outer(&state.psi, &state.psi);
        Self::from_blocks(blocks)
    }

    pub fn as_blocks(&self) -> &BlockDiagonal {
        &self.0
    }

    pub fn blocks(&self) -> &[ComplexMatrix] {
        self.0.blocks()
    }

    pub fn block(&self, alpha: Sector) -> &ComplexMatrix {
        self.0.block(alpha)
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn m(&self) -> usize {
        self.0.m()
    }

    /// Sector and value of the smallest eigenvalue over all blocks.
    pub fn min_eigenvalue(&self) -> (Sector, f64) {
        self.0.min_eigenvalue()
    }
}

/// Observable `A = diag(A_1, ..., A_m)` with Hermitian blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridObservable(BlockDiagonal);

impl HybridObservable {
    pub fn new(blocks: Vec<ComplexMatrix>) -> Result<Self, MasterError> {
        Self::from_blocks(BlockDiagonal::new(blocks)?)
    }

    pub fn from_blocks(blocks: BlockDiagonal) -> Result<Self, MasterError> {
        for (a, b) in blocks.blocks().iter().enumerate() {
            if !b.is_hermitian(HERMITIAN_TOL) {
                return Err(MasterError::InvalidState(format!(
                    "observable block {} is not Hermitian",
                    a + 1
                )));
            }
        }
        Ok(Self(blocks))
    }

    /// The identity `I ⊗ 1`.
    pub fn identity(n: usize, m: usize) -> Self {
        Self(BlockDiagonal {
            blocks: vec![ComplexMatrix::identity(n); m],
        })
    }

    /// The classical pointer observable `δ_{α,beta} I`: indicator of sector `beta`.
    pub fn pointer(n: usize, m: usize, beta: Sector) -> Self {
        let mut blocks = BlockDiagonal::zeros(n, m);
        blocks.blocks_mut()[beta.index()] = ComplexMatrix::identity(n);
        Self(blocks)
    }

    /// A purely quantum observable `a` repeated in every sector.
    pub fn quantum(a: &ComplexMatrix, m: usize) -> Result<Self, MasterError> {
        Self::new(vec![a.clone(); m])
    }

    pub fn as_blocks(&self) -> &BlockDiagonal {
        &self.0
    }

    pub fn blocks(&self) -> &[ComplexMatrix] {
        self.0.blocks()
    }
}
