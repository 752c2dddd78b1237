// Copyright 2026 The eeqt Authors
// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use crate::linalg::ComplexVector;

use super::ModelError;

/// Classical pure state of the event recorder.
///
/// Labels are 1-based (`Sector::new(1)` is the first state); the stored
/// index is 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sector(usize);

impl Sector {
    /// Sector with 1-based `label`. Panics on 0.
    pub fn new(label: usize) -> Self {
        assert!(label >= 1, "classical state labels start at 1");
        Sector(label - 1)
    }

    pub fn from_index(index: usize) -> Self {
        Sector(index)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0
    }

    #[inline]
    pub fn label(self) -> usize {
        self.0 + 1
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Unit-norm tolerance for externally visible pure states.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// An individual system: unit vector `psi` plus classical state `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureHybridState {
    pub psi: ComplexVector,
    pub alpha: Sector,
}

impl PureHybridState {
    pub fn new(psi: ComplexVector, alpha: Sector) -> Result<Self, ModelError> {
        let norm_sq = psi.norm_sq();
        if !((1.0 - NORM_TOLERANCE)..=(1.0 + NORM_TOLERANCE)).contains(&norm_sq) {
            return Err(ModelError::NotNormalized { norm_sq });
        }
        Ok(Self { psi, alpha })
    }

    /// Normalizes `psi` first; fails only for zero or non-finite vectors.
    pub fn normalizing(psi: ComplexVector, alpha: Sector) -> Result<Self, ModelError> {
        let norm_sq = psi.norm_sq();
        let psi = psi
            .normalized()
            .ok_or(ModelError::NotNormalized { norm_sq })?;
        Ok(Self { psi, alpha })
    }
}

/// A change of classical state `from -> to` at `time`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord {
    pub time: f64,
    pub from: Sector,
    pub to: Sector,
}

impl EventRecord {
    pub fn new(time: f64, from: Sector, to: Sector) -> Self {
        debug_assert_ne!(from, to, "an event changes the classical state");
        Self { time, from, to }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sector_labels_are_one_based() {
        let s = Sector::new(2);
        assert_eq!(s.index(), 1);
        assert_eq!(s.to_string(), "2");
        assert_eq!(Sector::from_index(0), Sector::new(1));
    }

    #[test]
    #[should_panic]
    fn sector_zero_panics() {
        let _ = Sector::new(0);
    }

    #[test]
    fn pure_state_norm_check() {
        assert!(
            PureHybridState::new(ComplexVector::from_real(&[1.0, 1.0]), Sector::new(1)).is_err()
        );
        let s = PureHybridState::normalizing(ComplexVector::from_real(&[1.0, 1.0]), Sector::new(1))
            .unwrap();
        assert!((s.psi.norm_sq() - 1.0).abs() < 1e-15);
        assert!(PureHybridState::normalizing(ComplexVector::zeros(2), Sector::new(1)).is_err());
    }
}
