// Copyright 2026 The eeqt Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra for small operators.
//!
//! Everything here is sized for the few-level systems the simulator works
//! with (quantum dimension up to a few dozen). Storage is dense and
//! row-major; there is no sparse path.

mod eigen;
mod expm;
mod matrix;
mod vector;

pub use eigen::{hermitian_eigen, hermitian_eigenvalues, HermitianEigen};
pub use expm::{expm, expm_apply};
pub use matrix::ComplexMatrix;
pub use vector::ComplexVector;

pub use num_complex::Complex64;

use thiserror::Error;

/// Errors raised by the linear-algebra layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("{op} requires a square matrix, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },
    #[error("non-finite value encountered in {op}")]
    NonFinite { op: &'static str },
    #[error("invalid shape: {0}")]
    InvalidShape(String),
}

/// Imaginary unit.
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Shorthand for a purely real complex number.
#[inline]
pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Commutator `AB - BA`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    check_square_pair("commutator", a, b)?;
    Ok(a.matmul(b).sub(&b.matmul(a)))
}

/// Anticommutator `AB + BA`.
pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    check_square_pair("anticommutator", a, b)?;
    Ok(a.matmul(b).add(&b.matmul(a)))
}

fn check_square_pair(
    op: &'static str,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
) -> Result<(), LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            op,
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if a.shape() != b.shape() {
        return Err(LinalgError::DimensionMismatch {
            op,
            left: a.shape(),
            right: b.shape(),
        });
    }
    Ok(())
}

/// Conjugate-linear in the first argument.
pub fn inner(u: &ComplexVector, v: &ComplexVector) -> Result<Complex64, LinalgError> {
    if u.dim() != v.dim() {
        return Err(LinalgError::DimensionMismatch {
            op: "inner",
            left: (u.dim(), 1),
            right: (v.dim(), 1),
        });
    }
    Ok(u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum())
}

/// Pauli matrices, used throughout tests and the built-in models.
pub mod pauli {
    use super::{re, ComplexMatrix, I};

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[[re(0.0), re(1.0)], [re(1.0), re(0.0)]])
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[[re(0.0), -I], [I, re(0.0)]])
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[[re(1.0), re(0.0)], [re(0.0), re(-1.0)]])
    }
}
