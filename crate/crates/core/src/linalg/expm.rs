// Copyright 2026 The eeqt Authors
// SPDX-License-Identifier: Apache-2.0

//! Matrix exponential by scaling and squaring of a truncated Taylor series.
//!
//! The argument is scaled by `2^-s` until its 1-norm is at most 1/2, the
//! order-16 Taylor polynomial is evaluated in Horner form, and the result is
//! squared `s` times. At norm 1/2 the truncation remainder is below 1e-19,
//! so the rounding of the squaring phase dominates. The procedure is fully
//! deterministic and independent of the dimension.

use num_complex::Complex64;

use super::{ComplexMatrix, ComplexVector, LinalgError};

const TAYLOR_ORDER: u32 = 16;
const SCALED_NORM_BOUND: f64 = 0.5;

/// `exp(A)` for square `A`.
pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            op: "expm",
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite { op: "expm" });
    }
    let n = a.rows();
    let norm = a.one_norm();
    let squarings = if norm > SCALED_NORM_BOUND {
        (norm / SCALED_NORM_BOUND).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a.scale(Complex64::new(2f64.powi(-squarings), 0.0));

    // I + A(I + A/2(I + A/3(... (I + A/N))))
    let identity = ComplexMatrix::identity(n);
    let mut acc = identity.clone();
    for k in (1..=TAYLOR_ORDER).rev() {
        acc = scaled
            .matmul(&acc)
            .scale(Complex64::new(1.0 / f64::from(k), 0.0));
        acc = acc.add(&identity);
    }
    for _ in 0..squarings {
        acc = acc.matmul(&acc);
    }
    if !acc.is_finite() {
        return Err(LinalgError::NonFinite { op: "expm" });
    }
    Ok(acc)
}

/// `exp(K t) v`.
pub fn expm_apply(
    k: &ComplexMatrix,
    v: &ComplexVector,
    t: f64,
) -> Result<ComplexVector, LinalgError> {
    if !t.is_finite() || !v.is_finite() {
        return Err(LinalgError::NonFinite { op: "expm_apply" });
    }
    if k.cols() != v.dim() {
        return Err(LinalgError::DimensionMismatch {
            op: "expm_apply",
            left: k.shape(),
            right: (v.dim(), 1),
        });
    }
    let propagator = expm(&k.scale(Complex64::new(t, 0.0)))?;
    Ok(propagator.apply(v))
}
