// Copyright 2026 The eeqt Authors
// SPDX-License-Identifier: Apache-2.0

//! Random valid models and states, for property tests and benchmarks.

use rand::Rng;

use crate::linalg::{Complex64, ComplexMatrix, ComplexVector};

use super::{build_model, CouplingFamily, HybridModel, Sector};

fn gaussian_like<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Sum of uniforms; shape is irrelevant here, only spread matters.
    (0..4).map(|_| rng.random::<f64>() - 0.5).sum()
}

/// Random complex matrix with Frobenius norm `norm` (which bounds the
/// operator norm).
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize, norm: f64) -> ComplexMatrix {
    let data = (0..n * n)
        .map(|_| Complex64::new(gaussian_like(rng), gaussian_like(rng)))
        .collect();
    let m = ComplexMatrix::from_vec(n, n, data).expect("n >= 1");
    let f = m.frobenius_norm();
    m.scale(Complex64::new(norm / f.max(f64::MIN_POSITIVE), 0.0))
}

/// Random Hermitian matrix with Frobenius norm at most `norm`.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize, norm: f64) -> ComplexMatrix {
    random_matrix(rng, n, norm).hermitian_part()
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexVector {
    loop {
        let v = ComplexVector::from(
            (0..n)
                .map(|_| Complex64::new(gaussian_like(rng), gaussian_like(rng)))
                .collect::<Vec<_>>(),
        );
        if let Some(u) = v.normalized() {
            return u;
        }
    }
}

/// Random density matrix of full rank (generically) and unit trace.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let a = random_matrix(rng, n, 1.0);
    let rho = a.matmul(&a.adjoint()).hermitian_part();
    let tr = rho.trace().re;
    rho.scale(Complex64::new(1.0 / tr, 0.0))
}

/// Random valid model: every `H_α` and every off-diagonal `g_βα` has
/// operator norm at most `norm_bound`. Roughly one coupling in five is
/// left out so that models with absent channels also occur.
pub fn random_model<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    m: usize,
    norm_bound: f64,
) -> HybridModel {
    let hamiltonians = (0..m)
        .map(|_| {
            let scale = norm_bound * rng.random::<f64>();
            random_hermitian(rng, n, scale).into()
        })
        .collect();
    let mut couplings = CouplingFamily::new(m);
    for to in 0..m {
        for from in 0..m {
            if to == from || rng.random::<f64>() < 0.2 {
                continue;
            }
            let scale = norm_bound * rng.random::<f64>();
            couplings.set(
                Sector::from_index(to),
                Sector::from_index(from),
                random_matrix(rng, n, scale),
            );
        }
    }
    build_model(n, m, hamiltonians, couplings).expect("random model is valid by construction")
}
