// Copyright 2026 The eeqt Authors
// SPDX-License-Identifier: Apache-2.0

//! Hermitian eigenproblems via cyclic Jacobi on the real embedding.
//!
//! A Hermitian `A = R + iS` is mapped to the real symmetric
//! `M = [[R, -S], [S, R]]`, whose spectrum is that of `A` with every
//! eigenvalue doubled. If `[x; y]` is an eigenvector of `M` then `x + iy`
//! is an eigenvector of `A` for the same eigenvalue.

use num_complex::Complex64;

use super::{ComplexMatrix, ComplexVector};

const MAX_SWEEPS: usize = 64;

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors, `vectors[k]` belonging to `values[k]`.
    pub vectors: Vec<ComplexVector>,
}

impl HermitianEigen {
    /// Rebuilds `sum_k f(lambda_k) |v_k><v_k|`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let n = self.values.len();
        let mut out = ComplexMatrix::zeros(n, n);
        for (&lambda, v) in self.values.iter().zip(&self.vectors) {
            out.add_scaled_assign(f(lambda), &ComplexMatrix::outer(v, v));
        }
        out
    }
}

/// Ascending eigenvalues of the Hermitian part of `a`.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Vec<f64> {
    let (values, _) = jacobi_embedded(a, false);
    values.into_iter().step_by(2).collect()
}

/// Full eigen-decomposition of the Hermitian part of `a`.
pub fn hermitian_eigen(a: &ComplexMatrix) -> HermitianEigen {
    let n = a.rows();
    let (values, vectors) = jacobi_embedded(a, true);
    let candidates: Vec<(f64, ComplexVector)> = values
        .iter()
        .zip(vectors.chunks(2 * n))
        .map(|(&lambda, col)| {
            let v = (0..n)
                .map(|i| Complex64::new(col[i], col[n + i]))
                .collect::<Vec<_>>();
            (lambda, ComplexVector::from(v))
        })
        .collect();

    // Each complex eigenline shows up twice (as v and iv). Greedy pivoted
    // Gram-Schmidt keeps one orthonormal representative per line.
    let mut chosen: Vec<(f64, ComplexVector)> = Vec::with_capacity(n);
    let mut used = vec![false; candidates.len()];
    for _ in 0..n {
        let mut best: Option<(usize, ComplexVector, f64)> = None;
        for (idx, (_, cand)) in candidates.iter().enumerate() {
            if used[idx] {
                continue;
            }
            let mut r = cand.clone();
            for (_, q) in &chosen {
                let overlap: Complex64 = q.iter().zip(r.iter()).map(|(a, b)| a.conj() * b).sum();
                r = r.add_scaled(-overlap, q);
            }
            let norm = r.norm();
            if best.as_ref().is_none_or(|(_, _, bn)| norm > *bn) {
                best = Some((idx, r, norm));
            }
        }
        let (idx, r, _) = best.expect("fewer candidates than dimension");
        used[idx] = true;
        let v = r.normalized().expect("degenerate eigenvector candidate");
        chosen.push((candidates[idx].0, v));
    }
    chosen.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (values, vectors) = chosen.into_iter().unzip();
    HermitianEigen { values, vectors }
}

/// Returns ascending eigenvalues of the embedding and, if requested, the
/// matching eigenvectors stored column after column.
fn jacobi_embedded(a: &ComplexMatrix, want_vectors: bool) -> (Vec<f64>, Vec<f64>) {
    assert!(a.is_square(), "eigenvalues of a non-square matrix");
    let n = a.rows();
    let dim = 2 * n;
    let h = a.hermitian_part();
    let mut m = vec![0.0; dim * dim];
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            m[i * dim + j] = z.re;
            m[(n + i) * dim + (n + j)] = z.re;
            m[i * dim + (n + j)] = -z.im;
            m[(n + i) * dim + j] = z.im;
        }
    }
    let mut v = if want_vectors {
        let mut v = vec![0.0; dim * dim];
        for i in 0..dim {
            v[i * dim + i] = 1.0;
        }
        v
    } else {
        Vec::new()
    };

    let scale = m.iter().map(|x| x * x).sum::<f64>();
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..dim)
            .flat_map(|i| (0..dim).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * dim + j] * m[i * dim + j])
            .sum();
        if off <= f64::EPSILON * f64::EPSILON * scale || off == 0.0 {
            break;
        }
        for p in 0..dim {
            for q in (p + 1)..dim {
                let apq = m[p * dim + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q * dim + q] - m[p * dim + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..dim {
                    let akp = m[k * dim + p];
                    let akq = m[k * dim + q];
                    m[k * dim + p] = c * akp - s * akq;
                    m[k * dim + q] = s * akp + c * akq;
                }
                for k in 0..dim {
                    let apk = m[p * dim + k];
                    let aqk = m[q * dim + k];
                    m[p * dim + k] = c * apk - s * aqk;
                    m[q * dim + k] = s * apk + c * aqk;
                }
                if want_vectors {
                    for k in 0..dim {
                        let vkp = v[k * dim + p];
                        let vkq = v[k * dim + q];
                        v[k * dim + p] = c * vkp - s * vkq;
                        v[k * dim + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| m[i * dim + i].total_cmp(&m[j * dim + j]));
    let values = order.iter().map(|&i| m[i * dim + i]).collect();
    let vectors = if want_vectors {
        order
            .iter()
            .flat_map(|&col| (0..dim).map(move |row| (row, col)))
            .map(|(row, col)| v[row * dim + col])
            .collect()
    } else {
        Vec::new()
    };
    (values, vectors)
}
