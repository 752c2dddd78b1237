// Copyright 2026 The eeqt Authors
// SPDX-License-Identifier: Apache-2.0

//! Small statistical helpers for waiting-time checks.

/// Asymptotic Kolmogorov-Smirnov coefficient at the 1% level.
pub const KS_COEFF_1PCT: f64 = 1.63;

/// Count, mean, and unbiased variance of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
}

impl Summary {
    /// Two-pass computation in slice order. Empty input gives NaN moments.
    pub fn of(xs: &[f64]) -> Self {
        let count = xs.len();
        if count == 0 {
            return Self {
                count,
                mean: f64::NAN,
                variance: f64::NAN,
            };
        }
        let mean = xs.iter().sum::<f64>() / count as f64;
        let variance = if count > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64
        } else {
            0.0
        };
        Self {
            count,
            mean,
            variance,
        }
    }

    pub fn std_error(&self) -> f64 {
        (self.variance / self.count as f64).sqrt()
    }
}

/// Fixed-width histogram starting at 0. Values past the last bin extend it.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_width: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(bin_width: f64, xs: &[f64]) -> Self {
        assert!(bin_width > 0.0, "bin width must be positive");
        let mut counts = Vec::new();
        for &x in xs {
            let k = (x / bin_width).floor().max(0.0) as usize;
            if k >= counts.len() {
                counts.resize(k + 1, 0);
            }
            counts[k] += 1;
        }
        Self { bin_width, counts }
    }

    /// `(left edge, count)` per bin.
    pub fn bins(&self) -> impl Iterator<Item = (f64, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .map(|(k, &c)| (k as f64 * self.bin_width, c))
    }
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// One-sample statistic `sup_x |F_n(x) - F(x)|` against a continuous CDF.
/// Infinite values (censored observations) count as never observed.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let v = sorted(xs);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        if !x.is_finite() {
            // F_n stays at i / n from here on while F -> 1.
            d = d.max(1.0 - i as f64 / n);
            break;
        }
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    d
}

/// Two-sample statistic `sup_x |F_a(x) - F_b(x)|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (a, b) = (sorted(a), sorted(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        if x.is_finite() {
            d = d.max((i as f64 / na - j as f64 / nb).abs());
        }
    }
    // Once one sample is exhausted among finite values, compare the rest.
    let finite_a = a.iter().filter(|x| x.is_finite()).count() as f64 / na;
    let finite_b = b.iter().filter(|x| x.is_finite()).count() as f64 / nb;
    d.max((finite_a - finite_b).abs())
}

/// 1% critical value of the one-sample statistic for `n` observations.
pub fn ks_critical_1pct(n: usize) -> f64 {
    KS_COEFF_1PCT / (n as f64).sqrt()
}

/// 1% critical value of the two-sample statistic.
pub fn ks_critical_two_sample_1pct(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    KS_COEFF_1PCT * ((n + m) / (n * m)).sqrt()
}
