use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// A Monte Carlo result: the universal return type of stochastic operations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    /// Sample standard deviation over `√n`.
    pub stderr: f64,
    pub n: u64,
    pub seed: u64,
}

impl Estimate {
    /// A deterministic value (zero error).
    pub fn exact(value: f64, seed: u64) -> Self {
        Estimate {
            mean: value,
            stderr: 0.0,
            n: 0,
            seed,
        }
    }

    pub fn scaled(self, k: f64) -> Self {
        Estimate {
            mean: self.mean * k,
            stderr: self.stderr * math::abs(k),
            ..self
        }
    }

    /// Sum of two independent estimates.
    pub fn plus(self, other: Estimate) -> Self {
        Estimate {
            mean: self.mean + other.mean,
            stderr: math::hypot(self.stderr, other.stderr),
            n: self.n.max(other.n),
            seed: self.seed,
        }
    }

    /// Ratio of independent estimates by the delta method.
    pub fn ratio(self, den: Estimate) -> Self {
        let q = self.mean / den.mean;
        let rel = math::hypot(self.stderr / self.mean, den.stderr / den.mean);
        Estimate {
            mean: q,
            stderr: math::abs(q) * if rel.is_finite() { rel } else { 0.0 },
            n: self.n.min(den.n),
            seed: self.seed,
        }
    }

    /// `|a - b|` measured in combined standard errors.
    pub fn z_score(&self, other: &Estimate) -> f64 {
        let s = math::hypot(self.stderr, other.stderr);
        let d = math::abs(self.mean - other.mean);
        if s == 0.0 {
            if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            d / s
        }
    }

    /// True if `value` lies within `k` standard errors of the mean.
    pub fn covers(&self, value: f64, k: f64) -> bool {
        math::abs(self.mean - value) <= k * self.stderr
    }
}

/// Streaming first and second moments of a vector-valued sample, including
/// cross moments so that ratios of jointly estimated quantities carry the
/// right error. Merging follows Chan et al.; merging in a fixed order makes
/// the result independent of how the sample was split.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    n: u64,
    mean: Vec<f64>,
    co: Vec<f64>,
}

impl Moments {
    pub fn new(k: usize) -> Self {
        Moments {
            n: 0,
            mean: vec![0.0; k],
            co: vec![0.0; k * k],
        }
    }

    pub fn width(&self) -> usize {
        self.mean.len()
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn push(&mut self, x: &[f64]) {
        let k = self.mean.len();
        debug_assert_eq!(x.len(), k);
        self.n += 1;
        let n = self.n as f64;
        // co_ij += (x_i - old mean_i) (x_j - new mean_j)
        let mut stack = [0.0f64; 8];
        let mut heap = Vec::new();
        let d: &mut [f64] = if k <= 8 {
            &mut stack[..k]
        } else {
            heap.resize(k, 0.0);
            &mut heap
        };
        for ((di, xi), mi) in d.iter_mut().zip(x).zip(self.mean.iter_mut()) {
            *di = xi - *mi;
            *mi += *di / n;
        }
        for (i, di) in d.iter().enumerate() {
            for (j, (xj, mj)) in x.iter().zip(&self.mean).enumerate() {
                self.co[i * k + j] += di * (xj - mj);
            }
        }
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = other.clone();
            return;
        }
        let k = self.mean.len();
        let na = self.n as f64;
        let nb = other.n as f64;
        let n = na + nb;
        let d: Vec<f64> = (0..k).map(|i| other.mean[i] - self.mean[i]).collect();
        for (i, di) in d.iter().enumerate() {
            for (j, dj) in d.iter().enumerate() {
                self.co[i * k + j] += other.co[i * k + j] + di * dj * na * nb / n;
            }
        }
        for (m, di) in self.mean.iter_mut().zip(&d) {
            *m += di * nb / n;
        }
        self.n += other.n;
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.mean[i]
    }

    /// Covariance between the sample means of components `i` and `j`.
    pub fn cov_of_means(&self, i: usize, j: usize) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let k = self.mean.len();
        let n = self.n as f64;
        self.co[i * k + j] / (n * (n - 1.0))
    }

    pub fn estimate(&self, i: usize, seed: u64) -> Estimate {
        let v = self.cov_of_means(i, i).max(0.0);
        Estimate {
            mean: self.mean[i],
            stderr: math::sqrt(v),
            n: self.n,
            seed,
        }
    }

    /// `mean_i / mean_j` with delta-method error that accounts for the
    /// correlation between the two components.
    pub fn ratio(&self, i: usize, j: usize, seed: u64) -> Estimate {
        let a = self.mean[i];
        let b = self.mean[j];
        let q = a / b;
        let var = (self.cov_of_means(i, i) - 2.0 * q * self.cov_of_means(i, j) + q * q * self.cov_of_means(j, j)) / (b * b);
        Estimate {
            mean: q,
            stderr: math::sqrt(var.max(0.0)),
            n: self.n,
            seed,
        }
    }
}
