//! Small statistical toolkit: Kolmogorov-Smirnov, least-squares slopes and
//! the batch jackknife.

use alloc::vec::Vec;

use crate::math;
use crate::special;

/// Two-sided KS distance between a sample and a continuous CDF. Sorts `xs`.
pub fn ks_statistic<F: Fn(f64) -> f64>(xs: &mut [f64], cdf: F) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// Asymptotic Kolmogorov p-value with Stephens' small-sample correction.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = math::sqrt(n as f64);
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut q = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = sign * math::exp(-2.0 * kf * kf * lambda * lambda);
        q += term;
        if math::abs(term) < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * q).clamp(0.0, 1.0)
}

/// Coefficients `c` with `slope = Σ c_k y_k` for the ordinary least-squares
/// line through `(x_k, y_k)`.
pub fn ols_slope_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    x.iter().map(|v| (v - mx) / sxx).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope from the residual scatter.
    pub slope_se: f64,
}

/// Ordinary least squares with residual-based slope error.
pub fn ols(x: &[f64], y: &[f64]) -> LineFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_se = if x.len() > 2 {
        let rss: f64 = x
            .iter()
            .zip(y)
            .map(|(a, b)| {
                let e = b - intercept - slope * a;
                e * e
            })
            .sum();
        math::sqrt(rss / (n - 2.0) / sxx)
    } else {
        f64::NAN
    };
    LineFit {
        slope,
        intercept,
        slope_se,
    }
}

/// Standard error from leave-one-batch-out replicates of a statistic.
pub fn jackknife_se(replicates: &[f64]) -> f64 {
    let b = replicates.len() as f64;
    let m = replicates.iter().sum::<f64>() / b;
    let ss: f64 = replicates.iter().map(|t| (t - m) * (t - m)).sum();
    math::sqrt((b - 1.0) / b * ss)
}

/// Two-sided `1 - level` Student-t critical value.
pub fn t_critical(level: f64, dof: f64) -> f64 {
    special::student_t_quantile(1.0 - (1.0 - level) / 2.0, dof)
}
