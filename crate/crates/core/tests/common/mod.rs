//! Oracles shared by the integration tests. Nothing here calls into the
//! crate's own quadrature or special functions.

#![allow(dead_code)]

use rand::Rng;
use statrs::function::beta::{beta, beta_reg};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

/// Double-exponential quadrature on `(a, b)`. Endpoint singularities of
/// algebraic type are fine; the integrand is never evaluated at `a` or `b`.
/// Abscissae next to `a = 0` keep full relative precision, those next to
/// `b` do not, so strong singularities belong at a zero left endpoint.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let half = 0.5 * (b - a);
    let tmax = 4.0;
    let eval = |t: f64| {
        let s = 0.5 * PI * t.sinh();
        // Distance to the nearer endpoint, formed without cancellation.
        let e = (-2.0 * s.abs()).exp();
        let dist = half * 2.0 * e / (1.0 + e);
        let x = if t >= 0.0 { b - dist } else { a + dist };
        if !(dist > 0.0 && x > a && x < b) {
            return 0.0;
        }
        f(x) * 0.5 * PI * t.cosh() / (s.cosh() * s.cosh())
    };
    let mut h = 0.5;
    let mut sum = eval(0.0);
    let mut k = 1;
    while k as f64 * h <= tmax {
        sum += eval(k as f64 * h) + eval(-(k as f64) * h);
        k += 1;
    }
    let mut prev = sum * h * half;
    for _ in 0..12 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= tmax {
            sum += eval(k as f64 * h) + eval(-(k as f64) * h);
            k += 2;
        }
        let cur = sum * h * half;
        if (cur - prev).abs() <= tol * cur.abs().max(1e-300) {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// `∫_a^∞ f` through `y = a / u`, `u ∈ (0, 1)`.
pub fn tanh_sinh_tail<F: Fn(f64) -> f64>(f: F, a: f64, tol: f64) -> f64 {
    tanh_sinh(|u| f(a / u) * a / (u * u), 0.0, 1.0, tol)
}

/// `A(d, α)` from the Gamma function of `statrs`.
pub fn levy_norm(d: usize, alpha: f64) -> f64 {
    let df = d as f64;
    alpha * 2f64.powf(alpha - 1.0) * gamma((df + alpha) / 2.0) / (PI.powf(df / 2.0) * gamma(1.0 - alpha / 2.0))
}

/// CDF of `|Y|/r` for the exit of a centered ball:
/// `(|Y|/r)² - 1 = B/(1-B)`, `B ~ Beta(1-α/2, α/2)`.
pub fn exit_radius_cdf(alpha: f64, t: f64) -> f64 {
    if t <= 1.0 {
        return 0.0;
    }
    beta_reg(1.0 - alpha / 2.0, alpha / 2.0, 1.0 - 1.0 / (t * t))
}

/// One-sample Kolmogorov–Smirnov statistic and asymptotic p-value.
pub fn ks_test<F: Fn(f64) -> f64>(xs: &mut [f64], cdf: F) -> (f64, f64) {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let c = cdf(x);
        d = d.max((i as f64 + 1.0) / n - c).max(c - i as f64 / n);
    }
    let lam = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let mut p = 0.0;
    for j in 1..200 {
        let j = j as f64;
        p += 2.0 * (-1f64).powf(j - 1.0) * (-2.0 * j * j * lam * lam).exp();
    }
    (d, p.clamp(0.0, 1.0))
}

/// Positive `β`-stable variable with `E e^{-sA} = e^{-s^β}` (Kanter).
pub fn positive_stable<R: Rng>(beta: f64, rng: &mut R) -> f64 {
    let u: f64 = PI * rng.random::<f64>();
    let e: f64 = -(1.0 - rng.random::<f64>()).ln();
    let a = (beta * u).sin() / u.sin().powf(1.0 / beta);
    let b = ((1.0 - beta) * u).sin() / e;
    a * b.powf((1.0 - beta) / beta)
}

pub fn normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Isotropic α-stable increment over time `dt` in `R^d` with exponent
/// `|ξ|^α`: `√A · N(0, 2I)` with `A` positive `α/2`-stable.
pub fn stable_increment<R: Rng>(d: usize, alpha: f64, dt: f64, rng: &mut R) -> Vec<f64> {
    let scale = dt.powf(1.0 / alpha) * (2.0 * positive_stable(alpha / 2.0, rng)).sqrt();
    (0..d).map(|_| scale * normal(rng)).collect()
}

/// Mean and standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

/// Exact Poisson kernel of the interval `(c - ρ, c + ρ)` in `d = 1`.
pub fn interval_poisson(alpha: f64, c: f64, rho: f64, x: f64, y: f64) -> f64 {
    let (x, y) = ((x - c) / rho, (y - c) / rho);
    let k = gamma(0.5) * PI.powf(-1.5) * (PI * alpha / 2.0).sin();
    k * ((1.0 - x * x) / (y * y - 1.0)).powf(alpha / 2.0) / (x - y).abs() / rho
}

/// `P_x(X(τ) ∈ [lo, hi])` for the interval `(c - ρ, c + ρ)`, `hi` may be
/// infinite; `[lo, hi]` must lie to the right of the interval.
pub fn interval_exit_mass(alpha: f64, c: f64, rho: f64, x: f64, lo: f64, hi: f64) -> f64 {
    let f = |y: f64| interval_poisson(alpha, c, rho, x, y);
    if hi.is_infinite() {
        tanh_sinh_tail(f, lo, 1e-13)
    } else {
        tanh_sinh(f, lo, hi, 1e-13)
    }
}

/// Green function of `B(0, 1)` for `α < d` from the incomplete beta
/// function of `statrs`. Near the pole the regularized integral is taken
/// through its complement, whose argument `1/(1+w)` is exact.
pub fn green_oracle(d: usize, alpha: f64, x: &[f64], y: &[f64]) -> f64 {
    let df = d as f64;
    let n2 = |v: &[f64]| v.iter().map(|c| c * c).sum::<f64>();
    let dist2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    if dist2 == 0.0 {
        return 0.0;
    }
    let w = (1.0 - n2(x)) * (1.0 - n2(y)) / dist2;
    let (a, b) = (alpha / 2.0, (df - alpha) / 2.0);
    let reg = if !w.is_finite() {
        1.0
    } else if w < 1.0 {
        beta_reg(a, b, (w / (1.0 + w)).clamp(0.0, 1.0))
    } else {
        1.0 - beta_reg(b, a, (1.0 / (1.0 + w)).clamp(0.0, 1.0))
    };
    let kappa = gamma(df / 2.0) / (2f64.powf(alpha) * PI.powf(df / 2.0) * gamma(alpha / 2.0).powi(2));
    kappa * dist2.powf((alpha - df) / 2.0) * beta(a, b) * reg
}
