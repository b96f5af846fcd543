//! One-dimensional Lévy process with exponent `c1 ξ² + c2 |ξ|^α`, `1 < α < 2`,
//! on `D = (-1, 1) ∖ {0}`.
//!
//! With `c1 > 0` the process hits points, so `0` is a boundary point where
//! `f(x) = 2 E_x[|X(τ_D)|; X(τ_D) ≥ 1]` and `g(x) = f(-x)` are both
//! harmonic, positive and vanish at `0`, yet `f/g` has no limit at `0`.
//! Writing `u = (f - g)/2 = x` and `w = (f + g)/2`,
//! `f(x)/g(x) - f(-x)/g(-x) = 4 x w(x) / (w(x)² - x²)`, which stays away
//! from zero because `w(x)` is comparable to `|x|` near `0`.

use alloc::format;

use rand_core::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::estimate::{Estimate, Moments};
use crate::math;
use crate::par;
use crate::quad::{self, Tolerance};
use crate::rng::{exponential, uniform, uniform_open, Streams};

/// Step scale relative to the distance from the nearest barrier, at the
/// default `dt`.
const STEP_FRACTION: f64 = 0.2;
const DT_DEFAULT: f64 = 1e-5;
/// Largest step relative to `dt`.
const COARSEN: f64 = 1024.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureSpec {
    pub c1: f64,
    pub c2: f64,
    pub alpha: f64,
    /// Finest Euler step next to the barriers when `c1 > 0`. All steps scale
    /// with `dt`, so halving it halves every step.
    pub dt: f64,
    /// Half-width of the absorbing band around the puncture.
    pub eps0: f64,
    pub max_steps: u64,
}

impl MixtureSpec {
    pub fn new(c1: f64, c2: f64, alpha: f64) -> Result<Self> {
        let ms = MixtureSpec {
            c1,
            c2,
            alpha,
            dt: DT_DEFAULT,
            eps0: 1e-4,
            max_steps: 10_000_000,
        };
        ms.validate()?;
        Ok(ms)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 1.0 && self.alpha < 2.0) {
            return Err(Error::domain(format!("mixture index must lie in (1, 2), got {}", self.alpha)));
        }
        if !(self.c1 >= 0.0 && self.c1.is_finite()) || !(self.c2 > 0.0 && self.c2.is_finite()) {
            return Err(Error::domain("need c1 ≥ 0 and c2 > 0"));
        }
        if !(self.dt > 0.0 && self.dt < 1e-2) {
            return Err(Error::domain("dt must lie in (0, 0.01)"));
        }
        if !(self.eps0 > 0.0 && self.eps0 < 0.01) {
            return Err(Error::domain("eps0 must lie in (0, 0.01)"));
        }
        if self.max_steps == 0 {
            return Err(Error::domain("max_steps must be positive"));
        }
        Ok(())
    }

    pub fn with_dt(self, dt: f64) -> Self {
        MixtureSpec { dt, ..self }
    }

    pub fn with_eps0(self, eps0: f64) -> Self {
        MixtureSpec { eps0, ..self }
    }

    pub fn char_exponent(&self, xi: f64) -> f64 {
        self.c1 * xi * xi + self.c2 * math::powf(math::abs(xi), self.alpha)
    }

    /// `v(x) = (1/π) ∫_0^∞ (1 - cos xξ) / ψ(ξ) dξ`.
    pub fn compensated_potential(&self, x: f64) -> Result<f64> {
        let ax = math::abs(x);
        if ax == 0.0 {
            return Ok(0.0);
        }
        let tol = Tolerance::new(1e-12, 1e-10);
        let psi = |xi: f64| self.char_exponent(xi);
        // First zero of cos(xξ); beyond it the cosine part is an alternating
        // series of lobes.
        let a = math::FRAC_PI_2 / ax;
        let head = quad::integrate(
            |xi: f64| {
                if xi == 0.0 {
                    0.0
                } else {
                    (1.0 - math::cos(ax * xi)) / psi(xi)
                }
            },
            0.0,
            a,
            tol,
        )?;
        let tail = quad::integrate_tail(|xi| 1.0 / psi(xi), a, tol)?;
        let osc = quad::integrate_oscillatory_tail(|xi| math::cos(ax * xi) / psi(xi), a, math::PI / ax, tol)?;
        let v = (head.value + tail.value - osc.value) / math::PI;
        if !v.is_finite() {
            return Err(Error::Numeric(format!("compensated potential diverged at x={x}")));
        }
        Ok(v)
    }

    /// Step whose typical displacement is `STEP_FRACTION · dist` at the
    /// default `dt`.
    fn step_dt(&self, dist: f64) -> f64 {
        let l = STEP_FRACTION * dist;
        let mut t = math::powf(l, self.alpha) / self.c2;
        if self.c1 > 0.0 {
            t = t.min(l * l / (2.0 * self.c1));
        }
        // With a diffusion part, crossings of the puncture are caught by the
        // Gaussian bridge and `dt` is a floor. Without one the puncture can
        // only be hit by landing in the band, so steps keep shrinking with
        // the distance all the way down to `eps0`.
        let lo = if self.c1 > 0.0 { 1.0 } else { 0.0 };
        self.dt * (t / DT_DEFAULT).clamp(lo, COARSEN)
    }
}

/// Standard symmetric α-stable variate (`E e^{iξS} = e^{-|ξ|^α}`) by the
/// Chambers–Mallows–Stuck method.
pub fn sample_symmetric_stable<R: RngCore + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let v = math::PI * (uniform_open(rng) - 0.5);
    let w = exponential(rng);
    if alpha == 1.0 {
        return math::tan(v);
    }
    let cv = math::cos(v);
    math::sin(alpha * v) / math::powf(cv, 1.0 / alpha) * math::powf(math::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha)
}

/// One increment over time `dt`: `N(0, 2 c1 dt)` plus the stable part.
pub fn sample_increment<R: RngCore + ?Sized>(ms: &MixtureSpec, dt: f64, rng: &mut R) -> f64 {
    let g: f64 = StandardNormal.sample(rng);
    let s = sample_symmetric_stable(ms.alpha, rng);
    math::sqrt(2.0 * ms.c1 * dt) * g + math::powf(ms.c2 * dt, 1.0 / ms.alpha) * s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureExit {
    /// Exit position; `0` for exits through the puncture.
    pub point: f64,
    pub steps: u64,
    pub absorbed: bool,
    pub capped: bool,
}

/// Exit of `(-1, 1) ∖ {0}` by an Euler scheme. Each step moves the Gaussian
/// part first, checking barrier crossings of the Gaussian bridge, then adds
/// the jump part, whose overshoot past `±1` is kept. Landing within `eps0`
/// of `0` counts as hitting the puncture.
///
/// The scheme is odd in `x`: a start at `-x` with the same stream gives the
/// mirror image of the path from `x`.
pub fn simulate_mixture_exit<R: RngCore + ?Sized>(ms: &MixtureSpec, x: f64, rng: &mut R) -> Result<MixtureExit> {
    if !(math::abs(x) < 1.0) || x == 0.0 {
        return Err(Error::precondition(format!("start {x} must lie in (-1, 1) ∖ {{0}}")));
    }
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let mut y = math::abs(x);
    let done = |p: f64, steps: u64, absorbed: bool| MixtureExit {
        point: sign * p,
        steps,
        absorbed,
        capped: false,
    };
    if y <= ms.eps0 {
        return Ok(done(0.0, 0, true));
    }
    let diffusive = ms.c1 > 0.0;
    for step in 1..=ms.max_steps {
        let dist = math::abs(y).min(1.0 - math::abs(y));
        let dt = ms.step_dt(dist);
        if diffusive {
            let g: f64 = StandardNormal.sample(rng);
            let z = y + math::sqrt(2.0 * ms.c1 * dt) * g;
            let var = ms.c1 * dt;
            // Crossing of 0 or of the near barrier during the bridge.
            let u0 = uniform(rng);
            let u1 = uniform(rng);
            if z * y <= 0.0 || u0 < math::exp(-(y * z) / var) {
                return Ok(done(0.0, step, true));
            }
            let side = if y > 0.0 { 1.0 } else { -1.0 };
            let (a, b) = (1.0 - side * y, 1.0 - side * z);
            if b <= 0.0 || u1 < math::exp(-(a * b) / var) {
                return Ok(done(side, step, false));
            }
            y = z;
        }
        let s = sample_symmetric_stable(ms.alpha, rng);
        y += math::powf(ms.c2 * dt, 1.0 / ms.alpha) * s;
        if math::abs(y) >= 1.0 {
            return Ok(done(y, step, false));
        }
        if math::abs(y) <= ms.eps0 {
            return Ok(done(0.0, step, true));
        }
    }
    Ok(MixtureExit {
        point: sign * y,
        steps: ms.max_steps,
        absorbed: false,
        capped: true,
    })
}

/// Joint estimates of the exit functionals at one start point.
#[derive(Debug, Clone, PartialEq)]
pub struct GapEstimate {
    pub x: f64,
    /// `f(x) = 2 E_x[|X|; X ≥ 1]`.
    pub f: Estimate,
    /// `g(x) = 2 E_x[|X|; X ≤ -1]`.
    pub g: Estimate,
    /// `u(x) = E_x X`, which equals `x` for a martingale.
    pub u: Estimate,
    /// `w(x) = (f(x) + g(x)) / 2`.
    pub w: Estimate,
    /// `f(x)/g(x) - f(-x)/g(-x)` under mirrored streams, i.e. `f/g - g/f`.
    pub gap: Estimate,
    /// `4 x ŵ / (ŵ² - x²)`, the gap with `u` replaced by its exact value.
    pub bound: f64,
    /// `4 û ŵ / (ŵ² - û²)` with `û = (f - g)/2`; equals `gap` up to rounding.
    pub identity: f64,
    /// Fraction of paths absorbed at the puncture.
    pub absorbed: Estimate,
    pub mean_steps: f64,
    pub capped: u64,
}

struct GapTally {
    m: Moments,
    steps: u64,
    capped: u64,
}

/// Estimates the gap at `x ∈ (0, 1)` from `n` paths. Path `i` uses stream
/// `i`; the values at `-x` come from the mirrored paths, so `f(-x) = g(x)`
/// holds exactly.
pub fn gap_statistic(ms: &MixtureSpec, x: f64, n: u64, streams: &Streams, capped_fraction: f64) -> Result<GapEstimate> {
    ms.validate()?;
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::domain(format!("gap point must lie in (0, 1), got {x}")));
    }
    if n < 2 {
        return Err(Error::domain("need at least two paths"));
    }
    let t = par::fold(
        n,
        par::CHUNK,
        || GapTally {
            m: Moments::new(4),
            steps: 0,
            capped: 0,
        },
        |i, t| {
            let mut rng = streams.rng(i);
            let e = simulate_mixture_exit(ms, x, &mut rng)?;
            if e.capped {
                t.capped += 1;
                return Ok(());
            }
            t.steps += e.steps;
            let p = e.point;
            let fp = if p >= 1.0 { 2.0 * p } else { 0.0 };
            let gp = if p <= -1.0 { -2.0 * p } else { 0.0 };
            t.m.push(&[fp, gp, p, if e.absorbed { 1.0 } else { 0.0 }]);
            Ok(())
        },
        |a, b| {
            a.m.merge(&b.m);
            a.steps += b.steps;
            a.capped += b.capped;
        },
    )?;
    if t.capped as f64 > capped_fraction * n as f64 {
        return Err(Error::Reliability {
            capped: t.capped,
            total: n,
            allowed: capped_fraction,
        });
    }
    let seed = streams.seed();
    let m = &t.m;
    let f = m.estimate(0, seed);
    let g = m.estimate(1, seed);
    if !(g.mean > 0.0 && f.mean > 0.0) {
        return Err(Error::Precision(format!("no exits on one side at x={x}")));
    }
    let (fm, gm) = (f.mean, g.mean);
    let gap = fm / gm - gm / fm;
    let df = 1.0 / gm + gm / (fm * fm);
    let dg = -fm / (gm * gm) - 1.0 / fm;
    let var = df * df * m.cov_of_means(0, 0) + dg * dg * m.cov_of_means(1, 1) + 2.0 * df * dg * m.cov_of_means(0, 1);
    let wvar = 0.25 * (m.cov_of_means(0, 0) + m.cov_of_means(1, 1) + 2.0 * m.cov_of_means(0, 1));
    let wm = 0.5 * (fm + gm);
    let um = 0.5 * (fm - gm);
    Ok(GapEstimate {
        x,
        f,
        g,
        u: m.estimate(2, seed),
        w: Estimate {
            mean: wm,
            stderr: math::sqrt(wvar.max(0.0)),
            ..f
        },
        gap: Estimate {
            mean: gap,
            stderr: math::sqrt(var.max(0.0)),
            ..f
        },
        bound: 4.0 * x * wm / (wm * wm - x * x),
        identity: 4.0 * um * wm / (wm * wm - um * um),
        absorbed: m.estimate(3, seed),
        mean_steps: t.steps as f64 / m.count().max(1) as f64,
        capped: t.capped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_values() {
        let ms = MixtureSpec::new(1.0, 1.0, 1.5).unwrap();
        assert_eq!(ms.char_exponent(0.0), 0.0);
        assert_eq!(ms.char_exponent(2.0), ms.char_exponent(-2.0));
        assert!((ms.char_exponent(2.0) - (4.0 + 2f64.powf(1.5))).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_index() {
        assert!(MixtureSpec::new(1.0, 1.0, 0.8).is_err());
        assert!(MixtureSpec::new(1.0, 1.0, 2.0).is_err());
        assert!(MixtureSpec::new(-1.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn potential_is_even_and_vanishes_at_zero() {
        let ms = MixtureSpec::new(1.0, 1.0, 1.5).unwrap();
        assert_eq!(ms.compensated_potential(0.0).unwrap(), 0.0);
        let a = ms.compensated_potential(0.3).unwrap();
        let b = ms.compensated_potential(-0.3).unwrap();
        assert_eq!(a, b);
        assert!(a > 0.0);
    }

    #[test]
    fn brownian_potential_is_linear() {
        // c2 → 0 is excluded, but for tiny c2 v(x) ≈ |x| / (2 c1).
        let ms = MixtureSpec::new(1.0, 1e-9, 1.5).unwrap();
        let v = ms.compensated_potential(0.5).unwrap();
        assert!((v - 0.25).abs() < 1e-4, "{v}");
    }

    #[test]
    fn mirrored_paths() {
        let ms = MixtureSpec::new(1.0, 1.0, 1.5).unwrap();
        let st = Streams::new(3);
        for i in 0..50 {
            let a = simulate_mixture_exit(&ms, 0.2, &mut st.rng(i)).unwrap();
            let b = simulate_mixture_exit(&ms, -0.2, &mut st.rng(i)).unwrap();
            assert_eq!(a.point, -b.point);
            assert_eq!(a.steps, b.steps);
            assert!(!(a.point.abs() < 1.0 && a.point != 0.0));
        }
    }

    #[test]
    fn gap_matches_identity() {
        let ms = MixtureSpec::new(1.0, 1.0, 1.5).unwrap();
        let e = gap_statistic(&ms, 0.2, 2000, &Streams::new(9), 1e-3).unwrap();
        assert!((e.gap.mean - e.identity).abs() < 1e-12 * e.gap.mean.abs().max(1.0));
    }
}
