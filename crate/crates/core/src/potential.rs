//! Ring functionals, harmonic decompositions, relative oscillation,
//! accessibility and Martin kernels.
//!
//! Notation: `x0` is a boundary point, `B_r = B(x0, r)`, `D_r = D ∩ B_r` and
//! `M_{r,s}(f) = ∫_{r<|y-x0|<s} f(y) ν(x0, y) dy`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::estimate::{Estimate, Moments};
use crate::exterior::{ball_chord, ExteriorData, RaySegment};
use crate::geometry::Domain;
use crate::kernels::{unit_vector, ProcessSpec};
use crate::math;
use crate::par;
use crate::point::Point;
use crate::quad::{self, Tolerance};
use crate::rng::Streams;
use crate::sampler::{self, GreenCap, Tally, WalkConfig};
use crate::stats;

/// A nonnegative function that is regular harmonic (or, for the exit time,
/// nearly so) in its domain and given explicitly outside it.
#[derive(Debug, Clone, PartialEq)]
pub enum HarmonicFn {
    /// `x ↦ E_x data(X(τ_dom))`.
    Exterior { data: ExteriorData, dom: Domain },
    /// `x ↦ E_x τ_dom`.
    ExitTime { dom: Domain },
    /// `x ↦ G_dom(x, y)`, with per-step contributions capped at `cap`.
    GreenSlice { dom: Domain, y: Point, cap: f64 },
}

impl HarmonicFn {
    pub fn exterior(data: ExteriorData, dom: Domain) -> Self {
        HarmonicFn::Exterior { data, dom }
    }

    pub fn domain(&self) -> &Domain {
        match self {
            HarmonicFn::Exterior { dom, .. } | HarmonicFn::ExitTime { dom } | HarmonicFn::GreenSlice { dom, .. } => dom,
        }
    }

    /// Value off the domain of harmonicity.
    pub fn outside(&self, y: &Point) -> f64 {
        match self {
            HarmonicFn::Exterior { data, .. } => data.eval(y),
            _ => 0.0,
        }
    }

    fn validate(&self, spec: &ProcessSpec) -> Result<()> {
        let d = self.domain().dim();
        if d != spec.d {
            return Err(Error::domain(format!(
                "domain dimension {d} differs from process dimension {}",
                spec.d
            )));
        }
        match self {
            HarmonicFn::Exterior { data, .. } => {
                if !data.fits_dim(d) {
                    return Err(Error::domain("exterior data dimension differs from the domain"));
                }
                if !data.is_nonnegative() {
                    return Err(Error::domain("exterior data must be nonnegative"));
                }
            }
            HarmonicFn::ExitTime { .. } => {}
            HarmonicFn::GreenSlice { dom, y, cap } => {
                if !spec.supports_green() {
                    return Err(Error::capability(format!(
                        "Green functions need α < d (d={}, α={})",
                        spec.d, spec.alpha
                    )));
                }
                if !dom.contains(y) {
                    return Err(Error::precondition("Green pole must lie in the domain"));
                }
                if !(*cap > 0.0) {
                    return Err(Error::domain("Green cap must be positive"));
                }
            }
        }
        Ok(())
    }

    /// Checks on random probes that the exterior data vanish on
    /// `B(x0, radius) ∖ D`, as the boundary-limit theorem requires.
    pub fn vanishes_near(&self, x0: &Point, radius: f64, probes: usize, streams: &Streams) -> bool {
        let HarmonicFn::Exterior { data, dom } = self else {
            return true;
        };
        let mut rng = streams.rng(0);
        for _ in 0..probes {
            let u = unit_vector(dom.dim(), &mut rng);
            let t = radius * math::powf(crate::rng::uniform_open(&mut rng), 1.0 / dom.dim() as f64);
            let y = *x0 + u * t;
            if !dom.contains(&y) && data.eval(&y) != 0.0 {
                return false;
            }
        }
        true
    }
}

fn check_family(spec: &ProcessSpec, fns: &[&HarmonicFn]) -> Result<()> {
    let first = fns.first().ok_or_else(|| Error::domain("no functions to evaluate"))?;
    for f in fns {
        f.validate(spec)?;
        if f.domain() != first.domain() {
            return Err(Error::precondition("functions evaluated together must share their domain"));
        }
    }
    Ok(())
}

/// One joint sample of every function at `start`. Returns `true` if the walk
/// was capped (then `out` is meaningless).
fn sample_fns<R: RngCore + ?Sized>(
    spec: &ProcessSpec,
    fns: &[&HarmonicFn],
    start: &Point,
    rng: &mut R,
    cfg: &WalkConfig,
    out: &mut [f64],
) -> Result<bool> {
    let dom = fns[0].domain();
    if !dom.contains(start) {
        for (o, f) in out.iter_mut().zip(fns) {
            *o = f.outside(start);
        }
        return Ok(false);
    }
    out.iter_mut().for_each(|o| *o = 0.0);
    let w = sampler::walk_observed(spec, dom, start, rng, cfg, |c, rho| {
        for (o, f) in out.iter_mut().zip(fns) {
            if let HarmonicFn::GreenSlice { y, cap, .. } = f {
                let t = c.dist(y);
                if t < rho && t > 0.0 {
                    *o += spec.green_center(rho, t).min(*cap);
                }
            }
        }
    })?;
    if w.capped {
        return Ok(true);
    }
    for (o, f) in out.iter_mut().zip(fns) {
        match f {
            HarmonicFn::Exterior { data, .. } => *o = data.eval(&w.exit_point),
            HarmonicFn::ExitTime { .. } => *o = w.time_weight,
            HarmonicFn::GreenSlice { .. } => {}
        }
    }
    Ok(false)
}

fn reliability(capped: u64, total: u64, cfg: &WalkConfig) -> Result<()> {
    if capped as f64 > cfg.capped_fraction * total as f64 {
        return Err(Error::Reliability {
            capped,
            total,
            allowed: cfg.capped_fraction,
        });
    }
    Ok(())
}

/// Joint Monte Carlo values of several functions sharing a domain at `y`.
pub fn evaluate(spec: &ProcessSpec, fns: &[&HarmonicFn], y: &Point, n: u64, streams: &Streams, cfg: &WalkConfig) -> Result<Moments> {
    check_family(spec, fns)?;
    let t = evaluate_tally(spec, fns, y, n, streams, cfg)?;
    reliability(t.capped, n, cfg)?;
    Ok(t.m)
}

fn evaluate_tally(spec: &ProcessSpec, fns: &[&HarmonicFn], y: &Point, n: u64, streams: &Streams, cfg: &WalkConfig) -> Result<Tally> {
    if n == 0 {
        return Err(Error::domain("sample count must be positive"));
    }
    let k = fns.len();
    par::fold(
        n,
        par::CHUNK,
        || Tally::new(k),
        |i, t| {
            let mut rng = streams.rng(i);
            let mut out = vec![0.0; k];
            if sample_fns(spec, fns, y, &mut rng, cfg, &mut out)? {
                t.capped += 1;
            } else {
                t.m.push(&out);
            }
            Ok(())
        },
        |a, b| a.merge(b),
    )
}

/// `M_{r,s}(f)` with its Monte Carlo error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingFunctional {
    pub r: f64,
    pub s: f64,
    pub value: Estimate,
}

fn check_ring(r: f64, s: f64) -> Result<()> {
    if !(r > 0.0 && s > r) {
        return Err(Error::domain(format!("ring needs 0 < r < s, got r={r}, s={s}")));
    }
    Ok(())
}

/// Default inner budget for nested estimates: `⌈√n_outer⌉`.
pub fn default_inner(n_outer: u64) -> u64 {
    (math::ceil(math::sqrt(n_outer as f64)) as u64).max(1)
}

/// Joint ring functionals of several functions over shared samples. Outer
/// points are drawn from `ν(x0, ·)` restricted to the ring (exact inverse
/// CDF of the radial power law, uniform direction) and weighted by the ring
/// mass; inside the domain each function is replaced by the mean of
/// `n_inner` walks. The sample variance of the weighted outer values already
/// contains the inner noise, so the reported errors are those of the nested
/// estimator. Column `j` of the result holds `M_{r,s}(f_j)`.
pub fn ring_moments(
    spec: &ProcessSpec,
    x0: &Point,
    r: f64,
    s: f64,
    fns: &[&HarmonicFn],
    n_outer: u64,
    n_inner: u64,
    streams: &Streams,
    cfg: &WalkConfig,
) -> Result<Moments> {
    check_ring(r, s)?;
    check_family(spec, fns)?;
    if n_outer == 0 || n_inner == 0 {
        return Err(Error::domain("ring budgets must be positive"));
    }
    let mass = spec.ring_mass(r, s)?;
    let k = fns.len();
    let outer = streams.child(0);
    let inner = streams.child(1);
    let tally = par::fold(
        n_outer,
        par::CHUNK.min(16),
        || (Tally::new(k), 0u64),
        |i, (t, walks)| {
            let mut rng = outer.rng(i);
            let rho = spec.sample_ring_radius(r, s, &mut rng);
            let y = *x0 + unit_vector(spec.d, &mut rng) * rho;
            let mut acc = vec![0.0; k];
            let mut out = vec![0.0; k];
            if fns[0].domain().contains(&y) {
                let sub = inner.child(i);
                let mut good = 0u64;
                for j in 0..n_inner {
                    let mut wr = sub.rng(j);
                    if sample_fns(spec, fns, &y, &mut wr, cfg, &mut out)? {
                        t.capped += 1;
                    } else {
                        good += 1;
                        for (a, o) in acc.iter_mut().zip(&out) {
                            *a += o;
                        }
                    }
                }
                *walks += n_inner;
                if good == 0 {
                    return Ok(());
                }
                for a in acc.iter_mut() {
                    *a *= mass / good as f64;
                }
            } else {
                for (a, f) in acc.iter_mut().zip(fns) {
                    *a = mass * f.outside(&y);
                }
            }
            t.m.push(&acc);
            Ok(())
        },
        |a, b| {
            a.0.merge(b.0);
            a.1 += b.1;
        },
    )?;
    reliability(tally.0.capped, tally.1.max(1), cfg)?;
    Ok(tally.0.m)
}

/// `M_{r,s}(f)`; `s` may be infinite.
pub fn ring_functional(
    spec: &ProcessSpec,
    x0: &Point,
    r: f64,
    s: f64,
    f: &HarmonicFn,
    n_outer: u64,
    n_inner: Option<u64>,
    streams: &Streams,
    cfg: &WalkConfig,
) -> Result<RingFunctional> {
    let inner = n_inner.unwrap_or_else(|| default_inner(n_outer));
    let m = ring_moments(spec, x0, r, s, &[f], n_outer, inner, streams, cfg)?;
    Ok(RingFunctional {
        r,
        s,
        value: m.estimate(0, streams.seed()),
    })
}

/// The split `f = f_{r,s} + f̃_{r,s}` at a point of `D_r`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    /// `f_{r,s}(x)`: exits of `D_r` landing in `B_s`.
    pub near: Estimate,
    /// `f̃_{r,s}(x)`: exits landing beyond `B_s`.
    pub far: Estimate,
    /// Both parts over the same walks (columns `near`, `far`).
    pub moments: Moments,
}

impl Decomposition {
    /// `f̃ / (f + f̃)`.
    pub fn far_share(&self) -> Estimate {
        let total = self.near.mean + self.far.mean;
        let q = self.far.mean / total;
        // far/(near+far) with the joint covariance of the two columns.
        let vn = self.moments.cov_of_means(0, 0);
        let vf = self.moments.cov_of_means(1, 1);
        let c = self.moments.cov_of_means(0, 1);
        let dn = -self.far.mean / (total * total);
        let df = self.near.mean / (total * total);
        let var = dn * dn * vn + df * df * vf + 2.0 * dn * df * c;
        Estimate {
            mean: q,
            stderr: math::sqrt(var.max(0.0)),
            n: self.near.n,
            seed: self.near.seed,
        }
    }
}

/// Splits the harmonic function `f` at `x ∈ D_r` by where the walk leaves
/// `D_r = D ∩ B(x0, r)`: `f_{r,s}(x) = E_x[(f 1_{B_s})(X(τ_{D_r}))]` and
/// `f̃_{r,s}(x) = E_x[(f 1_{B_s^c})(X(τ_{D_r}))]`. The value of `f` at the
/// first exit point is sampled without nesting by continuing the same walk
/// in the domain of `f` (strong Markov property), so the two parts add up
/// to a plain estimate of `f(x)` over the same walks.
pub fn decompose(
    spec: &ProcessSpec,
    dom: &Domain,
    x0: &Point,
    r: f64,
    s: f64,
    f: &HarmonicFn,
    x: &Point,
    n: u64,
    streams: &Streams,
    cfg: &WalkConfig,
) -> Result<Decomposition> {
    check_ring(r, s)?;
    check_family(spec, &[f])?;
    let dr = dom.truncate(x0, r)?;
    if !dr.contains(x) {
        return Err(Error::precondition("decomposition point must lie in D ∩ B(x0, r)"));
    }
    let fns = [f];
    let tally = par::fold(
        n,
        par::CHUNK,
        || Tally::new(2),
        |i, t| {
            let mut rng = streams.rng(i);
            let w = sampler::walk_exit(spec, &dr, x, &mut rng, cfg)?;
            if w.capped {
                t.capped += 1;
                return Ok(());
            }
            let mut v = [0.0];
            if sample_fns(spec, &fns, &w.exit_point, &mut rng, cfg, &mut v)? {
                t.capped += 1;
                return Ok(());
            }
            if w.exit_point.dist(x0) < s {
                t.m.push(&[v[0], 0.0]);
            } else {
                t.m.push(&[0.0, v[0]]);
            }
            Ok(())
        },
        |a, b| a.merge(b),
    )?;
    reliability(tally.capped, n, cfg)?;
    Ok(Decomposition {
        near: tally.m.estimate(0, streams.seed()),
        far: tally.m.estimate(1, streams.seed()),
        moments: tally.m,
    })
}

/// `∫_{|y-c|>ρ} h(y) ν(v, y) dy` for `v ∈ B(c, ρ)`, integrating the closed
/// form along rays from `v` over the sphere of directions (`d ≤ 3`).
pub fn levy_integral_outside(spec: &ProcessSpec, h: &ExteriorData, v: &Point, c: &Point, rho: f64, tol: Tolerance) -> Result<f64> {
    let off = *v - *c;
    let gap = rho * rho - off.norm_sq();
    if !(gap > 0.0) {
        return Err(Error::domain("ray origin must lie inside the excluded ball"));
    }
    levy_outside_gap(spec, h, v, c, gap, tol)
}

/// Distance from `o` along `w` to the sphere `|y - c| = ρ`, for `o` inside
/// with `ρ² - |o - c|² = gap`.
fn exit_distance(o: &Point, w: &Point, c: &Point, gap: f64) -> f64 {
    let b = w.dot(&(*o - *c));
    let s = math::sqrt(b * b + gap);
    if b > 0.0 {
        gap / (b + s)
    } else {
        s - b
    }
}

/// [`levy_integral_outside`] with the gap `ρ² - |v - c|²` supplied by the
/// caller, which keeps full relative accuracy next to the sphere.
fn levy_outside_gap(spec: &ProcessSpec, h: &ExteriorData, v: &Point, c: &Point, gap: f64, tol: Tolerance) -> Result<f64> {
    let a = spec.alpha;
    let mut segs = Vec::new();
    // The integrand peaks towards the nearest point of the sphere.
    let off = *v - *c;
    let rho = math::sqrt(gap + off.norm_sq());
    let pole = if off.norm() > 0.0 {
        off * (1.0 / off.norm())
    } else {
        Point::on_axis(spec.d, 1.0)
    };
    let r = quad::integrate_sphere_about(
        spec.d,
        &pole,
        |w| {
            let te = exit_distance(v, w, c, gap);
            segs.clear();
            outside_segments(h, v, w, c, rho, te, &mut segs);
            let mut sum = 0.0;
            for sg in &segs {
                let t0 = snap_start(sg.t0, te);
                if sg.t1 <= t0 {
                    continue;
                }
                let hi = if sg.t1 == f64::INFINITY { 0.0 } else { math::powf(sg.t1, -a) };
                sum += sg.value * (math::powf(t0, -a) - hi);
            }
            spec.levy_norm * sum / a
        },
        tol,
    )?;
    Ok(r.value)
}

/// Ray segments of `h` from `v ∈ B(c, ρ)`. Shells centred at `c` whose
/// inner radius reaches the sphere start exactly at the exit distance `te`
/// instead of at a chord recomputed from coordinates.
fn outside_segments(h: &ExteriorData, v: &Point, w: &Point, c: &Point, rho: f64, te: f64, out: &mut Vec<RaySegment>) {
    match h {
        ExteriorData::Shell {
            center,
            inner,
            outer,
            value,
        } if center == c && *inner <= rho * (1.0 + 1e-12) && *outer > rho => {
            let t1 = match ball_chord(v, w, c, *outer) {
                Some((_, t1)) => t1,
                None => return,
            };
            out.push(RaySegment { t0: te, t1, value: *value });
        }
        ExteriorData::Sum(parts) => {
            for p in parts {
                outside_segments(p, v, w, c, rho, te, out);
            }
        }
        _ => h.ray_segments(v, w, out),
    }
}

/// Start of a data segment clipped to `[te, ∞)`. Segments that begin on
/// the sphere itself are found from coordinates with a rounding error far
/// larger than that of `te`, so starts within that error snap to `te`.
fn snap_start(t0: f64, te: f64) -> f64 {
    if t0 <= te * (1.0 + 1e-9) + 1e-15 {
        te
    } else {
        t0
    }
}

/// Both sides of the ball identity
/// `E_x h(X(τ_B)) = ∫_B G_B(x, v) ∫_{B^c} ν(v, y) h(y) dy dv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynkinCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs - rhs| / max(|lhs|, |rhs|)`.
    pub gap: f64,
}

/// `∫_0^b g(s) ds` with `g ~ s^(-pa)` at `0`; `b` may be infinite.
fn offset_piece<F: FnMut(f64) -> f64>(mut g: F, b: f64, pa: f64, scale: f64, tol: Tolerance) -> Result<f64> {
    if b == f64::INFINITY {
        let near = quad::integrate_algebraic(&mut g, 0.0, scale, pa, 0.0, tol)?.value;
        let far = quad::integrate_tail(&mut g, scale, tol)?.value;
        Ok(near + far)
    } else {
        Ok(quad::integrate_algebraic(g, 0.0, b, pa, 0.0, tol)?.value)
    }
}

/// `E_x h(X(τ_B)) = ∫_{|y|>r} P_B(x, y) h(y) dy` for `B = B(0, r)` by
/// quadrature along rays from `x` (`d ≤ 3`). With `h ≡ 1` this is the
/// normalization of the Poisson kernel.
pub fn poisson_integral(spec: &ProcessSpec, r: f64, x: &Point, h: &ExteriorData, tol: Tolerance) -> Result<f64> {
    if !(x.norm() < r) {
        return Err(Error::domain("start point must lie inside the ball"));
    }
    if !h.fits_dim(spec.d) || x.dim() != spec.d {
        return Err(Error::domain("dimension differs from the process"));
    }
    let d = spec.d as f64;
    let a = spec.alpha;
    let o = Point::origin(spec.d);
    let gap_x = r * r - x.norm_sq();
    let mut failure: Option<Error> = None;
    let pole = if x.norm() > 0.0 {
        *x * (1.0 / x.norm())
    } else {
        Point::on_axis(spec.d, 1.0)
    };

    let mut segs = Vec::new();
    let lhs = quad::integrate_sphere_about(
        spec.d,
        &pole,
        |w| {
            let te = exit_distance(x, w, &o, gap_x);
            let tl = -gap_x / te;
            segs.clear();
            h.ray_segments(x, w, &mut segs);
            let mut sum = 0.0;
            for sg in &segs {
                let t0 = snap_start(sg.t0, te);
                if sg.t1 <= t0 {
                    continue;
                }
                // s = t - te.
                let kern = |s: f64| {
                    let t = te + s;
                    spec.poisson_gaps(gap_x, s * (t - tl), t) * math::powf(t, d - 1.0)
                };
                let s0 = t0 - te;
                let res = if s0 == 0.0 {
                    offset_piece(kern, sg.t1 - te, a / 2.0, te.max(r), tol)
                } else {
                    let shifted = |u: f64| kern(s0 + u);
                    offset_piece(shifted, sg.t1 - t0, 0.0, te.max(r), tol)
                };
                match res {
                    Ok(v) => sum += sg.value * v,
                    Err(e) => failure = Some(e),
                }
            }
            sum
        },
        tol,
    )?
    .value;
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok(lhs)
}

/// Verifies the ball identity behind Dynkin's formula by two independent
/// quadratures (`d ≤ 3`, `α < d`). Box data in `d ≥ 2` put kinks into the
/// inner integrand over directions and cost minutes; shells take seconds.
///
/// Along the ray `x + tω` with exit distance `te` and negative root `tl`
/// of `|x + tω|² = r²`, the gaps are `r² - |x + tω|² = (te - t)(t - tl)`;
/// both sides are integrated in the offset from `te` so that the kernels
/// keep full relative accuracy at the sphere.
pub fn dynkin_check(spec: &ProcessSpec, r: f64, x: &Point, h: &ExteriorData) -> Result<DynkinCheck> {
    if !spec.supports_green() {
        return Err(Error::capability(format!(
            "Dynkin check needs the ball Green function (α < d); d={}, α={}",
            spec.d, spec.alpha
        )));
    }
    if !(x.norm() < r) {
        return Err(Error::domain("start point must lie inside the ball"));
    }
    if !h.fits_dim(spec.d) {
        return Err(Error::domain("exterior data dimension differs from the process"));
    }
    let d = spec.d as f64;
    let a = spec.alpha;
    let o = Point::origin(spec.d);
    let r2 = r * r;
    let gap_x = r2 - x.norm_sq();
    let tol = Tolerance::new(1e-10, 1e-8);
    let inner_tol = Tolerance::new(1e-12, 1e-10);
    let mut failure: Option<Error> = None;
    let pole = if x.norm() > 0.0 {
        *x * (1.0 / x.norm())
    } else {
        Point::on_axis(spec.d, 1.0)
    };

    let lhs = poisson_integral(spec, r, x, h, tol)?;

    let rhs = quad::integrate_sphere_about(
        spec.d,
        &pole,
        |w| {
            let te = exit_distance(x, w, &o, gap_x);
            let tl = -gap_x / te;
            // s = te - t is the offset from the sphere. Each half of the ray
            // is integrated in the variable that vanishes at its end, so
            // neither s nor t is formed by cancellation.
            let mut g = |s: f64, t: f64| {
                if !(s > 0.0 && t > 0.0) {
                    return 0.0;
                }
                let gap_v = s * (t - tl);
                let v = *x + *w * t;
                let green = spec.green_gaps(r2, gap_x, gap_v, t);
                match levy_outside_gap(spec, h, &v, &o, gap_v, inner_tol) {
                    Ok(phi) => green * phi * math::powf(t, d - 1.0),
                    Err(e) => {
                        failure = Some(e);
                        0.0
                    }
                }
            };
            let half = te / 2.0;
            let split = Tolerance { abs: tol.abs / 2.0, ..tol };
            // G φ ~ s^(-α/2) at the sphere and ~ t^(α-d) t^(d-1) at x.
            let near_sphere = quad::integrate_algebraic(|s| g(s, te - s), 0.0, half, a / 2.0, 0.0, split);
            let near_x = near_sphere.and_then(|ns| {
                quad::integrate_algebraic(|t| g(te - t, t), 0.0, te - half, 1.0 - a / 2.0, 0.0, split).map(|nx| ns.value + nx.value)
            });
            match near_x {
                Ok(v) => v,
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            }
        },
        tol,
    )?
    .value;
    if let Some(e) = failure {
        return Err(e);
    }
    let scale = math::abs(lhs).max(math::abs(rhs));
    let gap = if scale == 0.0 { 0.0 } else { math::abs(lhs - rhs) / scale };
    Ok(DynkinCheck { lhs, rhs, gap })
}

/// Pointwise ratio of two harmonic functions at one probe point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeRatio {
    pub x: Point,
    pub f: Estimate,
    pub g: Estimate,
    pub ratio: Estimate,
}

/// Relative oscillation of `f/g` over `D ∩ B(x0, r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Oscillation {
    pub r: f64,
    pub sup: Estimate,
    pub inf: Estimate,
    /// `sup / inf`.
    pub ratio: Estimate,
    /// `D ∩ B(x0, r)` looked empty: the oscillation is vacuous.
    pub vacuous: bool,
    /// Probes dropped because `g` was within 5 standard errors of zero.
    pub excluded: usize,
    pub probes: Vec<ProbeRatio>,
    /// Leave-one-batch-out values of `sup / inf`.
    pub jackknife: Vec<f64>,
    /// `Σ f / Σ g` over the kept probes: the pointwise ratio at this scale,
    /// with a batch jackknife error.
    pub pooled: Estimate,
}

/// Options for [`oscillation`].
#[derive(Debug, Clone, PartialEq)]
pub struct OscillationPlan {
    pub m_points: usize,
    /// Walks per probe point.
    pub n: u64,
    /// Batches for the jackknife (≥ 2).
    pub batches: u64,
}

/// `sup f/g` and `inf f/g` over probe points sampled uniformly in
/// `D ∩ B(x0, r)`. All probes use the same walk streams (common random
/// numbers), so differences between probes are much less noisy than the
/// values themselves.
pub fn oscillation(
    spec: &ProcessSpec,
    x0: &Point,
    r: f64,
    f: &HarmonicFn,
    g: &HarmonicFn,
    plan: &OscillationPlan,
    streams: &Streams,
    cfg: &WalkConfig,
) -> Result<Oscillation> {
    check_family(spec, &[f, g])?;
    if !(r > 0.0) {
        return Err(Error::domain("oscillation radius must be positive"));
    }
    if plan.batches < 2 || plan.n < plan.batches || plan.m_points == 0 {
        return Err(Error::domain("oscillation needs m_points ≥ 1, batches ≥ 2 and n ≥ batches"));
    }
    let dom = f.domain();
    let mut prng = streams.child(0).rng(0);
    let points = match dom.sample_region(Some((*x0, 0.0, r)), plan.m_points, None, &mut prng) {
        Ok(p) => p,
        Err(Error::EmptyRegion { .. }) => {
            let nan = Estimate::exact(f64::NAN, streams.seed());
            return Ok(Oscillation {
                r,
                sup: nan,
                inf: nan,
                ratio: nan,
                vacuous: true,
                excluded: 0,
                probes: Vec::new(),
                jackknife: Vec::new(),
                pooled: nan,
            });
        }
        Err(e) => return Err(e),
    };
    let per_batch = plan.n / plan.batches;
    let walks = streams.child(1);
    let fns = [f, g];
    // batch_moments[j][b]
    let batch_moments: Vec<Vec<Moments>> = points
        .iter()
        .map(|p| {
            (0..plan.batches)
                .map(|b| evaluate(spec, &fns, p, per_batch, &walks.child(b), cfg))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let seed = streams.seed();
    let merged = |skip: Option<u64>, j: usize| {
        let mut m = Moments::new(2);
        for (b, bm) in batch_moments[j].iter().enumerate() {
            if Some(b as u64) != skip {
                m.merge(bm);
            }
        }
        m
    };
    let mut probes = Vec::new();
    let mut excluded = 0;
    let mut keep = Vec::new();
    for (j, p) in points.iter().enumerate() {
        let m = merged(None, j);
        let fe = m.estimate(0, seed);
        let ge = m.estimate(1, seed);
        if !(ge.mean > 5.0 * ge.stderr) || ge.mean <= 0.0 {
            excluded += 1;
            continue;
        }
        keep.push(j);
        probes.push(ProbeRatio {
            x: *p,
            f: fe,
            g: ge,
            ratio: m.ratio(0, 1, seed),
        });
    }
    if probes.is_empty() {
        return Err(Error::Precision(format!(
            "g is indistinguishable from zero at all {} probes",
            points.len()
        )));
    }
    let (imax, imin) = extremes(probes.iter().map(|p| p.ratio.mean));
    let sup = probes[imax].ratio;
    let inf = probes[imin].ratio;
    let ratio = sup.ratio(inf);
    let pooled_of = |skip: Option<u64>| {
        let (mut sf, mut sg) = (0.0, 0.0);
        for &j in &keep {
            let m = merged(skip, j);
            sf += m.mean(0);
            sg += m.mean(1);
        }
        sf / sg
    };
    let reps: Vec<f64> = (0..plan.batches).map(|b| pooled_of(Some(b))).collect();
    let pooled = Estimate {
        mean: pooled_of(None),
        stderr: stats::jackknife_se(&reps),
        n: plan.n,
        seed,
    };
    let jackknife = (0..plan.batches)
        .map(|b| {
            let qs: Vec<f64> = keep
                .iter()
                .map(|&j| {
                    let m = merged(Some(b), j);
                    m.mean(0) / m.mean(1)
                })
                .collect();
            let (i1, i0) = extremes(qs.iter().copied());
            qs[i1] / qs[i0]
        })
        .collect();
    Ok(Oscillation {
        r,
        sup,
        inf,
        ratio,
        vacuous: false,
        excluded,
        probes,
        jackknife,
        pooled,
    })
}

fn extremes<I: Iterator<Item = f64>>(it: I) -> (usize, usize) {
    let mut imax = 0;
    let mut imin = 0;
    let mut vmax = f64::NEG_INFINITY;
    let mut vmin = f64::INFINITY;
    for (i, v) in it.enumerate() {
        if v > vmax {
            vmax = v;
            imax = i;
        }
        if v < vmin {
            vmin = v;
            imin = i;
        }
    }
    (imax, imin)
}

/// One row of the contraction table.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionRow {
    pub r: f64,
    pub oscillation: Oscillation,
    /// `sup/inf - 1`.
    pub excess: Estimate,
    /// Per-octave factor implied by this row and the previous one.
    pub implied_factor: Option<f64>,
}

/// Relative oscillation across a dyadic schedule and the fitted per-octave
/// contraction factor of `sup/inf - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Contraction {
    pub rows: Vec<ContractionRow>,
    /// `exp(slope)` of `ln(sup/inf - 1)` against octaves, with a batch
    /// jackknife error; `None` when fewer than two rows have positive excess.
    pub factor: Option<Estimate>,
    /// Two-sided 95% interval for the factor.
    pub ci95: Option<(f64, f64)>,
    /// Rows whose ratio rose above the previous one by more than twice the
    /// combined error.
    pub monotone_violations: usize,
}

/// Checks a radius schedule: positive, strictly decreasing.
pub fn check_schedule(radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::domain("empty radius schedule"));
    }
    if radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::domain("radii must be positive and finite"));
    }
    if radii.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::domain("radii must be strictly decreasing"));
    }
    Ok(())
}

pub fn empirical_contraction(
    spec: &ProcessSpec,
    x0: &Point,
    radii: &[f64],
    f: &HarmonicFn,
    g: &HarmonicFn,
    plan: &OscillationPlan,
    streams: &Streams,
    cfg: &WalkConfig,
) -> Result<Contraction> {
    check_schedule(radii)?;
    let mut rows: Vec<ContractionRow> = Vec::new();
    for (k, &r) in radii.iter().enumerate() {
        let osc = oscillation(spec, x0, r, f, g, plan, &streams.child(k as u64), cfg)?;
        let excess = Estimate {
            mean: osc.ratio.mean - 1.0,
            ..osc.ratio
        };
        let implied_factor = rows.last().and_then(|prev| {
            let octaves = math::ln(prev.r / r) / math::LN_2;
            (prev.excess.mean > 0.0 && excess.mean > 0.0).then(|| math::powf(excess.mean / prev.excess.mean, 1.0 / octaves))
        });
        rows.push(ContractionRow {
            r,
            oscillation: osc,
            excess,
            implied_factor,
        });
    }
    let monotone_violations = rows
        .windows(2)
        .filter(|w| {
            let a = &w[0].oscillation.ratio;
            let b = &w[1].oscillation.ratio;
            b.mean - a.mean > 2.0 * math::hypot(a.stderr, b.stderr)
        })
        .count();

    // Weighted fit of ln(excess) against octaves, weights from the
    // full-sample errors; the jackknife refits with the same weights.
    let usable: Vec<usize> = (0..rows.len())
        .filter(|&k| !rows[k].oscillation.vacuous && rows[k].excess.mean > 0.0)
        .collect();
    let (factor, ci95) = if usable.len() >= 2 {
        let xs: Vec<f64> = usable.iter().map(|&k| -math::ln(rows[k].r) / math::LN_2).collect();
        let ws: Vec<f64> = usable
            .iter()
            .map(|&k| {
                let e = &rows[k].excess;
                let rel = e.stderr / e.mean;
                1.0 / (rel * rel).max(1e-12)
            })
            .collect();
        let fit = |ys: &[f64]| weighted_slope(&xs, ys, &ws);
        let ys: Vec<f64> = usable.iter().map(|&k| math::ln(rows[k].excess.mean)).collect();
        let slope = fit(&ys);
        let batches = rows[usable[0]].oscillation.jackknife.len();
        let reps: Vec<f64> = (0..batches)
            .filter_map(|b| {
                let ys: Vec<f64> = usable.iter().map(|&k| math::ln(rows[k].oscillation.jackknife[b] - 1.0)).collect();
                ys.iter().all(|y| y.is_finite()).then(|| fit(&ys))
            })
            .collect();
        if reps.len() >= 2 {
            let se = stats::jackknife_se(&reps);
            let t = stats::t_critical(0.95, (reps.len() - 1) as f64);
            let factor = Estimate {
                mean: math::exp(slope),
                stderr: math::exp(slope) * se,
                n: reps.len() as u64,
                seed: streams.seed(),
            };
            (Some(factor), Some((math::exp(slope - t * se), math::exp(slope + t * se))))
        } else {
            (None, None)
        }
    } else {
        (None, None)
    };
    Ok(Contraction {
        rows,
        factor,
        ci95,
        monotone_violations,
    })
}

fn weighted_slope(x: &[f64], y: &[f64], w: &[f64]) -> f64 {
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..x.len() {
        sxx += w[i] * (x[i] - mx) * (x[i] - mx);
        sxy += w[i] * (x[i] - mx) * (y[i] - my);
    }
    sxy / sxx
}

/// Per-ring moments for a dyadic ladder `(radii[0], top)`, `(radii[1],
/// radii[0])`, …; ring `k` uses stream subtree `k`.
fn ring_ladder(
    spec: &ProcessSpec,
    x0: &Point,
    radii: &[f64],
    top: f64,
    fns: &[&HarmonicFn],
    n_outer: u64,
    n_inner: u64,
    streams: &Streams,
    cfg: &WalkConfig,
) -> Result<Vec<Moments>> {
    check_schedule(radii)?;
    if !(radii[0] < top) {
        return Err(Error::domain("largest radius must lie below the outer radius"));
    }
    let mut out = Vec::with_capacity(radii.len());
    let mut hi = top;
    for (k, &r) in radii.iter().enumerate() {
        out.push(ring_moments(spec, x0, r, hi, fns, n_outer, n_inner, &streams.child(k as u64), cfg)?);
        hi = r;
    }
    Ok(out)
}

/// Verdict of the accessibility classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Accessibility {
    Accessible,
    Inaccessible,
    Inconclusive,
}

impl Accessibility {
    pub fn as_str(&self) -> &'static str {
        match self {
            Accessibility::Accessible => "accessible",
            Accessibility::Inaccessible => "inaccessible",
            Accessibility::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccessibilityReport {
    pub verdict: Accessibility,
    /// `(r_k, M_{r_k,R}(s))`, cumulative.
    pub curve: Vec<(f64, Estimate)>,
    /// `(r_k, M_{r_k, r_{k-1}}(s))`, one ring each.
    pub increments: Vec<(f64, Estimate)>,
    /// Slope of `ln M` against `ln r` over the fitted scales.
    pub slope: f64,
    pub slope_se: f64,
    /// Slope of `ln` of the ring increments against `ln r`.
    pub increment_exponent: f64,
    pub increment_exponent_se: f64,
    pub fitted_scales: usize,
}

/// Decision thresholds of the classifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionRule {
    /// Number of smallest scales used in the fit.
    pub scales: usize,
    /// Slopes below `-slope_band` with `t > t_accessible` mean divergence.
    pub slope_band: f64,
    pub t_accessible: f64,
    /// Plateau: `|slope| < slope_band` and either `|t| < t_plateau` or the
    /// two-standard-error interval lies inside the band.
    pub t_plateau: f64,
}

impl Default for DecisionRule {
    fn default() -> Self {
        DecisionRule {
            scales: 4,
            slope_band: 0.1,
            t_accessible: 3.0,
            t_plateau: 1.0,
        }
    }
}

/// Measures `M_{r_k,R}(s_{D∩B(x0,R)})` on a shrinking schedule and decides
/// whether it diverges (accessible) or converges (inaccessible).
pub fn classify_accessibility(
    spec: &ProcessSpec,
    dom: &Domain,
    x0: &Point,
    radius: f64,
    radii: &[f64],
    n_outer: u64,
    n_inner: u64,
    rule: DecisionRule,
    streams: &Streams,
    cfg: &WalkConfig,
) -> Result<AccessibilityReport> {
    if dom.contains(x0) {
        return Err(Error::precondition("x0 must not lie in the domain"));
    }
    if radii.len() < rule.scales.max(3) {
        return Err(Error::domain(format!("accessibility needs at least {} radii", rule.scales.max(3))));
    }
    let s = HarmonicFn::ExitTime {
        dom: dom.truncate(x0, radius)?,
    };
    let rings = ring_ladder(spec, x0, radii, radius, &[&s], n_outer, n_inner, streams, cfg)?;
    let seed = streams.seed();
    let mut curve = Vec::new();
    let mut increments = Vec::new();
    let mut cum = 0.0;
    let mut cum_var = 0.0;
    let mut vars = Vec::new();
    for (k, m) in rings.iter().enumerate() {
        let e = m.estimate(0, seed);
        cum += e.mean;
        cum_var += e.stderr * e.stderr;
        vars.push(cum_var);
        increments.push((radii[k], e));
        curve.push((
            radii[k],
            Estimate {
                mean: cum,
                stderr: math::sqrt(cum_var),
                n: e.n,
                seed,
            },
        ));
    }
    let q = rule.scales;
    let tail = curve.len() - q;
    let lx: Vec<f64> = radii[tail..].iter().map(|r| math::ln(*r)).collect();
    let c = stats::ols_slope_weights(&lx);
    let vals: Vec<f64> = curve[tail..].iter().map(|(_, e)| e.mean).collect();
    let (slope, slope_se) = if vals.iter().all(|v| *v > 0.0) {
        let slope: f64 = c.iter().zip(&vals).map(|(ck, v)| ck * math::ln(*v)).sum();
        // Cumulative sums are nested: cov(S_i, S_j) = Var(S_min(i,j)).
        let mut var = 0.0;
        for i in 0..q {
            for j in 0..q {
                let cov = vars[tail + i.min(j)];
                var += c[i] * c[j] * cov / (vals[i] * vals[j]);
            }
        }
        (slope, math::sqrt(var.max(0.0)))
    } else {
        (f64::NAN, f64::NAN)
    };
    let incs: Vec<&Estimate> = increments[tail..].iter().map(|(_, e)| e).collect();
    let (increment_exponent, increment_exponent_se) = if incs.iter().all(|e| e.mean > 0.0) {
        let slope: f64 = c.iter().zip(&incs).map(|(ck, e)| ck * math::ln(e.mean)).sum();
        let var: f64 = c
            .iter()
            .zip(&incs)
            .map(|(ck, e)| ck * ck * (e.stderr / e.mean) * (e.stderr / e.mean))
            .sum();
        (slope, math::sqrt(var))
    } else {
        (f64::NAN, f64::NAN)
    };
    let verdict = decide(slope, slope_se, rule);
    Ok(AccessibilityReport {
        verdict,
        curve,
        increments,
        slope,
        slope_se,
        increment_exponent,
        increment_exponent_se,
        fitted_scales: q,
    })
}

fn decide(slope: f64, se: f64, rule: DecisionRule) -> Accessibility {
    if !slope.is_finite() {
        return Accessibility::Inconclusive;
    }
    let t = if se > 0.0 {
        -slope / se
    } else if slope < 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    if slope < -rule.slope_band && t > rule.t_accessible {
        Accessibility::Accessible
    } else if math::abs(slope) < rule.slope_band && (math::abs(t) < rule.t_plateau || math::abs(slope) + 2.0 * se < rule.slope_band) {
        Accessibility::Inaccessible
    } else {
        Accessibility::Inconclusive
    }
}

/// Per-scale table and extrapolated value of the boundary limit of `f/g`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryLimit {
    /// `(r, M_{r,∞}(f) / M_{r,∞}(g))`.
    pub table: Vec<(f64, Estimate)>,
    pub limit: Estimate,
    /// The last two scales agree within twice their combined error.
    pub stabilized: bool,
    /// `M_{R,∞}(f)` and `M_{R,∞}(g)`.
    pub outer: (f64, f64),
}

/// `lim_{r→0} M_{r,∞}(f) / M_{r,∞}(g)`. The part inside `B(x0, R)` comes
/// from ring functionals over a dyadic ladder with shared samples for `f`
/// and `g`; the part beyond `R` is integrated from the exterior data in
/// closed form along rays when the domain lies inside `B(x0, R)`, and by a
/// further ring functional otherwise.
pub fn boundary_limit(
    spec: &ProcessSpec,
    x0: &Point,
    radius: f64,
    f: &HarmonicFn,
    g: &HarmonicFn,
    radii: &[f64],
    n_outer: u64,
    n_inner: u64,
    streams: &Streams,
    cfg: &WalkConfig,
) -> Result<BoundaryLimit> {
    check_family(spec, &[f, g])?;
    let dom = f.domain();
    let fns = [f, g];
    let seed = streams.seed();
    let (outer, outer_m) = match (f, g, dom.within_ball(x0, radius)) {
        (HarmonicFn::Exterior { data: df, .. }, HarmonicFn::Exterior { data: dg, .. }, true) => {
            let tol = Tolerance::new(1e-12, 1e-10);
            let of = levy_integral_outside(spec, df, x0, x0, radius, tol)?;
            let og = levy_integral_outside(spec, dg, x0, x0, radius, tol)?;
            ((of, og), None)
        }
        _ => {
            let m = ring_moments(
                spec,
                x0,
                radius,
                f64::INFINITY,
                &fns,
                n_outer,
                n_inner,
                &streams.child(1 << 20),
                cfg,
            )?;
            ((m.mean(0), m.mean(1)), Some(m))
        }
    };
    let rings = ring_ladder(spec, x0, radii, radius, &fns, n_outer, n_inner, streams, cfg)?;
    let mut cov = match &outer_m {
        Some(m) => [m.cov_of_means(0, 0), m.cov_of_means(0, 1), m.cov_of_means(1, 1)],
        None => [0.0; 3],
    };
    let (mut sf, mut sg) = outer;
    let mut table = Vec::new();
    for (k, m) in rings.iter().enumerate() {
        sf += m.mean(0);
        sg += m.mean(1);
        cov[0] += m.cov_of_means(0, 0);
        cov[1] += m.cov_of_means(0, 1);
        cov[2] += m.cov_of_means(1, 1);
        let q = sf / sg;
        let var = (cov[0] - 2.0 * q * cov[1] + q * q * cov[2]) / (sg * sg);
        table.push((
            radii[k],
            Estimate {
                mean: q,
                stderr: math::sqrt(var.max(0.0)),
                n: m.count(),
                seed,
            },
        ));
    }
    let last = table[table.len() - 1].1;
    let stabilized = table.len() >= 2 && {
        let prev = table[table.len() - 2].1;
        math::abs(last.mean - prev.mean) <= 2.0 * math::hypot(last.stderr, prev.stderr)
    };
    Ok(BoundaryLimit {
        table,
        limit: last,
        stabilized,
        outer,
    })
}

/// One approach point of the Green-ratio Martin kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MartinRow {
    pub y: Point,
    pub delta: f64,
    pub ratio: Estimate,
    pub cap: f64,
    /// Capped mass relative to the numerator.
    pub cap_bias: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MartinKernel {
    pub rows: Vec<MartinRow>,
    /// Intercept of a weighted linear fit in `|y - z|` over all rows.
    pub extrapolated: Estimate,
    pub stabilized: bool,
}

/// Default cap: none when the Green contributions have finite variance
/// (`α > d/2`), a pilot quantile otherwise.
pub fn auto_cap(spec: &ProcessSpec) -> GreenCap {
    if spec.alpha > spec.d as f64 / 2.0 {
        GreenCap::None
    } else {
        GreenCap::default()
    }
}

/// `M_D(x, z) = lim_{y→z} G_D(x, y) / G_D(xref, y)` along the approach
/// points `ys`. By symmetry of `G_D`, each row runs walks from `y_j` and
/// scores both `x` and `xref` on the same walks.
pub fn martin_kernel_green_ratio(
    spec: &ProcessSpec,
    dom: &Domain,
    x: &Point,
    xref: &Point,
    z: &Point,
    ys: &[Point],
    n: u64,
    cap: GreenCap,
    streams: &Streams,
    cfg: &WalkConfig,
) -> Result<MartinKernel> {
    if ys.len() < 2 {
        return Err(Error::domain("Martin kernel needs at least two approach points"));
    }
    if dom.contains(z) {
        return Err(Error::precondition("z must be a boundary point"));
    }
    let seed = streams.seed();
    let mut rows = Vec::new();
    for (j, y) in ys.iter().enumerate() {
        let s = streams.child(j as u64);
        let targets = [*x, *xref];
        let (m, level) = sampler::estimate_green_many(spec, dom, y, &targets, n, &s, cap, cfg)?;
        let ratio = if x == xref {
            Estimate::exact(1.0, seed)
        } else {
            m.ratio(0, 1, seed)
        };
        rows.push(MartinRow {
            y: *y,
            delta: y.dist(z),
            ratio: Estimate { n, ..ratio },
            cap: level,
            cap_bias: m.mean(2) / m.mean(0),
        });
    }
    if rows.windows(2).any(|w| !(w[1].delta < w[0].delta)) {
        return Err(Error::domain("approach points must move strictly closer to z"));
    }
    let a = rows[rows.len() - 2];
    let b = rows[rows.len() - 1];
    let (mean, se) = linear_intercept(&rows)?;
    let stabilized = math::abs(a.ratio.mean - b.ratio.mean) <= 2.0 * math::hypot(a.ratio.stderr, b.ratio.stderr);
    Ok(MartinKernel {
        rows,
        extrapolated: Estimate { mean, stderr: se, n, seed },
        stabilized,
    })
}

/// Intercept at `δ = 0` of the weighted least-squares line through
/// `(δ_j, ratio_j)`, with its standard error.
fn linear_intercept(rows: &[MartinRow]) -> Result<(f64, f64)> {
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for r in rows {
        let se = r.ratio.stderr;
        if !(se > 0.0) {
            return Err(Error::precondition("every approach point needs a positive standard error"));
        }
        let w = 1.0 / (se * se);
        sw += w;
        sx += w * r.delta;
        sy += w * r.ratio.mean;
        sxx += w * r.delta * r.delta;
        sxy += w * r.delta * r.ratio.mean;
    }
    let det = sw * sxx - sx * sx;
    let mean = (sxx * sy - sx * sxy) / det;
    Ok((mean, math::sqrt(sxx / det)))
}

/// `∫_{D, |y-z|>ε} ν(y, z) G_D(x, y) dy / ∫_{D, |y-z|>ε} ν(y, z) G_D(xref, y) dy`.
///
/// At an inaccessible point both integrals converge as `ε → 0` and the
/// ratio is the Martin kernel. Points `y` are drawn from `ν(z, ·)` on
/// `ε < |y - z| < diam` and scored by `n_inner` walks from `y` (symmetry of
/// `G_D`), which estimate both Green functions at once.
pub fn martin_kernel_inaccessible(
    spec: &ProcessSpec,
    dom: &Domain,
    x: &Point,
    xref: &Point,
    z: &Point,
    eps: f64,
    n_outer: u64,
    n_inner: u64,
    streams: &Streams,
    cfg: &WalkConfig,
) -> Result<Estimate> {
    let (m, _) = martin_integrals(spec, dom, x, xref, z, eps, n_outer, n_inner, streams, cfg)?;
    let seed = streams.seed();
    if x == xref {
        return Ok(Estimate {
            n: n_outer,
            ..Estimate::exact(1.0, seed)
        });
    }
    Ok(m.ratio(0, 1, seed))
}

/// Both weighted Green integrals (columns `x`, `xref`) and the outer radius.
pub fn martin_integrals(
    spec: &ProcessSpec,
    dom: &Domain,
    x: &Point,
    xref: &Point,
    z: &Point,
    eps: f64,
    n_outer: u64,
    n_inner: u64,
    streams: &Streams,
    cfg: &WalkConfig,
) -> Result<(Moments, f64)> {
    if !spec.supports_green() {
        return Err(Error::capability(format!(
            "Green functions need α < d (d={}, α={})",
            spec.d, spec.alpha
        )));
    }
    if dom.contains(z) {
        return Err(Error::precondition("z must be a boundary point"));
    }
    if !(dom.contains(x) && dom.contains(xref)) {
        return Err(Error::precondition("x and xref must lie in the domain"));
    }
    if !(eps > 0.0) || n_outer == 0 || n_inner == 0 {
        return Err(Error::domain("need ε > 0 and positive budgets"));
    }
    let (lo, hi) = dom.bounds();
    let mut far: f64 = 0.0;
    for i in 0..spec.d {
        let e = math::abs(lo[i] - z[i]).max(math::abs(hi[i] - z[i]));
        far += e * e;
    }
    let top = math::sqrt(far) * (1.0 + 1e-12);
    if !(eps < top) {
        return Err(Error::domain("ε exceeds the domain's extent around z"));
    }
    let mass = spec.ring_mass(eps, top)?;
    let targets = [*x, *xref];
    let outer = streams.child(0);
    let inner = streams.child(1);
    let tally = par::fold(
        n_outer,
        par::CHUNK.min(32),
        || (Tally::new(2), 0u64),
        |i, (t, walks)| {
            let mut rng = outer.rng(i);
            let rho = spec.sample_ring_radius(eps, top, &mut rng);
            let y = *z + unit_vector(spec.d, &mut rng) * rho;
            if !dom.contains(&y) || y == *x || y == *xref {
                t.m.push(&[0.0, 0.0]);
                return Ok(());
            }
            let sub = inner.child(i);
            let mut acc = [0.0; 2];
            let mut good = 0u64;
            for j in 0..n_inner {
                let mut wr = sub.rng(j);
                let mut sums = [0.0; 2];
                let mut excess = [0.0; 2];
                let w = sampler::green_walk(spec, dom, &y, &targets, f64::INFINITY, &mut wr, cfg, &mut sums, &mut excess)?;
                if w.capped {
                    t.capped += 1;
                } else {
                    good += 1;
                    acc[0] += sums[0];
                    acc[1] += sums[1];
                }
            }
            *walks += n_inner;
            if good > 0 {
                let k = mass / good as f64;
                t.m.push(&[acc[0] * k, acc[1] * k]);
            }
            Ok(())
        },
        |a, b| {
            a.0.merge(b.0);
            a.1 += b.1;
        },
    )?;
    reliability(tally.0.capped, tally.1.max(1), cfg)?;
    Ok((tally.0.m, top))
}
