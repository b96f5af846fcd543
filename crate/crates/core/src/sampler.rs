//! Walk-on-spheres for the stable process and the estimators built on it.
//!
//! From the current point the walk jumps to the exit position of the largest
//! ball that the domain certifies around it. Jump processes leave balls by a
//! jump, so the exit law of the domain is reproduced exactly and there is no
//! boundary layer to tune. Expected time and occupation density are
//! accumulated step by step through the closed-form ball quantities.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::estimate::{Estimate, Moments};
use crate::exterior::ExteriorData;
use crate::geometry::Domain;
use crate::kernels::ProcessSpec;
use crate::par;
use crate::point::Point;
use crate::rng::Streams;

/// Knobs shared by all walk-based estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkConfig {
    /// Shrink factor `γ ∈ (0, 1]` applied to the inscribed radius.
    pub shrink: f64,
    pub max_steps: u32,
    /// Largest tolerated fraction of walks that hit `max_steps`.
    pub capped_fraction: f64,
    /// Walks this close to a puncture are absorbed there. Only meaningful
    /// when points are hit (`α > d`); `None` picks a default for that case.
    pub absorb_radius: Option<f64>,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            shrink: 1.0,
            max_steps: 10_000,
            capped_fraction: 1e-3,
            absorb_radius: None,
        }
    }
}

impl WalkConfig {
    fn check(&self) -> Result<()> {
        if !(self.shrink > 0.0 && self.shrink <= 1.0) {
            return Err(Error::domain(format!("shrink factor {} outside (0,1]", self.shrink)));
        }
        if self.max_steps == 0 {
            return Err(Error::domain("max_steps must be at least 1"));
        }
        Ok(())
    }

    fn absorb(&self, spec: &ProcessSpec, dom: &Domain) -> f64 {
        if dom.punctures().is_empty() || spec.alpha <= spec.d as f64 {
            return 0.0;
        }
        self.absorb_radius.unwrap_or_else(|| 1e-9 * dom.bounding_ball().1)
    }
}

/// One sample of the exit position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkResult {
    pub exit_point: Point,
    /// Sum of the expected exit times of the balls visited.
    pub time_weight: f64,
    pub steps: u32,
    pub capped: bool,
    /// The walk was absorbed at a puncture.
    pub absorbed: bool,
}

/// Runs one walk, calling `visit(center, radius)` before every ball step.
pub fn walk_observed<R, V>(spec: &ProcessSpec, dom: &Domain, x: &Point, rng: &mut R, cfg: &WalkConfig, mut visit: V) -> Result<WalkResult>
where
    R: RngCore + ?Sized,
    V: FnMut(&Point, f64),
{
    cfg.check()?;
    let mut rad = dom.inscribed_radius(x)?;
    let absorb = cfg.absorb(spec, dom);
    let mut pos = *x;
    let mut time = 0.0;
    let mut steps = 0u32;
    loop {
        if absorb > 0.0 {
            if let Some(p) = dom.punctures().iter().find(|p| p.dist(&pos) < absorb) {
                return Ok(WalkResult {
                    exit_point: *p,
                    time_weight: time,
                    steps,
                    capped: false,
                    absorbed: true,
                });
            }
        }
        if steps >= cfg.max_steps {
            return Ok(WalkResult {
                exit_point: pos,
                time_weight: time,
                steps,
                capped: true,
                absorbed: false,
            });
        }
        let rho = cfg.shrink * rad;
        visit(&pos, rho);
        time += spec.exit_time_center(rho * rho);
        pos = pos + spec.exit_jump(rho, rng);
        steps += 1;
        rad = dom.radius_at(&pos);
        if rad <= 0.0 {
            return Ok(WalkResult {
                exit_point: pos,
                time_weight: time,
                steps,
                capped: false,
                absorbed: false,
            });
        }
    }
}

/// Exit position of `dom` started at `x`.
pub fn walk_exit<R: RngCore + ?Sized>(spec: &ProcessSpec, dom: &Domain, x: &Point, rng: &mut R, cfg: &WalkConfig) -> Result<WalkResult> {
    walk_observed(spec, dom, x, rng, cfg, |_, _| {})
}

fn check_reliability(capped: u64, total: u64, cfg: &WalkConfig) -> Result<()> {
    if capped as f64 > cfg.capped_fraction * total as f64 {
        return Err(Error::Reliability {
            capped,
            total,
            allowed: cfg.capped_fraction,
        });
    }
    Ok(())
}

/// Accumulator for one chunk of walks.
#[derive(Debug, Clone)]
pub(crate) struct Tally {
    pub m: Moments,
    pub capped: u64,
}

impl Tally {
    pub(crate) fn new(k: usize) -> Self {
        Tally {
            m: Moments::new(k),
            capped: 0,
        }
    }

    pub(crate) fn merge(&mut self, o: Tally) {
        self.m.merge(&o.m);
        self.capped += o.capped;
    }
}

/// Runs `n` walks from `x` and records `k` payoffs per uncapped walk.
/// Walk `i` uses stream `i` of `streams`.
pub(crate) fn run_walks<F>(
    spec: &ProcessSpec,
    dom: &Domain,
    x: &Point,
    n: u64,
    streams: &Streams,
    cfg: &WalkConfig,
    k: usize,
    payoff: F,
) -> Result<Moments>
where
    F: Fn(&WalkResult, &mut [f64]) + Sync + Send,
{
    if n == 0 {
        return Err(Error::domain("sample count must be positive"));
    }
    dom.inscribed_radius(x)?;
    let tally = par::fold(
        n,
        par::CHUNK,
        || Tally::new(k),
        |i, t| {
            let mut rng = streams.rng(i);
            let w = walk_exit(spec, dom, x, &mut rng, cfg)?;
            if w.capped {
                t.capped += 1;
            } else {
                let mut buf = [0.0f64; 16];
                let mut heap;
                let out: &mut [f64] = if k <= 16 {
                    &mut buf[..k]
                } else {
                    heap = vec![0.0; k];
                    &mut heap
                };
                payoff(&w, out);
                t.m.push(out);
            }
            Ok(())
        },
        |a, b| a.merge(b),
    )?;
    check_reliability(tally.capped, n, cfg)?;
    Ok(tally.m)
}

/// `E_x h(X(τ_D))` for several data sets at once over shared walks.
pub fn estimate_harmonic_many(
    spec: &ProcessSpec,
    dom: &Domain,
    hs: &[&ExteriorData],
    x: &Point,
    n: u64,
    streams: &Streams,
    cfg: &WalkConfig,
) -> Result<Moments> {
    if let Some(h) = hs.iter().find(|h| !h.fits_dim(dom.dim())) {
        return Err(Error::domain(format!("exterior data {h:?} has the wrong dimension")));
    }
    run_walks(spec, dom, x, n, streams, cfg, hs.len(), |w, out| {
        for (o, h) in out.iter_mut().zip(hs) {
            *o = h.eval(&w.exit_point);
        }
    })
}

/// `E_x h(X(τ_D))`, the regular harmonic extension of `h`.
pub fn estimate_harmonic(
    spec: &ProcessSpec,
    dom: &Domain,
    h: &ExteriorData,
    x: &Point,
    n: u64,
    streams: &Streams,
    cfg: &WalkConfig,
) -> Result<Estimate> {
    Ok(estimate_harmonic_many(spec, dom, &[h], x, n, streams, cfg)?.estimate(0, streams.seed()))
}

/// `s_D(x) = E_x τ_D`.
pub fn estimate_exit_time(spec: &ProcessSpec, dom: &Domain, x: &Point, n: u64, streams: &Streams, cfg: &WalkConfig) -> Result<Estimate> {
    let m = run_walks(spec, dom, x, n, streams, cfg, 1, |w, out| out[0] = w.time_weight)?;
    Ok(m.estimate(0, streams.seed()))
}

/// Truncation of the per-step Green contributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GreenCap {
    None,
    Fixed(f64),
    /// Quantile of the nonzero contributions in a pilot run.
    Pilot {
        quantile: f64,
        walks: u64,
    },
}

impl Default for GreenCap {
    fn default() -> Self {
        GreenCap::Pilot {
            quantile: 0.999,
            walks: 2000,
        }
    }
}

/// A Green-function estimate with its truncation audit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenEstimate {
    pub value: Estimate,
    pub cap: f64,
    /// Mean mass removed by the cap; the estimate is low by this much.
    pub excess: Estimate,
}

/// Sums `Σ_k G_{B(x_k,ρ_k)}(x_k, y_j)` over one walk for every target.
pub(crate) fn green_walk<R: RngCore + ?Sized>(
    spec: &ProcessSpec,
    dom: &Domain,
    start: &Point,
    targets: &[Point],
    cap: f64,
    rng: &mut R,
    cfg: &WalkConfig,
    sums: &mut [f64],
    excess: &mut [f64],
) -> Result<WalkResult> {
    sums.iter_mut().for_each(|s| *s = 0.0);
    excess.iter_mut().for_each(|s| *s = 0.0);
    walk_observed(spec, dom, start, rng, cfg, |c, rho| {
        for (j, y) in targets.iter().enumerate() {
            let t = c.dist(y);
            if t < rho && t > 0.0 {
                let g = spec.green_center(rho, t);
                if g > cap {
                    sums[j] += cap;
                    excess[j] += g - cap;
                } else {
                    sums[j] += g;
                }
            }
        }
    })
}

fn green_checks(spec: &ProcessSpec, dom: &Domain, x: &Point, ys: &[Point]) -> Result<()> {
    if !spec.supports_green() {
        return Err(Error::capability(format!(
            "Green functions need α < d (d={}, α={})",
            spec.d, spec.alpha
        )));
    }
    dom.inscribed_radius(x)?;
    for y in ys {
        if !dom.contains(y) {
            return Err(Error::precondition(format!("target {y:?} is not in the domain")));
        }
        if y == x {
            return Err(Error::Singularity("Green function at coincident points"));
        }
    }
    Ok(())
}

/// Cap level from a pilot run (walk streams under child 1).
pub(crate) fn pilot_cap(
    spec: &ProcessSpec,
    dom: &Domain,
    x: &Point,
    ys: &[Point],
    cap: GreenCap,
    streams: &Streams,
    cfg: &WalkConfig,
) -> Result<f64> {
    match cap {
        GreenCap::None => Ok(f64::INFINITY),
        GreenCap::Fixed(c) => {
            if c > 0.0 {
                Ok(c)
            } else {
                Err(Error::domain("Green cap must be positive"))
            }
        }
        GreenCap::Pilot { quantile, walks } => {
            if !(quantile > 0.0 && quantile < 1.0) {
                return Err(Error::domain("pilot quantile must lie in (0,1)"));
            }
            let pilot = streams.child(1);
            let mut terms: Vec<f64> = par::fold(
                walks,
                par::CHUNK,
                Vec::new,
                |i, acc: &mut Vec<f64>| {
                    let mut rng = pilot.rng(i);
                    walk_observed(spec, dom, x, &mut rng, cfg, |c, rho| {
                        for y in ys {
                            let t = c.dist(y);
                            if t < rho && t > 0.0 {
                                acc.push(spec.green_center(rho, t));
                            }
                        }
                    })?;
                    Ok(())
                },
                |a, b| a.extend(b),
            )?;
            if terms.is_empty() {
                return Ok(f64::INFINITY);
            }
            terms.sort_by(|a, b| a.total_cmp(b));
            let idx = ((terms.len() as f64 * quantile) as usize).min(terms.len() - 1);
            Ok(terms[idx])
        }
    }
}

/// Green estimates `G_D(x, y_j)` for several targets over shared walks,
/// with a common cap. Main walks use streams under child 0.
pub fn estimate_green_many(
    spec: &ProcessSpec,
    dom: &Domain,
    x: &Point,
    ys: &[Point],
    n: u64,
    streams: &Streams,
    cap: GreenCap,
    cfg: &WalkConfig,
) -> Result<(Moments, f64)> {
    green_checks(spec, dom, x, ys)?;
    let level = pilot_cap(spec, dom, x, ys, cap, streams, cfg)?;
    let k = ys.len();
    let main = streams.child(0);
    let tally = par::fold(
        n,
        par::CHUNK,
        || Tally::new(2 * k),
        |i, t| {
            let mut rng = main.rng(i);
            let mut row = vec![0.0; 2 * k];
            let (sums, excess) = row.split_at_mut(k);
            let w = green_walk(spec, dom, x, ys, level, &mut rng, cfg, sums, excess)?;
            if w.capped {
                t.capped += 1;
            } else {
                t.m.push(&row);
            }
            Ok(())
        },
        |a, b| a.merge(b),
    )?;
    check_reliability(tally.capped, n, cfg)?;
    Ok((tally.m, level))
}

/// `G_D(x, y)`.
pub fn estimate_green(
    spec: &ProcessSpec,
    dom: &Domain,
    x: &Point,
    y: &Point,
    n: u64,
    streams: &Streams,
    cap: GreenCap,
    cfg: &WalkConfig,
) -> Result<GreenEstimate> {
    let (m, level) = estimate_green_many(spec, dom, x, core::slice::from_ref(y), n, streams, cap, cfg)?;
    Ok(GreenEstimate {
        value: m.estimate(0, streams.seed()),
        cap: level,
        excess: m.estimate(1, streams.seed()),
    })
}

/// Mean number of steps, a cheap termination diagnostic.
pub fn mean_steps(spec: &ProcessSpec, dom: &Domain, x: &Point, n: u64, streams: &Streams, cfg: &WalkConfig) -> Result<Estimate> {
    let m = run_walks(spec, dom, x, n, streams, cfg, 1, |w, out| out[0] = w.steps as f64)?;
    Ok(m.estimate(0, streams.seed()))
}
