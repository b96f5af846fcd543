//! The six studies. Each returns CSV rows and summary lines; nothing here
//! touches the file system.

use std::fmt;

use martinlab_core::counterexample::{gap_statistic, MixtureSpec};
use martinlab_core::geometry::Node;
use martinlab_core::potential::{
    auto_cap, boundary_limit, classify_accessibility, dynkin_check, empirical_contraction, martin_kernel_green_ratio,
    martin_kernel_inaccessible, poisson_integral, DecisionRule, HarmonicFn, OscillationPlan,
};
use martinlab_core::quad::Tolerance;
use martinlab_core::sampler::{estimate_exit_time, walk_exit};
use martinlab_core::stats::{ks_pvalue, ks_statistic};
use martinlab_core::{par, Domain, Error, ExteriorData, Point, Streams, WalkConfig};

use crate::config::{point, Resolved, StudyJson};
use crate::output::Row;

/// Tolerance on the Poisson-kernel normalization.
pub const POISSON_TOL: f64 = 1e-6;
/// Tolerance on the relative Dynkin gap.
pub const DYNKIN_TOL: f64 = 1e-4;

/// A core operation failed while the study ran.
#[derive(Debug, Clone, PartialEq)]
pub struct RunError {
    pub operation: &'static str,
    pub source: Error,
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} failed: {}", self.operation, self.source)
    }
}

trait Op<T> {
    fn op(self, operation: &'static str) -> Result<T, RunError>;
}

impl<T> Op<T> for Result<T, Error> {
    fn op(self, operation: &'static str) -> Result<T, RunError> {
        self.map_err(|source| RunError { operation, source })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StudyOutput {
    pub rows: Vec<Row>,
    pub summary: Vec<String>,
}

pub fn run_study(cfg: &Resolved, seed: u64) -> Result<StudyOutput, RunError> {
    let streams = Streams::new(seed);
    match &cfg.raw.study {
        StudyJson::Kernels { .. } => kernels(cfg, &streams),
        StudyJson::Oscillation { .. } => oscillation(cfg, &streams),
        StudyJson::BoundaryLimit { .. } => limit(cfg, &streams),
        StudyJson::Accessibility { .. } => accessibility(cfg, &streams),
        StudyJson::Martin { .. } => martin(cfg, &streams),
        StudyJson::Counterexample { .. } => counterexample(cfg, &streams),
    }
}

/// Twelve significant digits, shortest form: summaries are for reading,
/// `results.csv` keeps full precision.
pub fn short(x: f64) -> String {
    if !x.is_finite() || x == 0.0 {
        return format!("{x}");
    }
    let r: f64 = format!("{x:.11e}").parse().expect("formatted float");
    format!("{r}")
}

fn pm(mean: f64, se: f64) -> String {
    format!("{} ± {}", short(mean), short(se))
}

fn kernels(cfg: &Resolved, streams: &Streams) -> Result<StudyOutput, RunError> {
    let StudyJson::Kernels { points, n, data } = &cfg.raw.study else {
        unreachable!()
    };
    let spec = &cfg.spec;
    let d = spec.d;
    let seed = streams.seed();
    let n = n.get();
    let mut out = StudyOutput::default();
    out.rows.push(Row::exact("levy_norm", None, spec.levy_norm, seed));
    out.summary.push(format!(
        "process: d = {d}, alpha = {}, levy_norm = {}",
        spec.alpha,
        short(spec.levy_norm)
    ));

    let xs: Vec<Point> = if points.is_empty() {
        vec![Point::origin(d)]
    } else {
        points.iter().map(|p| point("study.points", p, d).expect("validated")).collect()
    };
    let h = match data {
        Some(j) => j.to_data("study.data", d).expect("validated"),
        None => ExteriorData::Shell {
            center: Point::origin(d),
            inner: 1.0,
            outer: 1.1,
            value: 1.0,
        },
    };
    let ball = Domain::ball(Point::origin(d), 1.0).op("ball construction")?;
    // From the center a full-size ball is left in one step with the exact
    // expected time, so the Monte Carlo check walks on half-size balls
    // unless the configuration asks otherwise.
    let mut mc_cfg = cfg.walk.clone();
    if cfg.raw.walk.and_then(|w| w.shrink).is_none() {
        mc_cfg.shrink = 0.5;
    }
    let tol = Tolerance::new(1e-12, 1e-10);
    let mut all_pass = true;
    for (k, x) in xs.iter().enumerate() {
        let r = Some(x.norm());
        let norm = poisson_integral(spec, 1.0, x, &ExteriorData::Constant(1.0), tol).op("poisson_integral")?;
        let pass = (norm - 1.0).abs() < POISSON_TOL;
        all_pass &= pass;
        out.rows.push(Row::exact("poisson_normalization", r, norm, seed));
        out.summary.push(format!(
            "x = {:?}: poisson normalization {} ({}, tolerance {POISSON_TOL})",
            x.as_slice(),
            if pass { "pass" } else { "FAIL" },
            short(norm)
        ));

        if spec.supports_green() {
            let c = dynkin_check(spec, 1.0, x, &h).op("dynkin_check")?;
            let pass = c.gap < DYNKIN_TOL;
            out.rows.push(Row::exact("dynkin_lhs", r, c.lhs, seed));
            out.rows.push(Row::exact("dynkin_rhs", r, c.rhs, seed));
            out.rows.push(Row::exact("dynkin_gap", r, c.gap, seed));
            out.summary.push(format!(
                "x = {:?}: dynkin identity {} (relative gap {}, tolerance {DYNKIN_TOL})",
                x.as_slice(),
                if pass { "pass" } else { "FAIL" },
                short(c.gap)
            ));
        } else {
            out.summary.push(format!(
                "x = {:?}: dynkin identity skipped (Green function needs alpha < d, or alpha < 1 on the line)",
                x.as_slice()
            ));
        }

        let exact = spec.ball_exit_time(1.0, x).op("ball_exit_time")?;
        let mc = estimate_exit_time(spec, &ball, x, n, &streams.child(k as u64), &mc_cfg).op("estimate_exit_time")?;
        let z = if mc.stderr > 0.0 {
            (mc.mean - exact).abs() / mc.stderr
        } else {
            0.0
        };
        out.rows.push(Row::exact("exit_time_exact", r, exact, seed));
        out.rows.push(Row::estimate("exit_time_mc", r, &mc));
        out.summary.push(format!(
            "x = {:?}: exit time of the unit ball {} (closed form); Monte Carlo {} at shrink {}, |z| = {z:.2} {}",
            x.as_slice(),
            short(exact),
            pm(mc.mean, mc.stderr),
            mc_cfg.shrink,
            if z <= 3.0 { "pass" } else { "FAIL" }
        ));
    }

    // One walk step from the center of the unit ball draws the exit radius.
    let ks_streams = streams.child(1 << 20);
    let origin = Point::origin(d);
    let one_step = WalkConfig {
        shrink: 1.0,
        ..cfg.walk.clone()
    };
    let mut radii = par::map(n, |i| {
        walk_exit(spec, &ball, &origin, &mut ks_streams.rng(i), &one_step).map(|w| w.exit_point.norm())
    })
    .op("walk_exit")?;
    let dks = ks_statistic(&mut radii, |t| spec.exit_radius_cdf(t));
    let pv = ks_pvalue(dks, radii.len());
    out.rows.push(Row {
        quantity: "exit_radius_ks_distance".into(),
        r: None,
        mean: dks,
        stderr: 0.0,
        n,
        seed,
    });
    out.rows.push(Row {
        quantity: "exit_radius_ks_pvalue".into(),
        r: None,
        mean: pv,
        stderr: 0.0,
        n,
        seed,
    });
    out.summary.push(format!(
        "exit radius law: KS distance {}, p = {} {}",
        short(dks),
        short(pv),
        if pv > 0.01 { "pass" } else { "FAIL" }
    ));
    if all_pass {
        out.summary.push("poisson normalization pass at every point".into());
    }
    Ok(out)
}

fn pair(cfg: &Resolved, f: &crate::config::DataJson, g: &crate::config::DataJson) -> (HarmonicFn, HarmonicFn) {
    let d = cfg.spec.d;
    let dom = cfg.domain.clone().expect("validated");
    (
        HarmonicFn::exterior(f.to_data("study.f", d).expect("validated"), dom.clone()),
        HarmonicFn::exterior(g.to_data("study.g", d).expect("validated"), dom),
    )
}

fn boundary(cfg: &Resolved) -> (Point, f64) {
    let b = cfg.raw.boundary.as_ref().expect("validated");
    (point("boundary.x0", &b.x0, cfg.spec.d).expect("validated"), b.radius)
}

fn oscillation(cfg: &Resolved, streams: &Streams) -> Result<StudyOutput, RunError> {
    let StudyJson::Oscillation {
        f,
        g,
        radii,
        m_points,
        n,
        batches,
    } = &cfg.raw.study
    else {
        unreachable!()
    };
    let (f, g) = pair(cfg, f, g);
    let (x0, _) = boundary(cfg);
    let plan = OscillationPlan {
        m_points: m_points.get() as usize,
        n: n.get(),
        batches: batches.get(),
    };
    let c = empirical_contraction(&cfg.spec, &x0, radii, &f, &g, &plan, streams, &cfg.walk).op("empirical_contraction")?;
    let seed = streams.seed();
    let mut out = StudyOutput::default();
    for row in &c.rows {
        let o = &row.oscillation;
        out.rows.push(Row::estimate("oscillation_ratio", Some(row.r), &o.ratio));
        out.rows.push(Row::estimate("oscillation_sup", Some(row.r), &o.sup));
        out.rows.push(Row::estimate("oscillation_inf", Some(row.r), &o.inf));
        out.rows.push(Row::estimate("pointwise_ratio", Some(row.r), &o.pooled));
        out.summary.push(format!(
            "r = {}: sup/inf = {}, pointwise ratio {}{}",
            row.r,
            pm(o.ratio.mean, o.ratio.stderr),
            pm(o.pooled.mean, o.pooled.stderr),
            if o.vacuous { " (vacuous)" } else { "" }
        ));
    }
    out.summary.push(format!(
        "monotone decrease: {} ({} violations)",
        if c.monotone_violations == 0 { "yes" } else { "no" },
        c.monotone_violations
    ));
    match (c.factor, c.ci95) {
        (Some(fac), Some((lo, hi))) => {
            out.rows.push(Row::estimate("contraction_factor", None, &fac));
            out.rows.push(Row::exact("contraction_factor_ci95_hi", None, hi, seed));
            out.summary.push(format!(
                "per-octave contraction factor {} (95% CI [{}, {}]): {}",
                pm(fac.mean, fac.stderr),
                short(lo),
                short(hi),
                if hi < 1.0 { "contracting" } else { "not contracting at 95%" }
            ));
        }
        _ => out.summary.push("per-octave contraction factor: undetermined".into()),
    }
    Ok(out)
}

fn limit(cfg: &Resolved, streams: &Streams) -> Result<StudyOutput, RunError> {
    let StudyJson::BoundaryLimit {
        f,
        g,
        radii,
        n_outer,
        n_inner,
    } = &cfg.raw.study
    else {
        unreachable!()
    };
    let (f, g) = pair(cfg, f, g);
    let (x0, radius) = boundary(cfg);
    let bl = boundary_limit(
        &cfg.spec,
        &x0,
        radius,
        &f,
        &g,
        radii,
        n_outer.get(),
        n_inner.get(),
        streams,
        &cfg.walk,
    )
    .op("boundary_limit")?;
    let seed = streams.seed();
    let mut out = StudyOutput::default();
    out.rows.push(Row::exact("outer_f", Some(radius), bl.outer.0, seed));
    out.rows.push(Row::exact("outer_g", Some(radius), bl.outer.1, seed));
    for (r, e) in &bl.table {
        out.rows.push(Row::estimate("ring_ratio", Some(*r), e));
    }
    out.rows.push(Row::estimate("limit", None, &bl.limit));
    out.summary.push(format!(
        "boundary limit of f/g at {:?}: {} ({})",
        x0.as_slice(),
        pm(bl.limit.mean, bl.limit.stderr),
        if bl.stabilized { "stabilized" } else { "not stabilized" }
    ));
    if bl.stabilized {
        out.summary.push(format!("stabilized limit value: {}", short(bl.limit.mean)));
    }
    Ok(out)
}

fn accessibility(cfg: &Resolved, streams: &Streams) -> Result<StudyOutput, RunError> {
    let StudyJson::Accessibility { radii, n_outer, n_inner } = &cfg.raw.study else {
        unreachable!()
    };
    let (x0, radius) = boundary(cfg);
    let dom = cfg.domain.as_ref().expect("validated");
    let rep = classify_accessibility(
        &cfg.spec,
        dom,
        &x0,
        radius,
        radii,
        n_outer.get(),
        n_inner.get(),
        DecisionRule::default(),
        streams,
        &cfg.walk,
    )
    .op("classify_accessibility")?;
    let seed = streams.seed();
    let mut out = StudyOutput::default();
    for (r, e) in &rep.curve {
        out.rows.push(Row::estimate("ring_exit_time", Some(*r), e));
    }
    for (r, e) in &rep.increments {
        out.rows.push(Row::estimate("ring_increment", Some(*r), e));
    }
    out.rows.push(Row {
        quantity: "slope".into(),
        r: None,
        mean: rep.slope,
        stderr: rep.slope_se,
        n: n_outer.get(),
        seed,
    });
    out.rows.push(Row {
        quantity: "increment_exponent".into(),
        r: None,
        mean: rep.increment_exponent,
        stderr: rep.increment_exponent_se,
        n: n_outer.get(),
        seed,
    });
    out.summary.push(format!("verdict: {}", rep.verdict.as_str()));
    out.summary.push(format!(
        "slope of ln M against ln r: {} over {} scales; ring increment exponent {}",
        pm(rep.slope, rep.slope_se),
        rep.fitted_scales,
        pm(rep.increment_exponent, rep.increment_exponent_se)
    ));
    Ok(out)
}

fn martin(cfg: &Resolved, streams: &Streams) -> Result<StudyOutput, RunError> {
    let StudyJson::Martin {
        x,
        z,
        deltas,
        toward,
        n,
        inaccessible,
    } = &cfg.raw.study
    else {
        unreachable!()
    };
    let d = cfg.spec.d;
    let spec = &cfg.spec;
    let dom = cfg.domain.as_ref().expect("validated");
    let x = point("study.x", x, d).expect("validated");
    let z = point("study.z", z, d).expect("validated");
    let xref = point(
        "boundary.xref",
        cfg.raw.boundary.as_ref().and_then(|b| b.xref.as_ref()).expect("validated"),
        d,
    )
    .expect("validated");
    let target = match toward {
        Some(t) => point("study.toward", t, d).expect("validated"),
        None => {
            let c = dom.bounding_ball().0;
            if c == z {
                x
            } else {
                c
            }
        }
    };
    let dir = {
        let v = target - z;
        v * (1.0 / v.norm())
    };
    let ys: Vec<Point> = deltas.iter().map(|&dl| z + dir * dl).collect();
    let mk = martin_kernel_green_ratio(spec, dom, &x, &xref, &z, &ys, n.get(), auto_cap(spec), streams, &cfg.walk)
        .op("martin_kernel_green_ratio")?;
    let seed = streams.seed();
    let mut out = StudyOutput::default();
    for row in &mk.rows {
        out.rows.push(Row::estimate("green_ratio", Some(row.delta), &row.ratio));
    }
    out.rows.push(Row::estimate("martin_green_ratio", None, &mk.extrapolated));
    out.summary.push(format!(
        "Martin kernel M(x, z) by Green-ratio extrapolation: {} ({})",
        pm(mk.extrapolated.mean, mk.extrapolated.stderr),
        if mk.stabilized { "stabilized" } else { "not stabilized" }
    ));
    if let Node::Ball { center, radius } = dom.node() {
        let shift = |p: &Point| *p - *center;
        let exact = spec
            .ball_martin_kernel(*radius, &shift(&x), &shift(&xref), &shift(&z))
            .op("ball_martin_kernel")?;
        let rel = mk.extrapolated.mean / exact - 1.0;
        out.rows.push(Row::exact("martin_closed_form", None, exact, seed));
        out.summary.push(format!(
            "closed-form ball Martin kernel {}; relative deviation {}",
            short(exact),
            short(rel)
        ));
    }
    if let Some(ia) = inaccessible {
        let e = martin_kernel_inaccessible(
            spec,
            dom,
            &x,
            &xref,
            &z,
            ia.eps,
            ia.n_outer.get(),
            ia.n_inner.get(),
            &streams.child(1 << 21),
            &cfg.walk,
        )
        .op("martin_kernel_inaccessible")?;
        out.rows.push(Row::estimate("martin_inaccessible", Some(ia.eps), &e));
        let zs = (e.mean - mk.extrapolated.mean).abs() / e.stderr.hypot(mk.extrapolated.stderr);
        out.summary.push(format!(
            "inaccessible-point formula: {}; difference from the Green-ratio route {zs:.2} combined standard errors",
            pm(e.mean, e.stderr)
        ));
    }
    Ok(out)
}

fn counterexample(cfg: &Resolved, streams: &Streams) -> Result<StudyOutput, RunError> {
    let StudyJson::Counterexample { c1, c2, xs, n, dt, eps0 } = &cfg.raw.study else {
        unreachable!()
    };
    let ms = MixtureSpec::new(*c1, *c2, cfg.spec.alpha).op("mixture")?;
    let ms = ms.with_dt(dt.unwrap_or(ms.dt)).with_eps0(eps0.unwrap_or(ms.eps0));
    let mut out = StudyOutput::default();
    let mut gaps = Vec::new();
    for (k, &x) in xs.iter().enumerate() {
        let e = gap_statistic(&ms, x, n.get(), &streams.child(k as u64), cfg.walk.capped_fraction).op("gap_statistic")?;
        out.rows.push(Row::estimate("f", Some(x), &e.f));
        out.rows.push(Row::estimate("g", Some(x), &e.g));
        out.rows.push(Row::estimate("gap", Some(x), &e.gap));
        out.rows.push(Row::estimate("absorbed", Some(x), &e.absorbed));
        let lo = e.gap.mean - 1.96 * e.gap.stderr;
        let hi = e.gap.mean + 1.96 * e.gap.stderr;
        let sign = if lo > 0.0 {
            "positive"
        } else if hi < 0.0 {
            "negative"
        } else {
            "undetermined"
        };
        out.summary.push(format!(
            "x = {x}: gap f(x)/g(x) - f(-x)/g(-x) = {} (95% CI [{}, {}]), gap sign {sign}",
            pm(e.gap.mean, e.gap.stderr),
            short(lo),
            short(hi)
        ));
        gaps.push((x, e.gap));
    }
    gaps.sort_by(|a, b| a.0.total_cmp(&b.0));
    if gaps.len() >= 2 {
        let (small, large) = (gaps[0].1, gaps[gaps.len() - 1].1);
        let z = (large.mean - small.mean) / small.stderr.hypot(large.stderr);
        out.summary.push(format!(
            "gap from the largest to the smallest x: {} -> {} ({})",
            short(large.mean),
            short(small.mean),
            if z > 1.96 { "shrinking" } else { "not shrinking" }
        ));
    }
    Ok(out)
}
