mod common;

use approx::assert_relative_eq;
use common::*;
use martinlab_core::geometry::Node;
use martinlab_core::potential::*;
use martinlab_core::quad::Tolerance;
use martinlab_core::{Domain, Error, ExteriorData, Point, ProcessSpec, Streams, WalkConfig};
use proptest::prelude::*;
use std::f64::consts::PI;

fn p(x: &[f64]) -> Point {
    Point::new(x)
}

fn interval_pair() -> (ProcessSpec, HarmonicFn, HarmonicFn) {
    let spec = ProcessSpec::new(1, 0.5).unwrap();
    let dom = Domain::interval(0.0, 1.0).unwrap();
    let f = HarmonicFn::exterior(ExteriorData::interval(1.0, 2.0, 1.0), dom.clone());
    let g = HarmonicFn::exterior(ExteriorData::interval(2.0, f64::INFINITY, 1.0), dom);
    (spec, f, g)
}

/// `lim_{x→0} f(x)/g(x)` on `(0, 1)` from the exact kernel: as `x → 0` the
/// kernel factors into a power of `x` times `(y'² - 1)^{-α/2} / y` with
/// `y' = 2y - 1`.
fn interval_limit(alpha: f64) -> f64 {
    // (2y - 1)² - 1 = 4y(y - 1), written in `s = y - 1` near the endpoint.
    let k = |s: f64| (4.0 * (1.0 + s) * s).powf(-alpha / 2.0) / (1.0 + s);
    tanh_sinh(k, 0.0, 1.0, 1e-13) / tanh_sinh_tail(|y| k(y - 1.0), 2.0, 1e-13)
}

#[test]
fn green_oracle_matches_pinned_value() {
    let v = green_oracle(2, 1.5, &[0.0, 0.0], &[0.5, 0.0]);
    assert_relative_eq!(v, 0.166_988_653_336_159_98, max_relative = 1e-10);
}

#[test]
fn interval_limit_value() {
    assert_relative_eq!(interval_limit(0.5), 0.609_747_785_970_584_5, max_relative = 1e-9);
}

#[test]
fn poisson_integral_matches_interval_kernel() {
    let spec = ProcessSpec::new(1, 0.5).unwrap();
    let tol = Tolerance::new(1e-12, 1e-10);
    for (lo, hi) in [(1.2, 3.0), (1.0, 1.1), (2.0, f64::INFINITY)] {
        let h = ExteriorData::interval(lo, hi, 1.0);
        let v = poisson_integral(&spec, 1.0, &p(&[0.3]), &h, tol).unwrap();
        let exact = interval_exit_mass(0.5, 0.0, 1.0, 0.3, lo, hi);
        assert_relative_eq!(v, exact, max_relative = 1e-7);
    }
    assert!(poisson_integral(&spec, 1.0, &p(&[1.3]), &ExteriorData::Constant(1.0), tol).is_err());
}

#[test]
fn dynkin_identity_on_balls() {
    let cases = [
        (1, 0.5, p(&[0.3]), ExteriorData::interval(1.0, 1.1, 1.0)),
        (1, 0.8, p(&[-0.6]), ExteriorData::interval(-3.0, -1.5, 2.0)),
        (
            2,
            0.7,
            p(&[0.0, -0.4]),
            ExteriorData::Shell {
                center: p(&[0.0, 0.0]),
                inner: 1.5,
                outer: f64::INFINITY,
                value: 1.0,
            },
        ),
        (
            2,
            1.5,
            p(&[0.3, 0.1]),
            ExteriorData::Shell {
                center: p(&[0.0, 0.0]),
                inner: 1.0,
                outer: 1.1,
                value: 1.0,
            },
        ),
    ];
    for (d, a, x, h) in cases {
        let spec = ProcessSpec::new(d, a).unwrap();
        let c = dynkin_check(&spec, 1.0, &x, &h).unwrap();
        assert!(c.gap < 1e-6, "d={d} α={a}: {c:?}");
        assert!(c.lhs > 0.0);
    }
}

#[test]
fn ring_functional_of_constants_is_the_ring_mass() {
    let spec = ProcessSpec::new(2, 1.2).unwrap();
    let dom = Domain::ball(p(&[0.0, 0.0]), 1.0).unwrap();
    let one = HarmonicFn::exterior(ExteriorData::Constant(2.0), dom);
    let x0 = p(&[1.0, 0.0]);
    let m = ring_functional(&spec, &x0, 0.1, 0.4, &one, 500, Some(2), &Streams::new(31), &WalkConfig::default()).unwrap();
    assert_relative_eq!(m.value.mean, 2.0 * spec.ring_mass(0.1, 0.4).unwrap(), max_relative = 1e-12);
    assert!(ring_functional(&spec, &x0, 0.4, 0.1, &one, 10, None, &Streams::new(1), &WalkConfig::default()).is_err());
}

#[test]
fn ring_functional_matches_nested_quadrature() {
    // M_{r,s}(f) at x0 = 0 for f = P(X(τ) ≥ 1) on (0, 1): only the part of
    // the ring inside the interval contributes.
    let (spec, _, _) = interval_pair();
    let f = HarmonicFn::exterior(ExteriorData::interval(1.0, f64::INFINITY, 1.0), Domain::interval(0.0, 1.0).unwrap());
    let (r, s) = (0.25, 0.5);
    let a = levy_norm(1, 0.5);
    let exact = tanh_sinh(
        |y| a * y.powf(-1.5) * interval_exit_mass(0.5, 0.5, 0.5, y, 1.0, f64::INFINITY),
        r,
        s,
        1e-10,
    );
    let m = ring_functional(
        &spec,
        &p(&[0.0]),
        r,
        s,
        &f,
        4000,
        Some(16),
        &Streams::new(32),
        &WalkConfig::default(),
    )
    .unwrap();
    assert!(m.value.covers(exact, 4.0), "{:?} vs {exact}", m.value);
}

#[test]
fn decomposition_parts_add_up() {
    let (spec, f, _) = interval_pair();
    let dom = f.domain().clone();
    let x = p(&[0.1]);
    let d = decompose(
        &spec,
        &dom,
        &p(&[0.0]),
        0.25,
        0.5,
        &f,
        &x,
        40_000,
        &Streams::new(33),
        &WalkConfig::default(),
    )
    .unwrap();
    let exact = interval_exit_mass(0.5, 0.5, 0.5, 0.1, 1.0, 2.0);
    let total = d.near.plus(d.far);
    assert!(
        (total.mean - exact).abs() < 4.0 * (d.near.stderr + d.far.stderr),
        "{total:?} vs {exact}"
    );
    let share = d.far_share();
    assert!(share.mean > 0.0 && share.mean < 1.0);
    assert!(decompose(
        &spec,
        &dom,
        &p(&[0.0]),
        0.25,
        0.5,
        &f,
        &p(&[0.5]),
        10,
        &Streams::new(1),
        &WalkConfig::default()
    )
    .is_err());
}

#[test]
fn oscillation_probes_match_exact_values() {
    let (spec, f, g) = interval_pair();
    let plan = OscillationPlan {
        m_points: 4,
        n: 20_000,
        batches: 4,
    };
    let o = oscillation(&spec, &p(&[0.0]), 0.25, &f, &g, &plan, &Streams::new(34), &WalkConfig::default()).unwrap();
    assert!(!o.vacuous);
    for pr in &o.probes {
        let x = pr.x[0];
        assert!(x > 0.0 && x < 0.25);
        let ef = interval_exit_mass(0.5, 0.5, 0.5, x, 1.0, 2.0);
        let eg = interval_exit_mass(0.5, 0.5, 0.5, x, 2.0, f64::INFINITY);
        assert!(pr.f.covers(ef, 4.5), "f({x}) = {:?} vs {ef}", pr.f);
        assert!(pr.g.covers(eg, 4.5), "g({x}) = {:?} vs {eg}", pr.g);
    }
    assert!(o.sup.mean >= o.inf.mean);
    assert_eq!(o.jackknife.len(), 4);

    let same = oscillation(&spec, &p(&[0.0]), 0.25, &f, &f, &plan, &Streams::new(34), &WalkConfig::default()).unwrap();
    assert_eq!(same.ratio.mean, 1.0);
}

#[test]
fn boundary_limit_at_the_interval_endpoint() {
    let (spec, f, g) = interval_pair();
    let radii: Vec<f64> = (3..=6).map(|k| 0.5f64.powi(k)).collect();
    let bl = boundary_limit(
        &spec,
        &p(&[0.0]),
        1.0,
        &f,
        &g,
        &radii,
        4000,
        16,
        &Streams::new(35),
        &WalkConfig::default(),
    )
    .unwrap();
    let l = interval_limit(0.5);
    assert_eq!(bl.table.len(), 4);
    assert!(
        (bl.limit.mean - l).abs() < 3.0 * bl.limit.stderr + 0.03 * l,
        "{:?} vs {l}",
        bl.limit
    );
}

#[test]
fn mirrored_data_at_a_puncture_has_limit_one() {
    let spec = ProcessSpec::new(1, 0.5).unwrap();
    let o = p(&[0.0]);
    let dom = Domain::new(Node::difference(Node::interval(-1.0, 1.0), Node::Point(o))).unwrap();
    let f = HarmonicFn::exterior(ExteriorData::interval(1.0, 2.0, 1.0), dom.clone());
    let g = HarmonicFn::exterior(ExteriorData::interval(-2.0, -1.0, 1.0), dom);
    let radii: Vec<f64> = (2..=5).map(|k| 0.5f64.powi(k)).collect();
    let bl = boundary_limit(&spec, &o, 1.0, &f, &g, &radii, 2000, 16, &Streams::new(36), &WalkConfig::default()).unwrap();
    assert!(bl.limit.covers(1.0, 4.0), "{:?}", bl.limit);
    assert_eq!(bl.outer.0, bl.outer.1);
}

#[test]
fn radius_schedules_are_checked() {
    assert!(check_schedule(&[0.5, 0.25, 0.125]).is_ok());
    assert!(check_schedule(&[0.5, 0.5]).is_err());
    assert!(check_schedule(&[0.25, 0.5]).is_err());
    assert!(check_schedule(&[0.5, -0.1]).is_err());
    assert!(check_schedule(&[]).is_err());
}

fn comb() -> Domain {
    Domain::new(Node::Union(
        (1..=24)
            .map(|n| {
                let a = 0.5f64.powi(n);
                Node::interval(a, a + a * a)
            })
            .collect(),
    ))
    .unwrap()
}

#[test]
fn accessibility_verdicts() {
    let radii: Vec<f64> = (2..=9).map(|k| 0.5f64.powi(k)).collect();
    let o = p(&[0.0]);
    let run = |alpha: f64, dom: &Domain, seed: u64| {
        let spec = ProcessSpec::new(1, alpha).unwrap();
        classify_accessibility(
            &spec,
            dom,
            &o,
            0.5,
            &radii,
            3000,
            16,
            DecisionRule::default(),
            &Streams::new(seed),
            &WalkConfig::default(),
        )
        .unwrap()
    };
    let end = run(0.5, &Domain::interval(0.0, 1.0).unwrap(), 37);
    assert_eq!(end.verdict, Accessibility::Accessible);
    assert!(
        (end.increment_exponent + 0.25).abs() < 4.0 * end.increment_exponent_se + 0.05,
        "{end:?}"
    );

    let punct = Domain::new(Node::difference(Node::interval(-1.0, 1.0), Node::Point(o))).unwrap();
    assert_eq!(run(1.5, &punct, 38).verdict, Accessibility::Accessible);
    assert_eq!(run(0.5, &comb(), 39).verdict, Accessibility::Inaccessible);

    let spec = ProcessSpec::new(1, 0.5).unwrap();
    let inside = classify_accessibility(
        &spec,
        &punct,
        &p(&[0.3]),
        0.5,
        &radii,
        10,
        1,
        DecisionRule::default(),
        &Streams::new(1),
        &WalkConfig::default(),
    );
    assert!(matches!(inside, Err(Error::Precondition(_))));
}

#[test]
fn martin_kernel_of_a_ball() {
    let spec = ProcessSpec::new(2, 1.5).unwrap();
    let dom = Domain::ball(p(&[0.0, 0.0]), 1.0).unwrap();
    let (x, xr, z) = (p(&[0.3, 0.2]), p(&[-0.5, 0.0]), p(&[1.0, 0.0]));
    let ys: Vec<Point> = [0.1, 0.05, 0.025].iter().map(|d| z * (1.0 - d)).collect();
    let mk = martin_kernel_green_ratio(
        &spec,
        &dom,
        &x,
        &xr,
        &z,
        &ys,
        40_000,
        auto_cap(&spec),
        &Streams::new(40),
        &WalkConfig::default(),
    )
    .unwrap();
    for r in &mk.rows {
        let exact = green_oracle(2, 1.5, x.as_slice(), r.y.as_slice()) / green_oracle(2, 1.5, xr.as_slice(), r.y.as_slice());
        assert!(r.ratio.covers(exact, 4.0), "δ={}: {:?} vs {exact}", r.delta, r.ratio);
    }
    let exact = spec.ball_martin_kernel(1.0, &x, &xr, &z).unwrap();
    assert!(mk.extrapolated.covers(exact, 4.0) || (mk.extrapolated.mean / exact - 1.0).abs() < 0.05);

    let interior = martin_kernel_green_ratio(
        &spec,
        &dom,
        &x,
        &xr,
        &p(&[0.0, 0.0]),
        &ys,
        10,
        auto_cap(&spec),
        &Streams::new(1),
        &WalkConfig::default(),
    );
    assert!(matches!(interior, Err(Error::Precondition(_))));
}

#[test]
fn inaccessible_martin_integral_matches_quadrature() {
    // B(0,1) \ {0} with α < d: the puncture is polar, so the Green
    // function is that of the ball and the weighted integrals reduce to
    // ∫_ε^1 ρ^{-1-α} ∫ G(x, ρθ) dθ dρ up to a common constant.
    let (d, alpha, eps) = (2, 1.5, 0.05);
    let spec = ProcessSpec::new(d, alpha).unwrap();
    let o = p(&[0.0, 0.0]);
    let dom = Domain::new(Node::difference(Node::ball(o, 1.0), Node::Point(o))).unwrap();
    let (x, xr) = ([0.3, 0.2], [-0.5, 0.0]);
    let weighted = |pt: [f64; 2]| {
        let rx = (pt[0] * pt[0] + pt[1] * pt[1]).sqrt();
        let th0 = pt[1].atan2(pt[0]);
        let ring = |rho: f64| {
            // Split the circle at the direction of the pole.
            let g = |t: f64| green_oracle(d, alpha, &pt, &[rho * (th0 + t).cos(), rho * (th0 + t).sin()]);
            rho.powf(-1.0 - alpha) * 2.0 * tanh_sinh(g, 0.0, PI, 1e-8)
        };
        tanh_sinh(|s| ring(rx - s), 0.0, rx - eps, 1e-7) + tanh_sinh(|s| ring(rx + s), 0.0, 1.0 - rx, 1e-7)
    };
    let exact = weighted(x) / weighted(xr);
    let e = martin_kernel_inaccessible(
        &spec,
        &dom,
        &p(&x),
        &p(&xr),
        &o,
        eps,
        4000,
        16,
        &Streams::new(41),
        &WalkConfig::default(),
    )
    .unwrap();
    assert!(e.covers(exact, 4.0), "{e:?} vs {exact}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn dynkin_holds_for_random_intervals(x in -0.9f64..0.9, lo in 1.0f64..2.0, w in 0.05f64..2.0, alpha in 0.2f64..0.95) {
        let spec = ProcessSpec::new(1, alpha).unwrap();
        let h = ExteriorData::interval(lo, lo + w, 1.0);
        let c = dynkin_check(&spec, 1.0, &p(&[x]), &h).unwrap();
        prop_assert!(c.gap < 1e-6, "{:?}", c);
        let exact = interval_exit_mass(alpha, 0.0, 1.0, x, lo, lo + w);
        prop_assert!((c.lhs - exact).abs() < 1e-7 * exact.max(1e-3));
    }
}
