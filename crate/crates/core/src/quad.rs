//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Subintervals are kept in a max-heap keyed by their error estimate; the
//! worst one is bisected until the summed estimate meets the tolerance.
//! Semi-infinite ranges are mapped onto bounded ones before integration.

use alloc::collections::BinaryHeap;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::math;
use crate::point::Point;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Absolute and relative error targets; the looser of the two wins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-8,
            rel: 1e-10,
            max_intervals: 4000,
        }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance {
            abs,
            rel,
            ..Tolerance::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_k = math::abs(kron);
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kron += WGK[j] * (f1 + f2);
        abs_k += WGK[j] * (math::abs(f1) + math::abs(f2));
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = kron * 0.5;
    let mut asc = WGK[7] * math::abs(fc - mean);
    for j in 0..7 {
        asc += WGK[j] * (math::abs(fv1[j] - mean) + math::abs(fv2[j] - mean));
    }
    let value = kron * h;
    let asc = asc * math::abs(h);
    let mut error = math::abs((kron - gauss) * h);
    if asc != 0.0 && error != 0.0 {
        let scale = math::powf(200.0 * error / asc, 1.5);
        error = asc * if scale < 1.0 { scale } else { 1.0 };
    }
    let round = 50.0 * f64::EPSILON * abs_k * math::abs(h);
    if round > error {
        error = round;
    }
    Segment { a, b, value, error }
}

/// `∫_a^b f(x) dx` over a finite range.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Numeric("integrate: infinite limits, use integrate_tail".into()));
    }
    let first = kronrod(&mut f, a, b);
    let mut value = first.value;
    let mut error = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    while error > tol.abs.max(tol.rel * math::abs(value)) {
        if heap.len() >= tol.max_intervals {
            return Err(Error::Numeric(alloc::format!(
                "quadrature on [{a}, {b}] did not converge: value {value}, error {error}"
            )));
        }
        let worst = heap.pop().expect("heap is never empty here");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Interval collapsed to machine precision; accept what we have.
            heap.push(worst);
            break;
        }
        let left = kronrod(&mut f, worst.a, mid);
        let right = kronrod(&mut f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed the drift of incremental updates.
    let mut v = 0.0;
    let mut e = 0.0;
    for s in heap.iter() {
        v += s.value;
        e += s.error;
    }
    Ok(QuadResult {
        value: v,
        error: e,
        intervals: heap.len(),
    })
}

/// `∫_a^b f` split at interior breakpoints (sorted, inside `(a, b)`), useful for
/// integrands with known kinks or integrable singularities.
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(mut f: F, points: &[f64], tol: Tolerance) -> Result<QuadResult> {
    let mut total = QuadResult {
        value: 0.0,
        error: 0.0,
        intervals: 0,
    };
    let pieces = points.len().saturating_sub(1).max(1) as f64;
    let sub = Tolerance {
        abs: tol.abs / pieces,
        ..tol
    };
    for w in points.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let r = integrate(&mut f, w[0], w[1], sub)?;
        total.value += r.value;
        total.error += r.error;
        total.intervals += r.intervals;
    }
    Ok(total)
}

/// `∫_a^∞ f(t) dt` for `a > 0` via the substitution `u = a / t`, which maps the
/// tail onto `(0, 1]` with Jacobian `a / u²`.
pub fn integrate_tail<F: FnMut(f64) -> f64>(mut f: F, a: f64, tol: Tolerance) -> Result<QuadResult> {
    if a <= 0.0 {
        return integrate_half_line(f, a, tol);
    }
    integrate(
        |u: f64| {
            if u <= 0.0 {
                0.0
            } else {
                let t = a / u;
                f(t) * a / (u * u)
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// `∫_a^∞ f(t) dt` for any finite `a`, via `t = a + u / (1 - u)`.
pub fn integrate_half_line<F: FnMut(f64) -> f64>(mut f: F, a: f64, tol: Tolerance) -> Result<QuadResult> {
    integrate(
        |u: f64| {
            if u >= 1.0 {
                0.0
            } else {
                let w = 1.0 - u;
                f(a + u / w) / (w * w)
            }
        },
        0.0,
        1.0,
        tol,
    )
}

/// `∫_a^∞ f(t) g(t) dt` where `g` oscillates with half-period `half_period` and
/// `f`-weighted lobes alternate in sign with decaying magnitude. Lobes are
/// integrated one by one and the partial sums are accelerated by repeated
/// averaging (Euler transform of an alternating series).
pub fn integrate_oscillatory_tail<F: FnMut(f64) -> f64>(mut f: F, a: f64, half_period: f64, tol: Tolerance) -> Result<QuadResult> {
    const LOBES: usize = 48;
    let mut partial = alloc::vec::Vec::with_capacity(LOBES);
    let mut sum = 0.0;
    let mut err = 0.0;
    let mut lo = a;
    let lobe_tol = Tolerance {
        abs: tol.abs / LOBES as f64,
        ..tol
    };
    for _ in 0..LOBES {
        let hi = lo + half_period;
        let r = integrate(&mut f, lo, hi, lobe_tol)?;
        sum += r.value;
        err += r.error;
        partial.push(sum);
        lo = hi;
    }
    // Repeated averaging of consecutive partial sums.
    let mut level = partial;
    while level.len() > 1 {
        let next: alloc::vec::Vec<f64> = level.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let spread = math::abs(next[next.len() - 1] - level[level.len() - 1]);
        level = next;
        if level.len() <= 2 {
            err += spread;
            break;
        }
    }
    Ok(QuadResult {
        value: level[level.len() - 1],
        error: err,
        intervals: LOBES,
    })
}

/// `∫_a^b f` when `f` behaves like `(t-a)^(-pa)` near `a` and `(b-t)^(-pb)`
/// near `b` (`pa, pb < 1`). Each half is mapped by `t - a = u^q` with
/// `q = 1/(1-p)`, which turns the algebraic endpoint singularity into a
/// bounded integrand.
pub fn integrate_algebraic<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, pa: f64, pb: f64, tol: Tolerance) -> Result<QuadResult> {
    let m = 0.5 * (a + b);
    let half = Tolerance { abs: tol.abs / 2.0, ..tol };
    let qa = 1.0 / (1.0 - pa.max(0.0));
    let qb = 1.0 / (1.0 - pb.max(0.0));
    let la = math::powf(m - a, 1.0 / qa);
    let lb = math::powf(b - m, 1.0 / qb);
    let left = integrate(
        |u: f64| {
            if u <= 0.0 {
                return 0.0;
            }
            let v = f(a + math::powf(u, qa)) * qa * math::powf(u, qa - 1.0);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        la,
        half,
    )?;
    let right = integrate(
        |u: f64| {
            if u <= 0.0 {
                return 0.0;
            }
            let v = f(b - math::powf(u, qb)) * qb * math::powf(u, qb - 1.0);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        lb,
        half,
    )?;
    Ok(QuadResult {
        value: left.value + right.value,
        error: left.error + right.error,
        intervals: left.intervals + right.intervals,
    })
}

/// `∫_{S^{d-1}} f(ω) dω` for `d ≤ 3`.
pub fn integrate_sphere<F: FnMut(&Point) -> f64>(d: usize, mut f: F, tol: Tolerance) -> Result<QuadResult> {
    match d {
        1 => {
            let v = f(&Point::new(&[1.0])) + f(&Point::new(&[-1.0]));
            Ok(QuadResult {
                value: v,
                error: 0.0,
                intervals: 0,
            })
        }
        2 => integrate(|t| f(&Point::new(&[math::cos(t), math::sin(t)])), 0.0, 2.0 * math::PI, tol),
        3 => {
            let inner_tol = Tolerance {
                abs: tol.abs / 10.0,
                ..tol
            };
            let mut failure = None;
            let r = integrate(
                |th| {
                    let (s, c) = (math::sin(th), math::cos(th));
                    let r = integrate(
                        |ph| f(&Point::new(&[s * math::cos(ph), s * math::sin(ph), c])),
                        0.0,
                        2.0 * math::PI,
                        inner_tol,
                    );
                    match r {
                        Ok(v) => v.value * s,
                        Err(e) => {
                            failure = Some(e);
                            0.0
                        }
                    }
                },
                0.0,
                math::PI,
                tol,
            )?;
            match failure {
                Some(e) => Err(e),
                None => Ok(r),
            }
        }
        _ => Err(Error::capability(alloc::format!(
            "sphere quadrature is implemented for d ≤ 3, not d = {d}"
        ))),
    }
}

/// `∫_{S^{d-1}} f(ω) dω` in coordinates centred on the unit vector `pole`
/// (`d ≤ 3`). Integrands peaked around the pole are resolved by bisection
/// towards an interval endpoint instead of an interior point.
pub fn integrate_sphere_about<F: FnMut(&Point) -> f64>(d: usize, pole: &Point, mut f: F, tol: Tolerance) -> Result<QuadResult> {
    match d {
        1 => integrate_sphere(1, f, tol),
        2 => {
            let p0 = math::atan2(pole[1], pole[0]);
            let half = Tolerance { abs: tol.abs / 2.0, ..tol };
            let mut side = |sign: f64| {
                integrate(
                    |t| {
                        let a = p0 + sign * t;
                        f(&Point::new(&[math::cos(a), math::sin(a)]))
                    },
                    0.0,
                    math::PI,
                    half,
                )
            };
            let a = side(1.0)?;
            let b = side(-1.0)?;
            Ok(QuadResult {
                value: a.value + b.value,
                error: a.error + b.error,
                intervals: a.intervals + b.intervals,
            })
        }
        3 => {
            // Orthonormal frame (e1, e2, pole).
            let k = if math::abs(pole[0]) < 0.9 { 0 } else { 1 };
            let mut e = Point::origin(3);
            e[k] = 1.0;
            let e1 = {
                let v = e - *pole * pole.dot(&e);
                v * (1.0 / v.norm())
            };
            let e2 = Point::new(&[
                pole[1] * e1[2] - pole[2] * e1[1],
                pole[2] * e1[0] - pole[0] * e1[2],
                pole[0] * e1[1] - pole[1] * e1[0],
            ]);
            let inner_tol = Tolerance {
                abs: tol.abs / 10.0,
                ..tol
            };
            let mut failure = None;
            let r = integrate(
                |th| {
                    let (s, c) = (math::sin(th), math::cos(th));
                    let r = integrate(
                        |ph| f(&(*pole * c + e1 * (s * math::cos(ph)) + e2 * (s * math::sin(ph)))),
                        0.0,
                        2.0 * math::PI,
                        inner_tol,
                    );
                    match r {
                        Ok(v) => v.value * s,
                        Err(e) => {
                            failure = Some(e);
                            0.0
                        }
                    }
                },
                0.0,
                math::PI,
                tol,
            )?;
            match failure {
                Some(e) => Err(e),
                None => Ok(r),
            }
        }
        _ => integrate_sphere(d, f, tol),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, Tolerance::default()).unwrap();
        assert!((r.value - 0.0).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2
        let r = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, Tolerance::new(1e-10, 1e-12)).unwrap();
        assert!((r.value - 2.0).abs() < 1e-8, "{}", r.value);
    }

    #[test]
    fn tail_power_law() {
        // ∫_1^∞ t^{-3/2} dt = 2
        let r = integrate_tail(|t| t.powf(-1.5), 1.0, Tolerance::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-8);
        let r = integrate_half_line(|t| (-t).exp(), 0.0, Tolerance::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn oscillatory_dirichlet_integral() {
        // ∫_0^∞ sin(t)/t dt = π/2
        let r = integrate_oscillatory_tail(
            |t| if t == 0.0 { 1.0 } else { t.sin() / t },
            0.0,
            math::PI,
            Tolerance::new(1e-12, 1e-12),
        )
        .unwrap();
        assert!((r.value - math::FRAC_PI_2).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn algebraic_endpoints() {
        // ∫_0^1 t^{-0.75} (1-t)^{-0.5} dt = B(0.25, 0.5)
        let r = integrate_algebraic(
            |t| t.powf(-0.75) * (1.0 - t).powf(-0.5),
            0.0,
            1.0,
            0.75,
            0.5,
            Tolerance::new(1e-12, 1e-12),
        )
        .unwrap();
        let exact = crate::special::beta(0.25, 0.5);
        assert!((r.value - exact).abs() < 1e-9 * exact, "{} {}", r.value, exact);
    }

    #[test]
    fn sphere_areas() {
        for d in 1..=3 {
            let r = integrate_sphere(d, |_| 1.0, Tolerance::default()).unwrap();
            assert!((r.value - crate::special::unit_sphere_area(d)).abs() < 1e-10);
        }
        let r = integrate_sphere(3, |w| w[2] * w[2], Tolerance::default()).unwrap();
        assert!((r.value - 4.0 * math::PI / 3.0).abs() < 1e-10);
        assert!(integrate_sphere(4, |_| 1.0, Tolerance::default()).is_err());
        let pole = Point::new(&[0.0, 0.6, 0.8]);
        let r = integrate_sphere_about(3, &pole, |w| w[2] * w[2], Tolerance::default()).unwrap();
        assert!((r.value - 4.0 * math::PI / 3.0).abs() < 1e-10);
        let pole = Point::new(&[0.6, -0.8]);
        let r = integrate_sphere_about(2, &pole, |w| w[0] * w[0], Tolerance::default()).unwrap();
        assert!((r.value - math::PI).abs() < 1e-10);
    }
}
