//! Piecewise-constant exterior data.
//!
//! A harmonic function in the regular sense is determined by its values off
//! the domain. Data here are finite sums of constants times indicators of
//! boxes and spherical shells, which is enough for every study and keeps
//! integrals of `h` against power-law kernels exact along rays.

use alloc::vec::Vec;

use crate::math;
use crate::point::Point;

#[derive(Debug, Clone, PartialEq)]
pub enum ExteriorData {
    Constant(f64),
    /// `value` on the closed box `[lo, hi]`; coordinates may be infinite.
    Box {
        lo: Point,
        hi: Point,
        value: f64,
    },
    /// `value` on `inner ≤ |y - center| ≤ outer`; `outer` may be infinite.
    Shell {
        center: Point,
        inner: f64,
        outer: f64,
        value: f64,
    },
    Sum(Vec<ExteriorData>),
}

/// Part of a ray `o + tω` on which one summand is constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaySegment {
    pub t0: f64,
    pub t1: f64,
    pub value: f64,
}

impl ExteriorData {
    /// Indicator of the interval `[lo, hi]` on the line.
    pub fn interval(lo: f64, hi: f64, value: f64) -> Self {
        ExteriorData::Box {
            lo: Point::new(&[lo]),
            hi: Point::new(&[hi]),
            value,
        }
    }

    /// Whether every primitive lives in dimension `d`.
    pub fn fits_dim(&self, d: usize) -> bool {
        match self {
            ExteriorData::Constant(_) => true,
            ExteriorData::Box { lo, hi, .. } => lo.dim() == d && hi.dim() == d,
            ExteriorData::Shell { center, .. } => center.dim() == d,
            ExteriorData::Sum(parts) => parts.iter().all(|p| p.fits_dim(d)),
        }
    }

    pub fn eval(&self, y: &Point) -> f64 {
        match self {
            ExteriorData::Constant(c) => *c,
            ExteriorData::Box { lo, hi, value } => {
                let inside = (0..y.dim()).all(|i| y[i] >= lo[i] && y[i] <= hi[i]);
                if inside {
                    *value
                } else {
                    0.0
                }
            }
            ExteriorData::Shell {
                center,
                inner,
                outer,
                value,
            } => {
                let r = y.dist(center);
                if r >= *inner && r <= *outer {
                    *value
                } else {
                    0.0
                }
            }
            ExteriorData::Sum(parts) => parts.iter().map(|p| p.eval(y)).sum(),
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        match self {
            ExteriorData::Constant(c) => ExteriorData::Constant(c * k),
            ExteriorData::Box { lo, hi, value } => ExteriorData::Box {
                lo: *lo,
                hi: *hi,
                value: value * k,
            },
            ExteriorData::Shell {
                center,
                inner,
                outer,
                value,
            } => ExteriorData::Shell {
                center: *center,
                inner: *inner,
                outer: *outer,
                value: value * k,
            },
            ExteriorData::Sum(parts) => ExteriorData::Sum(parts.iter().map(|p| p.scaled(k)).collect()),
        }
    }

    /// Image under `y ↦ -y`.
    pub fn reflected(&self) -> Self {
        match self {
            ExteriorData::Constant(c) => ExteriorData::Constant(*c),
            ExteriorData::Box { lo, hi, value } => ExteriorData::Box {
                lo: hi.neg(),
                hi: lo.neg(),
                value: *value,
            },
            ExteriorData::Shell {
                center,
                inner,
                outer,
                value,
            } => ExteriorData::Shell {
                center: center.neg(),
                inner: *inner,
                outer: *outer,
                value: *value,
            },
            ExteriorData::Sum(parts) => ExteriorData::Sum(parts.iter().map(|p| p.reflected()).collect()),
        }
    }

    /// Smallest and largest value the data can take (0 included).
    pub fn range(&self) -> (f64, f64) {
        match self {
            ExteriorData::Constant(c) => (c.min(0.0), c.max(0.0)),
            ExteriorData::Box { value, .. } | ExteriorData::Shell { value, .. } => (value.min(0.0), value.max(0.0)),
            ExteriorData::Sum(parts) => parts.iter().fold((0.0, 0.0), |(a, b), p| {
                let (lo, hi) = p.range();
                (a + lo, b + hi)
            }),
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.range().0 >= 0.0
    }

    /// Segments of `{t ≥ 0}` along the ray `o + tω` (`|ω| = 1`) where each
    /// summand is nonzero. Overlapping segments add.
    pub fn ray_segments(&self, o: &Point, w: &Point, out: &mut Vec<RaySegment>) {
        match self {
            ExteriorData::Constant(c) => out.push(RaySegment {
                t0: 0.0,
                t1: f64::INFINITY,
                value: *c,
            }),
            ExteriorData::Box { lo, hi, value } => {
                let mut t0: f64 = 0.0;
                let mut t1 = f64::INFINITY;
                for i in 0..o.dim() {
                    if w[i] == 0.0 {
                        if o[i] < lo[i] || o[i] > hi[i] {
                            return;
                        }
                        continue;
                    }
                    let a = (lo[i] - o[i]) / w[i];
                    let b = (hi[i] - o[i]) / w[i];
                    let (a, b) = if a <= b { (a, b) } else { (b, a) };
                    t0 = t0.max(a);
                    t1 = t1.min(b);
                }
                if t1 > t0 {
                    out.push(RaySegment { t0, t1, value: *value });
                }
            }
            ExteriorData::Shell {
                center,
                inner,
                outer,
                value,
            } => {
                let outer_span = ball_chord(o, w, center, *outer);
                let Some((a, b)) = outer_span else { return };
                match ball_chord(o, w, center, *inner) {
                    Some((c, e)) if e > c => {
                        if c > a {
                            out.push(RaySegment {
                                t0: a,
                                t1: c,
                                value: *value,
                            });
                        }
                        if b > e {
                            out.push(RaySegment {
                                t0: e.max(a),
                                t1: b,
                                value: *value,
                            });
                        }
                    }
                    _ => out.push(RaySegment {
                        t0: a,
                        t1: b,
                        value: *value,
                    }),
                }
            }
            ExteriorData::Sum(parts) => {
                for p in parts {
                    p.ray_segments(o, w, out);
                }
            }
        }
    }
}

/// `{t ≥ 0 : |o + tω - c| ≤ r}` as an interval, if nonempty.
pub(crate) fn ball_chord(o: &Point, w: &Point, c: &Point, r: f64) -> Option<(f64, f64)> {
    if r == f64::INFINITY {
        return Some((0.0, f64::INFINITY));
    }
    let oc = *o - *c;
    let b = w.dot(&oc);
    let q = oc.norm_sq() - r * r;
    let disc = b * b - q;
    if disc < 0.0 {
        return None;
    }
    // Roots of t² + 2bt + q; the smaller-magnitude one from the product q
    // to avoid cancellation next to the sphere.
    let s = math::sqrt(disc);
    let (lo, hi) = if b >= 0.0 {
        let lo = -b - s;
        (lo, if lo != 0.0 { q / lo } else { 0.0 })
    } else {
        let hi = -b + s;
        (q / hi, hi)
    };
    let t0 = lo.max(0.0);
    let t1 = hi;
    if t1 > t0 {
        Some((t0, t1))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn p(x: &[f64]) -> Point {
        Point::new(x)
    }

    #[test]
    fn eval_and_reflection() {
        let h = ExteriorData::Sum(vec![
            ExteriorData::interval(1.0, 2.0, 1.0),
            ExteriorData::interval(2.0, f64::INFINITY, 3.0),
        ]);
        assert_eq!(h.eval(&p(&[1.5])), 1.0);
        assert_eq!(h.eval(&p(&[2.0])), 4.0);
        assert_eq!(h.eval(&p(&[7.0])), 3.0);
        assert_eq!(h.eval(&p(&[0.5])), 0.0);
        let r = h.reflected();
        assert_eq!(r.eval(&p(&[-1.5])), 1.0);
        assert_eq!(r.eval(&p(&[-9.0])), 3.0);
        assert_eq!(h.range(), (0.0, 4.0));
    }

    fn covered(h: &ExteriorData, o: &Point, w: &Point, t: f64) -> f64 {
        let mut segs = Vec::new();
        h.ray_segments(o, w, &mut segs);
        segs.iter().filter(|s| t > s.t0 && t < s.t1).map(|s| s.value).sum()
    }

    #[test]
    fn ray_segments_agree_with_eval() {
        let h = ExteriorData::Sum(vec![
            ExteriorData::Shell {
                center: p(&[0.3, -0.2]),
                inner: 1.0,
                outer: 2.5,
                value: 2.0,
            },
            ExteriorData::Box {
                lo: p(&[1.0, -1.0]),
                hi: p(&[3.0, f64::INFINITY]),
                value: 0.5,
            },
        ]);
        let o = p(&[0.1, 0.2]);
        for k in 0..64 {
            let th = k as f64 * 0.1 + 0.01;
            let w = p(&[math::cos(th), math::sin(th)]);
            for j in 1..200 {
                let t = j as f64 * 0.0317;
                let y = o + w * t;
                assert_eq!(covered(&h, &o, &w, t), h.eval(&y), "theta {th} t {t}");
            }
        }
    }
}
