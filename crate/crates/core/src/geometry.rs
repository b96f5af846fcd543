//! Bounded open sets built from balls and boxes.
//!
//! A [`Node`] tree is read as an open set: primitives are open, unions and
//! intersections act as usual, and `Difference(a, b)` removes the closure of
//! `b` from `a`. A lone [`Node::Point`] is only useful as something to
//! remove; it makes punctures first-class.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::math;
use crate::point::Point;
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Ball { center: Point, radius: f64 },
    Box { lo: Point, hi: Point },
    Union(Vec<Node>),
    Intersection(Vec<Node>),
    Difference(Box<Node>, Box<Node>),
    Point(Point),
}

impl Node {
    pub fn ball(center: Point, radius: f64) -> Self {
        Node::Ball { center, radius }
    }

    /// The open interval `(a, b)`.
    pub fn interval(a: f64, b: f64) -> Self {
        Node::Box {
            lo: Point::new(&[a]),
            hi: Point::new(&[b]),
        }
    }

    pub fn difference(base: Node, sub: Node) -> Self {
        Node::Difference(Box::new(base), Box::new(sub))
    }

    fn dim(&self) -> Option<usize> {
        match self {
            Node::Ball { center, .. } => Some(center.dim()),
            Node::Box { lo, .. } => Some(lo.dim()),
            Node::Point(p) => Some(p.dim()),
            Node::Union(c) | Node::Intersection(c) => c.first().and_then(|n| n.dim()),
            Node::Difference(a, _) => a.dim(),
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        let check = |p: &Point| {
            if p.dim() != d {
                Err(Error::domain(format!("mixed dimensions {} and {d}", p.dim())))
            } else if p.as_slice().iter().any(|c| c.is_nan()) {
                Err(Error::domain("NaN coordinate"))
            } else {
                Ok(())
            }
        };
        match self {
            Node::Ball { center, radius } => {
                check(center)?;
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::domain(format!("ball radius {radius} must be positive and finite")));
                }
                Ok(())
            }
            Node::Box { lo, hi } => {
                check(lo)?;
                check(hi)?;
                if (0..d).any(|i| !(lo[i] < hi[i])) {
                    return Err(Error::domain("box needs lo < hi in every coordinate"));
                }
                Ok(())
            }
            Node::Point(p) => check(p),
            Node::Union(c) | Node::Intersection(c) => {
                if c.is_empty() {
                    return Err(Error::domain("empty union or intersection"));
                }
                c.iter().try_for_each(|n| n.validate(d))
            }
            Node::Difference(a, b) => {
                a.validate(d)?;
                b.validate(d)
            }
        }
    }

    /// Membership in the open set.
    pub fn contains(&self, x: &Point) -> bool {
        match self {
            Node::Ball { center, radius } => x.dist(center) < *radius,
            Node::Box { lo, hi } => (0..x.dim()).all(|i| x[i] > lo[i] && x[i] < hi[i]),
            Node::Union(c) => c.iter().any(|n| n.contains(x)),
            Node::Intersection(c) => c.iter().all(|n| n.contains(x)),
            Node::Difference(a, b) => a.contains(x) && !b.closure_contains(x),
            Node::Point(_) => false,
        }
    }

    /// Membership in a closed set containing the closure (exact for
    /// primitives and unions).
    fn closure_contains(&self, x: &Point) -> bool {
        match self {
            Node::Ball { center, radius } => x.dist(center) <= *radius,
            Node::Box { lo, hi } => (0..x.dim()).all(|i| x[i] >= lo[i] && x[i] <= hi[i]),
            Node::Union(c) => c.iter().any(|n| n.closure_contains(x)),
            Node::Intersection(c) => c.iter().all(|n| n.closure_contains(x)),
            Node::Difference(a, b) => a.closure_contains(x) && !b.contains(x),
            Node::Point(p) => x == p,
        }
    }

    /// Lower bound on the distance from an interior `x` to the complement;
    /// zero when `x` is not inside.
    fn inscribed(&self, x: &Point) -> f64 {
        match self {
            Node::Ball { center, radius } => (radius - x.dist(center)).max(0.0),
            Node::Box { lo, hi } => {
                let mut m = f64::INFINITY;
                for i in 0..x.dim() {
                    m = m.min(x[i] - lo[i]).min(hi[i] - x[i]);
                }
                m.max(0.0)
            }
            Node::Union(c) => c.iter().map(|n| n.inscribed(x)).fold(0.0, f64::max),
            Node::Intersection(c) => c.iter().map(|n| n.inscribed(x)).fold(f64::INFINITY, f64::min),
            Node::Difference(a, b) => a.inscribed(x).min(b.outside(x)),
            Node::Point(_) => 0.0,
        }
    }

    /// Lower bound on the distance from `x` to the closure of the set.
    fn outside(&self, x: &Point) -> f64 {
        match self {
            Node::Ball { center, radius } => (x.dist(center) - radius).max(0.0),
            Node::Box { lo, hi } => {
                let mut s = 0.0;
                for i in 0..x.dim() {
                    let e = (lo[i] - x[i]).max(x[i] - hi[i]).max(0.0);
                    s += e * e;
                }
                math::sqrt(s)
            }
            Node::Union(c) => c.iter().map(|n| n.outside(x)).fold(f64::INFINITY, f64::min),
            Node::Intersection(c) => c.iter().map(|n| n.outside(x)).fold(0.0, f64::max),
            Node::Difference(a, _) => a.outside(x),
            Node::Point(p) => x.dist(p),
        }
    }

    /// Axis-aligned box containing the set.
    fn bounds(&self, d: usize) -> (Point, Point) {
        match self {
            Node::Ball { center, radius } => {
                let mut lo = *center;
                let mut hi = *center;
                for i in 0..d {
                    lo[i] -= radius;
                    hi[i] += radius;
                }
                (lo, hi)
            }
            Node::Box { lo, hi } => (*lo, *hi),
            Node::Point(p) => (*p, *p),
            Node::Union(c) => {
                let mut acc = c[0].bounds(d);
                for n in &c[1..] {
                    let (l, h) = n.bounds(d);
                    for i in 0..d {
                        acc.0[i] = acc.0[i].min(l[i]);
                        acc.1[i] = acc.1[i].max(h[i]);
                    }
                }
                acc
            }
            Node::Intersection(c) => {
                let mut acc = c[0].bounds(d);
                for n in &c[1..] {
                    let (l, h) = n.bounds(d);
                    for i in 0..d {
                        acc.0[i] = acc.0[i].max(l[i]);
                        acc.1[i] = acc.1[i].min(h[i]);
                    }
                }
                acc
            }
            Node::Difference(a, _) => a.bounds(d),
        }
    }

    fn collect_points(&self, removed: bool, out: &mut Vec<Point>) {
        match self {
            Node::Point(p) if removed => out.push(*p),
            Node::Union(c) | Node::Intersection(c) => c.iter().for_each(|n| n.collect_points(removed, out)),
            Node::Difference(a, b) => {
                a.collect_points(removed, out);
                b.collect_points(true, out);
            }
            _ => {}
        }
    }

    /// Points of the underlying primitives that come close to `x0`; used to
    /// certify that `x0` is a boundary point without blind rejection.
    fn candidates(&self, x0: &Point, rho: f64, out: &mut Vec<Point>) {
        let d = x0.dim();
        match self {
            Node::Ball { center, radius } => {
                let dist = x0.dist(center);
                let depth = (rho / 2.0).min(*radius);
                if dist < *radius {
                    out.push(*x0);
                    for i in 0..d {
                        let mut p = *x0;
                        p[i] += rho / 2.0;
                        out.push(p);
                        p[i] -= rho;
                        out.push(p);
                    }
                } else if dist > 0.0 {
                    let step = dist - radius + depth;
                    out.push(*x0 + (*center - *x0) * (step / dist));
                }
            }
            Node::Box { lo, hi } => {
                let mut p = *x0;
                let shift = rho / (2.0 * math::sqrt(d as f64));
                for i in 0..d {
                    let half = (hi[i] - lo[i]) / 2.0;
                    let m = shift.min(half);
                    p[i] = x0[i].clamp(lo[i] + m, hi[i] - m);
                }
                out.push(p);
                for i in 0..d {
                    for s in [-1.0, 1.0] {
                        let mut q = p;
                        q[i] += s * shift / 2.0;
                        out.push(q);
                    }
                }
            }
            Node::Union(c) => c.iter().for_each(|n| n.candidates(x0, rho, out)),
            Node::Intersection(c) => c[0].candidates(x0, rho, out),
            Node::Difference(a, _) => a.candidates(x0, rho, out),
            Node::Point(_) => {}
        }
    }
}

/// A validated bounded open set with cached bounds and punctures.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    node: Node,
    dim: usize,
    lo: Point,
    hi: Point,
    punctures: Vec<Point>,
}

impl Domain {
    pub fn new(node: Node) -> Result<Self> {
        let dim = node.dim().ok_or_else(|| Error::domain("domain has no primitives"))?;
        node.validate(dim)?;
        if matches!(node, Node::Point(_)) {
            return Err(Error::domain("a single point is not an open set"));
        }
        let (lo, hi) = node.bounds(dim);
        if (0..dim).any(|i| !(lo[i].is_finite() && hi[i].is_finite())) {
            return Err(Error::domain("domain must be bounded"));
        }
        let mut punctures = Vec::new();
        node.collect_points(false, &mut punctures);
        Ok(Domain {
            node,
            dim,
            lo,
            hi,
            punctures,
        })
    }

    pub fn ball(center: Point, radius: f64) -> Result<Self> {
        Domain::new(Node::ball(center, radius))
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Domain::new(Node::interval(a, b))
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Bounding box corners.
    pub fn bounds(&self) -> (Point, Point) {
        (self.lo, self.hi)
    }

    /// Center and radius of a ball containing the set.
    pub fn bounding_ball(&self) -> (Point, f64) {
        let c = (self.lo + self.hi) * 0.5;
        (c, self.lo.dist(&self.hi) / 2.0)
    }

    /// Removed points (zero-radius exclusions).
    pub fn punctures(&self) -> &[Point] {
        &self.punctures
    }

    pub fn contains(&self, x: &Point) -> bool {
        x.dim() == self.dim && self.node.contains(x)
    }

    /// Sound lower bound on the distance from `x` to the complement.
    pub fn inscribed_radius(&self, x: &Point) -> Result<f64> {
        if !self.contains(x) {
            return Err(Error::precondition(format!("{x:?} is not in the domain")));
        }
        Ok(self.node.inscribed(x))
    }

    /// `inscribed_radius` without the membership check; zero outside.
    #[inline]
    pub fn radius_at(&self, x: &Point) -> f64 {
        if self.node.contains(x) {
            self.node.inscribed(x)
        } else {
            0.0
        }
    }

    /// `D ∩ B(x0, r)`.
    pub fn truncate(&self, x0: &Point, r: f64) -> Result<Domain> {
        if !(r > 0.0) {
            return Err(Error::domain(format!("truncation radius {r} must be positive")));
        }
        Domain::new(Node::Intersection(alloc::vec![self.node.clone(), Node::ball(*x0, r)]))
    }

    /// Whether the domain certainly lies in the closed ball `B(c, r)`.
    pub fn within_ball(&self, c: &Point, r: f64) -> bool {
        let mut far = 0.0;
        for i in 0..self.dim {
            let e = math::abs(self.lo[i] - c[i]).max(math::abs(self.hi[i] - c[i]));
            far += e * e;
        }
        math::sqrt(far) <= r
    }

    /// `n` points drawn uniformly from the domain, or from its part in the
    /// ring `r < |x - x0| < s` when given, by rejection from a bounding box.
    pub fn sample_region<R: RngCore + ?Sized>(
        &self,
        ring: Option<(Point, f64, f64)>,
        n: usize,
        budget: Option<u64>,
        rng: &mut R,
    ) -> Result<Vec<Point>> {
        let (mut lo, mut hi) = (self.lo, self.hi);
        if let Some((x0, _, s)) = &ring {
            for i in 0..self.dim {
                lo[i] = lo[i].max(x0[i] - s);
                hi[i] = hi[i].min(x0[i] + s);
            }
        }
        let budget = budget.unwrap_or(100 * n as u64 + 10_000);
        let mut out = Vec::with_capacity(n);
        let mut tried = 0u64;
        while out.len() < n {
            if tried >= budget {
                return Err(Error::EmptyRegion {
                    tried,
                    accepted: out.len() as u64,
                });
            }
            tried += 1;
            let mut p = Point::origin(self.dim);
            for i in 0..self.dim {
                p[i] = lo[i] + (hi[i] - lo[i]) * rng::uniform(rng);
            }
            let in_ring = match &ring {
                Some((x0, r, s)) => {
                    let t = p.dist(x0);
                    t > *r && t < *s
                }
                None => true,
            };
            if in_ring && self.node.contains(&p) {
                out.push(p);
            }
        }
        Ok(out)
    }

    /// A point of the domain within distance `rho` of `x0`, if one is found.
    pub fn probe_near<R: RngCore + ?Sized>(&self, x0: &Point, rho: f64, rng: &mut R) -> Option<Point> {
        let mut cands = Vec::new();
        self.node.candidates(x0, rho, &mut cands);
        if let Some(p) = cands.into_iter().find(|p| p.dist(x0) < rho && self.node.contains(p)) {
            return Some(p);
        }
        for _ in 0..4096 {
            let u = crate::kernels::unit_vector(self.dim, rng);
            let t = rho * math::powf(rng::uniform_open(rng), 1.0 / self.dim as f64);
            let p = *x0 + u * t;
            if self.node.contains(&p) {
                return Some(p);
            }
        }
        None
    }
}

/// A boundary point, a working radius and a reference point.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryQuery {
    pub x0: Point,
    pub radius: f64,
    pub xref: Point,
}

impl BoundaryQuery {
    /// Checks that `x0` is a boundary point (probing `B(x0, 2^-k)` for
    /// `k = 1..=20`) and that `xref` is an admissible reference point.
    pub fn validate<R: RngCore + ?Sized>(&self, dom: &Domain, rng: &mut R) -> Result<()> {
        if dom.contains(&self.x0) {
            return Err(Error::precondition("boundary point lies inside the domain"));
        }
        if !(self.radius > 0.0) {
            return Err(Error::domain("working radius must be positive"));
        }
        if !dom.contains(&self.xref) {
            return Err(Error::precondition("reference point must lie in the domain"));
        }
        if !(self.xref.dist(&self.x0) > self.radius) {
            return Err(Error::precondition("reference point must satisfy |xref - x0| > R"));
        }
        for k in 1..=20 {
            let rho = math::powi(0.5, k);
            if dom.probe_near(&self.x0, rho, rng).is_none() {
                return Err(Error::precondition(format!(
                    "no domain point found within 2^-{k} of the boundary point"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Streams;
    use alloc::vec;

    fn p(x: &[f64]) -> Point {
        Point::new(x)
    }

    #[test]
    fn membership_examples() {
        let b = Domain::ball(p(&[0.0, 0.0]), 1.0).unwrap();
        assert!(b.contains(&p(&[0.0, 0.0])));
        let punct = Domain::new(Node::difference(Node::ball(p(&[0.0, 0.0]), 1.0), Node::Point(p(&[0.0, 0.0])))).unwrap();
        assert!(!punct.contains(&p(&[0.0, 0.0])));
        assert_eq!(punct.punctures(), &[p(&[0.0, 0.0])]);
        let two = Domain::new(Node::Union(vec![Node::ball(p(&[-2.0]), 1.0), Node::ball(p(&[2.0]), 1.0)])).unwrap();
        assert!(!two.contains(&p(&[0.0])));
    }

    #[test]
    fn inscribed_examples() {
        let b = Domain::ball(p(&[0.0]), 1.0).unwrap();
        assert_eq!(b.inscribed_radius(&p(&[0.0])).unwrap(), 1.0);
        let punct = Domain::new(Node::difference(Node::ball(p(&[0.0]), 1.0), Node::Point(p(&[0.0])))).unwrap();
        assert_eq!(punct.inscribed_radius(&p(&[0.25])).unwrap(), 0.25);
        let two = Domain::new(Node::Union(vec![Node::ball(p(&[-2.0]), 1.0), Node::ball(p(&[2.0]), 1.0)])).unwrap();
        assert_eq!(two.inscribed_radius(&p(&[2.0])).unwrap(), 1.0);
        assert!(matches!(two.inscribed_radius(&p(&[0.0])), Err(Error::Precondition(_))));
    }

    #[test]
    fn truncation() {
        let b = Domain::ball(p(&[0.0, 0.0]), 1.0).unwrap();
        let t = b.truncate(&p(&[1.0, 0.0]), 0.5).unwrap();
        assert!(t.contains(&p(&[0.9, 0.0])));
        assert!(!t.contains(&p(&[0.4, 0.0])));
    }

    #[test]
    fn rejects_unbounded_and_degenerate() {
        assert!(Domain::new(Node::Point(p(&[0.0]))).is_err());
        assert!(Domain::ball(p(&[0.0]), 0.0).is_err());
        assert!(Domain::new(Node::Box {
            lo: p(&[0.0]),
            hi: p(&[f64::INFINITY])
        })
        .is_err());
    }

    #[test]
    fn thin_shell_exhausts_budget() {
        let shell = Domain::new(Node::difference(Node::ball(p(&[0.0, 0.0]), 1.0), Node::ball(p(&[0.0, 0.0]), 0.999))).unwrap();
        let mut rng = Streams::new(1).rng(0);
        assert!(matches!(
            shell.sample_region(None, 1000, None, &mut rng),
            Err(Error::EmptyRegion { .. })
        ));
    }

    #[test]
    fn boundary_query_validation() {
        let dom = Domain::interval(0.0, 1.0).unwrap();
        let mut rng = Streams::new(2).rng(0);
        let q = BoundaryQuery {
            x0: p(&[0.0]),
            radius: 0.25,
            xref: p(&[0.5]),
        };
        q.validate(&dom, &mut rng).unwrap();
        let bad = BoundaryQuery {
            x0: p(&[0.5]),
            ..q.clone()
        };
        assert!(bad.validate(&dom, &mut rng).is_err());
        let far = BoundaryQuery { x0: p(&[-0.5]), ..q };
        assert!(far.validate(&dom, &mut rng).is_err());
    }
}
