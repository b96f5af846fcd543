//! Experiment configuration: a single JSON document.
//!
//! Parsing goes through `serde_path_to_error`, so a schema violation names
//! both the JSON field path and the line. Semantic checks (dimensions,
//! schedules, boundary points) run afterwards and name the field they reject.

use std::fmt;
use std::num::NonZeroU64;

use martinlab_core::geometry::Node;
use martinlab_core::potential::check_schedule;
use martinlab_core::{Domain, ExteriorData, Point, ProcessSpec, WalkConfig};
use serde::{Deserialize, Serialize};

/// A rejected configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemaError {
    pub field: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl SchemaError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        SchemaError {
            field: field.into(),
            line: None,
            column: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: field `{}`: {}", self.field, self.message),
            _ => write!(f, "field `{}`: {}", self.field, self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub process: ProcessJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundaryJson>,
    pub study: StudyJson,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub walk: Option<WalkJson>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessJson {
    pub d: usize,
    pub alpha: f64,
}

/// Domain tree, e.g. `{"difference":[{"ball":{"c":[0,0],"r":1}},{"point":[0,0]}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum DomainJson {
    Ball { c: Vec<f64>, r: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Union(Vec<DomainJson>),
    Intersection(Vec<DomainJson>),
    Difference(Box<DomainJson>, Box<DomainJson>),
    Point(Vec<f64>),
}

/// Exterior data. `null` bounds are infinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum DataJson {
    Constant(f64),
    Box {
        lo: Vec<Option<f64>>,
        hi: Vec<Option<f64>>,
        #[serde(default = "one")]
        value: f64,
    },
    Interval {
        lo: Option<f64>,
        hi: Option<f64>,
        #[serde(default = "one")]
        value: f64,
    },
    Shell {
        c: Vec<f64>,
        inner: f64,
        outer: Option<f64>,
        #[serde(default = "one")]
        value: f64,
    },
    Sum(Vec<DataJson>),
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryJson {
    pub x0: Vec<f64>,
    pub radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xref: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalkJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shrink: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capped_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StudyJson {
    Kernels {
        /// Start points; defaults to the origin.
        #[serde(default)]
        points: Vec<Vec<f64>>,
        /// Monte Carlo budget for the exit time and the exit-law KS test.
        n: NonZeroU64,
        /// Data for the Dynkin check on the unit ball; defaults to the shell
        /// `1 ≤ |y| ≤ 1.1`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        data: Option<DataJson>,
    },
    Oscillation {
        f: DataJson,
        g: DataJson,
        radii: Vec<f64>,
        m_points: NonZeroU64,
        n: NonZeroU64,
        batches: NonZeroU64,
    },
    BoundaryLimit {
        f: DataJson,
        g: DataJson,
        radii: Vec<f64>,
        n_outer: NonZeroU64,
        n_inner: NonZeroU64,
    },
    Accessibility {
        radii: Vec<f64>,
        n_outer: NonZeroU64,
        n_inner: NonZeroU64,
    },
    Martin {
        x: Vec<f64>,
        z: Vec<f64>,
        /// Approach distances `δ_j`: `y_j = z + δ_j u` with `u` the unit
        /// vector from `z` to `toward`. The default for `toward` is the
        /// center of the domain's bounding ball, or `x` if that is `z`.
        deltas: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        toward: Option<Vec<f64>>,
        n: NonZeroU64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        inaccessible: Option<InaccessibleJson>,
    },
    Counterexample {
        c1: f64,
        c2: f64,
        xs: Vec<f64>,
        n: NonZeroU64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dt: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eps0: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InaccessibleJson {
    pub eps: f64,
    pub n_outer: NonZeroU64,
    pub n_inner: NonZeroU64,
}

impl StudyJson {
    pub fn name(&self) -> &'static str {
        match self {
            StudyJson::Kernels { .. } => "kernels",
            StudyJson::Oscillation { .. } => "oscillation",
            StudyJson::BoundaryLimit { .. } => "boundary-limit",
            StudyJson::Accessibility { .. } => "accessibility",
            StudyJson::Martin { .. } => "martin",
            StudyJson::Counterexample { .. } => "counterexample",
        }
    }
}

/// Parses a configuration document without semantic checks.
pub fn parse(text: &str) -> Result<ExperimentConfig, SchemaError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        SchemaError {
            field,
            line: Some(inner.line()),
            column: Some(inner.column()),
            message: strip_position(&inner.to_string()),
        }
    })?;
    de.end().map_err(|e| SchemaError {
        field: ".".into(),
        line: Some(e.line()),
        column: Some(e.column()),
        message: strip_position(&e.to_string()),
    })?;
    Ok(cfg)
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

/// Validated configuration with core types built.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub raw: ExperimentConfig,
    pub spec: ProcessSpec,
    pub domain: Option<Domain>,
    pub walk: WalkConfig,
}

pub fn point(field: &str, v: &[f64], d: usize) -> Result<Point, SchemaError> {
    if v.len() != d {
        return Err(SchemaError::new(field, format!("expected {d} coordinates, got {}", v.len())));
    }
    if v.iter().any(|c| !c.is_finite()) {
        return Err(SchemaError::new(field, "coordinates must be finite"));
    }
    Ok(Point::new(v))
}

impl DomainJson {
    pub fn to_node(&self, field: &str, d: usize) -> Result<Node, SchemaError> {
        Ok(match self {
            DomainJson::Ball { c, r } => Node::ball(point(&format!("{field}.ball.c"), c, d)?, *r),
            DomainJson::Box { lo, hi } => Node::Box {
                lo: point(&format!("{field}.box.lo"), lo, d)?,
                hi: point(&format!("{field}.box.hi"), hi, d)?,
            },
            DomainJson::Union(v) => Node::Union(
                v.iter()
                    .enumerate()
                    .map(|(i, n)| n.to_node(&format!("{field}.union[{i}]"), d))
                    .collect::<Result<_, _>>()?,
            ),
            DomainJson::Intersection(v) => Node::Intersection(
                v.iter()
                    .enumerate()
                    .map(|(i, n)| n.to_node(&format!("{field}.intersection[{i}]"), d))
                    .collect::<Result<_, _>>()?,
            ),
            DomainJson::Difference(a, b) => Node::difference(
                a.to_node(&format!("{field}.difference[0]"), d)?,
                b.to_node(&format!("{field}.difference[1]"), d)?,
            ),
            DomainJson::Point(p) => Node::Point(point(&format!("{field}.point"), p, d)?),
        })
    }

    pub fn from_node(node: &Node) -> Self {
        match node {
            Node::Ball { center, radius } => DomainJson::Ball {
                c: center.as_slice().to_vec(),
                r: *radius,
            },
            Node::Box { lo, hi } => DomainJson::Box {
                lo: lo.as_slice().to_vec(),
                hi: hi.as_slice().to_vec(),
            },
            Node::Union(v) => DomainJson::Union(v.iter().map(DomainJson::from_node).collect()),
            Node::Intersection(v) => DomainJson::Intersection(v.iter().map(DomainJson::from_node).collect()),
            Node::Difference(a, b) => DomainJson::Difference(Box::new(DomainJson::from_node(a)), Box::new(DomainJson::from_node(b))),
            Node::Point(p) => DomainJson::Point(p.as_slice().to_vec()),
        }
    }
}

fn bound(v: &[Option<f64>], inf: f64) -> Point {
    let xs: Vec<f64> = v.iter().map(|c| c.unwrap_or(inf)).collect();
    Point::new(&xs)
}

impl DataJson {
    pub fn to_data(&self, field: &str, d: usize) -> Result<ExteriorData, SchemaError> {
        let dim = |name: &str, n: usize| {
            if n == d {
                Ok(())
            } else {
                Err(SchemaError::new(
                    format!("{field}.{name}"),
                    format!("expected {d} coordinates, got {n}"),
                ))
            }
        };
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(SchemaError::new(format!("{field}.{name}"), "must be finite"))
            }
        };
        Ok(match self {
            DataJson::Constant(c) => {
                finite("constant", *c)?;
                ExteriorData::Constant(*c)
            }
            DataJson::Box { lo, hi, value } => {
                dim("box.lo", lo.len())?;
                dim("box.hi", hi.len())?;
                finite("box.value", *value)?;
                let (l, h) = (bound(lo, f64::NEG_INFINITY), bound(hi, f64::INFINITY));
                if (0..d).any(|i| !(l[i] <= h[i])) {
                    return Err(SchemaError::new(format!("{field}.box"), "need lo ≤ hi in every coordinate"));
                }
                ExteriorData::Box {
                    lo: l,
                    hi: h,
                    value: *value,
                }
            }
            DataJson::Interval { lo, hi, value } => {
                if d != 1 {
                    return Err(SchemaError::new(format!("{field}.interval"), "intervals need d = 1"));
                }
                finite("interval.value", *value)?;
                let (l, h) = (lo.unwrap_or(f64::NEG_INFINITY), hi.unwrap_or(f64::INFINITY));
                if !(l <= h) {
                    return Err(SchemaError::new(format!("{field}.interval"), "need lo ≤ hi"));
                }
                ExteriorData::interval(l, h, *value)
            }
            DataJson::Shell { c, inner, outer, value } => {
                dim("shell.c", c.len())?;
                finite("shell.value", *value)?;
                let o = outer.unwrap_or(f64::INFINITY);
                if !(*inner >= 0.0 && *inner <= o) {
                    return Err(SchemaError::new(format!("{field}.shell"), "need 0 ≤ inner ≤ outer"));
                }
                ExteriorData::Shell {
                    center: point(&format!("{field}.shell.c"), c, d)?,
                    inner: *inner,
                    outer: o,
                    value: *value,
                }
            }
            DataJson::Sum(v) => ExteriorData::Sum(
                v.iter()
                    .enumerate()
                    .map(|(i, p)| p.to_data(&format!("{field}.sum[{i}]"), d))
                    .collect::<Result<_, _>>()?,
            ),
        })
    }
}

fn schedule(field: &str, radii: &[f64]) -> Result<(), SchemaError> {
    check_schedule(radii).map_err(|e| SchemaError::new(field, e.to_string()))
}

impl ExperimentConfig {
    /// Semantic validation; builds the core objects.
    pub fn resolve(&self) -> Result<Resolved, SchemaError> {
        let spec = ProcessSpec::new(self.process.d, self.process.alpha).map_err(|e| SchemaError::new("process", e.to_string()))?;
        let d = spec.d;
        let domain = match &self.domain {
            Some(j) => {
                let node = j.to_node("domain", d)?;
                Some(Domain::new(node).map_err(|e| SchemaError::new("domain", e.to_string()))?)
            }
            None => None,
        };
        let mut walk = WalkConfig::default();
        if let Some(w) = &self.walk {
            if let Some(s) = w.shrink {
                if !(s > 0.0 && s <= 1.0) {
                    return Err(SchemaError::new("walk.shrink", "must lie in (0, 1]"));
                }
                walk.shrink = s;
            }
            if let Some(m) = w.max_steps {
                if m == 0 {
                    return Err(SchemaError::new("walk.max_steps", "must be positive"));
                }
                walk.max_steps = m;
            }
            if let Some(c) = w.capped_fraction {
                if !(0.0..1.0).contains(&c) {
                    return Err(SchemaError::new("walk.capped_fraction", "must lie in [0, 1)"));
                }
                walk.capped_fraction = c;
            }
        }
        let needs_domain = !matches!(self.study, StudyJson::Kernels { .. } | StudyJson::Counterexample { .. });
        if needs_domain && domain.is_none() {
            return Err(SchemaError::new("domain", format!("study {} needs a domain", self.study.name())));
        }
        let needs_boundary = matches!(
            self.study,
            StudyJson::Oscillation { .. } | StudyJson::BoundaryLimit { .. } | StudyJson::Accessibility { .. }
        );
        if needs_boundary {
            let b = self
                .boundary
                .as_ref()
                .ok_or_else(|| SchemaError::new("boundary", format!("study {} needs a boundary point", self.study.name())))?;
            let x0 = point("boundary.x0", &b.x0, d)?;
            if !(b.radius > 0.0 && b.radius.is_finite()) {
                return Err(SchemaError::new("boundary.radius", "must be positive and finite"));
            }
            let dom = domain.as_ref().expect("checked above");
            if dom.contains(&x0) {
                return Err(SchemaError::new("boundary.x0", "boundary point lies inside the domain"));
            }
            if let Some(xr) = &b.xref {
                let xr = point("boundary.xref", xr, d)?;
                if !dom.contains(&xr) {
                    return Err(SchemaError::new("boundary.xref", "reference point must lie in the domain"));
                }
            }
        }
        match &self.study {
            StudyJson::Kernels { points, data, .. } => {
                for (i, p) in points.iter().enumerate() {
                    let x = point(&format!("study.points[{i}]"), p, d)?;
                    if !(x.norm() < 1.0) {
                        return Err(SchemaError::new(format!("study.points[{i}]"), "must lie in the unit ball"));
                    }
                }
                if let Some(h) = data {
                    h.to_data("study.data", d)?;
                }
            }
            StudyJson::Oscillation { f, g, radii, .. } | StudyJson::BoundaryLimit { f, g, radii, .. } => {
                f.to_data("study.f", d)?;
                g.to_data("study.g", d)?;
                schedule("study.radii", radii)?;
            }
            StudyJson::Accessibility { radii, .. } => {
                schedule("study.radii", radii)?;
                let r = self.boundary.as_ref().map(|b| b.radius).unwrap_or(0.0);
                if radii[0] >= r {
                    return Err(SchemaError::new("study.radii", "radii must lie below boundary.radius"));
                }
            }
            StudyJson::Martin {
                x,
                z,
                deltas,
                toward,
                inaccessible,
                ..
            } => {
                let dom = domain.as_ref().expect("checked above");
                let xp = point("study.x", x, d)?;
                if !dom.contains(&xp) {
                    return Err(SchemaError::new("study.x", "must lie in the domain"));
                }
                let zp = point("study.z", z, d)?;
                if dom.contains(&zp) {
                    return Err(SchemaError::new("study.z", "must be a boundary point"));
                }
                let xref = self
                    .boundary
                    .as_ref()
                    .and_then(|b| b.xref.as_ref())
                    .ok_or_else(|| SchemaError::new("boundary.xref", "study martin needs a reference point"))?;
                let xr = point("boundary.xref", xref, d)?;
                if !dom.contains(&xr) {
                    return Err(SchemaError::new("boundary.xref", "reference point must lie in the domain"));
                }
                schedule("study.deltas", deltas)?;
                if deltas.len() < 2 {
                    return Err(SchemaError::new("study.deltas", "need at least two approach distances"));
                }
                if let Some(t) = toward {
                    let tp = point("study.toward", t, d)?;
                    if tp == zp {
                        return Err(SchemaError::new("study.toward", "must differ from z"));
                    }
                }
                if let Some(ia) = inaccessible {
                    if !(ia.eps > 0.0 && ia.eps.is_finite()) {
                        return Err(SchemaError::new("study.inaccessible.eps", "must be positive"));
                    }
                }
            }
            StudyJson::Counterexample { xs, dt, eps0, c1, c2, .. } => {
                if d != 1 {
                    return Err(SchemaError::new("process.d", "the mixture lives on the line"));
                }
                if !(self.process.alpha > 1.0) {
                    return Err(SchemaError::new("process.alpha", "the mixture needs 1 < alpha < 2"));
                }
                let ms = martinlab_core::counterexample::MixtureSpec::new(*c1, *c2, self.process.alpha)
                    .map_err(|e| SchemaError::new("study", e.to_string()))?;
                let ms = ms.with_dt(dt.unwrap_or(ms.dt)).with_eps0(eps0.unwrap_or(ms.eps0));
                ms.validate().map_err(|e| SchemaError::new("study", e.to_string()))?;
                if xs.is_empty() {
                    return Err(SchemaError::new("study.xs", "need at least one start point"));
                }
                for (i, x) in xs.iter().enumerate() {
                    if !(*x > 0.0 && *x < 1.0) {
                        return Err(SchemaError::new(format!("study.xs[{i}]"), "must lie in (0, 1)"));
                    }
                }
            }
        }
        Ok(Resolved {
            raw: self.clone(),
            spec,
            domain,
            walk,
        })
    }
}

impl SchemaError {
    /// Fills in the line of the rejected field from the source text when
    /// the error came from semantic validation.
    pub fn locate(mut self, text: &str) -> Self {
        if self.line.is_some() {
            return self;
        }
        // Follow the path: each key is searched after the previous one.
        let mut at = None;
        let mut from = 0;
        for seg in self.field.split('.') {
            let key = seg.split('[').next().unwrap_or(seg);
            if key.is_empty() {
                continue;
            }
            match text[from..].find(&format!("\"{key}\"")) {
                Some(i) => {
                    at = Some(from + i);
                    from += i + key.len() + 2;
                }
                None => break,
            }
        }
        if let Some(i) = at {
            self.line = Some(text[..i].matches('\n').count() + 1);
            self.column = Some(i - text[..i].rfind('\n').map_or(0, |j| j + 1) + 1);
        }
        self
    }
}
