//! Closed-form kernels of the isotropic α-stable process.
//!
//! The process has characteristic exponent `|ξ|^α` and Lévy density
//! `ν(z) = A(d,α) |z|^(-d-α)`. On a ball every quantity the estimators need
//! (exit law, expected exit time, Green function, Martin kernel) is explicit.

use alloc::format;

use rand_core::RngCore;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::math::{self, PI};
use crate::point::{Point, MAX_DIM};
use crate::rng;
use crate::special::{beta, beta_reg_pair, gamma, unit_sphere_area};

/// Dimension, stability index and the derived normalizing constants.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessSpec {
    pub d: usize,
    pub alpha: f64,
    /// `A(d,α)` in `ν(z) = A |z|^(-d-α)`.
    pub levy_norm: f64,
    poisson_norm: f64,
    exit_norm: f64,
    green_norm: f64,
    radial: Gamma<f64>,
    angular: Gamma<f64>,
}

impl ProcessSpec {
    pub fn new(d: usize, alpha: f64) -> Result<Self> {
        if d == 0 || d > MAX_DIM {
            return Err(Error::domain(format!("dimension {d} outside 1..={MAX_DIM}")));
        }
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::domain(format!("stability index {alpha} outside (0,2)")));
        }
        let df = d as f64;
        let levy_norm =
            alpha * math::powf(2.0, alpha - 1.0) * gamma((df + alpha) / 2.0) / (math::powf(PI, df / 2.0) * gamma(1.0 - alpha / 2.0));
        let poisson_norm = gamma(df / 2.0) * math::powf(PI, -df / 2.0 - 1.0) * math::sin(PI * alpha / 2.0);
        let exit_norm = gamma(df / 2.0) / (math::powf(2.0, alpha) * gamma(1.0 + alpha / 2.0) * gamma((df + alpha) / 2.0));
        let green_norm = gamma(df / 2.0) / (math::powf(2.0, alpha) * math::powf(PI, df / 2.0) * math::powi(gamma(alpha / 2.0), 2));
        let radial = Gamma::new(1.0 - alpha / 2.0, 1.0).map_err(|e| Error::Numeric(format!("{e}")))?;
        let angular = Gamma::new(alpha / 2.0, 1.0).map_err(|e| Error::Numeric(format!("{e}")))?;
        Ok(ProcessSpec {
            d,
            alpha,
            levy_norm,
            poisson_norm,
            exit_norm,
            green_norm,
            radial,
            angular,
        })
    }

    /// Whether the single-branch ball Green function formula applies.
    pub fn supports_green(&self) -> bool {
        self.alpha < self.d as f64
    }

    fn check_dim(&self, p: &Point) -> Result<()> {
        if p.dim() != self.d {
            return Err(Error::domain(format!(
                "point of dimension {} for a process in dimension {}",
                p.dim(),
                self.d
            )));
        }
        Ok(())
    }

    /// `ν` as a function of the jump length.
    #[inline]
    pub fn levy_radial(&self, rho: f64) -> f64 {
        self.levy_norm * math::powf(rho, -(self.d as f64) - self.alpha)
    }

    pub fn levy_density(&self, x: &Point, y: &Point) -> Result<f64> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        let rho = x.dist(y);
        if rho == 0.0 {
            return Err(Error::Singularity("Lévy density at coincident points"));
        }
        Ok(self.levy_radial(rho))
    }

    /// `∫_{|z|>r} ν(z) dz`.
    pub fn levy_tail_mass(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::domain(format!("tail radius {r} must be positive")));
        }
        Ok(self.tail(r))
    }

    #[inline]
    pub(crate) fn tail(&self, r: f64) -> f64 {
        if r == f64::INFINITY {
            return 0.0;
        }
        self.levy_norm * unit_sphere_area(self.d) * math::powf(r, -self.alpha) / self.alpha
    }

    /// `∫_{r<|z|<s} ν(z) dz`; `s` may be infinite.
    pub fn ring_mass(&self, r: f64, s: f64) -> Result<f64> {
        if !(r > 0.0 && s > r) {
            return Err(Error::domain(format!("ring ({r}, {s}) is not a proper annulus")));
        }
        Ok(self.tail(r) - self.tail(s))
    }

    /// The tight isotropic comparability constant `(R/(R-r))^(d+α)`.
    pub fn levy_comparability(&self, r: f64, big_r: f64) -> Result<f64> {
        if !(r > 0.0 && r < big_r) {
            return Err(Error::domain(format!("need 0 < r < R, got r={r}, R={big_r}")));
        }
        Ok(math::powf(big_r / (big_r - r), self.d as f64 + self.alpha))
    }

    /// Density of the exit position from `B(0,r)` started at `x`.
    pub fn ball_poisson_kernel(&self, r: f64, x: &Point, y: &Point) -> Result<f64> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        let x2 = x.norm_sq();
        let y2 = y.norm_sq();
        let r2 = r * r;
        if !(x2 < r2) {
            return Err(Error::domain("start point must lie inside the ball"));
        }
        if !(y2 > r2) {
            return Err(Error::domain("exit point must lie outside the closed ball"));
        }
        Ok(self.poisson_norm * math::powf((r2 - x2) / (y2 - r2), self.alpha / 2.0) * math::powf(x.dist(y), -(self.d as f64)))
    }

    /// CDF of `|Y|/r` for the exit position `Y` of a centered ball.
    pub fn exit_radius_cdf(&self, t: f64) -> f64 {
        if t <= 1.0 {
            return 0.0;
        }
        beta_reg_pair(1.0 - self.alpha / 2.0, self.alpha / 2.0, 1.0 - 1.0 / (t * t), 1.0 / (t * t))
    }

    /// Draws `|Y|/r` for the exit of a centered ball.
    #[inline]
    pub fn sample_exit_radius<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        let g1 = self.radial.sample(rng);
        let g2 = self.angular.sample(rng);
        math::sqrt(1.0 + g1 / g2)
    }

    /// Exit position from `B(0,r)` started at the center. For `α` near 2 the
    /// overshoot can be below machine precision, so `|Y|` may round to `r`.
    pub fn sample_ball_exit<R: RngCore + ?Sized>(&self, r: f64, rng: &mut R) -> Result<Point> {
        if !(r > 0.0) {
            return Err(Error::domain(format!("ball radius {r} must be positive")));
        }
        Ok(self.exit_jump(r, rng))
    }

    #[inline]
    pub(crate) fn exit_jump<R: RngCore + ?Sized>(&self, r: f64, rng: &mut R) -> Point {
        let rho = r * self.sample_exit_radius(rng);
        let mut u = unit_vector(self.d, rng);
        for c in u.as_mut_slice() {
            *c *= rho;
        }
        u
    }

    /// `E_x τ_{B(0,r)}`.
    pub fn ball_exit_time(&self, r: f64, x: &Point) -> Result<f64> {
        self.check_dim(x)?;
        let x2 = x.norm_sq();
        if !(x2 <= r * r) {
            return Err(Error::domain("point lies outside the ball"));
        }
        Ok(self.exit_time_center(r * r - x2))
    }

    /// `K (r² - |x|²)^(α/2)` given `r² - |x|²`.
    #[inline]
    pub(crate) fn exit_time_center(&self, gap: f64) -> f64 {
        self.exit_norm * math::powf(gap, self.alpha / 2.0)
    }

    /// Green function of `B(0,r)`.
    pub fn ball_green(&self, r: f64, x: &Point, y: &Point) -> Result<f64> {
        if !self.supports_green() {
            return Err(Error::capability(format!(
                "ball Green function needs α < d (d={}, α={})",
                self.d, self.alpha
            )));
        }
        self.check_dim(x)?;
        self.check_dim(y)?;
        let r2 = r * r;
        let x2 = x.norm_sq();
        let y2 = y.norm_sq();
        if !(x2 < r2 && y2 < r2) {
            return Err(Error::domain("Green function arguments must lie inside the ball"));
        }
        let rho2 = x.dist(y);
        if rho2 == 0.0 {
            return Err(Error::Singularity("Green function at coincident points"));
        }
        let z0 = (r2 - x2) * (r2 - y2) / (r2 * rho2 * rho2);
        Ok(self.green_from(rho2, z0))
    }

    /// Green function of `B(0,r)` from `r² - |x|²`, `r² - |y|²` and `|x - y|`,
    /// for callers that know the gaps more accurately than the coordinates.
    #[inline]
    pub(crate) fn green_gaps(&self, r2: f64, gap_x: f64, gap_y: f64, dist: f64) -> f64 {
        self.green_from(dist, gap_x * gap_y / (r2 * dist * dist))
    }

    /// Poisson kernel of a ball from `r² - |x|²`, `|y|² - r²` and `|x - y|`.
    #[inline]
    pub(crate) fn poisson_gaps(&self, gap_x: f64, gap_y: f64, dist: f64) -> f64 {
        self.poisson_norm * math::powf(gap_x / gap_y, self.alpha / 2.0) * math::powf(dist, -(self.d as f64))
    }

    /// Green function of a ball of radius `rho` between its center and a
    /// point at distance `dist < rho`.
    #[inline]
    pub(crate) fn green_center(&self, rho: f64, dist: f64) -> f64 {
        let z0 = (rho * rho - dist * dist) / (dist * dist);
        self.green_from(dist, z0)
    }

    #[inline]
    fn green_from(&self, dist: f64, z0: f64) -> f64 {
        let a = self.alpha / 2.0;
        let b = (self.d as f64 - self.alpha) / 2.0;
        // z0/(1+z0) is within rounding of 1 near the pole; its complement
        // is passed exactly.
        let reg = beta_reg_pair(a, b, z0 / (1.0 + z0), 1.0 / (1.0 + z0));
        self.green_norm * math::powf(dist, self.alpha - self.d as f64) * beta(a, b) * reg
    }

    /// Martin kernel of `B(0,r)` at the boundary point `z`, normalized at `xref`.
    pub fn ball_martin_kernel(&self, r: f64, x: &Point, xref: &Point, z: &Point) -> Result<f64> {
        self.check_dim(x)?;
        self.check_dim(xref)?;
        self.check_dim(z)?;
        let r2 = r * r;
        if !(x.norm_sq() < r2 && xref.norm_sq() < r2) {
            return Err(Error::domain("Martin kernel arguments must lie inside the ball"));
        }
        Ok(math::powf((r2 - x.norm_sq()) / (r2 - xref.norm_sq()), self.alpha / 2.0) * math::powf(xref.dist(z) / x.dist(z), self.d as f64))
    }

    /// Radius in `(r, s)` with density proportional to `ρ^(-1-α)`.
    #[inline]
    pub fn sample_ring_radius<R: RngCore + ?Sized>(&self, r: f64, s: f64, rng: &mut R) -> f64 {
        let a = math::powf(r, -self.alpha);
        let b = if s == f64::INFINITY { 0.0 } else { math::powf(s, -self.alpha) };
        let u = rng::uniform(rng);
        math::powf(a - u * (a - b), -1.0 / self.alpha)
    }
}

/// Uniform direction on the unit sphere of `R^d`.
pub fn unit_vector<R: RngCore + ?Sized>(d: usize, rng: &mut R) -> Point {
    let mut p = Point::origin(d);
    match d {
        1 => {
            p[0] = if rng.next_u32() & 1 == 0 { 1.0 } else { -1.0 };
        }
        2 => {
            let t = 2.0 * PI * rng::uniform(rng);
            p[0] = math::cos(t);
            p[1] = math::sin(t);
        }
        _ => loop {
            for c in p.as_mut_slice() {
                *c = StandardNormal.sample(rng);
            }
            let n = p.norm();
            if n > 1e-300 {
                for c in p.as_mut_slice() {
                    *c /= n;
                }
                break;
            }
        },
    }
    p
}
