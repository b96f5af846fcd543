#![cfg_attr(not(feature = "std"), no_std)]

//! Numerical potential theory for isotropic α-stable Lévy processes in `R^d`.
//!
//! The crate computes harmonic functions, expected exit times, Green
//! functions, ring functionals and Martin kernels on bounded open sets
//! assembled from balls and boxes. Everything stochastic runs through an exact
//! walk-on-spheres sampler whose every step draws the closed-form exit law of a
//! ball, so the only sources of error are Monte Carlo noise and explicit,
//! reported truncations.
//!
//! The crate is `no_std` + `alloc`. The default `std` feature only adds
//! parallel execution of the estimators; results are bit-identical with or
//! without it and independent of the worker count.
//!
//! Modules, bottom-up:
//! - [`special`], [`quad`]: special functions and adaptive quadrature.
//! - [`kernels`]: closed-form kernels of the stable process on balls.
//! - [`geometry`]: compositional bounded open sets.
//! - [`sampler`]: walk-on-spheres and the basic Monte Carlo estimators.
//! - [`potential`]: ring functionals, decompositions, oscillation, boundary
//!   limits, accessibility and Martin kernels.
//! - [`counterexample`]: the Brownian plus stable mixture on a punctured
//!   interval, where boundary limits fail to exist.

// `!(x > 0.0)` is the NaN-rejecting form used throughout for argument checks.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

extern crate alloc;

pub mod counterexample;
pub mod error;
pub mod estimate;
pub mod exterior;
pub mod geometry;
pub mod kernels;
pub mod math;
pub mod par;
pub mod point;
pub mod potential;
pub mod quad;
pub mod rng;
pub mod sampler;
pub mod special;
pub mod stats;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use crate::error::{Error, Result};
pub use crate::estimate::{Estimate, Moments};
pub use crate::exterior::ExteriorData;
pub use crate::geometry::{BoundaryQuery, Domain, Node};
pub use crate::kernels::ProcessSpec;
pub use crate::point::Point;
pub use crate::rng::Streams;
pub use crate::sampler::{WalkConfig, WalkResult};
