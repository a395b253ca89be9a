//! Volumetric varifolds and kernel-regularized mean curvature, with the
//! machinery needed to measure how far a discretized mean curvature flow is
//! from satisfying Brakke's integral equality.
//!
//! The crate is organized bottom-up:
//!
//! * [`geometry`]: Grassmannian planes stored as orthogonal projectors, and
//!   closed analytic shapes (circle, ellipse, sphere, torus) with exact
//!   tangents and mean curvature.
//! * [`varifold`]: point-cloud, sampled-manifold and volumetric varifolds with
//!   mass, full measure and first variation.
//! * [`kernels`]: radial kernel pairs `(rho, xi)` and their normalization.
//! * [`discretization`]: uniform meshes and the volumetric discretization map.
//! * [`curvature`]: regularized first variation, regularized mass and the
//!   approximate mean curvature `H_eps`.
//! * [`metrics`]: bounded Lipschitz distance and Ahlfors-regularity estimates.
//! * [`flow`]: analytic shrinking spheres and a curve-shortening integrator.
//! * [`brakke`]: test functions, the constants ledger and the Brakke residual.
//!
//! All points live in `R^N` with `N` a const generic (2 or 3 in practice).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod brakke;
pub mod curvature;
pub mod discretization;
mod error;
pub mod flow;
pub mod geometry;
pub mod kernels;
mod lp;
pub mod metrics;
pub mod quadrature;
pub mod table;
pub mod varifold;

pub use error::{Error, Result};

use nalgebra::{SMatrix, SVector};

/// A point or vector of `R^N`.
pub type Point<const N: usize> = SVector<f64, N>;

/// A real `N x N` matrix.
pub type Matrix<const N: usize> = SMatrix<f64, N, N>;
