//! Numerical toolkit for spectral geometry of bounded immersions.
//!
//! The crate is organised by subsystem:
//!
//! * [`comparison`]: the radial Jacobi-type ODE `h'' = G h`, the derived
//!   scalars (`mu`, `theta`), convexity data and non-parabolicity tests.
//! * [`subharmonic`]: radial barrier profiles `g` built from a model `h`,
//!   their sup-norm certificates and a checker for their Laplacian bounds on
//!   sampled immersions.
//! * [`surfaces`]: conformal patches with explicit conformal factors (flat
//!   and hyperbolic disks, the Andrade minimal surface, labyrinth annuli).
//! * [`spectrum`]: finite-difference Laplace-Beltrami discretisation,
//!   a LOBPCG eigensolver, fundamental tones, Persson sweeps, Barta bounds,
//!   the covering witness and the ball-property test.
//! * [`hausdorff`]: gauge functions and covering estimators for generalized
//!   Hausdorff measures.

pub mod comparison;
pub mod error;
pub mod hausdorff;
pub mod io;
pub mod quad;
pub mod spectrum;
pub mod subharmonic;
pub mod surfaces;

pub use error::{Error, Result};

/// A point in the ambient Euclidean space.
pub type Point3 = [f64; 3];

/// Euclidean distance between two ambient points.
#[inline]
pub fn dist3(a: &Point3, b: &Point3) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}
