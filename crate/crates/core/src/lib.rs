//! Exact Painleve analysis of the cohomogeneity-one steady gradient Ricci
//! soliton equations: quadratic ODE systems, leading-order balances,
//! resonances, coefficient recursion with compatibility checks, projection
//! onto the zero-energy constraint, rational points on the exponent
//! ellipsoid, and floating-point validation of the resulting series.

// Errors carry exact rationals for diagnostics; they are cold paths.
#![allow(clippy::result_large_err)]

pub mod balance;
pub mod ellipsoid;
pub mod formal;
pub mod linalg;
pub mod numeric;
pub mod poly;
pub mod rational;
pub mod recursion;
pub mod systems;

pub use linalg::{det, det_poly, kernel, rank, solve_affine, AffineSolutionSet, LinalgError, QMatrix};
pub use poly::QPolynomial;
pub use rational::{frac, int, parse_rational, Rational};
pub use systems::{build_bb_system, build_warped_system, DimensionSpec, QuadraticSystem, SystemError, SystemKind};
