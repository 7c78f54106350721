//! Pointwise curvature toolkit for submanifolds of real space forms.
//!
//! Everything here works at a single point of an immersion, described by the
//! shape operators of its second fundamental form in orthonormal tangent and
//! normal frames ([`PointData`]). From that jet the crate computes the
//! Gauss-equation curvature quantities, evaluates the Ricci pinching bound
//! `alpha(n, k, H, c)` against competing bounds, maximizes the Lawson-Simons
//! functional over tangent `q`-planes, detects the rigid block structure of
//! the equality case and builds the Einstein torus model spaces.

pub mod batch;
pub mod bounds;
pub mod cli;
pub mod curvature;
pub mod error;
pub mod io;
pub mod lawson_simons;
pub mod linalg;
pub mod models;
pub mod quadratic;
pub mod rigidity;
pub mod rng;
pub mod scalar;
pub mod tolerance;
pub mod verify;

pub use curvature::{CurvatureSummary, PointData, RadicalPointData};
pub use error::{Error, Result};
pub use scalar::{Field, Rational};
pub use tolerance::Tolerances;
