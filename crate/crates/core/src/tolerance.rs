//! Centralized numerical tolerances.
//!
//! Every tolerance is relative to a problem scale documented at its use site.
//! Reports record the tolerances in force next to each verdict.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Asymmetry accepted (and symmetrized away) on ingestion, relative to `1 + max|h|`.
    pub symmetry: f64,
    /// Agreement of trace(Ric) with the scalar Gauss identity, relative.
    pub scalar_identity: f64,
    /// Pinching `Ric_min >= alpha` accepted when the margin is `>= -pinching * (1 + |alpha|)`.
    pub pinching: f64,
    /// Equality band for `Theta_q` against `q(n-q)c`, relative to `1 + |q(n-q)c|`.
    pub equality: f64,
    /// Commutator flatness threshold, relative to `1 + S`.
    pub commutator: f64,
    /// Block-structure residual accepted by the equality-case detector, relative.
    pub detection: f64,
    /// Max |Ric - alpha I| accepted for an Einstein equality point, relative to `1 + |alpha|`.
    pub einstein: f64,
    /// Singular values below `rank * sigma_max` are treated as zero.
    pub rank: f64,
    /// Float comparisons of bounds within this relative band are refused.
    pub ambiguity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            symmetry: 1e-9,
            scalar_identity: 1e-12,
            pinching: 1e-9,
            equality: 1e-8,
            commutator: 1e-10,
            detection: 1e-8,
            einstein: 1e-9,
            rank: 1e-10,
            ambiguity: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn pinching_band(&self, alpha: f64) -> f64 {
        self.pinching * (1.0 + alpha.abs())
    }

    pub fn equality_band(&self, threshold: f64) -> f64 {
        self.equality * (1.0 + threshold.abs())
    }
}
