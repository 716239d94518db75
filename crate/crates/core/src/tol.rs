use serde::{Deserialize, Serialize};

/// Numerical thresholds shared across modules.
///
/// All values are relative: trace and Z/W tests compare against powers of
/// the Frobenius norm, clustering against `||A||_F`, and ranks against the
/// unit-normalized matrix powers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// `|tr A| <= trace * ||A||_F`.
    pub trace: f64,
    /// Z membership: `denominator <= z * ||A||^4`.
    pub z: f64,
    /// W membership: `||[A,A*]|| <= w * ||A||^2`.
    pub w: f64,
    /// Eigenvalues closer than `cluster * ||A||_F` always count as one cluster candidate.
    pub cluster: f64,
    /// Largest merge height (relative) considered when validating clusters.
    pub cluster_max: f64,
    /// Singular value threshold for rank sequences.
    pub rank: f64,
    /// Imaginary-part tolerance for uni-real detection, relative to max |lambda|.
    pub uni_real: f64,
    /// Integer rounding tolerance in Lambda-form peeling.
    pub lambda_round: f64,
    /// Ness residual threshold, relative to `||A||^3`.
    pub ness: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            trace: 1e-10,
            z: 1e-10,
            w: 1e-10,
            cluster: 1e-7,
            cluster_max: 5e-2,
            rank: 1e-9,
            uni_real: 1e-7,
            lambda_round: 1e-6,
            ness: 1e-9,
        }
    }
}
