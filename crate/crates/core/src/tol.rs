//! Centralized tolerances. Jets are exact, so residuals reflect rounding
//! only; everything here is calibrated to that.

/// Pairwise inner products of an orthonormal basis may deviate from the
/// Kronecker delta by at most this much.
pub const ORTHO_TOL: f64 = 1e-10;
/// Eigen-residual `||S v - lambda v||` bound, relative to `||S||`.
pub const EIG_TOL: f64 = 1e-10;
/// Smallest admissible eigenvalue of a positive definite matrix.
pub const PD_TOL: f64 = 1e-12;
/// Gram-Schmidt residual below which input vectors count as dependent.
pub const RANK_TOL: f64 = 1e-10;
/// Relative residual bound for exact metric/connection identities.
pub const IDENTITY_TOL: f64 = 1e-8;
/// Relative residual bound for theorem audits (two independent routes).
pub const AUDIT_TOL: f64 = 1e-7;
/// Agreement bound between jets and central finite differences.
pub const FD_TOL: f64 = 1e-5;
/// Gap separating eigenvalue clusters of -T^2.
pub const CLUSTER_TOL: f64 = 1e-6;
/// The curvature inequality is accepted when slack >= -SLACK_TOL.
pub const SLACK_TOL: f64 = 1e-8;
/// Slack below `NEAR_EQUALITY_TOL * max(lhs, 1)` counts as the equality case.
pub const NEAR_EQUALITY_TOL: f64 = 1e-6;
/// Warping functions with log-gradient norm below this are constant.
pub const TRIVIALITY_TOL: f64 = 1e-8;

/// Runtime-adjustable tolerance bundle. Defaults mirror the constants above.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub ortho: f64,
    pub eigen: f64,
    pub pd: f64,
    pub rank: f64,
    pub identity: f64,
    pub audit: f64,
    pub cluster: f64,
    pub slack: f64,
    pub near_equality: f64,
    pub triviality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            ortho: ORTHO_TOL,
            eigen: EIG_TOL,
            pd: PD_TOL,
            rank: RANK_TOL,
            identity: IDENTITY_TOL,
            audit: AUDIT_TOL,
            cluster: CLUSTER_TOL,
            slack: SLACK_TOL,
            near_equality: NEAR_EQUALITY_TOL,
            triviality: TRIVIALITY_TOL,
        }
    }
}

/// Residual of `lhs == rhs` relative to the larger of the two sides and 1.
/// Keeps identities on O(1)-O(10) quantities meaningful without blowing up
/// when both sides vanish.
pub fn rel_residual(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs() / 1f64.max(lhs.abs()).max(rhs.abs())
}
