use serde::{Deserialize, Serialize};

/// Numerical tolerances shared by the rank/kernel/spectrum oracles.
///
/// The defaults are the ones every sweep and check in this crate is
/// calibrated against; individual call sites never invent their own
/// thresholds.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// Relative singular-value cutoff for rank decisions:
    /// sigma > max(rows, cols) * sigma_max * rank_rel_tol counts.
    pub rank_rel_tol: f64,
    /// Absolute residual scale for identities such as the Penrose
    /// equations and eigenvector residuals.
    pub residual_tol: f64,
    /// Largest principal angle (radians) at which two subspaces are
    /// still considered equal.
    pub subspace_angle_tol: f64,
    /// Distance at which a computed eigenvalue matches a predicted one.
    pub eig_match_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            rank_rel_tol: 1e-12,
            residual_tol: 1e-10,
            subspace_angle_tol: 1e-8,
            eig_match_tol: 1e-8,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> crate::Result<()> {
        let all = [
            self.rank_rel_tol,
            self.residual_tol,
            self.subspace_angle_tol,
            self.eig_match_tol,
        ];
        if all.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            return Err(crate::Error::InvalidConfig(
                "tolerances must be strictly positive and finite".into(),
            ));
        }
        Ok(())
    }
}
