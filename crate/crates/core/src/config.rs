//! Numerical tolerances shared by all engines.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// A point or root is real when its imaginary parts are below this.
    pub tau_real: f64,
    /// Maximum distance between a non-real root and its conjugate partner.
    pub tau_pair: f64,
    /// Minimum separation of roots that count as distinct.
    pub tau_sep: f64,
    /// Relative singular-value cutoff for numeric rank.
    pub rank_tol: f64,
    /// Relative residual accepted by span membership.
    pub residual_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { tau_real: 1e-8, tau_pair: 1e-6, tau_sep: 1e-6, rank_tol: 1e-10, residual_tol: 1e-8 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> crate::Result<()> {
        let all = [
            ("tau_real", self.tau_real),
            ("tau_pair", self.tau_pair),
            ("tau_sep", self.tau_sep),
            ("rank_tol", self.rank_tol),
            ("residual_tol", self.residual_tol),
        ];
        for (name, v) in all {
            if !(v.is_finite() && v > 0.0) {
                return Err(crate::Error::Invalid(format!("tolerance {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}
