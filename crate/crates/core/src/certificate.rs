use serde::{Deserialize, Serialize};

/// One named, recomputed numeric claim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub pass: bool,
}

impl Check {
    /// Passes iff `residual <= bound` (and the residual is finite).
    pub fn within(name: impl Into<String>, residual: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            residual,
            pass: residual.is_finite() && residual <= bound,
        }
    }

    pub fn flag(name: impl Into<String>, residual: f64, pass: bool) -> Self {
        Check {
            name: name.into(),
            residual,
            pass,
        }
    }
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.pass)
}
