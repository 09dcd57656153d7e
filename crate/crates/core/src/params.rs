use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Physical coefficients of the coupled system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Speed of sound.
    pub c: f64,
    /// Strong acoustic damping.
    pub b: f64,
    /// Nonlinearity parameter.
    pub k: f64,
    pub rho: f64,
    pub delta: f64,
    pub beta: f64,
    /// Power of the plate damping operator, in [0, 2].
    pub gamma: f64,
    /// Coupling coefficient.
    pub kappa: f64,
}

impl Params {
    pub fn reference() -> Self {
        Params { c: 1.0, b: 0.1, k: 0.05, rho: 1.0, delta: 1.0, beta: 0.1, gamma: 1.0, kappa: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = [("c", self.c), ("rho", self.rho), ("delta", self.delta), ("kappa", self.kappa)];
        for (name, v) in pos {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::constraint(&format!("/params/{name}"), "must be positive"));
            }
        }
        // b = β = 0 is allowed for the conservative checks
        for (name, v) in [("b", self.b), ("k", self.k), ("beta", self.beta)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::constraint(&format!("/params/{name}"), "must be nonnegative"));
            }
        }
        if !(0.0..=2.0).contains(&self.gamma) {
            return Err(Error::constraint("/params/gamma", "must lie in [0, 2]"));
        }
        Ok(())
    }
}
