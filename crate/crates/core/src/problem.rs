//! Riemann data for the damped triangular system
//!
//! ```text
//!     u_t + (u^{k+1} / (k+1))_x = -alpha u
//!     v_t + (v u^k)_x           = 0
//! ```
//!
//! with `(v, u) = (v-, u-)` for `x < 0` and `(v+, u+)` for `x > 0`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest wave-power exponent accepted. Powers are taken with `powi`, so this
/// only guards against absurd inputs.
pub const MAX_K: u32 = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("densities must be positive (v- = {v_minus}, v+ = {v_plus})")]
    NonPositiveDensity { v_minus: f64, v_plus: f64 },
    #[error("k must be an integer in 1..={MAX_K}, got {0}")]
    BadExponent(u32),
    #[error("even k requires nonnegative states (u- = {u_minus}, u+ = {u_plus})")]
    EvenPowerSign { u_minus: f64, u_plus: f64 },
    #[error("damping rate must be finite and >= 0, got {0}")]
    BadDamping(f64),
    #[error("non-finite state value")]
    NonFinite,
}

/// The six numbers that define a Riemann problem for the damped system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RiemannProblem {
    pub v_minus: f64,
    pub v_plus: f64,
    pub u_minus: f64,
    pub u_plus: f64,
    pub k: u32,
    /// `alpha = 0` is the undamped (homogeneous) system.
    pub alpha: f64,
}

/// Wave pattern selected by the ordering of the two velocity states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WaveClassification {
    /// `u- > u+`: a delta shock carrying concentrated `v`-mass.
    DeltaShock,
    /// `u- < u+`: a rarefaction fan with a vacuum core.
    RarefactionFan,
    /// `u- = u+`: a contact discontinuity in `v` only.
    Contact,
}

impl RiemannProblem {
    /// Builds and validates a problem.
    pub fn new(
        v_minus: f64,
        v_plus: f64,
        u_minus: f64,
        u_plus: f64,
        k: u32,
        alpha: f64,
    ) -> Result<Self, ProblemError> {
        let p = Self { v_minus, v_plus, u_minus, u_plus, k, alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        let all = [self.v_minus, self.v_plus, self.u_minus, self.u_plus];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(ProblemError::NonFinite);
        }
        if !(self.v_minus > 0.0 && self.v_plus > 0.0) {
            return Err(ProblemError::NonPositiveDensity {
                v_minus: self.v_minus,
                v_plus: self.v_plus,
            });
        }
        if self.k == 0 || self.k > MAX_K {
            return Err(ProblemError::BadExponent(self.k));
        }
        if self.k % 2 == 0 && (self.u_minus < 0.0 || self.u_plus < 0.0) {
            return Err(ProblemError::EvenPowerSign {
                u_minus: self.u_minus,
                u_plus: self.u_plus,
            });
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(ProblemError::BadDamping(self.alpha));
        }
        Ok(())
    }

    pub fn classify(&self) -> WaveClassification {
        classify(self)
    }

    /// `alpha * k`, the decay rate of the characteristic speeds.
    pub fn alpha_k(&self) -> f64 {
        self.alpha * self.k as f64
    }

    /// Characteristic speed `u^k` of a velocity value.
    pub fn speed(&self, u: f64) -> f64 {
        pow_k(u, self.k)
    }

    /// Largest `|u±|^k`.
    pub fn max_speed(&self) -> f64 {
        self.u_minus.abs().max(self.u_plus.abs()).powi(self.k as i32)
    }
}

pub fn classify(p: &RiemannProblem) -> WaveClassification {
    if p.u_minus > p.u_plus {
        WaveClassification::DeltaShock
    } else if p.u_minus < p.u_plus {
        WaveClassification::RarefactionFan
    } else {
        WaveClassification::Contact
    }
}

#[inline]
pub fn pow_k(u: f64, k: u32) -> f64 {
    u.powi(k as i32)
}

/// Real `k`-th root. Odd `k` keeps the sign; even `k` expects `x >= 0`.
pub fn real_root(x: f64, k: u32) -> f64 {
    if k == 1 {
        return x;
    }
    let r = x.abs().powf(1.0 / k as f64);
    if x < 0.0 && k % 2 == 1 {
        -r
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_follows_velocity_ordering() {
        let p = RiemannProblem::new(1.0, 1.0, 2.0, 0.0, 1, 1.0).unwrap();
        assert_eq!(p.classify(), WaveClassification::DeltaShock);
        let p = RiemannProblem::new(1.0, 1.0, 0.0, 1.0, 1, 1.0).unwrap();
        assert_eq!(p.classify(), WaveClassification::RarefactionFan);
        let p = RiemannProblem::new(1.0, 2.0, 0.7, 0.7, 3, 1.0).unwrap();
        assert_eq!(p.classify(), WaveClassification::Contact);
    }

    #[test]
    fn rejects_invalid_data() {
        assert!(matches!(
            RiemannProblem::new(0.0, 1.0, 1.0, 0.0, 1, 1.0),
            Err(ProblemError::NonPositiveDensity { .. })
        ));
        assert!(matches!(
            RiemannProblem::new(1.0, 1.0, -1.0, 0.0, 2, 1.0),
            Err(ProblemError::EvenPowerSign { .. })
        ));
        assert!(matches!(
            RiemannProblem::new(1.0, 1.0, 1.0, 0.0, 0, 1.0),
            Err(ProblemError::BadExponent(0))
        ));
        assert!(matches!(
            RiemannProblem::new(1.0, 1.0, 1.0, 0.0, 1, -0.5),
            Err(ProblemError::BadDamping(_))
        ));
        assert!(RiemannProblem::new(1.0, 1.0, -1.0, -2.0, 3, 0.0).is_ok());
    }

    #[test]
    fn real_root_keeps_sign_for_odd_powers() {
        assert_eq!(real_root(-8.0, 3), -2.0);
        assert!((real_root(16.0, 4) - 2.0).abs() < 1e-15);
        assert_eq!(real_root(-0.25, 1), -0.25);
    }
}
