//! Closed-form Riemann solutions of the damped system.
//!
//! Everything here is expressed through the damped clock
//! `S(t) = (1 - exp(-alpha k t)) / (alpha k)`, which reduces to `t` when
//! `alpha = 0`. Shock position, delta weight and the similarity variable are
//! all `S(t)`-rescalings of their undamped counterparts.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problem::{classify, pow_k, real_root, RiemannProblem, WaveClassification};

/// Below this `|alpha k t|` the damped clock is evaluated from its Taylor series.
pub const SMALL_DECAY: f64 = 1e-5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExactError {
    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("operation needs delta-shock data (u- > u+), got {0:?}")]
    NotDeltaShock(WaveClassification),
}

/// Shock speed in the similarity coordinate,
/// `sigma = (1/(k+1)) * sum_{j=0..k} u-^{k-j} u+^j`.
///
/// For `u- != u+` this equals `[u^{k+1}] / ((k+1) [u])`; for `u- = u+ = c` it
/// is `c^k`.
pub fn shock_speed_sigma(u_minus: f64, u_plus: f64, k: u32) -> f64 {
    let sum: f64 = (0..=k).map(|j| pow_k(u_minus, k - j) * pow_k(u_plus, j)).sum();
    sum / (k as f64 + 1.0)
}

/// Asymptotic delta weight `w0 = -sigma (v- - v+) + (v- u-^k - v+ u+^k)`.
pub fn delta_weight_w0(p: &RiemannProblem, sigma: f64) -> Result<f64, ExactError> {
    match classify(p) {
        WaveClassification::DeltaShock => Ok(w0_formula(p, sigma)),
        other => Err(ExactError::NotDeltaShock(other)),
    }
}

fn w0_formula(p: &RiemannProblem, sigma: f64) -> f64 {
    -sigma * (p.v_minus - p.v_plus)
        + (p.v_minus * p.speed(p.u_minus) - p.v_plus * p.speed(p.u_plus))
}

/// `S(t) = (1 - exp(-z)) / (alpha k)` with `z = alpha k t`.
pub fn damped_clock(alpha_k: f64, t: f64) -> f64 {
    let z = alpha_k * t;
    if z == 0.0 {
        t
    } else if z.abs() < SMALL_DECAY {
        t * (1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0)
    } else {
        -(-z).exp_m1() / alpha_k
    }
}

/// Position `x(t) = sigma S(t)` of the discontinuity.
pub fn shock_position(p: &RiemannProblem, sigma: f64, t: f64) -> f64 {
    sigma * damped_clock(p.alpha_k(), t)
}

/// Delta weight `w(t) = w0 S(t)`; tends to `w0 / (alpha k)` for large `t`.
pub fn delta_weight_at(p: &RiemannProblem, w0: f64, t: f64) -> f64 {
    w0 * damped_clock(p.alpha_k(), t)
}

/// Similarity variable `xi = alpha k x / (1 - exp(-alpha k t))`, i.e. `x / S(t)`.
pub fn similarity_xi(x: f64, t: f64, alpha: f64, k: u32) -> Result<f64, ExactError> {
    if !(t > 0.0) {
        return Err(ExactError::NonPositiveTime(t));
    }
    Ok(x / damped_clock(alpha * k as f64, t))
}

/// Maps a solution of the undamped-velocity system back: `(v, u) = (v_hat, u_hat e^{-alpha t})`.
pub fn undo_damping_transform(v_hat: f64, u_hat: f64, t: f64, alpha: f64) -> (f64, f64) {
    (v_hat, u_hat * (-alpha * t).exp())
}

/// Point value of the exact solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateSample {
    /// Absolutely continuous part of `v`.
    pub v_regular: f64,
    pub u: f64,
    pub on_singular_support: bool,
    /// Dirac weight carried at this point (zero off the support).
    pub delta_weight: f64,
    /// Alternative on-shock velocity `sigma e^{-alpha t}`; set only on the
    /// singular support. Coincides with `u` when `k = 1`.
    pub u_speed_scaled: Option<f64>,
}

impl StateSample {
    fn regular(v: f64, u: f64) -> Self {
        Self { v_regular: v, u, on_singular_support: false, delta_weight: 0.0, u_speed_scaled: None }
    }
}

/// Classified exact solution with its characteristic constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactSolution {
    pub classification: WaveClassification,
    /// Discontinuity speed in the similarity coordinate (contact speed `c^k`
    /// when `u- = u+`).
    pub sigma: f64,
    /// Delta weight rate; zero unless the data produce a delta shock.
    pub w0: f64,
    pub problem: RiemannProblem,
}

impl ExactSolution {
    pub fn new(problem: RiemannProblem) -> Self {
        let classification = classify(&problem);
        let sigma = shock_speed_sigma(problem.u_minus, problem.u_plus, problem.k);
        let w0 = match classification {
            WaveClassification::DeltaShock => w0_formula(&problem, sigma),
            _ => 0.0,
        };
        Self { classification, sigma, w0, problem }
    }

    pub fn clock(&self, t: f64) -> f64 {
        damped_clock(self.problem.alpha_k(), t)
    }

    pub fn shock_position(&self, t: f64) -> f64 {
        shock_position(&self.problem, self.sigma, t)
    }

    pub fn delta_weight(&self, t: f64) -> f64 {
        match self.classification {
            WaveClassification::DeltaShock => delta_weight_at(&self.problem, self.w0, t),
            _ => 0.0,
        }
    }

    /// Physical positions of the discontinuities / fan edges at time `t`,
    /// left to right.
    pub fn wave_positions(&self, t: f64) -> Vec<f64> {
        let s = self.clock(t);
        let p = &self.problem;
        match self.classification {
            WaveClassification::RarefactionFan => {
                vec![p.speed(p.u_minus) * s, p.speed(p.u_plus) * s]
            }
            _ => vec![self.sigma * s],
        }
    }

    pub fn evaluate(&self, x: f64, t: f64) -> Result<StateSample, ExactError> {
        evaluate_with(self, x, t)
    }
}

/// Exact solution of the damped Riemann problem at `(x, t)`, `t > 0`.
pub fn evaluate_exact(p: &RiemannProblem, x: f64, t: f64) -> Result<StateSample, ExactError> {
    evaluate_with(&ExactSolution::new(*p), x, t)
}

fn evaluate_with(sol: &ExactSolution, x: f64, t: f64) -> Result<StateSample, ExactError> {
    if !(t > 0.0) {
        return Err(ExactError::NonPositiveTime(t));
    }
    let p = &sol.problem;
    let decay = (-p.alpha * t).exp();
    let left = StateSample::regular(p.v_minus, p.u_minus * decay);
    let right = StateSample::regular(p.v_plus, p.u_plus * decay);
    let xs = sol.shock_position(t);
    let sample = match sol.classification {
        WaveClassification::DeltaShock => {
            if x < xs {
                left
            } else if x > xs {
                right
            } else {
                StateSample {
                    v_regular: 0.5 * (p.v_minus + p.v_plus),
                    u: real_root(sol.sigma, p.k) * decay,
                    on_singular_support: true,
                    delta_weight: sol.delta_weight(t),
                    u_speed_scaled: Some(sol.sigma * decay),
                }
            }
        }
        WaveClassification::RarefactionFan => {
            let xi = x / sol.clock(t);
            if xi < p.speed(p.u_minus) {
                left
            } else if xi > p.speed(p.u_plus) {
                right
            } else {
                StateSample::regular(0.0, real_root(xi, p.k) * decay)
            }
        }
        // u is continuous; only v jumps across the contact.
        WaveClassification::Contact => {
            if x < xs {
                left
            } else {
                right
            }
        }
    };
    Ok(sample)
}

/// Lower/upper bracket for the shock speed at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedBracket {
    pub lower: f64,
    pub upper: f64,
    /// `speed - lower`
    pub lower_margin: f64,
    /// `upper - speed`
    pub upper_margin: f64,
    pub holds: bool,
}

impl SpeedBracket {
    fn new(lower: f64, speed: f64, upper: f64) -> Self {
        Self {
            lower,
            upper,
            lower_margin: speed - lower,
            upper_margin: upper - speed,
            holds: lower < speed && speed < upper,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropySample {
    pub t: f64,
    /// `dx/dt = sigma e^{-alpha k t}`
    pub shock_speed: f64,
    /// Characteristic speeds `u±^k e^{-alpha k t}` of the two states.
    pub characteristic: SpeedBracket,
    /// `u±^k e^{-alpha t}`: the state speeds scaled by the velocity decay only.
    /// Identical to `characteristic` for `k = 1`.
    pub velocity_scaled: SpeedBracket,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub samples: Vec<EntropySample>,
    pub all_characteristic: bool,
    pub all_velocity_scaled: bool,
}

/// Lax entropy check of the delta shock at the given times.
pub fn entropy_check(
    p: &RiemannProblem,
    sigma: f64,
    t_samples: &[f64],
) -> Result<EntropyReport, ExactError> {
    let class = classify(p);
    if class != WaveClassification::DeltaShock {
        return Err(ExactError::NotDeltaShock(class));
    }
    let lo = p.speed(p.u_plus);
    let hi = p.speed(p.u_minus);
    let samples: Vec<EntropySample> = t_samples
        .iter()
        .map(|&t| {
            let speed_decay = (-p.alpha_k() * t).exp();
            let velocity_decay = (-p.alpha * t).exp();
            let shock_speed = sigma * speed_decay;
            EntropySample {
                t,
                shock_speed,
                characteristic: SpeedBracket::new(lo * speed_decay, shock_speed, hi * speed_decay),
                velocity_scaled: SpeedBracket::new(
                    lo * velocity_decay,
                    shock_speed,
                    hi * velocity_decay,
                ),
            }
        })
        .collect();
    Ok(EntropyReport {
        all_characteristic: samples.iter().all(|s| s.characteristic.holds),
        all_velocity_scaled: samples.iter().all(|s| s.velocity_scaled.holds),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn delta() -> RiemannProblem {
        RiemannProblem::new(1.0, 1.0, 2.0, 0.0, 1, 1.0).unwrap()
    }

    #[test]
    fn sigma_examples() {
        // (4 - 0) / (2 * 2)
        assert_eq!(shock_speed_sigma(2.0, 0.0, 1), 1.0);
        // (1 - 1) / (4 * 2)
        assert_eq!(shock_speed_sigma(1.0, -1.0, 3), 0.0);
        for k in 1..=7 {
            let c: f64 = 1.3;
            let s = shock_speed_sigma(c, c, k);
            assert!((s - c.powi(k as i32)).abs() <= 1e-14 * s.abs());
        }
    }

    #[test]
    fn w0_examples() {
        let p = delta();
        assert_eq!(delta_weight_w0(&p, 1.0).unwrap(), 2.0);
        let p = RiemannProblem::new(1.0, 1.0, 1.0, -1.0, 1, 1.0).unwrap();
        assert_eq!(delta_weight_w0(&p, 0.0).unwrap(), 2.0);
        let p = RiemannProblem::new(1.5, 1.5, 0.4, 0.4, 1, 1.0).unwrap();
        assert_eq!(w0_formula(&p, 0.4), 0.0);
        assert!(matches!(delta_weight_w0(&p, 0.4), Err(ExactError::NotDeltaShock(_))));
    }

    #[test]
    fn damped_clock_is_continuous_across_series_switch() {
        for &ak in &[0.0, 1e-12, 1e-7, 9.99e-6, 1.001e-5, 1e-3, 1.0] {
            let t = 1.0;
            let reference = if ak == 0.0 { t } else { -(-ak * t as f64).exp_m1() / ak };
            assert!((damped_clock(ak, t) - reference).abs() <= 1e-15, "ak={ak}");
        }
        assert_eq!(damped_clock(0.0, 2.0), 2.0);
        assert_eq!(damped_clock(3.0, 0.0), 0.0);
    }

    #[test]
    fn shock_position_and_weight_limits() {
        let p = delta();
        assert_eq!(shock_position(&p, 1.0, 0.0), 0.0);
        let undamped = RiemannProblem { alpha: 0.0, ..p };
        assert_eq!(shock_position(&undamped, 1.0, 2.0), 2.0);
        assert_eq!(delta_weight_at(&undamped, 2.0, 3.0), 6.0);
        assert!((delta_weight_at(&p, 2.0, 60.0) - 2.0).abs() < 1e-15);
        assert_eq!(delta_weight_at(&p, 2.0, 0.0), 0.0);
    }

    #[test]
    fn similarity_variable() {
        let xi = similarity_xi(1.0, 2.0, 1e-12, 1).unwrap();
        assert!((xi - 0.5).abs() <= 1e-9 * 0.5);
        let x = 1.0 - (-1.0f64).exp();
        assert!((similarity_xi(x, 1.0, 1.0, 1).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(similarity_xi(0.0, 0.3, 1.0, 2).unwrap(), 0.0);
        assert!(similarity_xi(1.0, 0.0, 1.0, 1).is_err());
    }

    #[test]
    fn damping_transform() {
        assert_eq!(undo_damping_transform(1.0, 2.0, 0.0, 1.0), (1.0, 2.0));
        let (v, u) = undo_damping_transform(1.0, 2.0, 1.0, 1.0);
        assert_eq!(v, 1.0);
        assert!((u - 2.0 * (-1.0f64).exp()).abs() < 1e-16);
        assert_eq!(undo_damping_transform(0.3, 0.0, 5.0, 2.0), (0.3, 0.0));
    }

    #[test]
    fn exact_delta_states() {
        let p = delta();
        let s = evaluate_exact(&p, -1.0, 1.0).unwrap();
        assert_eq!(s.v_regular, 1.0);
        assert!((s.u - 2.0 * (-1.0f64).exp()).abs() < 1e-16);
        assert!(!s.on_singular_support);

        let sol = ExactSolution::new(p);
        let xs = sol.shock_position(1.0);
        let on = sol.evaluate(xs, 1.0).unwrap();
        assert!(on.on_singular_support);
        assert!((on.delta_weight - 2.0 * (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert_eq!(on.u_speed_scaled, Some(on.u));
        assert!(evaluate_exact(&p, 0.0, 0.0).is_err());
    }

    #[test]
    fn exact_fan_interior_is_vacuum() {
        let p = RiemannProblem::new(1.0, 1.0, 0.0, 1.0, 1, 1.0).unwrap();
        let t = 0.7;
        let x = 0.5 * damped_clock(1.0, t);
        let s = evaluate_exact(&p, x, t).unwrap();
        assert_eq!(s.v_regular, 0.0);
        assert!((s.u - 0.5 * (-t).exp()).abs() < 1e-15);
    }

    #[test]
    fn contact_moves_v_jump_only() {
        let p = RiemannProblem::new(1.0, 3.0, 0.5, 0.5, 1, 1.0).unwrap();
        let sol = ExactSolution::new(p);
        let t = 2.0;
        let xc = sol.shock_position(t);
        assert!((xc - 0.5 * (1.0 - (-2.0f64).exp())).abs() < 1e-15);
        let l = sol.evaluate(xc - 1e-3, t).unwrap();
        let r = sol.evaluate(xc + 1e-3, t).unwrap();
        assert_eq!((l.v_regular, r.v_regular), (1.0, 3.0));
        assert_eq!(l.u, r.u);
    }

    #[test]
    fn entropy_examples() {
        let p = delta();
        let rep = entropy_check(&p, 1.0, &[0.0, 1.0, 10.0]).unwrap();
        assert!(rep.all_characteristic && rep.all_velocity_scaled);
        for s in &rep.samples {
            assert!((s.characteristic.lower_margin - (-s.t).exp()).abs() < 1e-15);
        }
        let p = RiemannProblem::new(1.0, 1.0, 1.0, -1.0, 1, 1.0).unwrap();
        let rep = entropy_check(&p, 0.0, &[0.0]).unwrap();
        assert_eq!(rep.samples[0].characteristic.lower, -1.0);
        assert_eq!(rep.samples[0].characteristic.upper, 1.0);
        assert!(rep.all_characteristic);
        let p = RiemannProblem::new(1.0, 1.0, 1.0, 1.0, 1, 1.0).unwrap();
        assert!(entropy_check(&p, 1.0, &[0.0]).is_err());
    }
}
