//! First-order finite-volume simulation of the damped system.
//!
//! Each step advances the velocity with a local Lax-Friedrichs update of
//! `u_t + (u^{k+1}/(k+1))_x = 0`, then the density with the same scheme for
//! `v_t + (v u^k)_x = 0` using the updated velocity, and finally applies the
//! damping `u <- u exp(-alpha dt)` exactly. Boundaries are zero-gradient.
//!
//! The [`Formulation::Transformed`] variant evolves `u_hat = u exp(alpha t)`
//! instead, for which the damping becomes a time-dependent flux factor and no
//! source step is needed.

mod measure;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{damped_clock, ExactSolution};
use crate::problem::{pow_k, RiemannProblem};

pub use measure::{compare_with_exact, measure_shock, measure_shock_with, ErrorNorms, ShockMeasurement, ShockWindow};

pub const MIN_FV_CELLS: usize = 100;
/// Waves must stay this fraction of the domain width away from either end.
pub const DOMAIN_MARGIN: f64 = 0.1;
pub const MAX_CFL: f64 = 0.9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FvError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("wave at x = {position} leaves the interior [{lo}, {hi}] of the domain by t = {t}")]
    DomainTooSmall { position: f64, lo: f64, hi: f64, t: f64 },
    #[error("cfl must lie in (0, {MAX_CFL}], got {0}")]
    BadCfl(f64),
    #[error("CFL violation: {0}")]
    CflViolation(String),
    #[error("target time {target} is before the current time {current}")]
    InvalidTime { target: f64, current: f64 },
    #[error("operation needs delta-shock data (u- > u+)")]
    NotDeltaShock,
    #[error("no concentrated mass: excess {mass:e} is below {threshold:e}")]
    NoConcentration { mass: f64, threshold: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FvGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_cells: usize,
    pub dx: f64,
}

impl FvGrid {
    pub fn new(x_min: f64, x_max: f64, n_cells: usize) -> Result<Self, FvError> {
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(FvError::InvalidGrid(format!("need x_min < x_max, got [{x_min}, {x_max}]")));
        }
        if n_cells < MIN_FV_CELLS {
            return Err(FvError::InvalidGrid(format!("n_cells {n_cells} is below {MIN_FV_CELLS}")));
        }
        Ok(Self { x_min, x_max, n_cells, dx: (x_max - x_min) / n_cells as f64 })
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn center(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|i| self.center(i)).collect()
    }

    /// Checks that every wave of `exact` stays inside the domain, with the
    /// required margin, up to `t_end`. Wave positions are monotone in time,
    /// so checking the end time suffices.
    pub fn check_domain(&self, exact: &ExactSolution, t_end: f64) -> Result<(), FvError> {
        let margin = DOMAIN_MARGIN * self.width();
        let (lo, hi) = (self.x_min + margin, self.x_max - margin);
        for position in exact.wave_positions(t_end) {
            if position < lo || position > hi {
                return Err(FvError::DomainTooSmall { position, lo, hi, t: t_end });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Formulation {
    /// Evolve `u` and integrate the damping exactly after each step.
    #[default]
    Direct,
    /// Evolve `u_hat = u e^{alpha t}`, with fluxes scaled by `e^{-alpha k t}`.
    Transformed,
}

/// Cell averages and time of one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FvState {
    pub t: f64,
    pub v_bar: Vec<f64>,
    /// Velocity averages; `u_hat` for [`Formulation::Transformed`].
    pub u_bar: Vec<f64>,
    pub grid: FvGrid,
    pub problem: RiemannProblem,
    pub formulation: Formulation,
    /// Total `v`-mass removed by the positivity clamp so far.
    pub clamped_total: f64,
}

/// Bookkeeping for one step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub dt: f64,
    pub mass: f64,
    /// `|M_new - M_old - dt (G_left - G_right)| / M_old`, with `G` the
    /// boundary fluxes.
    pub mass_drift: f64,
    /// Clamped mass relative to the total.
    pub clamped_fraction: f64,
}

/// Diagnostics recorded at one requested sample time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FvSample {
    pub t: f64,
    pub mass: f64,
    pub steps: usize,
    /// Largest per-step drift since the previous sample.
    pub max_mass_drift: f64,
    pub max_clamped_fraction: f64,
    /// Present for delta-shock data once a concentration is detectable.
    pub shock: Option<ShockMeasurement>,
}

pub fn init_riemann(grid: FvGrid, p: &RiemannProblem) -> FvState {
    init_riemann_with(grid, p, Formulation::Direct)
}

pub fn init_riemann_with(grid: FvGrid, p: &RiemannProblem, formulation: Formulation) -> FvState {
    let n = grid.n_cells;
    let mut v_bar = Vec::with_capacity(n);
    let mut u_bar = Vec::with_capacity(n);
    for i in 0..n {
        let a = grid.x_min + i as f64 * grid.dx;
        // Fraction of the cell left of x = 0.
        let theta = (-a / grid.dx).clamp(0.0, 1.0);
        v_bar.push(theta * p.v_minus + (1.0 - theta) * p.v_plus);
        u_bar.push(theta * p.u_minus + (1.0 - theta) * p.u_plus);
    }
    FvState { t: 0.0, v_bar, u_bar, grid, problem: *p, formulation, clamped_total: 0.0 }
}

impl FvState {
    pub fn mass(&self) -> f64 {
        self.v_bar.iter().sum::<f64>() * self.grid.dx
    }

    /// Physical velocity averages `u`, whatever the formulation.
    pub fn physical_u(&self) -> Vec<f64> {
        match self.formulation {
            Formulation::Direct => self.u_bar.clone(),
            Formulation::Transformed => {
                let decay = (-self.problem.alpha * self.t).exp();
                self.u_bar.iter().map(|u| u * decay).collect()
            }
        }
    }

    /// `e^{-alpha k t}`: the factor turning `u_hat^k` into the physical speed.
    fn speed_factor(&self) -> f64 {
        match self.formulation {
            Formulation::Direct => 1.0,
            Formulation::Transformed => (-self.problem.alpha_k() * self.t).exp(),
        }
    }

    /// Time step permitted by `cfl` at the current state.
    pub fn stable_dt(&self, cfl: f64) -> Result<f64, FvError> {
        if !(cfl > 0.0 && cfl <= MAX_CFL) {
            return Err(FvError::BadCfl(cfl));
        }
        let k = self.problem.k;
        let umax = self.u_bar.iter().fold(0.0f64, |m, u| m.max(u.abs()));
        let speed = pow_k(umax, k) * self.speed_factor();
        // A motionless state still has to advance; use unit speed.
        let speed = if speed > 0.0 { speed } else { 1.0 };
        let dt = cfl * self.grid.dx / speed;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(FvError::CflViolation(format!("dt = {dt} from max |u| = {umax}")));
        }
        Ok(dt)
    }

    /// One step at the largest stable `dt`.
    pub fn step(&mut self, cfl: f64) -> Result<StepReport, FvError> {
        let dt = self.stable_dt(cfl)?;
        self.step_by(dt)
    }

    /// One step of length `dt`, which must not exceed [`Self::stable_dt`] at
    /// `cfl = MAX_CFL`.
    pub fn step_by(&mut self, dt: f64) -> Result<StepReport, FvError> {
        let limit = self.stable_dt(MAX_CFL)?;
        if !(dt > 0.0 && dt <= limit * (1.0 + 1e-12)) {
            return Err(FvError::CflViolation(format!("dt = {dt} exceeds the stable limit {limit}")));
        }
        let p = self.problem;
        let k = p.k;
        let n = self.grid.n_cells;
        // Flux integration time: dt itself, or int_t^{t+dt} e^{-alpha k s} ds.
        let tau = match self.formulation {
            Formulation::Direct => dt,
            Formulation::Transformed => self.speed_factor() * damped_clock(p.alpha_k(), dt),
        };
        let r = tau / self.grid.dx;

        let flux_u = |u: f64| pow_k(u, k + 1) / (k as f64 + 1.0);
        let mut fu = vec![0.0; n + 1];
        fu[0] = flux_u(self.u_bar[0]);
        fu[n] = flux_u(self.u_bar[n - 1]);
        for j in 1..n {
            let (ul, ur) = (self.u_bar[j - 1], self.u_bar[j]);
            let a = pow_k(ul.abs(), k).max(pow_k(ur.abs(), k));
            fu[j] = 0.5 * (flux_u(ul) + flux_u(ur)) - 0.5 * a * (ur - ul);
        }
        let u_new: Vec<f64> = (0..n).map(|i| self.u_bar[i] - r * (fu[i + 1] - fu[i])).collect();

        let lam: Vec<f64> = u_new.iter().map(|&u| pow_k(u, k)).collect();
        let mut gv = vec![0.0; n + 1];
        gv[0] = self.v_bar[0] * lam[0];
        gv[n] = self.v_bar[n - 1] * lam[n - 1];
        for j in 1..n {
            let (vl, vr) = (self.v_bar[j - 1], self.v_bar[j]);
            let a = lam[j - 1].abs().max(lam[j].abs());
            gv[j] = 0.5 * (vl * lam[j - 1] + vr * lam[j]) - 0.5 * a * (vr - vl);
        }

        let mass_old = self.mass();
        let mut clamped = 0.0;
        for i in 0..n {
            let v = self.v_bar[i] - r * (gv[i + 1] - gv[i]);
            if v < 0.0 {
                clamped -= v * self.grid.dx;
                self.v_bar[i] = 0.0;
            } else {
                self.v_bar[i] = v;
            }
        }
        let decay = match self.formulation {
            Formulation::Direct => (-p.alpha * dt).exp(),
            Formulation::Transformed => 1.0,
        };
        for (u, un) in self.u_bar.iter_mut().zip(&u_new) {
            *u = un * decay;
        }
        if self.u_bar.iter().chain(&self.v_bar).any(|x| !x.is_finite()) {
            return Err(FvError::CflViolation(format!("non-finite state at t = {}", self.t + dt)));
        }
        self.t += dt;
        self.clamped_total += clamped;

        let mass = self.mass();
        // Clamping adds mass; subtract it before comparing with the flux budget.
        let expected = mass_old + tau * (gv[0] - gv[n]);
        let scale = mass_old.abs().max(f64::MIN_POSITIVE);
        Ok(StepReport {
            dt,
            mass,
            mass_drift: (mass - clamped - expected).abs() / scale,
            clamped_fraction: clamped / mass.max(f64::MIN_POSITIVE),
        })
    }

    /// Steps until `t_end`, shortening the last step to land on it exactly,
    /// and records diagnostics at every sample time in `(t, t_end]`. An
    /// already-reached `t_end` returns an empty trajectory.
    pub fn run_until(
        &mut self,
        t_end: f64,
        cfl: f64,
        sample_times: &[f64],
    ) -> Result<Vec<FvSample>, FvError> {
        if t_end < self.t {
            return Err(FvError::InvalidTime { target: t_end, current: self.t });
        }
        if !(cfl > 0.0 && cfl <= MAX_CFL) {
            return Err(FvError::BadCfl(cfl));
        }
        let mut targets: Vec<f64> =
            sample_times.iter().copied().filter(|&s| s > self.t && s <= t_end).collect();
        targets.sort_by(f64::total_cmp);
        targets.dedup();
        if t_end > self.t && targets.last() != Some(&t_end) {
            targets.push(t_end);
        }
        let record: Vec<bool> = targets.iter().map(|t| sample_times.contains(t)).collect();
        let exact = ExactSolution::new(self.problem);

        let mut out = Vec::new();
        for (target, keep) in targets.into_iter().zip(record) {
            let (mut steps, mut drift, mut clamp) = (0usize, 0.0f64, 0.0f64);
            while self.t < target {
                let dt = self.stable_dt(cfl)?;
                let rep = if self.t + dt >= target {
                    let last = target - self.t;
                    let rep = self.step_by(last)?;
                    self.t = target;
                    rep
                } else {
                    self.step_by(dt)?
                };
                steps += 1;
                drift = drift.max(rep.mass_drift);
                clamp = clamp.max(rep.clamped_fraction);
            }
            if keep {
                let shock = measure_shock(self, &exact).ok();
                out.push(FvSample {
                    t: self.t,
                    mass: self.mass(),
                    steps,
                    max_mass_drift: drift,
                    max_clamped_fraction: clamp,
                    shock,
                });
            }
        }
        Ok(out)
    }
}
