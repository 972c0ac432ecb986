//! Self-similar viscous profiles.
//!
//! In the similarity variable the regularized velocity solves the scalar
//! two-point problem
//!
//! ```text
//!     eps u'' = -xi u' + (u^{k+1} / (k+1))',   u(-inf) = u-,  u(+inf) = u+
//! ```
//!
//! which is truncated to `[-R, R]` and reached by continuation in the
//! boundary scale `mu` (`u(±R) = mu u±`, `mu: 0 -> 1`). The density then
//! follows from two explicit quadratures that are singular where
//! `u(xi)^k = xi`.

mod bvp;
mod density;
mod limits;
mod singular;
mod validate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problem::RiemannProblem;

pub use bvp::{solve_u_profile, solve_u_profile_with, ContinuationSchedule, SolveStats};
pub use density::{compute_v_profile, measure_delta_weight};
pub use limits::{DECAY_FLOOR, flatness_of, flatness_sample, limit_flatness_check, FlatnessReport, FlatnessRow};
pub use singular::find_singular_points;
pub use validate::{
    check_derivative_bound, check_monotone, check_uniqueness, validate_profile, CheckResult,
    ProfileDiagnostics,
};

/// Smallest viscosity accepted regardless of resolution.
pub const EPSILON_FLOOR: f64 = 1e-4;
/// Resolution rule: `n_cells >= CELLS_RULE * R / eps`.
pub const CELLS_RULE: f64 = 40.0;
pub const MIN_CELLS: usize = 64;
pub const MAX_CELLS: usize = 1 << 22;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ViscousError {
    #[error("invalid profile configuration: {0}")]
    InvalidConfig(String),
    #[error("Newton iteration did not converge at mu = {mu} (residual {residual:e}); raise continuation_steps or n_cells")]
    NonConvergence { mu: f64, residual: f64 },
    #[error("no root of u(xi)^k = xi on the grid")]
    NoRoot,
    #[error("expected exactly one singular point for u- > u+, found {0}")]
    UnexpectedRoots(usize),
    #[error("non-finite quadrature value at xi = {0}")]
    QuadratureFailure(f64),
    #[error("window [{lo}, {hi}] does not strictly contain the singular point {at}")]
    WindowExcludesSingularity { lo: f64, hi: f64, at: f64 },
    #[error("operation needs u- > u+")]
    NotDeltaShock,
    #[error("profile has no density; run compute_v_profile first")]
    MissingDensity,
}

/// Discretization and solver controls for one viscosity value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileConfig {
    pub epsilon: f64,
    /// Half-width `R` of the truncated similarity domain.
    pub domain_radius: f64,
    pub n_cells: usize,
    /// Initial number of uniform steps in `mu`; failed steps are bisected.
    pub continuation_steps: usize,
    /// Bound on the scaled residual (equation times `h^2 / eps`), infinity norm.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
}

impl ProfileConfig {
    pub const DEFAULT_STEPS: usize = 32;
    pub const DEFAULT_TOL: f64 = 1e-10;
    pub const DEFAULT_MAX_ITER: usize = 50;

    /// Default radius `2 (max|u±|^k + 1)`.
    pub fn default_radius(p: &RiemannProblem) -> f64 {
        2.0 * (p.max_speed() + 1.0)
    }

    /// Smallest even cell count satisfying the resolution rule.
    pub fn min_cells(radius: f64, epsilon: f64) -> usize {
        let n = (CELLS_RULE * radius / epsilon).ceil().max(MIN_CELLS as f64) as usize;
        n + n % 2
    }

    /// Defaults for `p` at viscosity `epsilon`.
    pub fn for_problem(p: &RiemannProblem, epsilon: f64) -> Self {
        let domain_radius = Self::default_radius(p);
        Self {
            epsilon,
            domain_radius,
            n_cells: Self::min_cells(domain_radius, epsilon).max(256),
            continuation_steps: Self::DEFAULT_STEPS,
            newton_tol: Self::DEFAULT_TOL,
            newton_max_iter: Self::DEFAULT_MAX_ITER,
        }
    }

    pub fn validate(&self, p: &RiemannProblem) -> Result<(), ViscousError> {
        let bad = |m: String| Err(ViscousError::InvalidConfig(m));
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.epsilon < EPSILON_FLOOR {
            return bad(format!("epsilon {} is below the floor {EPSILON_FLOOR}", self.epsilon));
        }
        let min_radius = p.max_speed() + 1.0;
        if !(self.domain_radius > min_radius) || !self.domain_radius.is_finite() {
            return bad(format!(
                "domain_radius {} must exceed max|u±|^k + 1 = {min_radius}",
                self.domain_radius
            ));
        }
        if self.n_cells < MIN_CELLS {
            return bad(format!("n_cells {} is below {MIN_CELLS}", self.n_cells));
        }
        if self.n_cells > MAX_CELLS {
            return bad(format!("n_cells {} exceeds the cap {MAX_CELLS}", self.n_cells));
        }
        let needed = CELLS_RULE * self.domain_radius / self.epsilon;
        if (self.n_cells as f64) < needed {
            return bad(format!(
                "n_cells {} violates n_cells >= 40 R / eps = {}",
                self.n_cells,
                needed.ceil()
            ));
        }
        if !(self.newton_tol > 0.0) {
            return bad(format!("newton_tol must be positive, got {}", self.newton_tol));
        }
        if self.continuation_steps == 0 || self.newton_max_iter == 0 {
            return bad("continuation_steps and newton_max_iter must be >= 1".into());
        }
        Ok(())
    }

    pub fn cell_width(&self) -> f64 {
        2.0 * self.domain_radius / self.n_cells as f64
    }
}

/// Discrete similarity profile for one viscosity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityProfile {
    /// Uniform nodes on `[-R, R]`.
    pub xi: Vec<f64>,
    pub u_hat: Vec<f64>,
    /// Absolutely continuous density; empty until [`compute_v_profile`] runs.
    pub v_hat: Vec<f64>,
    /// `false` at nodes within one cell of a singular point; those hold a
    /// capped value and are skipped by quadrature and sup-norm checks.
    pub v_valid: Vec<bool>,
    /// Roots of `u^k = xi`: one for `u- > u+`, `[min, max]` for `u- < u+`.
    pub singular_points: Vec<f64>,
    pub epsilon: f64,
    /// Final scaled residual of the Newton solve.
    pub residual: f64,
    /// Bound on the quadrature integrand mass lost by truncating at `±R`.
    pub tail_bound: f64,
    /// For `u- > u+`: whether the last three valid densities on each side
    /// increase toward the singular point.
    pub divergence_observed: Option<bool>,
}

impl SimilarityProfile {
    pub fn n_nodes(&self) -> usize {
        self.xi.len()
    }

    pub fn cell_width(&self) -> f64 {
        self.xi[1] - self.xi[0]
    }

    pub fn radius(&self) -> f64 {
        *self.xi.last().unwrap()
    }

    /// Piecewise-linear interpolation of `u_hat`, clamped to the end values.
    pub fn u_at(&self, x: f64) -> f64 {
        interp(&self.xi, &self.u_hat, x)
    }

    pub fn has_density(&self) -> bool {
        self.v_hat.len() == self.xi.len()
    }
}

pub(crate) fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let h = xs[1] - xs[0];
    let i = (((x - xs[0]) / h).floor() as usize).min(n - 2);
    let t = (x - xs[i]) / h;
    ys[i] + t * (ys[i + 1] - ys[i])
}

pub(crate) fn uniform_grid(radius: f64, n_cells: usize) -> Vec<f64> {
    let h = 2.0 * radius / n_cells as f64;
    (0..=n_cells)
        .map(|i| {
            // Exact endpoints and an exact zero at the midpoint for even n.
            if 2 * i == n_cells {
                0.0
            } else if i == n_cells {
                radius
            } else {
                -radius + i as f64 * h
            }
        })
        .collect()
}
