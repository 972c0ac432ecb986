use serde::{Deserialize, Serialize};

use super::{interp, uniform_grid, ProfileConfig, SimilarityProfile, ViscousError};
use crate::problem::{pow_k, RiemannProblem};

/// How many times a failed continuation step may be halved.
const MAX_BISECTIONS: usize = 24;
/// Newton solves allowed over a whole continuation path, at least this
/// many or eight per scheduled step.
const MAX_ATTEMPTS: usize = 4096;

/// Sequence of boundary scales `mu` visited on the way from 0 to 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContinuationSchedule {
    /// `mu_j = j / n`
    Uniform(usize),
    /// `mu_j = sqrt(j / n)`: large early steps, small ones near `mu = 1`.
    Sqrt(usize),
}

impl ContinuationSchedule {
    pub fn values(&self) -> Vec<f64> {
        let (n, f): (usize, fn(f64) -> f64) = match *self {
            ContinuationSchedule::Uniform(n) => (n.max(1), |s| s),
            ContinuationSchedule::Sqrt(n) => (n.max(1), f64::sqrt),
        };
        (1..=n).map(|j| if j == n { 1.0 } else { f(j as f64 / n as f64) }).collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub newton_iterations: usize,
    pub continuation_steps: usize,
    pub bisections: usize,
    pub residual: f64,
}

/// Solves the truncated velocity problem with the configured uniform
/// continuation schedule.
pub fn solve_u_profile(
    p: &RiemannProblem,
    cfg: &ProfileConfig,
) -> Result<SimilarityProfile, ViscousError> {
    solve_u_profile_with(p, cfg, ContinuationSchedule::Uniform(cfg.continuation_steps))
        .map(|(profile, _)| profile)
}

pub fn solve_u_profile_with(
    p: &RiemannProblem,
    cfg: &ProfileConfig,
    schedule: ContinuationSchedule,
) -> Result<(SimilarityProfile, SolveStats), ViscousError> {
    cfg.validate(p)?;
    let xi = uniform_grid(cfg.domain_radius, cfg.n_cells);
    let n = xi.len();
    let mut stats = SolveStats::default();

    if p.u_minus == p.u_plus {
        let profile = new_profile(xi, vec![p.u_minus; n], cfg.epsilon, 0.0, p);
        return Ok((profile, stats));
    }

    let h = cfg.cell_width();
    let sys = Discretization { xi: &xi, k: p.k, c: h / (2.0 * cfg.epsilon) };

    // mu = 0 has the trivial solution u = 0.
    let mut u = vec![0.0; n];
    let mut mu = 0.0;
    let mut attempts = 0usize;
    let targets = schedule.values();
    let budget = MAX_ATTEMPTS.max(8 * targets.len());
    for target in targets {
        let mut pending = vec![target];
        while let Some(&next) = pending.last() {
            if attempts == budget {
                return Err(ViscousError::NonConvergence { mu: next, residual: stats.residual });
            }
            attempts += 1;
            let mut trial = u.clone();
            trial[0] = next * p.u_minus;
            trial[n - 1] = next * p.u_plus;
            match sys.newton(&mut trial, next, cfg.newton_tol, cfg.newton_max_iter) {
                Ok((iters, res)) => {
                    stats.newton_iterations += iters;
                    stats.continuation_steps += 1;
                    stats.residual = res;
                    u = trial;
                    mu = next;
                    pending.pop();
                }
                Err(res) => {
                    if pending.len() > MAX_BISECTIONS {
                        return Err(ViscousError::NonConvergence { mu: next, residual: res });
                    }
                    stats.bisections += 1;
                    pending.push(0.5 * (mu + next));
                }
            }
        }
    }
    let profile = new_profile(xi, u, cfg.epsilon, stats.residual, p);
    Ok((profile, stats))
}

fn new_profile(
    xi: Vec<f64>,
    u_hat: Vec<f64>,
    epsilon: f64,
    residual: f64,
    p: &RiemannProblem,
) -> SimilarityProfile {
    let mut profile = SimilarityProfile {
        xi,
        u_hat,
        v_hat: Vec::new(),
        v_valid: Vec::new(),
        singular_points: Vec::new(),
        epsilon,
        residual,
        tail_bound: 0.0,
        divergence_observed: None,
    };
    profile.tail_bound = tail_bound(&profile, p);
    profile
}

/// Central differences of `values` on the uniform grid, one-sided at the ends.
pub(crate) fn node_derivative(xi: &[f64], values: &[f64]) -> Vec<f64> {
    let n = xi.len();
    let h = xi[1] - xi[0];
    (0..n)
        .map(|i| {
            if i == 0 {
                (values[1] - values[0]) / h
            } else if i == n - 1 {
                (values[n - 1] - values[n - 2]) / h
            } else {
                (values[i + 1] - values[i - 1]) / (2.0 * h)
            }
        })
        .collect()
}

/// `|u'(0)|` from the interpolated node derivatives.
pub(crate) fn slope_at_origin(profile: &SimilarityProfile) -> f64 {
    let du = node_derivative(&profile.xi, &profile.u_hat);
    interp(&profile.xi, &du, 0.0).abs()
}

/// Upper bound for `int_{|s|>R} |(u^k)'| / |u^k - s| ds` from the Gaussian
/// derivative decay `|u'(s)| <= |u'(0)| exp((2M|s| - s^2) / (2 eps))`,
/// `M = max|u±|^k`.
fn tail_bound(profile: &SimilarityProfile, p: &RiemannProblem) -> f64 {
    let m = p.max_speed();
    let r = profile.radius();
    let gap = r - m;
    if gap <= 0.0 {
        return f64::INFINITY;
    }
    let umax = p.u_minus.abs().max(p.u_plus.abs());
    let eps = profile.epsilon;
    let k = p.k as f64;
    let prefactor = k * umax.powi(p.k as i32 - 1) * slope_at_origin(profile) / gap;
    // int_R^inf exp((2 M s - s^2) / 2eps) ds <= (eps / gap) exp((M^2 - gap^2) / 2eps)
    let log_integral = (eps / gap).ln() + (m * m - gap * gap) / (2.0 * eps);
    2.0 * prefactor * log_integral.exp()
}

struct Discretization<'a> {
    xi: &'a [f64],
    k: u32,
    /// `h / (2 eps)`
    c: f64,
}

impl Discretization<'_> {
    fn flux(&self, u: f64) -> f64 {
        pow_k(u, self.k + 1) / (self.k as f64 + 1.0)
    }

    /// Scaled residual at the interior nodes.
    fn residual(&self, u: &[f64], mu: f64, out: &mut [f64]) {
        let n = u.len();
        for i in 1..n - 1 {
            let conv = self.xi[i] * (u[i + 1] - u[i - 1])
                - mu * (self.flux(u[i + 1]) - self.flux(u[i - 1]));
            out[i - 1] = u[i + 1] - 2.0 * u[i] + u[i - 1] + self.c * conv;
        }
    }

    fn jacobian(&self, u: &[f64], mu: f64, lower: &mut [f64], diag: &mut [f64], upper: &mut [f64]) {
        let n = u.len();
        for i in 1..n - 1 {
            let j = i - 1;
            lower[j] = 1.0 - self.c * (self.xi[i] - mu * pow_k(u[i - 1], self.k));
            diag[j] = -2.0;
            upper[j] = 1.0 + self.c * (self.xi[i] - mu * pow_k(u[i + 1], self.k));
        }
    }

    /// Damped Newton on the interior nodes. Returns `(iterations, residual)`
    /// on success and the last residual on failure.
    fn newton(&self, u: &mut [f64], mu: f64, tol: f64, max_iter: usize) -> Result<(usize, f64), f64> {
        let m = u.len() - 2;
        let mut r = vec![0.0; m];
        let mut trial_r = vec![0.0; m];
        let (mut lower, mut diag, mut upper) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
        let mut trial = u.to_vec();

        self.residual(u, mu, &mut r);
        let mut res_inf = norm_inf(&r);
        let mut res_2 = norm_2(&r);
        let mut converged_once = false;
        for iter in 0..max_iter {
            if !res_inf.is_finite() {
                return Err(res_inf);
            }
            if res_inf <= tol {
                if converged_once || res_inf == 0.0 {
                    return Ok((iter, res_inf));
                }
                converged_once = true;
            }
            self.jacobian(u, mu, &mut lower, &mut diag, &mut upper);
            let mut delta: Vec<f64> = r.iter().map(|x| -x).collect();
            if crate::linalg::solve_tridiagonal(&lower, &diag, &upper, &mut delta).is_none() {
                return Err(res_inf);
            }
            let mut lambda = 1.0;
            loop {
                for j in 0..m {
                    trial[j + 1] = u[j + 1] + lambda * delta[j];
                }
                self.residual(&trial, mu, &mut trial_r);
                let t2 = norm_2(&trial_r);
                if t2.is_finite() && t2 <= (1.0 - 1e-4 * lambda) * res_2 {
                    break;
                }
                lambda *= 0.5;
                if lambda < 1.0 / 1024.0 {
                    // A polishing step that cannot improve a converged iterate is fine.
                    return if converged_once { Ok((iter, res_inf)) } else { Err(res_inf) };
                }
            }
            u[1..=m].copy_from_slice(&trial[1..=m]);
            std::mem::swap(&mut r, &mut trial_r);
            res_inf = norm_inf(&r);
            res_2 = norm_2(&r);
        }
        if res_inf <= tol {
            Ok((max_iter, res_inf))
        } else {
            Err(res_inf)
        }
    }
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a: f64, x| if x.is_nan() { f64::NAN } else { a.max(x.abs()) })
}

fn norm_2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
