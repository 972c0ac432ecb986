use serde::{Deserialize, Serialize};

use super::bvp::node_derivative;
use super::{compute_v_profile, solve_u_profile, ProfileConfig, SimilarityProfile, ViscousError};
use crate::exact::shock_speed_sigma;
use crate::problem::{classify, pow_k, RiemannProblem, WaveClassification};

/// Values at or below this are treated as converged when judging decay.
pub const DECAY_FLOOR: f64 = 1e-12;

/// Sup-norm distances from the inviscid limit for one viscosity. `None`
/// marks an empty region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatnessRow {
    pub epsilon: f64,
    pub singular_points: Vec<f64>,
    /// `sup |u - u-|` left of the wave.
    pub sup_u_left: Option<f64>,
    /// `sup |u - u+|` right of the wave.
    pub sup_u_right: Option<f64>,
    /// `sup |u'|` over both outer regions.
    pub sup_du: Option<f64>,
    /// `sup |v - v±|` over both outer regions.
    pub sup_v: Option<f64>,
    /// Fan data only: `sup |u^k - xi|` over the interior of the fan.
    pub sup_fan_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatnessReport {
    pub eta: f64,
    /// Sorted by decreasing viscosity.
    pub rows: Vec<FlatnessRow>,
    pub empty_regions: Vec<String>,
    pub decreasing_u_left: bool,
    pub decreasing_u_right: bool,
    pub decreasing_du: bool,
    pub decreasing_v: bool,
    pub decreasing_fan_residual: Option<bool>,
}

impl FlatnessReport {
    pub fn from_rows(p: &RiemannProblem, eta: f64, mut rows: Vec<FlatnessRow>) -> Self {
        rows.sort_by(|a, b| b.epsilon.total_cmp(&a.epsilon));
        let col = |f: fn(&FlatnessRow) -> Option<f64>| decreasing(rows.iter().map(f));
        let fan = classify(p) == WaveClassification::RarefactionFan;
        Self {
            eta,
            empty_regions: empty_regions(p, eta, rows.first().map(|_| radius_hint(p))),
            decreasing_u_left: col(|r| r.sup_u_left),
            decreasing_u_right: col(|r| r.sup_u_right),
            decreasing_du: col(|r| r.sup_du),
            decreasing_v: col(|r| r.sup_v),
            decreasing_fan_residual: fan.then(|| col(|r| r.sup_fan_residual)),
            rows,
        }
    }

    /// All tracked columns decay and no region was empty.
    pub fn all_decreasing(&self) -> bool {
        self.empty_regions.is_empty()
            && self.decreasing_u_left
            && self.decreasing_u_right
            && self.decreasing_du
            && self.decreasing_v
            && self.decreasing_fan_residual.unwrap_or(true)
    }
}

fn radius_hint(p: &RiemannProblem) -> f64 {
    ProfileConfig::default_radius(p)
}

/// Strictly decreasing sequence, where both neighbours under the floor count
/// as converged. Any missing value fails.
fn decreasing(values: impl Iterator<Item = Option<f64>>) -> bool {
    let v: Option<Vec<f64>> = values.collect();
    let Some(v) = v else { return false };
    v.windows(2).all(|w| w[1] < w[0] || (w[0] <= DECAY_FLOOR && w[1] <= DECAY_FLOOR))
}

/// Limit positions bounding the outer regions: `(left edge, right edge)`.
fn limit_edges(p: &RiemannProblem) -> (f64, f64) {
    match classify(p) {
        WaveClassification::RarefactionFan => (p.speed(p.u_minus), p.speed(p.u_plus)),
        _ => {
            let s = shock_speed_sigma(p.u_minus, p.u_plus, p.k);
            (s, s)
        }
    }
}

fn empty_regions(p: &RiemannProblem, eta: f64, radius: Option<f64>) -> Vec<String> {
    let r = radius.unwrap_or_else(|| radius_hint(p));
    let (a, b) = limit_edges(p);
    let mut out = Vec::new();
    if a - eta < -r {
        out.push(format!("left region xi <= {} lies outside [-{r}, {r}]", a - eta));
    }
    if b + eta > r {
        out.push(format!("right region xi >= {} lies outside [-{r}, {r}]", b + eta));
    }
    if classify(p) == WaveClassification::RarefactionFan && a + eta > b - eta {
        out.push(format!("fan interior [{}, {}] is empty", a + eta, b - eta));
    }
    out
}

/// Solves one viscosity and measures its distance from the inviscid limit.
pub fn flatness_sample(
    p: &RiemannProblem,
    cfg: &ProfileConfig,
    eta: f64,
) -> Result<FlatnessRow, ViscousError> {
    let profile = compute_v_profile(solve_u_profile(p, cfg)?, p)?;
    Ok(flatness_of(&profile, p, eta))
}

pub fn flatness_of(profile: &SimilarityProfile, p: &RiemannProblem, eta: f64) -> FlatnessRow {
    let (a, b) = limit_edges(p);
    let du = node_derivative(&profile.xi, &profile.u_hat);
    let mut row = FlatnessRow {
        epsilon: profile.epsilon,
        singular_points: profile.singular_points.clone(),
        sup_u_left: None,
        sup_u_right: None,
        sup_du: None,
        sup_v: None,
        sup_fan_residual: None,
    };
    let bump = |slot: &mut Option<f64>, x: f64| *slot = Some(slot.map_or(x, |s: f64| s.max(x)));
    let fan = classify(p) == WaveClassification::RarefactionFan;
    for i in 0..profile.n_nodes() {
        let x = profile.xi[i];
        let u = profile.u_hat[i];
        let v_ok = profile.has_density() && profile.v_valid[i];
        if x <= a - eta {
            bump(&mut row.sup_u_left, (u - p.u_minus).abs());
            bump(&mut row.sup_du, du[i].abs());
            if v_ok {
                bump(&mut row.sup_v, (profile.v_hat[i] - p.v_minus).abs());
            }
        } else if x >= b + eta {
            bump(&mut row.sup_u_right, (u - p.u_plus).abs());
            bump(&mut row.sup_du, du[i].abs());
            if v_ok {
                bump(&mut row.sup_v, (profile.v_hat[i] - p.v_plus).abs());
            }
        } else if fan && x >= a + eta && x <= b - eta {
            bump(&mut row.sup_fan_residual, (pow_k(u, p.k) - x).abs());
        }
    }
    row
}

/// Measures the approach to the inviscid limit over a viscosity sweep,
/// using default profile settings for each value.
pub fn limit_flatness_check(
    p: &RiemannProblem,
    eps_sweep: &[f64],
    eta: f64,
) -> Result<FlatnessReport, ViscousError> {
    let rows = eps_sweep
        .iter()
        .map(|&eps| flatness_sample(p, &ProfileConfig::for_problem(p, eps), eta))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FlatnessReport::from_rows(p, eta, rows))
}
