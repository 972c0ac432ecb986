use serde::{Deserialize, Serialize};

use super::{FvError, FvState};
use crate::exact::ExactSolution;
use crate::problem::WaveClassification;

/// Extraction window for [`measure_shock_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShockWindow {
    /// Lower bound on the half-width, in cells.
    pub min_cells: f64,
    /// Half-width as a fraction of the exact `|x(t)|`.
    pub fraction: f64,
    /// Centre-of-mass fixed-point iterations.
    pub iterations: usize,
    /// Detection threshold in units of `dx max(v±)`.
    pub min_mass_cells: f64,
}

impl Default for ShockWindow {
    fn default() -> Self {
        Self { min_cells: 10.0, fraction: 0.1, iterations: 2, min_mass_cells: 10.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockMeasurement {
    pub position: f64,
    pub mass: f64,
}

pub fn measure_shock(state: &FvState, exact: &ExactSolution) -> Result<ShockMeasurement, FvError> {
    measure_shock_with(state, exact, &ShockWindow::default())
}

/// Locates the concentrated `v`-mass as the centre of mass of `v - background`,
/// where the background is `v-` left and `v+` right of the current estimate.
/// Starts at the densest cell and re-centres `window.iterations` times.
pub fn measure_shock_with(
    state: &FvState,
    exact: &ExactSolution,
    window: &ShockWindow,
) -> Result<ShockMeasurement, FvError> {
    if exact.classification != WaveClassification::DeltaShock {
        return Err(FvError::NotDeltaShock);
    }
    let g = &state.grid;
    let p = &state.problem;
    let half = (window.min_cells * g.dx).max(window.fraction * exact.shock_position(state.t).abs());
    let excess_in = |center: f64| {
        let (mut m, mut mx) = (0.0, 0.0);
        for (i, &v) in state.v_bar.iter().enumerate() {
            let x = g.center(i);
            if (x - center).abs() > half {
                continue;
            }
            let bg = if x < center { p.v_minus } else { p.v_plus };
            m += (v - bg) * g.dx;
            mx += (v - bg) * g.dx * x;
        }
        (m, mx)
    };

    let argmax = state
        .v_bar
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map_or(0, |(i, _)| i);
    let mut position = g.center(argmax);
    let threshold = window.min_mass_cells * g.dx * p.v_minus.max(p.v_plus);
    for _ in 0..window.iterations {
        let (m, mx) = excess_in(position);
        if !(m >= threshold) {
            return Err(FvError::NoConcentration { mass: m, threshold });
        }
        position = mx / m;
    }
    let (mass, _) = excess_in(position);
    if !(mass >= threshold) {
        return Err(FvError::NoConcentration { mass, threshold });
    }
    Ok(ShockMeasurement { position, mass })
}

/// L1 errors against the exact solution at cell centres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorNorms {
    pub l1_u: f64,
    pub l1_v: f64,
    pub cells_used: usize,
}

/// L1 distance of the cell averages from the exact solution sampled at cell
/// centres, skipping the three cells nearest each wave. `v` is compared with
/// the regular part only.
pub fn compare_with_exact(state: &FvState, exact: &ExactSolution) -> ErrorNorms {
    let g = &state.grid;
    let n = g.n_cells;
    let mut skip = vec![false; n];
    for edge in exact.wave_positions(state.t) {
        let j = ((edge - g.x_min) / g.dx).floor();
        for d in -1..=1 {
            let c = j + d as f64;
            if c >= 0.0 && c < n as f64 {
                skip[c as usize] = true;
            }
        }
    }
    let u = state.physical_u();
    let (mut eu, mut ev, mut used) = (0.0, 0.0, 0);
    for i in 0..n {
        if skip[i] {
            continue;
        }
        let Ok(s) = exact.evaluate(g.center(i), state.t) else {
            // t = 0: compare with the initial data.
            let x = g.center(i);
            let p = &state.problem;
            let (v0, u0) = if x < 0.0 { (p.v_minus, p.u_minus) } else { (p.v_plus, p.u_plus) };
            eu += (u[i] - u0).abs() * g.dx;
            ev += (state.v_bar[i] - v0).abs() * g.dx;
            used += 1;
            continue;
        };
        eu += (u[i] - s.u).abs() * g.dx;
        ev += (state.v_bar[i] - s.v_regular).abs() * g.dx;
        used += 1;
    }
    ErrorNorms { l1_u: eu, l1_v: ev, cells_used: used }
}
