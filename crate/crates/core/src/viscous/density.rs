use super::bvp::node_derivative;
use super::{find_singular_points, interp, SimilarityProfile, ViscousError};
use crate::problem::{classify, pow_k, RiemannProblem, WaveClassification};

/// Sub-intervals used in the cells next to a singular point.
const LOCAL_REFINEMENT: usize = 4;

/// Fills `v_hat` from the explicit quadratures
///
/// ```text
///     v1(xi) = v- exp(-int_{-R}^{xi} (u^k)' / (u^k - s) ds)    left of the first root
///     v2(xi) = v+ exp( int_{xi}^{R}  (u^k)' / (u^k - s) ds)    right of the last root
/// ```
///
/// with `v = 0` between the two roots of an increasing profile. Integration
/// is composite trapezoid on the solver grid, refined in the last cell before
/// each singular point. Nodes closer than one cell to a root are marked
/// invalid.
pub fn compute_v_profile(
    mut profile: SimilarityProfile,
    p: &RiemannProblem,
) -> Result<SimilarityProfile, ViscousError> {
    if profile.singular_points.is_empty() {
        profile.singular_points = find_singular_points(&profile, p.k)?;
    }
    let xi = &profile.xi;
    let n = xi.len();
    let h = profile.cell_width();
    let left_root = profile.singular_points[0];
    let right_root = *profile.singular_points.last().unwrap();

    let uk: Vec<f64> = profile.u_hat.iter().map(|&u| pow_k(u, p.k)).collect();
    let duk = node_derivative(xi, &uk);
    let integrand = |x: f64| {
        let a = interp(xi, &uk, x) - x;
        interp(xi, &duk, x) / a
    };
    let cell_integral = |i: usize, refine: bool| -> f64 {
        let (a, b) = (xi[i], xi[i + 1]);
        if !refine {
            let qa = duk[i] / (uk[i] - a);
            let qb = duk[i + 1] / (uk[i + 1] - b);
            return 0.5 * (qa + qb) * (b - a);
        }
        let m = LOCAL_REFINEMENT;
        let dh = (b - a) / m as f64;
        let mut s = 0.5 * (integrand(a) + integrand(b));
        for j in 1..m {
            s += integrand(a + j as f64 * dh);
        }
        s * dh
    };

    // Distance in cells, snapped to an integer when within roundoff of one so
    // that mirror-image nodes are classified alike.
    let cells = |d: f64| {
        let c = d / h;
        if (c - c.round()).abs() < 1e-6 { c.round() } else { c }
    };
    let mut v = vec![0.0; n];
    let mut valid = vec![false; n];
    let left_ok = |x: f64| cells(left_root - x) >= 1.0;
    let right_ok = |x: f64| cells(x - right_root) >= 1.0;

    // Left branch, integrating from -R.
    let mut acc = 0.0;
    for i in 0..n {
        if !left_ok(xi[i]) {
            break;
        }
        if i > 0 {
            let near = cells(left_root - xi[i]) < 3.0;
            acc += cell_integral(i - 1, near);
        }
        let value = p.v_minus * (-acc).exp();
        if !value.is_finite() {
            return Err(ViscousError::QuadratureFailure(xi[i]));
        }
        v[i] = value;
        valid[i] = true;
    }
    // Right branch, integrating from +R.
    let mut acc = 0.0;
    for i in (0..n).rev() {
        if !right_ok(xi[i]) {
            break;
        }
        if i < n - 1 {
            let near = cells(xi[i] - right_root) < 3.0;
            acc += cell_integral(i, near);
        }
        let value = p.v_plus * acc.exp();
        if !value.is_finite() {
            return Err(ViscousError::QuadratureFailure(xi[i]));
        }
        v[i] = value;
        valid[i] = true;
    }

    let class = classify(p);
    let last_left = (0..n).rev().find(|&i| valid[i] && xi[i] < left_root);
    let first_right = (0..n).find(|&i| valid[i] && xi[i] > right_root);
    for i in 0..n {
        if valid[i] {
            continue;
        }
        let x = xi[i];
        let near_root = cells((x - left_root).abs()) < 1.0 || cells((x - right_root).abs()) < 1.0;
        match class {
            WaveClassification::RarefactionFan => {
                // Vacuum between the roots, and the zero one-sided limit next to them.
                v[i] = 0.0;
                valid[i] = !near_root;
            }
            _ => {
                // Divergent neighbourhood: cap at the nearest valid value on the same side.
                let source = if x < left_root { last_left } else { first_right };
                v[i] = source.map_or(0.0, |j| v[j]);
            }
        }
    }

    profile.divergence_observed = match class {
        WaveClassification::DeltaShock => Some(grows_toward_root(&v, last_left, first_right)),
        _ => None,
    };
    profile.v_hat = v;
    profile.v_valid = valid;
    Ok(profile)
}

fn grows_toward_root(v: &[f64], last_left: Option<usize>, first_right: Option<usize>) -> bool {
    let (Some(l), Some(r)) = (last_left, first_right) else {
        return false;
    };
    if l < 2 || r + 2 >= v.len() {
        return false;
    }
    v[l - 2] < v[l - 1] && v[l - 1] < v[l] && v[r] > v[r + 1] && v[r + 1] > v[r + 2]
}

/// Concentrated mass of `v - step` over `window`, from the exact integral
/// identity `(a v)' = -v` with `a = u^k - xi`:
///
/// ```text
///     int_{lo}^{hi} v = a(lo) v(lo) - a(hi) v(hi)
/// ```
///
/// minus the step `v-` left / `v+` right of the singular point. Tends to
/// `w0 = -sigma [v] + [v u^k]` as `eps -> 0`.
pub fn measure_delta_weight(
    profile: &SimilarityProfile,
    p: &RiemannProblem,
    window: (f64, f64),
) -> Result<f64, ViscousError> {
    if classify(p) != WaveClassification::DeltaShock {
        return Err(ViscousError::NotDeltaShock);
    }
    if !profile.has_density() || profile.singular_points.is_empty() {
        return Err(ViscousError::MissingDensity);
    }
    let (lo, hi) = window;
    let at = profile.singular_points[0];
    let h = profile.cell_width();
    let r = profile.radius();
    // Both window ends must sit between valid nodes.
    if !(lo >= -r && hi <= r && lo <= at - 2.0 * h && hi >= at + 2.0 * h) {
        return Err(ViscousError::WindowExcludesSingularity { lo, hi, at });
    }
    let a = |x: f64| pow_k(profile.u_at(x), p.k) - x;
    let v = |x: f64| interp(&profile.xi, &profile.v_hat, x);
    let integral = a(lo) * v(lo) - a(hi) * v(hi);
    let step = p.v_minus * (at - lo) + p.v_plus * (hi - at);
    Ok(integral - step)
}
