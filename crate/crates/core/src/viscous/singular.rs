use super::{SimilarityProfile, ViscousError};
use crate::problem::pow_k;

const MAX_BISECTION: usize = 200;

/// Roots of `g(xi) = u(xi)^k - xi` on the piecewise-linear profile.
///
/// Every sign change between adjacent nodes is refined by bisection until
/// `|g| <= 1e-12 (1 + R)`. Decreasing profiles (`u- > u+`) must have exactly
/// one root; increasing ones return `[min, max]` of the root set.
pub fn find_singular_points(
    profile: &SimilarityProfile,
    k: u32,
) -> Result<Vec<f64>, ViscousError> {
    let xi = &profile.xi;
    let n = xi.len();
    let tol = 1e-12 * (1.0 + profile.radius());
    let g = |x: f64| pow_k(profile.u_at(x), k) - x;
    let g_nodes: Vec<f64> = (0..n).map(|i| pow_k(profile.u_hat[i], k) - xi[i]).collect();

    let mut roots: Vec<f64> = Vec::new();
    for i in 0..n - 1 {
        let (ga, gb) = (g_nodes[i], g_nodes[i + 1]);
        if ga == 0.0 {
            push_root(&mut roots, xi[i]);
            continue;
        }
        if gb == 0.0 || ga.signum() == gb.signum() {
            continue;
        }
        let (mut a, mut b, mut g_a) = (xi[i], xi[i + 1], ga);
        let mut mid = 0.5 * (a + b);
        for _ in 0..MAX_BISECTION {
            mid = 0.5 * (a + b);
            let gm = g(mid);
            if gm.abs() <= tol || mid <= a || mid >= b {
                break;
            }
            if gm.signum() == g_a.signum() {
                a = mid;
                g_a = gm;
            } else {
                b = mid;
            }
        }
        push_root(&mut roots, mid);
    }
    if g_nodes[n - 1] == 0.0 {
        push_root(&mut roots, xi[n - 1]);
    }

    if roots.is_empty() {
        return Err(ViscousError::NoRoot);
    }
    let first = profile.u_hat[0];
    let last = profile.u_hat[n - 1];
    if first > last {
        if roots.len() != 1 {
            return Err(ViscousError::UnexpectedRoots(roots.len()));
        }
        Ok(roots)
    } else if first < last {
        let lo = roots[0];
        let hi = *roots.last().unwrap();
        Ok(vec![lo, hi])
    } else {
        // Constant profile: g is strictly decreasing, so the root is unique.
        Ok(vec![roots[0]])
    }
}

fn push_root(roots: &mut Vec<f64>, x: f64) {
    if roots.last().map_or(true, |&r| r < x) {
        roots.push(x);
    }
}
