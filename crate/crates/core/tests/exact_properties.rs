mod common;

use dampwave_core::exact::{
    damped_clock, delta_weight_at, entropy_check, evaluate_exact, shock_position,
    shock_speed_sigma, similarity_xi, ExactSolution,
};
use dampwave_core::problem::{pow_k, real_root};
use dampwave_core::{delta_weight_w0, RiemannProblem, WaveClassification};
use proptest::prelude::*;

fn admissible() -> impl Strategy<Value = RiemannProblem> {
    (1u32..=7, 0.1f64..5.0, 0.1f64..5.0, -3.0f64..3.0, -3.0f64..3.0, 0.0f64..2.0).prop_map(
        |(k, vm, vp, um, up, alpha)| {
            let (um, up) = if k % 2 == 0 { (um.abs(), up.abs()) } else { (um, up) };
            RiemannProblem::new(vm, vp, um, up, k, alpha).unwrap()
        },
    )
}

fn delta() -> impl Strategy<Value = RiemannProblem> {
    admissible().prop_filter_map("needs u- != u+", |mut p| {
        if p.u_minus == p.u_plus {
            return None;
        }
        if p.u_minus < p.u_plus {
            std::mem::swap(&mut p.u_minus, &mut p.u_plus);
        }
        Some(p)
    })
}

fn fan() -> impl Strategy<Value = RiemannProblem> {
    delta().prop_map(|mut p| {
        std::mem::swap(&mut p.u_minus, &mut p.u_plus);
        p
    })
}

proptest! {
    #[test]
    fn rankine_hugoniot_identity(p in admissible()) {
        let k = p.k;
        let sigma = shock_speed_sigma(p.u_minus, p.u_plus, k);
        let f = |u: f64| pow_k(u, k + 1) / (k as f64 + 1.0);
        let scale = 1f64.max(pow_k(p.u_minus.abs().max(p.u_plus.abs()), k + 1));
        let defect = sigma * (p.u_minus - p.u_plus) - (f(p.u_minus) - f(p.u_plus));
        prop_assert!(defect.abs() <= 1e-12 * scale, "{defect}");
    }

    #[test]
    fn sigma_lies_strictly_between_speeds(p in delta()) {
        let sigma = shock_speed_sigma(p.u_minus, p.u_plus, p.k);
        prop_assert!(p.speed(p.u_plus) < sigma && sigma < p.speed(p.u_minus));
        let w0 = delta_weight_w0(&p, sigma).unwrap();
        prop_assert!(w0 > 0.0, "{w0}");
        let rep = entropy_check(&p, sigma, &[0.0, 0.5, 1.0, 10.0]).unwrap();
        prop_assert!(rep.all_characteristic);
    }

    #[test]
    fn fan_velocity_is_continuous(p in fan(), t in 0.05f64..5.0) {
        let sol = ExactSolution::new(p);
        let s = sol.clock(t);
        let decay = (-p.alpha * t).exp();
        for edge in [p.speed(p.u_minus), p.speed(p.u_plus)] {
            let x = edge * s;
            let d = 1e-9 * (1.0 + x.abs());
            let left = evaluate_exact(&p, x - d, t).unwrap().u;
            let right = evaluate_exact(&p, x + d, t).unwrap().u;
            // u^{1/k} is only Holder continuous: a step of d/S in xi moves it by (d/S)^{1/k}.
            let tol = 2.0 * (2.0 * d / s).powf(1.0 / p.k as f64) * decay + 1e-12;
            prop_assert!((left - right).abs() <= tol, "{left} vs {right} at {x}");
        }
    }

    #[test]
    fn delta_weight_is_nondecreasing(p in delta(), t1 in 0.0f64..10.0, dt in 0.0f64..10.0) {
        let sigma = shock_speed_sigma(p.u_minus, p.u_plus, p.k);
        let w0 = delta_weight_w0(&p, sigma).unwrap();
        prop_assert!(delta_weight_at(&p, w0, t1) <= delta_weight_at(&p, w0, t1 + dt));
    }

    #[test]
    fn undamped_solution_is_homogeneous(p in admissible(), x in -10.0f64..10.0, t in 0.01f64..5.0) {
        let p0 = RiemannProblem { alpha: 0.0, ..p };
        let got = evaluate_exact(&p0, x, t).unwrap();
        let sigma = shock_speed_sigma(p.u_minus, p.u_plus, p.k);
        let xi = x / t;
        let (v, u) = match p0.classify() {
            WaveClassification::RarefactionFan => {
                if xi < p.speed(p.u_minus) {
                    (p.v_minus, p.u_minus)
                } else if xi > p.speed(p.u_plus) {
                    (p.v_plus, p.u_plus)
                } else {
                    (0.0, real_root(xi, p.k))
                }
            }
            _ if x < sigma * t => (p.v_minus, p.u_minus),
            _ if x > sigma * t => (p.v_plus, p.u_plus),
            _ => return Ok(()),
        };
        prop_assert_eq!(got.v_regular, v);
        prop_assert!((got.u - u).abs() <= 1e-12 * (1.0 + u.abs()));
    }

    #[test]
    fn similarity_variable_inverts_clock(x in -5.0f64..5.0, t in 0.01f64..5.0, alpha in 0.0f64..3.0, k in 1u32..5) {
        let xi = similarity_xi(x, t, alpha, k).unwrap();
        let back = xi * damped_clock(alpha * k as f64, t);
        prop_assert!((back - x).abs() <= 1e-12 * (1.0 + x.abs()));
    }
}

/// Fourth-order Runge-Kutta for `y' = f(t)` from 0 to `t_end`.
fn rk4(f: impl Fn(f64) -> f64, t_end: f64, steps: usize) -> f64 {
    let h = t_end / steps as f64;
    let mut y = 0.0;
    for i in 0..steps {
        let t = i as f64 * h;
        let (k1, k2, k4) = (f(t), f(t + 0.5 * h), f(t + h));
        y += h / 6.0 * (k1 + 4.0 * k2 + k4);
    }
    y
}

#[test]
fn position_and_weight_match_integrated_odes() {
    let p = RiemannProblem::new(1.0, 1.0, 2.0, 0.0, 1, 1.0).unwrap();
    let x = rk4(|t| (-t).exp(), 1.0, 10_000);
    assert!((shock_position(&p, 1.0, 1.0) - x).abs() < 1e-12);
    assert!((x - 0.63212).abs() < 1e-5);
    let w = rk4(|t| 2.0 * (-t).exp(), 30.0, 100_000);
    assert!((delta_weight_at(&p, 2.0, 30.0) - w).abs() < 1e-10);
    assert!((w - 2.0).abs() < 1e-10);
}

#[test]
fn position_approaches_undamped_limit_linearly_in_alpha() {
    // x(t) - sigma t = -sigma alpha k t^2 / 2 + O(alpha^2): fit C over a decade sweep.
    let sigma = 1.0;
    let ratios: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&alpha| {
            let p = RiemannProblem::new(1.0, 1.0, 2.0, 0.0, 1, alpha).unwrap();
            (0..=100)
                .map(|i| {
                    let t = i as f64 / 100.0;
                    if t == 0.0 {
                        0.0
                    } else {
                        (shock_position(&p, sigma, t) - sigma * t).abs() / (alpha * t * t)
                    }
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let c = ratios.iter().cloned().fold(0.0, f64::max);
    assert!(c <= 0.5 + 1e-6, "{ratios:?}");
    assert!(ratios.iter().all(|r| (r - 0.5).abs() < 0.05), "{ratios:?}");
}

#[test]
fn rejects_invalid_data() {
    assert!(RiemannProblem::new(0.0, 1.0, 1.0, 0.0, 1, 1.0).is_err());
    let err = RiemannProblem::new(1.0, 1.0, -1.0, 0.0, 2, 1.0).unwrap_err();
    assert!(err.to_string().contains("even k requires nonnegative states"));
    assert!(RiemannProblem::new(1.0, 1.0, 1.0, 0.0, 0, 1.0).is_err());
    assert!(RiemannProblem::new(1.0, 1.0, 1.0, 0.0, 1, -1.0).is_err());
}
