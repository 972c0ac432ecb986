use dampwave_core::fv::{
    compare_with_exact, init_riemann, init_riemann_with, measure_shock, Formulation, FvGrid,
};
use dampwave_core::{ExactSolution, RiemannProblem};
use proptest::prelude::*;

/// Textbook Rusanov flux step for a scalar law `w_t + f(w)_x = 0` with
/// interface speeds `a`, outflow boundaries.
fn rusanov(w: &[f64], f: &dyn Fn(usize, f64) -> f64, a: &dyn Fn(usize) -> f64, r: f64) -> Vec<f64> {
    let n = w.len();
    let flux = |j: usize| -> f64 {
        // Interface j sits between cells j-1 and j; ghosts copy the end cells.
        let l = j.saturating_sub(1);
        let rr = j.min(n - 1);
        0.5 * (f(l, w[l]) + f(rr, w[rr])) - 0.5 * a(j) * (w[rr] - w[l])
    };
    (0..n).map(|i| w[i] - r * (flux(i + 1) - flux(i))).collect()
}

#[test]
fn one_step_matches_reference_scheme() {
    let p = RiemannProblem::new(1.5, 0.5, 2.0, -0.5, 3, 0.7).unwrap();
    let grid = FvGrid::new(-1.0, 1.0, 101).unwrap();
    let mut s = init_riemann(grid, &p);
    // Roughen the data so every interface is exercised.
    for i in 0..s.u_bar.len() {
        s.u_bar[i] += 0.1 * ((i as f64) * 0.37).sin();
        s.v_bar[i] += 0.2 * ((i as f64) * 0.11).cos().abs();
    }
    let (u0, v0) = (s.u_bar.clone(), s.v_bar.clone());
    let dt = s.stable_dt(0.5).unwrap();
    s.step_by(dt).unwrap();

    let k = 3;
    let n = u0.len();
    let r = dt / grid.dx;
    let speed = |u: f64| u.powi(k);
    let a_u = |j: usize| speed(u0[j.saturating_sub(1)].abs()).max(speed(u0[j.min(n - 1)].abs()));
    let u1 = rusanov(&u0, &|_, u| u.powi(k + 1) / (k as f64 + 1.0), &a_u, r);
    let a_v = |j: usize| speed(u1[j.saturating_sub(1)]).abs().max(speed(u1[j.min(n - 1)]).abs());
    let v1 = rusanov(&v0, &|i, v| v * speed(u1[i]), &a_v, r);
    let decay = (-0.7 * dt).exp();
    for i in 0..n {
        assert!((s.u_bar[i] - u1[i] * decay).abs() <= 1e-14, "u at {i}");
        assert!((s.v_bar[i] - v1[i].max(0.0)).abs() <= 1e-14, "v at {i}");
    }
}

#[test]
fn delta_run_conserves_and_accumulates_mass() {
    let p = RiemannProblem::new(1.0, 1.0, 2.0, 0.0, 1, 1.0).unwrap();
    let exact = ExactSolution::new(p);
    let mut s = init_riemann(FvGrid::new(-2.0, 2.0, 1000).unwrap(), &p);
    let mut masses = Vec::new();
    for t in [0.25, 0.5, 0.75, 1.0] {
        let traj = s.run_until(t, 0.5, &[t]).unwrap();
        assert!(traj[0].max_mass_drift <= 1e-12, "{traj:?}");
        assert!(traj[0].max_clamped_fraction <= 1e-10);
        masses.push(measure_shock(&s, &exact).unwrap().mass);
    }
    assert!(masses.windows(2).all(|w| w[0] <= w[1]), "{masses:?}");
    assert!(s.v_bar.iter().all(|&v| v >= 0.0));
}

/// `|x_n - x_{2n}|` for the measured shock position at `t = 1`.
fn position(n: usize) -> f64 {
    let p = RiemannProblem::new(1.0, 1.0, 2.0, 0.0, 1, 1.0).unwrap();
    let mut s = init_riemann(FvGrid::new(-2.0, 2.0, n).unwrap(), &p);
    s.run_until(1.0, 0.5, &[]).unwrap();
    measure_shock(&s, &ExactSolution::new(p)).unwrap().position
}

#[test]
fn shock_position_self_converges() {
    let x: Vec<f64> = [500, 1000, 2000].iter().map(|&n| position(n)).collect();
    let ratio = (x[0] - x[1]).abs() / (x[1] - x[2]).abs();
    assert!(ratio >= 1.5, "{x:?} ratio {ratio}");
}

#[test]
fn transformed_formulation_agrees_with_direct() {
    let p = RiemannProblem::new(1.0, 1.0, 0.0, 1.0, 1, 1.0).unwrap();
    let run = |n: usize, f: Formulation| {
        let g = FvGrid::new(-2.0, 2.0, n).unwrap();
        let mut s = init_riemann_with(g, &p, f);
        s.run_until(1.0, 0.5, &[]).unwrap();
        (s.physical_u(), g.dx)
    };
    let (direct, dx) = run(1000, Formulation::Direct);
    let (transformed, _) = run(1000, Formulation::Transformed);
    let (fine, _) = run(2000, Formulation::Direct);
    let l1 = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs() * dx).sum::<f64>();
    let restricted: Vec<f64> = fine.chunks_exact(2).map(|c| 0.5 * (c[0] + c[1])).collect();
    let self_error = l1(&direct, &restricted);
    let gap = l1(&direct, &transformed);
    assert!(gap <= 2.0 * self_error, "gap {gap} vs self-convergence {self_error}");
}

#[test]
fn undamped_fan_matches_homogeneous_solution() {
    let p = RiemannProblem::new(1.0, 1.0, 0.0, 1.0, 1, 0.0).unwrap();
    let exact = ExactSolution::new(p);
    let errs: Vec<f64> = [500, 1000]
        .iter()
        .map(|&n| {
            let mut s = init_riemann(FvGrid::new(-2.0, 2.0, n).unwrap(), &p);
            s.run_until(1.0, 0.5, &[]).unwrap();
            compare_with_exact(&s, &exact).l1_u
        })
        .collect();
    assert!(errs[1] < errs[0] && errs[1] < 5e-3 * 4.0, "{errs:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn constant_state_decays_exactly(c in -2.0f64..2.0, v in 0.1f64..3.0, alpha in 0.0f64..2.0, k in 1u32..4) {
        let c = if k % 2 == 0 { c.abs() } else { c };
        let p = RiemannProblem::new(v, v, c, c, k, alpha).unwrap();
        let mut s = init_riemann(FvGrid::new(-1.0, 1.0, 100).unwrap(), &p);
        s.run_until(0.5, 0.8, &[]).unwrap();
        let target = c * (-alpha * 0.5f64).exp();
        prop_assert!(s.u_bar.iter().all(|u| (u - target).abs() <= 1e-13 * (1.0 + c.abs())));
        prop_assert!(s.v_bar.iter().all(|&x| x == v));
    }

    #[test]
    fn velocity_stays_within_data_range(um in -2.0f64..2.0, up in -2.0f64..2.0, alpha in 0.0f64..2.0) {
        let p = RiemannProblem::new(1.0, 2.0, um, up, 1, alpha).unwrap();
        let mut s = init_riemann(FvGrid::new(-8.0, 8.0, 200).unwrap(), &p);
        let (lo, hi) = (um.min(up), um.max(up));
        for _ in 0..40 {
            let before = s.u_bar.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            s.step(0.9).unwrap();
            // Damping only shrinks |u|; the transport substep keeps the range.
            prop_assert!(s.u_bar.iter().all(|u| u.abs() <= before + 1e-14));
            if alpha == 0.0 {
                prop_assert!(s.u_bar.iter().all(|&u| u >= lo - 1e-14 && u <= hi + 1e-14));
            }
            prop_assert!(s.v_bar.iter().all(|&v| v >= 0.0));
        }
    }
}
