use rayon::prelude::*;

use dampwave_core::exact::{entropy_check, ExactSolution};
use dampwave_core::fv::{compare_with_exact, init_riemann, measure_shock_with, FvGrid, FvState};
use dampwave_core::problem::pow_k;
use dampwave_core::viscous::{
    compute_v_profile, flatness_of, measure_delta_weight, solve_u_profile, validate_profile, FlatnessReport,
    FlatnessRow, SimilarityProfile, DECAY_FLOOR,
};
use dampwave_core::{RiemannProblem, WaveClassification};

use crate::config::{ExperimentConfig, Mode};
use crate::error::HarnessError;
use crate::report::{Cell, ExperimentReport};

/// Sweep parallelism cap; unset means serial.
pub const THREADS_ENV: &str = "DAMPWAVE_THREADS";

/// RK4 steps per unit time for the exact-mode ODE integration.
const RK4_STEPS_PER_UNIT: f64 = 2000.0;
/// Time samples per unit time for the limit-alpha sup over `[0, t_end]`.
const ALPHA_T_SAMPLES: usize = 1000;

/// Acceptance thresholds used for report flags.
pub mod thresholds {
    pub const SHOCK_MASS_REL: f64 = 0.05;
    pub const SHOCK_POSITION_DX: f64 = 2.0;
    pub const SHOCK_POSITION_ABS: f64 = 0.02;
    pub const MASS_DRIFT: f64 = 1e-12;
    pub const CLAMPED_FRACTION: f64 = 1e-10;
    pub const SINGULAR_POINT: f64 = 0.05;
    pub const WEIGHT_REL: f64 = 0.05;
    pub const SELF_ORDER: f64 = 0.8;
    pub const FAN_L1_PER_WIDTH: f64 = 5e-3;
    pub const ALPHA_DECADE_RATIO: f64 = 8.0;
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    cfg.validate()?;
    sweep_threads()?;
    let mut report = match cfg.mode {
        Mode::Exact => run_exact(cfg),
        Mode::Profile => run_profile(cfg),
        Mode::Simulate => run_simulate(cfg),
        Mode::ConvergenceEps => run_convergence_eps(cfg),
        Mode::ConvergenceDx => run_convergence_dx(cfg),
        Mode::LimitAlpha => run_limit_alpha(cfg),
    }?;
    let p = &cfg.problem;
    report.meta("problem", format!(
        "v-={} v+={} u-={} u+={} k={} alpha={}",
        p.v_minus, p.v_plus, p.u_minus, p.u_plus, p.k, p.alpha
    ));
    report.meta("classification", format!("{:?}", p.classify()));
    report.check_complete()?;
    Ok(report)
}

fn sweep_threads() -> Result<Option<usize>, HarnessError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(HarnessError::Validation(format!("{THREADS_ENV} must be a positive integer, got {s:?}"))),
        },
    }
}

/// Runs one job per sweep value and returns the results in sweep order.
fn map_sweep<T, F>(values: &[f64], job: F) -> Result<Vec<T>, HarnessError>
where
    T: Send,
    F: Fn(f64) -> Result<T, HarnessError> + Sync,
{
    match sweep_threads()? {
        Some(n) if n > 1 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| HarnessError::Validation(format!("thread pool: {e}")))?;
            pool.install(|| values.par_iter().map(|&v| job(v)).collect())
        }
        _ => values.iter().map(|&v| job(v)).collect(),
    }
}

const TRAJECTORY_COLUMNS: [&str; 8] =
    ["t", "x_shock_measured", "x_shock_exact", "mass_measured", "mass_exact", "err_x", "err_mass", "entropy_ok"];

fn trajectory_report(mode: Mode) -> ExperimentReport {
    ExperimentReport::new(mode, &TRAJECTORY_COLUMNS)
        .with_error("x_shock_measured", "x_shock_exact", "err_x")
        .with_error("mass_measured", "mass_exact", "err_mass")
}

fn trajectory_row(t: f64, x: (f64, f64), mass: (f64, f64), entropy_ok: bool) -> Vec<Cell> {
    vec![
        t.into(),
        x.0.into(),
        x.1.into(),
        mass.0.into(),
        mass.1.into(),
        (x.0 - x.1).abs().into(),
        (mass.0 - mass.1).abs().into(),
        entropy_ok.into(),
    ]
}

/// Whether the entropy inequalities hold at `t`. Vacuously true without a
/// delta shock.
fn entropy_at(exact: &ExactSolution, t: f64) -> Result<bool, HarnessError> {
    if exact.classification != WaveClassification::DeltaShock {
        return Ok(true);
    }
    let rep = entropy_check(&exact.problem, exact.sigma, &[t])?;
    Ok(rep.all_characteristic)
}

/// Integrates `x' = sigma e^{-alpha k t}`, `w' = w0 e^{-alpha k t}` from zero
/// with classical RK4.
fn integrate_shock(exact: &ExactSolution, t: f64) -> (f64, f64) {
    let ak = exact.problem.alpha_k();
    let steps = ((t * RK4_STEPS_PER_UNIT).ceil() as usize).max(100);
    let h = t / steps as f64;
    let rate = |s: f64| (-ak * s).exp();
    let mut clock = 0.0;
    for i in 0..steps {
        let s = i as f64 * h;
        let (k1, k2, k4) = (rate(s), rate(s + 0.5 * h), rate(s + h));
        clock += h / 6.0 * (k1 + 4.0 * k2 + k4);
    }
    (exact.sigma * clock, exact.w0 * clock)
}

fn run_exact(cfg: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    let exact = ExactSolution::new(cfg.problem);
    let mut report = trajectory_report(Mode::Exact);
    let ts = cfg.sample_times();
    let mut all_ok = true;
    let (mut min_lower, mut min_upper) = (f64::INFINITY, f64::INFINITY);
    for &t in &ts {
        let (x, w) = integrate_shock(&exact, t);
        let ok = entropy_at(&exact, t)?;
        all_ok &= ok;
        if exact.classification == WaveClassification::DeltaShock {
            let s = entropy_check(&exact.problem, exact.sigma, &[t])?.samples[0];
            min_lower = min_lower.min(s.characteristic.lower_margin);
            min_upper = min_upper.min(s.characteristic.upper_margin);
        }
        report.push_row(trajectory_row(t, (x, exact.shock_position(t)), (w, exact.delta_weight(t)), ok));
    }
    report.meta("sigma", exact.sigma);
    report.meta("w0", exact.w0);
    report.meta("rk4_steps_per_unit_time", RK4_STEPS_PER_UNIT);
    if min_lower.is_finite() {
        report.meta("min_entropy_lower_margin", min_lower);
        report.meta("min_entropy_upper_margin", min_upper);
    }
    report.flag("entropy_ok", all_ok);
    Ok(report)
}

/// Measured shock position and mass at the current time. Without a delta
/// shock the position is reported at its target and the mass is the signed
/// excess of `v` over the regular exact part.
fn measure(state: &FvState, exact: &ExactSolution, cfg: &ExperimentConfig) -> Result<(f64, f64), HarnessError> {
    if exact.classification == WaveClassification::DeltaShock {
        let m = measure_shock_with(state, exact, &cfg.shock_window())?;
        return Ok((m.position, m.mass));
    }
    let g = &state.grid;
    let mut excess = 0.0;
    for (i, &v) in state.v_bar.iter().enumerate() {
        excess += (v - exact.evaluate(g.center(i), state.t)?.v_regular) * g.dx;
    }
    Ok((exact.shock_position(state.t), excess))
}

fn run_simulate(cfg: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    let exact = ExactSolution::new(cfg.problem);
    let grid = cfg.grid()?;
    let cfl = cfg.cfl();
    let mut state = init_riemann(grid, &cfg.problem);
    let mut report = trajectory_report(Mode::Simulate);
    let (mut drift, mut clamp) = (0.0f64, 0.0f64);
    let (mut mass_ok, mut pos_ok, mut entropy_ok) = (true, true, true);
    let pos_tol = (thresholds::SHOCK_POSITION_DX * grid.dx).max(thresholds::SHOCK_POSITION_ABS);
    for t in cfg.sample_times() {
        for s in state.run_until(t, cfl, &[t])? {
            drift = drift.max(s.max_mass_drift);
            clamp = clamp.max(s.max_clamped_fraction);
        }
        let (x, m) = measure(&state, &exact, cfg)?;
        let (x_exact, m_exact) = (exact.shock_position(t), exact.delta_weight(t));
        let ok = entropy_at(&exact, t)?;
        entropy_ok &= ok;
        pos_ok &= (x - x_exact).abs() <= pos_tol;
        if m_exact > 0.0 {
            mass_ok &= (m - m_exact).abs() <= thresholds::SHOCK_MASS_REL * m_exact;
        }
        report.push_row(trajectory_row(t, (x, x_exact), (m, m_exact), ok));
    }
    let norms = compare_with_exact(&state, &exact);
    report.meta("n_cells", grid.n_cells);
    report.meta("dx", grid.dx);
    report.meta("cfl", cfl);
    report.meta("max_mass_drift", drift);
    report.meta("max_clamped_fraction", clamp);
    report.meta("final_l1_u", norms.l1_u);
    report.meta("final_l1_v", norms.l1_v);
    report.meta("position_tolerance", pos_tol);
    report.flag("entropy_ok", entropy_ok);
    report.flag("shock_position_ok", pos_ok);
    report.flag("shock_mass_ok", mass_ok);
    report.flag("mass_drift_ok", drift <= thresholds::MASS_DRIFT);
    report.flag("clamped_mass_ok", clamp <= thresholds::CLAMPED_FRACTION);
    Ok(report)
}

fn solve_profile(cfg: &ExperimentConfig, eps: f64) -> Result<SimilarityProfile, HarnessError> {
    let p = &cfg.problem;
    let spec = cfg.profile_cfg.as_ref().expect("validated");
    let pc = spec.resolve(p, eps);
    Ok(compute_v_profile(solve_u_profile(p, &pc)?, p)?)
}

/// Integration window around the singular point for the weight measurement.
fn weight_window(profile: &SimilarityProfile) -> (f64, f64) {
    let at = profile.singular_points[0];
    let half = 1.0f64.min(0.5 * profile.radius());
    (at - half, at + half)
}

/// Limit positions of the singular points: `sigma` for a delta shock, the
/// fan edges otherwise.
fn singular_targets(p: &RiemannProblem, exact: &ExactSolution) -> (f64, f64) {
    match exact.classification {
        WaveClassification::RarefactionFan => (pow_k(p.u_minus, p.k), pow_k(p.u_plus, p.k)),
        _ => (exact.sigma, exact.sigma),
    }
}

fn opt(x: Option<f64>) -> Cell {
    x.map_or(Cell::Text(String::new()), Cell::Float)
}

fn run_profile(cfg: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    let p = &cfg.problem;
    let spec = cfg.profile_cfg.as_ref().expect("validated");
    let pc = spec.resolve(p, spec.epsilon);
    let u_profile = solve_u_profile(p, &pc)?;
    let diag = validate_profile(&u_profile, p, &pc);
    let profile = compute_v_profile(u_profile, p)?;
    let exact = ExactSolution::new(*p);

    let mut report = ExperimentReport::new(Mode::Profile, &["xi", "u_hat", "v_hat", "v_valid"]);
    for i in 0..profile.n_nodes() {
        report.push_row(vec![
            profile.xi[i].into(),
            profile.u_hat[i].into(),
            profile.v_hat[i].into(),
            profile.v_valid[i].into(),
        ]);
    }
    report.meta("epsilon", pc.epsilon);
    report.meta("domain_radius", pc.domain_radius);
    report.meta("n_cells", pc.n_cells);
    report.meta("newton_tol", pc.newton_tol);
    report.meta("residual", profile.residual);
    report.meta("tail_bound", profile.tail_bound);
    let points: Vec<String> = profile.singular_points.iter().map(|x| crate::report::format_float(*x)).collect();
    report.meta("singular_points", points.join(" "));
    for (name, check) in [
        ("monotone", &diag.monotone),
        ("derivative_bound", &diag.derivative_bound),
        ("uniqueness", &diag.uniqueness),
    ] {
        report.meta(&format!("{name}_worst"), check.worst.min(f64::MAX));
        report.meta(&format!("{name}_detail"), check.detail.clone());
        report.flag(name, check.passed);
    }
    if exact.classification == WaveClassification::DeltaShock {
        let w = measure_delta_weight(&profile, p, weight_window(&profile))?;
        report.meta("weight_measured", w);
        report.meta("weight_exact", exact.w0);
        report.meta("weight_error", (w - exact.w0).abs());
        report.flag("weight_ok", (w - exact.w0).abs() <= thresholds::WEIGHT_REL * exact.w0.abs());
    }
    let row = flatness_of(&profile, p, spec.eta);
    report.meta("eta", spec.eta);
    for (name, v) in [
        ("sup_u_left", row.sup_u_left),
        ("sup_u_right", row.sup_u_right),
        ("sup_du", row.sup_du),
        ("sup_v", row.sup_v),
        ("sup_fan_residual", row.sup_fan_residual),
    ] {
        if let Some(v) = v {
            report.meta(name, v);
        }
    }
    Ok(report)
}

struct EpsJob {
    n_cells: usize,
    flat: FlatnessRow,
    weight: Option<f64>,
}

/// Each value below its predecessor, or both under the floor.
fn decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0] || (w[0] <= DECAY_FLOOR && w[1] <= DECAY_FLOOR))
}

fn run_convergence_eps(cfg: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    let p = cfg.problem;
    let exact = ExactSolution::new(p);
    let delta = exact.classification == WaveClassification::DeltaShock;
    let spec = cfg.profile_cfg.as_ref().expect("validated");
    let eta = spec.eta;
    let mut sweep = cfg.sweep.clone().expect("validated");
    sweep.sort_by(|a, b| b.total_cmp(a));

    let jobs = map_sweep(&sweep, |eps| {
        let profile = solve_profile(cfg, eps)?;
        if profile.singular_points.is_empty() {
            return Err(HarnessError::Data(format!("no singular point at eps = {eps}")));
        }
        let weight = if delta {
            Some(measure_delta_weight(&profile, &p, weight_window(&profile))?)
        } else {
            None
        };
        Ok(EpsJob { n_cells: profile.n_nodes() - 1, flat: flatness_of(&profile, &p, eta), weight })
    })?;

    let mut columns = vec![
        "epsilon",
        "n_cells",
        "singular_lo",
        "target_lo",
        "err_lo",
        "singular_hi",
        "target_hi",
        "err_hi",
    ];
    if delta {
        columns.extend(["weight_measured", "weight_exact", "err_weight"]);
    }
    columns.extend(["sup_u_left", "sup_u_right", "sup_du", "sup_v", "sup_fan_residual"]);
    let mut report = ExperimentReport::new(Mode::ConvergenceEps, &columns)
        .with_error("singular_lo", "target_lo", "err_lo")
        .with_error("singular_hi", "target_hi", "err_hi");
    if delta {
        report = report.with_error("weight_measured", "weight_exact", "err_weight");
    }

    let (t_lo, t_hi) = singular_targets(&p, &exact);
    let (mut err_lo, mut err_hi, mut err_w) = (Vec::new(), Vec::new(), Vec::new());
    for (eps, job) in sweep.iter().zip(&jobs) {
        let pts = &job.flat.singular_points;
        let (lo, hi) = (pts[0], pts[pts.len() - 1]);
        err_lo.push((lo - t_lo).abs());
        err_hi.push((hi - t_hi).abs());
        let mut row: Vec<Cell> = vec![
            (*eps).into(),
            job.n_cells.into(),
            lo.into(),
            t_lo.into(),
            (lo - t_lo).abs().into(),
            hi.into(),
            t_hi.into(),
            (hi - t_hi).abs().into(),
        ];
        if let Some(w) = job.weight {
            err_w.push((w - exact.w0).abs());
            row.extend([w.into(), exact.w0.into(), (w - exact.w0).abs().into()]);
        }
        let f = &job.flat;
        row.extend([opt(f.sup_u_left), opt(f.sup_u_right), opt(f.sup_du), opt(f.sup_v), opt(f.sup_fan_residual)]);
        report.push_row(row);
    }

    let flat = FlatnessReport::from_rows(&p, eta, jobs.into_iter().map(|j| j.flat).collect());
    report.meta("eta", eta);
    if !flat.empty_regions.is_empty() {
        report.meta("empty_regions", flat.empty_regions.join("; "));
    }
    let last = |v: &[f64]| *v.last().expect("nonempty sweep");
    report.flag("singular_errors_decreasing", decreasing(&err_lo) && decreasing(&err_hi));
    report.flag(
        "final_singular_ok",
        last(&err_lo) <= thresholds::SINGULAR_POINT && last(&err_hi) <= thresholds::SINGULAR_POINT,
    );
    if delta {
        report.flag("weight_errors_decreasing", decreasing(&err_w));
        report.flag("final_weight_ok", last(&err_w) <= thresholds::WEIGHT_REL * exact.w0.abs());
    }
    report.flag("decreasing_u_left", flat.decreasing_u_left);
    report.flag("decreasing_u_right", flat.decreasing_u_right);
    report.flag("decreasing_du", flat.decreasing_du);
    report.flag("decreasing_v", flat.decreasing_v);
    if let Some(f) = flat.decreasing_fan_residual {
        report.flag("decreasing_fan_residual", f);
    }
    report.flag("flatness_ok", flat.all_decreasing());
    Ok(report)
}

struct DxJob {
    dx: f64,
    u: Vec<f64>,
    l1_u: f64,
    l1_v: f64,
    x: (f64, f64),
    mass: (f64, f64),
}

/// Pairwise averages of a field on a grid twice as fine.
fn restrict(fine: &[f64]) -> Vec<f64> {
    fine.chunks_exact(2).map(|c| 0.5 * (c[0] + c[1])).collect()
}

fn run_convergence_dx(cfg: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    let p = cfg.problem;
    let exact = ExactSolution::new(p);
    let base = cfg.grid()?;
    let t_end = cfg.t_end();
    let cfl = cfg.cfl();
    let mut sweep = cfg.sweep.clone().expect("validated");
    sweep.sort_by(f64::total_cmp);

    let jobs = map_sweep(&sweep, |n| {
        let grid = FvGrid::new(base.x_min, base.x_max, n as usize)?;
        let mut state = init_riemann(grid, &p);
        state.run_until(t_end, cfl, &[])?;
        let norms = compare_with_exact(&state, &exact);
        let (x, m) = measure(&state, &exact, cfg)?;
        Ok(DxJob {
            dx: grid.dx,
            u: state.physical_u(),
            l1_u: norms.l1_u,
            l1_v: norms.l1_v,
            x: (x, exact.shock_position(t_end)),
            mass: (m, exact.delta_weight(t_end)),
        })
    })?;

    // Self-differences between consecutive grids with a 2:1 ratio.
    let self_diff: Vec<Option<f64>> = jobs
        .windows(2)
        .map(|w| {
            (w[1].u.len() == 2 * w[0].u.len()).then(|| {
                restrict(&w[1].u).iter().zip(&w[0].u).map(|(a, b)| (a - b).abs() * w[0].dx).sum()
            })
        })
        .collect();
    let self_order: Vec<Option<f64>> = self_diff
        .windows(2)
        .map(|d| match (d[0], d[1]) {
            (Some(a), Some(b)) if a > 0.0 && b > 0.0 => Some((a / b).log2()),
            _ => None,
        })
        .collect();

    let mut report = ExperimentReport::new(
        Mode::ConvergenceDx,
        &[
            "n_cells",
            "dx",
            "l1_u_exact",
            "l1_v_exact",
            "order_u_exact",
            "self_diff_u",
            "order_u_self",
            "x_shock_measured",
            "x_shock_exact",
            "err_x",
            "mass_measured",
            "mass_exact",
            "err_mass",
        ],
    )
    .with_error("x_shock_measured", "x_shock_exact", "err_x")
    .with_error("mass_measured", "mass_exact", "err_mass");
    for (i, (n, job)) in sweep.iter().zip(&jobs).enumerate() {
        let order_exact = (i > 0)
            .then(|| (jobs[i - 1].l1_u / job.l1_u).ln() / (jobs[i - 1].dx / job.dx).ln())
            .filter(|o| o.is_finite());
        report.push_row(vec![
            Cell::Int(*n as i64),
            job.dx.into(),
            job.l1_u.into(),
            job.l1_v.into(),
            opt(order_exact),
            opt(self_diff.get(i).copied().flatten()),
            opt(self_order.get(i).copied().flatten()),
            job.x.0.into(),
            job.x.1.into(),
            (job.x.0 - job.x.1).abs().into(),
            job.mass.0.into(),
            job.mass.1.into(),
            (job.mass.0 - job.mass.1).abs().into(),
        ]);
    }
    report.meta("t_end", t_end);
    report.meta("cfl", cfl);
    report.meta("x_min", base.x_min);
    report.meta("x_max", base.x_max);
    let orders: Vec<f64> = self_order.iter().flatten().copied().collect();
    if !orders.is_empty() {
        report.flag("self_order_ok", orders.iter().all(|&o| o >= thresholds::SELF_ORDER));
    }
    let finest = jobs.last().expect("nonempty sweep");
    report.flag("finest_l1_u_ok", finest.l1_u < thresholds::FAN_L1_PER_WIDTH * base.width());
    Ok(report)
}

fn run_limit_alpha(cfg: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    let base = cfg.problem;
    let t_end = cfg.t_end();
    let mut sweep = cfg.sweep.clone().expect("validated");
    sweep.sort_by(|a, b| b.total_cmp(a));

    let undamped = ExactSolution::new(RiemannProblem { alpha: 0.0, ..base });
    let n_t = ((ALPHA_T_SAMPLES as f64 * t_end).ceil() as usize).max(10);
    let gaps = map_sweep(&sweep, |alpha| {
        let damped = ExactSolution::new(RiemannProblem { alpha, ..base });
        let mut worst = (0.0, 0.0f64, 0.0f64, -1.0f64);
        for i in 0..=n_t {
            let t = t_end * i as f64 / n_t as f64;
            let (x, x0) = (damped.shock_position(t), undamped.shock_position(t));
            if (x - x0).abs() > worst.3 {
                worst = (t, x, x0, (x - x0).abs());
            }
        }
        Ok(worst)
    })?;

    let mut report = ExperimentReport::new(
        Mode::LimitAlpha,
        &["alpha", "t_at_max", "x_damped", "x_undamped", "gap", "gap_ratio", "gap_over_alpha_t2"],
    )
    .with_error("x_damped", "x_undamped", "gap");
    let mut decay_ok = true;
    for (i, (&alpha, &(t, x, x0, gap))) in sweep.iter().zip(&gaps).enumerate() {
        let ratio = (i > 0).then(|| gaps[i - 1].3 / gap).filter(|r| r.is_finite());
        if let Some(r) = ratio {
            let decades = (sweep[i - 1] / alpha).log10();
            decay_ok &= r >= thresholds::ALPHA_DECADE_RATIO.powf(decades);
        }
        let c = (t > 0.0).then(|| gap / (alpha * t * t));
        report.push_row(vec![alpha.into(), t.into(), x.into(), x0.into(), gap.into(), opt(ratio), opt(c)]);
    }
    report.meta("t_end", t_end);
    report.meta("sigma", undamped.sigma);
    report.meta("t_samples", n_t + 1);
    report.flag("gap_decay_ok", decay_ok);
    Ok(report)
}
