use std::path::PathBuf;

use clap::ValueEnum;
use dampwave_core::exact::ExactSolution;
use dampwave_core::fv::{FvGrid, ShockWindow, MAX_CFL};
use dampwave_core::viscous::ProfileConfig;
use dampwave_core::RiemannProblem;
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Exact,
    Profile,
    Simulate,
    ConvergenceEps,
    ConvergenceDx,
    LimitAlpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Viscous profile settings; unset fields take the defaults for the problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_cells: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub continuation_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub newton_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub newton_max_iter: Option<usize>,
    /// Distance from the limit wave positions for the flatness sups.
    #[serde(default = "default_eta")]
    pub eta: f64,
}

fn default_eta() -> f64 {
    0.25
}

impl ProfileSpec {
    /// Concrete configuration at viscosity `epsilon`.
    pub fn resolve(&self, p: &RiemannProblem, epsilon: f64) -> ProfileConfig {
        let mut cfg = ProfileConfig::for_problem(p, epsilon);
        if let Some(r) = self.domain_radius {
            cfg.domain_radius = r;
            cfg.n_cells = ProfileConfig::min_cells(r, epsilon).max(256);
        }
        if let Some(n) = self.n_cells {
            cfg.n_cells = n;
        }
        if let Some(s) = self.continuation_steps {
            cfg.continuation_steps = s;
        }
        if let Some(t) = self.newton_tol {
            cfg.newton_tol = t;
        }
        if let Some(m) = self.newton_max_iter {
            cfg.newton_max_iter = m;
        }
        cfg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FvSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub t_end: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_times: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shock_window: Option<ShockWindow>,
}

fn default_cfl() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub problem: RiemannProblem,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile_cfg: Option<ProfileSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fv: Option<FvSpec>,
    /// Viscosities, cell counts or damping rates, depending on the mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub output_format: OutputFormat,
}

/// Default end time when none is configured.
const DEFAULT_T_END: f64 = 1.0;

impl ExperimentConfig {
    pub fn t_end(&self) -> f64 {
        self.fv.as_ref().map_or(DEFAULT_T_END, |f| f.t_end)
    }

    /// Configured sample times, or `{0.1, 0.2, 0.5, 1, 2, 5} / (alpha k)`
    /// clipped to `t_end` (unscaled when `alpha = 0`). `t_end` itself is
    /// always included.
    pub fn sample_times(&self) -> Vec<f64> {
        if let Some(ts) = self.fv.as_ref().and_then(|f| f.sample_times.clone()) {
            return ts;
        }
        let ak = self.problem.alpha_k();
        let scale = if ak > 0.0 { 1.0 / ak } else { 1.0 };
        let t_end = self.t_end();
        let mut ts: Vec<f64> = [0.1, 0.2, 0.5, 1.0, 2.0, 5.0]
            .iter()
            .map(|f| f * scale)
            .filter(|&t| t < t_end)
            .collect();
        ts.push(t_end);
        ts
    }

    pub fn grid(&self) -> Result<FvGrid, HarnessError> {
        let spec = self
            .fv
            .as_ref()
            .and_then(|f| f.grid)
            .ok_or_else(|| HarnessError::Validation(format!("{:?} mode needs fv.grid", self.mode)))?;
        Ok(FvGrid::new(spec.x_min, spec.x_max, spec.n_cells)?)
    }

    pub fn cfl(&self) -> f64 {
        self.fv.as_ref().map_or(default_cfl(), |f| f.cfl)
    }

    pub fn shock_window(&self) -> ShockWindow {
        self.fv.as_ref().and_then(|f| f.shock_window).unwrap_or_default()
    }

    fn sweep_values(&self) -> Result<&[f64], HarnessError> {
        match self.sweep.as_deref() {
            Some(s) if !s.is_empty() => Ok(s),
            _ => Err(HarnessError::Validation(format!("{:?} mode needs a nonempty sweep", self.mode))),
        }
    }

    fn profile_spec(&self) -> Result<&ProfileSpec, HarnessError> {
        self.profile_cfg
            .as_ref()
            .ok_or_else(|| HarnessError::Validation(format!("{:?} mode needs profile_cfg", self.mode)))
    }

    /// Checks every invariant the chosen mode depends on.
    pub fn validate(&self) -> Result<(), HarnessError> {
        self.problem.validate()?;
        let p = &self.problem;
        if let Some(fv) = &self.fv {
            if !(fv.t_end > 0.0 && fv.t_end.is_finite()) {
                return Err(HarnessError::Validation(format!("t_end must be positive, got {}", fv.t_end)));
            }
            if !(fv.cfl > 0.0 && fv.cfl <= MAX_CFL) {
                return Err(HarnessError::Validation(format!("cfl must lie in (0, {MAX_CFL}], got {}", fv.cfl)));
            }
            if let Some(ts) = &fv.sample_times {
                if let Some(bad) = ts.iter().find(|&&t| !(t > 0.0 && t <= fv.t_end)) {
                    return Err(HarnessError::Validation(format!("sample time {bad} is outside (0, t_end]")));
                }
            }
        }
        match self.mode {
            Mode::Exact | Mode::LimitAlpha => {
                if self.mode == Mode::LimitAlpha {
                    let sweep = self.sweep_values()?;
                    if sweep.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
                        return Err(HarnessError::Validation("alpha sweep values must be positive".into()));
                    }
                }
            }
            Mode::Profile => {
                let spec = self.profile_spec()?;
                spec.resolve(p, spec.epsilon).validate(p)?;
            }
            Mode::ConvergenceEps => {
                let spec = self.profile_spec()?;
                for &eps in self.sweep_values()? {
                    spec.resolve(p, eps).validate(p)?;
                }
            }
            Mode::Simulate => {
                let grid = self.grid()?;
                grid.check_domain(&ExactSolution::new(*p), self.t_end())?;
            }
            Mode::ConvergenceDx => {
                let grid = self.grid()?;
                for &n in self.sweep_values()? {
                    if !(n >= 1.0 && n.fract() == 0.0) {
                        return Err(HarnessError::Validation(format!("cell count {n} is not a positive integer")));
                    }
                    FvGrid::new(grid.x_min, grid.x_max, n as usize)?
                        .check_domain(&ExactSolution::new(*p), self.t_end())?;
                }
            }
        }
        Ok(())
    }
}

/// Command-line values that replace the corresponding document fields.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub output_path: Option<PathBuf>,
    pub output_format: Option<OutputFormat>,
    pub sweep: Option<Vec<f64>>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(m) = self.mode {
            cfg.mode = m;
        }
        if let Some(p) = &self.output_path {
            cfg.output_path = Some(p.clone());
        }
        if let Some(f) = self.output_format {
            cfg.output_format = f;
        }
        if let Some(s) = &self.sweep {
            cfg.sweep = Some(s.clone());
        }
    }
}

fn parse_document(text: &str) -> Result<ExperimentConfig, HarnessError> {
    serde_json::from_str(text).map_err(|e| HarnessError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Parses and validates a JSON experiment document. Unknown fields are errors.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, HarnessError> {
    parse_with(text, &Overrides::default())
}

/// Parses a document, applies the overrides, then validates the result.
pub fn parse_with(text: &str, overrides: &Overrides) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = parse_document(text)?;
    overrides.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

pub fn serialize_config(cfg: &ExperimentConfig) -> String {
    serde_json::to_string_pretty(cfg).expect("config serializes")
}
