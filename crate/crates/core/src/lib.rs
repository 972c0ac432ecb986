//! Exact, viscous and finite-volume solutions of the Riemann problem for the
//! damped triangular system
//!
//! ```text
//!     u_t + (u^{k+1} / (k+1))_x = -alpha u
//!     v_t + (v u^k)_x           = 0
//! ```
//!
//! [`exact`] holds the closed-form classical and delta-shock solutions,
//! [`viscous`] the self-similar regularization and its vanishing-viscosity
//! measurements, and [`fv`] a direct finite-volume simulation.

pub mod exact;
pub mod fv;
mod linalg;
pub mod problem;
pub mod viscous;

pub use exact::{
    damped_clock, delta_weight_at, delta_weight_w0, entropy_check, evaluate_exact, shock_position,
    shock_speed_sigma, similarity_xi, undo_damping_transform, EntropyReport, ExactError,
    ExactSolution, StateSample,
};
pub use fv::{FvError, FvGrid, FvState, Formulation};
pub use problem::{classify, ProblemError, RiemannProblem, WaveClassification};
pub use viscous::{ProfileConfig, SimilarityProfile, ViscousError};
