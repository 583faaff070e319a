//! The four block-coordinate stages.
//!
//! Stage 1 (downlink scheduling) and the per-iterate linear programs of
//! stage 2 decompose per slot into simplex-with-slack problems whose optima
//! sit at vertices, so both are solved in closed form by argmax. Stage 3
//! (trajectory) and stage 4 (uplink power) wrap concave surrogate problems
//! in successive convex approximation loops: the surrogate is a first-order
//! lower bound of each non-concave rate term, tight at the expansion point,
//! so maximizing it can never decrease the true objective. Every stage
//! additionally guards each update against the true objective.

mod power;
mod schedule;
mod trajectory;

pub use power::{phi_lb_power, solve_p4_power};
pub use schedule::{p2_downlink_lb, solve_p1_downlink_schedule, solve_p2_uplink_schedule};
pub use trajectory::{
    build_surrogate, maximize_surrogate, phi_lb_uplink, phi_lb_uplink_gradient, project_speed_chain,
    psi_lb, psi_lb_gradient, solve_p3_trajectory, TrajectorySurrogate,
};

/// Relative slack used by the monotone-ascent guards.
pub(crate) const ASCENT_TOL: f64 = 1e-9;

/// Inner-loop iteration caps and tolerances for the SCA stages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaSettings {
    /// Max SCA iterations for uplink scheduling (L1).
    pub max_iters_uplink: usize,
    /// Max SCA iterations for the trajectory stage (L2).
    pub max_iters_trajectory: usize,
    /// Max SCA iterations for power control (L3).
    pub max_iters_power: usize,
    /// Relative improvement below which an SCA loop stops.
    pub inner_tol: f64,
    /// Settings for the projected gradient solver inside stage 3.
    pub gradient: GradientSettings,
}

impl Default for ScaSettings {
    fn default() -> Self {
        ScaSettings {
            max_iters_uplink: 20,
            max_iters_trajectory: 20,
            max_iters_power: 20,
            inner_tol: 1e-4,
            gradient: GradientSettings::default(),
        }
    }
}

/// Projected gradient ascent and Dykstra projection settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientSettings {
    /// Max gradient steps per surrogate maximization.
    pub max_steps: usize,
    /// Initial step size in meters; `None` uses vmax * delta.
    pub initial_step: Option<f64>,
    /// Backtracking factor for the line search.
    pub backtrack: f64,
    /// Armijo sufficient-increase constant.
    pub armijo: f64,
    /// Max Dykstra sweeps per projection.
    pub dykstra_max_sweeps: usize,
    /// Relative improvement below which the gradient ascent stops.
    pub stationarity_tol: f64,
}

impl Default for GradientSettings {
    fn default() -> Self {
        GradientSettings {
            max_steps: 500,
            initial_step: None,
            backtrack: 0.5,
            armijo: 1e-4,
            dykstra_max_sweeps: 200,
            stationarity_tol: 1e-6,
        }
    }
}

/// Relative improvement of `new` over `old`, guarded for tiny baselines.
pub(crate) fn relative_gain(old: f64, new: f64) -> f64 {
    (new - old) / old.abs().max(1e-12)
}
