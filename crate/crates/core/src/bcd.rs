//! Outer alternating-optimization loop: scheduling, trajectory, and power
//! stages round-robin until the fractional objective improvement falls below
//! the scenario tolerance, then the relaxed schedules are rounded to binary.

use crate::baselines::SchemeId;
use crate::channel::GainBuilder;
use crate::error::Error;
use crate::rates::{self, RateBreakdown, RateModel};
use crate::scenario::{Point, PowerProfile, Scenario, Schedule, ScheduleMode, Trajectory};
use crate::subproblems::{
    solve_p1_downlink_schedule, solve_p2_uplink_schedule, solve_p3_trajectory, solve_p4_power,
    ScaSettings,
};
use serde::{Deserialize, Serialize};

/// Outer-loop settings on top of the per-stage [`ScaSettings`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcdSettings {
    pub sca: ScaSettings,
    /// Safety cap on outer passes beyond the scenario's epsilon test.
    pub max_outer_iters: usize,
}

impl Default for BcdSettings {
    fn default() -> Self {
        BcdSettings {
            sca: ScaSettings::default(),
            max_outer_iters: 100,
        }
    }
}

/// Starting trajectory for a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrajectoryInit {
    /// Constant-speed straight line between the scenario endpoints.
    StraightLine,
    /// Hover at a fixed position for the whole period (static scheme).
    Hover(Point),
}

/// Scheme-specific knobs threaded through one shared solver path.
///
/// Every comparison scheme is the proposed pipeline with some combination
/// of: cross interference removed, self-interference replaced, a rate
/// prefactor, stages disabled, or the trajectory pinned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunPlan {
    pub label: SchemeId,
    /// Force every uplink-to-downlink cross gain to zero.
    pub zero_cross_interference: bool,
    /// Replace the scenario's self-interference power (Watts).
    pub self_interference_override: Option<f64>,
    /// Prefactor on every rate (0.5 for half duplex).
    pub rate_scale: f64,
    /// Run stage 3; otherwise the trajectory stays at its initialization.
    pub optimize_trajectory: bool,
    /// Run stage 4; otherwise powers stay at P_max.
    pub optimize_power: bool,
    pub initial_trajectory: TrajectoryInit,
    /// Whether endpoint pins apply (waived for the static scheme).
    pub enforce_endpoints: bool,
}

impl RunPlan {
    /// The proposed design: all four stages under the true model.
    pub fn proposed() -> Self {
        RunPlan {
            label: SchemeId::Proposed,
            zero_cross_interference: false,
            self_interference_override: None,
            rate_scale: 1.0,
            optimize_trajectory: true,
            optimize_power: true,
            initial_trajectory: TrajectoryInit::StraightLine,
            enforce_endpoints: true,
        }
    }

    pub(crate) fn rate_model(&self, scenario: &Scenario) -> RateModel {
        let mut model = RateModel::new(scenario);
        if let Some(fb) = self.self_interference_override {
            model.self_interference = fb;
        }
        model.scale = self.rate_scale;
        model
    }

    pub(crate) fn gain_builder<'a>(&self, scenario: &'a Scenario) -> GainBuilder<'a> {
        if self.zero_cross_interference {
            GainBuilder::without_cross_interference(scenario)
        } else {
            GainBuilder::new(scenario)
        }
    }
}

/// Result bundle of one solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub scheme: SchemeId,
    /// Binary schedule after rounding.
    pub schedule: Schedule,
    /// Relaxed schedule before rounding.
    pub relaxed_schedule: Schedule,
    pub trajectory: Trajectory,
    pub power: PowerProfile,
    /// Relaxed objective after each outer pass; non-decreasing.
    pub objective_trace: Vec<f64>,
    pub final_relaxed_objective: f64,
    pub final_binary_objective: f64,
    pub iterations_used: usize,
    /// Rates and weighted objective of the rounded (binary) solution.
    pub rate_breakdown: RateBreakdown,
}

/// Starting point of the alternating loop: straight-line trajectory at
/// constant speed, full power everywhere, uniform relaxed schedules.
pub fn initialize(scenario: &Scenario) -> Result<(Schedule, Trajectory, PowerProfile), Error> {
    scenario.validate()?;
    Ok((
        Schedule::uniform(scenario),
        Trajectory::straight_line(scenario),
        PowerProfile::full_power(scenario),
    ))
}

/// Threshold rounding of a relaxed schedule: entries at or above one half
/// become one. If two entries of a slot both sit at exactly 0.5, the lowest
/// index wins, preserving the unit column budget.
pub fn round_schedule(relaxed: &Schedule) -> Schedule {
    let mut binary = relaxed.clone();
    binary.mode = ScheduleMode::Binary;
    for m in [&mut binary.downlink, &mut binary.uplink] {
        for n in 0..m.cols() {
            let mut taken = false;
            for u in 0..m.rows() {
                let keep = m[(u, n)] >= 0.5 && !taken;
                if keep {
                    taken = true;
                }
                m[(u, n)] = if keep { 1.0 } else { 0.0 };
            }
        }
    }
    binary
}

/// Run the full alternating optimization under the proposed design.
pub fn run(scenario: &Scenario, settings: &BcdSettings) -> Result<Solution, Error> {
    run_with_plan(scenario, settings, &RunPlan::proposed())
}

/// Run the alternating optimization under an arbitrary scheme plan.
///
/// Each outer pass runs the enabled stages in order (downlink scheduling,
/// uplink scheduling, trajectory, power), records the relaxed objective,
/// and stops once its fractional increase over the previous pass drops
/// below the scenario tolerance or the outer cap is reached. The schedules
/// are then rounded and the binary objective recomputed; the continuous
/// blocks are not re-optimized after rounding.
pub fn run_with_plan(
    scenario: &Scenario,
    settings: &BcdSettings,
    plan: &RunPlan,
) -> Result<Solution, Error> {
    let (mut schedule, mut trajectory, mut power) = initialize(scenario)?;
    if let TrajectoryInit::Hover(position) = plan.initial_trajectory {
        trajectory = Trajectory::hover(position, scenario.num_slots);
    }
    let builder = plan.gain_builder(scenario);
    let model = plan.rate_model(scenario);
    let mut gains = builder.build(&trajectory);

    let mut previous = rates::objective(&schedule, &power, &gains, &model).weighted_objective;
    let mut trace = Vec::new();

    for _ in 0..settings.max_outer_iters {
        solve_p1_downlink_schedule(&mut schedule, &power, &gains, &model);
        solve_p2_uplink_schedule(&mut schedule, &power, &gains, &model, &settings.sca);
        if plan.optimize_trajectory {
            solve_p3_trajectory(
                &mut trajectory,
                &schedule,
                &power,
                &builder,
                scenario,
                &model,
                &settings.sca,
            )?;
            gains = builder.build(&trajectory);
        }
        if plan.optimize_power {
            solve_p4_power(
                &mut power,
                &schedule,
                &gains,
                &model,
                scenario.max_uplink_power,
                &settings.sca,
            );
        }
        let objective = rates::objective(&schedule, &power, &gains, &model).weighted_objective;
        trace.push(objective);
        let fractional = (objective - previous) / previous.abs().max(1e-12);
        previous = objective;
        if fractional < scenario.tolerance_eps {
            break;
        }
    }

    let relaxed_schedule = schedule;
    let binary = round_schedule(&relaxed_schedule);
    let rate_breakdown = rates::objective(&binary, &power, &gains, &model);
    let final_binary_objective = rate_breakdown.weighted_objective;
    Ok(Solution {
        scheme: plan.label,
        schedule: binary,
        relaxed_schedule,
        trajectory,
        power,
        final_relaxed_objective: *trace.last().expect("at least one outer pass"),
        final_binary_objective,
        iterations_used: trace.len(),
        objective_trace: trace,
        rate_breakdown,
    })
}

/// Check every solution invariant: monotone trace, schedule feasibility in
/// both modes, trajectory feasibility (endpoints waived for the static
/// scheme), power bounds, and the rounding gap.
pub fn validate_solution(solution: &Solution, scenario: &Scenario) -> Result<(), Error> {
    for pair in solution.objective_trace.windows(2) {
        if pair[1] < pair[0] - 1e-9 * pair[0].abs().max(1.0) {
            return Err(Error::validation(format!(
                "objective trace decreases: {} -> {}",
                pair[0], pair[1]
            )));
        }
    }
    if solution.schedule.mode != ScheduleMode::Binary {
        return Err(Error::validation("solution schedule must be binary"));
    }
    solution.schedule.validate()?;
    solution.relaxed_schedule.validate()?;
    let enforce_endpoints = solution.scheme != SchemeId::Static;
    solution.trajectory.validate(scenario, enforce_endpoints)?;
    solution.power.validate(scenario.max_uplink_power)?;
    let slack = 1e-9 * solution.final_relaxed_objective.abs().max(1.0);
    if solution.final_binary_objective > solution.final_relaxed_objective + slack {
        return Err(Error::validation(format!(
            "binary objective {} exceeds relaxed objective {}",
            solution.final_binary_objective, solution.final_relaxed_objective
        )));
    }
    Ok(())
}
