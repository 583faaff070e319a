//! Stage 3: UAV trajectory optimization.
//!
//! Both rate families are convex in the squared horizontal distance to the
//! relevant user, so expanding that argument to first order yields concave
//! quadratic lower bounds in the waypoint itself (`psi_lb` for downlink,
//! `phi_lb_uplink` for uplink). Their schedule-weighted sum decomposes per
//! slot into `constant - a * ||q - w||^2` terms and is maximized by projected
//! gradient ascent; feasibility (per-step speed balls with pinned endpoints)
//! is restored after every step with Dykstra's alternating projections.

use super::{relative_gain, GradientSettings, ScaSettings, ASCENT_TOL};
use crate::channel::{GainBuilder, GainTables};
use crate::error::Error;
use crate::rates::{self, log2_1p, RateModel};
use crate::scenario::{Point, PowerProfile, Scenario, Schedule, Trajectory, FEAS_TOL};
use std::f64::consts::LOG2_E;

/// Concave lower bound of the downlink rate of user `j` in slot `n` as a
/// function of the slot's waypoint, expanded at `expansion_q`. Exact at the
/// expansion point.
pub fn psi_lb(
    j: usize,
    n: usize,
    candidate_q: Point,
    expansion_q: Point,
    schedule: &Schedule,
    power: &PowerProfile,
    gains: &GainTables,
    scenario: &Scenario,
    model: &RateModel,
) -> f64 {
    let (level, slope) = downlink_expansion(j, n, expansion_q, schedule, power, gains, scenario, model);
    let w = scenario.downlink_users[j];
    level - slope * (candidate_q.dist_sq(w) - expansion_q.dist_sq(w))
}

/// Gradient of [`psi_lb`] with respect to the candidate waypoint.
pub fn psi_lb_gradient(
    j: usize,
    n: usize,
    candidate_q: Point,
    expansion_q: Point,
    schedule: &Schedule,
    power: &PowerProfile,
    gains: &GainTables,
    scenario: &Scenario,
    model: &RateModel,
) -> Point {
    let (_, slope) = downlink_expansion(j, n, expansion_q, schedule, power, gains, scenario, model);
    (candidate_q - scenario.downlink_users[j]) * (-2.0 * slope)
}

/// Value at the expansion point and quadratic slope of the downlink
/// surrogate, both including the model's rate prefactor.
#[allow(clippy::too_many_arguments)]
fn downlink_expansion(
    j: usize,
    n: usize,
    expansion_q: Point,
    schedule: &Schedule,
    power: &PowerProfile,
    gains: &GainTables,
    scenario: &Scenario,
    model: &RateModel,
) -> (f64, f64) {
    let interference = rates::downlink_interference(j, n, schedule, power, gains, model);
    let strength = model.uav_tx_power * scenario.beta0 / interference;
    quadratic_expansion(strength, expansion_q, scenario.downlink_users[j], scenario.altitude, model)
}

/// Concave lower bound of the uplink rate of user `i` in slot `n` as a
/// function of the slot's waypoint, expanded at `expansion_q`.
pub fn phi_lb_uplink(
    i: usize,
    n: usize,
    candidate_q: Point,
    expansion_q: Point,
    power: &PowerProfile,
    scenario: &Scenario,
    model: &RateModel,
) -> f64 {
    let (level, slope) = uplink_expansion(i, n, expansion_q, power, scenario, model);
    let w = scenario.uplink_users[i];
    level - slope * (candidate_q.dist_sq(w) - expansion_q.dist_sq(w))
}

/// Gradient of [`phi_lb_uplink`] with respect to the candidate waypoint.
pub fn phi_lb_uplink_gradient(
    i: usize,
    n: usize,
    candidate_q: Point,
    expansion_q: Point,
    power: &PowerProfile,
    scenario: &Scenario,
    model: &RateModel,
) -> Point {
    let (_, slope) = uplink_expansion(i, n, expansion_q, power, scenario, model);
    (candidate_q - scenario.uplink_users[i]) * (-2.0 * slope)
}

fn uplink_expansion(
    i: usize,
    n: usize,
    expansion_q: Point,
    power: &PowerProfile,
    scenario: &Scenario,
    model: &RateModel,
) -> (f64, f64) {
    let strength =
        power.p[(i, n)] * scenario.beta0 / (model.self_interference + model.noise_power);
    quadratic_expansion(strength, expansion_q, scenario.uplink_users[i], scenario.altitude, model)
}

/// Shared core of both surrogates. The rate is
/// `scale * log2(1 + strength / (s + H^2))` with `s` the squared horizontal
/// distance to `user`; expanding in `s` at the expansion point gives the
/// level and the (nonnegative) quadratic slope.
fn quadratic_expansion(
    strength: f64,
    expansion_q: Point,
    user: Point,
    altitude: f64,
    model: &RateModel,
) -> (f64, f64) {
    let s_r = expansion_q.dist_sq(user);
    let hh = altitude * altitude;
    let level = model.scale * log2_1p(strength / (s_r + hh));
    let slope = model.scale * strength * LOG2_E / ((strength + s_r + hh) * (s_r + hh));
    (level, slope)
}

/// Schedule-weighted trajectory surrogate, one concave quadratic per slot:
/// `sum_k (constant_k - a_k * ||q - w_k||^2)` with all `a_k >= 0`.
#[derive(Debug, Clone)]
pub struct TrajectorySurrogate {
    /// terms[n]: (user position, quadratic coefficient, constant) for slot n.
    terms: Vec<Vec<(Point, f64, f64)>>,
}

impl TrajectorySurrogate {
    /// Surrogate objective over all slots (slot `n` reads waypoint `n+1`).
    pub fn value(&self, trajectory: &Trajectory) -> f64 {
        let mut total = 0.0;
        for (n, terms) in self.terms.iter().enumerate() {
            let q = trajectory.slot_position(n);
            for &(w, a, c) in terms {
                total += c - a * q.dist_sq(w);
            }
        }
        total
    }

    /// Gradient of slot `n`'s contribution with respect to its waypoint.
    pub fn slot_gradient(&self, n: usize, q: Point) -> Point {
        let mut g = Point::new(0.0, 0.0);
        for &(w, a, _) in &self.terms[n] {
            g = g + (q - w) * (-2.0 * a);
        }
        g
    }
}

/// Build the trajectory surrogate expanded at `expansion`, weighting each
/// user's term by its schedule entry. `gains` must have been built at the
/// expansion trajectory (only its cross table enters, which is
/// trajectory-independent).
pub fn build_surrogate(
    expansion: &Trajectory,
    schedule: &Schedule,
    power: &PowerProfile,
    gains: &GainTables,
    scenario: &Scenario,
    model: &RateModel,
) -> TrajectorySurrogate {
    let n_slots = schedule.num_slots();
    let mut terms = Vec::with_capacity(n_slots);
    for n in 0..n_slots {
        let q_r = expansion.slot_position(n);
        let mut slot_terms = Vec::new();
        for j in 0..schedule.downlink.rows() {
            let x = schedule.downlink[(j, n)];
            if x == 0.0 {
                continue;
            }
            let (level, slope) =
                downlink_expansion(j, n, q_r, schedule, power, gains, scenario, model);
            let w = scenario.downlink_users[j];
            slot_terms.push((w, x * slope, x * (level + slope * q_r.dist_sq(w))));
        }
        for i in 0..schedule.uplink.rows() {
            let x = schedule.uplink[(i, n)];
            if x == 0.0 {
                continue;
            }
            let (level, slope) = uplink_expansion(i, n, q_r, power, scenario, model);
            let w = scenario.uplink_users[i];
            slot_terms.push((w, x * slope, x * (level + slope * q_r.dist_sq(w))));
        }
        terms.push(slot_terms);
    }
    TrajectorySurrogate { terms }
}

/// Project the free waypoints onto the intersection of the per-step speed
/// balls with both endpoints held fixed, using Dykstra's alternating
/// projections. Any violation Dykstra has not flushed within its sweep
/// budget is removed by contracting toward the straight backbone between
/// the endpoints, which always satisfies the chain. Returns the worst
/// remaining step-length violation.
pub fn project_speed_chain(waypoints: &mut [Point], step_limit: f64, max_sweeps: usize) -> f64 {
    let n = waypoints.len() - 1;
    if n < 1 {
        return 0.0;
    }
    let mut corrections = vec![(Point::new(0.0, 0.0), Point::new(0.0, 0.0)); n + 1];
    let tol = 1e-12 * step_limit.max(1.0);
    for _ in 0..max_sweeps {
        let mut moved: f64 = 0.0;
        for k in 1..=n {
            let first_free = k - 1 != 0;
            let last_free = k != n;
            let (da, db) = corrections[k];
            let ya = if first_free { waypoints[k - 1] + da } else { waypoints[k - 1] };
            let yb = if last_free { waypoints[k] + db } else { waypoints[k] };
            let (za, zb) = project_pair(ya, yb, first_free, last_free, step_limit);
            corrections[k] = (ya - za, yb - zb);
            if first_free {
                moved = moved.max(waypoints[k - 1].dist(za));
                waypoints[k - 1] = za;
            }
            if last_free {
                moved = moved.max(waypoints[k].dist(zb));
                waypoints[k] = zb;
            }
        }
        let violation = max_violation(waypoints, step_limit);
        if violation <= tol && moved <= tol {
            return violation;
        }
    }
    contract_to_feasible(waypoints, step_limit)
}

/// Blend toward the equispaced straight line between the fixed endpoints by
/// the smallest factor that restores every step bound. With violation `v`,
/// backbone step `s`, and limit `r`, a blend of `v / (v + r - s)` suffices;
/// the blend is a no-op when the chain is already feasible.
fn contract_to_feasible(waypoints: &mut [Point], step_limit: f64) -> f64 {
    let n = waypoints.len() - 1;
    let violation = max_violation(waypoints, step_limit);
    if violation <= 0.0 {
        return violation;
    }
    let (a, b) = (waypoints[0], waypoints[n]);
    let backbone_step = a.dist(b) / n as f64;
    if backbone_step > step_limit {
        return violation; // endpoints themselves unreachable: nothing to do
    }
    let lambda = (violation / (violation + step_limit - backbone_step) * (1.0 + 1e-9)).min(1.0);
    for (k, w) in waypoints.iter_mut().enumerate().take(n).skip(1) {
        let t = k as f64 / n as f64;
        let backbone = a + (b - a) * t;
        *w = *w * (1.0 - lambda) + backbone * lambda;
    }
    max_violation(waypoints, step_limit)
}

fn max_violation(waypoints: &[Point], step_limit: f64) -> f64 {
    waypoints
        .windows(2)
        .map(|w| (w[1].dist(w[0]) - step_limit).max(0.0))
        .fold(0.0, f64::max)
}

/// Euclidean projection of a waypoint pair onto `||b - a|| <= r`, moving
/// only the free endpoints.
fn project_pair(a: Point, b: Point, a_free: bool, b_free: bool, r: f64) -> (Point, Point) {
    let d = b.dist(a);
    if d <= r || (!a_free && !b_free) {
        return (a, b);
    }
    let u = (b - a) * (1.0 / d);
    match (a_free, b_free) {
        (true, true) => {
            let mid = (a + b) * 0.5;
            (mid - u * (r / 2.0), mid + u * (r / 2.0))
        }
        (false, true) => (a, a + u * r),
        (true, false) => (b - u * r, b),
        (false, false) => unreachable!(),
    }
}

/// Maximize a trajectory surrogate over the feasible set by projected
/// gradient ascent with Armijo backtracking. The start trajectory must be
/// feasible; the result is feasible and its surrogate value is no smaller.
pub fn maximize_surrogate(
    start: &Trajectory,
    surrogate: &TrajectorySurrogate,
    step_limit: f64,
    settings: &GradientSettings,
) -> Trajectory {
    let mut current = start.clone();
    let n = current.num_slots();
    if n < 2 {
        return current; // both waypoints pinned
    }
    let mut value = surrogate.value(&current);
    let mut step = settings.initial_step.unwrap_or(step_limit).max(1e-12);

    for _ in 0..settings.max_steps {
        let grads: Vec<Point> = (1..n)
            .map(|k| surrogate.slot_gradient(k - 1, current.waypoints[k]))
            .collect();
        if grads.iter().map(|g| g.norm_sq()).sum::<f64>() == 0.0 {
            break;
        }

        let mut t = step;
        let mut advanced = false;
        for _ in 0..60 {
            let mut cand = current.clone();
            for (k, g) in (1..n).zip(&grads) {
                cand.waypoints[k] = current.waypoints[k] + *g * t;
            }
            project_speed_chain(&mut cand.waypoints, step_limit, settings.dykstra_max_sweeps);
            let cand_value = surrogate.value(&cand);
            let along: f64 = (1..n)
                .map(|k| grads[k - 1].dot(cand.waypoints[k] - current.waypoints[k]))
                .sum();
            if cand_value > value && cand_value >= value + settings.armijo * along.max(0.0) {
                let gain = relative_gain(value, cand_value);
                current = cand;
                value = cand_value;
                step = t * 2.0;
                advanced = true;
                if gain < settings.stationarity_tol {
                    return current;
                }
                break;
            }
            t *= settings.backtrack;
        }
        if !advanced {
            break; // stationary within line-search resolution
        }
    }
    current
}

/// Stage 3: successive convex approximation over the trajectory.
///
/// Each round expands the surrogate at the current trajectory, maximizes it
/// under the speed chain, and accepts the result only if the true objective
/// does not decrease, halving back toward the expansion point otherwise.
#[allow(clippy::too_many_arguments)]
pub fn solve_p3_trajectory(
    trajectory: &mut Trajectory,
    schedule: &Schedule,
    power: &PowerProfile,
    builder: &GainBuilder<'_>,
    scenario: &Scenario,
    model: &RateModel,
    settings: &ScaSettings,
) -> Result<(), Error> {
    trajectory.validate(scenario, true)?;
    let mut gains = builder.build(trajectory);
    let mut value = rates::objective(schedule, power, &gains, model).weighted_objective;

    for _ in 0..settings.max_iters_trajectory {
        let surrogate = build_surrogate(trajectory, schedule, power, &gains, scenario, model);
        let mut cand =
            maximize_surrogate(trajectory, &surrogate, scenario.max_step(), &settings.gradient);

        let mut accepted = None;
        for _ in 0..40 {
            let cand_gains = builder.build(&cand);
            let cand_value =
                rates::objective(schedule, power, &cand_gains, model).weighted_objective;
            if cand_value >= value - ASCENT_TOL * value.abs().max(1.0) {
                accepted = Some((cand_gains, cand_value));
                break;
            }
            // Halve the SCA step toward the expansion point; the feasible
            // set is convex, so midpoints stay feasible.
            for (w, prev) in cand.waypoints.iter_mut().zip(&trajectory.waypoints) {
                *w = (*w + *prev) * 0.5;
            }
        }
        let Some((cand_gains, cand_value)) = accepted else {
            break;
        };
        let gain = relative_gain(value, cand_value);
        *trajectory = cand;
        gains = cand_gains;
        value = value.max(cand_value);
        if gain < settings.inner_tol {
            break;
        }
    }
    debug_assert!(max_violation(&trajectory.waypoints, scenario.max_step()) <= FEAS_TOL);
    Ok(())
}
