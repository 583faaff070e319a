//! Stages 1 and 2: downlink and uplink user scheduling.

use super::{ScaSettings, ASCENT_TOL};
use crate::channel::GainTables;
use crate::rates::{self, RateModel};
use crate::scenario::{PowerProfile, Schedule};

/// Stage 1: downlink scheduling with everything else fixed.
///
/// The relaxed problem is a per-slot linear program over the simplex with
/// slack; rates are nonnegative, so the optimum puts unit mass on the
/// highest-rate user of each slot. Ties break to the lowest index.
pub fn solve_p1_downlink_schedule(
    schedule: &mut Schedule,
    power: &PowerProfile,
    gains: &GainTables,
    model: &RateModel,
) {
    let kd = schedule.downlink.rows();
    for n in 0..schedule.num_slots() {
        let mut best = 0;
        let mut best_rate = f64::NEG_INFINITY;
        for j in 0..kd {
            let r = rates::downlink_rate(j, n, schedule, power, gains, model);
            if r > best_rate {
                best_rate = r;
                best = j;
            }
        }
        for j in 0..kd {
            schedule.downlink[(j, n)] = if j == best { 1.0 } else { 0.0 };
        }
    }
}

/// First-order lower bound of the downlink rate of user `j` in slot `n` as a
/// function of the uplink scheduling column, expanded at `expansion_xu`.
///
/// The rate is convex in the uplink scheduling variables (they enter the
/// interference denominator linearly), so its tangent plane is a global
/// lower bound and is exact at the expansion point.
pub fn p2_downlink_lb(
    j: usize,
    n: usize,
    candidate_xu: &[f64],
    expansion_xu: &[f64],
    power: &PowerProfile,
    gains: &GainTables,
    model: &RateModel,
) -> f64 {
    let signal = model.uav_tx_power * gains.uav_downlink[(j, n)];
    let denom_r = interference_at(j, n, expansion_xu, power, gains, model);
    let base = model.scale * rates::log2_1p(signal / denom_r);
    let mut correction = 0.0;
    for i in 0..candidate_xu.len() {
        let slope = interference_slope(j, n, i, denom_r, power, gains, model);
        correction += slope * (candidate_xu[i] - expansion_xu[i]);
    }
    base - correction
}

/// Interference-plus-noise at downlink user `j` for an explicit uplink
/// scheduling column. Summation order matches `rates::downlink_interference`.
fn interference_at(
    j: usize,
    n: usize,
    xu: &[f64],
    power: &PowerProfile,
    gains: &GainTables,
    model: &RateModel,
) -> f64 {
    let mut acc = 0.0;
    for (i, &x) in xu.iter().enumerate() {
        acc += x * gains.cross[(i, j)] * power.p[(i, n)];
    }
    acc + model.noise_power
}

/// d/dx_i^u of the downlink rate at an expansion point whose
/// interference-plus-noise equals `denom_r`, negated (the rate falls as the
/// entry grows). Includes the model's rate prefactor.
fn interference_slope(
    j: usize,
    n: usize,
    i: usize,
    denom_r: f64,
    power: &PowerProfile,
    gains: &GainTables,
    model: &RateModel,
) -> f64 {
    let signal = model.uav_tx_power * gains.uav_downlink[(j, n)];
    let denom_r = denom_r.max(model.noise_power);
    model.scale * gains.cross[(i, j)] * power.p[(i, n)] * signal
        / (denom_r * (denom_r + signal) * std::f64::consts::LN_2)
}

/// Stage 2: uplink scheduling by successive convex approximation.
///
/// At each expansion point the surrogate objective is linear in the uplink
/// column of every slot, with per-user coefficient
/// `c_i = Ru_i - sum_j x_j^d * slope_ij`; the per-slot LP schedules the best
/// positive coefficient (or nothing). The loop re-expands until the
/// surrogate stops improving, then a final sweep compares the true objective
/// across all per-slot vertices, which the relaxed optimum always contains.
/// Every update is guarded so the true objective never decreases.
pub fn solve_p2_uplink_schedule(
    schedule: &mut Schedule,
    power: &PowerProfile,
    gains: &GainTables,
    model: &RateModel,
    settings: &ScaSettings,
) {
    let ku = schedule.uplink.rows();
    let n_slots = schedule.num_slots();
    let mut current = rates::objective(schedule, power, gains, model).weighted_objective;

    for _ in 0..settings.max_iters_uplink {
        let mut candidate_cols: Vec<Vec<f64>> = Vec::with_capacity(n_slots);
        let mut surrogate_gain = 0.0;
        for n in 0..n_slots {
            let expansion = schedule.uplink.col(n);
            let coeffs = slot_coefficients(n, &expansion, schedule, power, gains, model);
            // Expansion-point surrogate value of this slot's linear part.
            let at_expansion: f64 = coeffs
                .iter()
                .zip(&expansion)
                .map(|(c, x)| c * x)
                .sum();
            let (best_i, best_c) = argmax(&coeffs);
            let mut col = vec![0.0; ku];
            let at_candidate = if best_c > 0.0 {
                col[best_i] = 1.0;
                best_c
            } else {
                0.0
            };
            surrogate_gain += at_candidate - at_expansion;
            candidate_cols.push(col);
        }

        let mut trial = schedule.clone();
        for (n, col) in candidate_cols.iter().enumerate() {
            trial.uplink.set_col(n, col);
        }
        if trial.uplink == schedule.uplink {
            break; // fixed point of the linearization
        }
        let trial_value = rates::objective(&trial, power, gains, model).weighted_objective;
        if trial_value < current - ASCENT_TOL * current.abs().max(1.0) {
            break; // guard: keep the current schedule
        }
        schedule.uplink = trial.uplink;
        current = trial_value;
        if surrogate_gain < settings.inner_tol * current.abs().max(1e-12) {
            break;
        }
    }

    polish_uplink_vertices(schedule, power, gains, model, &mut current);
}

/// Linear surrogate coefficient of each uplink user in slot `n`:
/// its own uplink rate minus the weighted interference slopes it would
/// inflict on the scheduled downlink users.
fn slot_coefficients(
    n: usize,
    expansion: &[f64],
    schedule: &Schedule,
    power: &PowerProfile,
    gains: &GainTables,
    model: &RateModel,
) -> Vec<f64> {
    let kd = schedule.downlink.rows();
    let ku = expansion.len();
    let mut coeffs = vec![0.0; ku];
    let denoms: Vec<f64> = (0..kd)
        .map(|j| interference_at(j, n, expansion, power, gains, model))
        .collect();
    for (i, c) in coeffs.iter_mut().enumerate() {
        let mut cost = 0.0;
        for j in 0..kd {
            cost += schedule.downlink[(j, n)]
                * interference_slope(j, n, i, denoms[j], power, gains, model);
        }
        *c = rates::uplink_rate(i, n, power, gains, model) - cost;
    }
    coeffs
}

/// Lowest-index argmax.
fn argmax(values: &[f64]) -> (usize, f64) {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, &v) in values.iter().enumerate() {
        if v > best_v {
            best_v = v;
            best = i;
        }
    }
    (best, best_v)
}

/// Final sweep over the true objective: for each slot try every vertex
/// (no user, or exactly one user) and keep the best. The true objective is
/// separable across slots once the other blocks are fixed, so this finds the
/// exact relaxed optimum, which always sits at a vertex of the per-slot
/// simplex.
fn polish_uplink_vertices(
    schedule: &mut Schedule,
    power: &PowerProfile,
    gains: &GainTables,
    model: &RateModel,
    current: &mut f64,
) {
    let ku = schedule.uplink.rows();
    for n in 0..schedule.num_slots() {
        let original = schedule.uplink.col(n);
        let mut best_col = original.clone();
        let mut best_value = slot_true_value(n, schedule, power, gains, model);
        for choice in 0..=ku {
            let mut col = vec![0.0; ku];
            if choice < ku {
                col[choice] = 1.0;
            }
            if col == original {
                continue;
            }
            schedule.uplink.set_col(n, &col);
            let v = slot_true_value(n, schedule, power, gains, model);
            if v > best_value {
                best_value = v;
                best_col = col;
            }
        }
        schedule.uplink.set_col(n, &best_col);
    }
    *current = rates::objective(schedule, power, gains, model).weighted_objective;
}

/// True weighted objective contribution of slot `n` under the current state.
fn slot_true_value(
    n: usize,
    schedule: &Schedule,
    power: &PowerProfile,
    gains: &GainTables,
    model: &RateModel,
) -> f64 {
    let mut v = 0.0;
    for j in 0..schedule.downlink.rows() {
        v += schedule.downlink[(j, n)] * rates::downlink_rate(j, n, schedule, power, gains, model);
    }
    for i in 0..schedule.uplink.rows() {
        v += schedule.uplink[(i, n)] * rates::uplink_rate(i, n, power, gains, model);
    }
    v
}
