//! Per-slot downlink/uplink spectral efficiencies and the weighted system
//! objective.
//!
//! Rates are in bits/s/Hz; the objective is the schedule-weighted sum over
//! users and slots. All evaluations run slot-major in ascending order so
//! results are reproducible regardless of caller-side parallelism.

use crate::channel::GainTables;
use crate::mat::Mat;
use crate::scenario::{PowerProfile, Scenario, Schedule, Trajectory};
use serde::{Deserialize, Serialize};

/// Radio quantities the rate expressions need, separated from [`Scenario`]
/// so the comparison schemes can override them (zero self-interference and
/// a 1/2 sub-slot prefactor for half duplex) while sharing one code path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateModel {
    /// UAV downlink transmit power p_b in Watts.
    pub uav_tx_power: f64,
    /// Receiver noise power in Watts.
    pub noise_power: f64,
    /// Effective self-interference power in Watts.
    pub self_interference: f64,
    /// Prefactor applied to every rate (1.0 full duplex, 0.5 half duplex).
    pub scale: f64,
}

impl RateModel {
    /// Standard full-duplex model taken verbatim from the scenario.
    pub fn new(scenario: &Scenario) -> Self {
        RateModel {
            uav_tx_power: scenario.uav_tx_power,
            noise_power: scenario.noise_power,
            self_interference: scenario.self_interference,
            scale: 1.0,
        }
    }

    /// Half-duplex model: directions alternate in two half-length sub-slots,
    /// so no self-interference and half the time share per direction.
    pub fn half_duplex(scenario: &Scenario) -> Self {
        RateModel {
            self_interference: 0.0,
            scale: 0.5,
            ..RateModel::new(scenario)
        }
    }

    pub fn with_self_interference(mut self, fb: f64) -> Self {
        self.self_interference = fb;
        self
    }
}

/// log2(1 + x) via `ln_1p`, stable across the ~10 orders of magnitude the
/// SINRs span.
pub fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

/// Interference-plus-noise power at downlink user `j` in slot `n`:
/// sum_i x_i^u[n] * g_bar[i][j] * p_i[n] + sigma^2.
pub fn downlink_interference(
    j: usize,
    n: usize,
    schedule: &Schedule,
    power: &PowerProfile,
    gains: &GainTables,
    model: &RateModel,
) -> f64 {
    let mut acc = 0.0;
    for i in 0..schedule.uplink.rows() {
        acc += schedule.uplink[(i, n)] * gains.cross[(i, j)] * power.p[(i, n)];
    }
    acc + model.noise_power
}

/// Downlink rate for user `j` in slot `n`.
pub fn downlink_rate(
    j: usize,
    n: usize,
    schedule: &Schedule,
    power: &PowerProfile,
    gains: &GainTables,
    model: &RateModel,
) -> f64 {
    let interference = downlink_interference(j, n, schedule, power, gains, model);
    let signal = model.uav_tx_power * gains.uav_downlink[(j, n)];
    model.scale * log2_1p(signal / interference)
}

/// Uplink rate for user `i` in slot `n`.
pub fn uplink_rate(
    i: usize,
    n: usize,
    power: &PowerProfile,
    gains: &GainTables,
    model: &RateModel,
) -> f64 {
    let signal = power.p[(i, n)] * gains.uplink_uav[(i, n)];
    model.scale * log2_1p(signal / (model.self_interference + model.noise_power))
}

/// Full per-user-per-slot rate matrices plus the schedule-weighted
/// objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateBreakdown {
    /// K_D x N unweighted downlink rates.
    pub downlink: Mat,
    /// K_U x N unweighted uplink rates.
    pub uplink: Mat,
    /// sum_n sum_j x_j^d[n] Rd[j][n] + sum_n sum_i x_i^u[n] Ru[i][n].
    pub weighted_objective: f64,
}

impl RateBreakdown {
    /// Schedule-weighted downlink rate of slot `n`.
    pub fn weighted_downlink_slot(&self, schedule: &Schedule, n: usize) -> f64 {
        (0..self.downlink.rows())
            .map(|j| schedule.downlink[(j, n)] * self.downlink[(j, n)])
            .sum()
    }

    /// Schedule-weighted uplink rate of slot `n`.
    pub fn weighted_uplink_slot(&self, schedule: &Schedule, n: usize) -> f64 {
        (0..self.uplink.rows())
            .map(|i| schedule.uplink[(i, n)] * self.uplink[(i, n)])
            .sum()
    }
}

/// Evaluate every rate and the weighted objective for the given state.
///
/// Works for relaxed and binary schedules; summation order is slot-major
/// ascending, users ascending within a slot.
pub fn objective(
    schedule: &Schedule,
    power: &PowerProfile,
    gains: &GainTables,
    model: &RateModel,
) -> RateBreakdown {
    let n_slots = schedule.num_slots();
    let (kd, ku) = (schedule.downlink.rows(), schedule.uplink.rows());
    let mut downlink = Mat::zeros(kd, n_slots);
    let mut uplink = Mat::zeros(ku, n_slots);
    let mut total = 0.0;
    for n in 0..n_slots {
        for j in 0..kd {
            let r = downlink_rate(j, n, schedule, power, gains, model);
            downlink[(j, n)] = r;
            total += schedule.downlink[(j, n)] * r;
        }
        for i in 0..ku {
            let r = uplink_rate(i, n, power, gains, model);
            uplink[(i, n)] = r;
            total += schedule.uplink[(i, n)] * r;
        }
    }
    RateBreakdown {
        downlink,
        uplink,
        weighted_objective: total,
    }
}

/// Convenience wrapper: build standard gains for `trajectory` and evaluate
/// under the scenario's own radio model.
pub fn evaluate(
    scenario: &Scenario,
    schedule: &Schedule,
    trajectory: &Trajectory,
    power: &PowerProfile,
) -> RateBreakdown {
    let gains = crate::channel::build_gain_tables(scenario, trajectory);
    objective(schedule, power, &gains, &RateModel::new(scenario))
}
