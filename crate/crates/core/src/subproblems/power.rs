//! Stage 4: uplink transmit power control.
//!
//! The downlink rates are convex in the uplink powers (they sit in the
//! interference denominator), so each SCA round replaces them by their
//! tangent at the current power, after which the surrogate decouples into
//! one concave scalar problem per (user, slot) cell with a closed-form
//! box-clipped optimum.

use super::{relative_gain, ScaSettings, ASCENT_TOL};
use crate::channel::GainTables;
use crate::rates::{self, RateModel};
use crate::scenario::{PowerProfile, Schedule};
use std::f64::consts::{LN_2, LOG2_E};

/// First-order lower bound of the downlink rate of user `j` in slot `n` as a
/// function of the uplink power column, expanded at `expansion_p`. Exact at
/// the expansion point and a global lower bound elsewhere.
pub fn phi_lb_power(
    j: usize,
    n: usize,
    candidate_p: &[f64],
    expansion_p: &[f64],
    schedule: &Schedule,
    gains: &GainTables,
    model: &RateModel,
) -> f64 {
    let signal = model.uav_tx_power * gains.uav_downlink[(j, n)];
    let denom_r = interference_at(j, n, expansion_p, schedule, gains, model);
    let mut value = model.scale * rates::log2_1p(signal / denom_r);
    for i in 0..candidate_p.len() {
        let slope = power_slope(j, n, i, denom_r, schedule, gains, model);
        value -= slope * (candidate_p[i] - expansion_p[i]);
    }
    value
}

/// Interference-plus-noise at downlink user `j` for an explicit power
/// column; accumulation order matches `rates::downlink_interference`.
fn interference_at(
    j: usize,
    n: usize,
    p: &[f64],
    schedule: &Schedule,
    gains: &GainTables,
    model: &RateModel,
) -> f64 {
    let mut acc = 0.0;
    for (i, &pi) in p.iter().enumerate() {
        acc += schedule.uplink[(i, n)] * gains.cross[(i, j)] * pi;
    }
    acc + model.noise_power
}

/// Magnitude of d/dp_i of the downlink rate of user `j` at an expansion
/// point with interference-plus-noise `denom_r` (the rate falls in p_i).
/// Includes the model's rate prefactor.
fn power_slope(
    j: usize,
    n: usize,
    i: usize,
    denom_r: f64,
    schedule: &Schedule,
    gains: &GainTables,
    model: &RateModel,
) -> f64 {
    let signal = model.uav_tx_power * gains.uav_downlink[(j, n)];
    let denom_r = denom_r.max(model.noise_power);
    model.scale * gains.cross[(i, j)] * schedule.uplink[(i, n)] * signal * LOG2_E
        / (denom_r * (denom_r + signal))
}

/// Stage 4: successive convex approximation over the uplink powers.
///
/// Per cell (i, n) the surrogate is `x * log2(1 + b p) - a p` over
/// `[0, P_max]` with `b` the uplink SNR slope and `a` the weighted
/// interference cost; its box-clipped stationary point is
/// `x / (a ln 2) - 1/b`. Cells with `a = 0` jump to `P_max` when scheduled
/// and stay untouched otherwise. Updates re-expand until the objective
/// stops improving; every sweep is guarded against the true objective.
pub fn solve_p4_power(
    power: &mut PowerProfile,
    schedule: &Schedule,
    gains: &GainTables,
    model: &RateModel,
    max_power: f64,
    settings: &ScaSettings,
) {
    let ku = schedule.uplink.rows();
    let kd = schedule.downlink.rows();
    let n_slots = schedule.num_slots();
    let mut current = rates::objective(schedule, power, gains, model).weighted_objective;

    for _ in 0..settings.max_iters_power {
        let mut next = power.clone();
        for n in 0..n_slots {
            let expansion = power.p.col(n);
            let denoms: Vec<f64> = (0..kd)
                .map(|j| interference_at(j, n, &expansion, schedule, gains, model))
                .collect();
            for i in 0..ku {
                let x = model.scale * schedule.uplink[(i, n)];
                let mut a = 0.0;
                for j in 0..kd {
                    a += schedule.downlink[(j, n)]
                        * power_slope(j, n, i, denoms[j], schedule, gains, model);
                }
                if a == 0.0 {
                    if x > 0.0 {
                        next.p[(i, n)] = max_power;
                    }
                    continue; // unscheduled and interference-free: untouched
                }
                let b = gains.uplink_uav[(i, n)]
                    / (model.self_interference + model.noise_power);
                let stationary = x / (a * LN_2) - 1.0 / b;
                next.p[(i, n)] = stationary.clamp(0.0, max_power);
            }
        }
        if next.p == power.p {
            break; // fixed point
        }
        let trial = rates::objective(schedule, &next, gains, model).weighted_objective;
        if trial < current - ASCENT_TOL * current.abs().max(1.0) {
            break; // guard: keep the current powers
        }
        let gain = relative_gain(current, trial);
        power.p = next.p;
        current = trial;
        if gain < settings.inner_tol {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::Mat;
    use crate::scenario::ScheduleMode;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn model() -> RateModel {
        RateModel {
            uav_tx_power: 0.1,
            noise_power: 1e-14,
            self_interference: 1e-13,
            scale: 1.0,
        }
    }

    fn random_instance(
        rng: &mut ChaCha8Rng,
        kd: usize,
        ku: usize,
        n: usize,
    ) -> (Schedule, PowerProfile, GainTables) {
        let mut schedule = Schedule {
            downlink: Mat::zeros(kd, n),
            uplink: Mat::zeros(ku, n),
            mode: ScheduleMode::Relaxed,
        };
        for slot in 0..n {
            schedule.downlink[(rng.gen_range(0..kd), slot)] = 1.0;
            schedule.uplink[(rng.gen_range(0..ku), slot)] = 1.0;
        }
        let mut power = PowerProfile { p: Mat::zeros(ku, n) };
        let mut gains = GainTables {
            uav_downlink: Mat::zeros(kd, n),
            uplink_uav: Mat::zeros(ku, n),
            cross: Mat::zeros(ku, kd),
        };
        for slot in 0..n {
            for i in 0..ku {
                power.p[(i, slot)] = rng.gen_range(0.0..0.1);
                gains.uplink_uav[(i, slot)] = rng.gen_range(1e-11..1e-10);
            }
            for j in 0..kd {
                gains.uav_downlink[(j, slot)] = rng.gen_range(1e-11..1e-10);
            }
        }
        for i in 0..ku {
            for j in 0..kd {
                gains.cross[(i, j)] = rng.gen_range(1e-13..1e-11);
            }
        }
        (schedule, power, gains)
    }

    #[test]
    fn power_lb_tight_at_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let (schedule, power, gains) = random_instance(&mut rng, 2, 3, 4);
        let m = model();
        for n in 0..4 {
            let expansion = power.p.col(n);
            for j in 0..2 {
                let lb = phi_lb_power(j, n, &expansion, &expansion, &schedule, &gains, &m);
                let truth = rates::downlink_rate(j, n, &schedule, &power, &gains, &m);
                assert_relative_eq!(lb, truth, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn power_lb_is_global_lower_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let (schedule, mut power, gains) = random_instance(&mut rng, 2, 3, 1);
        let m = model();
        let expansion = power.p.col(0);
        for _ in 0..1000 {
            let candidate: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..0.1)).collect();
            for j in 0..2 {
                let lb = phi_lb_power(j, 0, &candidate, &expansion, &schedule, &gains, &m);
                power.p.set_col(0, &candidate);
                let truth = rates::downlink_rate(j, 0, &schedule, &power, &gains, &m);
                assert!(lb <= truth + 1e-12, "surrogate {lb} above true {truth}");
            }
        }
    }

    #[test]
    fn power_lb_constant_without_scheduled_uplink() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let (mut schedule, power, gains) = random_instance(&mut rng, 2, 3, 1);
        schedule.uplink = Mat::zeros(3, 1);
        let m = model();
        let expansion = power.p.col(0);
        let reference = phi_lb_power(0, 0, &expansion, &expansion, &schedule, &gains, &m);
        for _ in 0..50 {
            let candidate: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..0.1)).collect();
            assert_relative_eq!(
                phi_lb_power(0, 0, &candidate, &expansion, &schedule, &gains, &m),
                reference,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn no_downlink_scheduling_pushes_scheduled_cells_to_max() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let (mut schedule, mut power, gains) = random_instance(&mut rng, 2, 2, 3);
        schedule.downlink = Mat::zeros(2, 3);
        let m = model();
        solve_p4_power(&mut power, &schedule, &gains, &m, 0.1, &ScaSettings::default());
        for n in 0..3 {
            for i in 0..2 {
                if schedule.uplink[(i, n)] > 0.0 {
                    assert_eq!(power.p[(i, n)], 0.1);
                }
            }
        }
    }

    #[test]
    fn unscheduled_users_keep_their_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let (mut schedule, mut power, gains) = random_instance(&mut rng, 2, 2, 3);
        for n in 0..3 {
            schedule.uplink[(0, n)] = 0.0; // user 0 never scheduled
        }
        let before: Vec<f64> = (0..3).map(|n| power.p[(0, n)]).collect();
        let m = model();
        solve_p4_power(&mut power, &schedule, &gains, &m, 0.1, &ScaSettings::default());
        for n in 0..3 {
            assert_eq!(power.p[(0, n)], before[n]);
        }
    }

    #[test]
    fn closed_form_matches_grid_search_of_surrogate() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for _ in 0..20 {
            let (schedule, power, gains) = random_instance(&mut rng, 1, 1, 1);
            let m = model();
            let expansion = power.p.col(0);
            let x = m.scale * schedule.uplink[(0, 0)];
            let denom = interference_at(0, 0, &expansion, &schedule, &gains, &m);
            let a = schedule.downlink[(0, 0)] * power_slope(0, 0, 0, denom, &schedule, &gains, &m);
            let b = gains.uplink_uav[(0, 0)] / (m.self_interference + m.noise_power);

            let closed = if a == 0.0 {
                if x > 0.0 {
                    0.1
                } else {
                    expansion[0]
                }
            } else {
                (x / (a * LN_2) - 1.0 / b).clamp(0.0, 0.1)
            };

            // 1e-4 W grid over [0, P_max] of the true surrogate.
            let surrogate = |p: f64| x * rates::log2_1p(b * p) - a * p;
            let mut best_p = 0.0;
            let mut best_v = f64::NEG_INFINITY;
            let mut p = 0.0;
            while p <= 0.1 + 1e-12 {
                let v = surrogate(p);
                if v > best_v {
                    best_v = v;
                    best_p = p;
                }
                p += 1e-4;
            }
            assert!(
                (closed - best_p).abs() <= 2e-4,
                "closed form {closed} vs grid {best_p}"
            );
        }
    }

    #[test]
    fn sweep_never_decreases_objective() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        for _ in 0..10 {
            let (schedule, mut power, gains) = random_instance(&mut rng, 2, 2, 5);
            let m = model();
            let before = rates::objective(&schedule, &power, &gains, &m).weighted_objective;
            solve_p4_power(&mut power, &schedule, &gains, &m, 0.1, &ScaSettings::default());
            let after = rates::objective(&schedule, &power, &gains, &m).weighted_objective;
            assert!(after >= before - 1e-9);
            power.validate(0.1).unwrap();
        }
    }
}
