//! Deterministic channel power gains feeding the rate expressions.
//!
//! Air-to-ground links are pure line of sight: gain beta0 / (d^2 + H^2) with
//! horizontal distance d and altitude H. Ground-to-ground cross links from
//! uplink to downlink users fade with exponent alpha; the unit-mean fading
//! factor enters all rate expressions through its expectation, so the tables
//! hold beta0 * d^-alpha directly.

use crate::mat::Mat;
use crate::scenario::{Point, Scenario, Trajectory, MIN_GROUND_DISTANCE};

/// Line-of-sight air-to-ground channel power gain.
///
/// `beta0 / (||q - w||^2 + H^2)` for UAV horizontal position `q`, user
/// position `w`, and altitude `H`.
pub fn los_gain(q: Point, w: Point, altitude: f64, beta0: f64) -> f64 {
    beta0 / (q.dist_sq(w) + altitude * altitude)
}

/// Expected ground-to-ground cross-link power gain from an uplink user to a
/// downlink user: `beta0 * max(d, 1 m)^-alpha`.
///
/// The clamp keeps co-located users from exceeding the 1 m reference gain.
pub fn cross_gain(w_uplink: Point, w_downlink: Point, beta0: f64, alpha: f64) -> f64 {
    let d = w_uplink.dist(w_downlink).max(MIN_GROUND_DISTANCE);
    beta0 * d.powf(-alpha)
}

/// Per-slot air-to-ground gains plus the trajectory-independent cross-link
/// table.
///
/// Rows are users, columns slots: `uav_downlink[(j, n)]` is the UAV to
/// downlink-user-j gain in slot n, `uplink_uav[(i, n)]` the uplink-user-i to
/// UAV gain. `cross[(i, j)]` couples uplink user i into downlink user j and
/// depends only on user geometry. The air-to-ground tables must be rebuilt
/// whenever the trajectory changes.
#[derive(Debug, Clone, PartialEq)]
pub struct GainTables {
    pub uav_downlink: Mat,
    pub uplink_uav: Mat,
    pub cross: Mat,
}

/// Rebuilds [`GainTables`] for successive trajectories, with an optional
/// scale on the cross-link table (the no-interference and half-duplex
/// schemes set it to zero).
#[derive(Debug, Clone, Copy)]
pub struct GainBuilder<'a> {
    scenario: &'a Scenario,
    cross_scale: f64,
}

impl<'a> GainBuilder<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        GainBuilder {
            scenario,
            cross_scale: 1.0,
        }
    }

    /// Builder with every cross-link gain forced to zero.
    pub fn without_cross_interference(scenario: &'a Scenario) -> Self {
        GainBuilder {
            scenario,
            cross_scale: 0.0,
        }
    }

    pub fn build(&self, trajectory: &Trajectory) -> GainTables {
        let s = self.scenario;
        let n_slots = s.num_slots;
        let mut uav_downlink = Mat::zeros(s.num_downlink(), n_slots);
        let mut uplink_uav = Mat::zeros(s.num_uplink(), n_slots);
        for n in 0..n_slots {
            let q = trajectory.slot_position(n);
            for (j, &w) in s.downlink_users.iter().enumerate() {
                uav_downlink[(j, n)] = los_gain(q, w, s.altitude, s.beta0);
            }
            for (i, &w) in s.uplink_users.iter().enumerate() {
                uplink_uav[(i, n)] = los_gain(q, w, s.altitude, s.beta0);
            }
        }
        let mut cross = Mat::zeros(s.num_uplink(), s.num_downlink());
        for (i, &wu) in s.uplink_users.iter().enumerate() {
            for (j, &wd) in s.downlink_users.iter().enumerate() {
                cross[(i, j)] =
                    self.cross_scale * cross_gain(wu, wd, s.beta0, s.pathloss_alpha);
            }
        }
        GainTables {
            uav_downlink,
            uplink_uav,
            cross,
        }
    }
}

/// One-shot table construction under the standard (full cross interference)
/// model.
pub fn build_gain_tables(scenario: &Scenario, trajectory: &Trajectory) -> GainTables {
    GainBuilder::new(scenario).build(trajectory)
}
