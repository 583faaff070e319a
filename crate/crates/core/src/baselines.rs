//! The comparison schemes, all evaluated through the solver's single
//! objective path with scheme-specific overrides.

use crate::bcd::{self, BcdSettings, RunPlan, Solution, TrajectoryInit};
use crate::error::Error;
use crate::scenario::{Point, Scenario};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// The proposed design and the five benchmark schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchemeId {
    /// Full pipeline: scheduling, trajectory, and power all optimized.
    Proposed,
    /// Cross interference removed from optimization and evaluation; an
    /// upper bound on everything else.
    IdealNoInterference,
    /// Uplink users transmit at P_max; stage 4 skipped.
    NoPowerControl,
    /// Trajectory pinned to the constant-speed straight line.
    StraightFlight,
    /// Hover at the position minimizing the summed squared distance to all
    /// users (their centroid); endpoint constraints waived.
    Static,
    /// Two half-length sub-slots per slot: no cross interference, no
    /// self-interference, every rate halved; power stays at P_max.
    HalfDuplex,
}

impl SchemeId {
    pub fn all() -> [SchemeId; 6] {
        [
            SchemeId::Proposed,
            SchemeId::IdealNoInterference,
            SchemeId::NoPowerControl,
            SchemeId::StraightFlight,
            SchemeId::Static,
            SchemeId::HalfDuplex,
        ]
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SchemeId::Proposed => "proposed",
            SchemeId::IdealNoInterference => "ideal_no_interference",
            SchemeId::NoPowerControl => "no_power_control",
            SchemeId::StraightFlight => "straight_flight",
            SchemeId::Static => "static",
            SchemeId::HalfDuplex => "half_duplex",
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "proposed" => Ok(SchemeId::Proposed),
            "ideal_no_interference" | "ideal" => Ok(SchemeId::IdealNoInterference),
            "no_power_control" | "nopc" => Ok(SchemeId::NoPowerControl),
            "straight_flight" | "straight" => Ok(SchemeId::StraightFlight),
            "static" => Ok(SchemeId::Static),
            "half_duplex" | "hd" => Ok(SchemeId::HalfDuplex),
            other => Err(Error::validation(format!(
                "unknown scheme `{other}` (expected one of proposed, ideal_no_interference, \
                 no_power_control, straight_flight, static, half_duplex)"
            ))),
        }
    }
}

/// Hover position of the static scheme: the centroid of all user positions,
/// which minimizes the summed squared distances.
pub fn static_position(scenario: &Scenario) -> Point {
    let mut sum = Point::new(0.0, 0.0);
    let users = scenario
        .downlink_users
        .iter()
        .chain(scenario.uplink_users.iter());
    let mut count = 0usize;
    for &w in users {
        sum = sum + w;
        count += 1;
    }
    sum * (1.0 / count as f64)
}

/// Solver plan implementing `scheme` on `scenario`.
pub fn plan_for(scheme: SchemeId, scenario: &Scenario) -> RunPlan {
    let base = RunPlan::proposed();
    match scheme {
        SchemeId::Proposed => base,
        SchemeId::IdealNoInterference => RunPlan {
            label: scheme,
            zero_cross_interference: true,
            ..base
        },
        SchemeId::NoPowerControl => RunPlan {
            label: scheme,
            optimize_power: false,
            ..base
        },
        SchemeId::StraightFlight => RunPlan {
            label: scheme,
            optimize_trajectory: false,
            ..base
        },
        SchemeId::Static => RunPlan {
            label: scheme,
            optimize_trajectory: false,
            initial_trajectory: TrajectoryInit::Hover(static_position(scenario)),
            enforce_endpoints: false,
            ..base
        },
        SchemeId::HalfDuplex => RunPlan {
            label: scheme,
            zero_cross_interference: true,
            self_interference_override: Some(0.0),
            rate_scale: 0.5,
            optimize_power: false,
            ..base
        },
    }
}

/// Run any scheme on a scenario.
pub fn run_scheme(
    scheme: SchemeId,
    scenario: &Scenario,
    settings: &BcdSettings,
) -> Result<Solution, Error> {
    bcd::run_with_plan(scenario, settings, &plan_for(scheme, scenario))
}

pub fn run_ideal_no_interference(
    scenario: &Scenario,
    settings: &BcdSettings,
) -> Result<Solution, Error> {
    run_scheme(SchemeId::IdealNoInterference, scenario, settings)
}

pub fn run_no_power_control(
    scenario: &Scenario,
    settings: &BcdSettings,
) -> Result<Solution, Error> {
    run_scheme(SchemeId::NoPowerControl, scenario, settings)
}

pub fn run_straight_flight(
    scenario: &Scenario,
    settings: &BcdSettings,
) -> Result<Solution, Error> {
    run_scheme(SchemeId::StraightFlight, scenario, settings)
}

pub fn run_static(scenario: &Scenario, settings: &BcdSettings) -> Result<Solution, Error> {
    run_scheme(SchemeId::Static, scenario, settings)
}

pub fn run_half_duplex(scenario: &Scenario, settings: &BcdSettings) -> Result<Solution, Error> {
    run_scheme(SchemeId::HalfDuplex, scenario, settings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bcd::validate_solution;
    use crate::rates::{self, RateModel};
    use crate::scenario::{PowerProfile, Schedule, Trajectory};
    use approx::assert_relative_eq;

    fn desk_scenario() -> Scenario {
        Scenario {
            downlink_users: vec![Point::new(220.0, 780.0), Point::new(800.0, 220.0)],
            uplink_users: vec![Point::new(150.0, 700.0), Point::new(870.0, 300.0)],
            altitude: 100.0,
            period: 10.0,
            slot_duration: 0.5,
            num_slots: 20,
            beta0: 1e-6,
            noise_power: 1e-14,
            pathloss_alpha: 3.0,
            uav_tx_power: 0.1,
            max_uplink_power: 0.1,
            vmax: 50.0,
            q_initial: Point::new(0.0, 500.0),
            q_final: Point::new(500.0, 500.0),
            self_interference: 1e-13,
            bandwidth: 1e6,
            tolerance_eps: 1e-3,
        }
    }

    #[test]
    fn scheme_ids_round_trip_and_alias() {
        for scheme in SchemeId::all() {
            assert_eq!(scheme.as_str().parse::<SchemeId>().unwrap(), scheme);
        }
        assert_eq!("hd".parse::<SchemeId>().unwrap(), SchemeId::HalfDuplex);
        assert_eq!("ideal".parse::<SchemeId>().unwrap(), SchemeId::IdealNoInterference);
        assert!("turbo".parse::<SchemeId>().is_err());
    }

    #[test]
    fn centroid_cases() {
        let mut s = desk_scenario();
        s.downlink_users = vec![Point::new(0.0, 0.0), Point::new(2.0, 0.0)];
        s.uplink_users = vec![Point::new(0.0, 2.0), Point::new(2.0, 2.0)];
        assert_eq!(static_position(&s), Point::new(1.0, 1.0));

        s.downlink_users = vec![Point::new(321.0, 77.0)];
        s.uplink_users.clear();
        s.uplink_users.push(Point::new(321.0, 77.0));
        assert_eq!(static_position(&s), Point::new(321.0, 77.0));
    }

    #[test]
    fn centroid_matches_grid_search() {
        let s = desk_scenario();
        let centroid = static_position(&s);
        let objective = |q: Point| {
            s.downlink_users
                .iter()
                .chain(s.uplink_users.iter())
                .map(|w| q.dist_sq(*w))
                .sum::<f64>()
        };
        let mut best = centroid;
        let mut best_v = f64::INFINITY;
        let mut y = centroid.y - 5.0;
        while y <= centroid.y + 5.0 {
            let mut x = centroid.x - 5.0;
            while x <= centroid.x + 5.0 {
                let p = Point::new(x, y);
                let v = objective(p);
                if v < best_v {
                    best_v = v;
                    best = p;
                }
                x += 0.1;
            }
            y += 0.1;
        }
        assert!(centroid.dist(best) <= 0.2);
    }

    #[test]
    fn ideal_upper_bounds_proposed_and_keeps_full_power() {
        let s = desk_scenario();
        let settings = BcdSettings::default();
        let ideal = run_ideal_no_interference(&s, &settings).unwrap();
        let proposed = bcd::run(&s, &settings).unwrap();
        assert!(ideal.final_binary_objective >= proposed.final_binary_objective - 1e-9);
        assert!(ideal.power.p.iter().all(|p| p == s.max_uplink_power));
        validate_solution(&ideal, &s).unwrap();
    }

    #[test]
    fn no_power_control_fixes_power_and_stays_below_proposed() {
        let s = desk_scenario();
        let settings = BcdSettings::default();
        let npc = run_no_power_control(&s, &settings).unwrap();
        assert!(npc.power.p.iter().all(|p| p == s.max_uplink_power));
        for pair in npc.objective_trace.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-9 * pair[0].max(1.0));
        }
        let proposed = bcd::run(&s, &settings).unwrap();
        assert!(npc.final_binary_objective <= proposed.final_binary_objective + 1e-9);
    }

    #[test]
    fn straight_flight_keeps_the_line() {
        let s = desk_scenario();
        let solution = run_straight_flight(&s, &BcdSettings::default()).unwrap();
        assert_eq!(solution.trajectory, Trajectory::straight_line(&s));
        validate_solution(&solution, &s).unwrap();
    }

    #[test]
    fn straight_flight_equals_proposed_without_trajectory_freedom() {
        // N = 1: both waypoints pinned, so stage 3 has nothing to move.
        let mut s = desk_scenario();
        s.num_slots = 1;
        s.period = 0.5;
        s.q_final = Point::new(20.0, 500.0);
        let settings = BcdSettings::default();
        let a = run_straight_flight(&s, &settings).unwrap();
        let b = bcd::run(&s, &settings).unwrap();
        assert_eq!(a.final_binary_objective, b.final_binary_objective);
        assert_eq!(a.trajectory, b.trajectory);
    }

    #[test]
    fn static_scheme_hovers_at_centroid() {
        let s = desk_scenario();
        let solution = run_static(&s, &BcdSettings::default()).unwrap();
        let centroid = static_position(&s);
        assert!(solution.trajectory.waypoints.iter().all(|w| *w == centroid));
        validate_solution(&solution, &s).unwrap();
    }

    #[test]
    fn half_duplex_halves_rates_at_fixed_state() {
        // At identical trajectory, schedules, and powers, the half-duplex
        // rates are exactly half of the no-interference full-duplex rates.
        let s = desk_scenario();
        let schedule = Schedule::uniform(&s);
        let power = PowerProfile::full_power(&s);
        let trajectory = Trajectory::straight_line(&s);
        let hd_plan = plan_for(SchemeId::HalfDuplex, &s);
        let hd_gains = hd_plan.gain_builder(&s).build(&trajectory);
        let hd_model = hd_plan.rate_model(&s);
        let ideal_plan = plan_for(SchemeId::IdealNoInterference, &s);
        let ideal_gains = ideal_plan.gain_builder(&s).build(&trajectory);
        let ideal_model = ideal_plan.rate_model(&s).with_self_interference(f64::MIN_POSITIVE);

        let hd = rates::objective(&schedule, &power, &hd_gains, &hd_model);
        let ideal = rates::objective(&schedule, &power, &ideal_gains, &ideal_model);
        assert_relative_eq!(
            hd.weighted_objective,
            0.5 * ideal.weighted_objective,
            max_relative = 1e-9
        );
        for n in 0..s.num_slots {
            for j in 0..s.num_downlink() {
                assert_relative_eq!(
                    hd.downlink[(j, n)],
                    0.5 * ideal.downlink[(j, n)],
                    max_relative = 1e-9
                );
            }
        }
    }

    #[test]
    fn half_duplex_approaches_half_of_ideal_when_interference_is_negligible() {
        // Far-apart users and vanishing self-interference: full duplex is
        // essentially interference-free, so HD lands near half of ideal.
        let mut s = desk_scenario();
        s.self_interference = 1e-18;
        let settings = BcdSettings::default();
        let hd = run_half_duplex(&s, &settings).unwrap();
        let ideal = run_ideal_no_interference(&s, &settings).unwrap();
        let ratio = hd.final_binary_objective / ideal.final_binary_objective;
        assert!((ratio - 0.5).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn half_duplex_loses_to_proposed() {
        let s = desk_scenario();
        let settings = BcdSettings::default();
        let hd = run_half_duplex(&s, &settings).unwrap();
        let proposed = bcd::run(&s, &settings).unwrap();
        assert!(hd.final_binary_objective < proposed.final_binary_objective);
    }

    #[test]
    fn identical_model_for_evaluation_and_reporting() {
        // The solution's stored breakdown must come from the scheme's own
        // model: re-evaluating reproduces the reported binary objective.
        let s = desk_scenario();
        let settings = BcdSettings::default();
        for scheme in SchemeId::all() {
            let solution = run_scheme(scheme, &s, &settings).unwrap();
            let plan = plan_for(scheme, &s);
            let gains = plan.gain_builder(&s).build(&solution.trajectory);
            let again = rates::objective(
                &solution.schedule,
                &solution.power,
                &gains,
                &plan.rate_model(&s),
            );
            assert_eq!(again.weighted_objective, solution.final_binary_objective);
        }
    }
}
