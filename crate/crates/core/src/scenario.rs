//! Problem instances: domain types, unit conversions, validation, and the
//! scenario file format.
//!
//! A [`Scenario`] is immutable once constructed and owns every parameter of
//! the optimization problem in linear units (Watts, linear gains, meters,
//! seconds). Scenario files use dB/dBm for the radio quantities; conversion
//! happens on load.

use crate::error::Error;
use crate::mat::Mat;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::path::Path;

/// Ground-to-ground distances are clamped below this value (meters) before
/// applying the d^-alpha path loss. The reference gain beta0 is defined at
/// 1 m, so gains above beta0 are unphysical.
pub const MIN_GROUND_DISTANCE: f64 = 1.0;

/// Slack for geometric feasibility checks (meters), covering projection
/// arithmetic noise.
pub const FEAS_TOL: f64 = 1e-9;

/// 2D horizontal position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn dist_sq(self, other: Point) -> f64 {
        (self - other).norm_sq()
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Convert a dB ratio to linear: 10^(db/10).
pub fn db_to_linear(value_db: f64) -> f64 {
    10f64.powf(value_db / 10.0)
}

/// Convert a linear ratio to dB: 10 log10(x).
pub fn linear_to_db(value: f64) -> f64 {
    10.0 * value.log10()
}

/// Convert dBm to Watts: 10^((dbm - 30)/10).
pub fn dbm_to_watts(value_dbm: f64) -> f64 {
    10f64.powf((value_dbm - 30.0) / 10.0)
}

/// Immutable problem instance.
///
/// All quantities are linear: gains dimensionless, powers in Watts, noise in
/// Watts, geometry in meters, time in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// Downlink user positions (K_D entries).
    pub downlink_users: Vec<Point>,
    /// Uplink user positions (K_U entries).
    pub uplink_users: Vec<Point>,
    /// Fixed flight altitude H in meters.
    pub altitude: f64,
    /// Flight period T in seconds.
    pub period: f64,
    /// Slot duration delta in seconds; `period = num_slots * slot_duration`.
    pub slot_duration: f64,
    /// Number of slots N.
    pub num_slots: usize,
    /// Linear channel power gain at the 1 m reference distance.
    pub beta0: f64,
    /// Receiver noise power sigma^2 in Watts.
    pub noise_power: f64,
    /// Path-loss exponent for ground-to-ground cross links.
    pub pathloss_alpha: f64,
    /// UAV downlink transmit power p_b in Watts.
    pub uav_tx_power: f64,
    /// Per-user uplink transmit power cap P_max in Watts.
    pub max_uplink_power: f64,
    /// Maximum UAV speed in m/s.
    pub vmax: f64,
    /// Initial UAV position.
    pub q_initial: Point,
    /// Final UAV position.
    pub q_final: Point,
    /// Residual self-interference power f_b in Watts, constant over slots.
    pub self_interference: f64,
    /// System bandwidth in Hz. Reporting only; the objective is in bits/s/Hz.
    pub bandwidth: f64,
    /// Relative objective-improvement stopping threshold for the outer loop.
    pub tolerance_eps: f64,
}

impl Scenario {
    pub fn num_downlink(&self) -> usize {
        self.downlink_users.len()
    }

    pub fn num_uplink(&self) -> usize {
        self.uplink_users.len()
    }

    /// Largest step the UAV can take in one slot, in meters.
    pub fn max_step(&self) -> f64 {
        self.vmax * self.slot_duration
    }

    /// Check every instance invariant; the message names the violated one.
    pub fn validate(&self) -> Result<(), Error> {
        if self.downlink_users.is_empty() {
            return Err(Error::validation("downlink_users must have K_D >= 1 entries"));
        }
        if self.uplink_users.is_empty() {
            return Err(Error::validation("uplink_users must have K_U >= 1 entries"));
        }
        if self.num_slots == 0 {
            return Err(Error::validation("num_slots_N must be >= 1"));
        }
        if !(self.slot_duration > 0.0) {
            return Err(Error::validation("slot_duration_delta must be > 0"));
        }
        let expected_t = self.num_slots as f64 * self.slot_duration;
        if (self.period - expected_t).abs() > 1e-9 * expected_t.max(1.0) {
            return Err(Error::validation(format!(
                "period_T = {} must equal N*delta = {}",
                self.period, expected_t
            )));
        }
        for (name, v) in [
            ("beta0", self.beta0),
            ("noise_power_sigma2", self.noise_power),
            ("uav_tx_power_pb", self.uav_tx_power),
            ("max_uplink_power_Pmax", self.max_uplink_power),
            ("self_interference_fb", self.self_interference),
            ("vmax", self.vmax),
            ("altitude_H", self.altitude),
            ("bandwidth_B", self.bandwidth),
            ("tolerance_eps", self.tolerance_eps),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::validation(format!("{name} must be strictly positive")));
            }
        }
        if self.pathloss_alpha < 2.0 {
            return Err(Error::validation("pathloss_alpha must be >= 2"));
        }
        let reach = self.num_slots as f64 * self.max_step();
        let span = self.q_final.dist(self.q_initial);
        if span > reach + FEAS_TOL {
            return Err(Error::validation(format!(
                "endpoints unreachable within T: ||q_final - q_initial|| = {span} m \
                 exceeds N*delta*vmax = {reach} m"
            )));
        }
        Ok(())
    }
}

/// Sequence of N+1 horizontal waypoints with fixed endpoints.
///
/// Waypoint `0` is the initial position and waypoint `N` the final one; the
/// rate in slot `n` (0-based) is evaluated at waypoint `n + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub waypoints: Vec<Point>,
}

impl Trajectory {
    /// Constant-speed straight line from `q_initial` to `q_final` with N+1
    /// equispaced waypoints.
    pub fn straight_line(scenario: &Scenario) -> Self {
        let n = scenario.num_slots;
        let waypoints = (0..=n)
            .map(|k| {
                let t = k as f64 / n as f64;
                scenario.q_initial + (scenario.q_final - scenario.q_initial) * t
            })
            .collect();
        Trajectory { waypoints }
    }

    /// Hover at a single position for all waypoints (static scheme; endpoint
    /// constraints are waived by the caller).
    pub fn hover(position: Point, num_slots: usize) -> Self {
        Trajectory {
            waypoints: vec![position; num_slots + 1],
        }
    }

    /// Number of slots (waypoints minus one).
    pub fn num_slots(&self) -> usize {
        self.waypoints.len() - 1
    }

    /// Position used by rate evaluations in 0-based slot `n`.
    pub fn slot_position(&self, n: usize) -> Point {
        self.waypoints[n + 1]
    }

    /// Check the speed chain and, if `enforce_endpoints`, the endpoint pins.
    pub fn validate(&self, scenario: &Scenario, enforce_endpoints: bool) -> Result<(), Error> {
        if self.waypoints.len() != scenario.num_slots + 1 {
            return Err(Error::validation(format!(
                "trajectory has {} waypoints, expected N+1 = {}",
                self.waypoints.len(),
                scenario.num_slots + 1
            )));
        }
        if enforce_endpoints {
            if self.waypoints[0].dist(scenario.q_initial) > FEAS_TOL {
                return Err(Error::validation("trajectory start differs from q_initial"));
            }
            if self.waypoints[scenario.num_slots].dist(scenario.q_final) > FEAS_TOL {
                return Err(Error::validation("trajectory end differs from q_final"));
            }
        }
        let limit = scenario.max_step() + FEAS_TOL;
        for n in 1..self.waypoints.len() {
            let step = self.waypoints[n].dist(self.waypoints[n - 1]);
            if step > limit {
                return Err(Error::validation(format!(
                    "speed violation at step {n}: {step} m > vmax*delta = {} m",
                    scenario.max_step()
                )));
            }
        }
        Ok(())
    }
}

/// Whether schedule entries are continuous in [0,1] or exact binaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScheduleMode {
    Relaxed,
    Binary,
}

/// Downlink and uplink user-assignment matrices over slots.
///
/// `downlink` is K_D x N, `uplink` K_U x N. Per slot at most unit mass may
/// be assigned in each direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub downlink: Mat,
    pub uplink: Mat,
    pub mode: ScheduleMode,
}

impl Schedule {
    /// Uniform relaxed schedule: every downlink entry 1/K_D, every uplink
    /// entry 1/K_U.
    pub fn uniform(scenario: &Scenario) -> Self {
        Schedule {
            downlink: Mat::filled(
                scenario.num_downlink(),
                scenario.num_slots,
                1.0 / scenario.num_downlink() as f64,
            ),
            uplink: Mat::filled(
                scenario.num_uplink(),
                scenario.num_slots,
                1.0 / scenario.num_uplink() as f64,
            ),
            mode: ScheduleMode::Relaxed,
        }
    }

    pub fn num_slots(&self) -> usize {
        self.downlink.cols()
    }

    pub fn validate(&self) -> Result<(), Error> {
        let tol = FEAS_TOL;
        for (name, m) in [("downlink", &self.downlink), ("uplink", &self.uplink)] {
            for n in 0..m.cols() {
                let mut sum = 0.0;
                for u in 0..m.rows() {
                    let x = m[(u, n)];
                    match self.mode {
                        ScheduleMode::Relaxed => {
                            if !(-tol..=1.0 + tol).contains(&x) {
                                return Err(Error::validation(format!(
                                    "{name} schedule entry ({u},{n}) = {x} outside [0,1]"
                                )));
                            }
                        }
                        ScheduleMode::Binary => {
                            if x != 0.0 && x != 1.0 {
                                return Err(Error::validation(format!(
                                    "{name} schedule entry ({u},{n}) = {x} is not binary"
                                )));
                            }
                        }
                    }
                    sum += x;
                }
                let limit = match self.mode {
                    ScheduleMode::Relaxed => 1.0 + tol,
                    ScheduleMode::Binary => 1.0,
                };
                if sum > limit {
                    return Err(Error::validation(format!(
                        "{name} schedule column {n} sums to {sum} > 1"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Uplink transmit power per user per slot (K_U x N, Watts).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerProfile {
    pub p: Mat,
}

impl PowerProfile {
    /// Every user transmits at P_max in every slot.
    pub fn full_power(scenario: &Scenario) -> Self {
        PowerProfile {
            p: Mat::filled(
                scenario.num_uplink(),
                scenario.num_slots,
                scenario.max_uplink_power,
            ),
        }
    }

    pub fn validate(&self, max_power: f64) -> Result<(), Error> {
        for i in 0..self.p.rows() {
            for n in 0..self.p.cols() {
                let v = self.p[(i, n)];
                if !(0.0..=max_power).contains(&v) {
                    return Err(Error::validation(format!(
                        "power ({i},{n}) = {v} W outside [0, {max_power}]"
                    )));
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Scenario file parsing
// ---------------------------------------------------------------------------

/// Load and validate a scenario from a `key = value` file.
///
/// Recognized keys are the `Scenario` field names (`downlink_users`,
/// `uplink_users`, `altitude_H`, `period_T`, `slot_duration_delta`,
/// `num_slots_N`, `beta0`, `noise_power_sigma2`, `pathloss_alpha`,
/// `uav_tx_power_pb`, `max_uplink_power_Pmax`, `vmax`, `q_initial`,
/// `q_final`, `self_interference_fb`, `bandwidth_B`, `tolerance_eps`) plus
/// the dB-suffixed forms `beta0_db`, `sigma2_dbm`, and `fb_db`, which are
/// converted to linear units on load. Positions are `x,y` pairs and user
/// lists are semicolon-separated pairs. `num_slots_N` may be omitted, in
/// which case N = T/delta. Unknown keys, duplicate keys, and giving both
/// the linear and dB form of a field are errors.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, Error> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_scenario(&text, &path.display().to_string())
}

struct FieldBag<'a> {
    path: &'a str,
    entries: Vec<(String, String, usize)>,
}

impl<'a> FieldBag<'a> {
    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_string(),
            line,
            message: message.into(),
        }
    }

    fn take(&mut self, key: &str) -> Option<(String, usize)> {
        let idx = self.entries.iter().position(|(k, _, _)| k == key)?;
        let (_, value, line) = self.entries.remove(idx);
        Some((value, line))
    }

    fn take_f64(&mut self, key: &str) -> Result<Option<(f64, usize)>, Error> {
        match self.take(key) {
            None => Ok(None),
            Some((raw, line)) => {
                let v: f64 = raw
                    .parse()
                    .map_err(|_| self.err(line, format!("{key}: expected a number, got `{raw}`")))?;
                Ok(Some((v, line)))
            }
        }
    }

    fn require_f64(&mut self, key: &str) -> Result<f64, Error> {
        self.take_f64(key)?
            .map(|(v, _)| v)
            .ok_or_else(|| self.err(0, format!("missing required key `{key}`")))
    }

    fn require_point(&mut self, key: &str) -> Result<Point, Error> {
        let (raw, line) = self
            .take(key)
            .ok_or_else(|| self.err(0, format!("missing required key `{key}`")))?;
        parse_point(&raw).map_err(|m| self.err(line, format!("{key}: {m}")))
    }

    fn require_points(&mut self, key: &str) -> Result<Vec<Point>, Error> {
        let (raw, line) = self
            .take(key)
            .ok_or_else(|| self.err(0, format!("missing required key `{key}`")))?;
        raw.split(';')
            .map(|s| parse_point(s).map_err(|m| self.err(line, format!("{key}: {m}"))))
            .collect()
    }

    /// A field that accepts either a linear key or a dB-suffixed alternate.
    fn radio_field(
        &mut self,
        linear_key: &str,
        db_key: &str,
        convert: fn(f64) -> f64,
    ) -> Result<f64, Error> {
        let linear = self.take_f64(linear_key)?;
        let db = self.take_f64(db_key)?;
        match (linear, db) {
            (Some(_), Some((_, line))) => Err(self.err(
                line,
                format!("`{linear_key}` and `{db_key}` are mutually exclusive"),
            )),
            (Some((v, _)), None) => Ok(v),
            (None, Some((v, _))) => Ok(convert(v)),
            (None, None) => Err(self.err(
                0,
                format!("missing required key `{linear_key}` (or `{db_key}`)"),
            )),
        }
    }
}

fn parse_point(s: &str) -> Result<Point, String> {
    let mut it = s.split(',');
    let x = it
        .next()
        .ok_or("expected `x,y`")?
        .trim()
        .parse::<f64>()
        .map_err(|_| format!("bad x coordinate in `{s}`"))?;
    let y = it
        .next()
        .ok_or("expected `x,y`")?
        .trim()
        .parse::<f64>()
        .map_err(|_| format!("bad y coordinate in `{s}`"))?;
    if it.next().is_some() {
        return Err(format!("too many coordinates in `{s}`"));
    }
    Ok(Point::new(x, y))
}

/// Parse scenario text. `path` is used in error messages only.
pub fn parse_scenario(text: &str, path: &str) -> Result<Scenario, Error> {
    let mut entries = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(Error::Parse {
            path: path.to_string(),
            line: lineno + 1,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        let key = key.trim().to_string();
        if entries.iter().any(|(k, _, _)| *k == key) {
            return Err(Error::Parse {
                path: path.to_string(),
                line: lineno + 1,
                message: format!("duplicate key `{key}`"),
            });
        }
        entries.push((key, value.trim().to_string(), lineno + 1));
    }
    let mut bag = FieldBag { path, entries };

    let downlink_users = bag.require_points("downlink_users")?;
    let uplink_users = bag.require_points("uplink_users")?;
    let altitude = bag.require_f64("altitude_H")?;
    let period = bag.require_f64("period_T")?;
    let slot_duration = bag.require_f64("slot_duration_delta")?;
    let num_slots_given = bag.take_f64("num_slots_N")?;
    let beta0 = bag.radio_field("beta0", "beta0_db", db_to_linear)?;
    let noise_power = bag.radio_field("noise_power_sigma2", "sigma2_dbm", dbm_to_watts)?;
    let pathloss_alpha = bag.require_f64("pathloss_alpha")?;
    let uav_tx_power = bag.require_f64("uav_tx_power_pb")?;
    let max_uplink_power = bag.require_f64("max_uplink_power_Pmax")?;
    let vmax = bag.require_f64("vmax")?;
    let q_initial = bag.require_point("q_initial")?;
    let q_final = bag.require_point("q_final")?;
    let self_interference = bag.radio_field("self_interference_fb", "fb_db", db_to_linear)?;
    let bandwidth = bag.require_f64("bandwidth_B")?;
    let tolerance_eps = bag.require_f64("tolerance_eps")?;

    if let Some((key, _, line)) = bag.entries.first() {
        return Err(Error::Parse {
            path: path.to_string(),
            line: *line,
            message: format!("unknown key `{key}`"),
        });
    }

    let num_slots = match num_slots_given {
        Some((v, line)) => {
            if v.fract() != 0.0 || v < 1.0 {
                return Err(Error::Parse {
                    path: path.to_string(),
                    line,
                    message: format!("num_slots_N must be a positive integer, got {v}"),
                });
            }
            v as usize
        }
        None => {
            let n = (period / slot_duration).round();
            if n < 1.0 {
                return Err(Error::validation(format!(
                    "period_T / slot_duration_delta = {} gives no slots",
                    period / slot_duration
                )));
            }
            n as usize
        }
    };

    let scenario = Scenario {
        downlink_users,
        uplink_users,
        altitude,
        period,
        slot_duration,
        num_slots,
        beta0,
        noise_power,
        pathloss_alpha,
        uav_tx_power,
        max_uplink_power,
        vmax,
        q_initial,
        q_final,
        self_interference,
        bandwidth,
        tolerance_eps,
    };
    scenario.validate()?;
    Ok(scenario)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const PAPER_DEFAULT: &str = "\
# paper radio parameters, desk-scale user set
downlink_users = 220,780; 800,220
uplink_users = 150,700; 870,300
altitude_H = 100
period_T = 30
slot_duration_delta = 0.5
beta0_db = -60
sigma2_dbm = -110
pathloss_alpha = 3
uav_tx_power_pb = 0.1
max_uplink_power_Pmax = 0.1
vmax = 50
q_initial = 0,500
q_final = 1000,500
fb_db = -130
bandwidth_B = 1e6
tolerance_eps = 1e-3
";

    fn write_temp(text: &str) -> tempfile::NamedTempFile {
        use std::io::Write;
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn db_conversions() {
        assert_eq!(db_to_linear(0.0), 1.0);
        assert_relative_eq!(db_to_linear(-60.0), 1e-6, max_relative = 1e-14);
        assert_relative_eq!(dbm_to_watts(-110.0), 1e-14, max_relative = 1e-14);
    }

    proptest! {
        #[test]
        fn db_round_trip(x in -200.0..0.0f64) {
            let back = linear_to_db(db_to_linear(x));
            prop_assert!((back - x).abs() <= 1e-12);
        }
    }

    #[test]
    fn loads_paper_default_with_unit_conversion() {
        let f = write_temp(PAPER_DEFAULT);
        let s = load_scenario(f.path()).unwrap();
        assert_relative_eq!(s.beta0, 1e-6, max_relative = 1e-14);
        assert_relative_eq!(s.noise_power, 1e-14, max_relative = 1e-14);
        assert_relative_eq!(s.self_interference, 1e-13, max_relative = 1e-14);
        assert_eq!(s.num_slots, 60); // N = T/delta = 30/0.5
        assert_eq!(s.q_initial, Point::new(0.0, 500.0));
        assert_eq!(s.q_final, Point::new(1000.0, 500.0));
        assert_eq!(s.num_downlink(), 2);
        assert_eq!(s.num_uplink(), 2);
    }

    #[test]
    fn unreachable_endpoints_rejected() {
        // 1000 m span but only 10 s * 50 m/s = 500 m of travel budget.
        let text = PAPER_DEFAULT.replace("period_T = 30", "period_T = 10");
        let f = write_temp(&text);
        let err = load_scenario(f.path()).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "got {err:?}");
        assert!(err.to_string().contains("unreachable"));
    }

    #[test]
    fn unknown_key_rejected() {
        let text = format!("{PAPER_DEFAULT}mystery_knob = 3\n");
        let f = write_temp(&text);
        let err = load_scenario(f.path()).unwrap_err();
        assert!(err.to_string().contains("unknown key"), "got {err}");
    }

    #[test]
    fn duplicate_and_conflicting_keys_rejected() {
        let text = format!("{PAPER_DEFAULT}vmax = 60\n");
        let f = write_temp(&text);
        assert!(load_scenario(f.path())
            .unwrap_err()
            .to_string()
            .contains("duplicate"));

        let text = format!("{PAPER_DEFAULT}beta0 = 1e-6\n");
        let f = write_temp(&text);
        assert!(load_scenario(f.path())
            .unwrap_err()
            .to_string()
            .contains("mutually exclusive"));
    }

    #[test]
    fn explicit_slot_count_must_match_period() {
        let text = format!("{PAPER_DEFAULT}num_slots_N = 60\n");
        let f = write_temp(&text);
        assert_eq!(load_scenario(f.path()).unwrap().num_slots, 60);

        let text = format!("{PAPER_DEFAULT}num_slots_N = 59\n");
        let f = write_temp(&text);
        assert!(load_scenario(f.path())
            .unwrap_err()
            .to_string()
            .contains("N*delta"));
    }

    #[test]
    fn load_is_deterministic() {
        let f = write_temp(PAPER_DEFAULT);
        let a = load_scenario(f.path()).unwrap();
        let b = load_scenario(f.path()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn straight_line_is_equispaced() {
        let f = write_temp(PAPER_DEFAULT);
        let s = load_scenario(f.path()).unwrap();
        let t = Trajectory::straight_line(&s);
        assert_eq!(t.waypoints.len(), 61);
        for (n, w) in t.waypoints.iter().enumerate() {
            assert_relative_eq!(w.x, 1000.0 * n as f64 / 60.0, max_relative = 1e-12);
            assert_eq!(w.y, 500.0);
        }
        t.validate(&s, true).unwrap();
    }

    #[test]
    fn trajectory_speed_violation_detected() {
        let f = write_temp(PAPER_DEFAULT);
        let s = load_scenario(f.path()).unwrap();
        let mut t = Trajectory::straight_line(&s);
        t.waypoints[5].y += 100.0; // step of > 25 m
        let err = t.validate(&s, true).unwrap_err();
        assert!(err.to_string().contains("speed violation"));
    }

    #[test]
    fn schedule_validation_modes() {
        let f = write_temp(PAPER_DEFAULT);
        let s = load_scenario(f.path()).unwrap();
        let mut sched = Schedule::uniform(&s);
        sched.validate().unwrap();

        // Column sum 1.5 violates the slack constraint.
        sched.downlink[(0, 0)] = 1.0;
        assert!(sched.validate().is_err());

        // 0.5 entries are not binary.
        let mut sched = Schedule::uniform(&s);
        sched.mode = ScheduleMode::Binary;
        assert!(sched.validate().is_err());
    }

    #[test]
    fn power_bounds_enforced() {
        let f = write_temp(PAPER_DEFAULT);
        let s = load_scenario(f.path()).unwrap();
        let mut p = PowerProfile::full_power(&s);
        p.validate(s.max_uplink_power).unwrap();
        p.p[(0, 0)] = 0.2;
        assert!(p.validate(s.max_uplink_power).is_err());
    }
}
