//! Sweep orchestration and result serialization for the CLI.
//!
//! A sweep varies one scenario parameter over a value list, runs the
//! requested schemes on every point, emits one `solution.json` per cell plus
//! a merged `summary.csv`, and validates every emitted solution by reloading
//! it. Cells are independent and run on a thread pool capped by the
//! `FDUAV_THREADS` environment variable.

use crate::baselines::{self, SchemeId};
use crate::bcd::{self, BcdSettings, Solution};
use crate::error::Error;
use crate::scenario::{self, Scenario};
use rayon::prelude::*;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

/// Scenario parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    /// Flight period T in seconds (slot duration fixed, N = T/delta).
    PeriodT,
    /// Self-interference in dB (converted to Watts).
    SelfInterferenceFbDb,
    /// Altitude H in meters.
    AltitudeH,
}

impl SweepParam {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepParam::PeriodT => "T",
            SweepParam::SelfInterferenceFbDb => "fb_db",
            SweepParam::AltitudeH => "H",
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "T" => Ok(SweepParam::PeriodT),
            "fb_db" => Ok(SweepParam::SelfInterferenceFbDb),
            "H" => Ok(SweepParam::AltitudeH),
            other => Err(Error::validation(format!(
                "unknown sweep parameter `{other}` (expected T, fb_db, or H)"
            ))),
        }
    }
}

/// One sweep: a parameter, its values, the schemes to run, and where the
/// base scenario and outputs live.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub schemes: Vec<SchemeId>,
    pub scenario_path: PathBuf,
    pub out_dir: PathBuf,
}

/// One summary row per (scheme, value) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scheme: SchemeId,
    pub value: f64,
    pub binary_objective: Option<f64>,
    pub relaxed_objective: Option<f64>,
    pub iterations: Option<usize>,
    pub wall_time_s: f64,
    pub status: String,
}

/// Parse a value list: either comma-separated numbers or an inclusive
/// `start:stop:step` range (descending with a negative step).
pub fn parse_value_list(text: &str) -> Result<Vec<f64>, Error> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.len() {
        1 => text
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::validation(format!("bad value `{v}` in list")))
            })
            .collect(),
        3 => {
            let nums: Vec<f64> = parts
                .iter()
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::validation(format!("bad range bound `{v}`")))
                })
                .collect::<Result<_, _>>()?;
            let (start, stop, step) = (nums[0], nums[1], nums[2]);
            if step == 0.0 || (stop - start) * step < 0.0 {
                return Err(Error::validation(format!(
                    "range {start}:{stop}:{step} never terminates"
                )));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize;
            Ok((0..=count).map(|k| start + step * k as f64).collect())
        }
        _ => Err(Error::validation(format!(
            "bad value list `{text}` (expected a,b,c or start:stop:step)"
        ))),
    }
}

/// Instantiate the base scenario with one swept parameter overridden.
pub fn apply_param(base: &Scenario, param: SweepParam, value: f64) -> Result<Scenario, Error> {
    let mut scenario = base.clone();
    match param {
        SweepParam::PeriodT => {
            scenario.period = value;
            let slots = (value / scenario.slot_duration).round();
            if slots < 1.0 || (slots * scenario.slot_duration - value).abs() > 1e-9 {
                return Err(Error::validation(format!(
                    "period {value} s is not a multiple of the slot duration {}",
                    scenario.slot_duration
                )));
            }
            scenario.num_slots = slots as usize;
        }
        SweepParam::SelfInterferenceFbDb => {
            scenario.self_interference = scenario::db_to_linear(value);
        }
        SweepParam::AltitudeH => {
            scenario.altitude = value;
        }
    }
    scenario.validate()?;
    Ok(scenario)
}

fn thread_pool() -> Result<rayon::ThreadPool, Error> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var("FDUAV_THREADS") {
        let n: usize = raw.parse().map_err(|_| {
            Error::validation(format!("FDUAV_THREADS must be a positive integer, got `{raw}`"))
        })?;
        if n == 0 {
            return Err(Error::validation("FDUAV_THREADS must be >= 1"));
        }
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Error::validation(format!("failed to build thread pool: {e}")))
}

/// Run a sweep, write per-cell `solution.json` files and the merged
/// `summary.csv`, and return the rows. Per-cell failures become error rows;
/// the sweep continues.
pub fn run_sweep(spec: &SweepSpec, settings: &BcdSettings) -> Result<Vec<SweepRow>, Error> {
    if spec.values.is_empty() {
        return Err(Error::validation("sweep value list is empty"));
    }
    if spec.schemes.is_empty() {
        return Err(Error::validation("sweep scheme list is empty"));
    }
    let base = scenario::load_scenario(&spec.scenario_path)?;
    fs::create_dir_all(&spec.out_dir)?;

    let cells: Vec<(SchemeId, f64)> = spec
        .schemes
        .iter()
        .flat_map(|&s| spec.values.iter().map(move |&v| (s, v)))
        .collect();

    let pool = thread_pool()?;
    let mut rows: Vec<SweepRow> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(scheme, value)| run_cell(&base, spec, scheme, value, settings))
            .collect()
    });
    rows.sort_by(|a, b| {
        (a.scheme.as_str(), a.value)
            .partial_cmp(&(b.scheme.as_str(), b.value))
            .expect("finite sweep values")
    });
    write_summary_csv(&rows, spec.param, &spec.out_dir.join("summary.csv"))?;
    Ok(rows)
}

fn run_cell(
    base: &Scenario,
    spec: &SweepSpec,
    scheme: SchemeId,
    value: f64,
    settings: &BcdSettings,
) -> SweepRow {
    let started = Instant::now();
    let outcome = solve_cell(base, spec, scheme, value, settings);
    let wall_time_s = started.elapsed().as_secs_f64();
    match outcome {
        Ok(solution) => SweepRow {
            scheme,
            value,
            binary_objective: Some(solution.final_binary_objective),
            relaxed_objective: Some(solution.final_relaxed_objective),
            iterations: Some(solution.iterations_used),
            wall_time_s,
            status: "ok".to_string(),
        },
        Err(e) => SweepRow {
            scheme,
            value,
            binary_objective: None,
            relaxed_objective: None,
            iterations: None,
            wall_time_s,
            status: e.to_string().replace([',', '\n'], ";"),
        },
    }
}

fn solve_cell(
    base: &Scenario,
    spec: &SweepSpec,
    scheme: SchemeId,
    value: f64,
    settings: &BcdSettings,
) -> Result<Solution, Error> {
    let scenario = apply_param(base, spec.param, value)?;
    let solution = baselines::run_scheme(scheme, &scenario, settings)?;
    let cell_dir = spec
        .out_dir
        .join("cells")
        .join(scheme.as_str())
        .join(format!("{}_{}", spec.param, value));
    fs::create_dir_all(&cell_dir)?;
    write_solution_json(&solution, &cell_dir.join("solution.json"))?;
    // Validate what actually landed on disk.
    let reloaded = read_solution_json(&cell_dir.join("solution.json"))?;
    bcd::validate_solution(&reloaded, &scenario)?;
    Ok(solution)
}

fn write_summary_csv(rows: &[SweepRow], param: SweepParam, path: &Path) -> Result<(), Error> {
    let mut out = String::new();
    out.push_str("scheme,param,value,binary_objective,relaxed_objective,iterations,wall_time_s,status\n");
    for row in rows {
        let fmt_opt = |v: &Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row.scheme,
            param,
            row.value,
            fmt_opt(&row.binary_objective),
            fmt_opt(&row.relaxed_objective),
            row.iterations.map(|i| i.to_string()).unwrap_or_default(),
            row.wall_time_s,
            row.status
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Serialize a solution to pretty-printed JSON.
pub fn write_solution_json(solution: &Solution, path: &Path) -> Result<(), Error> {
    let json = serde_json::to_string_pretty(solution)
        .map_err(|e| Error::validation(format!("serialization failed: {e}")))?;
    fs::write(path, json)?;
    Ok(())
}

/// Reload a solution written by [`write_solution_json`].
pub fn read_solution_json(path: &Path) -> Result<Solution, Error> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::validation(format!("bad solution json at {}: {e}", path.display())))
}

/// Write the full per-run export: trajectory, schedule, power, and rate
/// CSVs plus the solution JSON.
///
/// Slots are 1-based in the CSVs (slot n is flown at waypoint n); user
/// indices are 0-based; absent assignments are -1.
pub fn export_solution(
    solution: &Solution,
    scenario: &Scenario,
    dir: impl AsRef<Path>,
) -> Result<(), Error> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;

    let mut trajectory = String::from("n,t_seconds,x_m,y_m\n");
    for (n, w) in solution.trajectory.waypoints.iter().enumerate() {
        trajectory.push_str(&format!(
            "{},{},{},{}\n",
            n,
            n as f64 * scenario.slot_duration,
            w.x,
            w.y
        ));
    }
    fs::write(dir.join("trajectory.csv"), trajectory)?;

    let kd = solution.schedule.downlink.rows();
    let ku = solution.schedule.uplink.rows();
    let mut schedule = String::from("n,active_downlink,active_uplink");
    for j in 0..kd {
        schedule.push_str(&format!(",relaxed_downlink_{j}"));
    }
    for i in 0..ku {
        schedule.push_str(&format!(",relaxed_uplink_{i}"));
    }
    schedule.push('\n');
    for n in 0..solution.schedule.num_slots() {
        let active = |m: &crate::mat::Mat| -> i64 {
            (0..m.rows()).find(|&u| m[(u, n)] == 1.0).map_or(-1, |u| u as i64)
        };
        schedule.push_str(&format!(
            "{},{},{}",
            n + 1,
            active(&solution.schedule.downlink),
            active(&solution.schedule.uplink)
        ));
        for j in 0..kd {
            schedule.push_str(&format!(",{}", solution.relaxed_schedule.downlink[(j, n)]));
        }
        for i in 0..ku {
            schedule.push_str(&format!(",{}", solution.relaxed_schedule.uplink[(i, n)]));
        }
        schedule.push('\n');
    }
    fs::write(dir.join("schedule.csv"), schedule)?;

    let mut power = String::from("n,i,p_watts\n");
    for n in 0..solution.power.p.cols() {
        for i in 0..solution.power.p.rows() {
            power.push_str(&format!("{},{},{}\n", n + 1, i, solution.power.p[(i, n)]));
        }
    }
    fs::write(dir.join("power.csv"), power)?;

    let mut rates = String::from("n,Rd_weighted,Ru_weighted\n");
    for n in 0..solution.schedule.num_slots() {
        rates.push_str(&format!(
            "{},{},{}\n",
            n + 1,
            solution.rate_breakdown.weighted_downlink_slot(&solution.schedule, n),
            solution.rate_breakdown.weighted_uplink_slot(&solution.schedule, n)
        ));
    }
    fs::write(dir.join("rates.csv"), rates)?;

    write_solution_json(solution, &dir.join("solution.json"))?;
    Ok(())
}

/// Load solver settings from a `key = value` file. All keys are optional
/// and default to the built-in settings: `max_outer_iters`,
/// `max_iters_uplink`, `max_iters_trajectory`, `max_iters_power`,
/// `inner_tol`, `max_gradient_steps`, `initial_step`, `backtrack`,
/// `armijo`, `dykstra_max_sweeps`, `stationarity_tol`. Unknown keys are an
/// error.
pub fn load_settings(path: impl AsRef<Path>) -> Result<BcdSettings, Error> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_settings(&text, &path.display().to_string())
}

/// Parse settings text; `path` is used in error messages only.
pub fn parse_settings(text: &str, path: &str) -> Result<BcdSettings, Error> {
    let mut settings = BcdSettings::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse {
            path: path.to_string(),
            line: lineno + 1,
            message,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
        let key = key.trim();
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| err(format!("{key}: expected a number")))?;
        let as_count = || -> Result<usize, Error> {
            if value.fract() != 0.0 || value < 1.0 {
                Err(err(format!("{key} must be a positive integer")))
            } else {
                Ok(value as usize)
            }
        };
        let sca = &mut settings.sca;
        match key {
            "max_outer_iters" => settings.max_outer_iters = as_count()?,
            "max_iters_uplink" => sca.max_iters_uplink = as_count()?,
            "max_iters_trajectory" => sca.max_iters_trajectory = as_count()?,
            "max_iters_power" => sca.max_iters_power = as_count()?,
            "inner_tol" => sca.inner_tol = value,
            "max_gradient_steps" => sca.gradient.max_steps = as_count()?,
            "initial_step" => sca.gradient.initial_step = Some(value),
            "backtrack" => sca.gradient.backtrack = value,
            "armijo" => sca.gradient.armijo = value,
            "dykstra_max_sweeps" => sca.gradient.dykstra_max_sweeps = as_count()?,
            "stationarity_tol" => sca.gradient.stationarity_tol = value,
            other => return Err(err(format!("unknown key `{other}`"))),
        }
    }
    Ok(settings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;

    const BASE: &str = "\
downlink_users = 220,780; 800,220
uplink_users = 150,700; 870,300
altitude_H = 100
period_T = 10
slot_duration_delta = 0.5
beta0_db = -60
sigma2_dbm = -110
pathloss_alpha = 3
uav_tx_power_pb = 0.1
max_uplink_power_Pmax = 0.1
vmax = 50
q_initial = 0,500
q_final = 400,500
fb_db = -130
bandwidth_B = 1e6
tolerance_eps = 1e-3
";

    fn base_scenario() -> Scenario {
        parse_scenario(BASE, "test").unwrap()
    }

    #[test]
    fn value_list_grammar() {
        assert_eq!(parse_value_list("50,100,150").unwrap(), vec![50.0, 100.0, 150.0]);
        assert_eq!(
            parse_value_list("-170:-110:10").unwrap(),
            vec![-170.0, -160.0, -150.0, -140.0, -130.0, -120.0, -110.0]
        );
        assert_eq!(parse_value_list("30:10:-10").unwrap(), vec![30.0, 20.0, 10.0]);
        assert!(parse_value_list("1:2:0").is_err());
        assert!(parse_value_list("1:2").is_err());
        assert!(parse_value_list("a,b").is_err());
    }

    #[test]
    fn apply_param_rules() {
        let base = base_scenario();
        let t = apply_param(&base, SweepParam::PeriodT, 30.0).unwrap();
        assert_eq!(t.num_slots, 60);
        assert!(apply_param(&base, SweepParam::PeriodT, 30.3).is_err());
        // Too short to reach the far endpoint.
        assert!(apply_param(&base, SweepParam::PeriodT, 4.0).is_err());

        let fb = apply_param(&base, SweepParam::SelfInterferenceFbDb, -150.0).unwrap();
        assert!((fb.self_interference - 1e-15).abs() < 1e-24);

        let h = apply_param(&base, SweepParam::AltitudeH, 200.0).unwrap();
        assert_eq!(h.altitude, 200.0);
    }

    #[test]
    fn export_writes_all_files_with_expected_shapes() {
        let mut s = base_scenario();
        s.period = 2.0;
        s.num_slots = 4;
        s.q_final = crate::scenario::Point::new(100.0, 500.0);
        let solution = baselines::run_scheme(SchemeId::StraightFlight, &s, &BcdSettings::default())
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        export_solution(&solution, &s, dir.path()).unwrap();

        let trajectory = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
        let lines: Vec<&str> = trajectory.lines().collect();
        assert_eq!(lines.len(), 6); // header + 5 waypoints
        let xs: Vec<f64> = lines[1..]
            .iter()
            .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
            .collect();
        assert!(xs.windows(2).all(|w| w[1] > w[0]));

        for file in ["schedule.csv", "power.csv", "rates.csv", "solution.json"] {
            assert!(dir.path().join(file).exists(), "{file} missing");
        }
        let schedule = fs::read_to_string(dir.path().join("schedule.csv")).unwrap();
        assert!(schedule.starts_with(
            "n,active_downlink,active_uplink,relaxed_downlink_0,relaxed_downlink_1,relaxed_uplink_0,relaxed_uplink_1\n"
        ));
    }

    #[test]
    fn schedule_csv_reports_active_indices() {
        let mut s = base_scenario();
        s.downlink_users.push(crate::scenario::Point::new(500.0, 500.0));
        s.period = 2.0;
        s.num_slots = 4;
        s.q_final = crate::scenario::Point::new(100.0, 500.0);
        let mut solution =
            baselines::run_scheme(SchemeId::StraightFlight, &s, &BcdSettings::default()).unwrap();
        // Force a known assignment in (1-based) slot 3: downlink user 2.
        for j in 0..3 {
            solution.schedule.downlink[(j, 2)] = if j == 2 { 1.0 } else { 0.0 };
        }
        let dir = tempfile::tempdir().unwrap();
        export_solution(&solution, &s, dir.path()).unwrap();
        let schedule = fs::read_to_string(dir.path().join("schedule.csv")).unwrap();
        let row3 = schedule.lines().nth(3).unwrap();
        assert!(row3.starts_with("3,2,"), "row {row3}");
    }

    #[test]
    fn solution_json_round_trips_exactly() {
        let s = base_scenario();
        let solution = bcd::run(&s, &BcdSettings::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("solution.json");
        write_solution_json(&solution, &path).unwrap();
        let reloaded = read_solution_json(&path).unwrap();
        assert_eq!(reloaded, solution);
    }

    #[test]
    fn sweep_writes_sorted_summary_and_continues_past_failures() {
        let dir = tempfile::tempdir().unwrap();
        let scenario_path = dir.path().join("base.cfg");
        fs::write(&scenario_path, BASE).unwrap();
        let spec = SweepSpec {
            param: SweepParam::PeriodT,
            // 4 s is infeasible (endpoints unreachable) -> error row.
            values: vec![10.0, 4.0, 8.0],
            schemes: vec![SchemeId::StraightFlight],
            scenario_path,
            out_dir: dir.path().join("sweep"),
        };
        let rows = run_sweep(&spec, &BcdSettings::default()).unwrap();
        assert_eq!(rows.len(), 3);
        let values: Vec<f64> = rows.iter().map(|r| r.value).collect();
        assert_eq!(values, vec![4.0, 8.0, 10.0]);
        assert!(rows[0].status.contains("unreachable"));
        assert!(rows[0].binary_objective.is_none());
        assert_eq!(rows[1].status, "ok");
        assert_eq!(rows[2].status, "ok");

        let summary = fs::read_to_string(dir.path().join("sweep/summary.csv")).unwrap();
        assert!(summary.starts_with(
            "scheme,param,value,binary_objective,relaxed_objective,iterations,wall_time_s,status\n"
        ));
        assert_eq!(summary.lines().count(), 4);
        assert!(dir
            .path()
            .join("sweep/cells/straight_flight/T_10/solution.json")
            .exists());
    }

    #[test]
    fn settings_file_overrides_defaults() {
        let text = "\
max_outer_iters = 7
max_iters_trajectory = 3
inner_tol = 1e-5
initial_step = 12.5
";
        let settings = parse_settings(text, "test").unwrap();
        assert_eq!(settings.max_outer_iters, 7);
        assert_eq!(settings.sca.max_iters_trajectory, 3);
        assert_eq!(settings.sca.inner_tol, 1e-5);
        assert_eq!(settings.sca.gradient.initial_step, Some(12.5));
        assert_eq!(settings.sca.max_iters_power, 20); // untouched default

        assert!(parse_settings("warp_speed = 9\n", "test").is_err());
        assert!(parse_settings("max_outer_iters = 2.5\n", "test").is_err());
    }
}
