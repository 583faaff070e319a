//! Sum-capacity maximization for a full-duplex UAV base station.
//!
//! A rotary-wing UAV carrying a full-duplex radio serves a set of downlink
//! users and a set of uplink users over a flight of `N` time slots. Downlink
//! and uplink each follow TDMA (at most one user per direction per slot), the
//! uplink users interfere with the downlink receivers over ground-to-ground
//! Rayleigh links, and the UAV suffers a constant residual self-interference.
//! The solver maximizes the sum of downlink and uplink spectral efficiency
//! over four variable blocks:
//!
//! 1. downlink user scheduling (per-slot linear program, closed form),
//! 2. uplink user scheduling (successive convex approximation),
//! 3. the UAV trajectory (SCA with projected gradient ascent and Dykstra
//!    projection onto the per-step speed constraints),
//! 4. uplink transmit power (SCA with a per-cell closed form),
//!
//! iterated in a block coordinate descent loop until the fractional objective
//! improvement drops below a tolerance, after which the relaxed scheduling
//! variables are rounded to binary.
//!
//! The [`baselines`] module runs the same pipeline under the comparison
//! schemes (no interference, no power control, straight flight, static
//! hover, half duplex) and the [`experiments`] module drives parameter
//! sweeps and file export for the CLI.

pub mod baselines;
pub mod bcd;
pub mod channel;
pub mod error;
pub mod mat;
pub mod rates;
pub mod scenario;
pub mod subproblems;
pub mod experiments;

pub use baselines::SchemeId;
pub use bcd::{BcdSettings, RunPlan, Solution};
pub use channel::{GainBuilder, GainTables};
pub use error::Error;
pub use mat::Mat;
pub use rates::{RateBreakdown, RateModel};
pub use scenario::{Point, PowerProfile, Scenario, Schedule, ScheduleMode, Trajectory};
pub use subproblems::{GradientSettings, ScaSettings};
