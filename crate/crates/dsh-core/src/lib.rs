//! Deterministic simulator for dynamic speed harmonization (DSH): a connected
//! vehicle approaches a slow traffic queue that a roadside unit announces over
//! a simulated V2X broadcast, and an advisory-speed profile walks the vehicle
//! down to queue speed and back up to the limit once the queue has passed.
//!
//! The crate is organised along the data flow:
//!
//! * [`scenario`] — domain types plus the flat `key = value` config format;
//! * [`v2x`] — the 36-byte advisory frame codec, range-gated delivery, and
//!   the replay-log record format;
//! * [`profiles`] — session latching and the three advisory-speed profiles
//!   (step, step-sigmoid, single-sigmoid);
//! * [`dynamics`] — point-mass longitudinal model, saturated proportional
//!   speed tracking, the no-advisory baseline driver, and a fuel-rate proxy;
//! * [`engine`] — fixed-step simulation loop, trace capture, CSV/JSON
//!   serialization, and comfort/mobility metrics.
//!
//! Everything is a pure function of its inputs: running the same scenario
//! twice produces byte-identical artifacts.

pub mod dynamics;
pub mod engine;
pub mod profiles;
pub mod scenario;
pub mod v2x;

pub use dynamics::{FuelCoeffs, VehicleParams};
pub use engine::{compare_modes, run_scenario, MetricsReport, ModeRun, SimError, SimTrace};
pub use profiles::{advisory_speed, latch_session, DshSession, LatchOutcome};
pub use scenario::{
    load_scenario, parse_scenario, DshConfig, Mode, QueueAdvisory, ScenarioConfig, ScenarioError,
    VehicleState,
};
pub use v2x::QueueAdvisoryMessage;
