//! Scenario configuration: the domain types shared by every part of the
//! simulator and the flat `key = value` file format they load from.
//!
//! A scenario file is UTF-8 text with one `key = value` pair per line and
//! `#` comments (full-line or trailing). Keys are the field names of
//! [`ScenarioConfig`], nested through their parent field
//! (`advisory.queue_start`, `vehicle.max_decel`, `fuel.c1`, ...). Unknown
//! and duplicate keys are rejected so typos fail loudly. Every invariant is
//! checked at construction; a value that parses is a value the simulator
//! can run.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::dynamics::{FuelCoeffs, VehicleParams};

/// Errors from loading, parsing, or validating scenario data.
#[derive(Debug, Error)]
pub enum ScenarioError {
    /// The scenario file could not be read at all.
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    /// A line is not of the form `key = value`, or a value failed to parse.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    /// A required key is absent.
    #[error("missing required key `{key}`")]
    Missing { key: String },
    /// A field value violates an invariant; `field` names the offender.
    #[error("invalid `{field}`: {message}")]
    Validation { field: String, message: String },
}

impl ScenarioError {
    fn invalid(field: &str, message: impl Into<String>) -> Self {
        ScenarioError::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Qualifies the offending field with its parent key, so `queue_end`
    /// raised while loading a file surfaces as `advisory.queue_end`.
    fn qualified(self, parent: &str) -> Self {
        match self {
            ScenarioError::Validation { field, message } => ScenarioError::Validation {
                field: format!("{parent}.{field}"),
                message,
            },
            other => other,
        }
    }
}

fn ensure(cond: bool, field: &str, message: &str) -> Result<(), ScenarioError> {
    if cond {
        Ok(())
    } else {
        Err(ScenarioError::invalid(field, message))
    }
}

fn ensure_finite(value: f64, field: &str) -> Result<(), ScenarioError> {
    ensure(value.is_finite(), field, "must be a finite number")
}

/// Queue information carried by a roadside advisory broadcast.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueAdvisory {
    /// Start of the queue, meters along the route.
    pub queue_start: f64,
    /// End of the queue, meters along the route. Always beyond `queue_start`.
    pub queue_end: f64,
    /// Average speed of vehicles inside the queue, m/s. Never negative.
    pub queue_speed: f64,
    /// Broadcast radius of the roadside unit, meters. Always positive.
    pub comm_range: f64,
}

impl QueueAdvisory {
    /// Validates and builds an advisory. The error names the offending field.
    pub fn new(
        queue_start: f64,
        queue_end: f64,
        queue_speed: f64,
        comm_range: f64,
    ) -> Result<Self, ScenarioError> {
        ensure_finite(queue_start, "queue_start")?;
        ensure_finite(queue_end, "queue_end")?;
        ensure_finite(queue_speed, "queue_speed")?;
        ensure_finite(comm_range, "comm_range")?;
        ensure(
            queue_end > queue_start,
            "queue_end",
            "queue must end after it starts",
        )?;
        ensure(queue_speed >= 0.0, "queue_speed", "must be non-negative")?;
        ensure(comm_range > 0.0, "comm_range", "must be positive")?;
        Ok(QueueAdvisory {
            queue_start,
            queue_end,
            queue_speed,
            comm_range,
        })
    }
}

/// Tuning for the advisory-speed profiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DshConfig {
    /// Speed drop per deceleration segment, m/s. Positive.
    pub decel_step: f64,
    /// Speed gain per acceleration segment, m/s. Positive.
    pub accel_step: f64,
    /// Legal route speed, m/s; the target after recovery. Positive.
    pub speed_limit: f64,
    /// Logistic slope for the step-sigmoid profile, 1/m.
    pub k_step_sigmoid: f64,
    /// Logistic slope for the single-sigmoid profile, 1/m. Shallower than
    /// `k_step_sigmoid` because one curve spans the whole approach.
    pub k_single_sigmoid: f64,
}

/// Default slope of each per-segment logistic riser, 1/m.
pub const DEFAULT_K_STEP_SIGMOID: f64 = 0.09;
/// Default slope of the whole-approach logistic, 1/m.
pub const DEFAULT_K_SINGLE_SIGMOID: f64 = 0.009;

impl DshConfig {
    /// Validates and builds profile tuning. The error names the offending field.
    pub fn new(
        decel_step: f64,
        accel_step: f64,
        speed_limit: f64,
        k_step_sigmoid: f64,
        k_single_sigmoid: f64,
    ) -> Result<Self, ScenarioError> {
        ensure_finite(decel_step, "decel_step")?;
        ensure_finite(accel_step, "accel_step")?;
        ensure_finite(speed_limit, "speed_limit")?;
        ensure_finite(k_step_sigmoid, "k_step_sigmoid")?;
        ensure_finite(k_single_sigmoid, "k_single_sigmoid")?;
        ensure(decel_step > 0.0, "decel_step", "must be positive")?;
        ensure(accel_step > 0.0, "accel_step", "must be positive")?;
        ensure(speed_limit > 0.0, "speed_limit", "must be positive")?;
        ensure(k_step_sigmoid > 0.0, "k_step_sigmoid", "must be positive")?;
        ensure(
            k_single_sigmoid > 0.0,
            "k_single_sigmoid",
            "must be positive",
        )?;
        ensure(
            k_single_sigmoid < k_step_sigmoid,
            "k_single_sigmoid",
            "must be shallower than k_step_sigmoid",
        )?;
        Ok(DshConfig {
            decel_step,
            accel_step,
            speed_limit,
            k_step_sigmoid,
            k_single_sigmoid,
        })
    }
}

/// Instantaneous longitudinal state of the ego vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    /// Distance travelled along the route, meters.
    pub distance: f64,
    /// Speed, m/s. Never negative.
    pub speed: f64,
    /// Realized acceleration over the last step, m/s^2.
    pub accel: f64,
}

impl VehicleState {
    /// Validates and builds a state. The error names the offending field.
    pub fn new(distance: f64, speed: f64, accel: f64) -> Result<Self, ScenarioError> {
        ensure_finite(distance, "distance")?;
        ensure_finite(speed, "speed")?;
        ensure_finite(accel, "accel")?;
        ensure(speed >= 0.0, "speed", "must be non-negative")?;
        Ok(VehicleState {
            distance,
            speed,
            accel,
        })
    }
}

/// Advisory mode under test. `NoDsh` is the abrupt baseline driver; the
/// other three follow an advisory-speed profile latched at broadcast entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    NoDsh,
    Step,
    StepSigmoid,
    SingleSigmoid,
}

impl Mode {
    /// All modes in the order comparison artifacts present them.
    pub const ALL: [Mode; 4] = [
        Mode::NoDsh,
        Mode::Step,
        Mode::SingleSigmoid,
        Mode::StepSigmoid,
    ];

    /// Stable identifier used in config files, CLI flags, and file names.
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::NoDsh => "no-dsh",
            Mode::Step => "step",
            Mode::StepSigmoid => "step-sigmoid",
            Mode::SingleSigmoid => "single-sigmoid",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "no-dsh" => Ok(Mode::NoDsh),
            "step" => Ok(Mode::Step),
            "step-sigmoid" => Ok(Mode::StepSigmoid),
            "single-sigmoid" => Ok(Mode::SingleSigmoid),
            other => Err(format!(
                "unknown mode `{other}` (expected no-dsh, step, step-sigmoid, or single-sigmoid)"
            )),
        }
    }
}

/// A complete, validated simulation scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Queue advisory the roadside unit broadcasts.
    pub advisory: QueueAdvisory,
    /// Advisory-speed profile tuning.
    pub dsh: DshConfig,
    /// Mode to simulate (comparison runs override this per mode).
    pub mode: Mode,
    /// Vehicle speed at the route start, m/s. At most `dsh.speed_limit`.
    pub initial_speed: f64,
    /// Route length, meters. Beyond `advisory.queue_end`.
    pub route_length: f64,
    /// Integration step, seconds. In (0, 0.1].
    pub dt: f64,
    /// Longitudinal model parameters.
    pub vehicle: VehicleParams,
    /// Fuel-rate proxy coefficients.
    pub fuel: FuelCoeffs,
    /// Reserved for future stochastic extensions; recorded so artifacts
    /// are attributable to an exact configuration.
    pub seed: u64,
}

impl ScenarioConfig {
    /// Checks cross-field invariants. Field-local invariants are already
    /// guaranteed by the component constructors.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        ensure_finite(self.initial_speed, "initial_speed")?;
        ensure_finite(self.route_length, "route_length")?;
        ensure_finite(self.dt, "dt")?;
        ensure(
            self.route_length > self.advisory.queue_end,
            "route_length",
            "route must extend beyond the queue end",
        )?;
        ensure(
            self.dt > 0.0 && self.dt <= 0.1,
            "dt",
            "must be in (0, 0.1] seconds",
        )?;
        ensure(
            self.initial_speed >= 0.0,
            "initial_speed",
            "must be non-negative",
        )?;
        ensure(
            self.initial_speed <= self.dsh.speed_limit,
            "initial_speed",
            "must not exceed dsh.speed_limit",
        )?;
        // The broadcast frame carries these two fields as f32; reject values
        // the wire format would flush to zero or infinity.
        let speed_f32 = self.advisory.queue_speed as f32;
        ensure(
            speed_f32.is_finite(),
            "advisory.queue_speed",
            "not representable in the broadcast frame (f32)",
        )?;
        let range_f32 = self.advisory.comm_range as f32;
        ensure(
            range_f32.is_finite() && range_f32 > 0.0,
            "advisory.comm_range",
            "not representable in the broadcast frame (f32)",
        )?;
        Ok(())
    }

    /// Serializes to the scenario file format. Feeding the result back
    /// through [`parse_scenario`] reproduces the config field-for-field.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        out.push_str("# scenario\n");
        out.push_str(&format!("mode = {}\n", self.mode));
        out.push_str(&format!("initial_speed = {}\n", self.initial_speed));
        out.push_str(&format!("route_length = {}\n", self.route_length));
        out.push_str(&format!("dt = {}\n", self.dt));
        out.push_str(&format!("seed = {}\n", self.seed));
        out.push_str("\n# queue advisory\n");
        out.push_str(&format!(
            "advisory.queue_start = {}\n",
            self.advisory.queue_start
        ));
        out.push_str(&format!(
            "advisory.queue_end = {}\n",
            self.advisory.queue_end
        ));
        out.push_str(&format!(
            "advisory.queue_speed = {}\n",
            self.advisory.queue_speed
        ));
        out.push_str(&format!(
            "advisory.comm_range = {}\n",
            self.advisory.comm_range
        ));
        out.push_str("\n# advisory profile tuning\n");
        out.push_str(&format!("dsh.decel_step = {}\n", self.dsh.decel_step));
        out.push_str(&format!("dsh.accel_step = {}\n", self.dsh.accel_step));
        out.push_str(&format!("dsh.speed_limit = {}\n", self.dsh.speed_limit));
        out.push_str(&format!(
            "dsh.k_step_sigmoid = {}\n",
            self.dsh.k_step_sigmoid
        ));
        out.push_str(&format!(
            "dsh.k_single_sigmoid = {}\n",
            self.dsh.k_single_sigmoid
        ));
        out.push_str("\n# vehicle\n");
        out.push_str(&format!("vehicle.max_accel = {}\n", self.vehicle.max_accel));
        out.push_str(&format!("vehicle.max_decel = {}\n", self.vehicle.max_decel));
        out.push_str(&format!(
            "vehicle.tracking_gain = {}\n",
            self.vehicle.tracking_gain
        ));
        out.push_str(&format!(
            "vehicle.perception_range = {}\n",
            self.vehicle.perception_range
        ));
        out.push_str("\n# fuel proxy\n");
        out.push_str(&format!("fuel.c0 = {}\n", self.fuel.c0));
        out.push_str(&format!("fuel.c1 = {}\n", self.fuel.c1));
        out.push_str(&format!("fuel.c2 = {}\n", self.fuel.c2));
        out.push_str(&format!("fuel.c3 = {}\n", self.fuel.c3));
        out
    }
}

/// Raw `key = value` entries with their line numbers, consumed as typed
/// fields so leftovers can be reported as unknown keys.
struct RawEntries {
    entries: BTreeMap<String, (String, usize)>,
}

impl RawEntries {
    fn take_raw(&mut self, key: &str) -> Option<(String, usize)> {
        self.entries.remove(key)
    }

    fn take_f64(&mut self, key: &str) -> Result<f64, ScenarioError> {
        match self.take_raw(key) {
            None => Err(ScenarioError::Missing { key: key.into() }),
            Some((value, line)) => parse_f64(&value, key, line),
        }
    }

    fn take_f64_or(&mut self, key: &str, default: f64) -> Result<f64, ScenarioError> {
        match self.take_raw(key) {
            None => Ok(default),
            Some((value, line)) => parse_f64(&value, key, line),
        }
    }

    fn take_u64_or(&mut self, key: &str, default: u64) -> Result<u64, ScenarioError> {
        match self.take_raw(key) {
            None => Ok(default),
            Some((value, line)) => value.parse::<u64>().map_err(|_| ScenarioError::Parse {
                line,
                message: format!("invalid integer `{value}` for key `{key}`"),
            }),
        }
    }

    fn take_mode(&mut self, key: &str) -> Result<Mode, ScenarioError> {
        match self.take_raw(key) {
            None => Err(ScenarioError::Missing { key: key.into() }),
            Some((value, line)) => value
                .parse::<Mode>()
                .map_err(|message| ScenarioError::Parse { line, message }),
        }
    }

    fn reject_unknown(&self) -> Result<(), ScenarioError> {
        if let Some((key, (_, line))) = self.entries.iter().next() {
            return Err(ScenarioError::Parse {
                line: *line,
                message: format!("unknown key `{key}`"),
            });
        }
        Ok(())
    }
}

fn parse_f64(value: &str, key: &str, line: usize) -> Result<f64, ScenarioError> {
    value.parse::<f64>().map_err(|_| ScenarioError::Parse {
        line,
        message: format!("invalid number `{value}` for key `{key}`"),
    })
}

/// Parses scenario text. See the module docs for the format.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ScenarioError> {
    let mut entries = BTreeMap::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ScenarioError::Parse {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            });
        };
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() || value.is_empty() {
            return Err(ScenarioError::Parse {
                line: line_no,
                message: "empty key or value".into(),
            });
        }
        if entries
            .insert(key.to_string(), (value.to_string(), line_no))
            .is_some()
        {
            return Err(ScenarioError::Parse {
                line: line_no,
                message: format!("duplicate key `{key}`"),
            });
        }
    }
    let mut raw = RawEntries { entries };

    let advisory = QueueAdvisory::new(
        raw.take_f64("advisory.queue_start")?,
        raw.take_f64("advisory.queue_end")?,
        raw.take_f64("advisory.queue_speed")?,
        raw.take_f64("advisory.comm_range")?,
    )
    .map_err(|e| e.qualified("advisory"))?;

    let dsh = DshConfig::new(
        raw.take_f64("dsh.decel_step")?,
        raw.take_f64("dsh.accel_step")?,
        raw.take_f64("dsh.speed_limit")?,
        raw.take_f64_or("dsh.k_step_sigmoid", DEFAULT_K_STEP_SIGMOID)?,
        raw.take_f64_or("dsh.k_single_sigmoid", DEFAULT_K_SINGLE_SIGMOID)?,
    )
    .map_err(|e| e.qualified("dsh"))?;

    let defaults = VehicleParams::default();
    let vehicle = VehicleParams::new(
        raw.take_f64_or("vehicle.max_accel", defaults.max_accel)?,
        raw.take_f64_or("vehicle.max_decel", defaults.max_decel)?,
        raw.take_f64_or("vehicle.tracking_gain", defaults.tracking_gain)?,
        raw.take_f64_or("vehicle.perception_range", defaults.perception_range)?,
    )
    .map_err(|e| e.qualified("vehicle"))?;

    let fuel_defaults = FuelCoeffs::default();
    let fuel = FuelCoeffs::new(
        raw.take_f64_or("fuel.c0", fuel_defaults.c0)?,
        raw.take_f64_or("fuel.c1", fuel_defaults.c1)?,
        raw.take_f64_or("fuel.c2", fuel_defaults.c2)?,
        raw.take_f64_or("fuel.c3", fuel_defaults.c3)?,
    )
    .map_err(|e| e.qualified("fuel"))?;

    let config = ScenarioConfig {
        advisory,
        dsh,
        mode: raw.take_mode("mode")?,
        initial_speed: raw.take_f64("initial_speed")?,
        route_length: raw.take_f64("route_length")?,
        dt: raw.take_f64("dt")?,
        vehicle,
        fuel,
        seed: raw.take_u64_or("seed", 0)?,
    };
    raw.reject_unknown()?;
    config.validate()?;
    Ok(config)
}

/// Reads and parses a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig, ScenarioError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canonical_text() -> String {
        "\
# canonical queue-approach scenario
mode = step
initial_speed = 20
route_length = 8000
dt = 0.01

advisory.queue_start = 5200
advisory.queue_end = 5700
advisory.queue_speed = 5
advisory.comm_range = 1000

dsh.decel_step = 1
dsh.accel_step = 1
dsh.speed_limit = 20
"
        .to_string()
    }

    #[test]
    fn parses_canonical_scenario() {
        let cfg = parse_scenario(&canonical_text()).unwrap();
        assert_eq!(cfg.mode, Mode::Step);
        assert_eq!(cfg.advisory.queue_start, 5200.0);
        assert_eq!(cfg.advisory.queue_end, 5700.0);
        assert_eq!(cfg.advisory.queue_speed, 5.0);
        assert_eq!(cfg.advisory.comm_range, 1000.0);
        assert_eq!(cfg.dsh.k_step_sigmoid, 0.09);
        assert_eq!(cfg.dsh.k_single_sigmoid, 0.009);
        assert_eq!(cfg.vehicle.max_decel, 3.0);
        assert_eq!(cfg.fuel.c2, 2e-5);
        assert_eq!(cfg.seed, 0);
    }

    #[test]
    fn rejects_inverted_queue_bounds() {
        let text =
            canonical_text().replace("advisory.queue_end = 5700", "advisory.queue_end = 5100");
        let err = parse_scenario(&text).unwrap_err();
        assert!(err.to_string().contains("queue_end"), "got: {err}");
    }

    #[test]
    fn rejects_zero_dt() {
        let text = canonical_text().replace("dt = 0.01", "dt = 0");
        let err = parse_scenario(&text).unwrap_err();
        assert!(err.to_string().contains("dt"), "got: {err}");
    }

    #[test]
    fn rejects_unknown_key_with_line_number() {
        let mut text = canonical_text();
        text.push_str("dsh.decel_stp = 1\n");
        let err = parse_scenario(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("unknown key `dsh.decel_stp`"), "got: {msg}");
    }

    #[test]
    fn rejects_duplicate_key() {
        let mut text = canonical_text();
        text.push_str("dt = 0.02\n");
        let err = parse_scenario(&text).unwrap_err();
        assert!(err.to_string().contains("duplicate key `dt`"), "got: {err}");
    }

    #[test]
    fn rejects_missing_required_key() {
        let text = canonical_text().replace("initial_speed = 20\n", "");
        let err = parse_scenario(&text).unwrap_err();
        assert!(
            err.to_string()
                .contains("missing required key `initial_speed`"),
            "got: {err}"
        );
    }

    #[test]
    fn rejects_malformed_line() {
        let mut text = canonical_text();
        text.push_str("this is not a key value pair\n");
        let err = parse_scenario(&text).unwrap_err();
        assert!(matches!(err, ScenarioError::Parse { .. }), "got: {err}");
    }

    #[test]
    fn rejects_initial_speed_above_limit() {
        let text = canonical_text().replace("initial_speed = 20", "initial_speed = 25");
        let err = parse_scenario(&text).unwrap_err();
        assert!(err.to_string().contains("initial_speed"), "got: {err}");
    }

    #[test]
    fn trailing_comments_and_blank_lines_are_ignored() {
        let text = canonical_text().replace("dt = 0.01", "dt = 0.01   # integration step");
        let cfg = parse_scenario(&text).unwrap();
        assert_eq!(cfg.dt, 0.01);
    }

    #[test]
    fn round_trips_through_config_string() {
        let cfg = parse_scenario(&canonical_text()).unwrap();
        let reloaded = parse_scenario(&cfg.to_config_string()).unwrap();
        assert_eq!(cfg, reloaded);
    }

    #[test]
    fn mode_strings_round_trip() {
        for mode in Mode::ALL {
            assert_eq!(mode.as_str().parse::<Mode>().unwrap(), mode);
        }
        assert!("sigmoid".parse::<Mode>().is_err());
    }

    #[test]
    fn vehicle_state_rejects_negative_speed() {
        let err = VehicleState::new(0.0, -1.0, 0.0).unwrap_err();
        assert!(err.to_string().contains("speed"), "got: {err}");
    }

    #[test]
    fn dsh_config_requires_shallower_single_sigmoid_slope() {
        let err = DshConfig::new(1.0, 1.0, 20.0, 0.009, 0.09).unwrap_err();
        assert!(err.to_string().contains("k_single_sigmoid"), "got: {err}");
    }
}
