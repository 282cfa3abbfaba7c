//! Python bindings for the harmonization simulator.
//!
//! Exposes the scenario config, the simulation engine, the advisory
//! profiles, and the frame codec as a `dsh_python` extension module:
//!
//! ```python
//! import dsh_python as dsh
//! scenario = dsh.Scenario.load("scenarios/mil.cfg")
//! trace, metrics = dsh.run_scenario(scenario, mode="single-sigmoid")
//! print(metrics.as_dict())
//! ```

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};

use dsh_core::engine;
use dsh_core::profiles::{advisory_speed, latch_session, LatchOutcome};
use dsh_core::scenario::{self, Mode, ScenarioConfig, ScenarioError, VehicleState};
use dsh_core::v2x;

fn scenario_err(e: ScenarioError) -> PyErr {
    match e {
        ScenarioError::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse_mode(name: &str) -> PyResult<Mode> {
    name.parse().map_err(PyValueError::new_err)
}

/// A validated scenario configuration.
#[pyclass(module = "dsh_python", skip_from_py_object)]
#[derive(Clone)]
struct Scenario {
    inner: ScenarioConfig,
}

#[pymethods]
impl Scenario {
    /// Load and validate a scenario config file.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        scenario::load_scenario(path)
            .map(|inner| Self { inner })
            .map_err(scenario_err)
    }

    /// Parse and validate scenario config text.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        scenario::parse_scenario(text)
            .map(|inner| Self { inner })
            .map_err(scenario_err)
    }

    /// Serialize back to config-file text (reparses to an equal scenario).
    fn to_text(&self) -> String {
        self.inner.to_config_string()
    }

    #[getter]
    fn mode(&self) -> String {
        self.inner.mode.to_string()
    }

    #[setter]
    fn set_mode(&mut self, mode: &str) -> PyResult<()> {
        self.inner.mode = parse_mode(mode)?;
        Ok(())
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.inner.dt
    }

    #[setter]
    fn set_dt(&mut self, dt: f64) -> PyResult<()> {
        let mut cfg = self.inner.clone();
        cfg.dt = dt;
        cfg.validate().map_err(scenario_err)?;
        self.inner = cfg;
        Ok(())
    }

    #[getter]
    fn queue_start(&self) -> f64 {
        self.inner.advisory.queue_start
    }

    #[getter]
    fn queue_end(&self) -> f64 {
        self.inner.advisory.queue_end
    }

    #[getter]
    fn queue_speed(&self) -> f64 {
        self.inner.advisory.queue_speed
    }

    #[getter]
    fn comm_range(&self) -> f64 {
        self.inner.advisory.comm_range
    }

    #[getter]
    fn initial_speed(&self) -> f64 {
        self.inner.initial_speed
    }

    #[getter]
    fn speed_limit(&self) -> f64 {
        self.inner.dsh.speed_limit
    }

    #[getter]
    fn route_length(&self) -> f64 {
        self.inner.route_length
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(mode='{}', queue=[{}, {}] m @ {} m/s, route={} m)",
            self.inner.mode,
            self.inner.advisory.queue_start,
            self.inner.advisory.queue_end,
            self.inner.advisory.queue_speed,
            self.inner.route_length,
        )
    }
}

/// Time-indexed simulation trace, one sample per integration step.
#[pyclass(module = "dsh_python")]
struct Trace {
    inner: engine::SimTrace,
}

#[pymethods]
impl Trace {
    #[getter]
    fn dt(&self) -> f64 {
        self.inner.dt
    }

    #[getter]
    fn t(&self) -> Vec<f64> {
        self.inner.samples.iter().map(|s| s.t).collect()
    }

    #[getter]
    fn distance(&self) -> Vec<f64> {
        self.inner.samples.iter().map(|s| s.distance).collect()
    }

    #[getter]
    fn speed(&self) -> Vec<f64> {
        self.inner.samples.iter().map(|s| s.speed).collect()
    }

    #[getter]
    fn accel(&self) -> Vec<f64> {
        self.inner.samples.iter().map(|s| s.accel).collect()
    }

    #[getter]
    fn v_ref(&self) -> Vec<f64> {
        self.inner.samples.iter().map(|s| s.v_ref).collect()
    }

    #[getter]
    fn advisory_delivered(&self) -> Vec<bool> {
        self.inner
            .samples
            .iter()
            .map(|s| s.advisory_delivered)
            .collect()
    }

    #[getter]
    fn fuel_cum(&self) -> Vec<f64> {
        self.inner.samples.iter().map(|s| s.fuel_cum).collect()
    }

    /// The trace in the same CSV format the CLI writes.
    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    fn __len__(&self) -> usize {
        self.inner.samples.len()
    }
}

/// Headline metrics of one simulation run.
#[pyclass(module = "dsh_python", skip_from_py_object)]
#[derive(Clone)]
struct Metrics {
    inner: engine::MetricsReport,
}

#[pymethods]
impl Metrics {
    #[getter]
    fn peak_decel(&self) -> f64 {
        self.inner.peak_decel
    }

    #[getter]
    fn rms_jerk(&self) -> f64 {
        self.inner.rms_jerk
    }

    #[getter]
    fn travel_time(&self) -> f64 {
        self.inner.travel_time
    }

    #[getter]
    fn fuel_total(&self) -> f64 {
        self.inner.fuel_total
    }

    #[getter]
    fn tracking_rmse(&self) -> f64 {
        self.inner.tracking_rmse
    }

    fn as_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        d.set_item("peak_decel", self.inner.peak_decel)?;
        d.set_item("rms_jerk", self.inner.rms_jerk)?;
        d.set_item("travel_time", self.inner.travel_time)?;
        d.set_item("fuel_total", self.inner.fuel_total)?;
        d.set_item("tracking_rmse", self.inner.tracking_rmse)?;
        Ok(d)
    }

    /// The metrics in the same JSON format the CLI writes.
    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn __repr__(&self) -> String {
        format!(
            "Metrics(peak_decel={}, rms_jerk={}, travel_time={}, fuel_total={}, tracking_rmse={})",
            self.inner.peak_decel,
            self.inner.rms_jerk,
            self.inner.travel_time,
            self.inner.fuel_total,
            self.inner.tracking_rmse,
        )
    }
}

/// Simulate one scenario; `mode` overrides the scenario's own mode.
#[pyfunction]
#[pyo3(signature = (scenario, mode=None))]
fn run_scenario(scenario: &Scenario, mode: Option<&str>) -> PyResult<(Trace, Metrics)> {
    let mut cfg = scenario.inner.clone();
    if let Some(mode) = mode {
        cfg.mode = parse_mode(mode)?;
    }
    engine::run_scenario(&cfg)
        .map(|(trace, metrics)| (Trace { inner: trace }, Metrics { inner: metrics }))
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Simulate the scenario under every mode; returns
/// `[(mode, Trace, Metrics), ...]` in presentation order.
#[pyfunction]
fn compare_modes(scenario: &Scenario) -> PyResult<Vec<(String, Trace, Metrics)>> {
    engine::compare_modes(&scenario.inner)
        .map(|runs| {
            runs.into_iter()
                .map(|run| {
                    (
                        run.mode.to_string(),
                        Trace { inner: run.trace },
                        Metrics { inner: run.metrics },
                    )
                })
                .collect()
        })
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Evaluate an advisory profile at the given distances for a session
/// latched at `entry_distance` / `entry_speed`.
#[pyfunction]
fn advisory_curve(
    scenario: &Scenario,
    mode: &str,
    entry_distance: f64,
    entry_speed: f64,
    distances: Vec<f64>,
) -> PyResult<Vec<f64>> {
    let mode = parse_mode(mode)?;
    if mode == Mode::NoDsh {
        return Err(PyValueError::new_err(
            "no-dsh has no advisory profile; run the scenario instead",
        ));
    }
    let cfg = &scenario.inner;
    let state = VehicleState {
        distance: entry_distance,
        speed: entry_speed,
        accel: 0.0,
    };
    let session = match latch_session(&state, &cfg.advisory, &cfg.dsh) {
        LatchOutcome::Latched(s) | LatchOutcome::Degenerate(s) => s,
        LatchOutcome::NotInRange => {
            return Err(PyValueError::new_err(format!(
                "entry distance {entry_distance} is outside the {} m broadcast range",
                cfg.advisory.comm_range
            )));
        }
    };
    Ok(distances
        .into_iter()
        .map(|d| advisory_speed(mode, &session, &cfg.advisory, &cfg.dsh, d))
        .collect())
}

/// Encode the scenario's advisory as a 36-byte frame.
#[pyfunction]
#[pyo3(signature = (scenario, msg_id=1, timestamp_ms=0))]
fn encode_advisory<'py>(
    py: Python<'py>,
    scenario: &Scenario,
    msg_id: u32,
    timestamp_ms: u64,
) -> PyResult<Bound<'py, PyBytes>> {
    let msg =
        v2x::QueueAdvisoryMessage::from_advisory(msg_id, timestamp_ms, &scenario.inner.advisory)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(PyBytes::new(py, &v2x::encode(&msg)))
}

/// Decode a 36-byte frame to a dict of its fields.
#[pyfunction]
fn decode_advisory<'py>(py: Python<'py>, data: &[u8]) -> PyResult<Bound<'py, PyDict>> {
    let msg = v2x::decode(data).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let d = PyDict::new(py);
    d.set_item("msg_id", msg.msg_id)?;
    d.set_item("timestamp_ms", msg.timestamp_ms)?;
    d.set_item("queue_start_m", msg.queue_start_m)?;
    d.set_item("queue_end_m", msg.queue_end_m)?;
    d.set_item("queue_speed_mps", msg.queue_speed_mps)?;
    d.set_item("comm_range_m", msg.comm_range_m)?;
    Ok(d)
}

#[pymodule]
fn dsh_python(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Scenario>()?;
    m.add_class::<Trace>()?;
    m.add_class::<Metrics>()?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(compare_modes, m)?)?;
    m.add_function(wrap_pyfunction!(advisory_curve, m)?)?;
    m.add_function(wrap_pyfunction!(encode_advisory, m)?)?;
    m.add_function(wrap_pyfunction!(decode_advisory, m)?)?;
    m.add("FRAME_LEN", v2x::FRAME_LEN)?;
    m.add(
        "MODES",
        vec!["no-dsh", "step", "single-sigmoid", "step-sigmoid"],
    )?;
    Ok(())
}
