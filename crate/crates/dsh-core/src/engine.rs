//! Fixed-step simulation engine: drives the vehicle along the route,
//! latches the advisory session on first frame delivery, records a trace
//! sample every step, and reduces the trace to comfort/mobility metrics.
//!
//! The loop is strictly deterministic: no clocks, no threads, no float
//! ambiguity. Running the same scenario twice yields byte-identical CSV.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{baseline_driver, fuel_rate, step_vehicle, track_speed};
use crate::profiles::{advisory_speed, latch_session, DshSession, LatchOutcome};
use crate::scenario::{Mode, QueueAdvisory, ScenarioConfig, VehicleState};
use crate::v2x::{rsu_deliver, QueueAdvisoryMessage};

/// Wall-clock ceiling of simulated time; runs that cannot finish the route
/// (for example a stopped queue) fail instead of looping forever.
pub const HARD_TIMEOUT_S: f64 = 3600.0;

/// One recorded step of the simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    /// Simulated time, s.
    pub t: f64,
    /// Distance travelled, m.
    pub distance: f64,
    /// Speed, m/s.
    pub speed: f64,
    /// Realized acceleration, m/s^2.
    pub accel: f64,
    /// Reference speed the controller tracked this step, m/s.
    pub v_ref: f64,
    /// True from the step the advisory frame was first delivered.
    pub advisory_delivered: bool,
    /// Trapezoidal cumulative fuel, mL.
    pub fuel_cum: f64,
}

/// Complete time-ordered trace of one run; samples are spaced exactly `dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    /// Integration step between samples, s.
    pub dt: f64,
    /// Samples from `t = 0` through the step that reached the route end.
    pub samples: Vec<TraceSample>,
}

impl SimTrace {
    /// Serializes the trace as CSV with a fixed header and nine significant
    /// digits per value, so identical runs produce identical bytes.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.samples.len() * 96 + 64);
        out.push_str("t,distance,speed,accel,v_ref,advisory_delivered,fuel_cum\n");
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{},{:.8e}",
                s.t,
                s.distance,
                s.speed,
                s.accel,
                s.v_ref,
                u8::from(s.advisory_delivered),
                s.fuel_cum
            );
        }
        out
    }
}

/// Comfort and mobility summary of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsReport {
    /// Largest deceleration over the run, m/s^2 (never negative).
    pub peak_decel: f64,
    /// Root-mean-square jerk from first differences of acceleration, m/s^3.
    pub rms_jerk: f64,
    /// Time to cover the route, s.
    pub travel_time: f64,
    /// Trapezoidal fuel total, mL.
    pub fuel_total: f64,
    /// RMS error between reference and actual speed, measured from the
    /// first advisory delivery (baseline: from perception onset), m/s.
    pub tracking_rmse: f64,
}

impl MetricsReport {
    /// Serializes the report as a single JSON object with exactly the five
    /// metric fields.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics serialize to JSON")
    }
}

/// Simulation failures.
#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error(
        "timed out at t = {t:.1} s with {distance:.1} m travelled before reaching the route end"
    )]
    Timeout { t: f64, distance: f64 },
}

/// One mode's run inside a comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeRun {
    pub mode: Mode,
    pub trace: SimTrace,
    pub metrics: MetricsReport,
}

/// Runs one scenario to the end of the route.
///
/// Per step: broadcast and (range-gated) deliver the advisory frame,
/// latching the session on first delivery; pick the reference speed
/// (advisory profile after the latch, speed limit before it, baseline
/// driver for [`Mode::NoDsh`]); track it; integrate; accumulate fuel.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<(SimTrace, MetricsReport), SimError> {
    let mut state = VehicleState {
        distance: 0.0,
        speed: cfg.initial_speed,
        accel: 0.0,
    };
    let mut t: f64 = 0.0;
    let mut fuel_cum = 0.0;
    let mut step: u32 = 0;
    let mut session: Option<(DshSession, QueueAdvisory)> = None;
    let mut samples = Vec::new();

    loop {
        if session.is_none() {
            let msg = QueueAdvisoryMessage::from_advisory(
                step.wrapping_add(1),
                (t * 1000.0).round() as u64,
                &cfg.advisory,
            )
            .expect("validated scenario advisory is wire-representable");
            if let Some(delivered) = rsu_deliver(&state, &msg) {
                let advisory = delivered.advisory();
                match latch_session(&state, &advisory, &cfg.dsh) {
                    LatchOutcome::Latched(s) | LatchOutcome::Degenerate(s) => {
                        session = Some((s, advisory));
                    }
                    // Delivery and latching share the same strict range
                    // gate, so a delivered frame always latches.
                    LatchOutcome::NotInRange => unreachable!("delivered frame must latch"),
                }
            }
        }

        let v_ref = match cfg.mode {
            Mode::NoDsh => baseline_driver(&state, &cfg.advisory, &cfg.dsh, &cfg.vehicle),
            mode => match &session {
                Some((s, advisory)) => advisory_speed(mode, s, advisory, &cfg.dsh, state.distance),
                None => cfg.dsh.speed_limit,
            },
        };

        samples.push(TraceSample {
            t,
            distance: state.distance,
            speed: state.speed,
            accel: state.accel,
            v_ref,
            advisory_delivered: session.is_some(),
            fuel_cum,
        });

        if state.distance >= cfg.route_length {
            break;
        }
        if t > HARD_TIMEOUT_S {
            return Err(SimError::Timeout {
                t,
                distance: state.distance,
            });
        }

        let accel_cmd = track_speed(&state, v_ref, &cfg.vehicle);
        let rate_before = fuel_rate(state.speed, state.accel, &cfg.fuel);
        state = step_vehicle(&state, accel_cmd, cfg.dt);
        let rate_after = fuel_rate(state.speed, state.accel, &cfg.fuel);
        fuel_cum += 0.5 * cfg.dt * (rate_before + rate_after);
        t += cfg.dt;
        step = step.wrapping_add(1);
    }

    let trace = SimTrace {
        dt: cfg.dt,
        samples,
    };
    let metrics = compute_metrics(&trace, cfg);
    Ok((trace, metrics))
}

/// Runs all four modes on the same scenario, in presentation order.
pub fn compare_modes(cfg: &ScenarioConfig) -> Result<Vec<ModeRun>, SimError> {
    Mode::ALL
        .iter()
        .map(|&mode| {
            let mut per_mode = cfg.clone();
            per_mode.mode = mode;
            run_scenario(&per_mode).map(|(trace, metrics)| ModeRun {
                mode,
                trace,
                metrics,
            })
        })
        .collect()
}

fn compute_metrics(trace: &SimTrace, cfg: &ScenarioConfig) -> MetricsReport {
    let samples = &trace.samples;
    let last = samples.last().expect("a run always records at least t = 0");

    let peak_decel = samples.iter().map(|s| -s.accel).fold(0.0, f64::max);

    let rms_jerk = if samples.len() < 2 {
        0.0
    } else {
        let sum_sq: f64 = samples
            .windows(2)
            .map(|w| {
                let jerk = (w[1].accel - w[0].accel) / trace.dt;
                jerk * jerk
            })
            .sum();
        (sum_sq / (samples.len() - 1) as f64).sqrt()
    };

    // Tracking error is only meaningful once something asked the vehicle to
    // deviate: first advisory delivery, or perception onset for the baseline.
    let event = match cfg.mode {
        Mode::NoDsh => samples
            .iter()
            .position(|s| cfg.advisory.queue_start - s.distance < cfg.vehicle.perception_range),
        _ => samples.iter().position(|s| s.advisory_delivered),
    };
    let tracking_rmse = match event {
        None => 0.0,
        Some(idx) => {
            let tail = &samples[idx..];
            let sum_sq: f64 = tail
                .iter()
                .map(|s| {
                    let err = s.v_ref - s.speed;
                    err * err
                })
                .sum();
            (sum_sq / tail.len() as f64).sqrt()
        }
    };

    MetricsReport {
        peak_decel,
        rms_jerk,
        travel_time: last.t,
        fuel_total: last.fuel_cum,
        tracking_rmse,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;

    fn canonical(mode: &str) -> ScenarioConfig {
        parse_scenario(&format!(
            "\
mode = {mode}
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
        ))
        .unwrap()
    }

    #[test]
    fn advisory_latches_when_the_gap_first_drops_below_range() {
        let (trace, _) = run_scenario(&canonical("step")).unwrap();
        let latch = trace
            .samples
            .iter()
            .find(|s| s.advisory_delivered)
            .expect("advisory must be delivered");
        assert!(
            latch.distance > 4200.0 - 1e-9 && latch.distance < 4200.5,
            "latched at {} m",
            latch.distance
        );
        // Monotone flag: never true then false.
        let first = trace
            .samples
            .iter()
            .position(|s| s.advisory_delivered)
            .unwrap();
        assert!(trace.samples[first..].iter().all(|s| s.advisory_delivered));
        assert!(trace.samples[..first].iter().all(|s| !s.advisory_delivered));
    }

    #[test]
    fn step_mode_reaches_queue_speed_before_the_queue() {
        let (trace, _) = run_scenario(&canonical("step")).unwrap();
        let at_queue = trace
            .samples
            .iter()
            .find(|s| s.distance >= 5200.0)
            .expect("route covers the queue");
        assert!(
            (at_queue.speed - 5.0).abs() <= 0.5,
            "speed at queue start was {}",
            at_queue.speed
        );
    }

    #[test]
    fn no_dsh_brakes_at_exactly_the_comfort_limit() {
        let (trace, metrics) = run_scenario(&canonical("no-dsh")).unwrap();
        assert_eq!(metrics.peak_decel, 3.0);
        assert!(trace.samples.iter().all(|s| s.accel >= -3.0));
    }

    #[test]
    fn time_advances_by_dt_and_distance_never_decreases() {
        let (trace, _) = run_scenario(&canonical("single-sigmoid")).unwrap();
        for w in trace.samples.windows(2) {
            assert!((w[1].t - w[0].t - trace.dt).abs() < 1e-9);
            assert!(w[1].distance >= w[0].distance);
            assert!(w[1].fuel_cum >= w[0].fuel_cum);
            assert!(w[1].speed >= 0.0);
        }
    }

    #[test]
    fn equal_speeds_everywhere_make_a_flat_run() {
        let cfg = parse_scenario(
            "\
mode = step
initial_speed = 20
route_length = 8000
dt = 0.01
advisory.queue_start = 5200
advisory.queue_end = 5700
advisory.queue_speed = 20
advisory.comm_range = 1000
dsh.decel_step = 1
dsh.accel_step = 1
dsh.speed_limit = 20
",
        )
        .unwrap();
        let (trace, metrics) = run_scenario(&cfg).unwrap();
        assert!(
            metrics.peak_decel < 1e-9,
            "peak_decel = {}",
            metrics.peak_decel
        );
        assert!(metrics.tracking_rmse < 1e-9);
        assert!(trace.samples.iter().all(|s| s.v_ref == 20.0));
    }

    #[test]
    fn stopped_queue_times_out_instead_of_hanging() {
        let cfg = parse_scenario(
            "\
mode = step
initial_speed = 20
route_length = 8000
dt = 0.1
advisory.queue_start = 5200
advisory.queue_end = 5700
advisory.queue_speed = 0
advisory.comm_range = 1000
dsh.decel_step = 1
dsh.accel_step = 1
dsh.speed_limit = 20
",
        )
        .unwrap();
        match run_scenario(&cfg) {
            Err(SimError::Timeout { t, distance }) => {
                assert!(t > HARD_TIMEOUT_S);
                assert!(distance < cfg.route_length);
            }
            other => panic!("expected timeout, got {other:?}"),
        }
    }

    #[test]
    fn repeated_runs_are_identical() {
        let cfg = canonical("step-sigmoid");
        let (trace_a, metrics_a) = run_scenario(&cfg).unwrap();
        let (trace_b, metrics_b) = run_scenario(&cfg).unwrap();
        assert_eq!(trace_a, trace_b);
        assert_eq!(metrics_a, metrics_b);
        assert_eq!(trace_a.to_csv(), trace_b.to_csv());
    }

    #[test]
    fn csv_has_the_fixed_header_and_one_row_per_sample() {
        let (trace, _) = run_scenario(&canonical("step")).unwrap();
        let csv = trace.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,distance,speed,accel,v_ref,advisory_delivered,fuel_cum"
        );
        assert_eq!(csv.lines().count(), trace.samples.len() + 1);
        // Nine significant digits in scientific notation.
        let first_row = csv.lines().nth(1).unwrap();
        assert!(first_row.starts_with("0.00000000e0,"), "row: {first_row}");
    }

    #[test]
    fn metrics_json_is_one_object_with_five_fields() {
        let (_, metrics) = run_scenario(&canonical("step")).unwrap();
        let json: serde_json::Value = serde_json::from_str(&metrics.to_json()).unwrap();
        let obj = json.as_object().unwrap();
        assert_eq!(obj.len(), 5);
        for key in [
            "peak_decel",
            "rms_jerk",
            "travel_time",
            "fuel_total",
            "tracking_rmse",
        ] {
            assert!(obj[key].is_number(), "missing {key}");
        }
    }

    #[test]
    fn compare_runs_all_four_modes_in_presentation_order() {
        let runs = compare_modes(&canonical("step")).unwrap();
        let modes: Vec<Mode> = runs.iter().map(|r| r.mode).collect();
        assert_eq!(modes, Mode::ALL.to_vec());
        for run in &runs {
            assert!(run.metrics.travel_time > 0.0);
            assert!(run.metrics.fuel_total > 0.0);
        }
    }

    #[test]
    fn all_metrics_are_finite_and_nonnegative() {
        for run in compare_modes(&canonical("step")).unwrap() {
            let m = run.metrics;
            for (name, v) in [
                ("peak_decel", m.peak_decel),
                ("rms_jerk", m.rms_jerk),
                ("travel_time", m.travel_time),
                ("fuel_total", m.fuel_total),
                ("tracking_rmse", m.tracking_rmse),
            ] {
                assert!(v.is_finite() && v >= 0.0, "{}: {name} = {v}", run.mode);
            }
        }
    }
}
