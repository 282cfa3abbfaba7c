//! Longitudinal vehicle model: a point-mass integrator, a saturated
//! proportional speed-tracking controller, the abrupt no-advisory driver
//! used as the comparison baseline, and a polynomial fuel-rate proxy.

use crate::scenario::{DshConfig, QueueAdvisory, ScenarioError, VehicleState};

/// Longitudinal limits and controller tuning for the ego vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleParams {
    /// Maximum acceleration, m/s^2. Positive.
    pub max_accel: f64,
    /// Maximum deceleration magnitude, m/s^2. Positive.
    pub max_decel: f64,
    /// Proportional speed-tracking gain, 1/s. Positive.
    pub tracking_gain: f64,
    /// Distance at which the baseline driver reacts to the queue, m. Positive.
    pub perception_range: f64,
}

impl VehicleParams {
    /// Validates and builds vehicle parameters.
    pub fn new(
        max_accel: f64,
        max_decel: f64,
        tracking_gain: f64,
        perception_range: f64,
    ) -> Result<Self, ScenarioError> {
        let fields = [
            (max_accel, "max_accel"),
            (max_decel, "max_decel"),
            (tracking_gain, "tracking_gain"),
            (perception_range, "perception_range"),
        ];
        for (value, field) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(ScenarioError::Validation {
                    field: field.into(),
                    message: "must be a positive finite number".into(),
                });
            }
        }
        Ok(VehicleParams {
            max_accel,
            max_decel,
            tracking_gain,
            perception_range,
        })
    }
}

impl Default for VehicleParams {
    fn default() -> Self {
        VehicleParams {
            max_accel: 2.0,
            max_decel: 3.0,
            tracking_gain: 0.5,
            perception_range: 150.0,
        }
    }
}

/// Coefficients of the fuel-rate proxy, mL/s. See [`fuel_rate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuelCoeffs {
    /// Idle floor, mL/s.
    pub c0: f64,
    /// Linear speed term, mL/s per m/s.
    pub c1: f64,
    /// Cubic speed (aerodynamic) term, mL/s per (m/s)^3.
    pub c2: f64,
    /// Positive-acceleration load term, mL/s per (m^2/s^3).
    pub c3: f64,
}

impl FuelCoeffs {
    /// Validates and builds fuel coefficients; all must be non-negative.
    pub fn new(c0: f64, c1: f64, c2: f64, c3: f64) -> Result<Self, ScenarioError> {
        for (value, field) in [(c0, "c0"), (c1, "c1"), (c2, "c2"), (c3, "c3")] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(ScenarioError::Validation {
                    field: field.into(),
                    message: "must be a non-negative finite number".into(),
                });
            }
        }
        Ok(FuelCoeffs { c0, c1, c2, c3 })
    }
}

impl Default for FuelCoeffs {
    fn default() -> Self {
        FuelCoeffs {
            c0: 0.3,
            c1: 0.02,
            c2: 2e-5,
            c3: 0.05,
        }
    }
}

/// Proportional speed tracking saturated at the comfort limits: the command
/// is `tracking_gain * (v_ref - speed)` clamped into
/// `[-max_decel, max_accel]`.
pub fn track_speed(state: &VehicleState, v_ref: f64, params: &VehicleParams) -> f64 {
    (params.tracking_gain * (v_ref - state.speed)).clamp(-params.max_decel, params.max_accel)
}

/// Reference speed of the driver with no advisory: hold the limit until the
/// queue head is within perception range, crawl at queue speed through the
/// queue, resume the limit past its end.
pub fn baseline_driver(
    state: &VehicleState,
    advisory: &QueueAdvisory,
    cfg: &DshConfig,
    params: &VehicleParams,
) -> f64 {
    if state.distance > advisory.queue_end {
        return cfg.speed_limit;
    }
    let gap = advisory.queue_start - state.distance;
    if gap >= params.perception_range {
        cfg.speed_limit
    } else {
        advisory.queue_speed
    }
}

/// Advances the state one step with semi-implicit Euler: the new speed
/// (never negative) moves the vehicle. The reported acceleration is the
/// commanded one unless the zero-speed clamp engaged, in which case it is
/// the realized `(speed' - speed) / dt`.
pub fn step_vehicle(state: &VehicleState, accel_cmd: f64, dt: f64) -> VehicleState {
    debug_assert!(dt > 0.0, "dt must be positive");
    let raw = state.speed + accel_cmd * dt;
    let (speed, accel) = if raw >= 0.0 {
        (raw, accel_cmd)
    } else {
        (0.0, (0.0 - state.speed) / dt)
    };
    VehicleState {
        distance: state.distance + speed * dt,
        speed,
        accel,
    }
}

/// Instantaneous fuel-rate proxy in mL/s:
/// `c0 + c1*v + c2*v^3 + c3*max(0, a)*v`. Braking consumes no extra fuel;
/// standing still consumes the idle floor `c0`.
pub fn fuel_rate(speed: f64, accel: f64, coeffs: &FuelCoeffs) -> f64 {
    coeffs.c0 + coeffs.c1 * speed + coeffs.c2 * speed.powi(3) + coeffs.c3 * accel.max(0.0) * speed
}
