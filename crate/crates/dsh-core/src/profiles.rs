//! Advisory-speed profiles and session latching.
//!
//! When the vehicle first enters the broadcast range the simulator freezes a
//! [`DshSession`]: entry speed, entry distance, and a segmentation of the
//! remaining approach into equal-length deceleration segments (with a
//! mirrored segmentation for the recovery past the queue). Each profile is
//! then a pure function of that frozen session and the current distance:
//!
//! * **Step** — a staircase that drops `decel_step` at every segment
//!   boundary, holds queue speed through the queue, and climbs back in
//!   `accel_step` increments past the queue end;
//! * **Step-sigmoid** — the same staircase with every riser replaced by a
//!   logistic centered mid-segment, so the advisory is smooth;
//! * **Single-sigmoid** — one shallow logistic spanning the whole approach
//!   (and a mirrored one for recovery).
//!
//! All three agree exactly inside the queue (`queue_speed`) and stay within
//! `[queue_speed, max(v_start, speed_limit)]` everywhere.

use crate::scenario::{DshConfig, Mode, QueueAdvisory, VehicleState};

/// Session state frozen at the moment the vehicle first enters the
/// advisory broadcast range.
///
/// Profiles never re-latch: later frames carry the same advisory and are
/// ignored, so the whole approach is planned from this one snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DshSession {
    /// Vehicle speed at entry into broadcast range, m/s.
    pub v_start: f64,
    /// `v_start` minus queue speed, m/s. Non-positive only for degenerate
    /// sessions (vehicle already at or below queue speed).
    pub v_diff: f64,
    /// Distance travelled at the latch instant, m.
    pub d_entry: f64,
    /// Length of one deceleration segment, whole meters (0 when degenerate).
    pub seg_len_dec: f64,
    /// Number of deceleration segments (0 when degenerate).
    pub n_dec: u32,
    /// Length of one acceleration segment, whole meters (0 when the limit
    /// equals queue speed and there is nothing to climb).
    pub seg_len_acc: f64,
    /// Number of acceleration segments.
    pub n_acc: u32,
}

impl DshSession {
    /// True when the vehicle latched at or below queue speed; the approach
    /// phase then pins the advisory to queue speed.
    pub fn is_degenerate(&self) -> bool {
        self.n_dec == 0
    }
}

/// Result of attempting to latch a session at the current state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LatchOutcome {
    /// Inside broadcast range with speed above queue speed; profile active.
    Latched(DshSession),
    /// Inside broadcast range but already at or below queue speed: the
    /// advisory holds queue speed through the queue, then recovery applies.
    Degenerate(DshSession),
    /// The queue head is at or beyond broadcast range; nothing latched.
    NotInRange,
}

/// Splits a speed change `dv` into `ceil(dv / step)` segments over `dist`
/// meters, each `floor(dist / n)` whole meters long (at least one meter, so
/// extremely short approaches still produce a usable staircase).
fn segmentation(dv: f64, step: f64, dist: f64) -> (u32, f64) {
    if dv <= 0.0 {
        return (0, 0.0);
    }
    let n = (dv / step).ceil().max(1.0);
    let seg_len = (dist / n).floor().max(1.0);
    (n as u32, seg_len)
}

/// Latches a session at the current state, if the advisory is in range.
///
/// The gate is strict: a gap exactly equal to `comm_range` is still out of
/// range, matching the delivery rule in [`crate::v2x::rsu_deliver`]. The
/// recovery segmentation mirrors the approach distance, so the climb back
/// to the limit is planned over as much road as the descent.
pub fn latch_session(
    state: &VehicleState,
    advisory: &QueueAdvisory,
    cfg: &DshConfig,
) -> LatchOutcome {
    let gap = advisory.queue_start - state.distance;
    if gap >= advisory.comm_range {
        return LatchOutcome::NotInRange;
    }
    let v_start = state.speed;
    let v_diff = v_start - advisory.queue_speed;
    let d_entry = state.distance;
    let approach = advisory.queue_start - d_entry;
    let (n_acc, seg_len_acc) = segmentation(
        cfg.speed_limit - advisory.queue_speed,
        cfg.accel_step,
        approach,
    );
    if v_diff <= 0.0 {
        return LatchOutcome::Degenerate(DshSession {
            v_start,
            v_diff,
            d_entry,
            seg_len_dec: 0.0,
            n_dec: 0,
            seg_len_acc,
            n_acc,
        });
    }
    let (n_dec, seg_len_dec) = segmentation(v_diff, cfg.decel_step, approach);
    LatchOutcome::Latched(DshSession {
        v_start,
        v_diff,
        d_entry,
        seg_len_dec,
        n_dec,
        seg_len_acc,
        n_acc,
    })
}

/// The standard logistic `1 / (1 + e^-x)`.
pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

enum Phase {
    Approach,
    Queue,
    Recovery,
}

fn phase_of(advisory: &QueueAdvisory, d: f64) -> Phase {
    if d < advisory.queue_start {
        Phase::Approach
    } else if d <= advisory.queue_end {
        Phase::Queue
    } else {
        Phase::Recovery
    }
}

/// Recovery staircase shared by [`step_advisory`]'s recovery phase.
fn step_recovery(session: &DshSession, advisory: &QueueAdvisory, cfg: &DshConfig, d: f64) -> f64 {
    if session.n_acc == 0 {
        return cfg.speed_limit.max(advisory.queue_speed);
    }
    let count = ((d - advisory.queue_end) / session.seg_len_acc)
        .ceil()
        .max(0.0);
    (advisory.queue_speed + cfg.accel_step * count)
        .min(cfg.speed_limit)
        .max(advisory.queue_speed)
}

/// Step profile: `v_start` at entry, then one `decel_step` drop per
/// completed segment, clamped at queue speed; queue speed through the
/// queue; the mirrored staircase up to the limit past the queue end.
pub fn step_advisory(
    session: &DshSession,
    advisory: &QueueAdvisory,
    cfg: &DshConfig,
    d: f64,
) -> f64 {
    match phase_of(advisory, d) {
        Phase::Approach => {
            if session.is_degenerate() {
                return advisory.queue_speed;
            }
            let count = ((d - session.d_entry) / session.seg_len_dec)
                .ceil()
                .max(0.0);
            (session.v_start - cfg.decel_step * count).max(advisory.queue_speed)
        }
        Phase::Queue => advisory.queue_speed,
        Phase::Recovery => step_recovery(session, advisory, cfg, d),
    }
}

/// Step-sigmoid profile: the step staircase with each riser replaced by a
/// logistic of slope `k_step_sigmoid` centered halfway through its segment,
/// summed over all segments. Same phase structure and clamps as the step
/// profile.
pub fn step_sigmoid_advisory(
    session: &DshSession,
    advisory: &QueueAdvisory,
    cfg: &DshConfig,
    d: f64,
) -> f64 {
    match phase_of(advisory, d) {
        Phase::Approach => {
            if session.is_degenerate() {
                return advisory.queue_speed;
            }
            let mut drop = 0.0;
            for k in 0..session.n_dec {
                let center = session.d_entry + (k as f64 + 0.5) * session.seg_len_dec;
                drop += logistic(cfg.k_step_sigmoid * (d - center));
            }
            (session.v_start - cfg.decel_step * drop)
                .min(session.v_start)
                .max(advisory.queue_speed)
        }
        Phase::Queue => advisory.queue_speed,
        Phase::Recovery => {
            if session.n_acc == 0 {
                return cfg.speed_limit.max(advisory.queue_speed);
            }
            let mut gain = 0.0;
            for k in 0..session.n_acc {
                let center = advisory.queue_end + (k as f64 + 0.5) * session.seg_len_acc;
                gain += logistic(cfg.k_step_sigmoid * (d - center));
            }
            (advisory.queue_speed + cfg.accel_step * gain)
                .min(cfg.speed_limit)
                .max(advisory.queue_speed)
        }
    }
}

/// Approach value of the single-sigmoid profile before clamping; the curve
/// is point-symmetric about the approach midpoint, where it equals the mean
/// of `v_start` and queue speed.
fn single_sigmoid_approach_raw(
    session: &DshSession,
    advisory: &QueueAdvisory,
    cfg: &DshConfig,
    d: f64,
) -> f64 {
    let center = 0.5 * (session.d_entry + advisory.queue_start);
    session.v_start - session.v_diff * logistic(cfg.k_single_sigmoid * (d - center))
}

/// Single-sigmoid profile: one logistic of slope `k_single_sigmoid`
/// spanning the whole approach (centered at its midpoint), queue speed
/// through the queue, and a mirrored logistic up to the limit centered half
/// an approach length past the queue end.
pub fn single_sigmoid_advisory(
    session: &DshSession,
    advisory: &QueueAdvisory,
    cfg: &DshConfig,
    d: f64,
) -> f64 {
    match phase_of(advisory, d) {
        Phase::Approach => {
            if session.is_degenerate() {
                return advisory.queue_speed;
            }
            single_sigmoid_approach_raw(session, advisory, cfg, d)
                .min(session.v_start)
                .max(advisory.queue_speed)
        }
        Phase::Queue => advisory.queue_speed,
        Phase::Recovery => {
            let v_rec = cfg.speed_limit - advisory.queue_speed;
            if v_rec <= 0.0 {
                return cfg.speed_limit.max(advisory.queue_speed);
            }
            let center = advisory.queue_end + 0.5 * (advisory.queue_start - session.d_entry);
            let raw = advisory.queue_speed + v_rec * logistic(cfg.k_single_sigmoid * (d - center));
            raw.min(cfg.speed_limit).max(advisory.queue_speed)
        }
    }
}

/// Dispatches to the profile for `mode`.
///
/// # Panics
///
/// Panics for [`Mode::NoDsh`], which has no advisory profile; the baseline
/// driver in [`crate::dynamics::baseline_driver`] covers that mode.
pub fn advisory_speed(
    mode: Mode,
    session: &DshSession,
    advisory: &QueueAdvisory,
    cfg: &DshConfig,
    d: f64,
) -> f64 {
    match mode {
        Mode::Step => step_advisory(session, advisory, cfg, d),
        Mode::StepSigmoid => step_sigmoid_advisory(session, advisory, cfg, d),
        Mode::SingleSigmoid => single_sigmoid_advisory(session, advisory, cfg, d),
        Mode::NoDsh => panic!("no-dsh has no advisory profile; use dynamics::baseline_driver"),
    }
}
