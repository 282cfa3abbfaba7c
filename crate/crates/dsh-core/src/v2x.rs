//! Simulated V2X link: the fixed 36-byte queue-advisory frame, a bit-exact
//! little-endian codec, range-gated delivery from the roadside unit to the
//! on-board unit, and the length-prefixed replay-log record format.

use std::io::{self, Read, Write};

use serde::Serialize;
use thiserror::Error;

use crate::scenario::{QueueAdvisory, ScenarioError, VehicleState};

/// Exact size of an encoded advisory frame in bytes.
pub const FRAME_LEN: usize = 36;

/// Codec failures. Frames of the wrong size and well-sized frames whose
/// fields violate advisory invariants are reported distinctly.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("LengthError: frame is {got} bytes, expected {FRAME_LEN}")]
    Length { got: usize },
    #[error("ValidationError: field `{field}`: {message}")]
    Validation { field: String, message: String },
}

/// Queue advisory as carried on the wire. Wire layout, little-endian, in
/// field order: `msg_id` u32, `timestamp_ms` u64, `queue_start_m` f64,
/// `queue_end_m` f64, `queue_speed_mps` f32, `comm_range_m` f32 — 36 bytes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QueueAdvisoryMessage {
    /// Broadcast sequence number.
    pub msg_id: u32,
    /// Milliseconds since scenario start.
    pub timestamp_ms: u64,
    /// Start of the queue, meters along the route.
    pub queue_start_m: f64,
    /// End of the queue, meters along the route.
    pub queue_end_m: f64,
    /// Average queue speed, m/s.
    pub queue_speed_mps: f32,
    /// Broadcast radius of the roadside unit, meters.
    pub comm_range_m: f32,
}

impl QueueAdvisoryMessage {
    /// Validates and builds a message; field values must satisfy the same
    /// invariants as [`QueueAdvisory`].
    pub fn new(
        msg_id: u32,
        timestamp_ms: u64,
        queue_start_m: f64,
        queue_end_m: f64,
        queue_speed_mps: f32,
        comm_range_m: f32,
    ) -> Result<Self, CodecError> {
        match QueueAdvisory::new(
            queue_start_m,
            queue_end_m,
            queue_speed_mps as f64,
            comm_range_m as f64,
        ) {
            Ok(_) => Ok(QueueAdvisoryMessage {
                msg_id,
                timestamp_ms,
                queue_start_m,
                queue_end_m,
                queue_speed_mps,
                comm_range_m,
            }),
            Err(ScenarioError::Validation { field, message }) => {
                Err(CodecError::Validation { field, message })
            }
            Err(other) => Err(CodecError::Validation {
                field: "advisory".into(),
                message: other.to_string(),
            }),
        }
    }

    /// Builds the broadcast message for an advisory.
    pub fn from_advisory(
        msg_id: u32,
        timestamp_ms: u64,
        advisory: &QueueAdvisory,
    ) -> Result<Self, CodecError> {
        QueueAdvisoryMessage::new(
            msg_id,
            timestamp_ms,
            advisory.queue_start,
            advisory.queue_end,
            advisory.queue_speed as f32,
            advisory.comm_range as f32,
        )
    }

    /// The advisory this message announces.
    pub fn advisory(&self) -> QueueAdvisory {
        QueueAdvisory::new(
            self.queue_start_m,
            self.queue_end_m,
            self.queue_speed_mps as f64,
            self.comm_range_m as f64,
        )
        .expect("message fields are validated at construction")
    }
}

/// Encodes a message into its exact 36-byte frame.
pub fn encode(msg: &QueueAdvisoryMessage) -> [u8; FRAME_LEN] {
    let mut frame = [0u8; FRAME_LEN];
    frame[0..4].copy_from_slice(&msg.msg_id.to_le_bytes());
    frame[4..12].copy_from_slice(&msg.timestamp_ms.to_le_bytes());
    frame[12..20].copy_from_slice(&msg.queue_start_m.to_le_bytes());
    frame[20..28].copy_from_slice(&msg.queue_end_m.to_le_bytes());
    frame[28..32].copy_from_slice(&msg.queue_speed_mps.to_le_bytes());
    frame[32..36].copy_from_slice(&msg.comm_range_m.to_le_bytes());
    frame
}

/// Decodes and validates a frame. Any length other than 36 bytes is a
/// [`CodecError::Length`]; a well-sized frame with invalid field values is
/// a [`CodecError::Validation`].
pub fn decode(frame: &[u8]) -> Result<QueueAdvisoryMessage, CodecError> {
    if frame.len() != FRAME_LEN {
        return Err(CodecError::Length { got: frame.len() });
    }
    let u32_at = |at: usize| u32::from_le_bytes(frame[at..at + 4].try_into().unwrap());
    let u64_at = |at: usize| u64::from_le_bytes(frame[at..at + 8].try_into().unwrap());
    let f64_at = |at: usize| f64::from_le_bytes(frame[at..at + 8].try_into().unwrap());
    let f32_at = |at: usize| f32::from_le_bytes(frame[at..at + 4].try_into().unwrap());
    QueueAdvisoryMessage::new(
        u32_at(0),
        u64_at(4),
        f64_at(12),
        f64_at(20),
        f32_at(28),
        f32_at(32),
    )
}

/// Delivery gate of the roadside unit: the frame reaches the on-board unit
/// only while the gap to the queue head is strictly inside the broadcast
/// range, i.e. `queue_start_m - distance < comm_range_m`.
pub fn rsu_deliver(
    state: &VehicleState,
    msg: &QueueAdvisoryMessage,
) -> Option<QueueAdvisoryMessage> {
    if msg.queue_start_m - state.distance < msg.comm_range_m as f64 {
        Some(*msg)
    } else {
        None
    }
}

/// Errors from reading a replay log.
#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("replay log read failed: {0}")]
    Io(#[from] io::Error),
    #[error("record {record}: length prefix {len} is not {FRAME_LEN}")]
    BadLength { record: usize, len: u32 },
    #[error("record {record}: log truncated")]
    Truncated { record: usize },
}

/// Appends frames to a replay log: each record is a little-endian u32
/// length prefix followed by the frame bytes.
pub fn write_replay<W: Write>(writer: &mut W, frames: &[[u8; FRAME_LEN]]) -> io::Result<()> {
    for frame in frames {
        writer.write_all(&(FRAME_LEN as u32).to_le_bytes())?;
        writer.write_all(frame)?;
    }
    Ok(())
}

/// Reads every record of a replay log written by [`write_replay`].
pub fn read_replay<R: Read>(reader: &mut R) -> Result<Vec<[u8; FRAME_LEN]>, ReplayError> {
    let mut buf = Vec::new();
    reader.read_to_end(&mut buf)?;
    let mut frames = Vec::new();
    let mut offset = 0usize;
    while offset < buf.len() {
        let record = frames.len();
        if buf.len() - offset < 4 {
            return Err(ReplayError::Truncated { record });
        }
        let len = u32::from_le_bytes(buf[offset..offset + 4].try_into().unwrap());
        offset += 4;
        if len as usize != FRAME_LEN {
            return Err(ReplayError::BadLength { record, len });
        }
        if buf.len() - offset < FRAME_LEN {
            return Err(ReplayError::Truncated { record });
        }
        let mut frame = [0u8; FRAME_LEN];
        frame.copy_from_slice(&buf[offset..offset + FRAME_LEN]);
        offset += FRAME_LEN;
        frames.push(frame);
    }
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canonical_msg() -> QueueAdvisoryMessage {
        QueueAdvisoryMessage::new(1, 0, 5200.0, 5700.0, 5.0, 1000.0).unwrap()
    }

    fn state_at(distance: f64) -> VehicleState {
        VehicleState {
            distance,
            speed: 20.0,
            accel: 0.0,
        }
    }

    // Byte-level expectation assembled by hand from the wire layout:
    // msg_id 1, timestamp 0, 5200.0, 5700.0, 5.0f32, 1000.0f32.
    const CANONICAL_FRAME_HEX: &str =
        "010000000000000000000000000000000050b440000000000044b6400000a04000007a44";

    fn hex(bytes: &[u8]) -> String {
        bytes.iter().map(|b| format!("{b:02x}")).collect()
    }

    #[test]
    fn encodes_canonical_message_to_known_bytes() {
        let frame = encode(&canonical_msg());
        assert_eq!(frame.len(), FRAME_LEN);
        assert_eq!(hex(&frame), CANONICAL_FRAME_HEX);
    }

    #[test]
    fn decodes_canonical_frame_back_to_message() {
        let frame = encode(&canonical_msg());
        assert_eq!(decode(&frame).unwrap(), canonical_msg());
    }

    #[test]
    fn rejects_short_and_long_frames_as_length_errors() {
        let frame = encode(&canonical_msg());
        assert_eq!(decode(&frame[..35]), Err(CodecError::Length { got: 35 }));
        let mut long = frame.to_vec();
        long.push(0);
        assert_eq!(decode(&long), Err(CodecError::Length { got: 37 }));
    }

    #[test]
    fn rejects_all_zero_frame_as_validation_error() {
        let err = decode(&[0u8; FRAME_LEN]).unwrap_err();
        assert!(matches!(err, CodecError::Validation { .. }), "got: {err}");
    }

    #[test]
    fn rejects_invalid_fields_at_construction() {
        // Queue that ends before it starts.
        let err = QueueAdvisoryMessage::new(1, 0, 5700.0, 5200.0, 5.0, 1000.0).unwrap_err();
        assert!(matches!(err, CodecError::Validation { ref field, .. } if field == "queue_end"));
        // NaN queue speed.
        let err = QueueAdvisoryMessage::new(1, 0, 5200.0, 5700.0, f32::NAN, 1000.0).unwrap_err();
        assert!(matches!(err, CodecError::Validation { .. }));
    }

    #[test]
    fn delivery_is_strict_at_the_range_boundary() {
        let msg = canonical_msg();
        assert_eq!(rsu_deliver(&state_at(4200.0), &msg), None);
        assert_eq!(rsu_deliver(&state_at(4200.01), &msg), Some(msg));
        assert_eq!(rsu_deliver(&state_at(6000.0), &msg), Some(msg));
        assert_eq!(rsu_deliver(&state_at(4199.0), &msg), None);
    }

    #[test]
    fn message_converts_to_domain_advisory() {
        let adv = canonical_msg().advisory();
        assert_eq!(adv.queue_start, 5200.0);
        assert_eq!(adv.queue_end, 5700.0);
        assert_eq!(adv.queue_speed, 5.0);
        assert_eq!(adv.comm_range, 1000.0);
    }

    #[test]
    fn replay_log_round_trips() {
        let frames: Vec<[u8; FRAME_LEN]> = (0..5)
            .map(|i| {
                encode(
                    &QueueAdvisoryMessage::new(i, i as u64 * 100, 5200.0, 5700.0, 5.0, 1000.0)
                        .unwrap(),
                )
            })
            .collect();
        let mut log = Vec::new();
        write_replay(&mut log, &frames).unwrap();
        assert_eq!(log.len(), frames.len() * (4 + FRAME_LEN));
        let back = read_replay(&mut log.as_slice()).unwrap();
        assert_eq!(back, frames);
    }

    #[test]
    fn replay_log_reports_truncation_and_bad_lengths() {
        let frames = vec![encode(&canonical_msg())];
        let mut log = Vec::new();
        write_replay(&mut log, &frames).unwrap();

        let cut = &log[..log.len() - 1];
        assert!(matches!(
            read_replay(&mut &cut[..]),
            Err(ReplayError::Truncated { record: 0 })
        ));

        let mut bad = log.clone();
        bad[0] = 35;
        assert!(matches!(
            read_replay(&mut bad.as_slice()),
            Err(ReplayError::BadLength { record: 0, len: 35 })
        ));
    }

    #[test]
    fn empty_replay_log_yields_no_frames() {
        assert!(read_replay(&mut &[][..]).unwrap().is_empty());
    }
}
