//! Byte-exact frame codec: `[seq][kind][len][payload][crc16]`, CRC-16/CCITT
//! (poly 0x1021, init 0xFFFF) over everything before it, big-endian.

use crc::{Crc, CRC_16_IBM_3740};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::planner::Priority;
use crate::symbolic::{Conjunction, Symbol};
use crate::values::{ConcreteValue, Point3, Unit};

pub const MAX_PAYLOAD: usize = 64;
pub const MAX_FRAME: usize = 80;
const HEADER: usize = 3;
const CRC: Crc<u16> = Crc::<u16>::new(&CRC_16_IBM_3740);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("payload of {0} bytes exceeds {MAX_PAYLOAD}")]
    PayloadTooLarge(usize),
    #[error("crc mismatch")]
    CrcMismatch,
    #[error("frame truncated or length field inconsistent")]
    Truncated,
    #[error("unknown frame kind {0}")]
    UnknownKind(u8),
    #[error("invalid payload: {0}")]
    InvalidPayload(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[repr(u8)]
pub enum FrameKind {
    InjectGoal = 1,
    OverridePlanRef = 2,
    AbortToRecovery = 3,
    SetBinding = 4,
    Ack = 5,
}

impl FrameKind {
    fn from_byte(b: u8) -> Result<Self, CodecError> {
        Ok(match b {
            1 => FrameKind::InjectGoal,
            2 => FrameKind::OverridePlanRef,
            3 => FrameKind::AbortToRecovery,
            4 => FrameKind::SetBinding,
            5 => FrameKind::Ack,
            other => return Err(CodecError::UnknownKind(other)),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AcousticCommand {
    InjectGoal { condition: Conjunction, priority: Priority },
    /// Adopt the mission's pre-stored plan `plan_index` for goal `goal_id`.
    OverridePlanRef { goal_id: u32, plan_index: u8 },
    AbortToRecovery,
    SetBinding { symbol: Symbol, value: ConcreteValue },
    Ack,
}

impl AcousticCommand {
    pub fn kind(&self) -> FrameKind {
        match self {
            AcousticCommand::InjectGoal { .. } => FrameKind::InjectGoal,
            AcousticCommand::OverridePlanRef { .. } => FrameKind::OverridePlanRef,
            AcousticCommand::AbortToRecovery => FrameKind::AbortToRecovery,
            AcousticCommand::SetBinding { .. } => FrameKind::SetBinding,
            AcousticCommand::Ack => FrameKind::Ack,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub seq: u8,
    pub command: AcousticCommand,
}

fn priority_byte(p: Priority) -> u8 {
    p as u8
}

fn priority_from(b: u8) -> Result<Priority, CodecError> {
    match b {
        0 => Ok(Priority::Safety),
        1 => Ok(Priority::Operator),
        2 => Ok(Priority::SelfDirected),
        other => Err(CodecError::InvalidPayload(format!("priority {other}"))),
    }
}

fn unit_byte(u: Unit) -> u8 {
    match u {
        Unit::Metres => 0,
        Unit::MetresPerSecond => 1,
        Unit::Seconds => 2,
        Unit::WattHours => 3,
        Unit::Degrees => 4,
    }
}

fn unit_from(b: u8) -> Result<Unit, CodecError> {
    Ok(match b {
        0 => Unit::Metres,
        1 => Unit::MetresPerSecond,
        2 => Unit::Seconds,
        3 => Unit::WattHours,
        4 => Unit::Degrees,
        other => return Err(CodecError::InvalidPayload(format!("unit {other}"))),
    })
}

/// Rounds to a fixed-point i32, rejecting values that do not fit.
fn fixed(v: f64, scale: f64) -> Result<[u8; 4], CodecError> {
    let q = (v * scale).round();
    if !q.is_finite() || q < i32::MIN as f64 || q > i32::MAX as f64 {
        return Err(CodecError::InvalidPayload(format!("{v} does not fit the compact encoding")));
    }
    Ok((q as i32).to_be_bytes())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        let end = self.pos.checked_add(n).filter(|e| *e <= self.bytes.len());
        let end = end.ok_or_else(|| CodecError::InvalidPayload("payload too short".into()))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }

    fn fixed(&mut self, scale: f64) -> Result<f64, CodecError> {
        let b = self.take(4)?;
        Ok(i32::from_be_bytes([b[0], b[1], b[2], b[3]]) as f64 / scale)
    }

    fn text(&mut self, n: usize) -> Result<&'a str, CodecError> {
        std::str::from_utf8(self.take(n)?).map_err(|_| CodecError::InvalidPayload("not utf-8".into()))
    }

    fn finish(&self) -> Result<(), CodecError> {
        if self.pos == self.bytes.len() {
            Ok(())
        } else {
            Err(CodecError::InvalidPayload("trailing bytes".into()))
        }
    }
}

fn encode_value(value: &ConcreteValue, out: &mut Vec<u8>) -> Result<(), CodecError> {
    let count = |n: usize| u8::try_from(n).map_err(|_| CodecError::PayloadTooLarge(n));
    match value {
        ConcreteValue::Scalar { value, unit } => {
            out.extend([1, unit_byte(*unit)]);
            out.extend(fixed(*value, 1000.0)?);
        }
        ConcreteValue::Point(p) => {
            out.push(2);
            for v in [p.x, p.y, p.depth] {
                out.extend(fixed(v, 100.0)?);
            }
        }
        ConcreteValue::Polygon(poly) => {
            out.extend([3, count(poly.vertices().len())?]);
            for v in poly.vertices() {
                out.extend(fixed(v.x, 100.0)?);
                out.extend(fixed(v.y, 100.0)?);
            }
        }
        ConcreteValue::Path(points) => {
            out.extend([4, count(points.len())?]);
            for p in points {
                for v in [p.x, p.y, p.depth] {
                    out.extend(fixed(v, 100.0)?);
                }
            }
        }
        ConcreteValue::Label(text) => {
            out.push(5);
            out.extend(text.as_bytes());
        }
    }
    Ok(())
}

fn decode_value(r: &mut Reader<'_>) -> Result<ConcreteValue, CodecError> {
    let value = match r.u8()? {
        1 => {
            let unit = unit_from(r.u8()?)?;
            ConcreteValue::Scalar {
                value: r.fixed(1000.0)?,
                unit,
            }
        }
        2 => ConcreteValue::Point(Point3::new(r.fixed(100.0)?, r.fixed(100.0)?, r.fixed(100.0)?)),
        3 => {
            let n = r.u8()? as usize;
            let mut pts = Vec::with_capacity(n);
            for _ in 0..n {
                pts.push((r.fixed(100.0)?, r.fixed(100.0)?));
            }
            ConcreteValue::polygon(&pts).map_err(|e| CodecError::InvalidPayload(e.to_string()))?
        }
        4 => {
            let n = r.u8()? as usize;
            let mut pts = Vec::with_capacity(n);
            for _ in 0..n {
                pts.push(Point3::new(r.fixed(100.0)?, r.fixed(100.0)?, r.fixed(100.0)?));
            }
            ConcreteValue::Path(pts)
        }
        5 => {
            let rest = r.bytes.len() - r.pos;
            ConcreteValue::Label(r.text(rest)?.to_string())
        }
        other => return Err(CodecError::InvalidPayload(format!("value tag {other}"))),
    };
    value
        .validate()
        .map_err(|e| CodecError::InvalidPayload(e.to_string()))?;
    Ok(value)
}

fn encode_payload(cmd: &AcousticCommand) -> Result<Vec<u8>, CodecError> {
    let mut out = Vec::new();
    match cmd {
        AcousticCommand::InjectGoal { condition, priority } => {
            out.push(priority_byte(*priority));
            let text: Vec<String> = condition.literals().map(|l| l.to_string()).collect();
            out.extend(text.join("&").as_bytes());
        }
        AcousticCommand::OverridePlanRef { goal_id, plan_index } => {
            out.extend(goal_id.to_be_bytes());
            out.push(*plan_index);
        }
        AcousticCommand::AbortToRecovery => out.push(0x01),
        AcousticCommand::SetBinding { symbol, value } => {
            let name = symbol.as_str().as_bytes();
            out.push(name.len() as u8);
            out.extend(name);
            encode_value(value, &mut out)?;
        }
        AcousticCommand::Ack => {}
    }
    Ok(out)
}

fn decode_payload(kind: FrameKind, payload: &[u8]) -> Result<AcousticCommand, CodecError> {
    let mut r = Reader { bytes: payload, pos: 0 };
    let cmd = match kind {
        FrameKind::InjectGoal => {
            let priority = priority_from(r.u8()?)?;
            let rest = payload.len() - 1;
            let text = r.text(rest)?;
            let condition = text
                .parse::<Conjunction>()
                .map_err(|e| CodecError::InvalidPayload(e.to_string()))?;
            AcousticCommand::InjectGoal { condition, priority }
        }
        FrameKind::OverridePlanRef => {
            let b = r.take(4)?;
            let goal_id = u32::from_be_bytes([b[0], b[1], b[2], b[3]]);
            AcousticCommand::OverridePlanRef {
                goal_id,
                plan_index: r.u8()?,
            }
        }
        FrameKind::AbortToRecovery => {
            if r.u8()? != 0x01 {
                return Err(CodecError::InvalidPayload("abort marker".into()));
            }
            AcousticCommand::AbortToRecovery
        }
        FrameKind::SetBinding => {
            let n = r.u8()? as usize;
            let symbol = r
                .text(n)?
                .parse::<Symbol>()
                .map_err(|e| CodecError::InvalidPayload(e.to_string()))?;
            AcousticCommand::SetBinding {
                symbol,
                value: decode_value(&mut r)?,
            }
        }
        FrameKind::Ack => AcousticCommand::Ack,
    };
    r.finish()?;
    Ok(cmd)
}

pub fn encode_frame(seq: u8, cmd: &AcousticCommand) -> Result<Vec<u8>, CodecError> {
    let payload = encode_payload(cmd)?;
    if payload.len() > MAX_PAYLOAD {
        return Err(CodecError::PayloadTooLarge(payload.len()));
    }
    let mut out = Vec::with_capacity(HEADER + payload.len() + 2);
    out.extend([seq, cmd.kind() as u8, payload.len() as u8]);
    out.extend(&payload);
    out.extend(CRC.checksum(&out).to_be_bytes());
    Ok(out)
}

pub fn decode_frame(bytes: &[u8]) -> Result<Frame, CodecError> {
    if bytes.len() < HEADER + 2 || bytes.len() > MAX_FRAME {
        return Err(CodecError::Truncated);
    }
    let len = bytes[2] as usize;
    if bytes.len() != HEADER + len + 2 {
        return Err(CodecError::Truncated);
    }
    let body = &bytes[..HEADER + len];
    let crc = u16::from_be_bytes([bytes[HEADER + len], bytes[HEADER + len + 1]]);
    if CRC.checksum(body) != crc {
        return Err(CodecError::CrcMismatch);
    }
    if len > MAX_PAYLOAD {
        return Err(CodecError::PayloadTooLarge(len));
    }
    let kind = FrameKind::from_byte(bytes[1])?;
    Ok(Frame {
        seq: bytes[0],
        command: decode_payload(kind, &bytes[HEADER..HEADER + len])?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::sym;
    use proptest::prelude::*;

    fn ready() -> AcousticCommand {
        AcousticCommand::InjectGoal {
            condition: "ready_for_recovery()".parse().unwrap(),
            priority: Priority::Operator,
        }
    }

    #[test]
    fn crc_matches_reference_check_value() {
        assert_eq!(CRC.checksum(b"123456789"), 0x29B1);
    }

    #[test]
    fn inject_goal_is_compact_and_round_trips() {
        let bytes = encode_frame(3, &ready()).unwrap();
        assert!(bytes.len() <= 40, "{}", bytes.len());
        let f = decode_frame(&bytes).unwrap();
        assert_eq!((f.seq, f.command), (3, ready()));
    }

    #[test]
    fn ack_is_five_bytes() {
        let bytes = encode_frame(7, &AcousticCommand::Ack).unwrap();
        assert_eq!(bytes.len(), 5);
        assert_eq!(decode_frame(&bytes).unwrap(), Frame { seq: 7, command: AcousticCommand::Ack });
    }

    #[test]
    fn abort_is_one_byte_payload() {
        let bytes = encode_frame(0, &AcousticCommand::AbortToRecovery).unwrap();
        assert_eq!(&bytes[..4], &[0, 3, 1, 1]);
        assert_eq!(bytes.len(), 6);
    }

    #[test]
    fn bit_flip_is_detected() {
        let mut bytes = encode_frame(1, &ready()).unwrap();
        bytes[5] ^= 0x10;
        assert_eq!(decode_frame(&bytes), Err(CodecError::CrcMismatch));
    }

    #[test]
    fn oversized_goal_rejected_at_send() {
        let long: Conjunction = (0..6)
            .map(|i| format!("did_survey(zone_number_{i})"))
            .collect::<Vec<_>>()
            .join(" & ")
            .parse()
            .unwrap();
        let cmd = AcousticCommand::InjectGoal {
            condition: long,
            priority: Priority::Operator,
        };
        assert!(matches!(encode_frame(0, &cmd), Err(CodecError::PayloadTooLarge(_))));
    }

    #[test]
    fn set_binding_round_trips_in_compact_units() {
        let poly = ConcreteValue::polygon(&[(0.0, 0.0), (600.25, 0.0), (600.25, 600.0), (0.0, 600.0)]).unwrap();
        for value in [
            poly,
            ConcreteValue::Point(Point3::new(12.34, -5.67, 3850.0)),
            ConcreteValue::scalar(3850.125, Unit::Metres),
            ConcreteValue::Label("descent_cfg".into()),
        ] {
            let cmd = AcousticCommand::SetBinding { symbol: sym("zone_a"), value };
            let f = decode_frame(&encode_frame(9, &cmd).unwrap()).unwrap();
            assert_eq!(f.command, cmd);
        }
    }

    #[test]
    fn override_ref_round_trips() {
        let cmd = AcousticCommand::OverridePlanRef { goal_id: 70_000, plan_index: 2 };
        assert_eq!(decode_frame(&encode_frame(200, &cmd).unwrap()).unwrap().command, cmd);
    }

    proptest! {
        #[test]
        fn decode_is_total(bytes in prop::collection::vec(any::<u8>(), 0..=80)) {
            if let Ok(frame) = decode_frame(&bytes) {
                let again = encode_frame(frame.seq, &frame.command).unwrap();
                prop_assert_eq!(decode_frame(&again).unwrap(), frame);
            }
        }

        #[test]
        fn decode_is_total_with_valid_crc(seq in any::<u8>(), kind in 0u8..7, payload in prop::collection::vec(any::<u8>(), 0..=64)) {
            let mut bytes = vec![seq, kind, payload.len() as u8];
            bytes.extend(&payload);
            let crc = CRC.checksum(&bytes);
            bytes.extend(crc.to_be_bytes());
            if let Ok(frame) = decode_frame(&bytes) {
                let again = encode_frame(frame.seq, &frame.command).unwrap();
                prop_assert_eq!(decode_frame(&again).unwrap(), frame);
            }
        }
    }
}
