//! JSON Lines encoding of events.
//!
//! Floats are written with exactly six fractional digits so that a line is
//! a pure function of the values it carries, independent of how the
//! platform's shortest-round-trip printer behaves.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

use super::event::Event;

#[derive(Debug, Clone, Copy, Default)]
struct FixedFloat;

impl Formatter for FixedFloat {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        let text = format!("{value:.6}");
        if text == "-0.000000" {
            w.write_all(b"0.000000")
        } else {
            w.write_all(text.as_bytes())
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }
}

/// Serializes any value with the fixed float format.
pub fn to_fixed_json<T: Serialize + ?Sized>(value: &T) -> Result<String, serde_json::Error> {
    let mut buf = Vec::with_capacity(256);
    let mut ser = Serializer::with_formatter(&mut buf, FixedFloat);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// One event as a single line, without the trailing newline.
pub fn to_line(event: &Event) -> String {
    to_fixed_json(event).expect("events always serialize")
}

pub fn parse_line(line: &str) -> Result<Event, serde_json::Error> {
    serde_json::from_str(line)
}

/// Round-trips an event through its line form. The live executive applies
/// the result, so it sees exactly what a replay will see.
pub fn canonicalize(event: &Event) -> (String, Event) {
    let line = to_line(event);
    let parsed = parse_line(&line).expect("a freshly written line parses");
    (line, parsed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::executive::event::{BehaviorRef, EventBody, Telemetry};
    use crate::executive::safety::Violation;

    fn telemetry() -> Telemetry {
        Telemetry {
            x: 1.0 / 3.0,
            y: -0.0000001,
            depth: 3850.25,
            nav_x: 0.0,
            nav_y: 0.0,
            heading: 90.0,
            speed: 1.0,
            vertical_rate: 0.7,
            battery: 1999.983333333,
            dvl_altitude: None,
            descent_weights_dropped: false,
            ascent_weights_dropped: true,
        }
    }

    #[test]
    fn field_order_and_float_format() {
        let e = Event {
            seq: 4,
            t: 12.0,
            body: EventBody::Tick {
                tick: 12,
                vehicle: telemetry(),
            },
        };
        let line = to_line(&e);
        assert!(line.starts_with(r#"{"seq":4,"t":12.000000,"kind":"tick","payload":{"tick":12,"#), "{line}");
        assert!(line.contains(r#""x":0.333333,"y":0.000000,"#), "{line}");
        assert!(!line.contains('\n'));
    }

    #[test]
    fn canonical_form_is_a_fixed_point() {
        let bodies = vec![
            EventBody::Tick {
                tick: 1,
                vehicle: telemetry(),
            },
            EventBody::BehaviorStarted {
                behavior: BehaviorRef {
                    goal_id: 0,
                    step: 2,
                    invocation: "survey_zone_a()".parse().unwrap(),
                    primitive: Some("goto(wp_zone_a_0)".parse().unwrap()),
                },
            },
            EventBody::SafetyViolation {
                violations: vec![Violation::DepthExceeded { margin: 0.123456789 }],
                active: vec![Violation::DepthExceeded { margin: 0.123456789 }],
            },
            EventBody::Warning { message: "x".into() },
        ];
        for (i, body) in bodies.into_iter().enumerate() {
            let e = Event {
                seq: i as u64,
                t: 7.25,
                body,
            };
            let (line, parsed) = canonicalize(&e);
            assert_eq!(parsed.kind(), e.kind());
            let (again, reparsed) = canonicalize(&parsed);
            assert_eq!(line, again);
            assert_eq!(parsed, reparsed);
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_line("{not json").is_err());
        assert!(parse_line(r#"{"seq":0,"t":0.0,"kind":"nope","payload":{}}"#).is_err());
    }
}
