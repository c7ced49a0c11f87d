//! Global safety envelope and the pure constraint check.

use serde::{Deserialize, Serialize};

use crate::sim::SensorFrame;
use crate::symbolic::{Atom, Conjunction, Literal, Symbol};
use crate::Polygon;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeepOutZone {
    pub name: Symbol,
    pub polygon: Polygon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SafetyEnvelope {
    pub max_depth: f64,
    #[serde(default)]
    pub keep_out: Vec<KeepOutZone>,
    pub min_battery: f64,
    #[serde(default)]
    pub min_altitude: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    DepthExceeded { margin: f64 },
    KeepOut { zone: Symbol },
    BatteryLow { margin: f64 },
    AltitudeLow { margin: f64 },
}

impl Violation {
    /// Identity of the violated constraint, ignoring the margin.
    pub fn key(&self) -> String {
        match self {
            Violation::DepthExceeded { .. } => "depth".into(),
            Violation::KeepOut { zone } => format!("keep_out:{zone}"),
            Violation::BatteryLow { .. } => "battery".into(),
            Violation::AltitudeLow { .. } => "altitude".into(),
        }
    }

    /// The condition whose achievement resolves this violation.
    pub fn recovery_goal(&self) -> Conjunction {
        let atom: Atom = match self {
            Violation::KeepOut { zone } => Atom::new(crate::symbolic::sym("clear_of"), vec![zone.clone()]),
            _ => "at_depth(surface)".parse().expect("literal atom"),
        };
        Conjunction::new([Literal::new(atom, true)]).expect("single literal")
    }
}

pub fn check_safety(frame: &SensorFrame, env: &SafetyEnvelope) -> Vec<Violation> {
    let mut out = Vec::new();
    if frame.depth > env.max_depth {
        out.push(Violation::DepthExceeded {
            margin: frame.depth - env.max_depth,
        });
    }
    let here = frame.position.xy();
    for zone in &env.keep_out {
        if zone.polygon.contains(here) {
            out.push(Violation::KeepOut { zone: zone.name.clone() });
        }
    }
    if frame.battery < env.min_battery {
        out.push(Violation::BatteryLow {
            margin: env.min_battery - frame.battery,
        });
    }
    if let (Some(min), Some(alt)) = (env.min_altitude, frame.dvl_altitude) {
        if alt < min {
            out.push(Violation::AltitudeLow { margin: min - alt });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;
    use crate::symbolic::sym;
    use crate::values::Point3;

    fn frame(x: f64, y: f64, depth: f64, battery: f64) -> SensorFrame {
        SensorFrame {
            position: Point3::new(x, y, depth),
            nav_position: Point2::new(x, y),
            depth,
            dvl_altitude: None,
            battery,
            heading: 0.0,
            t: 0.0,
        }
    }

    fn envelope() -> SafetyEnvelope {
        SafetyEnvelope {
            max_depth: 6000.0,
            keep_out: vec![KeepOutZone {
                name: sym("keepout_1"),
                polygon: Polygon::new(vec![
                    Point2::new(0.0, 1100.0),
                    Point2::new(1000.0, 1100.0),
                    Point2::new(1000.0, 1400.0),
                    Point2::new(0.0, 1400.0),
                ])
                .unwrap(),
            }],
            min_battery: 50.0,
            min_altitude: Some(10.0),
        }
    }

    #[test]
    fn nominal_is_clear() {
        assert!(check_safety(&frame(500.0, 500.0, 4000.0, 1000.0), &envelope()).is_empty());
    }

    #[test]
    fn keep_out_detected_by_point_in_polygon() {
        let env = envelope();
        for (x, y) in [(500.0, 1200.0), (10.0, 1399.0), (999.0, 1101.0), (500.0, 1050.0), (-5.0, 1200.0)] {
            let got = check_safety(&frame(x, y, 100.0, 1000.0), &env);
            let inside = x >= 0.0 && x <= 1000.0 && y >= 1100.0 && y <= 1400.0;
            assert_eq!(got.len(), usize::from(inside), "({x}, {y})");
            if inside {
                assert_eq!(got[0], Violation::KeepOut { zone: sym("keepout_1") });
            }
        }
    }

    #[test]
    fn battery_margin() {
        let got = check_safety(&frame(0.0, 0.0, 10.0, 40.0), &envelope());
        assert_eq!(got, vec![Violation::BatteryLow { margin: 10.0 }]);
    }

    #[test]
    fn depth_and_altitude() {
        let mut f = frame(0.0, 0.0, 6012.0, 1000.0);
        f.dvl_altitude = Some(4.0);
        let got = check_safety(&f, &envelope());
        assert_eq!(got[0], Violation::DepthExceeded { margin: 12.0 });
        assert_eq!(got[1], Violation::AltitudeLow { margin: 6.0 });
        assert_eq!(got[0].recovery_goal().to_string(), "at_depth(surface)");
        assert_eq!(
            Violation::KeepOut { zone: sym("keepout_1") }.recovery_goal().to_string(),
            "clear_of(keepout_1)"
        );
    }
}
