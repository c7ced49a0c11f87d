//! Concrete values the numerics store associates with symbols.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Point2, PolygonError};
use crate::{Point, Polygon};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub depth: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, depth: f64) -> Self {
        Point3 { x, y, depth }
    }

    pub fn xy(&self) -> Point {
        Point2::new(self.x, self.y)
    }
}

impl From<Point> for Point3 {
    fn from(p: Point) -> Self {
        Point3::new(p.x, p.y, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Unit {
    #[serde(rename = "m")]
    Metres,
    #[serde(rename = "m/s")]
    MetresPerSecond,
    #[serde(rename = "s")]
    Seconds,
    #[serde(rename = "Wh")]
    WattHours,
    #[serde(rename = "deg")]
    Degrees,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValueError {
    #[error("invalid polygon: {0}")]
    Polygon(#[from] PolygonError),
    #[error("path must contain at least one point")]
    EmptyPath,
    #[error("non-finite number in value")]
    NonFinite,
    #[error("label must be non-empty")]
    EmptyLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConcreteValue {
    Scalar { value: f64, unit: Unit },
    Point(Point3),
    Polygon(Polygon),
    Path(Vec<Point3>),
    Label(String),
}

impl ConcreteValue {
    pub fn scalar(value: f64, unit: Unit) -> Self {
        ConcreteValue::Scalar { value, unit }
    }

    pub fn point(x: f64, y: f64) -> Self {
        ConcreteValue::Point(Point3::new(x, y, 0.0))
    }

    pub fn polygon(vertices: &[(f64, f64)]) -> Result<Self, ValueError> {
        let verts = vertices.iter().map(|&(x, y)| Point2::new(x, y)).collect();
        Ok(ConcreteValue::Polygon(Polygon::new(verts)?))
    }

    pub fn kind(&self) -> ValueKind {
        match self {
            ConcreteValue::Scalar { .. } => ValueKind::Scalar,
            ConcreteValue::Point(_) => ValueKind::Point,
            ConcreteValue::Polygon(_) => ValueKind::Polygon,
            ConcreteValue::Path(_) => ValueKind::Path,
            ConcreteValue::Label(_) => ValueKind::Label,
        }
    }

    pub fn validate(&self) -> Result<(), ValueError> {
        let finite = |p: &Point3| p.x.is_finite() && p.y.is_finite() && p.depth.is_finite();
        match self {
            ConcreteValue::Scalar { value, .. } if !value.is_finite() => Err(ValueError::NonFinite),
            ConcreteValue::Point(p) if !finite(p) => Err(ValueError::NonFinite),
            ConcreteValue::Path(pts) if pts.is_empty() => Err(ValueError::EmptyPath),
            ConcreteValue::Path(pts) if !pts.iter().all(finite) => Err(ValueError::NonFinite),
            ConcreteValue::Label(s) if s.is_empty() => Err(ValueError::EmptyLabel),
            // polygons are validated on construction
            _ => Ok(()),
        }
    }

    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            ConcreteValue::Scalar { value, .. } => Some(*value),
            _ => None,
        }
    }

    pub fn as_point(&self) -> Option<Point3> {
        match self {
            ConcreteValue::Point(p) => Some(*p),
            _ => None,
        }
    }

    pub fn as_polygon(&self) -> Option<&Polygon> {
        match self {
            ConcreteValue::Polygon(p) => Some(p),
            _ => None,
        }
    }

    pub fn as_path(&self) -> Option<&[Point3]> {
        match self {
            ConcreteValue::Path(p) => Some(p),
            _ => None,
        }
    }
}

/// Shape of a concrete value, used to type behavior parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    #[default]
    Any,
    Scalar,
    Point,
    Polygon,
    Path,
    Label,
}

impl ValueKind {
    pub fn admits(self, other: ValueKind) -> bool {
        self == ValueKind::Any || self == other
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_shapes() {
        let v: ConcreteValue =
            serde_json::from_str(r#"{"scalar":{"value":3850.0,"unit":"m"}}"#).unwrap();
        assert_eq!(v, ConcreteValue::scalar(3850.0, Unit::Metres));
        let p: ConcreteValue = serde_json::from_str(r#"{"point":{"x":1,"y":2}}"#).unwrap();
        assert_eq!(p, ConcreteValue::point(1.0, 2.0));
        let z: ConcreteValue = serde_json::from_str(
            r#"{"polygon":[{"x":0,"y":0},{"x":10,"y":0},{"x":10,"y":10}]}"#,
        )
        .unwrap();
        assert_eq!(z.kind(), ValueKind::Polygon);
        let text = serde_json::to_string(&z).unwrap();
        assert_eq!(serde_json::from_str::<ConcreteValue>(&text).unwrap(), z);
    }

    #[test]
    fn invalid_values() {
        assert!(matches!(
            ConcreteValue::polygon(&[(0.0, 0.0), (1.0, 0.0)]),
            Err(ValueError::Polygon(PolygonError::TooFewVertices(2)))
        ));
        assert!(serde_json::from_str::<ConcreteValue>(
            r#"{"polygon":[{"x":0,"y":0},{"x":1,"y":1},{"x":1,"y":0},{"x":0,"y":1}]}"#
        )
        .is_err());
        assert_eq!(ConcreteValue::Path(vec![]).validate(), Err(ValueError::EmptyPath));
        assert_eq!(
            ConcreteValue::scalar(f64::NAN, Unit::Seconds).validate(),
            Err(ValueError::NonFinite)
        );
    }
}
