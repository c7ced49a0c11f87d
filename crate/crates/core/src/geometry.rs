//! Planar geometry in local tangent-plane metres (x east, y north).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Point2 { x, y }
    }

    pub fn sub(self, o: Self) -> Self {
        Point2::new(self.x - o.x, self.y - o.y)
    }

    pub fn add(self, o: Self) -> Self {
        Point2::new(self.x + o.x, self.y + o.y)
    }

    pub fn scale(self, k: T) -> Self {
        Point2::new(self.x * k, self.y * k)
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Self) -> T {
        self.sub(o).norm()
    }

    /// Rotates counterclockwise about the origin by `angle` radians.
    pub fn rotate(self, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Point2::new(self.x * c - self.y * s, self.x * s + self.y * c)
    }

    pub fn lerp(self, o: Self, u: T) -> Self {
        self.add(o.sub(self).scale(u))
    }
}

/// Closest point to `p` on segment `ab`.
pub fn closest_on_segment<T: Real>(p: Point2<T>, a: Point2<T>, b: Point2<T>) -> Point2<T> {
    let ab = b.sub(a);
    let len2 = ab.dot(ab);
    if len2 <= T::zero() {
        return a;
    }
    let u = (p.sub(a).dot(ab) / len2).max(T::zero()).min(T::one());
    a.lerp(b, u)
}

pub fn point_segment_distance<T: Real>(p: Point2<T>, a: Point2<T>, b: Point2<T>) -> T {
    p.dist(closest_on_segment(p, a, b))
}

fn orient<T: Real>(a: Point2<T>, b: Point2<T>, c: Point2<T>) -> T {
    b.sub(a).cross(c.sub(a))
}

fn on_segment<T: Real>(p: Point2<T>, a: Point2<T>, b: Point2<T>) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test, touching counts.
pub fn segments_intersect<T: Real>(a: Point2<T>, b: Point2<T>, c: Point2<T>, d: Point2<T>) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    let z = T::zero();
    if ((d1 > z && d2 < z) || (d1 < z && d2 > z)) && ((d3 > z && d4 < z) || (d3 < z && d4 > z)) {
        return true;
    }
    (d1 == z && on_segment(a, c, d))
        || (d2 == z && on_segment(b, c, d))
        || (d3 == z && on_segment(c, a, b))
        || (d4 == z && on_segment(d, a, b))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolygonError {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon has a non-finite coordinate")]
    NonFinite,
    #[error("polygon has zero area")]
    ZeroArea,
    #[error("polygon edges {0} and {1} intersect")]
    SelfIntersecting(usize, usize),
    #[error("polygon vertices are in clockwise order")]
    Clockwise,
}

/// Simple, counterclockwise polygon with nonzero area.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Polygon<T> {
    vertices: Vec<Point2<T>>,
}

impl<T: Real> Polygon<T> {
    pub fn new(vertices: Vec<Point2<T>>) -> Result<Self, PolygonError> {
        let n = vertices.len();
        if n < 3 {
            return Err(PolygonError::TooFewVertices(n));
        }
        if vertices.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(PolygonError::NonFinite);
        }
        let area = signed_area(&vertices);
        if area == T::zero() {
            return Err(PolygonError::ZeroArea);
        }
        for i in 0..n {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            if a == b {
                return Err(PolygonError::ZeroArea);
            }
            for j in i + 1..n {
                // adjacent edges share a vertex by construction
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let (c, d) = (vertices[j], vertices[(j + 1) % n]);
                if segments_intersect(a, b, c, d) {
                    return Err(PolygonError::SelfIntersecting(i, j));
                }
            }
        }
        // collinear backtracking of adjacent edges
        for i in 0..n {
            let (a, b, c) = (vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
            if orient(a, b, c) == T::zero() && b.sub(a).dot(c.sub(b)) < T::zero() {
                return Err(PolygonError::SelfIntersecting(i, (i + 1) % n));
            }
        }
        if area < T::zero() {
            return Err(PolygonError::Clockwise);
        }
        Ok(Polygon { vertices })
    }

    /// Like [`Polygon::new`] but accepts either orientation.
    pub fn new_any_orientation(mut vertices: Vec<Point2<T>>) -> Result<Self, PolygonError> {
        if vertices.len() >= 3 && signed_area(&vertices) < T::zero() {
            vertices.reverse();
        }
        Self::new(vertices)
    }

    pub fn vertices(&self) -> &[Point2<T>] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2<T>, Point2<T>)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> T {
        signed_area(&self.vertices)
    }

    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            orient(
                self.vertices[i],
                self.vertices[(i + 1) % n],
                self.vertices[(i + 2) % n],
            ) >= T::zero()
        })
    }

    /// Inside or on the boundary.
    pub fn contains(&self, p: Point2<T>) -> bool {
        if self.boundary_distance(p) <= T::lit(1e-9) {
            return true;
        }
        self.contains_strict(p)
    }

    /// Even-odd crossing test; boundary points may go either way.
    pub fn contains_strict(&self, p: Point2<T>) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn boundary_distance(&self, p: Point2<T>) -> T {
        self.edges()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(T::infinity(), T::min)
    }

    pub fn nearest_boundary_point(&self, p: Point2<T>) -> Point2<T> {
        let mut best = self.vertices[0];
        let mut best_d = T::infinity();
        for (a, b) in self.edges() {
            let q = closest_on_segment(p, a, b);
            let d = q.dist(p);
            if d < best_d {
                best_d = d;
                best = q;
            }
        }
        best
    }

    pub fn diameter(&self) -> T {
        let mut d = T::zero();
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d = d.max(a.dist(*b));
            }
        }
        d
    }

    pub fn bounds(&self) -> (Point2<T>, Point2<T>) {
        let mut lo = Point2::new(T::infinity(), T::infinity());
        let mut hi = Point2::new(T::neg_infinity(), T::neg_infinity());
        for v in &self.vertices {
            lo = Point2::new(lo.x.min(v.x), lo.y.min(v.y));
            hi = Point2::new(hi.x.max(v.x), hi.y.max(v.y));
        }
        (lo, hi)
    }

    pub fn centroid(&self) -> Point2<T> {
        let mut cx = T::zero();
        let mut cy = T::zero();
        for (a, b) in self.edges() {
            let w = a.cross(b);
            cx = cx + (a.x + b.x) * w;
            cy = cy + (a.y + b.y) * w;
        }
        let k = T::lit(6.0) * self.area();
        Point2::new(cx / k, cy / k)
    }

    /// Rigid rotation about the origin; orientation is preserved.
    pub fn rotated(&self, angle: T) -> Self {
        Polygon {
            vertices: self.vertices.iter().map(|v| v.rotate(angle)).collect(),
        }
    }

    pub fn translated(&self, d: Point2<T>) -> Self {
        Polygon {
            vertices: self.vertices.iter().map(|v| v.add(d)).collect(),
        }
    }

    /// Sorted x-intervals where the horizontal line `y` lies inside the polygon.
    pub fn scanline(&self, y: T) -> Vec<(T, T)> {
        let mut xs: Vec<T> = Vec::new();
        for (a, b) in self.edges() {
            if (a.y > y) != (b.y > y) {
                xs.push(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
            }
        }
        xs.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        xs.chunks_exact(2).map(|c| (c[0], c[1])).collect()
    }
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for Polygon<T> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let vertices = Vec::<Point2<T>>::deserialize(deserializer)?;
        Polygon::new(vertices).map_err(serde::de::Error::custom)
    }
}

fn signed_area<T: Real>(v: &[Point2<T>]) -> T {
    let n = v.len();
    let mut s = T::zero();
    for i in 0..n {
        s = s + v[i].cross(v[(i + 1) % n]);
    }
    s / T::lit(2.0)
}

pub fn path_length<T: Real>(path: &[Point2<T>]) -> T {
    path.windows(2)
        .map(|w| w[0].dist(w[1]))
        .fold(T::zero(), |a, b| a + b)
}

/// Nautical heading (degrees clockwise from north) of the vector `d`.
pub fn bearing_deg(d: Point2<f64>) -> f64 {
    let b = d.x.atan2(d.y).to_degrees();
    if b < 0.0 {
        b + 360.0
    } else {
        b
    }
}

/// Smallest signed difference `to - from` in degrees, in (-180, 180].
pub fn angle_diff_deg(from: f64, to: f64) -> f64 {
    let mut d = (to - from) % 360.0;
    if d > 180.0 {
        d -= 360.0;
    } else if d <= -180.0 {
        d += 360.0;
    }
    d
}
