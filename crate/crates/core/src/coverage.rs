//! Boustrophedon trackline synthesis and the grid coverage measure.
//!
//! Work happens in a frame rotated so that tracklines run along +x. Headings
//! here are measured counterclockwise from +x, so 0 gives east-west lines.

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{path_length, Point2, Polygon};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum CoverageError {
    #[error("zone has zero area")]
    DegenerateZone,
    #[error("spacing must be positive and finite")]
    InvalidSpacing,
    #[error("spacing is not smaller than the zone diameter")]
    SpacingTooLarge,
    #[error("grid step must be positive and at most spacing / 10")]
    GridTooCoarse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRequest<T> {
    pub zone: Polygon<T>,
    pub spacing: T,
    pub heading_deg: T,
    pub entry_hint: Option<Point2<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tracklines<T> {
    pub path: Vec<Point2<T>>,
    pub line_count: usize,
    pub total_length: T,
}

struct Line<T> {
    y: T,
    intervals: Vec<(T, T)>,
}

/// x-extreme point of `zone` within the horizontal band `[y0, y1]`.
fn band_extreme<T: Real>(zone: &Polygon<T>, y0: T, y1: T, leftmost: bool) -> Option<Point2<T>> {
    let mut best: Option<Point2<T>> = None;
    let mut consider = |p: Point2<T>| {
        let better = match best {
            None => true,
            Some(b) => {
                if leftmost {
                    p.x < b.x
                } else {
                    p.x > b.x
                }
            }
        };
        if better {
            best = Some(p);
        }
    };
    for v in zone.vertices() {
        if v.y >= y0 && v.y <= y1 {
            consider(*v);
        }
    }
    for (a, b) in zone.edges() {
        for y in [y0, y1] {
            if (a.y - y) * (b.y - y) <= T::zero() && a.y != b.y {
                let u = (y - a.y) / (b.y - a.y);
                consider(a.lerp(b, u));
            }
        }
    }
    best
}

pub fn generate_tracklines<T: Real>(req: &CoverageRequest<T>) -> Result<Tracklines<T>, CoverageError> {
    let s = req.spacing;
    if !(s > T::zero()) || !s.is_finite() {
        return Err(CoverageError::InvalidSpacing);
    }
    if req.zone.area() <= T::zero() {
        return Err(CoverageError::DegenerateZone);
    }
    if s >= req.zone.diameter() {
        return Err(CoverageError::SpacingTooLarge);
    }
    let theta = req.heading_deg.to_radians();
    let local = req.zone.rotated(-theta);
    let (lo, hi) = local.bounds();
    let height = hi.y - lo.y;
    let n = ((height / s - T::lit(1e-9)).ceil().to_usize().unwrap_or(1)).max(1);
    let margin = (height - T::from_usize(n - 1).expect("count") * s) / T::lit(2.0);
    let convex = local.is_convex();
    let half = s / T::lit(2.0);
    let tol = T::lit(1e-6) * s;

    let lines: Vec<Line<T>> = (0..n)
        .map(|i| {
            let y = lo.y + margin + T::from_usize(i).expect("index") * s;
            Line {
                y,
                intervals: local.scanline(y),
            }
        })
        .filter(|l| !l.intervals.is_empty())
        .collect();
    if lines.is_empty() {
        return Err(CoverageError::SpacingTooLarge);
    }

    let hint = req
        .entry_hint
        .map(|h| h.rotate(-theta))
        .unwrap_or_else(|| {
            let mut best = req.zone.vertices()[0];
            for v in req.zone.vertices() {
                if v.norm() < best.norm() {
                    best = *v;
                }
            }
            best.rotate(-theta)
        });
    let ends = |l: &Line<T>| {
        let first = l.intervals[0].0;
        let last = l.intervals[l.intervals.len() - 1].1;
        (Point2::new(first, l.y), Point2::new(last, l.y))
    };
    let first = ends(&lines[0]);
    let last = ends(&lines[lines.len() - 1]);
    let candidates = [(false, true), (false, false), (true, true), (true, false)];
    let points = [first.0, first.1, last.0, last.1];
    let mut pick = 0;
    for k in 1..4 {
        if points[k].dist(hint) < points[pick].dist(hint) {
            pick = k;
        }
    }
    let (reverse_lines, start_left) = candidates[pick];

    let order: Vec<&Line<T>> = if reverse_lines {
        lines.iter().rev().collect()
    } else {
        lines.iter().collect()
    };
    let mut path: Vec<Point2<T>> = Vec::new();
    let mut left_to_right = start_left;
    for line in order {
        let y = line.y;
        let band = (line.y - half, line.y + half);
        let spur = |end: Point2<T>, leftmost: bool| -> Option<Point2<T>> {
            if !convex {
                return None;
            }
            let e = band_extreme(&local, band.0, band.1, leftmost)?;
            let beyond = if leftmost { e.x < end.x - tol } else { e.x > end.x + tol };
            beyond.then_some(e)
        };
        let mut segs: Vec<(Point2<T>, Point2<T>)> = line
            .intervals
            .iter()
            .map(|&(a, b)| (Point2::new(a, y), Point2::new(b, y)))
            .collect();
        if !left_to_right {
            segs.reverse();
            for s in &mut segs {
                *s = (s.1, s.0);
            }
        }
        let count = segs.len();
        for (k, (u, v)) in segs.into_iter().enumerate() {
            path.push(u);
            if k == 0 {
                if let Some(e) = spur(u, left_to_right) {
                    path.push(e);
                    path.push(u);
                }
            }
            path.push(v);
            if k + 1 == count {
                if let Some(e) = spur(v, !left_to_right) {
                    path.push(e);
                    path.push(v);
                }
            }
        }
        left_to_right = !left_to_right;
    }
    let path: Vec<Point2<T>> = path.into_iter().map(|p| p.rotate(theta)).collect();
    Ok(Tracklines {
        total_length: path_length(&path),
        line_count: lines.len(),
        path,
    })
}

/// x-interval of the horizontal line at `y` within distance `r` of segment `ab`.
fn capsule_row<T: Real>(a: Point2<T>, b: Point2<T>, r: T, y: T) -> Option<(T, T)> {
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    let mut take = |l: T, h: T| {
        if l <= h {
            lo = lo.min(l);
            hi = hi.max(h);
        }
    };
    for c in [a, b] {
        let dy = y - c.y;
        if dy.abs() <= r {
            let w = (r * r - dy * dy).max(T::zero()).sqrt();
            take(c.x - w, c.x + w);
        }
    }
    let d = b.sub(a);
    let len2 = d.dot(d);
    if len2 > T::zero() {
        let len = len2.sqrt();
        let ry = y - a.y;
        // projection parameter within [0, 1]
        let (mut l1, mut h1) = (T::neg_infinity(), T::infinity());
        if d.x != T::zero() {
            let p0 = a.x + (T::zero() - ry * d.y) / d.x;
            let p1 = a.x + (len2 - ry * d.y) / d.x;
            l1 = p0.min(p1);
            h1 = p0.max(p1);
        } else {
            let t = ry * d.y / len2;
            if t < T::zero() || t > T::one() {
                l1 = T::infinity();
                h1 = T::neg_infinity();
            }
        }
        // perpendicular distance at most r
        let (mut l2, mut h2) = (T::neg_infinity(), T::infinity());
        if d.y != T::zero() {
            let q0 = a.x + (d.x * ry - r * len) / d.y;
            let q1 = a.x + (d.x * ry + r * len) / d.y;
            l2 = q0.min(q1);
            h2 = q0.max(q1);
        } else if (d.x * ry).abs() > r * len {
            l2 = T::infinity();
            h2 = T::neg_infinity();
        }
        take(l1.max(l2), h1.min(h2));
    }
    (lo <= hi).then_some((lo, hi))
}

fn lattice_count<T: Real>(x0: T, step: T, l: T, r: T) -> i64 {
    if l > r {
        return 0;
    }
    let half = T::lit(0.5);
    let first = ((l - x0) / step - half).ceil();
    let last = ((r - x0) / step - half).floor();
    (last - first + T::one()).to_i64().unwrap_or(0).max(0)
}

/// Fraction of grid points inside `zone` lying within `spacing / 2` of the path.
pub fn coverage_fraction<T: Real>(
    zone: &Polygon<T>,
    path: &[Point2<T>],
    spacing: T,
    grid_step: T,
) -> Result<T, CoverageError> {
    if !(grid_step > T::zero()) || grid_step > spacing / T::lit(10.0) {
        return Err(CoverageError::GridTooCoarse);
    }
    if path.is_empty() {
        return Ok(T::zero());
    }
    let r = spacing / T::lit(2.0) * (T::one() + T::lit(1e-9));
    let segments: Vec<(Point2<T>, Point2<T>)> = if path.len() == 1 {
        vec![(path[0], path[0])]
    } else {
        path.windows(2).map(|w| (w[0], w[1])).collect()
    };
    let (lo, hi) = zone.bounds();
    let rows = ((hi.y - lo.y) / grid_step).ceil().to_usize().unwrap_or(0);
    let (mut inside, mut covered) = (0i64, 0i64);
    let mut spans: Vec<(T, T)> = Vec::new();
    for j in 0..rows {
        let y = lo.y + (T::from_usize(j).expect("row") + T::lit(0.5)) * grid_step;
        let zone_spans = zone.scanline(y);
        if zone_spans.is_empty() {
            continue;
        }
        spans.clear();
        for &(a, b) in &segments {
            if y < a.y.min(b.y) - r || y > a.y.max(b.y) + r {
                continue;
            }
            if let Some(iv) = capsule_row(a, b, r, y) {
                spans.push(iv);
            }
        }
        spans.sort_by(|p, q| p.0.partial_cmp(&q.0).expect("finite"));
        let mut merged: Vec<(T, T)> = Vec::with_capacity(spans.len());
        for &(l, h) in &spans {
            match merged.last_mut() {
                Some(last) if l <= last.1 => last.1 = last.1.max(h),
                _ => merged.push((l, h)),
            }
        }
        for &(zl, zh) in &zone_spans {
            inside += lattice_count(lo.x, grid_step, zl, zh);
            for &(cl, ch) in &merged {
                covered += lattice_count(lo.x, grid_step, zl.max(cl), zh.min(ch));
            }
        }
    }
    if inside == 0 {
        return Ok(T::zero());
    }
    Ok(T::from_i64(covered).expect("count") / T::from_i64(inside).expect("count"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::point_segment_distance;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn p(x: f64, y: f64) -> Point2<f64> {
        Point2::new(x, y)
    }

    fn square() -> Polygon<f64> {
        Polygon::new(vec![p(0.0, 0.0), p(1000.0, 0.0), p(1000.0, 1000.0), p(0.0, 1000.0)]).unwrap()
    }

    fn req(zone: Polygon<f64>, spacing: f64, heading: f64) -> CoverageRequest<f64> {
        CoverageRequest {
            zone,
            spacing,
            heading_deg: heading,
            entry_hint: None,
        }
    }

    /// Per-point brute force, independent of the row sweep.
    fn brute_fraction(zone: &Polygon<f64>, path: &[Point2<f64>], spacing: f64, step: f64) -> f64 {
        let (lo, hi) = zone.bounds();
        let (mut inside, mut covered) = (0usize, 0usize);
        let nx = ((hi.x - lo.x) / step).ceil() as usize + 1;
        let ny = ((hi.y - lo.y) / step).ceil() as usize;
        for j in 0..ny {
            for i in 0..nx {
                let q = p(lo.x + (i as f64 + 0.5) * step, lo.y + (j as f64 + 0.5) * step);
                if !zone.contains_strict(q) {
                    continue;
                }
                inside += 1;
                let d = if path.len() == 1 {
                    q.dist(path[0])
                } else {
                    path.windows(2)
                        .map(|w| point_segment_distance(q, w[0], w[1]))
                        .fold(f64::INFINITY, f64::min)
                };
                if d <= spacing / 2.0 {
                    covered += 1;
                }
            }
        }
        covered as f64 / inside as f64
    }

    #[test]
    fn square_fixture_lines() {
        let t = generate_tracklines(&req(square(), 200.0, 0.0)).unwrap();
        assert_eq!(t.line_count, 5);
        assert_eq!(t.path.len(), 10);
        assert_abs_diff_eq!(t.total_length, 5800.0, epsilon = 0.01);
        let ys: Vec<f64> = t.path.iter().step_by(2).map(|q| q.y).collect();
        for (y, want) in ys.iter().zip([100.0, 300.0, 500.0, 700.0, 900.0]) {
            assert_abs_diff_eq!(*y, want, epsilon = 1e-9);
        }
        assert_eq!(t.path[0], p(0.0, 100.0));
    }

    #[test]
    fn square_rotated_quarter_turn_gives_vertical_lines() {
        let t = generate_tracklines(&req(square(), 200.0, 90.0)).unwrap();
        assert_eq!(t.line_count, 5);
        let mut xs: Vec<f64> = t.path.iter().map(|q| (q.x * 1e6).round() / 1e6).collect();
        xs.dedup();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        assert_eq!(xs, vec![100.0, 300.0, 500.0, 700.0, 900.0]);
        assert_abs_diff_eq!(t.total_length, 5800.0, epsilon = 0.01);
    }

    #[test]
    fn spacing_guard() {
        assert_eq!(
            generate_tracklines(&req(square(), 5000.0, 0.0)),
            Err(CoverageError::SpacingTooLarge)
        );
        assert_eq!(
            generate_tracklines(&req(square(), 0.0, 0.0)),
            Err(CoverageError::InvalidSpacing)
        );
    }

    #[test]
    fn square_fully_covered() {
        let t = generate_tracklines(&req(square(), 200.0, 0.0)).unwrap();
        let f = coverage_fraction(&square(), &t.path, 200.0, 5.0).unwrap();
        assert!(f >= 0.999, "{f}");
    }

    #[test]
    fn coverage_edge_cases() {
        assert_eq!(coverage_fraction(&square(), &[], 200.0, 5.0).unwrap(), 0.0);
        assert_eq!(
            coverage_fraction(&square(), &[p(0.0, 0.0)], 200.0, 50.0),
            Err(CoverageError::GridTooCoarse)
        );
        let thin = Polygon::new(vec![p(0.0, 0.0), p(500.0, 0.0), p(500.0, 40.0), p(0.0, 40.0)]).unwrap();
        let f = coverage_fraction(&thin, &[p(0.0, 20.0), p(500.0, 20.0)], 50.0, 1.0).unwrap();
        assert_eq!(f, 1.0);
    }

    #[test]
    fn sweep_matches_brute_force() {
        let tri = Polygon::new(vec![p(0.0, 0.0), p(400.0, 30.0), p(120.0, 350.0)]).unwrap();
        for (heading, spacing) in [(0.0, 60.0), (33.0, 45.0), (100.0, 80.0)] {
            let t = generate_tracklines(&req(tri.clone(), spacing, heading)).unwrap();
            let fast = coverage_fraction(&tri, &t.path, spacing, spacing / 20.0).unwrap();
            let slow = brute_fraction(&tri, &t.path, spacing, spacing / 20.0);
            assert_abs_diff_eq!(fast, slow, epsilon = 1e-3);
            assert!(fast >= 0.999, "heading {heading}: {fast}");
        }
        // a path that deliberately misses part of the zone
        let partial = [p(0.0, 100.0), p(1000.0, 100.0)];
        let fast = coverage_fraction(&square(), &partial, 200.0, 10.0).unwrap();
        let slow = brute_fraction(&square(), &partial, 200.0, 10.0);
        assert_abs_diff_eq!(fast, slow, epsilon = 1e-9);
        assert_abs_diff_eq!(fast, 0.2, epsilon = 1e-9);
    }

    #[test]
    fn concave_zone_splits_lines() {
        let u = Polygon::new(vec![
            p(0.0, 0.0),
            p(300.0, 0.0),
            p(300.0, 300.0),
            p(200.0, 300.0),
            p(200.0, 100.0),
            p(100.0, 100.0),
            p(100.0, 300.0),
            p(0.0, 300.0),
        ])
        .unwrap();
        let t = generate_tracklines(&req(u.clone(), 50.0, 0.0)).unwrap();
        assert_eq!(t.line_count, 6);
        // upper lines are clipped into two sub-segments each
        assert!(t.path.len() > 12);
        let f = coverage_fraction(&u, &t.path, 50.0, 2.5).unwrap();
        assert!(f > 0.9);
    }

    #[test]
    fn generic_over_f32() {
        let sq = Polygon::<f32>::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1000.0, 0.0),
            Point2::new(1000.0, 1000.0),
            Point2::new(0.0, 1000.0),
        ])
        .unwrap();
        let t = generate_tracklines(&CoverageRequest {
            zone: sq,
            spacing: 200.0f32,
            heading_deg: 0.0,
            entry_hint: None,
        })
        .unwrap();
        assert_eq!(t.line_count, 5);
        assert!((t.total_length - 5800.0).abs() < 0.01);
    }

    fn convex_zone() -> impl Strategy<Value = Polygon<f64>> {
        (
            prop::collection::vec(0.0f64..std::f64::consts::TAU, 3..12),
            200.0f64..2000.0,
            0.3f64..1.0,
            0.0f64..std::f64::consts::PI,
            -2000.0f64..2000.0,
            -2000.0f64..2000.0,
        )
            .prop_filter_map("degenerate", |(mut angles, a, ratio, rot, cx, cy)| {
                angles.sort_by(f64::total_cmp);
                angles.dedup_by(|x, y| (*x - *y).abs() < 1e-3);
                let pts = angles
                    .iter()
                    .map(|t| p(a * t.cos(), a * ratio * t.sin()).rotate(rot).add(p(cx, cy)))
                    .collect();
                Polygon::new(pts).ok()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn reversal_keeps_length(zone in convex_zone(), spacing in 50.0f64..300.0, heading in 0.0f64..180.0) {
            prop_assume!(spacing < zone.diameter());
            let a = generate_tracklines(&req(zone.clone(), spacing, heading)).unwrap();
            let b = generate_tracklines(&req(zone, spacing, heading + 180.0)).unwrap();
            prop_assert!((a.total_length - b.total_length).abs() < 0.01);
        }

        #[test]
        fn waypoints_stay_in_zone(zone in convex_zone(), spacing in 50.0f64..300.0, heading in 0.0f64..360.0) {
            prop_assume!(spacing < zone.diameter());
            let t = generate_tracklines(&req(zone.clone(), spacing, heading)).unwrap();
            for q in &t.path {
                prop_assert!(zone.contains(*q) || zone.boundary_distance(*q) <= 0.01);
            }
        }

        #[test]
        fn rotation_equivariance(zone in convex_zone(), spacing in 50.0f64..300.0, heading in 0.0f64..360.0, theta in 0.0f64..360.0) {
            prop_assume!(spacing < zone.diameter());
            let a = generate_tracklines(&req(zone.clone(), spacing, heading)).unwrap();
            let b = generate_tracklines(&req(zone.rotated(theta.to_radians()), spacing, heading + theta)).unwrap();
            prop_assert_eq!(a.path.len(), b.path.len());
            for (u, v) in a.path.iter().zip(&b.path) {
                prop_assert!(u.rotate(theta.to_radians()).dist(*v) <= 0.01);
            }
        }
    }
}
