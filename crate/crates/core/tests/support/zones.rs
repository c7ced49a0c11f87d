//! Random convex zones: vertices on a rotated, scaled ellipse in angle order.

use benthic::geometry::{Point2, Polygon};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub struct ZoneCase {
    pub zone: Polygon<f64>,
    pub spacing: f64,
    pub heading: f64,
}

pub fn random_convex_zone(rng: &mut ChaCha8Rng) -> ZoneCase {
    loop {
        let k = rng.gen_range(3..=12);
        let mut angles: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
        angles.sort_by(f64::total_cmp);
        angles.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
        let ratio = rng.gen_range(0.2..1.0);
        let rot = rng.gen_range(0.0..std::f64::consts::PI);
        let (cx, cy) = (rng.gen_range(-5000.0..5000.0), rng.gen_range(-5000.0..5000.0));
        let unit: Vec<Point2<f64>> = angles
            .iter()
            .map(|t| Point2::new(t.cos(), ratio * t.sin()).rotate(rot))
            .collect();
        let Ok(raw) = Polygon::new(unit) else { continue };
        let target = rng.gen_range(200.0..5000.0);
        let scale = target / raw.diameter();
        let pts: Vec<Point2<f64>> = raw
            .vertices()
            .iter()
            .map(|p| Point2::new(p.x * scale + cx, p.y * scale + cy))
            .collect();
        let Ok(zone) = Polygon::new(pts) else { continue };
        let spacing = rng.gen_range(50.0..500.0);
        if spacing >= zone.diameter() {
            continue;
        }
        let heading = rng.gen_range(0.0..360.0);
        return ZoneCase { zone, spacing, heading };
    }
}
