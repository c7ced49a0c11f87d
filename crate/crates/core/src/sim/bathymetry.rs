//! Seafloor depth on a regular grid with bilinear interpolation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SimError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bathymetry {
    pub x0: f64,
    pub y0: f64,
    pub dx: f64,
    pub dy: f64,
    pub nx: usize,
    pub ny: usize,
    /// Row-major: `values[j * nx + i]` is the node at `(x0 + i dx, y0 + j dy)`.
    pub values: Vec<f64>,
}

impl Bathymetry {
    pub fn new(
        x0: f64,
        y0: f64,
        dx: f64,
        dy: f64,
        nx: usize,
        ny: usize,
        values: Vec<f64>,
    ) -> Result<Self, SimError> {
        if nx < 2 || ny < 2 || !(dx > 0.0) || !(dy > 0.0) {
            return Err(SimError::Bathymetry("grid needs at least 2x2 nodes and positive steps".into()));
        }
        if values.len() != nx * ny {
            return Err(SimError::Bathymetry(format!(
                "expected {} depth values, found {}",
                nx * ny,
                values.len()
            )));
        }
        if values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(SimError::Bathymetry("seafloor depth must be positive".into()));
        }
        Ok(Bathymetry { x0, y0, dx, dy, nx, ny, values })
    }

    /// A flat seafloor covering `[x0, x1] × [y0, y1]`.
    pub fn flat(x0: f64, y0: f64, x1: f64, y1: f64, depth: f64) -> Self {
        Bathymetry::new(x0, y0, x1 - x0, y1 - y0, 2, 2, vec![depth; 4]).expect("valid flat grid")
    }

    /// Parses the CSV form: a header row `x0,y0,dx,dy,nx,ny`, then one row of
    /// those values, then `nx × ny` depths in row-major order spread over any
    /// number of rows.
    pub fn from_csv_str(text: &str) -> Result<Self, SimError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader.headers().map_err(|e| SimError::Bathymetry(e.to_string()))?.clone();
        let expected = ["x0", "y0", "dx", "dy", "nx", "ny"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(SimError::Bathymetry("header must be x0,y0,dx,dy,nx,ny".into()));
        }
        let mut numbers = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| SimError::Bathymetry(e.to_string()))?;
            for field in record.iter().filter(|f| !f.is_empty()) {
                let v: f64 = field
                    .parse()
                    .map_err(|_| SimError::Bathymetry(format!("not a number: {field}")))?;
                numbers.push(v);
            }
        }
        if numbers.len() < 6 {
            return Err(SimError::Bathymetry("missing grid parameters".into()));
        }
        let count = |v: f64| -> Result<usize, SimError> {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(SimError::Bathymetry(format!("grid size must be a whole number, got {v}")))
            }
        };
        let (nx, ny) = (count(numbers[4])?, count(numbers[5])?);
        Bathymetry::new(numbers[0], numbers[1], numbers[2], numbers[3], nx, ny, numbers[6..].to_vec())
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::Bathymetry(format!("{}: {e}", path.display())))?;
        Bathymetry::from_csv_str(&text)
    }

    fn x1(&self) -> f64 {
        self.x0 + self.dx * (self.nx - 1) as f64
    }

    fn y1(&self) -> f64 {
        self.y0 + self.dy * (self.ny - 1) as f64
    }

    fn node(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1() && y >= self.y0 && y <= self.y1()
    }

    pub fn depth_at(&self, x: f64, y: f64) -> Result<f64, SimError> {
        if !self.contains(x, y) {
            return Err(SimError::OutOfExtent { x, y });
        }
        let fx = (x - self.x0) / self.dx;
        let fy = (y - self.y0) / self.dy;
        let i = (fx.floor() as usize).min(self.nx - 2);
        let j = (fy.floor() as usize).min(self.ny - 2);
        let u = fx - i as f64;
        let v = fy - j as f64;
        let bottom = self.node(i, j) * (1.0 - u) + self.node(i + 1, j) * u;
        let top = self.node(i, j + 1) * (1.0 - u) + self.node(i + 1, j + 1) * u;
        Ok(bottom * (1.0 - v) + top * v)
    }

    /// Depth at the nearest point of the grid extent.
    pub fn depth_clamped(&self, x: f64, y: f64) -> f64 {
        let x = x.clamp(self.x0, self.x1());
        let y = y.clamp(self.y0, self.y1());
        self.depth_at(x, y).expect("clamped into extent")
    }
}
