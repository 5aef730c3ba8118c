//! Uniformly sampled functions on the line or the plane.

mod generators;
mod io;

pub use generators::{
    from_fn, gen_brownian, gen_cusp, gen_poly, gen_weierstrass, weierstrass_value,
};
pub use io::{from_bytes, load, load_csv, save, save_csv, to_bytes, write_atomic};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub generator: String,
    #[serde(default)]
    pub params: BTreeMap<String, serde_json::Value>,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Uniform grid: `origin + spacing * index` along each axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: Vec<f64>,
    pub spacing: f64,
    pub shape: Vec<usize>,
}

impl GridSpec {
    /// `n` points from `lo` to `hi` inclusive.
    pub fn interval(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 || !(hi > lo) {
            return Err(Error::InvalidArgument(format!(
                "interval grid needs n >= 2 and hi > lo (got n={n}, [{lo}, {hi}])"
            )));
        }
        Ok(GridSpec {
            origin: vec![lo],
            spacing: (hi - lo) / (n - 1) as f64,
            shape: vec![n],
        })
    }

    /// `n x n` points on `[lo, hi]^2`.
    pub fn square(lo: f64, hi: f64, n: usize) -> Result<Self> {
        let g = Self::interval(lo, hi, n)?;
        Ok(GridSpec {
            origin: vec![lo, lo],
            spacing: g.spacing,
            shape: vec![n, n],
        })
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, flat: usize) -> [f64; 2] {
        if self.dim() == 1 {
            [self.origin[0] + self.spacing * flat as f64, 0.0]
        } else {
            let (i, j) = (flat / self.shape[1], flat % self.shape[1]);
            [
                self.origin[0] + self.spacing * i as f64,
                self.origin[1] + self.spacing * j as f64,
            ]
        }
    }

    fn validate(&self) -> Result<()> {
        let dim = self.dim();
        if !(1..=2).contains(&dim) || self.origin.len() != dim {
            return Err(Error::InvalidArgument(format!(
                "grid dimension must be 1 or 2 with matching origin (shape {:?}, origin {:?})",
                self.shape, self.origin
            )));
        }
        if !(self.spacing > 0.0) || !self.spacing.is_finite() {
            return Err(Error::InvalidArgument(format!("spacing {} must be positive", self.spacing)));
        }
        if self.origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidArgument("non-finite grid origin".into()));
        }
        if self.shape.contains(&0) {
            return Err(Error::InvalidArgument("empty grid axis".into()));
        }
        Ok(())
    }
}

/// Samples of `f` on a uniform grid, row-major with the first axis slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub meta: Meta,
}

/// Grid samples inside a ball, as offsets from the center.
#[derive(Debug, Clone, Default)]
pub struct BallSamples {
    pub offsets: Vec<[f64; 2]>,
    pub values: Vec<f64>,
    /// Quadrature weight of each sample; they sum to about the ball's measure.
    pub weights: Vec<f64>,
    pub cell_volume: f64,
}

impl BallSamples {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl SampledFunction {
    pub fn new(grid: GridSpec, values: Vec<f64>, meta: Meta) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "{} values for grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite sample at index {i}")));
        }
        Ok(SampledFunction { grid, values, meta })
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn spacing(&self) -> f64 {
        self.grid.spacing
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn cell_volume(&self) -> f64 {
        self.grid.spacing.powi(self.dim() as i32)
    }

    pub fn lo(&self, axis: usize) -> f64 {
        self.grid.origin[axis]
    }

    pub fn hi(&self, axis: usize) -> f64 {
        self.grid.origin[axis] + self.grid.spacing * (self.grid.shape[axis] - 1) as f64
    }

    /// Smallest side length of the sampled window.
    pub fn window_width(&self) -> f64 {
        (0..self.dim())
            .map(|a| self.hi(a) - self.lo(a))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn point(&self, flat: usize) -> [f64; 2] {
        self.grid.point(flat)
    }

    /// Nearest grid index along `axis` (clamped).
    pub fn nearest_index(&self, axis: usize, x: f64) -> usize {
        let k = ((x - self.grid.origin[axis]) / self.grid.spacing).round();
        k.clamp(0.0, (self.grid.shape[axis] - 1) as f64) as usize
    }

    /// Value at the grid point nearest to `x`.
    pub fn nearest_value(&self, x: &[f64]) -> f64 {
        if self.dim() == 1 {
            self.values[self.nearest_index(0, x[0])]
        } else {
            let (i, j) = (self.nearest_index(0, x[0]), self.nearest_index(1, x[1]));
            self.values[i * self.grid.shape[1] + j]
        }
    }

    /// Snaps a point to the nearest grid node.
    pub fn snap(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|a| self.grid.origin[a] + self.grid.spacing * self.nearest_index(a, x[a]) as f64)
            .collect()
    }

    /// Whether the closed ball `B(x, r)` lies inside the sampled window.
    pub fn contains_ball(&self, x: &[f64], r: f64) -> bool {
        let tol = 1e-9 * self.grid.spacing;
        (0..self.dim()).all(|a| x[a] - r >= self.lo(a) - tol && x[a] + r <= self.hi(a) + tol)
    }

    fn axis_range(&self, axis: usize, c: f64, r: f64) -> (usize, usize) {
        let h = self.grid.spacing;
        let o = self.grid.origin[axis];
        let last = (self.grid.shape[axis] - 1) as f64;
        let lo = ((c - r - o) / h - 1e-9).ceil().clamp(0.0, last) as usize;
        let hi = ((c + r - o) / h + 1e-9).floor().clamp(0.0, last) as usize;
        (lo, hi)
    }

    /// Grid points `g` with `|g - x| <= r` with quadrature weights. On the
    /// line the weights follow the trapezoid rule with the end cells cut at
    /// `x +- r`; in the plane every cell whose center lies in the ball counts
    /// fully. Errors when the ball leaves the window.
    pub fn ball(&self, x: &[f64], r: f64) -> Result<BallSamples> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("radius {r} must be positive")));
        }
        if !self.contains_ball(x, r) {
            return Err(Error::Domain(format!(
                "ball B({x:?}, {r}) leaves the sampled window"
            )));
        }
        let h = self.grid.spacing;
        let rr = r * r * (1.0 + 1e-12) + 1e-18 * h * h;
        let mut out = BallSamples {
            cell_volume: self.cell_volume(),
            ..Default::default()
        };
        if self.dim() == 1 {
            let (lo, hi) = self.axis_range(0, x[0], r);
            if lo <= hi {
                for i in lo..=hi {
                    let y = self.grid.origin[0] + h * i as f64 - x[0];
                    out.offsets.push([y, 0.0]);
                    out.values.push(self.values[i]);
                    out.weights.push(h);
                }
                // trapezoid rule inside, plus the partial cells out to +-r
                let k = out.weights.len();
                if k == 1 {
                    out.weights[0] = 2.0 * r;
                } else {
                    out.weights[0] = 0.5 * h + (out.offsets[0][0] + r).max(0.0);
                    out.weights[k - 1] = 0.5 * h + (r - out.offsets[k - 1][0]).max(0.0);
                }
            }
        } else {
            let (lo0, hi0) = self.axis_range(0, x[0], r);
            let (lo1, hi1) = self.axis_range(1, x[1], r);
            let ny = self.grid.shape[1];
            for i in lo0..=hi0 {
                let y0 = self.grid.origin[0] + h * i as f64 - x[0];
                for j in lo1..=hi1 {
                    let y1 = self.grid.origin[1] + h * j as f64 - x[1];
                    if y0 * y0 + y1 * y1 <= rr {
                        out.offsets.push([y0, y1]);
                        out.values.push(self.values[i * ny + j]);
                        out.weights.push(h * h);
                    }
                }
            }
        }
        if out.is_empty() {
            return Err(Error::InsufficientSamples {
                found: 0,
                needed: 1,
            });
        }
        Ok(out)
    }
}
