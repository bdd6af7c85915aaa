//! Uniform rectilinear grids on windows of `ℝ` or `ℝ²`, and extended-real
//! functions sampled on them.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::extreal::ExtReal;

/// Relative slack used when snapping a coordinate onto a grid node.
const SNAP_TOL: f64 = 1e-9;

/// Uniform grid over `[min_k, max_k]` with `n_k` points per axis.
///
/// Points are stored row-major: for `dim = 2` the first axis varies slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid")]
pub struct Grid {
    pub dim: usize,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub n: Vec<usize>,
}

#[derive(Deserialize)]
struct RawGrid {
    dim: usize,
    min: Vec<f64>,
    max: Vec<f64>,
    n: Vec<usize>,
}

impl TryFrom<RawGrid> for Grid {
    type Error = Error;
    fn try_from(r: RawGrid) -> Result<Grid> {
        Grid::new(r.dim, r.min, r.max, r.n)
    }
}

impl Grid {
    /// Validated constructor. A window containing `0` must have the origin as
    /// a node; use [`Grid::unanchored`] to opt out.
    pub fn new(dim: usize, min: Vec<f64>, max: Vec<f64>, n: Vec<usize>) -> Result<Grid> {
        let g = Grid::unanchored(dim, min, max, n)?;
        for k in 0..dim {
            if g.min[k] <= 0.0 && 0.0 <= g.max[k] && g.snap_axis(k, 0.0).is_none() {
                return invalid(format!("axis {k}: window contains 0 but 0 is not a grid node"));
            }
        }
        Ok(g)
    }

    /// Constructor that skips the origin-anchoring requirement.
    pub fn unanchored(dim: usize, min: Vec<f64>, max: Vec<f64>, n: Vec<usize>) -> Result<Grid> {
        if !(dim == 1 || dim == 2) {
            return invalid(format!("grid dimension must be 1 or 2, got {dim}"));
        }
        if min.len() != dim || max.len() != dim || n.len() != dim {
            return invalid("grid bounds and counts must have one entry per axis");
        }
        for k in 0..dim {
            if n[k] < 2 {
                return invalid(format!("axis {k}: need at least 2 points"));
            }
            if !(min[k].is_finite() && max[k].is_finite() && min[k] < max[k]) {
                return invalid(format!("axis {k}: need finite min < max"));
            }
        }
        Ok(Grid { dim, min, max, n })
    }

    /// One-dimensional grid `[a, b]` with `n` points.
    pub fn line(a: f64, b: f64, n: usize) -> Result<Grid> {
        Grid::new(1, vec![a], vec![b], vec![n])
    }

    /// Symmetric window `[−l, l]` with an odd number of points, so `0` is a node.
    pub fn symmetric_1d(l: f64, n: usize) -> Result<Grid> {
        if n.is_multiple_of(2) {
            return invalid("symmetric grids need an odd point count");
        }
        Grid::line(-l, l, n)
    }

    /// Integer grid `{a, a+1, ..., b}`.
    pub fn integer_1d(a: i64, b: i64) -> Result<Grid> {
        if b <= a {
            return invalid("integer grid needs a < b");
        }
        Grid::line(a as f64, b as f64, (b - a + 1) as usize)
    }

    pub fn h(&self, axis: usize) -> f64 {
        (self.max[axis] - self.min[axis]) / (self.n[axis] - 1) as f64
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        if i + 1 == self.n[axis] {
            self.max[axis]
        } else {
            self.min[axis] + i as f64 * self.h(axis)
        }
    }

    /// Per-axis indices of a flat index.
    pub fn unflatten(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx / self.n[1], idx % self.n[1]]
        }
    }

    pub fn flatten(&self, ij: [usize; 2]) -> usize {
        if self.dim == 1 {
            ij[0]
        } else {
            ij[0] * self.n[1] + ij[1]
        }
    }

    /// Coordinates of node `idx` (length `dim`).
    pub fn point(&self, idx: usize) -> Vec<f64> {
        let ij = self.unflatten(idx);
        (0..self.dim).map(|k| self.coord(k, ij[k])).collect()
    }

    /// Index of `x` on axis `k` if it is a node up to a relative snapping slack.
    pub fn snap_axis(&self, k: usize, x: f64) -> Option<usize> {
        let h = self.h(k);
        let t = (x - self.min[k]) / h;
        let r = t.round();
        if (t - r).abs() <= SNAP_TOL * t.abs().max(1.0) && r >= 0.0 && (r as usize) < self.n[k] {
            Some(r as usize)
        } else {
            None
        }
    }

    /// Flat index of a point if it lies on the grid.
    pub fn index_of(&self, p: &[f64]) -> Option<usize> {
        if p.len() != self.dim {
            return None;
        }
        let mut ij = [0usize; 2];
        for k in 0..self.dim {
            ij[k] = self.snap_axis(k, p[k])?;
        }
        Some(self.flatten(ij))
    }

    pub fn origin_index(&self) -> Option<usize> {
        self.index_of(&vec![0.0; self.dim])
    }

    /// True if node `idx` lies on the boundary of the window.
    pub fn on_boundary(&self, idx: usize) -> bool {
        let ij = self.unflatten(idx);
        (0..self.dim).any(|k| ij[k] == 0 || ij[k] + 1 == self.n[k])
    }

    /// Same shape and spacing, compared with a relative tolerance.
    pub fn compatible(&self, other: &Grid) -> bool {
        self.dim == other.dim
            && self.n == other.n
            && (0..self.dim).all(|k| {
                let s = self.max[k].abs().max(self.min[k].abs()).max(1.0);
                (self.min[k] - other.min[k]).abs() <= 1e-12 * s
                    && (self.max[k] - other.max[k]).abs() <= 1e-12 * s
            })
    }
}

/// Extended-real function sampled on a [`Grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGridFunction")]
pub struct GridFunction {
    pub grid: Grid,
    pub values: Vec<ExtReal>,
}

#[derive(Deserialize)]
struct RawGridFunction {
    grid: Grid,
    values: Vec<ExtReal>,
}

impl TryFrom<RawGridFunction> for GridFunction {
    type Error = Error;
    fn try_from(r: RawGridFunction) -> Result<GridFunction> {
        GridFunction::new(r.grid, r.values)
    }
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<ExtReal>) -> Result<GridFunction> {
        if values.len() != grid.len() {
            return invalid(format!(
                "expected {} values for the grid, got {}",
                grid.len(),
                values.len()
            ));
        }
        Ok(GridFunction { grid, values })
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> ExtReal) -> GridFunction {
        let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        GridFunction { grid, values }
    }

    /// Samples a real-valued `f` on a one-dimensional grid.
    pub fn from_fn_1d(grid: Grid, f: impl Fn(f64) -> f64) -> GridFunction {
        Self::from_fn(grid, |p| ExtReal::from_f64(f(p[0])))
    }

    pub fn constant(grid: Grid, c: ExtReal) -> GridFunction {
        let values = vec![c; grid.len()];
        GridFunction { grid, values }
    }

    /// Indicator of a set of grid points: `0` on the set, `+∞` elsewhere.
    pub fn indicator(points: &[Vec<f64>], grid: Grid) -> Result<GridFunction> {
        let mut values = vec![ExtReal::PosInf; grid.len()];
        for p in points {
            let idx = grid
                .index_of(p)
                .ok_or_else(|| Error::InvalidInput(format!("point {p:?} is not on the grid")))?;
            values[idx] = ExtReal::ZERO;
        }
        Ok(GridFunction { grid, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Nonempty domain and no `−∞` value.
    pub fn proper(&self) -> bool {
        self.values.iter().any(|v| *v < ExtReal::PosInf) && self.values.iter().all(|v| !v.is_neg_inf())
    }

    /// Indices of the effective domain `{x : f(x) < +∞}`.
    pub fn domain(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.values[i].is_pos_inf()).collect()
    }

    /// Indices of the sublevel set `{x : f(x) ≤ r}`.
    pub fn sublevel(&self, r: ExtReal) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.values[i] <= r).collect()
    }

    /// Value at a grid point given by coordinates.
    pub fn at(&self, p: &[f64]) -> Option<ExtReal> {
        self.grid.index_of(p).map(|i| self.values[i])
    }

    /// Linear interpolation on a 1-D grid. Outside the window or next to a
    /// `+∞` node the value is `+∞`; next to a `−∞` node it is `−∞`.
    pub fn interpolate_1d(&self, x: f64) -> ExtReal {
        assert_eq!(self.grid.dim, 1, "interpolate_1d needs a 1-D grid");
        if let Some(i) = self.grid.snap_axis(0, x) {
            return self.values[i];
        }
        let g = &self.grid;
        if x < g.min[0] || x > g.max[0] {
            return ExtReal::PosInf;
        }
        let t = (x - g.min[0]) / g.h(0);
        let i = (t.floor() as usize).min(g.n[0] - 2);
        let (a, b) = (self.values[i], self.values[i + 1]);
        match (a, b) {
            (ExtReal::Finite(fa), ExtReal::Finite(fb)) => {
                let lam = t - i as f64;
                ExtReal::from_f64(fa + lam * (fb - fa))
            }
            (ExtReal::PosInf, _) | (_, ExtReal::PosInf) => ExtReal::PosInf,
            _ => ExtReal::NegInf,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("grid functions always serialize")
    }

    pub fn from_json(s: &str) -> Result<GridFunction> {
        Ok(serde_json::from_str(s)?)
    }

    /// Pointwise `self ≤ other + tol` on finite parts, exact on infinities.
    pub fn le_within(&self, other: &GridFunction, tol: f64) -> bool {
        self.values.iter().zip(&other.values).all(|(a, b)| match (a, b) {
            (ExtReal::Finite(x), ExtReal::Finite(y)) => *x <= *y + tol,
            (a, b) => a <= b,
        })
    }

    /// Largest absolute deviation between finite values; `+∞` if the
    /// infinity patterns differ.
    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        let mut m: f64 = 0.0;
        for (a, b) in self.values.iter().zip(&other.values) {
            match (a, b) {
                (ExtReal::Finite(x), ExtReal::Finite(y)) => m = m.max((x - y).abs()),
                (a, b) if a == b => {}
                _ => return f64::INFINITY,
            }
        }
        m
    }
}
