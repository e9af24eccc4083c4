//! Tensor grids, sampled functions and quadrature.
//!
//! Grid values are stored flat with the first axis varying fastest, so the
//! innermost integration of a mixed norm runs over contiguous memory.

pub mod io;
mod shells;

pub use io::{from_csv, from_json, to_csv, to_json};
pub use shells::{annulus_mask, AnnulusMask, DyadicWindow, Shells};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

/// A tensor product of uniform grids symmetric about zero.
///
/// Axis `i` has an odd number of points `N_i` on `[−L_i, L_i]` with spacing
/// `2 L_i / (N_i − 1)`; the middle point is exactly zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct Grid {
    half_width: Vec<f64>,
    points: Vec<usize>,
    spacing: Vec<f64>,
    strides: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct GridSpec {
    half_width: Vec<f64>,
    points: Vec<usize>,
}

impl TryFrom<GridSpec> for Grid {
    type Error = Error;
    fn try_from(s: GridSpec) -> Result<Self> {
        Grid::new(s.half_width, s.points)
    }
}

impl From<Grid> for GridSpec {
    fn from(g: Grid) -> Self {
        GridSpec {
            half_width: g.half_width,
            points: g.points,
        }
    }
}

impl Grid {
    pub fn new(half_width: Vec<f64>, points: Vec<usize>) -> Result<Self> {
        if half_width.is_empty() || half_width.len() != points.len() {
            return Err(Error::Shape(format!(
                "grid needs one half-width per axis ({} half-widths, {} point counts)",
                half_width.len(),
                points.len()
            )));
        }
        for (&l, &m) in half_width.iter().zip(&points) {
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::Domain(format!("half-width must be positive, got {l}")));
            }
            if m < 3 || m % 2 == 0 {
                return Err(Error::Domain(format!(
                    "points per axis must be odd and at least 3, got {m}"
                )));
            }
        }
        let spacing = half_width
            .iter()
            .zip(&points)
            .map(|(&l, &m)| 2.0 * l / (m - 1) as f64)
            .collect();
        let mut strides = Vec::with_capacity(points.len());
        let mut s = 1;
        for &m in &points {
            strides.push(s);
            s *= m;
        }
        Ok(Self {
            half_width,
            points,
            spacing,
            strides,
        })
    }

    /// The same half-width and point count on every axis.
    pub fn cube(dim: usize, half_width: f64, points: usize) -> Result<Self> {
        Self::new(vec![half_width; dim], vec![points; dim])
    }

    pub fn dim(&self) -> usize {
        self.points.len()
    }

    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn half_width(&self) -> &[f64] {
        &self.half_width
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// Index of the zero coordinate on `axis`.
    pub fn center_index(&self, axis: usize) -> usize {
        (self.points[axis] - 1) / 2
    }

    /// Flat index of the origin.
    pub fn origin(&self) -> usize {
        (0..self.dim())
            .map(|d| self.center_index(d) * self.strides[d])
            .sum()
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        (i as f64 - self.center_index(axis) as f64) * self.spacing[axis]
    }

    /// Coordinates along one axis.
    pub fn axis(&self, axis: usize) -> Vec<f64> {
        (0..self.points[axis]).map(|i| self.coord(axis, i)).collect()
    }

    pub fn unravel(&self, flat: usize, idx: &mut [usize]) {
        let mut r = flat;
        for (d, &m) in self.points.iter().enumerate() {
            idx[d] = r % m;
            r /= m;
        }
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn point_into(&self, flat: usize, x: &mut [f64]) {
        let mut r = flat;
        for (d, &m) in self.points.iter().enumerate() {
            x[d] = self.coord(d, r % m);
            r /= m;
        }
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        self.point_into(flat, &mut x);
        x
    }

    /// Trapezoid weights along one axis.
    pub fn axis_weights(&self, axis: usize) -> Vec<f64> {
        let h = self.spacing[axis];
        let m = self.points[axis];
        (0..m)
            .map(|i| if i == 0 || i == m - 1 { 0.5 * h } else { h })
            .collect()
    }

    /// Tensor trapezoid weight of every grid point.
    pub fn weights(&self) -> Vec<f64> {
        let per_axis: Vec<Vec<f64>> = (0..self.dim()).map(|d| self.axis_weights(d)).collect();
        let mut w = vec![1.0; self.len()];
        let mut idx = vec![0; self.dim()];
        for (flat, wi) in w.iter_mut().enumerate() {
            self.unravel(flat, &mut idx);
            for d in 0..self.dim() {
                *wi *= per_axis[d][idx[d]];
            }
        }
        w
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::Shape("functions live on different grids".into()));
        }
        Ok(())
    }
}

/// Samples of a real function on a [`Grid`]. Every value is finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    grid: Grid,
    values: Vec<f64>,
    #[serde(default)]
    label: String,
}

impl SampledFunction {
    pub fn new(grid: Grid, values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite sample {} at grid point {:?}",
                values[i],
                grid.point(i)
            )));
        }
        Ok(Self {
            grid,
            values,
            label: label.into(),
        })
    }

    /// Samples `f` at every grid point.
    pub fn from_fn<F>(grid: &Grid, label: impl Into<String>, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Sync + Send,
    {
        let values = par::map_indices(grid.len(), |i| f(&grid.point(i)));
        Self::new(grid.clone(), values, label)
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![0.0; grid.len()],
            label: "zero".into(),
        }
    }

    pub fn constant(grid: &Grid, c: f64) -> Result<Self> {
        Self::new(grid.clone(), vec![c; grid.len()], format!("const({c})"))
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// Pointwise map; fails if the image is not finite.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<Self> {
        Self::new(
            self.grid.clone(),
            self.values.iter().map(|&v| f(v)).collect(),
            self.label.clone(),
        )
    }

    fn zip<F: Fn(f64, f64) -> f64>(&self, other: &Self, f: F, label: String) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Self::new(
            self.grid.clone(),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
            label,
        )
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b, format!("({})+({})", self.label, other.label))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b, format!("({})-({})", self.label, other.label))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a * b, format!("({})*({})", self.label, other.label))
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        let mut out = self.map(|v| c * v)?;
        out.label = format!("{c}*({})", self.label);
        Ok(out)
    }

    pub fn abs(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v.abs()).collect(),
            label: format!("|{}|", self.label),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Keeps the samples where `keep` is true and zeroes the rest.
    pub fn restrict(&self, keep: &[bool]) -> Result<Self> {
        if keep.len() != self.values.len() {
            return Err(Error::Shape("mask length does not match the grid".into()));
        }
        Ok(Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(keep)
                .map(|(&v, &k)| if k { v } else { 0.0 })
                .collect(),
            label: self.label.clone(),
        })
    }
}

/// Tensor trapezoid approximation of `∫_{[−L,L]ⁿ} f`.
pub fn quadrature_integral(f: &SampledFunction) -> f64 {
    integrate_values(f.grid(), f.values())
}

pub(crate) fn integrate_values(grid: &Grid, values: &[f64]) -> f64 {
    // Axis-by-axis reduction with the one-dimensional weights.
    let mut cur = values.to_vec();
    for d in 0..grid.dim() {
        let w = grid.axis_weights(d);
        let m = w.len();
        cur = cur
            .chunks(m)
            .map(|line| line.iter().zip(&w).map(|(v, w)| v * w).sum())
            .collect();
    }
    cur[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_invariants() {
        let g = Grid::new(vec![1.0, 2.0], vec![5, 9]).unwrap();
        assert_eq!(g.len(), 45);
        assert_eq!(g.spacing(), &[0.5, 0.5]);
        assert_eq!(g.coord(0, 2), 0.0);
        assert_eq!(g.coord(1, 0), -2.0);
        assert_eq!(g.coord(1, 8), 2.0);
        assert_eq!(g.point(g.origin()), vec![0.0, 0.0]);
        let mut idx = [0; 2];
        g.unravel(17, &mut idx);
        assert_eq!(g.ravel(&idx), 17);
        assert!(Grid::new(vec![1.0], vec![4]).is_err());
        assert!(Grid::new(vec![-1.0], vec![5]).is_err());
        assert!(Grid::new(vec![1.0, 1.0], vec![5]).is_err());
    }

    #[test]
    fn coordinates_are_symmetric() {
        let g = Grid::cube(1, 8.0, 129).unwrap();
        let x = g.axis(0);
        for i in 0..x.len() {
            assert_eq!(x[i], -x[x.len() - 1 - i]);
        }
    }

    #[test]
    fn quadrature_examples() {
        let g = Grid::cube(2, 1.0, 21).unwrap();
        assert_eq!(quadrature_integral(&SampledFunction::zeros(&g)), 0.0);
        let one = SampledFunction::constant(&g, 1.0).unwrap();
        assert!((quadrature_integral(&one) - 4.0).abs() < 1e-13);
        let g = Grid::cube(1, 8.0, 2049).unwrap();
        let f = SampledFunction::from_fn(&g, "gauss", |x| (-x[0] * x[0]).exp()).unwrap();
        let want = std::f64::consts::PI.sqrt();
        assert!((quadrature_integral(&f) - want).abs() < 1e-8);
    }

    #[test]
    fn rejects_non_finite_samples() {
        let g = Grid::cube(1, 1.0, 3).unwrap();
        assert!(matches!(
            SampledFunction::new(g.clone(), vec![0.0, f64::NAN, 1.0], ""),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            SampledFunction::new(g, vec![0.0], ""),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn arithmetic_is_pointwise_on_a_common_grid() {
        let g = Grid::cube(1, 1.0, 5).unwrap();
        let f = SampledFunction::from_fn(&g, "x", |x| x[0]).unwrap();
        let h = f.mul(&f).unwrap().add(&f.scale(2.0).unwrap()).unwrap();
        assert_eq!(h.values(), &[-1.0, -0.75, 0.0, 1.25, 3.0]);
        let other = SampledFunction::zeros(&Grid::cube(1, 2.0, 5).unwrap());
        assert!(matches!(f.add(&other), Err(Error::Shape(_))));
    }
}
