//! Uniform periodic grids on `[0, 2π)^n` and the fourth-order central stencil.

use std::f64::consts::PI;

/// Offsets and weights (before division by the step) of the first-derivative stencil.
pub const D1: [(isize, f64); 4] = [(-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0)];

/// Half-width of [`D1`].
pub const STENCIL_RADIUS: usize = 2;

/// Node layout with axis 0 varying fastest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    dims: Vec<usize>,
    strides: Vec<usize>,
}

impl Grid {
    pub fn new(dims: &[usize]) -> Self {
        let mut strides = Vec::with_capacity(dims.len());
        let mut s = 1;
        for &d in dims {
            strides.push(s);
            s *= d;
        }
        Self { dims: dims.to_vec(), strides }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn step(&self, axis: usize) -> f64 {
        2.0 * PI / self.dims[axis] as f64
    }

    /// Quadrature weight of one cell.
    pub fn cell(&self) -> f64 {
        (0..self.ndim()).map(|a| self.step(a)).product()
    }

    pub fn multi_index(&self, node: usize) -> Vec<usize> {
        self.dims.iter().zip(&self.strides).map(|(&d, &s)| (node / s) % d).collect()
    }

    pub fn index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn coordinate(&self, node: usize, axis: usize) -> f64 {
        self.multi_index(node)[axis] as f64 * self.step(axis)
    }

    /// Neighbour `offset` steps along `axis` and the number of periods crossed.
    pub fn shift(&self, node: usize, axis: usize, offset: isize) -> (usize, i32) {
        let d = self.dims[axis] as isize;
        let s = self.strides[axis];
        let i = ((node / s) % self.dims[axis]) as isize;
        let j = i + offset;
        let wraps = j.div_euclid(d) as i32;
        let jj = j.rem_euclid(d) as usize;
        (node - (i as usize) * s + jj * s, wraps)
    }

    /// Periodic first derivative of a scalar field along `axis`.
    pub fn diff(&self, values: &[f64], axis: usize) -> Vec<f64> {
        let h = self.step(axis);
        (0..self.len())
            .map(|node| {
                D1.iter().map(|&(o, w)| w * values[self.shift(node, axis, o).0]).sum::<f64>() / h
            })
            .collect()
    }

    /// Periodic trapezoid rule.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().sum::<f64>() * self.cell()
    }

    /// Increment of a primitive over one cell, fourth-order accurate:
    /// `∫_{x_j}^{x_{j+1}} f ≈ h(−f_{j−1} + 13 f_j + 13 f_{j+1} − f_{j+2})/24`.
    pub fn cell_increment(&self, values: &[f64], node: usize, axis: usize) -> f64 {
        let h = self.step(axis);
        let at = |o: isize| values[self.shift(node, axis, o).0];
        h * (-at(-1) + 13.0 * at(0) + 13.0 * at(1) - at(2)) / 24.0
    }
}
