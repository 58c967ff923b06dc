use serde::Serialize;

use crate::error::{Error, Result};

/// Uniform tensor mesh with `nx` x `ny` intervals. Nodes are stored column by
/// column: `index = i * (ny + 1) + j`, so y varies fastest.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Mesh2D {
    pub nx: usize,
    pub ny: usize,
    pub ax: f64,
    pub ay: f64,
}

impl Mesh2D {
    /// `ny = 0` describes a single row of width `ay`; it is accepted for
    /// transport but not by the Poisson solver.
    pub fn new(nx: usize, ny: usize, ax: f64, ay: f64) -> Result<Self> {
        if nx == 0 {
            return Err(Error::Geometry("mesh needs at least one interval along x".into()));
        }
        if !(ax > 0.0 && ay > 0.0 && ax.is_finite() && ay.is_finite()) {
            return Err(Error::Geometry("mesh spacings must be positive".into()));
        }
        Ok(Mesh2D { nx, ny, ax, ay })
    }

    pub fn cols(&self) -> usize {
        self.nx + 1
    }
    pub fn rows(&self) -> usize {
        self.ny + 1
    }
    pub fn len(&self) -> usize {
        self.cols() * self.rows()
    }
    pub fn is_empty(&self) -> bool {
        false
    }
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.ny + 1) + j
    }
    #[inline]
    pub fn ij(&self, p: usize) -> (usize, usize) {
        (p / (self.ny + 1), p % (self.ny + 1))
    }
    pub fn x(&self, i: usize) -> f64 {
        self.ax * i as f64
    }
    pub fn y(&self, j: usize) -> f64 {
        self.ay * j as f64
    }
    pub fn lx(&self) -> f64 {
        self.ax * self.nx as f64
    }
    pub fn ly(&self) -> f64 {
        self.ay * self.ny as f64
    }
    pub fn xs(&self) -> Vec<f64> {
        (0..self.cols()).map(|i| self.x(i)).collect()
    }
    pub fn ys(&self) -> Vec<f64> {
        (0..self.rows()).map(|j| self.y(j)).collect()
    }

    /// Same mesh with `extra` columns appended on each side.
    pub fn extended(&self, extra: usize) -> Mesh2D {
        Mesh2D { nx: self.nx + 2 * extra, ..*self }
    }
}

/// Interval count along one axis: the smallest `n >= ceil(len / target)` for
/// which every breakpoint lands on a node line.
pub fn aligned_count(len: f64, target: f64, breakpoints: &[f64]) -> usize {
    let start = (len / target - 1e-9).ceil().max(1.0) as usize;
    let fits = |n: usize| {
        breakpoints.iter().all(|b| {
            let s = n as f64 * b / len;
            (s - s.round()).abs() < 1e-6
        })
    };
    let mut n = start;
    while !fits(n) {
        n += 1;
        if n > start * 1000 + 100_000 {
            return start;
        }
    }
    n
}
