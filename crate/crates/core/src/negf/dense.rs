//! Full inverse of the open-system matrix; a reference for the recursive path.

use std::f64::consts::PI;

use super::rgf::{caroli, OpenSystem};
use super::{inverse, CMat, C64};
use crate::error::Result;

pub struct DenseGreens {
    pub a: CMat,
    pub g: CMat,
}

pub fn dense_greens(sys: &OpenSystem) -> Result<DenseGreens> {
    let h = sys.h.to_dense();
    let n = h.nrows();
    let rows = sys.h.mesh.rows();
    let mut a = CMat::from_fn(n, n, |r, c| C64::new(-h[(r, c)], 0.0));
    for k in 0..n {
        a[(k, k)] += sys.z;
    }
    let off = n - rows;
    for r in 0..rows {
        for c in 0..rows {
            a[(r, c)] -= sys.source.sigma[(r, c)];
            a[(off + r, off + c)] -= sys.drain.sigma[(r, c)];
        }
    }
    let g = inverse(a.clone())?;
    Ok(DenseGreens { a, g })
}

impl DenseGreens {
    fn embed(&self, gamma: &CMat, source: bool) -> CMat {
        let n = self.g.nrows();
        let rows = gamma.nrows();
        let off = if source { 0 } else { n - rows };
        let mut full = CMat::zeros(n, n);
        for r in 0..rows {
            for c in 0..rows {
                full[(off + r, off + c)] = gamma[(r, c)];
            }
        }
        full
    }

    pub fn transmission(&self, sys: &OpenSystem) -> f64 {
        let rows = sys.h.mesh.rows();
        let n = self.g.nrows();
        let g0n = self.g.view((0, n - rows), (rows, rows)).into_owned();
        caroli(&g0n, &sys.source.broadening(), &sys.drain.broadening())
    }

    pub fn ldos(&self, sys: &OpenSystem) -> (Vec<f64>, Vec<f64>) {
        let mesh = sys.h.mesh;
        let norm = 1.0 / (PI * mesh.ax * mesh.ay);
        let side = |source: bool, gamma: CMat| {
            let a = &self.g * self.embed(&gamma, source) * self.g.adjoint();
            (0..a.nrows()).map(|k| a[(k, k)].re * norm).collect::<Vec<f64>>()
        };
        (side(true, sys.source.broadening()), side(false, sys.drain.broadening()))
    }

    pub fn spectral_diag(&self) -> Vec<f64> {
        (0..self.g.nrows()).map(|k| -2.0 * self.g[(k, k)].im).collect()
    }
}
