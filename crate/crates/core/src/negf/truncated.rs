//! Reduced-rank path: solve A Y~ = Y_r for the r lowest source modes only.

use std::f64::consts::PI;

use nalgebra::linalg::LU;
use nalgebra::Dyn;

use super::rgf::{scale_rows, OpenSystem};
use super::{CMat, C64};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSpectral {
    pub modes: usize,
    /// approximate source-injected LDOS, 1/(eV nm^2); empty when r = 0
    pub d1: Vec<f64>,
    pub transmission: f64,
}

/// Block-tridiagonal solve of A X = B where B is zero outside block 0.
fn solve_first_block(sys: &OpenSystem, b0: &CMat) -> Result<Vec<CMat>> {
    let n = sys.columns();
    let r = b0.ncols();
    let rows = b0.nrows();
    let mut lus: Vec<LU<C64, Dyn, Dyn>> = Vec::with_capacity(n);
    let mut rhs: Vec<CMat> = Vec::with_capacity(n);
    let singular = || Error::numerical("singular block in truncated solve");
    for i in 0..n {
        let mut a = sys.block(i);
        let mut b = if i == 0 { b0.clone() } else { CMat::zeros(rows, r) };
        if i > 0 {
            let d = sys.coupling(i - 1);
            let lu = &lus[i - 1];
            // A~_i = A_ii - D A~_{i-1}^{-1} D, b~_i = b_i - D A~_{i-1}^{-1} b~_{i-1}
            let dm = CMat::from_diagonal(&nalgebra::DVector::from_iterator(rows, d.iter().map(|v| C64::new(*v, 0.0))));
            let x = lu.solve(&dm).ok_or_else(singular)?;
            a -= scale_rows(d, &x);
            let y = lu.solve(&rhs[i - 1]).ok_or_else(singular)?;
            b -= scale_rows(d, &y);
        }
        lus.push(a.lu());
        rhs.push(b);
    }
    let mut out = vec![CMat::zeros(rows, r); n];
    out[n - 1] = lus[n - 1].solve(&rhs[n - 1]).ok_or_else(singular)?;
    for i in (0..n - 1).rev() {
        let b = &rhs[i] - scale_rows(sys.coupling(i), &out[i + 1]);
        out[i] = lus[i].solve(&b).ok_or_else(singular)?;
    }
    Ok(out)
}

/// Source LDOS and transmission from the `r` lowest transverse source modes.
pub fn truncated_spectral(sys: &OpenSystem, r: usize) -> Result<TruncatedSpectral> {
    if r == 0 {
        return Ok(TruncatedSpectral { modes: 0, d1: Vec::new(), transmission: 0.0 });
    }
    let y = sys.source.factor();
    let r = r.min(y.ncols());
    let yr = y.columns(0, r).into_owned();
    let x = solve_first_block(sys, &yr)?;
    let mesh = sys.h.mesh;
    let norm = 1.0 / (PI * mesh.ax * mesh.ay);
    let d1 = x
        .iter()
        .flat_map(|b| (0..b.nrows()).map(move |k| b.row(k).iter().map(|v| v.norm_sqr()).sum::<f64>() * norm))
        .collect();
    let y2 = sys.drain.factor();
    let t = y2.adjoint() * &x[x.len() - 1];
    let transmission = t.iter().map(|v| v.norm_sqr()).sum();
    Ok(TruncatedSpectral { modes: r, d1, transmission })
}
