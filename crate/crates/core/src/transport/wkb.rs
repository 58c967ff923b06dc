//! Straight-x WKB transmission through the effective potential, one path per
//! mesh row.

use crate::bands::SubbandSlice;
use crate::device::{FieldMap, Mesh2D};
use crate::error::{Error, Result};
use crate::units::k_squared;

#[derive(Clone, Debug, PartialEq)]
pub struct WkbResult {
    /// exp(-2 * integral of |k| dx) per row
    pub rows: Vec<f64>,
    /// sum of the row transmissions
    pub combined: f64,
}

/// Integral of sqrt(kappa^2) over the parts of a row where kappa^2 > 0, with
/// kappa^2 linear between nodes.
pub fn forbidden_action(kappa_sq: &[f64], spacing: f64) -> f64 {
    let mut s = 0.0;
    for w in kappa_sq.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a >= 0.0 && b >= 0.0 {
            let (ka, kb) = (a.sqrt(), b.sqrt());
            if ka + kb > 0.0 {
                // 2/3 (kb^3 - ka^3) / (kb^2 - ka^2), written without the cancellation
                s += 2.0 / 3.0 * spacing * (a + ka * kb + b) / (ka + kb);
            }
        } else if a > 0.0 || b > 0.0 {
            let (pos, neg) = if a > 0.0 { (a, b) } else { (b, a) };
            let share = pos / (pos - neg);
            s += 2.0 / 3.0 * spacing * share * pos.sqrt();
        }
    }
    s
}

fn rows_from(mesh: &Mesh2D, kappa_sq: &[f64]) -> WkbResult {
    let mut row = vec![0.0; mesh.cols()];
    let rows: Vec<f64> = (0..mesh.rows())
        .map(|j| {
            for (i, r) in row.iter_mut().enumerate() {
                *r = kappa_sq[mesh.idx(i, j)];
            }
            (-2.0 * forbidden_action(&row, mesh.ax)).exp()
        })
        .collect();
    let combined = rows.iter().sum();
    WkbResult { rows, combined }
}

/// WKB transmission of each row through potential `u` (eV) with local mass
/// `mass` (m0) at `energy`.
pub fn wkb_transmission(u: &FieldMap, mass: &FieldMap, energy: f64) -> Result<WkbResult> {
    u.same_mesh(mass)?;
    if mass.values().iter().any(|m| !(*m > 0.0)) {
        return Err(Error::Contract("WKB masses must be positive".into()));
    }
    let k2: Vec<f64> = u.values().iter().zip(mass.values()).map(|(u, m)| k_squared(*m, u - energy)).collect();
    Ok(rows_from(u.mesh(), &k2))
}

/// WKB transmission through the two-band effective potential of a slice.
pub fn slice_wkb(slice: &SubbandSlice, energy: f64) -> WkbResult {
    let n = slice.mesh.len();
    let mut u = vec![0.0; n];
    let mut m = vec![0.0; n];
    slice.fill_effective(energy, &mut u, &mut m, None);
    let k2: Vec<f64> = u.iter().zip(&m).map(|(u, m)| k_squared(*m, u - energy)).collect();
    rows_from(&slice.mesh, &k2)
}
