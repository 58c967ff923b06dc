//! Removal of interior wells that ballistic injection cannot populate.
//!
//! Each band is reduced along y to its extreme (lowest conduction edge,
//! highest valence edge) and the reduced profile is raised to the lower of
//! its running maxima from either contact. Columns are shifted rigidly by the
//! amount their reduced value moved.

use serde::Serialize;

use crate::device::FieldMap;
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Pocket {
    /// first and last column of the well
    pub start: usize,
    pub end: usize,
    /// eV
    pub depth: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PocketReport {
    pub conduction: Vec<Pocket>,
    pub valence: Vec<Pocket>,
}

impl PocketReport {
    pub fn is_empty(&self) -> bool {
        self.conduction.is_empty() && self.valence.is_empty()
    }
}

/// Raise interior minima of a 1D profile to the lower of the two flanking
/// maxima. The end points are never changed.
pub fn fill_profile(profile: &[f64]) -> (Vec<f64>, Vec<Pocket>) {
    let n = profile.len();
    if n < 3 {
        return (profile.to_vec(), Vec::new());
    }
    let mut from_left = profile.to_vec();
    for i in 1..n {
        from_left[i] = from_left[i - 1].max(profile[i]);
    }
    let mut from_right = profile.to_vec();
    for i in (0..n - 1).rev() {
        from_right[i] = from_right[i + 1].max(profile[i]);
    }
    let filled: Vec<f64> = (0..n).map(|i| profile[i].max(from_left[i].min(from_right[i]))).collect();
    let mut pockets = Vec::new();
    let mut i = 0;
    while i < n {
        if filled[i] > profile[i] {
            let start = i;
            let mut depth: f64 = 0.0;
            while i < n && filled[i] > profile[i] {
                depth = depth.max(filled[i] - profile[i]);
                i += 1;
            }
            pockets.push(Pocket { start, end: i - 1, depth });
        } else {
            i += 1;
        }
    }
    (filled, pockets)
}

fn column_extreme(f: &FieldMap, lowest: bool) -> Vec<f64> {
    let mesh = f.mesh();
    (0..mesh.cols())
        .map(|i| {
            let col = (0..mesh.rows()).map(|j| f.at(i, j));
            if lowest {
                col.fold(f64::INFINITY, f64::min)
            } else {
                col.fold(f64::NEG_INFINITY, f64::max)
            }
        })
        .collect()
}

fn shift_columns(f: &FieldMap, shift: &[f64]) -> Result<FieldMap> {
    let mesh = *f.mesh();
    let values = (0..mesh.len())
        .map(|p| {
            let (i, _) = mesh.ij(p);
            f.values()[p] + shift[i]
        })
        .collect();
    FieldMap::new(mesh, f.quantity(), values)
}

/// Conduction and valence edges with interior pockets removed.
pub fn fill_pockets(ec: &FieldMap, ev: &FieldMap) -> Result<(FieldMap, FieldMap, PocketReport)> {
    ec.same_mesh(ev)?;
    let low = column_extreme(ec, true);
    let (filled_c, conduction) = fill_profile(&low);
    let shift_c: Vec<f64> = filled_c.iter().zip(&low).map(|(a, b)| a - b).collect();

    let high: Vec<f64> = column_extreme(ev, false).iter().map(|v| -v).collect();
    let (filled_v, valence) = fill_profile(&high);
    let shift_v: Vec<f64> = filled_v.iter().zip(&high).map(|(a, b)| b - a).collect();

    if !conduction.is_empty() || !valence.is_empty() {
        log::debug!("filled {} conduction and {} valence pockets", conduction.len(), valence.len());
    }
    Ok((shift_columns(ec, &shift_c)?, shift_columns(ev, &shift_v)?, PocketReport { conduction, valence }))
}
