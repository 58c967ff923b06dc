//! Densities from the eigenstates of a closed box: the device plus a stretch
//! of each lead, with hard walls at the far ends. Each state is filled from
//! the contact on whose side most of its weight lies.

use nalgebra::{DMatrix, SymmetricEigen};

use super::density::FermiLevels;
use super::fermi::{transverse_electrons, transverse_holes};
use crate::bands::BandProfile;
use crate::device::{FieldMap, Quantity};
use crate::error::{Error, Result};
use crate::hamiltonian::DeviceHamiltonian;
use crate::units::{hbar2_over_2m0, PER_CM3_TO_PER_NM3};

/// States further than this many kT on the empty side of both Fermi levels
/// are skipped.
const TAIL: f64 = 40.0;

#[derive(Clone, Debug)]
pub struct ClosedResult {
    /// cm^-3
    pub n: FieldMap,
    /// cm^-3
    pub p: FieldMap,
    /// eigenstates that contributed
    pub states: usize,
    pub warnings: Vec<String>,
}

/// Copy of the band profile with `extra` columns of each boundary column
/// added on both sides.
pub fn extend_bands(bands: &BandProfile, extra: usize) -> BandProfile {
    let mesh = bands.mesh.extended(extra);
    let src = bands.mesh;
    let pick = |f: &[f64]| -> Vec<f64> {
        (0..mesh.len())
            .map(|p| {
                let (i, j) = mesh.ij(p);
                let i0 = i.saturating_sub(extra).min(src.nx);
                f[src.idx(i0, j)]
            })
            .collect()
    };
    BandProfile { mesh, ec: pick(&bands.ec), ev: pick(&bands.ev), mc: pick(&bands.mc), mv: pick(&bands.mv) }
}

/// Evanescent decay length of a thermal carrier, hbar / sqrt(2 m kT), nm.
pub fn thermal_decay_length(mass: f64, kt: f64) -> f64 {
    (hbar2_over_2m0() / (mass * kt)).sqrt()
}

/// Eigenstates of `h` accepted by `keep`, each with its source-side weight.
/// Near-degenerate states are rotated to diagonalize the side projector so
/// that mirror-image states do not come out as even and odd mixtures.
fn localized_states(h: &DeviceHamiltonian, left: &[f64], cluster: f64, keep: impl Fn(f64) -> bool) -> Vec<(f64, Vec<f64>, f64)> {
    let rows = h.mesh.rows();
    let eig = SymmetricEigen::new(h.to_dense());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).filter(|k| keep(eig.eigenvalues[*k])).collect();
    order.sort_by(|a, b| eig.eigenvalues[*a].total_cmp(&eig.eigenvalues[*b]));
    let weight = |v: &[f64], w: &[f64]| -> f64 {
        let mut s = 0.0;
        for (i, side) in left.iter().enumerate() {
            for j in 0..rows {
                s += side * v[i * rows + j] * w[i * rows + j];
            }
        }
        s
    };
    let mut out = Vec::with_capacity(order.len());
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && eig.eigenvalues[order[end]] - eig.eigenvalues[order[end - 1]] < cluster {
            end += 1;
        }
        let cols: Vec<Vec<f64>> = order[start..end].iter().map(|k| eig.eigenvectors.column(*k).iter().copied().collect()).collect();
        let energy = |k: usize| eig.eigenvalues[order[start + k]];
        if cols.len() == 1 {
            let share = weight(&cols[0], &cols[0]);
            out.push((energy(0), cols.into_iter().next().unwrap(), share));
        } else {
            let k = cols.len();
            let m = DMatrix::from_fn(k, k, |a, b| weight(&cols[a], &cols[b]));
            let rot = SymmetricEigen::new(m);
            for r in 0..k {
                let mut v = vec![0.0; cols[0].len()];
                let mut e = 0.0;
                for (a, c) in cols.iter().enumerate() {
                    let coef = rot.eigenvectors[(a, r)];
                    e += coef * coef * energy(a);
                    for (x, y) in v.iter_mut().zip(c) {
                        *x += coef * y;
                    }
                }
                out.push((e, v, rot.eigenvalues[r]));
            }
        }
        start = end;
    }
    out
}

/// Electron and hole densities of the closed system. `extension` is the
/// length of lead added on each side, nm.
pub fn closed_boundary_density(bands: &BandProfile, levels: FermiLevels, kt: f64, extension: f64) -> Result<ClosedResult> {
    levels.validate()?;
    if !(extension >= 0.0) {
        return Err(Error::config("lead extension must be non-negative"));
    }
    let mesh = bands.mesh;
    let extra = (extension / mesh.ax).round() as usize;
    let mut warnings = Vec::new();
    let m_light = bands.mc.iter().chain(&bands.mv).copied().fold(f64::INFINITY, f64::min);
    let needed = 2.0 * thermal_decay_length(m_light, kt);
    if (extra as f64) * mesh.ax < needed {
        let w = format!(
            "lead extension {:.2} nm is shorter than two thermal decay lengths ({needed:.2} nm)",
            extra as f64 * mesh.ax
        );
        log::warn!("{w}");
        warnings.push(w);
    }
    let ext = extend_bands(bands, extra);
    let big = ext.mesh;
    // weight of each extended column on the source side of the device centre
    let centre = extra as f64 + 0.5 * mesh.nx as f64;
    let left: Vec<f64> = (0..big.cols())
        .map(|i| {
            let x = i as f64;
            if x < centre {
                1.0
            } else if x == centre {
                0.5
            } else {
                0.0
            }
        })
        .collect();
    let area = mesh.ax * mesh.ay;
    let cluster = 1e-4 * kt;

    let mut n = vec![0.0; mesh.len()];
    let mut p = vec![0.0; mesh.len()];
    let mut states = 0;

    let he = DeviceHamiltonian::from_slices(big, &ext.ec, &ext.mc)?;
    for (e, psi, share) in localized_states(&he, &left, cluster, |e| (e - levels.max()) / kt <= TAIL) {
        let mu = if share > 0.5 { levels.source } else { levels.drain };
        states += 1;
        for (q, out) in n.iter_mut().enumerate() {
            let (i, j) = mesh.ij(q);
            let amp = psi[big.idx(i + extra, j)];
            *out += 2.0 * amp * amp / area * transverse_electrons(mu, e, bands.mc[q], kt);
        }
    }

    let ev_neg: Vec<f64> = ext.ev.iter().map(|v| -v).collect();
    let hh = DeviceHamiltonian::from_slices(big, &ev_neg, &ext.mv)?;
    for (eps, psi, share) in localized_states(&hh, &left, cluster, |eps| (levels.min() + eps) / kt <= TAIL) {
        let e = -eps;
        let mu = if share > 0.5 { levels.source } else { levels.drain };
        states += 1;
        for (q, out) in p.iter_mut().enumerate() {
            let (i, j) = mesh.ij(q);
            let amp = psi[big.idx(i + extra, j)];
            *out += 2.0 * amp * amp / area * transverse_holes(mu, e, bands.mv[q], kt);
        }
    }

    let to_cm3 = |v: Vec<f64>| v.into_iter().map(|x| x / PER_CM3_TO_PER_NM3).collect();
    Ok(ClosedResult {
        n: FieldMap::new(mesh, Quantity::ElectronDensity, to_cm3(n))?,
        p: FieldMap::new(mesh, Quantity::HoleDensity, to_cm3(p))?,
        states,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::carriers::density::{negf_densities, DensityOptions};
    use crate::device::Mesh2D;
    use crate::units::thermal_energy;

    fn flat(mesh: Mesh2D, ec: f64) -> BandProfile {
        let ecf = FieldMap::constant(mesh, Quantity::ConductionBand, ec);
        let evf = FieldMap::constant(mesh, Quantity::ValenceBand, ec - 1.12);
        BandProfile::with_masses(&ecf, &evf, 0.26, 0.36).unwrap()
    }

    #[test]
    fn single_row_box_matches_analytic_levels() {
        // one transverse row, no extension: a 1D hard-wall box of nx + 1 sites
        let kt = thermal_energy(300.0);
        let mesh = Mesh2D::new(9, 0, 0.5, 0.5).unwrap();
        let b = flat(mesh, 0.0);
        let r = closed_boundary_density(&b, FermiLevels::equilibrium(1.3), kt, 0.0).unwrap();
        let sites = mesh.cols();
        let t = hbar2_over_2m0() / (0.26 * 0.25);
        let ty = hbar2_over_2m0() / (0.26 * 0.25);
        let mut want = vec![0.0; sites];
        for m in 1..=sites {
            // a single row sees both mirrored y hoppings on site
            let e = 2.0 * t * (1.0 - (m as f64 * std::f64::consts::PI / (sites + 1) as f64).cos()) + 2.0 * ty;
            let occ = transverse_electrons(1.3, e, 0.26, kt);
            let k = m as f64 * std::f64::consts::PI / (sites + 1) as f64;
            for (q, w) in want.iter_mut().enumerate() {
                let amp2 = 2.0 / (sites + 1) as f64 * (k * (q + 1) as f64).sin().powi(2);
                *w += 2.0 * amp2 / 0.25 * occ / PER_CM3_TO_PER_NM3;
            }
        }
        for (got, want) in r.n.values().iter().zip(&want) {
            assert!((got / want - 1.0).abs() < 1e-9, "{got:e} {want:e}");
        }
        assert!(!r.warnings.is_empty());
    }

    #[test]
    fn equilibrium_matches_open_system() {
        let kt = thermal_energy(300.0);
        let mesh = Mesh2D::new(10, 6, 0.5, 0.5).unwrap();
        let b = flat(mesh, -0.05);
        let levels = FermiLevels::equilibrium(0.0);
        let closed = closed_boundary_density(&b, levels, kt, 20.0).unwrap();
        let open = negf_densities(&b, levels, kt, &DensityOptions::default()).unwrap();
        for (c, o) in closed.n.values().iter().zip(open.n.values()) {
            assert!((c / o - 1.0).abs() < 0.05, "{c:e} {o:e}");
        }
        assert!(closed.warnings.is_empty());
    }

    #[test]
    fn converged_in_extension() {
        let kt = thermal_energy(300.0);
        let mesh = Mesh2D::new(10, 4, 0.5, 0.5).unwrap();
        let ec = FieldMap::from_fn(mesh, Quantity::ConductionBand, |x, _| -0.05 + 0.02 * (x - 2.5)).unwrap();
        let ev = ec.map(Quantity::ValenceBand, |e| e - 1.12).unwrap();
        let b = BandProfile::with_masses(&ec, &ev, 0.26, 0.36).unwrap();
        let levels = FermiLevels::equilibrium(0.0);
        let a = closed_boundary_density(&b, levels, kt, 20.0).unwrap();
        let c = closed_boundary_density(&b, levels, kt, 40.0).unwrap();
        for (x, y) in a.n.values().iter().zip(c.n.values()) {
            assert!((x / y - 1.0).abs() < 0.01, "{x:e} {y:e}");
        }
    }

    #[test]
    fn states_follow_their_side() {
        // a thick barrier splits a mirror-symmetric box; each half takes its
        // own Fermi level even though the halves are degenerate
        let kt = thermal_energy(300.0);
        let mesh = Mesh2D::new(20, 2, 0.5, 0.5).unwrap();
        let ec = FieldMap::from_fn(mesh, Quantity::ConductionBand, |x, _| if (x - 5.0).abs() < 1.6 { 2.0 } else { -0.05 }).unwrap();
        let ev = ec.map(Quantity::ValenceBand, |e| e - 3.0).unwrap();
        let b = BandProfile::with_masses(&ec, &ev, 0.26, 0.36).unwrap();
        let r = closed_boundary_density(&b, FermiLevels::from_bias(0.1), kt, 10.0).unwrap();
        assert!(r.n.at(1, 1) > 3.0 * r.n.at(19, 1));
        assert!((r.n.at(1, 1) / r.n.at(19, 1) - (0.1 / kt).exp()).abs() < 0.05 * (0.1 / kt).exp());
    }
}
