//! Electron and hole densities from lead-resolved LDOS.
//!
//! The fast path evaluates the LDOS once per energy with the tunneling gap
//! closed: electrons see only the conduction band and holes only the valence
//! band, each as a single-band Hamiltonian, and the free z direction is summed
//! analytically into a Fermi-Dirac integral of order -1/2. The slow path
//! integrates the two-band LDOS over (E, kz) directly.

use rayon::prelude::*;

use super::fermi::{fermi, transverse_electrons, transverse_holes};
use crate::bands::BandProfile;
use crate::device::{FieldMap, Mesh2D, Quantity};
use crate::error::{Error, Result};
use crate::hamiltonian::{DeviceHamiltonian, Lead};
use crate::negf::{solve_slice, Want, DEFAULT_ETA};
use crate::quad::{endpoint_graded, gauss_legendre_on, trapezoid};
use crate::units::{hbar2_over_2m0, PER_CM3_TO_PER_NM3};

/// Contact Fermi levels, eV.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FermiLevels {
    pub source: f64,
    pub drain: f64,
}

impl FermiLevels {
    /// Source grounded, drain at `vd` volts.
    pub fn from_bias(vd: f64) -> Self {
        FermiLevels { source: 0.0, drain: -vd }
    }

    pub fn equilibrium(mu: f64) -> Self {
        FermiLevels { source: mu, drain: mu }
    }

    pub fn max(&self) -> f64 {
        self.source.max(self.drain)
    }

    pub fn min(&self) -> f64 {
        self.source.min(self.drain)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.source.is_finite() || !self.drain.is_finite() {
            return Err(Error::Contract("Fermi levels must be finite".into()));
        }
        Ok(())
    }
}

/// How the E integration nodes are laid out.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GridPolicy {
    /// trapezoid with the given spacing in units of kT
    Uniform { step: f64 },
    /// Gauss-Legendre panels of `panel` kT with breaks at the lead sub-band
    /// edges; panels touching a break are graded toward it
    Graded { panel: f64, points: usize },
}

impl Default for GridPolicy {
    fn default() -> Self {
        GridPolicy::Graded { panel: 0.5, points: 4 }
    }
}

/// Integration nodes and weights over energy.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyGrid {
    pub energies: Vec<f64>,
    pub weights: Vec<f64>,
}

impl EnergyGrid {
    pub fn empty() -> Self {
        EnergyGrid { energies: Vec::new(), weights: Vec::new() }
    }

    pub fn uniform(lo: f64, hi: f64, step: f64) -> Self {
        if hi <= lo {
            return Self::empty();
        }
        let (energies, weights) = trapezoid(lo, hi, step);
        EnergyGrid { energies, weights }
    }

    /// Panels no wider than `panel`, never straddling a breakpoint.
    pub fn graded(lo: f64, hi: f64, breakpoints: &[f64], panel: f64, points: usize) -> Self {
        if hi <= lo {
            return Self::empty();
        }
        let mut cuts = vec![lo];
        let mut inner: Vec<f64> = breakpoints.iter().copied().filter(|e| *e > lo && *e < hi).collect();
        inner.sort_by(f64::total_cmp);
        for e in inner {
            if e - cuts.last().unwrap() > 1e-12 {
                cuts.push(e);
            }
        }
        if hi - cuts.last().unwrap() > 1e-12 {
            cuts.push(hi);
        } else {
            *cuts.last_mut().unwrap() = hi;
        }
        let mut grid = Self::empty();
        for w in cuts.windows(2) {
            let n = ((w[1] - w[0]) / panel).ceil().max(1.0) as usize;
            let h = (w[1] - w[0]) / n as f64;
            for k in 0..n {
                let a = w[0] + h * k as f64;
                let (x, wt) = if k == 0 || k + 1 == n {
                    endpoint_graded(points, a, a + h)
                } else {
                    gauss_legendre_on(points, a, a + h)
                };
                grid.energies.extend(x);
                grid.weights.extend(wt);
            }
        }
        grid
    }

    pub fn with_policy(lo: f64, hi: f64, breakpoints: &[f64], policy: GridPolicy, kt: f64) -> Self {
        match policy {
            GridPolicy::Uniform { step } => Self::uniform(lo, hi, step * kt),
            GridPolicy::Graded { panel, points } => Self::graded(lo, hi, breakpoints, panel * kt, points),
        }
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityOptions {
    pub eta: f64,
    pub grid: GridPolicy,
}

impl Default for DensityOptions {
    fn default() -> Self {
        DensityOptions { eta: DEFAULT_ETA, grid: GridPolicy::default() }
    }
}

/// Lead-resolved LDOS per grid energy, 1/(eV nm^2).
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub grid: EnergyGrid,
    pub d1: Vec<Vec<f64>>,
    pub d2: Vec<Vec<f64>>,
    pub lead_residual: f64,
}

#[derive(Clone, Debug)]
pub struct Densities {
    /// cm^-3
    pub n: FieldMap,
    /// cm^-3
    pub p: FieldMap,
    pub energies: usize,
    pub lead_residual: f64,
}

/// Single-band conduction Hamiltonian, U = Ec with the electron mass.
pub fn conduction_hamiltonian(bands: &BandProfile) -> Result<DeviceHamiltonian> {
    DeviceHamiltonian::from_slices(bands.mesh, &bands.ec, &bands.mc)
}

/// Single-band valence Hamiltonian in the electron picture at energy E,
/// U = 2E - Ev with the hole mass.
pub fn valence_hamiltonian(bands: &BandProfile, energy: f64) -> Result<DeviceHamiltonian> {
    let u: Vec<f64> = bands.ev.iter().map(|ev| 2.0 * energy - ev).collect();
    DeviceHamiltonian::from_slices(bands.mesh, &u, &bands.mv)
}

/// Energies at which a lead sub-band opens or closes. `slope` is dU/dE of the
/// Hamiltonian (0 for conduction, 2 for valence); `h` is evaluated at E = 0.
pub fn lead_band_edges(h: &DeviceHamiltonian, slope: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for lead in [Lead::Source, Lead::Drain] {
        let (column, t) = h.lead_column(lead);
        for c in column.symmetric_eigenvalues().iter() {
            for s in [-2.0 * t, 2.0 * t] {
                out.push((c + s) / (1.0 - slope));
            }
        }
    }
    out
}

fn spectrum_on<F>(grid: EnergyGrid, build: F, eta: f64) -> Result<Spectrum>
where
    F: Fn(f64) -> Result<DeviceHamiltonian> + Sync,
{
    let slices: Vec<_> = grid
        .energies
        .par_iter()
        .map(|&e| {
            let h = build(e)?;
            solve_slice(&h, e, f64::INFINITY, eta, Want::LDOS)
        })
        .collect::<Result<_>>()?;
    let lead_residual = slices.iter().map(|s| s.lead_residual).fold(0.0, f64::max);
    let (d1, d2) = slices.into_iter().map(|s| (s.d1, s.d2)).unzip();
    Ok(Spectrum { grid, d1, d2, lead_residual })
}

/// Conduction-band LDOS with the gap closed, on [min Ec - 10 kT, max mu + 20 kT].
pub fn conduction_spectrum(bands: &BandProfile, levels: FermiLevels, kt: f64, opts: &DensityOptions) -> Result<Spectrum> {
    let h = conduction_hamiltonian(bands)?;
    let lo = bands.ec.iter().copied().fold(f64::INFINITY, f64::min) - 10.0 * kt;
    let hi = levels.max() + 20.0 * kt;
    let grid = EnergyGrid::with_policy(lo, hi, &lead_band_edges(&h, 0.0), opts.grid, kt);
    spectrum_on(grid, |_| Ok(h.clone()), opts.eta)
}

/// Valence-band LDOS with the gap closed, on [min mu - 20 kT, max Ev + 10 kT].
pub fn valence_spectrum(bands: &BandProfile, levels: FermiLevels, kt: f64, opts: &DensityOptions) -> Result<Spectrum> {
    let h0 = valence_hamiltonian(bands, 0.0)?;
    let lo = levels.min() - 20.0 * kt;
    let hi = bands.ev.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 10.0 * kt;
    let grid = EnergyGrid::with_policy(lo, hi, &lead_band_edges(&h0, 2.0), opts.grid, kt);
    spectrum_on(grid, |e| valence_hamiltonian(bands, e), opts.eta)
}

fn checked_density(mesh: Mesh2D, quantity: Quantity, mut values: Vec<f64>) -> Result<FieldMap> {
    let peak = values.iter().copied().fold(0.0, f64::max);
    let floor = -1e-12 * peak.max(1.0);
    for (p, v) in values.iter_mut().enumerate() {
        if *v < floor {
            let (i, j) = mesh.ij(p);
            return Err(Error::numerical(format!("negative {} {v:e} at node ({i}, {j})", quantity.name())));
        }
        *v = v.max(0.0);
    }
    FieldMap::new(mesh, quantity, values)
}

fn accumulate(grid: &EnergyGrid, ldos: &[Vec<f64>], len: usize, occupation: impl Fn(usize, f64) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for ((e, w), d) in grid.energies.iter().zip(&grid.weights).zip(ldos) {
        for (p, (o, v)) in out.iter_mut().zip(d).enumerate() {
            *o += w * v * occupation(p, *e);
        }
    }
    out
}

/// n = int [D1(E) f_c(mu1, E) + D2(E) f_c(mu2, E)] dE, cm^-3. In a tunnel
/// junction the source lead carries no conduction states and only the drain
/// term survives.
pub fn electron_density(mesh: Mesh2D, spectrum: &Spectrum, levels: FermiLevels, mc: &[f64], kt: f64) -> Result<FieldMap> {
    let n1 = accumulate(&spectrum.grid, &spectrum.d1, mesh.len(), |p, e| transverse_electrons(levels.source, e, mc[p], kt));
    let n2 = accumulate(&spectrum.grid, &spectrum.d2, mesh.len(), |p, e| transverse_electrons(levels.drain, e, mc[p], kt));
    let n = n1.iter().zip(&n2).map(|(a, b)| (a + b) / PER_CM3_TO_PER_NM3).collect();
    checked_density(mesh, Quantity::ElectronDensity, n)
}

/// p = int [D1(E) f_v(mu1, E) + D2(E) f_v(mu2, E)] dE, cm^-3; the drain term
/// vanishes when the drain lead carries no valence states.
pub fn hole_density(mesh: Mesh2D, spectrum: &Spectrum, levels: FermiLevels, mv: &[f64], kt: f64) -> Result<FieldMap> {
    let p1 = accumulate(&spectrum.grid, &spectrum.d1, mesh.len(), |p, e| transverse_holes(levels.source, e, mv[p], kt));
    let p2 = accumulate(&spectrum.grid, &spectrum.d2, mesh.len(), |p, e| transverse_holes(levels.drain, e, mv[p], kt));
    let h = p1.iter().zip(&p2).map(|(a, b)| (a + b) / PER_CM3_TO_PER_NM3).collect();
    checked_density(mesh, Quantity::HoleDensity, h)
}

/// Both carrier densities by the single-integral formulas.
pub fn negf_densities(bands: &BandProfile, levels: FermiLevels, kt: f64, opts: &DensityOptions) -> Result<Densities> {
    levels.validate()?;
    let cs = conduction_spectrum(bands, levels, kt, opts)?;
    let vs = valence_spectrum(bands, levels, kt, opts)?;
    Ok(Densities {
        n: electron_density(bands.mesh, &cs, levels, &bands.mc, kt)?,
        p: hole_density(bands.mesh, &vs, levels, &bands.mv, kt)?,
        energies: cs.grid.len() + vs.grid.len(),
        lead_residual: cs.lead_residual.max(vs.lead_residual),
    })
}

/// Resolution of the slow double-integral evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleOptions {
    pub eta: f64,
    pub kz_points: usize,
    /// panel width in kT
    pub panel: f64,
    pub points: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { eta: DEFAULT_ETA, kz_points: 32, panel: 0.25, points: 6 }
    }
}

/// Direct (E, kz) quadrature of the two-band LDOS. At each node, states above
/// the local midgap count as electrons and states below it as holes. Small
/// meshes only.
pub fn full_density_oracle(bands: &BandProfile, levels: FermiLevels, kt: f64, opts: &OracleOptions) -> Result<Densities> {
    levels.validate()?;
    let mesh = bands.mesh;
    let len = mesh.len();
    let h2m = hbar2_over_2m0();
    let ec_min = bands.ec.iter().copied().fold(f64::INFINITY, f64::min);
    let ev_max = bands.ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let m_max = bands.mc.iter().chain(&bands.mv).copied().fold(0.0, f64::max);
    let depth = (levels.max() - ec_min).max(ev_max - levels.min()).max(0.0) + 40.0 * kt;
    let kz_cut = (m_max * depth / h2m).sqrt();
    let (kzs, kws) = gauss_legendre_on(opts.kz_points, 0.0, kz_cut);

    let mut n = vec![0.0; len];
    let mut p = vec![0.0; len];
    let mut energies = 0;
    let mut residual: f64 = 0.0;
    for (kz, kw) in kzs.iter().zip(&kws) {
        let slice = bands.slice(*kz);
        let sub = BandProfile {
            mesh,
            ec: slice.ec_sub.clone(),
            ev: slice.ev_sub.clone(),
            mc: bands.mc.clone(),
            mv: bands.mv.clone(),
        };
        let mut breaks = lead_band_edges(&conduction_hamiltonian(&sub)?, 0.0);
        breaks.extend(lead_band_edges(&valence_hamiltonian(&sub, 0.0)?, 2.0));
        breaks.extend(slice.ec_sub.iter().zip(&slice.ev_sub).map(|(c, v)| 0.5 * (c + v)));
        let lo = (levels.min() - 40.0 * kt).min(slice.ev_sub.iter().copied().fold(f64::INFINITY, f64::min));
        let hi = (levels.max() + 40.0 * kt).max(slice.ec_sub.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        let grid = EnergyGrid::graded(lo, hi, &breaks, opts.panel * kt, opts.points);
        energies += grid.len();
        let slices: Vec<_> = grid
            .energies
            .par_iter()
            .map(|&e| {
                let mut u = vec![0.0; len];
                let mut m = vec![0.0; len];
                slice.fill_effective(e, &mut u, &mut m, None);
                let h = DeviceHamiltonian::from_slices(mesh, &u, &m)?;
                solve_slice(&h, e, *kz, opts.eta, Want::LDOS)
            })
            .collect::<Result<_>>()?;
        for (s, w) in slices.iter().zip(&grid.weights) {
            residual = residual.max(s.lead_residual);
            let e = s.energy;
            let (f1, f2) = (fermi(levels.source, e, kt), fermi(levels.drain, e, kt));
            for q in 0..len {
                let scale = w * kw / std::f64::consts::PI;
                if e > 0.5 * (slice.ec_sub[q] + slice.ev_sub[q]) {
                    n[q] += scale * (s.d1[q] * f1 + s.d2[q] * f2);
                } else {
                    p[q] += scale * (s.d1[q] * (1.0 - f1) + s.d2[q] * (1.0 - f2));
                }
            }
        }
    }
    let to_cm3 = |v: Vec<f64>| v.into_iter().map(|x| x / PER_CM3_TO_PER_NM3).collect::<Vec<_>>();
    Ok(Densities {
        n: checked_density(mesh, Quantity::ElectronDensity, to_cm3(n))?,
        p: checked_density(mesh, Quantity::HoleDensity, to_cm3(p))?,
        energies,
        lead_residual: residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::carriers::fermi::BulkBands;
    use crate::units::thermal_energy;

    fn flat(mesh: Mesh2D, ec: f64, gap: f64) -> BandProfile {
        let ecf = FieldMap::constant(mesh, Quantity::ConductionBand, ec);
        let evf = FieldMap::constant(mesh, Quantity::ValenceBand, ec - gap);
        BandProfile::with_masses(&ecf, &evf, 0.26, 0.36).unwrap()
    }

    #[test]
    fn graded_grid_integrates_polynomials_and_respects_breaks() {
        let g = EnergyGrid::graded(-1.0, 2.0, &[0.3, 0.3 + 1e-14, 5.0], 0.2, 5);
        let s: f64 = g.weights.iter().sum();
        assert!((s - 3.0).abs() < 1e-12, "{s}");
        let m: f64 = g.energies.iter().zip(&g.weights).map(|(e, w)| e * e * w).sum();
        assert!((m - 3.0).abs() < 1e-8, "{m}");
        // breakpoints are panel ends, so no node sits on them
        assert!(g.energies.iter().all(|e| (e - 0.3).abs() > 1e-6));
        assert!(g.weights.iter().all(|w| *w > 0.0));
        assert!(EnergyGrid::graded(1.0, 0.0, &[], 0.1, 4).is_empty());
    }

    #[test]
    fn empty_band_gives_no_electrons() {
        let kt = thermal_energy(300.0);
        let mesh = Mesh2D::new(6, 3, 0.5, 0.5).unwrap();
        let b = flat(mesh, 40.0 * kt, 1.12);
        let d = negf_densities(&b, FermiLevels::equilibrium(0.0), kt, &DensityOptions::default()).unwrap();
        let bulk = BulkBands { bandgap: 1.12, electron_mass: 0.26, hole_mass: 0.36, kt };
        assert!(d.n.max() < 1e-10 * bulk.electrons(0.0));
    }

    #[test]
    fn wide_strip_approaches_bulk() {
        // coarse transverse spacing and a deep Fermi level make the strip
        // close to the parabolic bulk away from the hard walls
        let kt = thermal_energy(300.0);
        let mesh = Mesh2D::new(8, 60, 0.5, 0.5).unwrap();
        let b = flat(mesh, -0.05, 1.12);
        let d = negf_densities(&b, FermiLevels::equilibrium(0.0), kt, &DensityOptions::default()).unwrap();
        let bulk = BulkBands { bandgap: 1.12, electron_mass: 0.26, hole_mass: 0.36, kt };
        let want = bulk.electrons(-0.05);
        // average over the central rows to smooth Friedel oscillations
        let mut sum = 0.0;
        let mut count = 0.0;
        for j in 15..=45 {
            sum += d.n.at(4, j);
            count += 1.0;
        }
        let got = sum / count;
        assert!((got / want - 1.0).abs() < 0.05, "{got:e} vs {want:e}");
    }

    #[test]
    fn holes_mirror_electrons() {
        let kt = thermal_energy(300.0);
        let mesh = Mesh2D::new(7, 3, 0.5, 0.5).unwrap();
        let ec = FieldMap::from_fn(mesh, Quantity::ConductionBand, |x, y| 0.02 - 0.01 * x + 0.003 * y * y).unwrap();
        let ev = ec.map(Quantity::ValenceBand, |e| e - 1.0).unwrap();
        let mc: Vec<f64> = (0..mesh.len()).map(|p| 0.2 + 0.01 * (p % 5) as f64).collect();
        let mv: Vec<f64> = (0..mesh.len()).map(|p| 0.3 + 0.02 * (p % 3) as f64).collect();
        let bands = BandProfile::new(&ec, &ev, mc.clone(), mv.clone()).unwrap();
        let levels = FermiLevels { source: 0.01, drain: -0.03 };
        let opts = DensityOptions::default();
        let d = negf_densities(&bands, levels, kt, &opts).unwrap();

        // mirror in x and in energy: valence of the image is the negated
        // conduction band of the original
        let mirror = |f: &[f64]| -> Vec<f64> {
            (0..mesh.len())
                .map(|p| {
                    let (i, j) = mesh.ij(p);
                    f[mesh.idx(mesh.nx - i, j)]
                })
                .collect()
        };
        let ev_img = FieldMap::new(mesh, Quantity::ValenceBand, mirror(ec.values()).iter().map(|e| -e).collect()).unwrap();
        let ec_img = ev_img.map(Quantity::ConductionBand, |e| e + 5.0).unwrap();
        let img = BandProfile::new(&ec_img, &ev_img, mirror(&mv), mirror(&mc)).unwrap();
        let levels_img = FermiLevels { source: -levels.drain, drain: -levels.source };
        let vs = valence_spectrum(&img, levels_img, kt, &opts).unwrap();
        let p_img = hole_density(mesh, &vs, levels_img, &img.mv, kt).unwrap();
        let back = mirror(p_img.values());
        for (a, b) in d.n.values().iter().zip(&back) {
            assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-30), "{a:e} {b:e}");
        }
    }

    #[test]
    fn confined_strip_vanishes_at_walls_not_at_leads() {
        let kt = thermal_energy(300.0);
        let mesh = Mesh2D::new(10, 10, 0.5, 0.5).unwrap();
        let b = flat(mesh, -0.1, 1.12);
        let d = negf_densities(&b, FermiLevels::equilibrium(0.0), kt, &DensityOptions::default()).unwrap();
        let mid = d.n.at(5, 5);
        assert!(d.n.at(5, 0) < 0.35 * mid);
        assert!(d.n.at(0, 5) > 0.8 * mid);
        assert!(d.n.at(10, 5) > 0.8 * mid);
    }

    #[test]
    fn densities_are_non_negative() {
        let kt = thermal_energy(300.0);
        let mesh = Mesh2D::new(9, 4, 0.5, 0.5).unwrap();
        let ec = FieldMap::from_fn(mesh, Quantity::ConductionBand, |x, _| 0.3 * (x - 2.0).tanh()).unwrap();
        let ev = ec.map(Quantity::ValenceBand, |e| e - 0.66).unwrap();
        let b = BandProfile::with_masses(&ec, &ev, 0.12, 0.21).unwrap();
        let d = negf_densities(&b, FermiLevels::from_bias(0.2), kt, &DensityOptions::default()).unwrap();
        assert!(d.n.min() >= 0.0 && d.p.min() >= 0.0);
        assert!(d.lead_residual < 1e-10);
    }
}
