//! Terminal current per unit width from the transmission over the
//! band-to-band window.

use rayon::prelude::*;
use serde::Serialize;

use crate::bands::{BandProfile, SubbandSlice, TunnelWindow};
use crate::carriers::fermi::fermi;
use crate::carriers::FermiLevels;
use crate::error::{Error, Result};
use crate::hamiltonian::DeviceHamiltonian;
use crate::negf::{solve_slice, Want, DEFAULT_ETA};
use crate::quad::{gauss_legendre_on, trapezoid};
use crate::units::{current_prefactor, hbar2_over_2m0};

use super::wkb::slice_wkb;

#[derive(Clone, Debug, PartialEq)]
pub struct CurrentOptions {
    pub kz_points: usize,
    /// eV; default min(kT/5, window/200)
    pub energy_step: Option<f64>,
    pub eta: f64,
    /// repeat on a grid with half the energy step and twice the kz points
    pub richardson: bool,
}

impl Default for CurrentOptions {
    fn default() -> Self {
        CurrentOptions { kz_points: 12, energy_step: None, eta: DEFAULT_ETA, richardson: false }
    }
}

impl CurrentOptions {
    pub fn from_solver(s: &crate::device::SolverConfig) -> Self {
        CurrentOptions { kz_points: s.kz_points, energy_step: s.energy_step, eta: s.eta, richardson: s.richardson }
    }

    fn validate(&self) -> Result<()> {
        if self.kz_points == 0 {
            return Err(Error::config("kz_points must be at least 1"));
        }
        if let Some(h) = self.energy_step {
            if !(h > 0.0) {
                return Err(Error::config("energy_step must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurrentStatus {
    Ok,
    NoOverlap,
}

impl CurrentStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CurrentStatus::Ok => "ok",
            CurrentStatus::NoOverlap => "no-overlap",
        }
    }
}

/// Current carried by one kz, per unit kz.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KzPartial {
    /// 1/nm
    pub kz: f64,
    pub weight: f64,
    /// A/nm per 1/nm
    pub current: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurrentResult {
    /// A/nm
    pub current: f64,
    pub partials: Vec<KzPartial>,
    pub energies: Vec<f64>,
    /// `transmission[k][e]` for partial k and energy e
    pub transmission: Vec<Vec<f64>>,
    pub window: TunnelWindow,
    pub status: CurrentStatus,
    /// current on the refined grid when the check was requested
    pub refined: Option<f64>,
    /// the refined grid moved the current by more than 2 %
    pub needs_refinement: bool,
    pub lead_residual: f64,
}

/// Transmission of one (slice, energy) point and its lead residual.
type Evaluator<'a> = dyn Fn(&SubbandSlice, f64) -> Result<(f64, f64)> + Sync + 'a;

fn integrate_once(bands: &BandProfile, levels: FermiLevels, kt: f64, kz_points: usize, step: Option<f64>, eval: &Evaluator) -> Result<CurrentResult> {
    let window = bands.window();
    let empty = |status| CurrentResult {
        current: 0.0,
        partials: Vec::new(),
        energies: Vec::new(),
        transmission: Vec::new(),
        window,
        status,
        refined: None,
        needs_refinement: false,
        lead_residual: 0.0,
    };
    if window.is_empty() {
        return Ok(empty(CurrentStatus::NoOverlap));
    }
    if levels.source == levels.drain {
        return Ok(empty(CurrentStatus::Ok));
    }
    let h = step.unwrap_or((kt / 5.0).min(window.width() / 200.0));
    let (energies, ew) = trapezoid(window.e_min, window.e_max, h);
    let (kzs, kw) = gauss_legendre_on(kz_points, 0.0, window.kz_max);
    let slices: Vec<SubbandSlice> = kzs.iter().map(|kz| bands.slice(*kz)).collect();
    let windows: Vec<TunnelWindow> = slices.iter().map(|s| s.window()).collect();
    let ne = energies.len();
    let points: Vec<(f64, f64)> = (0..kzs.len() * ne)
        .into_par_iter()
        .map(|q| {
            let (k, e) = (q / ne, q % ne);
            let energy = energies[e];
            let w = windows[k];
            if energy < w.e_min || energy > w.e_max {
                return Ok((0.0, 0.0));
            }
            eval(&slices[k], energy)
        })
        .collect::<Result<_>>()?;
    let pref = current_prefactor();
    let mut partials = Vec::with_capacity(kzs.len());
    let mut transmission = Vec::with_capacity(kzs.len());
    let mut total = 0.0;
    let mut residual: f64 = 0.0;
    for (k, kz) in kzs.iter().enumerate() {
        let row: Vec<f64> = points[k * ne..(k + 1) * ne].iter().map(|p| p.0).collect();
        residual = points[k * ne..(k + 1) * ne].iter().fold(residual, |r, p| r.max(p.1));
        let mut part = 0.0;
        for (e, t) in row.iter().enumerate() {
            let df = fermi(levels.source, energies[e], kt) - fermi(levels.drain, energies[e], kt);
            part += ew[e] * t * df;
        }
        part *= pref;
        total += kw[k] * part;
        partials.push(KzPartial { kz: *kz, weight: kw[k], current: part });
        transmission.push(row);
    }
    Ok(CurrentResult {
        current: total,
        partials,
        energies,
        transmission,
        window,
        status: CurrentStatus::Ok,
        refined: None,
        needs_refinement: false,
        lead_residual: residual,
    })
}

fn integrate(bands: &BandProfile, levels: FermiLevels, kt: f64, opts: &CurrentOptions, eval: &Evaluator) -> Result<CurrentResult> {
    opts.validate()?;
    levels.validate()?;
    let mut r = integrate_once(bands, levels, kt, opts.kz_points, opts.energy_step, eval)?;
    if opts.richardson && r.status == CurrentStatus::Ok && r.current != 0.0 {
        let h = opts.energy_step.unwrap_or((kt / 5.0).min(r.window.width() / 200.0));
        let fine = integrate_once(bands, levels, kt, 2 * opts.kz_points, Some(0.5 * h), eval)?;
        r.needs_refinement = (fine.current - r.current).abs() > 0.02 * fine.current.abs();
        if r.needs_refinement {
            log::warn!("current changed from {:e} to {:e} A/nm on the refined grid", r.current, fine.current);
        }
        r.refined = Some(fine.current);
    }
    Ok(r)
}

/// Ballistic current per unit width, A/nm, from the recursive Green's function
/// transmission of every (E, kz) slice.
pub fn integrate_current(bands: &BandProfile, levels: FermiLevels, kt: f64, opts: &CurrentOptions) -> Result<CurrentResult> {
    let eta = opts.eta;
    let eval = move |slice: &SubbandSlice, energy: f64| -> Result<(f64, f64)> {
        let n = slice.mesh.len();
        let mut u = vec![0.0; n];
        let mut m = vec![0.0; n];
        slice.fill_effective(energy, &mut u, &mut m, None);
        let h = DeviceHamiltonian::from_slices(slice.mesh, &u, &m)?;
        let s = solve_slice(&h, energy, slice.kz, eta, Want::TRANSMISSION)?;
        Ok((s.transmission, s.lead_residual))
    };
    integrate(bands, levels, kt, opts, &eval)
}

/// How the WKB comparator treats the finite body thickness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Confinement {
    /// bulk-like continuum of transverse momenta in y
    Ignored,
    /// the same continuum above bands shifted by the hard-wall ground-state
    /// energies of the body
    GroundState,
}

/// Points for the transverse-momentum integral of the WKB comparator.
const KY_POINTS: usize = 12;

/// Width between the hard walls one node beyond the mesh in y, nm.
fn wall_width(bands: &BandProfile) -> f64 {
    (bands.mesh.ny + 2) as f64 * bands.mesh.ay
}

/// Bands raised (conduction) and lowered (valence) by the ground-state
/// energy of a hard-wall well of width `width`.
pub fn confined_bands(bands: &BandProfile, width: f64) -> BandProfile {
    let e1 = hbar2_over_2m0() * (std::f64::consts::PI / width).powi(2);
    BandProfile {
        mesh: bands.mesh,
        ec: bands.ec.iter().zip(&bands.mc).map(|(e, m)| e + e1 / m).collect(),
        ev: bands.ev.iter().zip(&bands.mv).map(|(e, m)| e - e1 / m).collect(),
        mc: bands.mc.clone(),
        mv: bands.mv.clone(),
    }
}

/// Current per unit width from straight-x WKB transmission. Each row carries
/// a strip of width ay with a continuum of transverse momenta ky.
pub fn wkb_current(bands: &BandProfile, levels: FermiLevels, kt: f64, opts: &CurrentOptions, confinement: Confinement) -> Result<CurrentResult> {
    let shifted;
    let used = match confinement {
        Confinement::Ignored => bands,
        Confinement::GroundState => {
            shifted = confined_bands(bands, wall_width(bands));
            &shifted
        }
    };
    let window = used.window();
    let ay = used.mesh.ay;
    let eval = move |slice: &SubbandSlice, energy: f64| -> Result<(f64, f64)> {
        let kz = slice.kz;
        let top = (window.kz_max * window.kz_max - kz * kz).max(0.0).sqrt();
        if top == 0.0 {
            return Ok((0.0, 0.0));
        }
        let (kys, wy) = gauss_legendre_on(KY_POINTS, 0.0, top);
        let mut t = 0.0;
        for (ky, w) in kys.iter().zip(&wy) {
            let s = used.slice(kz.hypot(*ky));
            t += w * slice_wkb(&s, energy).combined;
        }
        Ok((t * ay / std::f64::consts::PI, 0.0))
    };
    integrate(used, levels, kt, opts, &eval)
}

/// Gate voltage per decade of current, mV/dec, between consecutive sweep
/// points with positive current. Returns (midpoint gate voltage, swing).
pub fn subthreshold_swing(vg: &[f64], current: &[f64]) -> Vec<(f64, f64)> {
    vg.windows(2)
        .zip(current.windows(2))
        .filter(|(_, i)| i[0] > 0.0 && i[1] > 0.0 && i[0] != i[1])
        .map(|(v, i)| (0.5 * (v[0] + v[1]), 1e3 * (v[1] - v[0]) / (i[1].log10() - i[0].log10())))
        .collect()
}
