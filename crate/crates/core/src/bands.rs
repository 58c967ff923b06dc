//! kz-resolved sub-bands and the two-band effective potential for tunneling.

use crate::device::{FieldMap, Mesh2D, Quantity};
use crate::error::{Error, Result};
use crate::units::{hbar2_over_2m0, k_squared};

/// Gap widths below this short-circuit the spline coordinate to 1/2.
pub const DEGENERATE_GAP: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BandRegion {
    Valence,
    Gap,
    Conduction,
}

/// Band edges and per-node band masses on a mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct BandProfile {
    pub mesh: Mesh2D,
    pub ec: Vec<f64>,
    pub ev: Vec<f64>,
    pub mc: Vec<f64>,
    pub mv: Vec<f64>,
}

impl BandProfile {
    pub fn new(ec: &FieldMap, ev: &FieldMap, mc: Vec<f64>, mv: Vec<f64>) -> Result<Self> {
        ec.same_mesh(ev)?;
        let mesh = *ec.mesh();
        if mc.len() != mesh.len() || mv.len() != mesh.len() {
            return Err(Error::MeshMismatch("mass fields do not match the mesh".into()));
        }
        if mc.iter().chain(&mv).any(|m| !(*m > 0.0)) {
            return Err(Error::Contract("effective masses must be positive".into()));
        }
        Ok(BandProfile { mesh, ec: ec.values().to_vec(), ev: ev.values().to_vec(), mc, mv })
    }

    /// Uniform masses everywhere.
    pub fn with_masses(ec: &FieldMap, ev: &FieldMap, mc: f64, mv: f64) -> Result<Self> {
        let n = ec.mesh().len();
        Self::new(ec, ev, vec![mc; n], vec![mv; n])
    }

    pub fn slice(&self, kz: f64) -> SubbandSlice {
        let h = hbar2_over_2m0() * kz * kz;
        SubbandSlice {
            kz,
            mesh: self.mesh,
            ec_sub: self.ec.iter().zip(&self.mc).map(|(e, m)| e + h / m).collect(),
            ev_sub: self.ev.iter().zip(&self.mv).map(|(e, m)| e - h / m).collect(),
            mc: self.mc.clone(),
            mv: self.mv.clone(),
        }
    }

    pub fn window(&self) -> TunnelWindow {
        let s = self.slice(0.0);
        window_from(&s.ec_sub, &s.ev_sub, &self.mc, &self.mv)
    }
}

/// Sub-band edges for a fixed kz: Ev - hbar^2 kz^2 / 2mv and Ec + hbar^2 kz^2 / 2mc.
pub fn subbands(ec: &FieldMap, ev: &FieldMap, kz: f64, mc: &[f64], mv: &[f64]) -> Result<(FieldMap, FieldMap)> {
    if kz < 0.0 {
        return Err(Error::Contract("kz must be non-negative".into()));
    }
    let p = BandProfile::new(ec, ev, mc.to_vec(), mv.to_vec())?;
    let s = p.slice(kz);
    Ok((
        FieldMap::new(p.mesh, Quantity::ConductionBand, s.ec_sub)?,
        FieldMap::new(p.mesh, Quantity::ValenceBand, s.ev_sub)?,
    ))
}

/// Sub-band profile for one kz.
#[derive(Clone, Debug, PartialEq)]
pub struct SubbandSlice {
    pub kz: f64,
    pub mesh: Mesh2D,
    pub ec_sub: Vec<f64>,
    pub ev_sub: Vec<f64>,
    pub mc: Vec<f64>,
    pub mv: Vec<f64>,
}

/// Effective potential, mass and region tag per node at one energy.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveFields {
    pub potential: Vec<f64>,
    pub mass: Vec<f64>,
    pub region: Vec<BandRegion>,
}

impl EffectiveFields {
    pub fn potential_map(&self, mesh: Mesh2D) -> Result<FieldMap> {
        FieldMap::new(mesh, Quantity::EffectivePotential, self.potential.clone())
    }
    pub fn mass_map(&self, mesh: Mesh2D) -> Result<FieldMap> {
        FieldMap::new(mesh, Quantity::EffectiveMass, self.mass.clone())
    }
}

/// Nodes exactly on a sub-band edge belong to the band.
pub fn classify(energy: f64, ev_sub: f64, ec_sub: f64) -> BandRegion {
    if energy <= ev_sub {
        BandRegion::Valence
    } else if energy >= ec_sub {
        BandRegion::Conduction
    } else {
        BandRegion::Gap
    }
}

/// Harmonic combination of the single-band evanescent wavevectors, nm^-2.
pub fn two_band_kxy_sq(energy: f64, ec_sub: f64, ev_sub: f64, mc: f64, mv: f64) -> Result<f64> {
    if !(energy > ev_sub && energy < ec_sub) {
        return Err(Error::Contract(format!(
            "two-band wavevector requested at E = {energy} outside the gap ({ev_sub}, {ec_sub})"
        )));
    }
    Ok(kxy_sq(energy, ec_sub, ev_sub, mc, mv))
}

#[inline]
fn kxy_sq(energy: f64, ec_sub: f64, ev_sub: f64, mc: f64, mv: f64) -> f64 {
    let kv = k_squared(mv, ev_sub - energy);
    let kc = k_squared(mc, energy - ec_sub);
    let s = kc + kv;
    if s == 0.0 {
        0.0
    } else {
        kv * kc / s
    }
}

/// Cubic interpolation from the hole mass at Ev_sub to the electron mass at
/// Ec_sub with zero slope at both ends.
pub fn tunneling_mass(energy: f64, ev_sub: f64, ec_sub: f64, mc: f64, mv: f64) -> f64 {
    let gap = ec_sub - ev_sub;
    let f = if gap < DEGENERATE_GAP { 0.5 } else { ((energy - ev_sub) / gap).clamp(0.0, 1.0) };
    mv + (mc - mv) * f * f * (3.0 - 2.0 * f)
}

impl SubbandSlice {
    pub fn effective_fields(&self, energy: f64) -> EffectiveFields {
        let n = self.ec_sub.len();
        let mut out = EffectiveFields { potential: vec![0.0; n], mass: vec![0.0; n], region: vec![BandRegion::Gap; n] };
        self.fill_effective(energy, &mut out.potential, &mut out.mass, Some(&mut out.region));
        out
    }

    pub fn fill_effective(&self, energy: f64, u: &mut [f64], m: &mut [f64], mut region: Option<&mut [BandRegion]>) {
        let h = hbar2_over_2m0();
        for p in 0..self.ec_sub.len() {
            let (ev, ec) = (self.ev_sub[p], self.ec_sub[p]);
            let r = classify(energy, ev, ec);
            let (up, mp) = match r {
                BandRegion::Valence => (2.0 * energy - ev, self.mv[p]),
                BandRegion::Conduction => (ec, self.mc[p]),
                BandRegion::Gap => {
                    let mt = tunneling_mass(energy, ev, ec, self.mc[p], self.mv[p]);
                    (energy - h * kxy_sq(energy, ec, ev, self.mc[p], self.mv[p]) / mt, mt)
                }
            };
            u[p] = up;
            m[p] = mp;
            if let Some(r_out) = region.as_deref_mut() {
                r_out[p] = r;
            }
        }
    }

    /// Energy range over which this slice can carry band-to-band current.
    pub fn window(&self) -> TunnelWindow {
        window_from(&self.ec_sub, &self.ev_sub, &self.mc, &self.mv)
    }
}

/// Band-to-band energy window for a given set of sub-band edges.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TunnelWindow {
    pub e_min: f64,
    pub e_max: f64,
    pub kz_max: f64,
    pub reduced_mass: f64,
}

impl TunnelWindow {
    pub fn is_empty(&self) -> bool {
        self.e_max <= self.e_min
    }
    pub fn width(&self) -> f64 {
        (self.e_max - self.e_min).max(0.0)
    }
}

fn window_from(ec_sub: &[f64], ev_sub: &[f64], mc: &[f64], mv: &[f64]) -> TunnelWindow {
    let e_min = ec_sub.iter().copied().fold(f64::INFINITY, f64::min);
    let e_max = ev_sub.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let reduced_mass = mc.iter().zip(mv).map(|(c, v)| c * v / (c + v)).fold(0.0, f64::max);
    let kz_max = if e_max > e_min { k_squared(reduced_mass, e_max - e_min).sqrt() } else { 0.0 };
    TunnelWindow { e_min, e_max, kz_max, reduced_mass }
}

/// Window from the kz = 0 sub-bands.
pub fn tunnel_window(ec_sub_k0: &FieldMap, ev_sub_k0: &FieldMap, mc: &[f64], mv: &[f64]) -> Result<TunnelWindow> {
    ec_sub_k0.same_mesh(ev_sub_k0)?;
    Ok(window_from(ec_sub_k0.values(), ev_sub_k0.values(), mc, mv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MC: f64 = 0.26;
    const MV: f64 = 0.36;

    fn flat(ec: f64, ev: f64) -> BandProfile {
        let m = Mesh2D::new(3, 1, 1.0, 1.0).unwrap();
        BandProfile::with_masses(
            &FieldMap::constant(m, Quantity::ConductionBand, ec),
            &FieldMap::constant(m, Quantity::ValenceBand, ev),
            MC,
            MV,
        )
        .unwrap()
    }

    #[test]
    fn subband_shifts() {
        let p = flat(0.5, -0.6);
        let s0 = p.slice(0.0);
        assert_eq!(s0.ec_sub[0], 0.5);
        assert_eq!(s0.ev_sub[0], -0.6);
        let kz = 0.7;
        let s = p.slice(kz);
        let widen = hbar2_over_2m0() * kz * kz * (1.0 / MC + 1.0 / MV);
        assert!(((s.ec_sub[0] - s.ev_sub[0]) - (1.1 + widen)).abs() < 1e-14);
        assert!(s.ec_sub[0] > 0.5 && s.ev_sub[0] < -0.6);
    }

    #[test]
    fn kxy_examples() {
        // equal single-band values give half of either
        let (ev, ec) = (-0.5, 0.5);
        let m = 0.3;
        let k = two_band_kxy_sq(0.0, ec, ev, m, m).unwrap();
        assert!((k - k_squared(m, -0.5) / 2.0).abs() < 1e-12);
        // electron-like near the conduction edge
        let e = ec - 1e-7;
        let k = two_band_kxy_sq(e, ec, ev, MC, MV).unwrap();
        let kc = k_squared(MC, e - ec);
        assert!((k / kc - 1.0).abs() < 1e-6);
        assert!(two_band_kxy_sq(0.6, ec, ev, MC, MV).is_err());
    }

    #[test]
    fn barrier_grows_with_kz() {
        let p = flat(0.5, -0.6);
        let mut prev = 0.0;
        for kz in [0.0, 0.2, 0.4, 0.8] {
            let s = p.slice(kz);
            let k = two_band_kxy_sq(-0.05, s.ec_sub[0], s.ev_sub[0], MC, MV).unwrap();
            assert!(k.abs() > prev);
            prev = k.abs();
        }
    }

    #[test]
    fn mass_spline() {
        assert_eq!(tunneling_mass(-1.0, -1.0, 1.0, MC, MV), MV);
        assert_eq!(tunneling_mass(1.0, -1.0, 1.0, MC, MV), MC);
        assert!((tunneling_mass(0.0, -1.0, 1.0, MC, MV) - 0.5 * (MC + MV)).abs() < 1e-15);
        let h = 1e-7;
        let d0 = (tunneling_mass(-1.0 + h, -1.0, 1.0, MC, MV) - MV) / h;
        let d1 = (MC - tunneling_mass(1.0 - h, -1.0, 1.0, MC, MV)) / h;
        assert!(d0.abs() < 1e-6 && d1.abs() < 1e-6, "{d0} {d1}");
        assert_eq!(tunneling_mass(0.3, 0.3, 0.3, MC, MV), 0.5 * (MC + MV));
    }

    #[test]
    fn effective_potential_regions() {
        let p = flat(0.5, -0.6);
        let s = p.slice(0.0);
        let deep = s.effective_fields(-0.9);
        assert_eq!(deep.region[0], BandRegion::Valence);
        assert!((deep.potential[0] - (-1.2)).abs() < 1e-15);
        assert_eq!(deep.mass[0], MV);
        let gap = s.effective_fields(0.1);
        assert_eq!(gap.region[0], BandRegion::Gap);
        assert!(gap.potential[0] > 0.1);
        let cb = s.effective_fields(0.7);
        assert_eq!(cb.potential[0], 0.5);
        assert_eq!(cb.mass[0], MC);
    }

    #[test]
    fn continuity_at_band_edges() {
        let (ev, ec) = (-0.6, 0.5);
        // valence branch at E = Ev gives Ev; gap branch approaches it
        let gap_branch = |e: f64| e - hbar2_over_2m0() * kxy_sq(e, ec, ev, MC, MV) / tunneling_mass(e, ev, ec, MC, MV);
        assert!((gap_branch(ev) - (2.0 * ev - ev)).abs() < 1e-10);
        assert!((gap_branch(ec) - ec).abs() < 1e-10);
    }

    #[test]
    fn windows() {
        let w = flat(0.5, -0.6).window();
        assert!(w.is_empty());
        assert_eq!(w.kz_max, 0.0);
        let w = flat(0.5, 0.5).window();
        assert_eq!(w.kz_max, 0.0);
        let w = flat(0.0, 0.2).window();
        assert!((w.reduced_mass - MC * MV / (MC + MV)).abs() < 1e-15);
        assert!((w.kz_max - k_squared(w.reduced_mass, 0.2).sqrt()).abs() < 1e-14);
        let w = window_from(&[0.0], &[0.1], &[0.3], &[0.3]);
        assert!((w.reduced_mass - 0.15).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn harmonic_bound(frac in 0.001f64..0.999, gap in 0.2f64..2.0, mc in 0.05f64..1.0, mv in 0.05f64..1.0) {
            let ev = -0.3;
            let ec = ev + gap;
            let e = ev + frac * gap;
            let k = two_band_kxy_sq(e, ec, ev, mc, mv).unwrap();
            let kc = k_squared(mc, e - ec);
            let kv = k_squared(mv, ev - e);
            prop_assert!(k < 0.0);
            prop_assert!(k.abs() <= kc.abs().min(kv.abs()) * (1.0 + 1e-12));
        }

        #[test]
        fn mass_stays_between(frac in 0.0f64..=1.0, mc in 0.05f64..1.0, mv in 0.05f64..1.0) {
            let m = tunneling_mass(frac, 0.0, 1.0, mc, mv);
            prop_assert!(m >= mc.min(mv) - 1e-15 && m <= mc.max(mv) + 1e-15);
        }

        #[test]
        fn gap_potential_above_energy(frac in 0.001f64..0.999, kz in 0.0f64..1.5) {
            let p = flat(0.5, -0.6);
            let s = p.slice(kz);
            let e = s.ev_sub[0] + frac * (s.ec_sub[0] - s.ev_sub[0]);
            let f = s.effective_fields(e);
            prop_assert!(f.potential[0] > e);
        }

        #[test]
        fn max_barrier_monotone_in_kz(e in -0.55f64..0.45, k1 in 0.0f64..1.0, dk in 0.0f64..1.0) {
            let p = flat(0.5, -0.6);
            let u1 = p.slice(k1).effective_fields(e).potential[0];
            let u2 = p.slice(k1 + dk).effective_fields(e).potential[0];
            prop_assert!(u2 >= u1 - 1e-12);
        }
    }
}
