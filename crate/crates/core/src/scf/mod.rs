//! Fixed-point iteration between the Poisson potential and the carrier
//! densities.

mod guess;

use std::time::Instant;

use serde::Serialize;

pub use guess::initial_guess;

use crate::bands::BandProfile;
use crate::carriers::fermi::BulkBands;
use crate::carriers::{
    closed_boundary_density, fill_pockets, negf_densities, DensityOptions, FermiLevels, GridPolicy, PocketReport,
};
use crate::device::{build_mesh, sample_fields, Backend, DeviceFields, DeviceSpec, FieldMap, Mesh2D, Quantity, RelaxMode, SolverConfig};
use crate::error::{Error, Result};
use crate::poisson::{assemble_charge, bands_from_potential, charge_to_source, device_bc, PoissonSystem};
use crate::units::{thermal_energy, ELEMENTARY_CHARGE};

/// A device spec resolved onto a mesh.
#[derive(Clone, Debug)]
pub struct DeviceModel {
    pub spec: DeviceSpec,
    pub mesh: Mesh2D,
    pub fields: DeviceFields,
    pub kt: f64,
    /// notes on spacing changes made to align region boundaries
    pub adjustments: Vec<String>,
}

impl DeviceModel {
    pub fn new(spec: DeviceSpec, spacing: f64) -> Result<Self> {
        spec.validate()?;
        let built = build_mesh(&spec, spacing)?;
        let fields = sample_fields(&spec, &built.mesh)?;
        let kt = thermal_energy(spec.temperature);
        Ok(DeviceModel { spec, mesh: built.mesh, fields, kt, adjustments: built.adjustments })
    }

    /// Band edges and masses for a potential.
    pub fn bands(&self, v: &FieldMap) -> Result<BandProfile> {
        let (ec, ev) = bands_from_potential(v, &self.fields)?;
        BandProfile::new(&ec, &ev, self.fields.electron_mass.clone(), self.fields.hole_mass.clone())
    }
}

/// Iteration settings.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopConfig {
    pub relaxation: RelaxMode,
    /// weight of the previous iterate
    pub alpha: f64,
    /// volt
    pub tolerance: f64,
    pub max_iterations: usize,
    pub backend: Backend,
    pub pockets: bool,
    pub screening: bool,
    pub density: DensityOptions,
    /// closed-boundary lead extension, nm
    pub extension: f64,
    pub poisson_tolerance: f64,
}

impl LoopConfig {
    pub fn from_solver(s: &SolverConfig) -> Self {
        LoopConfig {
            relaxation: s.relaxation,
            alpha: s.alpha,
            tolerance: s.tolerance,
            max_iterations: s.max_iterations,
            backend: s.backend,
            pockets: s.pockets_enabled(),
            screening: s.screening,
            density: DensityOptions {
                eta: s.eta,
                grid: GridPolicy::Graded { panel: s.carrier_panel, points: s.carrier_points },
            },
            extension: s.extension,
            poisson_tolerance: s.poisson_tolerance,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(Error::config("alpha must lie in [0, 1)"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::config("tolerance must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(Error::config("max_iterations must be at least 1"));
        }
        Ok(())
    }
}

impl Default for LoopConfig {
    fn default() -> Self {
        Self::from_solver(&SolverConfig::default())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LoopStatus {
    Converged,
    MaxIter,
    Diverged,
}

impl LoopStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            LoopStatus::Converged => "converged",
            LoopStatus::MaxIter => "max-iter",
            LoopStatus::Diverged => "diverged",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// volt
    pub max_dv: f64,
    /// largest density change relative to the field maximum
    pub max_dn: f64,
    pub alpha: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceTrace {
    pub records: Vec<IterationRecord>,
    pub status: LoopStatus,
}

impl ConvergenceTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn final_dv(&self) -> f64 {
        self.records.last().map_or(f64::INFINITY, |r| r.max_dv)
    }
}

/// Converged (or abandoned) state of one bias point.
#[derive(Clone, Debug)]
pub struct LoopResult {
    pub vg: f64,
    pub vd: f64,
    pub potential: FieldMap,
    pub ec: FieldMap,
    pub ev: FieldMap,
    pub n: FieldMap,
    pub p: FieldMap,
    pub trace: ConvergenceTrace,
    /// pockets removed in the last carrier evaluation
    pub pockets: PocketReport,
    pub warnings: Vec<String>,
}

impl LoopResult {
    pub fn levels(&self) -> FermiLevels {
        FermiLevels::from_bias(self.vd)
    }
}

/// out = (1 - alpha) * calculated + alpha * old
pub fn relax(calculated: &FieldMap, old: &FieldMap, alpha: f64) -> Result<FieldMap> {
    calculated.same_mesh(old)?;
    let v = calculated.values().iter().zip(old.values()).map(|(c, o)| (1.0 - alpha) * c + alpha * o).collect();
    FieldMap::new(*calculated.mesh(), calculated.quantity(), v)
}

struct Carriers {
    n: FieldMap,
    p: FieldMap,
    pockets: PocketReport,
    warnings: Vec<String>,
}

fn carriers(model: &DeviceModel, v: &FieldMap, levels: FermiLevels, cfg: &LoopConfig) -> Result<Carriers> {
    let (mut ec, mut ev) = bands_from_potential(v, &model.fields)?;
    let mut pockets = PocketReport::default();
    if cfg.pockets {
        let (c, e, r) = fill_pockets(&ec, &ev)?;
        ec = c;
        ev = e;
        pockets = r;
    }
    let bands = BandProfile::new(&ec, &ev, model.fields.electron_mass.clone(), model.fields.hole_mass.clone())?;
    match cfg.backend {
        Backend::ClosedBoundary => {
            let r = closed_boundary_density(&bands, levels, model.kt, cfg.extension)?;
            Ok(Carriers { n: r.n, p: r.p, pockets, warnings: r.warnings })
        }
        Backend::Negf => {
            let r = negf_densities(&bands, levels, model.kt, &cfg.density)?;
            Ok(Carriers { n: r.n, p: r.p, pockets, warnings: Vec::new() })
        }
    }
}

/// Linearized carrier response per node, nm^-2, for the Poisson operator.
fn screening(model: &DeviceModel, n: &FieldMap, p: &FieldMap) -> Vec<f64> {
    let f = &model.fields;
    (0..model.mesh.len())
        .map(|q| {
            let bulk = BulkBands {
                bandgap: f.bandgap[q],
                electron_mass: f.electron_mass[q],
                hole_mass: f.hole_mass[q],
                kt: model.kt,
            };
            let (dn, dp) = bulk.response(n.values()[q], p.values()[q]);
            charge_to_source(ELEMENTARY_CHARGE * (dn + dp))
        })
        .collect()
}

fn max_change(new: &FieldMap, old: &FieldMap) -> f64 {
    let scale = old.max().abs().max(new.max().abs()).max(f64::MIN_POSITIVE);
    new.values().iter().zip(old.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale
}

/// Iterate bands -> carriers -> charge -> potential until max |dV| is below
/// the tolerance. `start` overrides the analytic initial guess.
pub fn run_loop(model: &DeviceModel, vg: f64, vd: f64, cfg: &LoopConfig, start: Option<&FieldMap>) -> Result<LoopResult> {
    cfg.validate()?;
    let levels = FermiLevels::from_bias(vd);
    let mesh = model.mesh;
    let bc = device_bc(&model.spec, &model.fields, levels.source, levels.drain, vg);
    let poisson = PoissonSystem::new(&model.fields.eps, bc, cfg.poisson_tolerance)?;
    let mut v = match start {
        Some(s) => {
            if s.mesh() != &mesh {
                return Err(Error::MeshMismatch("warm-start potential is on a different mesh".into()));
            }
            s.clone()
        }
        None => initial_guess(model, vg, vd)?,
    };
    let relax_carriers = matches!(cfg.relaxation, RelaxMode::Carrier | RelaxMode::Combined);
    let relax_bands = matches!(cfg.relaxation, RelaxMode::Band | RelaxMode::Combined);

    let mut alpha = cfg.alpha;
    let mut records: Vec<IterationRecord> = Vec::new();
    let mut previous: Option<(FieldMap, FieldMap)> = None;
    let mut last_step: Option<Vec<f64>> = None;
    let mut warnings = Vec::new();
    let mut status = LoopStatus::MaxIter;
    let mut state = None;

    for iteration in 1..=cfg.max_iterations {
        let clock = Instant::now();
        let c = carriers(model, &v, levels, cfg)?;
        for w in &c.warnings {
            if !warnings.contains(w) {
                warnings.push(w.clone());
            }
        }
        let (n, p) = match (&previous, relax_carriers) {
            (Some((n0, p0)), true) => (relax(&c.n, n0, alpha)?, relax(&c.p, p0, alpha)?),
            _ => (c.n.clone(), c.p.clone()),
        };
        let max_dn = match &previous {
            Some((n0, p0)) => max_change(&n, n0).max(max_change(&p, p0)),
            None => f64::INFINITY,
        };
        let rho = assemble_charge(&n, &p, &model.fields.doping)?;
        let source: Vec<f64> = rho.values().iter().map(|r| charge_to_source(*r)).collect();
        let solved = if cfg.screening {
            let c = screening(model, &n, &p);
            poisson.solve_source(&source, Some((&c, v.values())))?
        } else {
            poisson.solve_source(&source, None)?
        };
        let next: Vec<f64> = if relax_bands {
            solved.iter().zip(v.values()).map(|(s, o)| (1.0 - alpha) * s + alpha * o).collect()
        } else {
            solved
        };
        let step: Vec<f64> = next.iter().zip(v.values()).map(|(a, b)| a - b).collect();
        let max_dv = step.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        if !max_dv.is_finite() {
            return Err(Error::numerical(format!("potential update is not finite at iteration {iteration}")));
        }
        records.push(IterationRecord { iteration, max_dv, max_dn, alpha, seconds: clock.elapsed().as_secs_f64() });
        log::debug!("bias ({vg}, {vd}) iteration {iteration}: max |dV| = {max_dv:e}, alpha = {alpha}");

        // damping grows when successive updates point in opposite directions
        if let Some(prev) = &last_step {
            let dot: f64 = prev.iter().zip(&step).map(|(a, b)| a * b).sum();
            let na: f64 = prev.iter().map(|a| a * a).sum::<f64>().sqrt();
            let nb: f64 = step.iter().map(|a| a * a).sum::<f64>().sqrt();
            if dot < -0.5 * na * nb {
                alpha = (1.0 - 0.5 * (1.0 - alpha)).min(0.98);
            }
        }
        last_step = Some(step);
        v = FieldMap::new(mesh, Quantity::Potential, next)?;
        state = Some((n.clone(), p.clone(), c.pockets));
        previous = Some((n, p));

        if max_dv <= cfg.tolerance {
            status = LoopStatus::Converged;
            break;
        }
        if iteration > 10 && max_dv > 5.0 * records[iteration - 11].max_dv {
            status = LoopStatus::Diverged;
            break;
        }
    }
    let (n, p, pockets) = state.expect("at least one iteration");
    let (ec, ev) = bands_from_potential(&v, &model.fields)?;
    if status != LoopStatus::Converged {
        log::warn!("bias ({vg}, {vd}) ended {} after {} iterations", status.as_str(), records.len());
    }
    Ok(LoopResult {
        vg,
        vd,
        potential: v,
        ec,
        ev,
        n,
        p,
        trace: ConvergenceTrace { records, status },
        pockets,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{load_device, reference_config};

    #[test]
    fn relax_limits() {
        let mesh = Mesh2D::new(2, 2, 1.0, 1.0).unwrap();
        let a = FieldMap::constant(mesh, Quantity::Potential, 1.0);
        let b = FieldMap::constant(mesh, Quantity::Potential, 3.0);
        assert_eq!(relax(&a, &b, 0.0).unwrap(), a);
        assert_eq!(relax(&b, &b, 0.6).unwrap(), b);
        // fixed calculated value: the error shrinks by alpha per step
        let mut x = b.clone();
        for _ in 0..5 {
            let next = relax(&a, &x, 0.9).unwrap();
            let ratio = (next.values()[0] - 1.0) / (x.values()[0] - 1.0);
            assert!((ratio - 0.9).abs() < 1e-12);
            x = next;
        }
    }

    #[test]
    fn depleted_slab_converges_quickly() {
        // intrinsic silicon with no gates: carriers are negligible and the
        // potential is the Laplace solution between the contacts
        let text = reference_config(4.0)
            .replace("doping = -1e20", "doping = 0.0")
            .replace("doping = 1e20", "doping = 0.0")
            .replace("doping = 1e17", "doping = 0.0");
        let mut spec = load_device(&text).unwrap();
        spec.gates.clear();
        let model = DeviceModel::new(spec, 1.0).unwrap();
        let cfg = LoopConfig { tolerance: 1e-6, ..LoopConfig::default() };
        let r = run_loop(&model, 0.0, 0.2, &cfg, None).unwrap();
        assert_eq!(r.trace.status, LoopStatus::Converged);
        assert!(r.trace.iterations() <= 3, "{}", r.trace.iterations());
        // Laplace between the contacts: linear in x
        let v0 = r.potential.at(0, 0);
        let v1 = r.potential.at(model.mesh.nx, 0);
        for i in 0..=model.mesh.nx {
            let want = v0 + (v1 - v0) * i as f64 / model.mesh.nx as f64;
            assert!((r.potential.at(i, 2) - want).abs() < 1e-4);
        }
    }
}
