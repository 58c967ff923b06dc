use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::materials::{builtin_materials, MaterialOverride, MaterialParams};
use crate::error::{Error, Result};

const GEOM_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub name: String,
    /// [start, end] in nm
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub material: String,
    /// net donor minus acceptor concentration, cm^-3
    pub doping: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateSide {
    Top,
    Bottom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSpec {
    pub side: GateSide,
    pub x: [f64; 2],
    /// eV
    pub work_function: f64,
    /// nm
    pub oxide_thickness: f64,
    pub oxide_permittivity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContactSpec {
    pub source: String,
    pub drain: String,
}

/// Validated device description.
#[derive(Clone, Debug, PartialEq)]
pub struct DeviceSpec {
    /// body length along transport, nm
    pub length: f64,
    /// body thickness, nm
    pub thickness: f64,
    /// width used only to scale per-width currents, nm
    pub width: f64,
    /// kelvin
    pub temperature: f64,
    pub regions: Vec<RegionSpec>,
    pub gates: Vec<GateSpec>,
    pub contacts: ContactSpec,
    /// every material referenced by a region, fully resolved
    pub materials: BTreeMap<String, MaterialParams>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    ClosedBoundary,
    Negf,
}

impl std::str::FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed-boundary" | "closed" => Ok(Backend::ClosedBoundary),
            "negf" => Ok(Backend::Negf),
            _ => Err(Error::config(format!("unknown backend '{s}' (closed-boundary, negf)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelaxMode {
    Carrier,
    Band,
    Combined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KaneParams {
    /// prefactor A in cm^-3 s^-1 eV^1/2 (V/cm)^-gamma
    pub a: f64,
    /// exponent scale B in V/cm eV^-3/2
    pub b: f64,
    pub gamma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// target mesh spacing, nm
    pub mesh_spacing: f64,
    pub backend: Backend,
    pub relaxation: RelaxMode,
    /// weight of the previous iterate
    pub alpha: f64,
    /// stop when max |dV| falls below this, volt
    pub tolerance: f64,
    pub max_iterations: usize,
    /// fill potential pockets before computing carriers; defaults on for
    /// the negf backend and off for closed-boundary
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pockets: Option<bool>,
    /// linearized carrier response in the Poisson operator
    pub screening: bool,
    /// retarded broadening, eV
    pub eta: f64,
    /// closed-boundary lead extension on each side, nm
    pub extension: f64,
    /// Gauss-Legendre points for the kz integral of the current
    pub kz_points: usize,
    /// energy step of the current integral, eV; default min(kT/5, window/200)
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_step: Option<f64>,
    /// carrier energy panel width in units of kT
    pub carrier_panel: f64,
    /// quadrature points per carrier energy panel
    pub carrier_points: usize,
    pub poisson_tolerance: f64,
    /// repeat the current integral on a halved grid and flag > 2 % changes
    pub richardson: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kane: Option<KaneParams>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            mesh_spacing: 0.5,
            backend: Backend::ClosedBoundary,
            relaxation: RelaxMode::Carrier,
            alpha: 0.7,
            tolerance: 1e-5,
            max_iterations: 200,
            pockets: None,
            screening: true,
            eta: 1e-6,
            extension: 10.0,
            kz_points: 12,
            energy_step: None,
            carrier_panel: 0.5,
            carrier_points: 4,
            poisson_tolerance: 1e-10,
            richardson: false,
            kane: None,
        }
    }
}

impl SolverConfig {
    pub fn pockets_enabled(&self) -> bool {
        self.pockets.unwrap_or(self.backend == Backend::Negf)
    }

    fn validate(&mut self) -> Result<()> {
        if !(self.mesh_spacing > 0.0) {
            return Err(Error::config("solver.mesh_spacing must be positive"));
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(Error::config("solver.alpha must lie in [0, 1)"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::config("solver.tolerance must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(Error::config("solver.max_iterations must be at least 1"));
        }
        if !(self.eta > 0.0) {
            return Err(Error::config("solver.eta must be positive"));
        }
        if !(self.extension >= 0.0) {
            return Err(Error::config("solver.extension must be non-negative"));
        }
        if self.kz_points == 0 || self.carrier_points == 0 {
            return Err(Error::config("solver quadrature point counts must be positive"));
        }
        if !(self.carrier_panel > 0.0) {
            return Err(Error::config("solver.carrier_panel must be positive"));
        }
        if let Some(h) = self.energy_step {
            if !(h > 0.0) {
                return Err(Error::config("solver.energy_step must be positive"));
            }
        }
        self.pockets = Some(self.pockets_enabled());
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BiasList {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl BiasList {
    fn resolve(&self, key: &str) -> Result<Vec<f64>> {
        match self {
            BiasList::List(v) if v.is_empty() => Err(Error::config(format!("sweep.{key}: empty list"))),
            BiasList::List(v) => Ok(v.clone()),
            BiasList::Range { start, stop, step } => {
                if !(step.abs() > 0.0) || (stop - start) * step < 0.0 {
                    return Err(Error::config(format!("sweep.{key}: step does not reach stop")));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                Ok((0..=n)
                    .map(|k| {
                        let v = start + step * k as f64;
                        (v * 1e12).round() / 1e12
                    })
                    .collect())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sweep {
    /// gate voltages, V
    pub vg: Vec<f64>,
    /// drain voltages, V
    pub vd: Vec<f64>,
}

impl Sweep {
    /// Bias points in run order: drain voltage outer, gate voltage inner.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.vd.iter().flat_map(|&vd| self.vg.iter().map(move |&vg| (vg, vd))).collect()
    }
}

/// Everything a batch run needs.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub device: DeviceSpec,
    pub solver: SolverConfig,
    pub sweep: Sweep,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBody {
    length: f64,
    thickness: f64,
    #[serde(default = "default_width")]
    width: f64,
    #[serde(default = "default_temperature")]
    temperature: f64,
}

fn default_width() -> f64 {
    1.0
}
fn default_temperature() -> f64 {
    300.0
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    vg: Option<BiasList>,
    vd: Option<BiasList>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    device: RawBody,
    #[serde(default)]
    regions: Vec<RegionSpec>,
    #[serde(default)]
    gates: Vec<GateSpec>,
    contacts: ContactSpec,
    #[serde(default)]
    materials: BTreeMap<String, MaterialOverride>,
    #[serde(default)]
    solver: SolverConfig,
    #[serde(default)]
    sweep: RawSweep,
}

#[derive(Serialize)]
struct EchoBody {
    length: f64,
    thickness: f64,
    width: f64,
    temperature: f64,
}

#[derive(Serialize)]
struct Echo<'a> {
    device: EchoBody,
    regions: &'a [RegionSpec],
    gates: &'a [GateSpec],
    contacts: &'a ContactSpec,
    materials: &'a BTreeMap<String, MaterialParams>,
    solver: &'a SolverConfig,
    sweep: &'a Sweep,
}

/// Parse and validate a full run configuration.
pub fn load_config(text: &str) -> Result<RunConfig> {
    load_config_with(text, &[])
}

/// Parse a configuration after applying `key.path=value` overrides.
pub fn load_config_with(text: &str, overrides: &[String]) -> Result<RunConfig> {
    let mut table: toml::Table = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
    for ov in overrides {
        apply_override(&mut table, ov)?;
    }
    let raw: RawConfig = table.try_into().map_err(|e: toml::de::Error| Error::config(e.to_string()))?;
    resolve(raw)
}

/// Parse only the device part of a configuration.
pub fn load_device(text: &str) -> Result<DeviceSpec> {
    Ok(load_config(text)?.device)
}

fn resolve(raw: RawConfig) -> Result<RunConfig> {
    let builtin = builtin_materials();
    let mut materials = BTreeMap::new();
    for region in &raw.regions {
        if materials.contains_key(&region.material) {
            continue;
        }
        let base = builtin.get(&region.material);
        let m = match raw.materials.get(&region.material) {
            Some(o) => o.apply(&region.material, base)?,
            None => base
                .cloned()
                .ok_or_else(|| Error::config(format!("regions.{}: unknown material '{}'", region.name, region.material)))?,
        };
        materials.insert(region.material.clone(), m);
    }
    for name in raw.materials.keys() {
        if !materials.contains_key(name) {
            log::warn!("materials.{name} is not used by any region");
        }
    }
    let device = DeviceSpec {
        length: raw.device.length,
        thickness: raw.device.thickness,
        width: raw.device.width,
        temperature: raw.device.temperature,
        regions: raw.regions,
        gates: raw.gates,
        contacts: raw.contacts,
        materials,
    };
    device.validate()?;
    let mut solver = raw.solver;
    solver.validate()?;
    let sweep = Sweep {
        vg: raw.sweep.vg.map(|b| b.resolve("vg")).transpose()?.unwrap_or_else(|| vec![0.0]),
        vd: raw.sweep.vd.map(|b| b.resolve("vd")).transpose()?.unwrap_or_else(|| vec![0.0]),
    };
    Ok(RunConfig { device, solver, sweep })
}

fn apply_override(table: &mut toml::Table, ov: &str) -> Result<()> {
    let (path, value) = ov
        .split_once('=')
        .ok_or_else(|| Error::config(format!("override '{ov}' is not key=value")))?;
    let value = parse_value(value.trim());
    let keys: Vec<&str> = path.trim().split('.').collect();
    let mut cur: &mut toml::Value = {
        let first = keys[0];
        if keys.len() == 1 {
            table.insert(first.to_string(), value);
            return Ok(());
        }
        table
            .entry(first.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
    };
    for (k, key) in keys.iter().enumerate().skip(1) {
        let last = k == keys.len() - 1;
        cur = match cur {
            toml::Value::Table(t) => {
                if last {
                    t.insert(key.to_string(), value);
                    return Ok(());
                }
                t.entry(key.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()))
            }
            toml::Value::Array(a) => {
                let idx: usize = key
                    .parse()
                    .map_err(|_| Error::config(format!("override '{path}': '{key}' is not an index")))?;
                let len = a.len();
                let slot = a
                    .get_mut(idx)
                    .ok_or_else(|| Error::config(format!("override '{path}': index {idx} out of {len}")))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => return Err(Error::config(format!("override '{path}': '{key}' is not a table"))),
        };
    }
    Ok(())
}

fn parse_value(s: &str) -> toml::Value {
    match toml::from_str::<toml::Table>(&format!("v = {s}")) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(s.to_string())),
        Err(_) => toml::Value::String(s.to_string()),
    }
}

impl RunConfig {
    /// Resolved configuration as TOML; loading it yields an identical value.
    pub fn to_toml(&self) -> String {
        let d = &self.device;
        let echo = Echo {
            device: EchoBody { length: d.length, thickness: d.thickness, width: d.width, temperature: d.temperature },
            regions: &d.regions,
            gates: &d.gates,
            contacts: &d.contacts,
            materials: &d.materials,
            solver: &self.solver,
            sweep: &self.sweep,
        };
        toml::to_string(&echo).expect("resolved config serializes")
    }

    /// SHA-256 of the resolved TOML, hex encoded.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_toml().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn rect_overlap(a: &RegionSpec, b: &RegionSpec) -> f64 {
    let w = a.x[1].min(b.x[1]) - a.x[0].max(b.x[0]);
    let h = a.y[1].min(b.y[1]) - a.y[0].max(b.y[0]);
    if w > GEOM_TOL && h > GEOM_TOL {
        w * h
    } else {
        0.0
    }
}

impl DeviceSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0) {
            return Err(Error::Geometry("length must be positive".into()));
        }
        if !(self.thickness > 0.0) {
            return Err(Error::Geometry("thickness must be positive".into()));
        }
        if !(self.width > 0.0) {
            return Err(Error::Geometry("width must be positive".into()));
        }
        if !(self.temperature > 0.0) {
            return Err(Error::config("device.temperature must be positive"));
        }
        if self.regions.is_empty() {
            return Err(Error::Geometry("no regions".into()));
        }
        let tol = GEOM_TOL * self.length.max(self.thickness);
        for (k, r) in self.regions.iter().enumerate() {
            if self.regions[..k].iter().any(|o| o.name == r.name) {
                return Err(Error::config(format!("region name '{}' used twice", r.name)));
            }
            if !(r.x[0] < r.x[1] && r.y[0] < r.y[1]) {
                return Err(Error::Geometry(format!("region '{}' has an empty rectangle", r.name)));
            }
            if r.x[0] < -tol || r.x[1] > self.length + tol || r.y[0] < -tol || r.y[1] > self.thickness + tol {
                return Err(Error::Geometry(format!("region '{}' extends outside the body", r.name)));
            }
            if !r.doping.is_finite() {
                return Err(Error::config(format!("regions.{}: doping must be finite", r.name)));
            }
        }
        for (k, a) in self.regions.iter().enumerate() {
            for b in &self.regions[k + 1..] {
                if rect_overlap(a, b) > 0.0 {
                    return Err(Error::Geometry(format!("regions '{}' and '{}' overlap", a.name, b.name)));
                }
            }
        }
        let area: f64 = self.regions.iter().map(|r| (r.x[1] - r.x[0]) * (r.y[1] - r.y[0])).sum();
        let body = self.length * self.thickness;
        if (area - body).abs() > 1e-9 * body {
            return Err(Error::Geometry(format!(
                "regions cover {area} nm^2 of a {body} nm^2 body; they must tile it"
            )));
        }
        let find = |name: &str, key: &str| {
            self.regions
                .iter()
                .find(|r| r.name == name)
                .ok_or_else(|| Error::config(format!("contacts.{key}: no region named '{name}'")))
        };
        let s = find(&self.contacts.source, "source")?;
        if s.x[0].abs() > tol {
            return Err(Error::Geometry(format!("source region '{}' does not touch x = 0", s.name)));
        }
        let d = find(&self.contacts.drain, "drain")?;
        if (d.x[1] - self.length).abs() > tol {
            return Err(Error::Geometry(format!("drain region '{}' does not touch x = {}", d.name, self.length)));
        }
        for (k, g) in self.gates.iter().enumerate() {
            if !(g.oxide_thickness > 0.0) {
                return Err(Error::config(format!("gates.{k}: oxide_thickness must be positive")));
            }
            if !(g.oxide_permittivity >= 1.0) {
                return Err(Error::config(format!("gates.{k}: oxide_permittivity must be at least 1")));
            }
            if !(g.x[0] < g.x[1]) || g.x[0] < -tol || g.x[1] > self.length + tol {
                return Err(Error::Geometry(format!("gates.{k}: segment must lie inside [0, {}]", self.length)));
            }
        }
        for (name, m) in &self.materials {
            m.validate(name)?;
        }
        Ok(())
    }

    /// Index of the first listed region containing (x, y), boundaries inclusive.
    pub fn region_at(&self, x: f64, y: f64) -> Option<usize> {
        let tol = 1e-9 * self.length.max(self.thickness);
        self.regions
            .iter()
            .position(|r| x >= r.x[0] - tol && x <= r.x[1] + tol && y >= r.y[0] - tol && y <= r.y[1] + tol)
    }

    pub fn material(&self, region: usize) -> &MaterialParams {
        &self.materials[&self.regions[region].material]
    }

    pub fn region_index(&self, name: &str) -> Option<usize> {
        self.regions.iter().position(|r| r.name == name)
    }
}

/// Reference double-gate silicon device: p+ source, lightly n-type channel,
/// n+ drain, 20 nm gates on both faces.
pub fn reference_config(thickness: f64) -> String {
    format!(
        r#"[device]
length = 40.0
thickness = {thickness:?}
width = 1.0
temperature = 300.0

[[regions]]
name = "source"
x = [0.0, 10.0]
y = [0.0, {thickness:?}]
material = "Si"
doping = -1e20

[[regions]]
name = "channel"
x = [10.0, 30.0]
y = [0.0, {thickness:?}]
material = "Si"
doping = 1e17

[[regions]]
name = "drain"
x = [30.0, 40.0]
y = [0.0, {thickness:?}]
material = "Si"
doping = 1e20

[[gates]]
side = "top"
x = [10.0, 30.0]
work_function = 4.5
oxide_thickness = 1.0
oxide_permittivity = 3.9

[[gates]]
side = "bottom"
x = [10.0, 30.0]
work_function = 4.5
oxide_thickness = 1.0
oxide_permittivity = 3.9

[contacts]
source = "source"
drain = "drain"
"#
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_device_accepted() {
        let cfg = load_config(&reference_config(10.0)).unwrap();
        assert_eq!(cfg.device.regions.len(), 3);
        assert_eq!(cfg.device.gates.len(), 2);
        assert_eq!(cfg.device.materials["Si"].bandgap, 1.12);
        assert_eq!(cfg.solver.pockets, Some(false));
    }

    #[test]
    fn empty_regions_rejected() {
        let text = "[device]\nlength = 10.0\nthickness = 2.0\n[contacts]\nsource = \"a\"\ndrain = \"b\"\n";
        let err = load_config(text).unwrap_err().to_string();
        assert!(err.contains("no regions"), "{err}");
    }

    #[test]
    fn overlap_names_both_regions() {
        let text = reference_config(10.0).replace("x = [10.0, 30.0]\ny", "x = [9.0, 30.0]\ny");
        let err = load_config(&text).unwrap_err().to_string();
        assert!(err.contains("'source'") && err.contains("'channel'"), "{err}");
    }

    #[test]
    fn unknown_key_is_named() {
        let text = reference_config(10.0) + "\n[solver]\nalpah = 0.5\n";
        let err = load_config(&text).unwrap_err().to_string();
        assert!(err.contains("alpah"), "{err}");
    }

    #[test]
    fn zero_thickness_rejected() {
        let text = reference_config(10.0).replace("thickness = 10.0", "thickness = 0.0");
        let err = load_config(&text).unwrap_err().to_string();
        assert!(err.contains("thickness must be positive"), "{err}");
    }

    #[test]
    fn echo_roundtrip_is_identical() {
        let text = reference_config(5.0) + "\n[sweep]\nvg = { start = 0.0, stop = 1.5, step = 0.1 }\nvd = [0.1]\n";
        let cfg = load_config(&text).unwrap();
        assert_eq!(cfg.sweep.vg.len(), 16);
        let again = load_config(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.hash(), again.hash());
        assert_eq!(cfg.to_toml(), again.to_toml());
    }

    #[test]
    fn overrides_apply() {
        let ov = vec![
            "solver.alpha=0.5".to_string(),
            "regions.1.doping=2e17".to_string(),
            "solver.backend=negf".to_string(),
            "sweep.vg=[0.0, 0.2]".to_string(),
        ];
        let cfg = load_config_with(&reference_config(10.0), &ov).unwrap();
        assert_eq!(cfg.solver.alpha, 0.5);
        assert_eq!(cfg.device.regions[1].doping, 2e17);
        assert_eq!(cfg.solver.backend, Backend::Negf);
        assert_eq!(cfg.solver.pockets, Some(true));
        assert_eq!(cfg.sweep.vg, vec![0.0, 0.2]);
        assert!(load_config_with(&reference_config(10.0), &["regions.7.doping=1".into()]).is_err());
    }
}
