//! Device description, mesh construction and node-wise material fields.

pub mod config;
pub mod field;
pub mod materials;
pub mod mesh;

pub use config::{
    load_config, load_config_with, load_device, reference_config, Backend, DeviceSpec, GateSide, GateSpec, KaneParams,
    RelaxMode, RunConfig, SolverConfig, Sweep,
};
pub use field::{FieldMap, Quantity};
pub use materials::MaterialParams;
pub use mesh::Mesh2D;

use crate::error::{Error, Result};

/// Mesh plus any spacing adjustments made to align region boundaries.
#[derive(Clone, Debug)]
pub struct MeshBuild {
    pub mesh: Mesh2D,
    pub adjustments: Vec<String>,
}

pub fn build_mesh(spec: &DeviceSpec, target_spacing: f64) -> Result<MeshBuild> {
    if !(target_spacing > 0.0) {
        return Err(Error::Geometry("target spacing must be positive".into()));
    }
    if !(spec.thickness > 0.0) {
        return Err(Error::Geometry("thickness must be positive".into()));
    }
    if !(spec.length > 0.0) {
        return Err(Error::Geometry("length must be positive".into()));
    }
    let xb: Vec<f64> = spec.regions.iter().flat_map(|r| r.x).collect();
    let yb: Vec<f64> = spec.regions.iter().flat_map(|r| r.y).collect();
    let nx = mesh::aligned_count(spec.length, target_spacing, &xb);
    let ny = mesh::aligned_count(spec.thickness, target_spacing, &yb);
    let mut adjustments = Vec::new();
    for (axis, len, n) in [("x", spec.length, nx), ("y", spec.thickness, ny)] {
        let a = len / n as f64;
        if (a - target_spacing).abs() > 1e-12 * target_spacing {
            let msg = format!("{axis} spacing snapped to {len}/{n} = {a:.6} nm (target {target_spacing} nm)");
            log::info!("{msg}");
            adjustments.push(msg);
        }
    }
    Ok(MeshBuild {
        mesh: Mesh2D::new(nx, ny, spec.length / nx as f64, spec.thickness / ny as f64)?,
        adjustments,
    })
}

/// Node-wise doping, permittivity and band parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct DeviceFields {
    pub mesh: Mesh2D,
    /// net N_D - N_A, cm^-3
    pub doping: FieldMap,
    pub eps: FieldMap,
    /// index into `DeviceSpec::regions` for each node
    pub region: Vec<usize>,
    pub affinity: Vec<f64>,
    pub bandgap: Vec<f64>,
    pub electron_mass: Vec<f64>,
    pub hole_mass: Vec<f64>,
}

pub fn sample_fields(spec: &DeviceSpec, mesh: &Mesh2D) -> Result<DeviceFields> {
    let n = mesh.len();
    let mut region = Vec::with_capacity(n);
    for i in 0..mesh.cols() {
        for j in 0..mesh.rows() {
            let r = spec.region_at(mesh.x(i), mesh.y(j)).ok_or_else(|| {
                Error::Geometry(format!("internal: node ({i}, {j}) lies in no region"))
            })?;
            region.push(r);
        }
    }
    let per = |f: &dyn Fn(usize) -> f64| region.iter().map(|&r| f(r)).collect::<Vec<f64>>();
    Ok(DeviceFields {
        mesh: *mesh,
        doping: FieldMap::new(*mesh, Quantity::NetDoping, per(&|r| spec.regions[r].doping))?,
        eps: FieldMap::new(*mesh, Quantity::Permittivity, per(&|r| spec.material(r).permittivity))?,
        affinity: per(&|r| spec.material(r).affinity),
        bandgap: per(&|r| spec.material(r).bandgap),
        electron_mass: per(&|r| spec.material(r).electron_mass),
        hole_mass: per(&|r| spec.material(r).hole_mass),
        region,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_region(length: f64, thickness: f64) -> DeviceSpec {
        let text = format!(
            "[device]\nlength = {length:?}\nthickness = {thickness:?}\n[[regions]]\nname = \"body\"\nx = [0.0, {length:?}]\ny = [0.0, {thickness:?}]\nmaterial = \"Si\"\ndoping = 1e17\n[contacts]\nsource = \"body\"\ndrain = \"body\"\n"
        );
        load_device(&text).unwrap()
    }

    #[test]
    fn mesh_examples() {
        let spec = single_region(40.0, 10.0);
        let m = build_mesh(&spec, 0.5).unwrap();
        assert_eq!((m.mesh.nx, m.mesh.ny), (80, 20));
        assert!(m.adjustments.is_empty());
        let m = build_mesh(&spec, 0.3).unwrap();
        assert_eq!(m.mesh.nx, 134);
        assert!((m.mesh.ax - 40.0 / 134.0).abs() < 1e-15);
        assert!(m.adjustments.iter().any(|a| a.contains("40/134")));
    }

    #[test]
    fn reference_boundaries_on_node_lines() {
        let spec = load_device(&reference_config(10.0)).unwrap();
        let m = build_mesh(&spec, 0.3).unwrap().mesh;
        for r in &spec.regions {
            for b in r.x {
                let s = b / m.ax;
                assert!((s - s.round()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn sampled_doping_and_tie_break() {
        let spec = load_device(&reference_config(10.0)).unwrap();
        let m = build_mesh(&spec, 1.0).unwrap().mesh;
        let f = sample_fields(&spec, &m).unwrap();
        assert_eq!(f.doping.at(2, 3), -1e20);
        assert_eq!(f.doping.at(20, 3), 1e17);
        // x = 10 belongs to both source and channel; source is listed first
        assert_eq!(f.doping.at(10, 3), -1e20);
        assert_eq!(f.eps.at(0, 0), 11.9);
        assert_eq!(f, sample_fields(&spec, &m).unwrap());
    }
}
