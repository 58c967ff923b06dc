//! Finite-volume Poisson solver for -div(eps grad V) = rho on the body.
//!
//! Control volumes are centred on nodes (half volumes on the boundary), edge
//! permittivities are arithmetic means of the two end nodes, and Dirichlet
//! nodes are eliminated so the reduced operator stays symmetric positive
//! definite.

use nalgebra::DMatrix;
use nalgebra_sparse::{factorization::CscCholesky, CooMatrix, CscMatrix};

use crate::carriers::fermi::BulkBands;
use crate::device::{DeviceFields, DeviceSpec, FieldMap, GateSide, Mesh2D, Quantity};
use crate::error::{Error, Result};
use crate::units::{thermal_energy, ELEMENTARY_CHARGE, VACUUM_PERMITTIVITY};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NodeBc {
    Interior,
    Dirichlet(f64),
    /// zero normal field
    Neumann,
    /// flux `capacitance * (potential - V)` through the node's boundary face;
    /// capacitance is eps_r / length (nm^-1) already scaled by face coverage
    Robin { capacitance: f64, potential: f64 },
}

/// One condition per boundary node, `Interior` elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct PoissonBC {
    pub mesh: Mesh2D,
    pub nodes: Vec<NodeBc>,
}

fn on_boundary(mesh: &Mesh2D, i: usize, j: usize) -> bool {
    i == 0 || i == mesh.nx || j == 0 || j == mesh.ny
}

impl PoissonBC {
    /// Neumann on every boundary node.
    pub fn insulated(mesh: Mesh2D) -> Self {
        let nodes = (0..mesh.len())
            .map(|p| {
                let (i, j) = mesh.ij(p);
                if on_boundary(&mesh, i, j) {
                    NodeBc::Neumann
                } else {
                    NodeBc::Interior
                }
            })
            .collect();
        PoissonBC { mesh, nodes }
    }

    /// Dirichlet with `value(x, y)` on every boundary node.
    pub fn dirichlet(mesh: Mesh2D, value: impl Fn(f64, f64) -> f64) -> Self {
        let mut bc = Self::insulated(mesh);
        for p in 0..mesh.len() {
            if bc.nodes[p] != NodeBc::Interior {
                let (i, j) = mesh.ij(p);
                bc.nodes[p] = NodeBc::Dirichlet(value(mesh.x(i), mesh.y(j)));
            }
        }
        bc
    }

    fn validate(&self) -> Result<()> {
        if self.nodes.len() != self.mesh.len() {
            return Err(Error::MeshMismatch("boundary condition list does not match mesh".into()));
        }
        let mut anchored = false;
        for (p, bc) in self.nodes.iter().enumerate() {
            let (i, j) = self.mesh.ij(p);
            let boundary = on_boundary(&self.mesh, i, j);
            match bc {
                NodeBc::Interior if boundary => {
                    return Err(Error::config(format!("boundary node ({i}, {j}) has no condition")))
                }
                NodeBc::Interior => {}
                _ if !boundary => {
                    return Err(Error::config(format!("interior node ({i}, {j}) carries a boundary condition")))
                }
                NodeBc::Dirichlet(_) => anchored = true,
                NodeBc::Robin { capacitance, .. } if *capacitance > 0.0 => anchored = true,
                _ => {}
            }
        }
        if !anchored {
            return Err(Error::numerical(
                "singular Poisson system: no Dirichlet or Robin anchor (all boundaries Neumann)",
            ));
        }
        Ok(())
    }
}

/// rho = e (p - n + N_D - N_A), C/cm^3.
pub fn assemble_charge(n: &FieldMap, p: &FieldMap, doping: &FieldMap) -> Result<FieldMap> {
    n.same_mesh(p)?;
    n.same_mesh(doping)?;
    let v = n
        .values()
        .iter()
        .zip(p.values())
        .zip(doping.values())
        .map(|((n, p), d)| ELEMENTARY_CHARGE * (p - n + d))
        .collect();
    FieldMap::new(*n.mesh(), Quantity::Charge, v)
}

/// rho (C/cm^3) divided by eps0, in V/nm^2.
pub fn charge_to_source(rho: f64) -> f64 {
    rho * 1e-12 / VACUUM_PERMITTIVITY
}

/// Ec = -chi - V and Ev = Ec - Eg.
pub fn bands_from_potential(v: &FieldMap, fields: &DeviceFields) -> Result<(FieldMap, FieldMap)> {
    if v.mesh() != &fields.mesh {
        return Err(Error::MeshMismatch("potential and device fields differ".into()));
    }
    let ec: Vec<f64> = v.values().iter().zip(&fields.affinity).map(|(v, chi)| -chi - v).collect();
    let ev: Vec<f64> = ec.iter().zip(&fields.bandgap).map(|(c, g)| c - g).collect();
    Ok((
        FieldMap::new(fields.mesh, Quantity::ConductionBand, ec)?,
        FieldMap::new(fields.mesh, Quantity::ValenceBand, ev)?,
    ))
}

/// Contact potential for a neutral flat-band ohmic contact: V = -chi - mu - (Ec - mu).
pub fn contact_potential(fields: &DeviceFields, node: usize, mu: f64, kt: f64) -> f64 {
    let bulk = BulkBands {
        bandgap: fields.bandgap[node],
        electron_mass: fields.electron_mass[node],
        hole_mass: fields.hole_mass[node],
        kt,
    };
    -fields.affinity[node] - mu - bulk.neutral_offset(fields.doping.values()[node])
}

/// Device boundary conditions: ohmic Dirichlet contacts at x = 0 (Fermi level
/// `mu_source`) and x = Lx (`mu_drain`), oxide capacitance under gates and
/// Neumann on the remaining faces. `vg` is the applied gate voltage.
pub fn device_bc(spec: &DeviceSpec, fields: &DeviceFields, mu_source: f64, mu_drain: f64, vg: f64) -> PoissonBC {
    let mesh = fields.mesh;
    let kt = thermal_energy(spec.temperature);
    let mut bc = PoissonBC::insulated(mesh);
    for j in 0..mesh.rows() {
        let p = mesh.idx(0, j);
        bc.nodes[p] = NodeBc::Dirichlet(contact_potential(fields, p, mu_source, kt));
        let p = mesh.idx(mesh.nx, j);
        bc.nodes[p] = NodeBc::Dirichlet(contact_potential(fields, p, mu_drain, kt));
    }
    for gate in &spec.gates {
        let j = match gate.side {
            GateSide::Bottom => 0,
            GateSide::Top => mesh.ny,
        };
        let cox = gate.oxide_permittivity / gate.oxide_thickness;
        // vacuum level of the gate metal sits at -(Vg - phi_m) in this gauge
        let potential = vg - gate.work_function;
        for i in 1..mesh.nx {
            let lo = (mesh.x(i) - 0.5 * mesh.ax).max(0.0);
            let hi = (mesh.x(i) + 0.5 * mesh.ax).min(mesh.lx());
            let cover = (hi.min(gate.x[1]) - lo.max(gate.x[0])).max(0.0) / (hi - lo);
            if cover <= 0.0 {
                continue;
            }
            let p = mesh.idx(i, j);
            bc.nodes[p] = match bc.nodes[p] {
                NodeBc::Robin { capacitance, potential: v0 } => {
                    let c = capacitance + cox * cover;
                    NodeBc::Robin { capacitance: c, potential: (capacitance * v0 + cox * cover * potential) / c }
                }
                _ => NodeBc::Robin { capacitance: cox * cover, potential },
            };
        }
    }
    bc
}

/// Assembled and reusable Poisson operator.
pub struct PoissonSystem {
    mesh: Mesh2D,
    bc: PoissonBC,
    eps: Vec<f64>,
    /// unknown index for each node, None for Dirichlet nodes
    unknown: Vec<Option<usize>>,
    fixed: Vec<f64>,
    tolerance: f64,
}

fn cv_width(n: usize, k: usize, a: f64) -> f64 {
    if n == 0 {
        a
    } else if k == 0 || k == n {
        0.5 * a
    } else {
        a
    }
}

impl PoissonSystem {
    pub fn new(eps: &FieldMap, bc: PoissonBC, tolerance: f64) -> Result<Self> {
        let mesh = *eps.mesh();
        if bc.mesh != mesh {
            return Err(Error::MeshMismatch("permittivity and boundary conditions differ".into()));
        }
        if mesh.ny == 0 {
            return Err(Error::Geometry("the Poisson solver needs at least two node rows".into()));
        }
        bc.validate()?;
        let mut unknown = vec![None; mesh.len()];
        let mut fixed = vec![0.0; mesh.len()];
        let mut count = 0;
        for (p, c) in bc.nodes.iter().enumerate() {
            match c {
                NodeBc::Dirichlet(v) => fixed[p] = *v,
                _ => {
                    unknown[p] = Some(count);
                    count += 1;
                }
            }
        }
        Ok(PoissonSystem { mesh, bc, eps: eps.values().to_vec(), unknown, fixed, tolerance })
    }

    pub fn mesh(&self) -> &Mesh2D {
        &self.mesh
    }

    /// Control-volume area of node p, nm^2.
    pub fn volume(&self, p: usize) -> f64 {
        let (i, j) = self.mesh.ij(p);
        cv_width(self.mesh.nx, i, self.mesh.ax) * cv_width(self.mesh.ny, j, self.mesh.ay)
    }

    /// Couplings (neighbour, conductance) of node p.
    fn edges(&self, p: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let m = self.mesh;
        let (i, j) = m.ij(p);
        let wx = cv_width(m.nx, i, m.ax);
        let wy = cv_width(m.ny, j, m.ay);
        let mut out: [(usize, f64); 4] = [(usize::MAX, 0.0); 4];
        let mut k = 0;
        let mut add = |q: usize, len: f64, dist: f64| {
            out[k] = (q, 0.5 * (self.eps[p] + self.eps[q]) * len / dist);
            k += 1;
        };
        if i > 0 {
            add(m.idx(i - 1, j), wy, m.ax);
        }
        if i < m.nx {
            add(m.idx(i + 1, j), wy, m.ax);
        }
        if j > 0 {
            add(m.idx(i, j - 1), wx, m.ay);
        }
        if j < m.ny {
            add(m.idx(i, j + 1), wx, m.ay);
        }
        out.into_iter().take(k)
    }

    fn robin_length(&self, p: usize) -> f64 {
        let (i, j) = self.mesh.ij(p);
        if j == 0 || j == self.mesh.ny {
            cv_width(self.mesh.nx, i, self.mesh.ax)
        } else {
            cv_width(self.mesh.ny, j, self.mesh.ay)
        }
    }

    /// Reduced matrix and right-hand side. `source` is rho/eps0 in V/nm^2;
    /// `screening` adds c (V - V_ref) with c in nm^-2 per node.
    fn assemble(&self, source: &[f64], screening: Option<(&[f64], &[f64])>) -> (CscMatrix<f64>, Vec<f64>) {
        let n = self.unknown.iter().filter(|u| u.is_some()).count();
        let mut coo = CooMatrix::new(n, n);
        let mut b = vec![0.0; n];
        for p in 0..self.mesh.len() {
            let Some(row) = self.unknown[p] else { continue };
            let vol = self.volume(p);
            let mut diag = 0.0;
            b[row] += source[p] * vol;
            for (q, g) in self.edges(p) {
                diag += g;
                match self.unknown[q] {
                    Some(col) => coo.push(row, col, -g),
                    None => b[row] += g * self.fixed[q],
                }
            }
            if let NodeBc::Robin { capacitance, potential } = self.bc.nodes[p] {
                let c = capacitance * self.robin_length(p);
                diag += c;
                b[row] += c * potential;
            }
            if let Some((c, vref)) = screening {
                diag += c[p] * vol;
                b[row] += c[p] * vol * vref[p];
            }
            coo.push(row, row, diag);
        }
        (CscMatrix::from(&coo), b)
    }

    /// Solve for V given rho/eps0 per node (V/nm^2).
    pub fn solve_source(&self, source: &[f64], screening: Option<(&[f64], &[f64])>) -> Result<Vec<f64>> {
        if source.len() != self.mesh.len() {
            return Err(Error::MeshMismatch("source length does not match mesh".into()));
        }
        let (a, b) = self.assemble(source, screening);
        let mut v = self.fixed.clone();
        if b.is_empty() {
            return Ok(v);
        }
        let chol = CscCholesky::factor(&a)
            .map_err(|e| Error::numerical(format!("Poisson factorization failed: {e}")))?;
        let rhs = DMatrix::from_column_slice(b.len(), 1, &b);
        let mut x = chol.solve(&rhs);
        let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut rel = f64::INFINITY;
        for _ in 0..3 {
            let r = &rhs - &a * &x;
            let rnorm = r.norm();
            rel = if bnorm > 0.0 { rnorm / bnorm } else { rnorm };
            if rel <= self.tolerance {
                break;
            }
            x += chol.solve(&r);
        }
        if rel > self.tolerance {
            return Err(Error::numerical(format!(
                "Poisson residual {rel:e} above tolerance {:e}",
                self.tolerance
            )));
        }
        for p in 0..self.mesh.len() {
            if let Some(k) = self.unknown[p] {
                v[p] = x[(k, 0)];
            }
        }
        Ok(v)
    }

    /// Dense copy of the reduced operator, for inspection in tests.
    pub fn operator_dense(&self) -> DMatrix<f64> {
        let (a, _) = self.assemble(&vec![0.0; self.mesh.len()], None);
        let mut d = DMatrix::zeros(a.nrows(), a.ncols());
        for (i, j, v) in a.triplet_iter() {
            d[(i, j)] += *v;
        }
        d
    }
}

/// Solve -div(eps grad V) = rho with rho in C/cm^3.
pub fn solve_poisson(rho: &FieldMap, eps: &FieldMap, bc: &PoissonBC, tolerance: f64) -> Result<FieldMap> {
    rho.same_mesh(eps)?;
    let sys = PoissonSystem::new(eps, bc.clone(), tolerance)?;
    let source: Vec<f64> = rho.values().iter().map(|&r| charge_to_source(r)).collect();
    FieldMap::new(*rho.mesh(), Quantity::Potential, sys.solve_source(&source, None)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn zero_charge(mesh: Mesh2D) -> FieldMap {
        FieldMap::constant(mesh, Quantity::Charge, 0.0)
    }

    #[test]
    fn constant_dirichlet() {
        let m = Mesh2D::new(8, 5, 0.5, 0.4).unwrap();
        let eps = FieldMap::constant(m, Quantity::Permittivity, 11.9);
        let v = solve_poisson(&zero_charge(m), &eps, &PoissonBC::dirichlet(m, |_, _| 0.3), 1e-10).unwrap();
        assert!(v.values().iter().all(|x| (x - 0.3).abs() < 1e-13));
    }

    #[test]
    fn linear_ramp() {
        let m = Mesh2D::new(10, 4, 1.0, 0.5).unwrap();
        let mut bc = PoissonBC::insulated(m);
        for j in 0..m.rows() {
            bc.nodes[m.idx(0, j)] = NodeBc::Dirichlet(0.0);
            bc.nodes[m.idx(m.nx, j)] = NodeBc::Dirichlet(1.0);
        }
        let eps = FieldMap::constant(m, Quantity::Permittivity, 3.0);
        let v = solve_poisson(&zero_charge(m), &eps, &bc, 1e-12).unwrap();
        for i in 0..m.cols() {
            for j in 0..m.rows() {
                assert!((v.at(i, j) - i as f64 / 10.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn all_neumann_is_rejected() {
        let m = Mesh2D::new(4, 4, 1.0, 1.0).unwrap();
        let eps = FieldMap::constant(m, Quantity::Permittivity, 1.0);
        let err = solve_poisson(&zero_charge(m), &eps, &PoissonBC::insulated(m), 1e-10).unwrap_err();
        assert!(err.to_string().contains("anchor"));
    }

    #[test]
    fn operator_is_symmetric_with_varying_eps() {
        let m = Mesh2D::new(6, 4, 0.7, 0.3).unwrap();
        let eps = FieldMap::from_fn(m, Quantity::Permittivity, |x, y| 1.0 + x + 2.0 * y).unwrap();
        let mut bc = PoissonBC::insulated(m);
        bc.nodes[m.idx(0, 2)] = NodeBc::Dirichlet(0.0);
        bc.nodes[m.idx(3, m.ny)] = NodeBc::Robin { capacitance: 2.0, potential: 1.0 };
        let sys = PoissonSystem::new(&eps, bc, 1e-10).unwrap();
        let a = sys.operator_dense();
        assert!((&a - a.transpose()).abs().max() < 1e-14);
    }

    #[test]
    fn charge_assembly() {
        let m = Mesh2D::new(2, 1, 1.0, 1.0).unwrap();
        let z = FieldMap::constant(m, Quantity::ElectronDensity, 0.0);
        let d = FieldMap::constant(m, Quantity::NetDoping, 1e17);
        let rho = assemble_charge(&z, &z, &d).unwrap();
        assert!((rho.values()[0] - ELEMENTARY_CHARGE * 1e17).abs() < 1e-20);
        let n = FieldMap::constant(m, Quantity::ElectronDensity, 1e17);
        let rho = assemble_charge(&n, &z, &d).unwrap();
        assert_eq!(rho.values()[0], 0.0);
        let other = Mesh2D::new(3, 1, 1.0, 1.0).unwrap();
        assert!(assemble_charge(&FieldMap::constant(other, Quantity::ElectronDensity, 0.0), &z, &d).is_err());
    }

    /// max node error for V = sin(pi x / L) sin(pi y / L) on an n x n mesh
    pub(crate) fn mms_error(n: usize) -> f64 {
        let l = 10.0;
        let m = Mesh2D::new(n, n, l / n as f64, l / n as f64).unwrap();
        let k = PI / l;
        let eps_r = 11.9;
        let exact = |x: f64, y: f64| (k * x).sin() * (k * y).sin();
        let source: Vec<f64> = (0..m.len())
            .map(|p| {
                let (i, j) = m.ij(p);
                2.0 * k * k * eps_r * exact(m.x(i), m.y(j))
            })
            .collect();
        let eps = FieldMap::constant(m, Quantity::Permittivity, eps_r);
        let sys = PoissonSystem::new(&eps, PoissonBC::dirichlet(m, exact), 1e-10).unwrap();
        let v = sys.solve_source(&source, None).unwrap();
        (0..m.len())
            .map(|p| {
                let (i, j) = m.ij(p);
                (v[p] - exact(m.x(i), m.y(j))).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn manufactured_solution_second_order() {
        let e: Vec<f64> = [8, 16, 32].iter().map(|&n| mms_error(n)).collect();
        assert!(e[0] / e[1] > 3.5 && e[1] / e[2] > 3.5, "{e:?}");
    }

    #[test]
    fn maximum_principle() {
        let m = Mesh2D::new(12, 6, 1.0, 1.0).unwrap();
        let eps = FieldMap::from_fn(m, Quantity::Permittivity, |x, _| 1.0 + 0.2 * x).unwrap();
        let bc = PoissonBC::dirichlet(m, |x, y| (0.3 * x).sin() + 0.1 * y);
        let v = solve_poisson(&zero_charge(m), &eps, &bc, 1e-10).unwrap();
        let (lo, hi) = bc.nodes.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| match c {
            NodeBc::Dirichlet(v) => (lo.min(*v), hi.max(*v)),
            _ => (lo, hi),
        });
        assert!(v.values().iter().all(|x| *x >= lo - 1e-12 && *x <= hi + 1e-12));
    }

    #[test]
    fn gauss_law_on_closed_contour() {
        // fluxes leaving the box of interior nodes equal the enclosed source
        let m = Mesh2D::new(10, 8, 0.5, 0.5).unwrap();
        let eps = FieldMap::from_fn(m, Quantity::Permittivity, |x, y| 2.0 + x * y * 0.1).unwrap();
        let source: Vec<f64> = (0..m.len()).map(|p| ((p * 7919) % 13) as f64 * 0.01).collect();
        let sys = PoissonSystem::new(&eps, PoissonBC::dirichlet(m, |_, _| 0.0), 1e-12).unwrap();
        let v = sys.solve_source(&source, None).unwrap();
        let inside = |p: usize| {
            let (i, j) = m.ij(p);
            (2..=6).contains(&i) && (2..=5).contains(&j)
        };
        let mut enclosed = 0.0;
        let mut outflow = 0.0;
        for p in (0..m.len()).filter(|&p| inside(p)) {
            enclosed += source[p] * sys.volume(p);
            for (q, g) in sys.edges(p) {
                if !inside(q) {
                    outflow += g * (v[p] - v[q]);
                }
            }
        }
        assert!((enclosed - outflow).abs() < 1e-10 * enclosed.abs(), "{enclosed} {outflow}");
    }
}
