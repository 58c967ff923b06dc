//! Five-point finite-difference Hamiltonian with position dependent mass.
//!
//! Hoppings are hbar^2 / (2 m a^2) with the mass at a half node taken as the
//! harmonic mean of its two neighbours. The outermost hoppings are mirrored
//! from the boundary node, which is the same as a hard wall one node beyond
//! the mesh in y and as a flat continuation of the boundary column in x.

use nalgebra::DMatrix;
use nalgebra_sparse::{CooMatrix, CsrMatrix};

use crate::device::{FieldMap, Mesh2D};
use crate::error::{Error, Result};
use crate::units::hbar2_over_2m0;

/// Harmonic mean of two node masses.
pub fn half_node_mass(a: f64, b: f64) -> f64 {
    2.0 * a * b / (a + b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lead {
    Source,
    Drain,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeviceHamiltonian {
    pub mesh: Mesh2D,
    /// on-site energy including the kinetic part, eV
    pub diag: Vec<f64>,
    /// `tx[i * rows + j]` couples column i - 1 to column i; i = 0 and
    /// i = nx + 1 are the mirrored boundary values
    pub tx: Vec<f64>,
    /// `ty[i * (rows + 1) + j]` couples row j - 1 to row j in column i
    pub ty: Vec<f64>,
    pub potential: Vec<f64>,
    pub mass: Vec<f64>,
}

impl DeviceHamiltonian {
    pub fn assemble(u: &FieldMap, m: &FieldMap) -> Result<Self> {
        u.same_mesh(m)?;
        Self::from_slices(*u.mesh(), u.values(), m.values())
    }

    pub fn from_slices(mesh: Mesh2D, u: &[f64], m: &[f64]) -> Result<Self> {
        let n = mesh.len();
        if u.len() != n || m.len() != n {
            return Err(Error::MeshMismatch("potential or mass does not match the mesh".into()));
        }
        if let Some(p) = m.iter().position(|v| !(*v > 0.0)) {
            let (i, j) = mesh.ij(p);
            return Err(Error::Contract(format!("non-positive mass {} at node ({i}, {j})", m[p])));
        }
        let rows = mesh.rows();
        let cols = mesh.cols();
        let h = hbar2_over_2m0();
        let cx = h / (mesh.ax * mesh.ax);
        let cy = h / (mesh.ay * mesh.ay);
        let mut tx = vec![0.0; (cols + 1) * rows];
        for j in 0..rows {
            tx[j] = cx / m[mesh.idx(0, j)];
            tx[cols * rows + j] = cx / m[mesh.idx(mesh.nx, j)];
            for i in 1..cols {
                tx[i * rows + j] = cx / half_node_mass(m[mesh.idx(i - 1, j)], m[mesh.idx(i, j)]);
            }
        }
        let mut ty = vec![0.0; cols * (rows + 1)];
        for i in 0..cols {
            let base = i * (rows + 1);
            ty[base] = cy / m[mesh.idx(i, 0)];
            ty[base + rows] = cy / m[mesh.idx(i, mesh.ny)];
            for j in 1..rows {
                ty[base + j] = cy / half_node_mass(m[mesh.idx(i, j - 1)], m[mesh.idx(i, j)]);
            }
        }
        let mut diag = vec![0.0; n];
        for i in 0..cols {
            for j in 0..rows {
                let p = mesh.idx(i, j);
                diag[p] = tx[i * rows + j] + tx[(i + 1) * rows + j] + ty[i * (rows + 1) + j] + ty[i * (rows + 1) + j + 1] + u[p];
            }
        }
        Ok(DeviceHamiltonian { mesh, diag, tx, ty, potential: u.to_vec(), mass: m.to_vec() })
    }

    /// Hopping between column i - 1 and column i at row j.
    #[inline]
    pub fn tx(&self, i: usize, j: usize) -> f64 {
        self.tx[i * self.mesh.rows() + j]
    }

    /// Hopping between rows j - 1 and j in column i.
    #[inline]
    pub fn ty(&self, i: usize, j: usize) -> f64 {
        self.ty[i * (self.mesh.rows() + 1) + j]
    }

    /// Diagonal of the coupling block between columns i and i + 1 (as
    /// positive hoppings; the matrix elements are their negatives).
    pub fn coupling(&self, i: usize) -> &[f64] {
        let rows = self.mesh.rows();
        &self.tx[(i + 1) * rows..(i + 2) * rows]
    }

    /// Dense (rows x rows) diagonal block of column i.
    pub fn column_block(&self, i: usize) -> DMatrix<f64> {
        let rows = self.mesh.rows();
        let mut b = DMatrix::zeros(rows, rows);
        for j in 0..rows {
            b[(j, j)] = self.diag[self.mesh.idx(i, j)];
            if j > 0 {
                let t = self.ty(i, j);
                b[(j, j - 1)] = -t;
                b[(j - 1, j)] = -t;
            }
        }
        b
    }

    /// Transverse Hamiltonian of the semi-infinite lead and its scalar
    /// longitudinal hopping. The lead repeats the boundary column; when the
    /// boundary masses differ along y the hopping uses their harmonic mean.
    pub fn lead_column(&self, lead: Lead) -> (DMatrix<f64>, f64) {
        let i = match lead {
            Lead::Source => 0,
            Lead::Drain => self.mesh.nx,
        };
        let rows = self.mesh.rows();
        let inv: f64 = (0..rows).map(|j| 1.0 / self.mass[self.mesh.idx(i, j)]).sum::<f64>() / rows as f64;
        let t = hbar2_over_2m0() / (self.mesh.ax * self.mesh.ax) * inv;
        let mut b = DMatrix::zeros(rows, rows);
        for j in 0..rows {
            let p = self.mesh.idx(i, j);
            b[(j, j)] = self.potential[p] + 2.0 * t + self.ty(i, j) + self.ty(i, j + 1);
            if j > 0 {
                b[(j, j - 1)] = -self.ty(i, j);
                b[(j - 1, j)] = -self.ty(i, j);
            }
        }
        (b, t)
    }

    pub fn to_csr(&self) -> CsrMatrix<f64> {
        let m = self.mesh;
        let mut coo = CooMatrix::new(m.len(), m.len());
        for i in 0..m.cols() {
            for j in 0..m.rows() {
                let p = m.idx(i, j);
                coo.push(p, p, self.diag[p]);
                if j > 0 {
                    coo.push(p, p - 1, -self.ty(i, j));
                }
                if j < m.ny {
                    coo.push(p, p + 1, -self.ty(i, j + 1));
                }
                if i > 0 {
                    coo.push(p, m.idx(i - 1, j), -self.tx(i, j));
                }
                if i < m.nx {
                    coo.push(p, m.idx(i + 1, j), -self.tx(i + 1, j));
                }
            }
        }
        CsrMatrix::from(&coo)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let csr = self.to_csr();
        let mut d = DMatrix::zeros(csr.nrows(), csr.ncols());
        for (i, j, v) in csr.triplet_iter() {
            d[(i, j)] = *v;
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::Quantity;
    use nalgebra::SymmetricEigen;
    use proptest::prelude::*;

    fn uniform(nx: usize, ny: usize, a: f64, m: f64, u: f64) -> DeviceHamiltonian {
        let mesh = Mesh2D::new(nx, ny, a, a).unwrap();
        DeviceHamiltonian::from_slices(mesh, &vec![u; mesh.len()], &vec![m; mesh.len()]).unwrap()
    }

    #[test]
    fn harmonic_half_node() {
        assert_eq!(half_node_mass(0.3, 0.3), 0.3);
        assert!((half_node_mass(1.0, 3.0) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn box_ground_state() {
        let (nx, ny, a, m) = (9, 5, 0.4, 0.3);
        let h = uniform(nx, ny, a, m, 0.0);
        let t = hbar2_over_2m0() / (m * a * a);
        let eig = SymmetricEigen::new(h.to_dense()).eigenvalues;
        let lowest = eig.iter().copied().fold(f64::INFINITY, f64::min);
        let pi = std::f64::consts::PI;
        let want = 2.0 * t * (1.0 - (pi / (nx as f64 + 2.0)).cos()) + 2.0 * t * (1.0 - (pi / (ny as f64 + 2.0)).cos());
        assert!((lowest - want).abs() < 1e-12, "{lowest} {want}");
    }

    #[test]
    fn constant_shift() {
        let a = SymmetricEigen::new(uniform(4, 3, 0.5, 0.2, 0.0).to_dense()).eigenvalues;
        let b = SymmetricEigen::new(uniform(4, 3, 0.5, 0.2, 0.37).to_dense()).eigenvalues;
        let mut a: Vec<f64> = a.iter().copied().collect();
        let mut b: Vec<f64> = b.iter().copied().collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (x, y) in a.iter().zip(&b) {
            assert!((y - x - 0.37).abs() < 1e-12);
        }
    }

    #[test]
    fn pentadiagonal_pattern() {
        let h = uniform(4, 3, 0.5, 0.2, 0.0);
        let csr = h.to_csr();
        let rows = h.mesh.rows();
        let mut offsets = std::collections::BTreeSet::new();
        for (i, j, v) in csr.triplet_iter() {
            offsets.insert(j as i64 - i as i64);
            assert!(*v != 0.0);
            if (j as i64 - i as i64).abs() == 1 {
                // no coupling across the end of a column
                assert_eq!(i / rows, j / rows);
            }
        }
        let r = rows as i64;
        assert_eq!(offsets.into_iter().collect::<Vec<_>>(), vec![-r, -1, 0, 1, r]);
    }

    #[test]
    fn rejects_bad_mass() {
        let mesh = Mesh2D::new(2, 1, 1.0, 1.0).unwrap();
        let mut m = vec![0.2; mesh.len()];
        m[3] = 0.0;
        assert!(DeviceHamiltonian::from_slices(mesh, &vec![0.0; 6], &m).is_err());
    }

    proptest! {
        #[test]
        fn hermitian_positive_and_linear(seed in 0u64..1000) {
            let mesh = Mesh2D::new(5, 3, 0.5, 0.3).unwrap();
            let mut s = seed;
            let mut rnd = || { s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); (s >> 11) as f64 / (1u64 << 53) as f64 };
            let m: Vec<f64> = (0..mesh.len()).map(|_| 0.1 + rnd()).collect();
            let u1: Vec<f64> = (0..mesh.len()).map(|_| rnd() - 0.5).collect();
            let u2: Vec<f64> = (0..mesh.len()).map(|_| rnd() - 0.5).collect();
            let h1 = DeviceHamiltonian::from_slices(mesh, &u1, &m).unwrap();
            let sum: Vec<f64> = u1.iter().zip(&u2).map(|(a, b)| a + b).collect();
            let h12 = DeviceHamiltonian::from_slices(mesh, &sum, &m).unwrap();
            let d1 = h1.to_dense();
            prop_assert!((&d1 - d1.transpose()).abs().max() == 0.0);
            prop_assert!(h1.tx.iter().chain(&h1.ty).all(|t| *t > 0.0));
            let diff = h12.to_dense() - d1.clone();
            for p in 0..mesh.len() {
                for q in 0..mesh.len() {
                    let want = if p == q { u2[p] } else { 0.0 };
                    prop_assert!((diff[(p, q)] - want).abs() < 1e-12);
                }
            }
            let umin = u1.iter().copied().fold(f64::INFINITY, f64::min);
            let low = SymmetricEigen::new(d1).eigenvalues.min();
            prop_assert!(low >= umin - 1e-12);
        }
    }

    #[test]
    fn assemble_from_fields() {
        let mesh = Mesh2D::new(3, 2, 1.0, 1.0).unwrap();
        let u = FieldMap::constant(mesh, Quantity::EffectivePotential, 0.1);
        let m = FieldMap::constant(mesh, Quantity::EffectiveMass, 0.2);
        let h = DeviceHamiltonian::assemble(&u, &m).unwrap();
        let (col, t) = h.lead_column(Lead::Drain);
        assert!((t - h.tx(0, 0)).abs() < 1e-15);
        assert!((col[(1, 1)] - h.diag[h.mesh.idx(3, 1)]).abs() < 1e-14);
    }
}
