use nalgebra::{DMatrix, SymmetricEigen};

use super::{CMat, C64};
use crate::error::{Error, Result};
use crate::hamiltonian::Lead;

/// Surface self-energy of a semi-infinite lead built by repeating one column.
#[derive(Clone, Debug)]
pub struct LeadSelfEnergy {
    pub lead: Lead,
    /// t^2 Q g' Q^T
    pub sigma: CMat,
    /// eigenvectors of the transverse column Hamiltonian, ascending energy
    pub modes: DMatrix<f64>,
    /// matching eigenvalues, eV
    pub transverse: Vec<f64>,
    /// eigenvalues of (E + i eta) - H_column
    pub x: Vec<C64>,
    /// per-mode surface Green's function values
    pub g: Vec<C64>,
    /// longitudinal lead hopping, eV
    pub hopping: f64,
    /// Frobenius norm of -t^2 g^2 + X g - 1
    pub residual: f64,
}

/// Root of -t^2 g^2 + x g - 1 = 0 that decays into the lead; for a
/// propagating mode without broadening both roots have |g| = 1/t and the
/// one with Im g <= 0 is taken.
pub fn surface_root(x: C64, t: f64) -> C64 {
    let t2 = t * t;
    let disc = (x * x - C64::new(4.0 * t2, 0.0)).sqrt();
    let a = (x + disc) / (2.0 * t2);
    let b = (x - disc) / (2.0 * t2);
    let (na, nb) = (a.norm(), b.norm());
    let tie = 1e-12 * na.max(nb);
    if (na - nb).abs() <= tie {
        if a.im <= b.im {
            a
        } else {
            b
        }
    } else if na < nb {
        a
    } else {
        b
    }
}

pub fn lead_self_energy(column: &DMatrix<f64>, t: f64, energy: f64, eta: f64, lead: Lead) -> Result<LeadSelfEnergy> {
    let m = column.nrows();
    if column.ncols() != m {
        return Err(Error::Contract("lead column must be square".into()));
    }
    let scale = column.abs().max().max(1.0);
    if (column - column.transpose()).abs().max() > 1e-12 * scale {
        return Err(Error::numerical("lead column Hamiltonian is not Hermitian"));
    }
    if !(t > 0.0) {
        return Err(Error::Contract("lead hopping must be positive".into()));
    }
    let eig = SymmetricEigen::new(column.clone());
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let modes = DMatrix::from_fn(m, m, |r, c| eig.eigenvectors[(r, order[c])]);
    let transverse: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let z = C64::new(energy, eta);
    let x: Vec<C64> = transverse.iter().map(|l| z - l).collect();
    let g: Vec<C64> = x.iter().map(|&x| surface_root(x, t)).collect();

    let q = modes.map(|v| C64::new(v, 0.0));
    let qt = q.transpose();
    let gd = CMat::from_diagonal(&nalgebra::DVector::from_vec(g.clone()));
    let gfull = &q * &gd * &qt;
    let sigma = gfull.scale(t * t);

    let xm = CMat::from_fn(m, m, |r, c| {
        let h = C64::new(-column[(r, c)], 0.0);
        if r == c {
            h + z
        } else {
            h
        }
    });
    let res = -(&gfull * &gfull).scale(t * t) + &xm * &gfull - CMat::identity(m, m);
    let residual = res.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();

    Ok(LeadSelfEnergy { lead, sigma, modes, transverse, x, g, hopping: t, residual })
}

impl LeadSelfEnergy {
    /// i (Sigma - Sigma^dagger)
    pub fn broadening(&self) -> CMat {
        let s = &self.sigma;
        (s - s.adjoint()) * C64::new(0.0, 1.0)
    }

    /// Per-mode broadening -2 t^2 Im g', non-negative.
    pub fn mode_broadening(&self) -> Vec<f64> {
        self.g.iter().map(|g| (-2.0 * self.hopping * self.hopping * g.im).max(0.0)).collect()
    }

    /// Y with Gamma = Y Y^dagger, columns in ascending transverse energy.
    pub fn factor(&self) -> CMat {
        let xi = self.mode_broadening();
        let m = self.modes.nrows();
        CMat::from_fn(m, m, |r, c| C64::new(self.modes[(r, c)] * xi[c].sqrt(), 0.0))
    }

    /// Number of modes that propagate at this energy.
    pub fn propagating(&self) -> usize {
        let t = self.hopping;
        self.x.iter().filter(|x| x.re.abs() < 2.0 * t).count()
    }
}
