//! Block-recursive evaluation of the columns of G needed downstream.

use std::f64::consts::PI;

use super::{inverse, lead_self_energy, CMat, LeadSelfEnergy, C64};
use crate::error::Result;
use crate::hamiltonian::{DeviceHamiltonian, Lead};

/// Device Hamiltonian with both lead self-energies at one energy.
pub struct OpenSystem<'a> {
    pub h: &'a DeviceHamiltonian,
    pub source: LeadSelfEnergy,
    pub drain: LeadSelfEnergy,
    pub z: C64,
}

impl<'a> OpenSystem<'a> {
    pub fn new(h: &'a DeviceHamiltonian, energy: f64, eta: f64) -> Result<Self> {
        let (c1, t1) = h.lead_column(Lead::Source);
        let (c2, t2) = h.lead_column(Lead::Drain);
        Ok(OpenSystem {
            h,
            source: lead_self_energy(&c1, t1, energy, eta, Lead::Source)?,
            drain: lead_self_energy(&c2, t2, energy, eta, Lead::Drain)?,
            z: C64::new(energy, eta),
        })
    }

    pub fn columns(&self) -> usize {
        self.h.mesh.cols()
    }

    /// Diagonal block i of A = zI - H - Sigma_source - Sigma_drain.
    pub fn block(&self, i: usize) -> CMat {
        let b = self.h.column_block(i);
        let m = b.nrows();
        let mut a = CMat::from_fn(m, m, |r, c| C64::new(-b[(r, c)], 0.0));
        for k in 0..m {
            a[(k, k)] += self.z;
        }
        if i == 0 {
            a -= &self.source.sigma;
        }
        if i == self.h.mesh.nx {
            a -= &self.drain.sigma;
        }
        a
    }

    /// Coupling A[i, i+1] = A[i+1, i] as its (real, positive) diagonal.
    pub fn coupling(&self, i: usize) -> &[f64] {
        self.h.coupling(i)
    }
}

/// diag(d) * m
pub(crate) fn scale_rows(d: &[f64], m: &CMat) -> CMat {
    let mut out = m.clone();
    for (r, s) in d.iter().enumerate() {
        out.row_mut(r).scale_mut(*s);
    }
    out
}

/// m * diag(d)
pub(crate) fn scale_cols(m: &CMat, d: &[f64]) -> CMat {
    let mut out = m.clone();
    for (c, s) in d.iter().enumerate() {
        out.column_mut(c).scale_mut(*s);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Want {
    /// G[:, 0] and G[:, N] for lead-resolved LDOS
    pub ldos: bool,
    /// diagonal blocks G[i, i]
    pub diagonal: bool,
}

impl Want {
    pub const TRANSMISSION: Want = Want { ldos: false, diagonal: false };
    pub const LDOS: Want = Want { ldos: true, diagonal: false };
    pub const ALL: Want = Want { ldos: true, diagonal: true };
}

/// Blocks of the retarded Green's function.
#[derive(Clone, Debug)]
pub struct RecursiveGreens {
    /// G[i, 0] for every column i (empty unless requested)
    pub first: Vec<CMat>,
    /// G[i, N] for every column i
    pub last: Vec<CMat>,
    /// G[i, i] (empty unless requested)
    pub diagonal: Vec<CMat>,
}

pub fn recursive_greens(sys: &OpenSystem, want: Want) -> Result<RecursiveGreens> {
    let n = sys.columns();
    // left-connected
    let mut gl: Vec<CMat> = Vec::with_capacity(n);
    gl.push(inverse(sys.block(0))?);
    for i in 1..n {
        let d = sys.coupling(i - 1);
        let s = scale_cols(&scale_rows(d, &gl[i - 1]), d);
        gl.push(inverse(sys.block(i) - s)?);
    }
    let mut last = vec![CMat::zeros(0, 0); n];
    last[n - 1] = gl[n - 1].clone();
    for i in (0..n - 1).rev() {
        last[i] = -(&gl[i] * scale_rows(sys.coupling(i), &last[i + 1]));
    }
    let mut first = Vec::new();
    if want.ldos {
        let mut gr: Vec<CMat> = vec![CMat::zeros(0, 0); n];
        gr[n - 1] = inverse(sys.block(n - 1))?;
        for i in (0..n - 1).rev() {
            let d = sys.coupling(i);
            let s = scale_cols(&scale_rows(d, &gr[i + 1]), d);
            gr[i] = inverse(sys.block(i) - s)?;
        }
        first = vec![CMat::zeros(0, 0); n];
        first[0] = gr[0].clone();
        for i in 1..n {
            first[i] = -(&gr[i] * scale_rows(sys.coupling(i - 1), &first[i - 1]));
        }
    }
    let mut diagonal = Vec::new();
    if want.diagonal {
        diagonal = vec![CMat::zeros(0, 0); n];
        diagonal[n - 1] = gl[n - 1].clone();
        for i in (0..n - 1).rev() {
            let d = sys.coupling(i);
            let inner = scale_cols(&scale_rows(d, &diagonal[i + 1]), d);
            diagonal[i] = &gl[i] + &gl[i] * inner * &gl[i];
        }
    }
    Ok(RecursiveGreens { first, last, diagonal })
}

/// diag(G Gamma G^dagger) for one block column entry.
pub(crate) fn sandwich_diag(g: &CMat, gamma: &CMat) -> Vec<f64> {
    let gg = g * gamma;
    (0..g.nrows())
        .map(|r| (0..g.ncols()).map(|c| (gg[(r, c)] * g[(r, c)].conj()).re).sum())
        .collect()
}

pub(crate) fn caroli(g_0n: &CMat, gamma1: &CMat, gamma2: &CMat) -> f64 {
    (gamma1 * g_0n * gamma2 * g_0n.adjoint()).trace().re
}

impl RecursiveGreens {
    /// trace[Gamma_source G[0,N] Gamma_drain G[0,N]^dagger]
    pub fn transmission(&self, sys: &OpenSystem) -> f64 {
        caroli(&self.last[0], &sys.source.broadening(), &sys.drain.broadening())
    }

    /// trace[Gamma_drain G[N,0] Gamma_source G[N,0]^dagger]; needs `Want::ldos`.
    pub fn transmission_reverse(&self, sys: &OpenSystem) -> f64 {
        caroli(&self.first[self.first.len() - 1], &sys.drain.broadening(), &sys.source.broadening())
    }

    /// Lead-resolved LDOS (D1, D2) in 1/(eV nm^2), node order of the mesh.
    pub fn ldos(&self, sys: &OpenSystem) -> (Vec<f64>, Vec<f64>) {
        let mesh = sys.h.mesh;
        let norm = 1.0 / (PI * mesh.ax * mesh.ay);
        let g1 = sys.source.broadening();
        let g2 = sys.drain.broadening();
        let mut d1 = Vec::with_capacity(mesh.len());
        let mut d2 = Vec::with_capacity(mesh.len());
        for i in 0..mesh.cols() {
            d1.extend(sandwich_diag(&self.first[i], &g1).into_iter().map(|v| v * norm));
            d2.extend(sandwich_diag(&self.last[i], &g2).into_iter().map(|v| v * norm));
        }
        (d1, d2)
    }

    /// Diagonal of i(G - G^dagger); needs `Want::diagonal`.
    pub fn spectral_diag(&self) -> Vec<f64> {
        self.diagonal
            .iter()
            .flat_map(|b| (0..b.nrows()).map(move |k| -2.0 * b[(k, k)].im))
            .collect()
    }
}
