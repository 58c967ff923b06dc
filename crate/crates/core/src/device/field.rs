use serde::Serialize;

use super::mesh::Mesh2D;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Quantity {
    Potential,
    ConductionBand,
    ValenceBand,
    ElectronDensity,
    HoleDensity,
    NetDoping,
    Charge,
    Permittivity,
    EffectivePotential,
    EffectiveMass,
    Generation,
    FieldStrength,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::Potential => "V",
            Quantity::ConductionBand => "Ec",
            Quantity::ValenceBand => "Ev",
            Quantity::ElectronDensity => "n",
            Quantity::HoleDensity => "p",
            Quantity::NetDoping => "doping",
            Quantity::Charge => "rho",
            Quantity::Permittivity => "eps_r",
            Quantity::EffectivePotential => "U",
            Quantity::EffectiveMass => "m_star",
            Quantity::Generation => "G",
            Quantity::FieldStrength => "F",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Quantity::Potential => "V",
            Quantity::ConductionBand | Quantity::ValenceBand | Quantity::EffectivePotential => "eV",
            Quantity::ElectronDensity | Quantity::HoleDensity | Quantity::NetDoping => "cm^-3",
            Quantity::Charge => "C/cm^3",
            Quantity::Permittivity => "1",
            Quantity::EffectiveMass => "m0",
            Quantity::Generation => "cm^-3 s^-1",
            Quantity::FieldStrength => "V/cm",
        }
    }
}

/// One finite real value per mesh node.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldMap {
    mesh: Mesh2D,
    quantity: Quantity,
    values: Vec<f64>,
}

impl FieldMap {
    pub fn new(mesh: Mesh2D, quantity: Quantity, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.len() {
            return Err(Error::MeshMismatch(format!(
                "{} has {} values for {} nodes",
                quantity.name(),
                values.len(),
                mesh.len()
            )));
        }
        if let Some(p) = values.iter().position(|v| !v.is_finite()) {
            let (i, j) = mesh.ij(p);
            return Err(Error::numerical(format!("{} is not finite at node ({i}, {j})", quantity.name())));
        }
        Ok(FieldMap { mesh, quantity, values })
    }

    pub fn constant(mesh: Mesh2D, quantity: Quantity, value: f64) -> Self {
        FieldMap { mesh, quantity, values: vec![value; mesh.len()] }
    }

    pub fn from_fn(mesh: Mesh2D, quantity: Quantity, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut v = Vec::with_capacity(mesh.len());
        for i in 0..mesh.cols() {
            for j in 0..mesh.rows() {
                v.push(f(mesh.x(i), mesh.y(j)));
            }
        }
        Self::new(mesh, quantity, v)
    }

    pub fn mesh(&self) -> &Mesh2D {
        &self.mesh
    }
    pub fn quantity(&self) -> Quantity {
        self.quantity
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.mesh.idx(i, j)]
    }

    pub fn same_mesh(&self, other: &FieldMap) -> Result<()> {
        if self.mesh != other.mesh {
            return Err(Error::MeshMismatch(format!(
                "{} and {} live on different meshes",
                self.quantity.name(),
                other.quantity.name()
            )));
        }
        Ok(())
    }

    pub fn map(&self, quantity: Quantity, f: impl Fn(f64) -> f64) -> Result<FieldMap> {
        Self::new(self.mesh, quantity, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Values along x at row j.
    pub fn row(&self, j: usize) -> Vec<f64> {
        (0..self.mesh.cols()).map(|i| self.at(i, j)).collect()
    }
}
