use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BUILTIN: &str = include_str!("../../data/materials.toml");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialParams {
    /// eV
    pub bandgap: f64,
    /// conduction band mass, m0
    pub electron_mass: f64,
    /// valence band mass, m0
    pub hole_mass: f64,
    /// relative permittivity
    pub permittivity: f64,
    /// electron affinity, eV
    pub affinity: f64,
}

/// Partial material entry from a config file, merged over the built-in table.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialOverride {
    pub bandgap: Option<f64>,
    pub electron_mass: Option<f64>,
    pub hole_mass: Option<f64>,
    pub permittivity: Option<f64>,
    pub affinity: Option<f64>,
}

impl MaterialParams {
    pub fn validate(&self, name: &str) -> Result<()> {
        let bad = |what: &str| Err(Error::config(format!("materials.{name}: {what}")));
        if !(self.bandgap > 0.0) {
            return bad("bandgap must be positive");
        }
        if !(self.electron_mass > 0.0) {
            return bad("electron_mass must be positive");
        }
        if !(self.hole_mass > 0.0) {
            return bad("hole_mass must be positive");
        }
        if !(self.permittivity >= 1.0) {
            return bad("permittivity must be at least 1");
        }
        if !self.affinity.is_finite() {
            return bad("affinity must be finite");
        }
        Ok(())
    }

    pub fn reduced_mass(&self) -> f64 {
        self.electron_mass * self.hole_mass / (self.electron_mass + self.hole_mass)
    }
}

pub fn builtin_materials() -> BTreeMap<String, MaterialParams> {
    toml::from_str(BUILTIN).expect("shipped materials table parses")
}

impl MaterialOverride {
    pub fn apply(&self, name: &str, base: Option<&MaterialParams>) -> Result<MaterialParams> {
        let pick = |v: Option<f64>, b: Option<f64>, key: &str| {
            v.or(b).ok_or_else(|| {
                Error::config(format!("materials.{name}.{key}: required for a new material"))
            })
        };
        let m = MaterialParams {
            bandgap: pick(self.bandgap, base.map(|b| b.bandgap), "bandgap")?,
            electron_mass: pick(self.electron_mass, base.map(|b| b.electron_mass), "electron_mass")?,
            hole_mass: pick(self.hole_mass, base.map(|b| b.hole_mass), "hole_mass")?,
            permittivity: pick(self.permittivity, base.map(|b| b.permittivity), "permittivity")?,
            affinity: pick(self.affinity, base.map(|b| b.affinity), "affinity")?,
        };
        m.validate(name)?;
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_silicon() {
        let m = builtin_materials();
        let si = &m["Si"];
        assert_eq!(si.bandgap, 1.12);
        si.validate("Si").unwrap();
        assert!((si.reduced_mass() - 0.26 * 0.36 / 0.62).abs() < 1e-15);
    }

    #[test]
    fn override_merges() {
        let si = builtin_materials()["Si"].clone();
        let o = MaterialOverride { hole_mass: Some(0.5), ..Default::default() };
        let m = o.apply("Si", Some(&si)).unwrap();
        assert_eq!(m.hole_mass, 0.5);
        assert_eq!(m.bandgap, si.bandgap);
        assert!(MaterialOverride::default().apply("X", None).is_err());
    }
}
