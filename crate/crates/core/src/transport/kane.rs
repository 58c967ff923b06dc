//! Local band-to-band generation rate from the field strength. Reporting
//! only; it never feeds back into the potential.

use crate::device::{FieldMap, KaneParams, Quantity};
use crate::error::{Error, Result};

/// |grad V| by central differences (one-sided on the boundary), V/cm.
pub fn field_strength(v: &FieldMap) -> Result<FieldMap> {
    let mesh = *v.mesh();
    let d = |k: usize, n: usize, h: f64, at: &dyn Fn(usize) -> f64| -> f64 {
        if n == 0 {
            0.0
        } else if k == 0 {
            (at(1) - at(0)) / h
        } else if k == n {
            (at(n) - at(n - 1)) / h
        } else {
            (at(k + 1) - at(k - 1)) / (2.0 * h)
        }
    };
    let values = (0..mesh.len())
        .map(|p| {
            let (i, j) = mesh.ij(p);
            let gx = d(i, mesh.nx, mesh.ax, &|k| v.at(k, j));
            let gy = d(j, mesh.ny, mesh.ay, &|k| v.at(i, k));
            // V/nm to V/cm
            gx.hypot(gy) * 1e7
        })
        .collect();
    FieldMap::new(mesh, Quantity::FieldStrength, values)
}

/// A F^gamma / sqrt(Eg) exp(-B Eg^{3/2} / F) for one node; zero at zero field.
pub fn kane_rate(field: f64, bandgap: f64, params: &KaneParams) -> f64 {
    if field <= 0.0 {
        return 0.0;
    }
    params.a * field.powf(params.gamma) / bandgap.sqrt() * (-params.b * bandgap.powf(1.5) / field).exp()
}

/// Generation rate per node, cm^-3 s^-1.
pub fn kane_generation(field: &FieldMap, bandgap: &[f64], params: &KaneParams) -> Result<FieldMap> {
    if bandgap.len() != field.mesh().len() {
        return Err(Error::MeshMismatch("bandgap does not match the field mesh".into()));
    }
    if !(params.b >= 0.0) || !params.a.is_finite() || !params.gamma.is_finite() {
        return Err(Error::config("kane parameters must be finite with b >= 0"));
    }
    let values = field.values().iter().zip(bandgap).map(|(f, g)| kane_rate(*f, *g, params)).collect();
    FieldMap::new(*field.mesh(), Quantity::Generation, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::Mesh2D;

    fn params() -> KaneParams {
        KaneParams { a: 4e14, b: 1.9e7, gamma: 2.0 }
    }

    #[test]
    fn vanishes_without_field() {
        assert_eq!(kane_rate(0.0, 1.12, &params()), 0.0);
        assert!(kane_rate(1e3, 1.12, &params()) < 1e-300);
    }

    #[test]
    fn increases_with_field() {
        let mut last = 0.0;
        for k in 1..40 {
            let g = kane_rate(1e5 * k as f64, 1.12, &params());
            assert!(g > last);
            last = g;
        }
        // the prefactor alone scales by four when the field doubles
        let p = KaneParams { b: 0.0, ..params() };
        assert!((kane_rate(2e6, 1.12, &p) / kane_rate(1e6, 1.12, &p) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_field_gives_uniform_rate() {
        let mesh = Mesh2D::new(8, 3, 0.5, 0.5).unwrap();
        // 0.1 V/nm = 1e6 V/cm along x
        let v = FieldMap::from_fn(mesh, Quantity::Potential, |x, _| -0.1 * x).unwrap();
        let f = field_strength(&v).unwrap();
        for val in f.values() {
            assert!((val - 1e6).abs() < 1e-6);
        }
        let g = kane_generation(&f, &vec![1.12; mesh.len()], &params()).unwrap();
        let g0 = g.values()[0];
        assert!(g0 > 0.0);
        assert!(g.values().iter().all(|x| (x - g0).abs() <= 1e-12 * g0));
    }
}
