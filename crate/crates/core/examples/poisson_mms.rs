//! Convergence of the Poisson solver on a manufactured solution: the maximum
//! error falls fourfold per mesh halving.

use std::f64::consts::PI;

use tfet_negf::device::{FieldMap, Mesh2D, Quantity};
use tfet_negf::poisson::{PoissonBC, PoissonSystem};

fn main() -> tfet_negf::Result<()> {
    let l = 10.0;
    let k = PI / l;
    let eps_r = 11.9;
    let exact = |x: f64, y: f64| (k * x).sin() * (2.0 * k * y).sin() + 0.05 * x * y;
    let mut previous: Option<f64> = None;
    for n in [8, 16, 32, 64, 128] {
        let mesh = Mesh2D::new(n, n, l / n as f64, l / n as f64)?;
        // -div(eps grad v) for the exact solution
        let source: Vec<f64> = (0..mesh.len())
            .map(|p| {
                let (i, j) = mesh.ij(p);
                5.0 * k * k * eps_r * (k * mesh.x(i)).sin() * (2.0 * k * mesh.y(j)).sin()
            })
            .collect();
        let eps = FieldMap::constant(mesh, Quantity::Permittivity, eps_r);
        let v = PoissonSystem::new(&eps, PoissonBC::dirichlet(mesh, exact), 1e-12)?.solve_source(&source, None)?;
        let err = (0..mesh.len())
            .map(|p| {
                let (i, j) = mesh.ij(p);
                (v[p] - exact(mesh.x(i), mesh.y(j))).abs()
            })
            .fold(0.0, f64::max);
        match previous {
            Some(e) => println!("{n:>4} x {n:<4} max error {err:.3e}  ratio {:.2}", e / err),
            None => println!("{n:>4} x {n:<4} max error {err:.3e}"),
        }
        previous = Some(err);
    }
    Ok(())
}
