//! Transmission through a rectangular barrier in a one-row strip, compared
//! with the continuum formula for the same barrier. The two agree while the
//! electron wavelength spans many mesh nodes.

use tfet_negf::device::Mesh2D;
use tfet_negf::hamiltonian::DeviceHamiltonian;
use tfet_negf::negf::{solve_slice, Want};
use tfet_negf::units::{hbar2_over_2m0, k_squared};

/// Textbook transmission of a rectangular barrier for a free particle.
fn continuum(energy: f64, height: f64, width: f64, mass: f64) -> f64 {
    let q2 = k_squared(mass, energy - height);
    let s = if q2 < 0.0 { ((-q2).sqrt() * width).sinh().powi(2) } else { (q2.sqrt() * width).sin().powi(2) };
    1.0 / (1.0 + height * height * s / (4.0 * energy * (energy - height).abs()))
}

fn main() -> tfet_negf::Result<()> {
    let mass = 0.2;
    let height = 0.3;
    let a = 0.1;
    let mesh = Mesh2D::new(200, 0, a, 0.5)?;
    let (first, last) = (50, 150);
    let u: Vec<f64> = (0..mesh.len()).map(|p| if p > first && p <= last { height } else { 0.0 }).collect();
    let h = DeviceHamiltonian::from_slices(mesh, &u, &vec![mass; mesh.len()])?;
    let transverse = 2.0 * hbar2_over_2m0() / (mass * mesh.ay * mesh.ay);
    let width = (last - first) as f64 * a;
    println!("barrier {height} eV high, {width} nm wide, mesh {a} nm");
    println!("{:>8} {:>12} {:>12}", "E (eV)", "T lattice", "T continuum");
    for k in 1..=12 {
        let e = 0.05 * k as f64;
        let t = solve_slice(&h, e + transverse, 0.0, 1e-9, Want::TRANSMISSION)?.transmission;
        println!("{e:8.3} {t:12.4e} {:12.4e}", continuum(e, height, width, mass));
    }
    Ok(())
}
