//! Surface self-energy of a semi-infinite 2 nm strip lead: transverse modes,
//! how many propagate, the broadening they carry and the residual of the
//! surface equation.

use tfet_negf::device::Mesh2D;
use tfet_negf::hamiltonian::{DeviceHamiltonian, Lead};
use tfet_negf::negf::{lead_self_energy, DEFAULT_ETA};

fn main() -> tfet_negf::Result<()> {
    let mesh = Mesh2D::new(4, 4, 0.5, 0.5)?;
    let h = DeviceHamiltonian::from_slices(mesh, &vec![0.0; mesh.len()], &vec![0.26; mesh.len()])?;
    let (column, t) = h.lead_column(Lead::Source);
    let first = lead_self_energy(&column, t, 0.0, DEFAULT_ETA, Lead::Source)?;
    println!("lead hopping {t:.4} eV");
    println!("transverse energies (eV): {:?}", first.transverse.iter().map(|e| format!("{e:.4}")).collect::<Vec<_>>());
    println!("{:>8} {:>5} {:>12} {:>10}", "E (eV)", "open", "tr Gamma", "residual");
    for k in 0..10 {
        let e = 0.1 + 0.25 * k as f64;
        let s = lead_self_energy(&column, t, e, DEFAULT_ETA, Lead::Source)?;
        let gamma: f64 = s.mode_broadening().iter().sum();
        println!("{e:8.3} {:>5} {gamma:12.4e} {:10.2e}", s.propagating(), s.residual);
    }
    Ok(())
}
