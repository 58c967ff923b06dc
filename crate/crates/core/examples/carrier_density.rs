//! Electron and hole densities across a graded junction from the lead-resolved
//! LDOS, with the slow double-integral evaluation alongside at a few nodes.
//! The fast path treats each band on its own, so inside the junction, where
//! the gap states of both bands overlap, the two part ways; in the flat
//! regions they agree.

use tfet_negf::bands::BandProfile;
use tfet_negf::carriers::{full_density_oracle, negf_densities, DensityOptions, FermiLevels, OracleOptions};
use tfet_negf::device::{FieldMap, Mesh2D, Quantity};
use tfet_negf::units::thermal_energy;

fn main() -> tfet_negf::Result<()> {
    let kt = thermal_energy(300.0);
    let mesh = Mesh2D::new(14, 5, 0.5, 0.5)?;
    // p-type on the left, n-type on the right
    let ec = FieldMap::from_fn(mesh, Quantity::ConductionBand, |x, _| 0.55 - 0.6 * ((x - 3.5) / 1.2).tanh())?;
    let ev = ec.map(Quantity::ValenceBand, |e| e - 1.12)?;
    let bands = BandProfile::with_masses(&ec, &ev, 0.26, 0.36)?;
    let levels = FermiLevels::from_bias(0.05);
    let fast = negf_densities(&bands, levels, kt, &DensityOptions::default())?;
    let slow = full_density_oracle(&bands, levels, kt, &OracleOptions::default())?;
    let j = mesh.ny / 2;
    println!("{:>6} {:>8} {:>11} {:>11} {:>11} {:>11}", "x (nm)", "Ec (eV)", "n", "n slow", "p", "p slow");
    for i in (0..mesh.cols()).step_by(2) {
        println!(
            "{:6.2} {:8.3} {:11.3e} {:11.3e} {:11.3e} {:11.3e}",
            mesh.x(i),
            ec.at(i, j),
            fast.n.at(i, j),
            slow.n.at(i, j),
            fast.p.at(i, j),
            slow.p.at(i, j)
        );
    }
    println!("densities in cm^-3, {} energies on the fast path", fast.energies);
    Ok(())
}
