//! Self-consistent band edges of the reference device along the channel at
//! mid thickness, with the sub-band edges at half the kz cutoff and the
//! tunnelling window.

use tfet_negf::device::{load_config, reference_config};
use tfet_negf::scf::{run_loop, DeviceModel, LoopConfig};

fn main() -> tfet_negf::Result<()> {
    let cfg = load_config(&reference_config(5.0))?;
    let model = DeviceModel::new(cfg.device.clone(), 1.0)?;
    let (vg, vd) = (1.0, 0.1);
    let r = run_loop(&model, vg, vd, &LoopConfig::from_solver(&cfg.solver), None)?;
    let bands = model.bands(&r.potential)?;
    let w = bands.window();
    let slice = bands.slice(0.5 * w.kz_max);
    println!("Vg = {vg} V, Vd = {vd} V: {} in {} iterations", r.trace.status.as_str(), r.trace.iterations());
    println!("tunnelling window [{:.3}, {:.3}] eV, kz up to {:.3} 1/nm", w.e_min, w.e_max, w.kz_max);
    let mesh = model.mesh;
    let j = mesh.ny / 2;
    println!("{:>6} {:>8} {:>8} {:>9} {:>9}", "x (nm)", "Ec", "Ev", "Ec sub", "Ev sub");
    for i in (0..mesh.cols()).step_by(2) {
        let p = mesh.idx(i, j);
        println!("{:6.1} {:8.3} {:8.3} {:9.3} {:9.3}", mesh.x(i), bands.ec[p], bands.ev[p], slice.ec_sub[p], slice.ev_sub[p]);
    }
    Ok(())
}
