//! Self-consistent potential of the reference double-gate device at a few
//! gate voltages, using the closed-boundary carrier backend.

use std::time::Instant;

use tfet_negf::device::{load_config, reference_config};
use tfet_negf::scf::{run_loop, DeviceModel, LoopConfig};

fn main() -> tfet_negf::Result<()> {
    let cfg = load_config(&reference_config(10.0))?;
    let model = DeviceModel::new(cfg.device.clone(), 1.0)?;
    let loop_cfg = LoopConfig::from_solver(&cfg.solver);
    println!("mesh {} x {} nodes", model.mesh.cols(), model.mesh.rows());
    let mut warm = None;
    for vg in [0.0, 0.5, 1.0] {
        let clock = Instant::now();
        let r = run_loop(&model, vg, 0.1, &loop_cfg, warm.as_ref())?;
        println!(
            "Vg = {vg:.1} V: {} after {} iterations, max |dV| = {:.2e} V, {:.1} s",
            r.trace.status.as_str(),
            r.trace.iterations(),
            r.trace.final_dv(),
            clock.elapsed().as_secs_f64()
        );
        let mid = model.mesh.ny / 2;
        let centre = model.mesh.nx / 2;
        println!("  channel centre Ec = {:.3} eV, n = {:.2e} cm^-3", r.ec.at(centre, mid), r.n.at(centre, mid));
        warm = Some(r.potential);
    }
    Ok(())
}
