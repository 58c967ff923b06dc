//! Batch run of a coarse transfer characteristic through the same driver the
//! command line uses, then the subthreshold swing between sweep points.
//! Files land in the system temporary directory.

use tfet_negf::device::{load_config, reference_config};
use tfet_negf::io::{run, RunOptions};
use tfet_negf::transport::subthreshold_swing;

fn main() -> tfet_negf::Result<()> {
    let text = reference_config(10.0) + "\n[solver]\nmesh_spacing = 2.0\n\n[sweep]\nvg = { start = 0.4, stop = 1.2, step = 0.2 }\nvd = [0.1]\n";
    let config = load_config(&text)?;
    let out = std::env::temp_dir().join("tfet_iv_sweep");
    let outcome = run(&config, &RunOptions { out: out.clone(), ..RunOptions::default() })?;
    println!("{:>6} {:>12} {:>10}", "Vg (V)", "I/Lz (A/nm)", "status");
    let mut vg = Vec::new();
    let mut current = Vec::new();
    for b in &outcome.manifest.bias_points {
        println!("{:6.2} {:12.4e} {:>10}", b.vg, b.current_a_per_nm, b.status);
        vg.push(b.vg);
        current.push(b.current_a_per_nm);
    }
    for (mid, swing) in subthreshold_swing(&vg, &current) {
        println!("swing around {mid:.2} V: {swing:.0} mV/dec");
    }
    println!("files written to {}", out.display());
    Ok(())
}
