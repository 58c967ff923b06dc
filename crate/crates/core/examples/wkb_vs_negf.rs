//! Straight-x WKB against the full NEGF transmission for three barriers: a
//! linear junction in a wide strip, the same junction in a 3 nm strip, and a
//! junction tilted across the strip.

use tfet_negf::bands::BandProfile;
use tfet_negf::device::{FieldMap, Mesh2D, Quantity};
use tfet_negf::hamiltonian::DeviceHamiltonian;
use tfet_negf::negf::{solve_slice, Want, DEFAULT_ETA};
use tfet_negf::transport::slice_wkb;

const GAP: f64 = 1.12;

/// p+ to n+ junction whose ramp starts at `start(y)` and spans `ramp` nm.
fn junction(mesh: Mesh2D, overlap: f64, ramp: f64, start: impl Fn(f64) -> f64) -> BandProfile {
    let drop = GAP + overlap;
    let ec = FieldMap::from_fn(mesh, Quantity::ConductionBand, |x, y| {
        let s = ((x - start(y)) / ramp).clamp(0.0, 1.0);
        GAP - overlap / 2.0 - drop * s
    })
    .unwrap();
    let ev = ec.map(Quantity::ValenceBand, |e| e - GAP).unwrap();
    BandProfile::with_masses(&ec, &ev, 0.26, 0.36).unwrap()
}

fn compare(name: &str, bands: &BandProfile) {
    let slice = bands.slice(0.0);
    let w = slice.window();
    println!("{name}: window [{:.3}, {:.3}] eV", w.e_min, w.e_max);
    println!("  {:>8} {:>12} {:>12} {:>8}", "E", "T_negf", "T_wkb", "dlog10");
    for k in 0..12 {
        let e = w.e_min + w.width() * (k as f64 + 0.5) / 12.0;
        let fields = slice.effective_fields(e);
        let h = DeviceHamiltonian::from_slices(bands.mesh, &fields.potential, &fields.mass).unwrap();
        let t = solve_slice(&h, e, 0.0, DEFAULT_ETA, Want::TRANSMISSION).unwrap().transmission;
        let wkb = slice_wkb(&slice, e).combined;
        println!("  {e:8.3} {t:12.4e} {wkb:12.4e} {:8.3}", wkb.log10() - t.log10());
    }
}

fn main() {
    let overlap = 0.3;
    let wide = Mesh2D::new(100, 3, 0.4, 10.0).unwrap();
    compare("linear junction, 30 nm strip", &junction(wide, overlap, 8.0, |_| 16.0));
    let thin = Mesh2D::new(100, 6, 0.4, 0.5).unwrap();
    compare("linear junction, 3 nm strip", &junction(thin, overlap, 8.0, |_| 16.0));
    let tilted = Mesh2D::new(100, 20, 0.4, 0.5).unwrap();
    compare("tilted junction, 10 nm strip", &junction(tilted, overlap, 8.0, |y| 8.0 + 1.5 * y));
}
