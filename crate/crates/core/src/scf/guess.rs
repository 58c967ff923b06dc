//! Analytic starting potential: neutral levels per region joined by
//! depletion-shaped transitions along x, plus a gate pull near gated faces.

use super::DeviceModel;
use crate::carriers::fermi::BulkBands;
use crate::device::{FieldMap, GateSide, Quantity};
use crate::error::Result;
use crate::units::{ELEMENTARY_CHARGE, VACUUM_PERMITTIVITY};

/// Neutral potential of a node for the given Fermi level.
fn neutral(model: &DeviceModel, p: usize, mu: f64) -> f64 {
    let f = &model.fields;
    let bulk = BulkBands {
        bandgap: f.bandgap[p],
        electron_mass: f.electron_mass[p],
        hole_mass: f.hole_mass[p],
        kt: model.kt,
    };
    -f.affinity[p] - mu - bulk.neutral_offset(f.doping.values()[p])
}

/// Depletion widths (nm) on either side of an abrupt step of `drop` volts
/// between dopings `na` and `nb` (cm^-3) in a medium of relative permittivity
/// `eps`.
fn depletion_widths(drop: f64, na: f64, nb: f64, eps: f64) -> (f64, f64) {
    let (na, nb) = (na.abs().max(1e10), nb.abs().max(1e10));
    // 2 eps eps0 |drop| / q in cm^-1, doping in cm^-3 -> widths in cm
    let k = 2.0 * eps * VACUUM_PERMITTIVITY * 1e-2 * drop.abs() / ELEMENTARY_CHARGE;
    let wa = (k * nb / (na * (na + nb))).sqrt() * 1e7;
    let wb = (k * na / (nb * (na + nb))).sqrt() * 1e7;
    (wa, wb)
}

/// Smooth 0 -> 1 step centred at `xj` with parabolic flanks of widths wa
/// (left) and wb (right); value and slope are continuous.
fn junction_step(x: f64, xj: f64, wa: f64, wb: f64) -> f64 {
    let share = wa / (wa + wb);
    if x <= xj - wa {
        0.0
    } else if x <= xj {
        share * ((x - xj + wa) / wa).powi(2)
    } else if x < xj + wb {
        1.0 - (1.0 - share) * ((xj + wb - x) / wb).powi(2)
    } else {
        1.0
    }
}

/// Starting potential for bias (vg, vd).
pub fn initial_guess(model: &DeviceModel, vg: f64, vd: f64) -> Result<FieldMap> {
    let mesh = model.mesh;
    let spec = &model.spec;
    let f = &model.fields;
    let (mu1, mu2) = (0.0, -vd);
    let lx = mesh.lx();
    let mid_row = mesh.ny / 2;
    let mu_at = |x: f64| mu1 + (mu2 - mu1) * x / lx;

    // segments of constant region along the middle row
    let mut segments: Vec<(usize, usize)> = Vec::new(); // (first column, last column)
    for i in 0..mesh.cols() {
        let r = f.region[mesh.idx(i, mid_row)];
        match segments.last_mut() {
            Some((_, last)) if f.region[mesh.idx(*last, mid_row)] == r => *last = i,
            _ => segments.push((i, i)),
        }
    }
    let level = |k: usize| {
        let (a, b) = segments[k];
        let c = (a + b) / 2;
        neutral(model, mesh.idx(c, mid_row), mu_at(mesh.x(c)))
    };
    let base = level(0);
    let mut line = vec![base; mesh.cols()];
    for k in 1..segments.len() {
        let (a0, a1) = segments[k - 1];
        let (b0, b1) = segments[k];
        let drop = level(k) - level(k - 1);
        let edge = spec.regions[f.region[mesh.idx(a1, mid_row)]].x[1];
        let xj = if edge >= mesh.x(a1) && edge <= mesh.x(b0) { edge } else { 0.5 * (mesh.x(a1) + mesh.x(b0)) };
        let pa = mesh.idx(a1, mid_row);
        let pb = mesh.idx(b0, mid_row);
        let eps = 0.5 * (f.eps.values()[pa] + f.eps.values()[pb]);
        let (wa, wb) = depletion_widths(drop, f.doping.values()[pa], f.doping.values()[pb], eps);
        // keep each transition inside half of its neighbouring regions
        let room_a = 0.5 * (xj - mesh.x(a0));
        let room_b = 0.5 * (mesh.x(b1) - xj);
        let scale = (room_a / wa).min(room_b / wb).min(1.0);
        let (wa, wb) = ((wa * scale).max(1e-3 * mesh.ax), (wb * scale).max(1e-3 * mesh.ax));
        for (i, v) in line.iter_mut().enumerate() {
            *v += drop * junction_step(mesh.x(i), xj, wa, wb);
        }
    }

    let mut v = vec![0.0; mesh.len()];
    for i in 0..mesh.cols() {
        for j in 0..mesh.rows() {
            v[mesh.idx(i, j)] = line[i];
        }
    }

    // gate pull: oxide over body capacitance sets the strength, decaying
    // from the gated face as cosh over half the body thickness
    let ly = mesh.ly();
    let decay = 0.5 * ly.max(mesh.ay);
    for gate in &spec.gates {
        let target = vg - gate.work_function;
        for i in 1..mesh.nx {
            let x = mesh.x(i);
            let inside = (x - gate.x[0]).min(gate.x[1] - x);
            let edge = (0.5 + inside / decay).clamp(0.0, 1.0);
            if edge <= 0.0 {
                continue;
            }
            for j in 0..mesh.rows() {
                let p = mesh.idx(i, j);
                let depth = match gate.side {
                    GateSide::Top => ly - mesh.y(j),
                    GateSide::Bottom => mesh.y(j),
                };
                let cox = gate.oxide_permittivity / gate.oxide_thickness;
                let cbody = f.eps.values()[p] / decay;
                let strength = cox / (cox + cbody);
                let shape = ((ly - depth) / decay).cosh() / (ly / decay).cosh();
                v[p] += edge * strength * shape * (target - line[i]);
            }
        }
    }

    // strong inversion or accumulation pins the bands near the Fermi level
    for (p, val) in v.iter_mut().enumerate() {
        let (i, _) = mesh.ij(p);
        let mu = mu_at(mesh.x(i));
        let hi = -f.affinity[p] - mu + 0.1;
        let lo = -f.affinity[p] - f.bandgap[p] - mu - 0.1;
        let lo = lo.min(line[i]);
        let hi = hi.max(line[i]);
        *val = val.clamp(lo, hi);
    }
    FieldMap::new(mesh, Quantity::Potential, v)
}
