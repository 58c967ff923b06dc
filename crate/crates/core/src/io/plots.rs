//! Plot-ready data files. Each kind is plain columnar CSV with units in the
//! column names.

use std::path::Path;
use std::str::FromStr;

use super::run::BiasOutcome;
use super::table::Table;
use crate::error::{Error, Result};
use crate::hamiltonian::DeviceHamiltonian;
use crate::negf::{solve_slice, Want};
use crate::scf::DeviceModel;
use crate::transport::{slice_wkb, wkb_current, Confinement, CurrentOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    /// current against gate voltage with a log10 column
    Iv,
    /// T(E) for every kz of the current integral
    Transmission,
    /// band edges and kz sub-bands along x at mid thickness
    Bands,
    /// effective potential over the whole mesh at one energy
    Barrier,
    /// WKB against NEGF transmission at kz = 0
    Wkb,
}

pub const PLOT_KINDS: [&str; 5] = ["iv", "transmission", "bands", "barrier", "wkb"];

impl FromStr for PlotKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iv" => Ok(PlotKind::Iv),
            "transmission" => Ok(PlotKind::Transmission),
            "bands" => Ok(PlotKind::Bands),
            "barrier" => Ok(PlotKind::Barrier),
            "wkb" => Ok(PlotKind::Wkb),
            _ => Err(Error::config(format!("unknown plot kind '{s}'; known kinds: {}", PLOT_KINDS.join(", ")))),
        }
    }
}

pub fn bias_tag(vg: f64, vd: f64) -> String {
    format!("vg{vg:.3}_vd{vd:.3}")
}

/// Largest number of energies in the WKB comparison file.
const WKB_ENERGIES: usize = 60;

/// Write the files of one plot kind into `dir`; returns their names.
pub fn emit_plot(kind: PlotKind, model: &DeviceModel, outcomes: &[BiasOutcome], opts: &CurrentOptions, hash: &str, dir: &Path) -> Result<Vec<String>> {
    let mut files = Vec::new();
    let mut save = |name: String, table: Table| -> Result<()> {
        table.with_meta("config_hash", hash).write(&dir.join(&name))?;
        files.push(name);
        Ok(())
    };
    match kind {
        PlotKind::Iv => {
            let mut t = Table::new(&["vg_V", "vd_V", "current_A_per_nm", "log10_current", "status"]).with_meta("kind", "iv");
            for o in outcomes {
                let log = if o.current.current > 0.0 { o.current.current.log10() } else { f64::NEG_INFINITY };
                let mut row: Vec<String> = [o.vg, o.vd, o.current.current, log].iter().map(|v| super::table::fmt_f64(*v)).collect();
                row.push(o.status.clone());
                t.push(row);
            }
            save("plot_iv.csv".into(), t)?;
        }
        PlotKind::Transmission => {
            for o in outcomes {
                let c = &o.current;
                let mut cols = vec!["energy_eV".to_string()];
                cols.extend(c.partials.iter().enumerate().map(|(k, _)| format!("T_kz{k}")));
                let mut t = Table { columns: cols, ..Table::default() }
                    .with_meta("kind", "transmission")
                    .with_meta("kz_per_nm", c.partials.iter().map(|p| super::table::fmt_f64(p.kz)).collect::<Vec<_>>().join(" "));
                for (e, energy) in c.energies.iter().enumerate() {
                    let mut row = vec![*energy];
                    row.extend(c.transmission.iter().map(|r| r[e]));
                    t.push_numbers(&row);
                }
                save(format!("transmission_{}.csv", bias_tag(o.vg, o.vd)), t)?;
            }
        }
        PlotKind::Bands => {
            for o in outcomes {
                let bands = model.bands(&o.scf.potential)?;
                let kz = 0.5 * o.current.window.kz_max;
                let slice = bands.slice(kz);
                let mesh = model.mesh;
                let j = mesh.ny / 2;
                let mut t = Table::new(&["x_nm", "Ec_eV", "Ev_eV", "Ec_sub_eV", "Ev_sub_eV"])
                    .with_meta("kind", "bands")
                    .with_meta("y_nm", mesh.y(j))
                    .with_meta("kz_per_nm", kz);
                for i in 0..mesh.cols() {
                    let p = mesh.idx(i, j);
                    t.push_numbers(&[mesh.x(i), bands.ec[p], bands.ev[p], slice.ec_sub[p], slice.ev_sub[p]]);
                }
                save(format!("bands_{}.csv", bias_tag(o.vg, o.vd)), t)?;
            }
        }
        PlotKind::Barrier => {
            for o in outcomes {
                let bands = model.bands(&o.scf.potential)?;
                let w = bands.window();
                let energy = if w.is_empty() { 0.5 * (w.e_min + w.e_max) } else { w.e_min + 0.5 * w.width() };
                let fields = bands.slice(0.0).effective_fields(energy);
                let mesh = model.mesh;
                let mut t = Table::new(&["x_nm", "y_nm", "U_eV", "m_star_m0"])
                    .with_meta("kind", "barrier")
                    .with_meta("energy_eV", energy)
                    .with_meta("kz_per_nm", 0.0);
                for p in 0..mesh.len() {
                    let (i, j) = mesh.ij(p);
                    t.push_numbers(&[mesh.x(i), mesh.y(j), fields.potential[p], fields.mass[p]]);
                }
                save(format!("barrier_{}.csv", bias_tag(o.vg, o.vd)), t)?;
            }
        }
        PlotKind::Wkb => {
            for o in outcomes {
                let bands = model.bands(&o.scf.potential)?;
                let levels = o.scf.levels();
                let free = wkb_current(&bands, levels, model.kt, opts, Confinement::Ignored)?;
                let conf = wkb_current(&bands, levels, model.kt, opts, Confinement::GroundState)?;
                let slice = bands.slice(0.0);
                let w = slice.window();
                let mut t = Table::new(&["energy_eV", "T_negf", "T_wkb"])
                    .with_meta("kind", "wkb")
                    .with_meta("kz_per_nm", 0.0)
                    .with_meta("current_negf_A_per_nm", super::table::fmt_f64(o.current.current))
                    .with_meta("current_wkb_unconfined_A_per_nm", super::table::fmt_f64(free.current))
                    .with_meta("current_wkb_confined_A_per_nm", super::table::fmt_f64(conf.current));
                if !w.is_empty() {
                    for k in 0..WKB_ENERGIES {
                        let e = w.e_min + w.width() * (k as f64 + 0.5) / WKB_ENERGIES as f64;
                        let f = slice.effective_fields(e);
                        let h = DeviceHamiltonian::from_slices(model.mesh, &f.potential, &f.mass)?;
                        let tn = solve_slice(&h, e, 0.0, opts.eta, Want::TRANSMISSION)?.transmission;
                        t.push_numbers(&[e, tn, slice_wkb(&slice, e).combined]);
                    }
                }
                save(format!("wkb_{}.csv", bias_tag(o.vg, o.vd)), t)?;
            }
        }
    }
    Ok(files)
}
