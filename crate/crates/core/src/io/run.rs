//! Batch sweep over the configured bias points.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;

use super::plots::{bias_tag, emit_plot, PlotKind};
use super::table::{fmt_f64, Table};
use crate::device::RunConfig;
use crate::error::{Error, Result};
use crate::scf::{run_loop, DeviceModel, LoopConfig, LoopResult, LoopStatus};
use crate::transport::{field_strength, integrate_current, kane_generation, CurrentOptions, CurrentResult, CurrentStatus};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Geometry(_) | Error::Io(_) => EXIT_CONFIG,
        Error::MeshMismatch(_) | Error::Numerical(_) | Error::Contract(_) => EXIT_NUMERICAL,
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out: PathBuf,
    pub dump_fields: bool,
    pub continue_on_divergence: bool,
    pub plots: Vec<PlotKind>,
}

/// Everything computed for one bias point.
#[derive(Clone, Debug)]
pub struct BiasOutcome {
    pub vg: f64,
    pub vd: f64,
    pub scf: LoopResult,
    pub current: CurrentResult,
    /// converged, no-overlap, max-iter or diverged
    pub status: String,
    pub seconds: f64,
}

impl BiasOutcome {
    pub fn converged(&self) -> bool {
        self.scf.trace.status == LoopStatus::Converged
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BiasEntry {
    pub vg: f64,
    pub vd: f64,
    pub status: String,
    pub current_a_per_nm: f64,
    pub iterations: usize,
    pub final_dv: f64,
    pub seconds: f64,
    pub pockets: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_generation: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MeshInfo {
    pub nx: usize,
    pub ny: usize,
    pub ax: f64,
    pub ay: f64,
    pub adjustments: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub mesh: MeshInfo,
    pub bias_points: Vec<BiasEntry>,
    pub files: Vec<String>,
    pub exit_code: i32,
}

pub struct RunOutcome {
    pub manifest: RunManifest,
    pub model: DeviceModel,
    pub outcomes: Vec<BiasOutcome>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        self.manifest.exit_code
    }
}

fn trace_table(r: &LoopResult) -> Table {
    let mut t = Table::new(&["iteration", "max_dv_V", "max_dn_rel", "alpha"])
        .with_meta("kind", "convergence")
        .with_meta("status", r.trace.status.as_str());
    for rec in &r.trace.records {
        t.push_numbers(&[rec.iteration as f64, rec.max_dv, rec.max_dn, rec.alpha]);
    }
    t
}

fn field_table(model: &DeviceModel, r: &LoopResult, generation: Option<&[f64]>) -> Table {
    let mut cols = vec!["x_nm", "y_nm", "V_V", "Ec_eV", "Ev_eV", "n_cm-3", "p_cm-3"];
    if generation.is_some() {
        cols.push("G_cm-3_s-1");
    }
    let mut t = Table::new(&cols).with_meta("kind", "fields");
    let mesh = model.mesh;
    for p in 0..mesh.len() {
        let (i, j) = mesh.ij(p);
        let mut row = vec![mesh.x(i), mesh.y(j), r.potential.values()[p], r.ec.values()[p], r.ev.values()[p], r.n.values()[p], r.p.values()[p]];
        if let Some(g) = generation {
            row.push(g[p]);
        }
        t.push_numbers(&row);
    }
    t
}

/// Run the sweep and write its files into `opts.out`.
pub fn run(config: &RunConfig, opts: &RunOptions) -> Result<RunOutcome> {
    fs::create_dir_all(&opts.out)?;
    let hash = config.hash();
    let mut files = Vec::new();
    fs::write(opts.out.join("config.toml"), config.to_toml())?;
    files.push("config.toml".to_string());

    let model = DeviceModel::new(config.device.clone(), config.solver.mesh_spacing)?;
    for a in &model.adjustments {
        log::info!("{a}");
    }
    let loop_cfg = LoopConfig::from_solver(&config.solver);
    let current_opts = CurrentOptions::from_solver(&config.solver);
    let mut outcomes: Vec<BiasOutcome> = Vec::new();
    let mut entries = Vec::new();
    let mut warm = None;
    let mut failed = false;

    for (vg, vd) in config.sweep.points() {
        let clock = Instant::now();
        log::info!("bias point Vg = {vg} V, Vd = {vd} V");
        let scf = run_loop(&model, vg, vd, &loop_cfg, warm.as_ref())?;
        let bands = model.bands(&scf.potential)?;
        let current = integrate_current(&bands, scf.levels(), model.kt, &current_opts)?;
        let status = match (scf.trace.status, current.status) {
            (LoopStatus::Converged, CurrentStatus::NoOverlap) => "no-overlap".to_string(),
            (s, _) => s.as_str().to_string(),
        };
        let tag = bias_tag(vg, vd);
        let name = format!("trace_{tag}.csv");
        trace_table(&scf).with_meta("config_hash", &hash).write(&opts.out.join(&name))?;
        files.push(name);

        let generation = match &config.solver.kane {
            Some(k) => Some(kane_generation(&field_strength(&scf.potential)?, &model.fields.bandgap, k)?.into_values()),
            None => None,
        };
        if opts.dump_fields {
            let name = format!("fields_{tag}.csv");
            field_table(&model, &scf, generation.as_deref()).with_meta("config_hash", &hash).write(&opts.out.join(&name))?;
            files.push(name);
        }
        let seconds = clock.elapsed().as_secs_f64();
        entries.push(BiasEntry {
            vg,
            vd,
            status: status.clone(),
            current_a_per_nm: current.current,
            iterations: scf.trace.iterations(),
            final_dv: scf.trace.final_dv(),
            seconds,
            pockets: scf.pockets.conduction.len() + scf.pockets.valence.len(),
            max_generation: generation.map(|g| g.iter().copied().fold(0.0, f64::max)),
            warnings: scf.warnings.clone(),
        });
        let converged = scf.trace.status == LoopStatus::Converged;
        warm = if converged { Some(scf.potential.clone()) } else { None };
        outcomes.push(BiasOutcome { vg, vd, scf, current, status, seconds });
        if !converged {
            failed = true;
            if !opts.continue_on_divergence {
                log::error!("bias point Vg = {vg} V, Vd = {vd} V did not converge; stopping the sweep");
                break;
            }
        }
    }

    let mut iv = Table::new(&["vg_V", "vd_V", "current_A_per_nm", "status"])
        .with_meta("kind", "iv")
        .with_meta("config_hash", &hash)
        .with_meta("width_nm", fmt_f64(config.device.width));
    for o in &outcomes {
        iv.push(vec![fmt_f64(o.vg), fmt_f64(o.vd), fmt_f64(o.current.current), o.status.clone()]);
    }
    iv.write(&opts.out.join("iv_curve.csv"))?;
    files.push("iv_curve.csv".into());

    for kind in &opts.plots {
        files.extend(emit_plot(*kind, &model, &outcomes, &current_opts, &hash, &opts.out)?);
    }

    files.push("manifest.json".into());
    let exit_code = if failed && !opts.continue_on_divergence { EXIT_NUMERICAL } else { EXIT_OK };
    let manifest = RunManifest {
        tool: "tfet-sim".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_hash: hash,
        mesh: MeshInfo { nx: model.mesh.nx, ny: model.mesh.ny, ax: model.mesh.ax, ay: model.mesh.ay, adjustments: model.adjustments.clone() },
        bias_points: entries,
        files,
        exit_code,
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::numerical(format!("manifest: {e}")))?;
    fs::write(opts.out.join("manifest.json"), json)?;
    Ok(RunOutcome { manifest, model, outcomes })
}
