use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use tfet_negf::device::load_config_with;
use tfet_negf::io::{exit_code, run, PlotKind, RunOptions, EXIT_CONFIG, EXIT_OK, EXIT_USAGE};

/// Ballistic band-to-band tunneling simulator: runs a bias sweep from a TOML
/// device description and writes CSV results plus a JSON manifest.
#[derive(Parser, Debug)]
#[command(name = "tfet-sim", version)]
struct Cli {
    /// device and sweep description (TOML)
    #[arg(long)]
    config: PathBuf,
    /// output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// override a config entry, e.g. --set solver.alpha=0.8 (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// target mesh spacing in nm
    #[arg(long)]
    mesh_spacing: Option<f64>,
    /// carrier backend inside the loop: closed-boundary or negf
    #[arg(long)]
    backend: Option<String>,
    /// write V, Ec, Ev, n and p for every bias point
    #[arg(long)]
    dump_fields: bool,
    /// keep sweeping after a bias point fails to converge and exit 0
    #[arg(long)]
    continue_on_divergence: bool,
    /// worker threads; defaults to TFET_THREADS, then the core count
    #[arg(long)]
    threads: Option<usize>,
    /// plot data to write: iv, transmission, bands, barrier, wkb (repeatable)
    #[arg(long = "plot", value_name = "KIND")]
    plots: Vec<String>,
}

fn threads(flag: Option<usize>) -> Result<Option<usize>, String> {
    if let Some(n) = flag {
        return Ok(Some(n));
    }
    match std::env::var("TFET_THREADS") {
        Ok(v) => v.trim().parse::<usize>().map(Some).map_err(|_| format!("TFET_THREADS must be a positive integer, got '{v}'")),
        Err(_) => Ok(None),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { EXIT_OK as u8 });
        }
    };
    match threads(cli.threads) {
        Ok(Some(0)) | Err(_) => {
            eprintln!("error: thread count must be a positive integer");
            return ExitCode::from(EXIT_USAGE as u8);
        }
        Ok(Some(n)) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_USAGE as u8);
            }
        }
        Ok(None) => {}
    }
    let mut plots = Vec::new();
    for p in &cli.plots {
        match p.parse::<PlotKind>() {
            Ok(k) => plots.push(k),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_USAGE as u8);
            }
        }
    }
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", cli.config.display());
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let mut overrides = cli.set.clone();
    if let Some(h) = cli.mesh_spacing {
        overrides.push(format!("solver.mesh_spacing={h}"));
    }
    if let Some(b) = &cli.backend {
        overrides.push(format!("solver.backend=\"{b}\""));
    }
    let config = match load_config_with(&text, &overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e) as u8);
        }
    };
    let opts = RunOptions { out: cli.out, dump_fields: cli.dump_fields, continue_on_divergence: cli.continue_on_divergence, plots };
    match run(&config, &opts) {
        Ok(outcome) => {
            for b in &outcome.manifest.bias_points {
                println!("Vg = {:.3} V  Vd = {:.3} V  I/Lz = {:.4e} A/nm  {}", b.vg, b.vd, b.current_a_per_nm, b.status);
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
