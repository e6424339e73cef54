//! `speclab` command-line front end.

mod config;
mod plan;
mod plot;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde_json::json;

use config::{Flags, InputError, RunConfig};
use run::{execute, manifest, sha256_hex, Failure, Output};

#[derive(Parser)]
#[command(
    name = "speclab",
    version,
    about = "Spectral geometry experiments on conformal patches"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Radial comparison model h'' = G h.
    Model(Flags),
    /// Barrier profile and its Laplacian check on a patch.
    Subharmonic(Flags),
    /// Patch grid export and limit-set sampling.
    Surface(Flags),
    /// Smallest Dirichlet eigenvalues.
    Spectrum(Flags),
    /// Fundamental tones along an exhaustion.
    Persson(Flags),
    /// Barta lower bound of the fundamental tone.
    Barta(Flags),
    /// Covering witness and its Barta quotient.
    Witness(Flags),
    /// Two-radius volume comparison on intrinsic balls.
    Ballprop(Flags),
    /// Covering sums for a gauge measure.
    Hausdorff(Flags),
}

impl Command {
    fn split(&self) -> (&'static str, &Flags) {
        match self {
            Command::Model(f) => ("model", f),
            Command::Subharmonic(f) => ("subharmonic", f),
            Command::Surface(f) => ("surface", f),
            Command::Spectrum(f) => ("spectrum", f),
            Command::Persson(f) => ("persson", f),
            Command::Barta(f) => ("barta", f),
            Command::Witness(f) => ("witness", f),
            Command::Ballprop(f) => ("ballprop", f),
            Command::Hausdorff(f) => ("hausdorff", f),
        }
    }
}

const EXIT_INPUT: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;

fn input_error(e: InputError) -> Failure {
    Failure::Input(e.to_string())
}

/// `SPECLAB_THREADS` caps the worker pool.
fn configure_threads() -> Result<usize, Failure> {
    if let Ok(s) = std::env::var("SPECLAB_THREADS") {
        let n: usize = s.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
            Failure::Input(format!(
                "SPECLAB_THREADS must be a positive integer, got `{s}`"
            ))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Input(format!("cannot size the thread pool: {e}")))?;
    }
    Ok(rayon::current_num_threads())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let started = Instant::now();
    let (name, flags) = cli.command.split();
    let base = match &flags.config {
        Some(p) => RunConfig::load(p).map_err(input_error)?,
        None => RunConfig::default(),
    };
    let cfg = base.merge(flags);
    let plan = plan::resolve(name, &cfg).map_err(input_error)?;
    let out_dir = match &cfg.out {
        Some(v) => PathBuf::from(config::text("out", v).map_err(input_error)?),
        None => PathBuf::from("speclab-out"),
    };
    let plan_json = serde_json::to_string_pretty(&plan).expect("plans serialise");
    let config_hash = sha256_hex(plan_json.as_bytes());
    if flags.dry_run {
        println!("{plan_json}");
        println!("output directory: {}", out_dir.display());
        println!("config hash: {config_hash}");
        return Ok(());
    }
    let threads = configure_threads()?;
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| Failure::Input(format!("cannot create {}: {e}", out_dir.display())))?;
    let mut out = Output {
        dir: out_dir.clone(),
        files: Vec::new(),
    };
    let lines = execute(&plan, &mut out)?;
    let m = manifest(name, &config_hash, &out)?;
    speclab::io::write_json(&m, &out_dir.join("manifest.json"))?;
    let now = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let meta = json!({
        "finished_unix_s": now,
        "elapsed_s": started.elapsed().as_secs_f64(),
        "threads": threads,
        "version": env!("CARGO_PKG_VERSION"),
    });
    speclab::io::write_json(&meta, &out_dir.join("metadata.json"))?;
    for l in lines {
        println!("{l}");
    }
    println!(
        "wrote {} file(s) to {}",
        out.files.len() + 2,
        out_dir.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}
