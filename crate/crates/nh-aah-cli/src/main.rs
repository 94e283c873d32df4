//! Command-line driver for the nh-aah toolkit.
//!
//! Each subcommand loads a strict-schema JSON experiment file, runs one
//! experiment family, and writes CSV/SVG/JSON (and binary trace) artifacts
//! into the output directory. Artifacts embed the resolved config and the
//! version; reruns with identical configs are byte-identical. The only
//! timestamps live in the sidecar `run.log`.
//!
//! Exit codes: 0 success, 1 physics/numerical/IO error, 2 config error.

mod commands;
mod config;
mod context;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context as _;
use clap::{Args, Parser, Subcommand};

use config::{ConfigError, ExperimentKind};
use context::{RunContext, VERSION};

#[derive(Parser)]
#[command(
    name = "nh-aah",
    version,
    about = "Non-Hermitian lattices with imaginary sinusoidal potentials: \
             spectra, phase diagrams, domain walls, and laser dynamics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the modulation phase and export the open-chain spectrum.
    Spectrum(RunArgs),
    /// Classify polar (V, delta) grids for one or more modulation
    /// frequencies.
    PhaseDiagram(RunArgs),
    /// Diagonalize a multi-domain lattice and report wall-anchored modes.
    DomainWall(RunArgs),
    /// Pump-sweep a saturable-gain laser array; export sweeps, spectra,
    /// profiles, and field traces.
    Laser(RunArgs),
    /// Track zero modes along the constant-gain path V sin(delta) = const.
    Trajectory(RunArgs),
}

impl Command {
    fn kind(&self) -> ExperimentKind {
        match self {
            Command::Spectrum(_) => ExperimentKind::Spectrum,
            Command::PhaseDiagram(_) => ExperimentKind::PhaseDiagram,
            Command::DomainWall(_) => ExperimentKind::DomainWall,
            Command::Laser(_) => ExperimentKind::Laser,
            Command::Trajectory(_) => ExperimentKind::Trajectory,
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::Spectrum(a)
            | Command::PhaseDiagram(a)
            | Command::DomainWall(a)
            | Command::Laser(a)
            | Command::Trajectory(a) => a,
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Experiment file (JSON, strict schema).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory (overrides the config's output_dir).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Noise seed (overrides the config's seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: NH_AAH_THREADS, then all cores).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let kind = cli.command.kind();
    let args = cli.command.args();
    init_threads(args.threads)?;

    let cfg = config::load_config(&args.config)?;
    if cfg.kind != kind {
        return Err(ConfigError(format!(
            "config file is for kind '{}' but the subcommand is '{}'",
            cfg.kind, kind
        ))
        .into());
    }
    let out_dir = args.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let ctx = RunContext {
        kind,
        out_dir,
        seed: args.seed.or(cfg.seed),
        version: VERSION,
    };

    let resolved = match kind {
        ExperimentKind::Spectrum => commands::spectrum::execute(&cfg.parameters, &ctx),
        ExperimentKind::PhaseDiagram => commands::phase_diagram::execute(&cfg.parameters, &ctx),
        ExperimentKind::DomainWall => commands::domain_wall::execute(&cfg.parameters, &ctx),
        ExperimentKind::Laser => commands::laser::execute(&cfg.parameters, &ctx),
        ExperimentKind::Trajectory => commands::trajectory::execute(&cfg.parameters, &ctx),
    }?;
    ctx.write_resolved_config(&resolved)?;
    append_run_log(&ctx, &resolved)
}

/// Sidecar log: the one artifact that carries wall-clock timestamps.
fn append_run_log(ctx: &RunContext, resolved: &str) -> anyhow::Result<()> {
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let path = ctx.out_dir.join("run.log");
    let mut f = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .with_context(|| format!("opening {}", path.display()))?;
    writeln!(f, "unix_time: {stamp}\nkind: {}\nconfig: {resolved}\n---", ctx.kind)
        .with_context(|| format!("writing {}", path.display()))
}

/// Thread-count resolution: `--threads` beats `NH_AAH_THREADS`; otherwise
/// the global pool keeps its default (all cores).
fn init_threads(flag: Option<usize>) -> anyhow::Result<()> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("NH_AAH_THREADS") {
            Ok(s) => Some(s.parse::<usize>().map_err(|_| {
                ConfigError(format!("NH_AAH_THREADS must be a positive integer, got '{s}'"))
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(ConfigError("thread count must be >= 1".into()).into());
        }
        // Ignore "already initialized": only possible in-process, e.g. tests.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}
