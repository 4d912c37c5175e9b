//! `frpmg`: Fourier analysis of dual-time stepping and p-multigrid for
//! flux reconstruction, with a physical-space verification solver.
//!
//! See `docs/FORMATS.md` for config and CSV layouts.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use frpmg::exec::{with_jobs, Execution};

use crate::commands::RunContext;
use crate::config::{Config, NodeChoice};

#[derive(Debug, Parser)]
#[command(
    name = "frpmg",
    version,
    about = "Fourier analysis of dual-time stepping with p-multigrid for FR/DG"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON config with sections scheme, space, dualtime, cycle, sweep.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Name of a bundled config (fig2, fig3a, fig3b, fig3b-k8, fig5, fig6,
    /// fig7, fig7-bdf3, fig8, fig9). Ignored when --config is given.
    #[arg(long, global = true)]
    preset: Option<String>,

    /// Output directory for CSV files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads (default: logical cores). 1 runs sequentially.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Seed for random draws in `verify`.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Override space.p.
    #[arg(long, global = true)]
    p: Option<usize>,

    /// Override space.nodes (`legendre`).
    #[arg(long, global = true)]
    nodes: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dump D, C-/C0/C+, the diffusion stencil B-2..B+2 and the Bloch matrix
    /// Q. Columns: matrix,row,col,re,im.
    Operators,
    /// Unity-amplification contours. Columns: curve,segment,x0,y0,x1,y1.
    Stability,
    /// Maximum stable pseudo step. Columns: p,mu,dtau_max (explicit) or
    /// m,dt,dtau_max (coupled).
    Cfl,
    /// Error after every pseudo step. Columns: k_hat,k,m,error.
    Error,
    /// Contraction factor of a cycle against plain smoothing over dt/dtau.
    /// Columns: ratio,dt,gamma_base,gamma_pmg,relative,argmax.
    Contraction,
    /// Error-mode energies per cycle.
    /// Columns: k_hat,cycle_type,cycle,tau,mode,energy.
    Modes,
    /// Per-cycle convergence. Columns: cycle,tau,error,error_exact,beta0,beta1.
    CycleRun {
        /// Cycle preset (v1, v3, vap, w, none); defaults to cycle.preset.
        #[arg(long)]
        cycle: Option<String>,
    },
    /// Check Fourier predictions against the physical-space solver.
    /// Columns: m,fourier,timedomain,rel_deviation; also snapshot.csv with
    /// element,node,x,re,im.
    Verify,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Operators => "operators",
            Command::Stability => "stability",
            Command::Cfl => "cfl",
            Command::Error => "error",
            Command::Contraction => "contraction",
            Command::Modes => "modes",
            Command::CycleRun { .. } => "cycle-run",
            Command::Verify => "verify",
        }
    }
}

fn resolve(cli: &Cli) -> Result<Config> {
    let mut cfg = match (&cli.preset, &cli.config) {
        (_, Some(path)) => Config::load(path)?,
        (Some(name), None) => Config::preset(name)?,
        (None, None) => Config::default(),
    };
    if let (Some(name), Some(_)) = (&cli.preset, &cli.config) {
        log::warn!("both --preset {name} and --config given; using --config");
    }
    if let Some(p) = cli.p {
        cfg.space.p = p;
    }
    if let Some(n) = &cli.nodes {
        cfg.space.nodes = NodeChoice::Named(n.clone());
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<bool> {
    let cfg = resolve(cli)?;
    std::fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    println!("{}", serde_json::to_string(&cfg)?);
    let resolved = commands::resolved_config(&cfg, &cli.out)?;
    let exec = match cli.jobs {
        Some(1) => Execution::Sequential,
        _ => Execution::Parallel,
    };
    let cx = RunContext {
        cfg: &cfg,
        out: &cli.out,
        exec,
        seed: cli.seed,
    };
    let mut ok = true;
    let paths = with_jobs(cli.jobs, || -> Result<Vec<PathBuf>> {
        match &cli.command {
            Command::Operators => commands::operators(&cx),
            Command::Stability => commands::stability(&cx),
            Command::Cfl => commands::cfl(&cx),
            Command::Error => commands::error(&cx),
            Command::Contraction => commands::contraction(&cx),
            Command::Modes => commands::modes(&cx),
            Command::CycleRun { cycle } => commands::cycle_run(&cx, cycle.as_deref()),
            Command::Verify => {
                let v = commands::verify(&cx)?;
                ok = v.max_rel_deviation <= v.tolerance;
                Ok(v.paths)
            }
        }
    })?;
    for p in std::iter::once(&resolved).chain(&paths) {
        println!("wrote {}", p.display());
    }
    if !ok {
        eprintln!("{}: deviation exceeds tolerance", cli.command.name());
    }
    Ok(ok)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
