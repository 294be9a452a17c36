//! `heliox`: ground-state energies and one-electron entanglement entropies of
//! two-electron atoms.

mod manifest;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use manifest::{Command, Format, Manifest, Target};

/// Exit status for malformed input.
const EXIT_USAGE: u8 = 2;
/// Exit status for numerical or convergence failures.
const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "heliox", version, about = "Hylleraas ground states and entanglement entropies of two-electron atoms")]
struct Cli {
    #[command(subcommand)]
    command: Option<Cmd>,

    #[command(flatten)]
    opts: Opts,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Variational ground-state energy for each (Z, omega).
    Energy,
    /// Von Neumann and linear entropies, converged over the grid ladder.
    Entropy,
    /// Entropies over a list or range of Z, with the S/L ratio.
    Sweep,
    /// Regenerate a reference table or the Z-sweep figure data.
    Reproduce {
        #[arg(value_enum)]
        target: Target,
    },
}

#[derive(Debug, Args)]
struct Opts {
    /// Nuclear charge: a value, a comma list, or start:stop:step.
    #[arg(long = "Z", global = true, allow_hyphen_values = true, value_name = "Z")]
    z: Option<String>,

    /// Expansion order (comma list accepted).
    #[arg(long, global = true, allow_hyphen_values = true, value_name = "OMEGA")]
    omega: Option<String>,

    /// Fixed exponent; skips the optimization.
    #[arg(long, global = true, allow_hyphen_values = true)]
    mu: Option<f64>,

    /// Box edge in bohr; requires --nm and evaluates that single grid.
    #[arg(long = "R", global = true, allow_hyphen_values = true, value_name = "R")]
    radius: Option<f64>,

    /// Grid intervals.
    #[arg(long = "nm", global = true, value_name = "N")]
    intervals: Option<usize>,

    /// Highest partial wave.
    #[arg(long = "lmax", global = true, value_name = "L")]
    l_max: Option<usize>,

    /// Explicit convergence ladder, R:n_m:l_m,...
    #[arg(long, global = true, value_name = "RUNGS")]
    ladder: Option<String>,

    /// Convergence tolerance on S (bits).
    #[arg(long = "tol-s", global = true, allow_hyphen_values = true, value_name = "TOL")]
    tol_s: Option<f64>,

    /// Convergence tolerance on L.
    #[arg(long = "tol-l", global = true, allow_hyphen_values = true, value_name = "TOL")]
    tol_l: Option<f64>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// key = value file; flags override it.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Write the resolved run description here, replayable with --config.
    #[arg(long, global = true, value_name = "PATH")]
    save_config: Option<PathBuf>,

    /// Accept omega above the default cap.
    #[arg(long, global = true)]
    allow_high_omega: bool,
}

fn manifest_from(cli: Cli) -> Result<Manifest> {
    let mut m = match &cli.opts.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Manifest::from_config_str(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => Manifest::default(),
    };
    match cli.command {
        Some(Cmd::Energy) => m.command = Some(Command::Energy),
        Some(Cmd::Entropy) => m.command = Some(Command::Entropy),
        Some(Cmd::Sweep) => m.command = Some(Command::Sweep),
        Some(Cmd::Reproduce { target }) => {
            m.command = Some(Command::Reproduce);
            m.target = Some(target);
        }
        None => {}
    }
    let o = cli.opts;
    if let Some(z) = &o.z {
        m.set("Z", z)?;
    }
    if let Some(w) = &o.omega {
        m.set("omega", w)?;
    }
    if let Some(l) = &o.ladder {
        m.set("ladder", l)?;
    }
    m.mu = o.mu.or(m.mu);
    m.radius = o.radius.or(m.radius);
    m.intervals = o.intervals.or(m.intervals);
    m.l_max = o.l_max.or(m.l_max);
    m.tol_s = o.tol_s.or(m.tol_s);
    m.tol_l = o.tol_l.or(m.tol_l);
    m.format = o.format.unwrap_or(m.format);
    m.out = o.out.or(m.out);
    m.allow_high_omega |= o.allow_high_omega;
    m.validate()?;
    if let Some(path) = &o.save_config {
        std::fs::write(path, m.to_config_string()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(m)
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("HELIOX_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("HELIOX_THREADS must be a positive integer, got '{raw}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring the thread pool")
}

/// Numerical trouble maps to 3, everything else (bad input, I/O) to 2.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<heliox::Error>() {
            return match e {
                heliox::Error::InvalidArgument(_) => EXIT_USAGE,
                _ => EXIT_NUMERICAL,
            };
        }
    }
    EXIT_USAGE
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors and 0 for --help/--version
    let cli = Cli::parse();
    let result = configure_threads()
        .and_then(|()| manifest_from(cli))
        .and_then(|m| {
            let report = run::run(&m)?;
            report.emit(m.format, m.out.as_deref())
        });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            // convergence failures carry the last ladder rungs in the message
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
