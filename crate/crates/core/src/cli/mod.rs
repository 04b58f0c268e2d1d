//! Command-line driver: `run`, `sweep` and `dephase`.

pub mod config;
pub mod records;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::dephasing::{bare_memory_ghz, storage_fidelity_ensemble};
use crate::hilbert::HilbertSpace;
use crate::protocol::{target_state, Mode, Transfer};

pub use config::RunConfig;
pub use records::{DephaseRecord, TransferRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(CliError::Config(format!("unknown format {other:?}"))),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("simulation failed: {0}")]
    Simulation(#[from] crate::Error),
    #[error("cannot write output: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Simulation(_) | CliError::Output(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ghz-dfs",
    version,
    about = "GHZ transfer onto DFS-encoded cavity memory"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one transfer per coefficient draw.
    Run(CommonArgs),
    /// Repeat the transfer over a grid of detuning ratios delta/mu.
    Sweep(CommonArgs),
    /// Monte-Carlo storage fidelity of encoded and bare memory states.
    Dephase(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<Mode>,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: crate::Error| e.to_string())
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    let (args, kind) = match cli.command {
        Command::Run(a) => (a, "run"),
        Command::Sweep(a) => (a, "sweep"),
        Command::Dephase(a) => (a, "dephase"),
    };
    let mut cfg = RunConfig::from_path(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(mode) = args.mode {
        cfg.mode = Some(mode);
    }
    let out = args.out.or_else(|| cfg.out.clone());
    let format = args
        .format
        .or(cfg.format)
        .unwrap_or_else(|| format_from_path(out.as_deref()));
    match kind {
        "run" => emit(&cmd_run(&cfg)?, format, out.as_deref()),
        "sweep" => emit(&cmd_sweep(&cfg)?, format, out.as_deref()),
        _ => emit(&cmd_dephase(&cfg)?, format, out.as_deref()),
    }
}

fn format_from_path(path: Option<&Path>) -> Format {
    match path.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some("json") => Format::Json,
        _ => Format::Csv,
    }
}

fn emit<T: serde::Serialize>(
    records: &[T],
    format: Format,
    out: Option<&Path>,
) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            records::write_records(records, format, &mut w)?;
            w.flush().map_err(|e| CliError::Output(e.to_string()))
        }
        None => records::write_records(records, format, io::stdout().lock()),
    }
}

/// One record per coefficient draw; ideal mode unless configured otherwise.
pub fn cmd_run(cfg: &RunConfig) -> Result<Vec<TransferRecord>, CliError> {
    let mode = cfg.mode.unwrap_or(Mode::Ideal);
    let transfer = Transfer::new(&cfg.params, mode)?;
    cfg.coefficients()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let r = transfer.run(c)?;
            Ok(TransferRecord::new(i, cfg.seed, &cfg.params, c, &r))
        })
        .collect()
}

/// One record per ratio and coefficient draw, sorted by ratio; full mode
/// unless configured otherwise. `delta = ratio * mu` and `delta'` follows
/// from the commensurability condition.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<Vec<TransferRecord>, CliError> {
    let mut ratios = cfg.ratios.clone();
    ratios.sort_by(f64::total_cmp);
    ratios.dedup();
    if ratios.len() < 2 {
        return Err(CliError::Config(
            "sweep needs at least two distinct ratios".into(),
        ));
    }
    let mode = cfg.mode.unwrap_or(Mode::Full);
    let coeffs = cfg.coefficients();
    let grid = ratios
        .iter()
        .map(|&r| {
            let mut p = cfg.params;
            p.coupling.delta = r * p.coupling.mu;
            p.with_commensurate_deltap(p.m, p.k)
                .map_err(|e| CliError::Config(format!("ratio {r}: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let per_ratio: Vec<Vec<TransferRecord>> = grid
        .par_iter()
        .map(|p| {
            let transfer = Transfer::new(p, mode)?;
            coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| Ok(TransferRecord::new(i, cfg.seed, p, c, &transfer.run(c)?)))
                .collect::<Result<Vec<_>, CliError>>()
        })
        .collect::<Result<_, _>>()?;
    Ok(per_ratio.into_iter().flatten().collect())
}

/// Encoded (DFS target) and bare memory GHZ states side by side, one record
/// per noise strength and coefficient draw.
pub fn cmd_dephase(cfg: &RunConfig) -> Result<Vec<DephaseRecord>, CliError> {
    let p = &cfg.params;
    let space = HilbertSpace::build(p.n, p.fock_cutoff, false)?;
    let d = &cfg.dephase;
    let couplings = d
        .couplings
        .iter()
        .map(|g| g.to_string())
        .collect::<Vec<_>>()
        .join(";");
    let mut out = Vec::new();
    for (i, c) in cfg.coefficients().iter().enumerate() {
        let encoded = target_state(&space, p, c)?;
        let bare = bare_memory_ghz(&space, c)?;
        for &sigma in &d.sigmas {
            let e = storage_fidelity_ensemble(
                &encoded,
                &d.couplings,
                d.model,
                sigma,
                d.trials,
                cfg.seed,
            )?;
            let b =
                storage_fidelity_ensemble(&bare, &d.couplings, d.model, sigma, d.trials, cfg.seed)?;
            out.push(DephaseRecord {
                draw: i,
                n: p.n,
                seed: cfg.seed,
                model: d.model.to_string(),
                sigma,
                trials: d.trials,
                couplings: couplings.clone(),
                alpha_re: c.alpha.re,
                alpha_im: c.alpha.im,
                beta_re: c.beta.re,
                beta_im: c.beta.im,
                encoded_mean: e.mean,
                encoded_stderr: e.stderr,
                bare_mean: b.mean,
                bare_stderr: b.stderr,
            });
        }
    }
    Ok(out)
}
