//! Command-line front end.
//!
//! Every command resolves to a [`RunConfig`], which can also be executed
//! directly with [`execute`]; the binary adds nothing beyond argument
//! parsing and file output.

mod commands;
mod config;
mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{execute, Outcome};
pub use config::{
    parse_counts, parse_reals, BasisChoice, CommandKind, Format, RunConfig, TSpec, VariantChoice, DEFAULT_CAP,
    DEFAULT_THRESHOLD,
};
pub use report::{Cell, Header, Report, NULL, VERSION};

use crate::estimation::ProbeKind;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Sim(#[from] crate::Error),
    #[error("io: {0}")]
    Io(String),
}

#[derive(Parser, Debug)]
#[command(name = "noonsim", version, about = "Heralded |N::0> state simulator")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run each protocol and check its fidelity against the threshold.
    Verify(Flags),
    /// Sweep N, t and η; `--closed-form` skips the simulator.
    Scan(Flags),
    /// Fidelity and probability with lossy detectors.
    Detector(Flags),
    /// Closed-form and Monte Carlo phase uncertainty.
    Estimate(Flags),
    /// Exact vs asymptotic success probability.
    Scaling(Flags),
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// JSON config; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Photon number: `4`, `2,4,6`, `2..=8` or `2..=64:2`.
    #[arg(long)]
    n: Option<String>,
    /// Transmission: `optimal`, a value, or a comma list.
    #[arg(long)]
    t: Option<String>,
    /// Detector efficiency, one value or a comma list.
    #[arg(long)]
    eta: Option<String>,
    #[arg(long, value_enum)]
    phase_variant: Option<VariantChoice>,
    #[arg(long, value_enum)]
    basis: Option<BasisChoice>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
    /// Largest N accepted by simulation commands.
    #[arg(long)]
    cap: Option<u32>,
    /// Estimation phases (comma list); default π/(2N).
    #[arg(long)]
    phi: Option<String>,
    /// Probe kinds for `estimate`.
    #[arg(long, value_enum, value_delimiter = ',')]
    kinds: Option<Vec<ProbeKindArg>>,
    /// Photon-number-resolving detectors (`true`/`false`).
    #[arg(long)]
    resolving: Option<bool>,
    #[arg(long)]
    closed_form: bool,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
enum ProbeKindArg {
    Uncorrelated,
    Entangled,
}

impl From<ProbeKindArg> for ProbeKind {
    fn from(k: ProbeKindArg) -> Self {
        match k {
            ProbeKindArg::Uncorrelated => ProbeKind::Uncorrelated,
            ProbeKindArg::Entangled => ProbeKind::Entangled,
        }
    }
}

fn build_config(command: CommandKind, f: Flags) -> Result<RunConfig, CliError> {
    let mut c = match &f.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    c.command = command;
    if let Some(n) = f.n {
        c.n = parse_counts(&n)?;
    }
    if let Some(t) = f.t {
        c.t = t.parse()?;
    }
    if let Some(eta) = f.eta {
        c.eta = parse_reals(&eta, "eta")?;
    }
    if let Some(phi) = f.phi {
        c.phi = Some(parse_reals(&phi, "phi")?);
    }
    if let Some(k) = f.kinds {
        c.kinds = k.into_iter().map(ProbeKind::from).collect();
    }
    macro_rules! set {
        ($($field:ident),*) => { $( if let Some(v) = f.$field { c.$field = v; } )* };
    }
    set!(phase_variant, basis, trials, seed, format, threshold, cap);
    if f.out.is_some() {
        c.out = f.out;
    }
    if f.workers.is_some() {
        c.workers = f.workers;
    }
    if f.resolving.is_some() {
        c.resolving = f.resolving;
    }
    c.closed_form |= f.closed_form;
    c.validate()?;
    Ok(c)
}

/// Parses `args` into a validated config.
pub fn parse_args<I, T>(args: I) -> Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    let (kind, flags) = match cli.command {
        Cmd::Verify(f) => (CommandKind::Verify, f),
        Cmd::Scan(f) => (CommandKind::Scan, f),
        Cmd::Detector(f) => (CommandKind::Detector, f),
        Cmd::Estimate(f) => (CommandKind::Estimate, f),
        Cmd::Scaling(f) => (CommandKind::Scaling, f),
    };
    build_config(kind, flags).map_err(|e| clap::Error::raw(clap::error::ErrorKind::ValueValidation, format!("{e}\n")))
}

/// Executes on a pool of `config.workers` threads (rayon's default if unset).
pub fn execute_with_workers(config: &RunConfig) -> Result<Outcome, CliError> {
    match config.workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| CliError::Usage(format!("workers: {e}")))?;
            pool.install(|| execute(config))
        }
        None => execute(config),
    }
}

/// Full command-line entry point; returns the process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match parse_args(args) {
        Ok(c) => c,
        Err(e) => {
            if e.exit_code() == 0 {
                let _ = write!(stdout, "{}", e.render());
                return EXIT_OK;
            }
            let _ = write!(stderr, "{}", e.render());
            return EXIT_USAGE;
        }
    };
    let outcome = match execute_with_workers(&config) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "noonsim: {e}");
            return EXIT_USAGE;
        }
    };
    let written = outcome.report.render(config.format).and_then(|bytes| match &config.out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => stdout.write_all(&bytes).map_err(|e| CliError::Io(e.to_string())),
    });
    if let Err(e) = written {
        let _ = writeln!(stderr, "noonsim: {e}");
        return EXIT_USAGE;
    }
    if outcome.passed {
        EXIT_OK
    } else {
        let _ = writeln!(stderr, "noonsim: fidelity below threshold {}", config.threshold);
        EXIT_VERIFY_FAILED
    }
}
