//! `modschwarz`: solve the residue system, expand series, verify the
//! Schwarzian and ODE identities, check residues and equivariance, and run
//! the acceptance suite. Every subcommand prints one JSON document.
//!
//! Exit codes: 0 pass, 2 configuration error, 3 numerical failure,
//! 4 verification failure, 1 I/O error.

mod cache;
mod commands;
mod config;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use modschwarz::analytic::{DEFAULT_DELTA, DEFAULT_SAMPLES};
use serde_json::Value;

use commands::{Expandable, Identity};
use config::{FileConfig, Flags, Mode, RunConfig};

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn config(m: impl Into<String>) -> Self {
        Self { code: 2, message: m.into() }
    }

    pub fn numerical(m: impl Into<String>) -> Self {
        Self { code: 3, message: m.into() }
    }

    pub fn io(m: impl Into<String>) -> Self {
        Self { code: 1, message: m.into() }
    }

    pub fn json(e: serde_json::Error) -> Self {
        Self::io(format!("json: {e}"))
    }
}

impl From<modschwarz::Error> for CliError {
    fn from(e: modschwarz::Error) -> Self {
        use modschwarz::Error as E;
        match e {
            E::InvalidInput(_) | E::Parse(_) | E::NotUnimodular { .. } | E::OutsideDomain(_) | E::BelowEvaluationFloor { .. } => {
                Self::config(e.to_string())
            }
            _ => Self::numerical(e.to_string()),
        }
    }
}

pub struct Outcome {
    pub doc: Value,
    pub pass: bool,
}

impl Outcome {
    /// Takes `pass` from the document's own `pass` field.
    pub fn new(doc: Value) -> Self {
        let pass = doc.get("pass").and_then(Value::as_bool).unwrap_or(true);
        Self { doc, pass }
    }
}

#[derive(Parser)]
#[command(name = "modschwarz", version, about = "Weight-2 forms with a character and their Schwarzian equation")]
struct Cli {
    /// TOML file with default values; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the JSON document here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Also write PNG plots (convergence for solve, |f_n| for verify and residue).
    #[arg(long, global = true)]
    plot: bool,
    /// Directory for plots.
    #[arg(long, global = true)]
    plot_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct NArg {
    #[arg(long, allow_negative_numbers = true)]
    n: Option<i64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the residue system and rationalize the solution polynomial.
    Solve {
        #[command(flatten)]
        n: NArg,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        b: Option<f64>,
        #[arg(long)]
        c: Option<f64>,
        /// Residual sup-norm at which Newton stops.
        #[arg(long)]
        tol: Option<f64>,
        /// Precision of the refinement used for rationalization.
        #[arg(long)]
        bits: Option<i64>,
        /// Comma-separated starting point in the ordered simplex.
        #[arg(long)]
        init: Option<String>,
        /// Largest denominator tried in rational reconstruction.
        #[arg(long)]
        max_den: Option<u64>,
    },
    /// Dump a q-series (exponents in t = q^(1/24)).
    Expand {
        #[arg(value_enum)]
        what: Expandable,
        #[command(flatten)]
        n: NArg,
        /// Comma-separated nodes for f and y.
        #[arg(long)]
        xs: Option<String>,
        /// Exponent for eta-power.
        #[arg(long, default_value_t = 4, allow_negative_numbers = true)]
        power: i64,
        /// Eta quotient such as "eta(1/2)^8/eta(1)^4".
        #[arg(long)]
        quotient: Option<String>,
        /// Number of q-powers beyond the lead.
        #[arg(long)]
        order: Option<i64>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long)]
        bits: Option<i64>,
        /// One record per exponent, zeros included.
        #[arg(long)]
        dense: bool,
    },
    /// Check the Schwarzian or the ODE identity coefficient by coefficient.
    Verify {
        #[arg(value_enum)]
        identity: Identity,
        #[command(flatten)]
        n: NArg,
        /// Comma-separated nodes (rationals like 4/7 in exact mode).
        #[arg(long, conflicts_with = "auto_solve")]
        xs: Option<String>,
        /// Take the nodes from the solver (the default without --xs).
        #[arg(long)]
        auto_solve: bool,
        #[arg(long)]
        order: Option<i64>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long)]
        bits: Option<i64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Contour residues of f_n at its poles on the unit arc.
    Residue {
        #[command(flatten)]
        n: NArg,
        /// Comma-separated nodes in place of the solver's (for controls).
        #[arg(long)]
        xs: Option<String>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        samples: Option<i64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// h(gamma tau) - chi(gamma) h(tau) at sample points, and rho(gamma).
    Equivariance {
        #[command(flatten)]
        n: NArg,
        #[arg(long)]
        xs: Option<String>,
        /// Matrix entries a,b,c,d.
        #[arg(long, allow_hyphen_values = true)]
        gamma: String,
        /// Sample point re,im; repeatable.
        #[arg(long, allow_hyphen_values = true)]
        tau: Vec<String>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Run the acceptance criteria and the per-n summary table.
    ReportAll {
        #[arg(long)]
        n_max: Option<i64>,
        /// Run a single criterion (1 to 10).
        #[arg(long)]
        criterion: Option<usize>,
        /// Run criteria one after another.
        #[arg(long)]
        sequential: bool,
    },
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let base = Flags { output: cli.output.clone(), plot: cli.plot, plot_dir: cli.plot_dir.clone(), ..Flags::default() };
    let outcome = match cli.command {
        Command::Solve { n, a, b, c, tol, bits, init, max_den } => {
            let cfg = RunConfig::resolve("solve", Flags { n: n.n, a, b, c, tol, bits, ..base }, &file)?;
            let init = init.as_deref().map(|s| commands::parse_list(s, |v| {
                v.trim().parse::<f64>().map_err(|_| CliError::config(format!("not a number: {v:?}")))
            })).transpose()?;
            let args = commands::SolveArgs { init, max_den: max_den.or(file.max_den) };
            (cfg.clone(), commands::solve(&cfg, args)?)
        }
        Command::Expand { what, n, xs, power, quotient, order, mode, bits, dense } => {
            let cfg = RunConfig::resolve("expand", Flags { n: n.n, order, mode, bits, ..base }, &file)?;
            let args = commands::ExpandArgs { what, power, quotient: quotient.as_deref(), xs: xs.as_deref(), dense };
            (cfg.clone(), commands::expand(&cfg, args)?)
        }
        Command::Verify { identity, n, xs, auto_solve: _, order, mode, bits, tol } => {
            let cfg = RunConfig::resolve("verify", Flags { n: n.n, order, mode, bits, tol, ..base }, &file)?;
            (cfg.clone(), commands::verify(&cfg, identity, xs.as_deref())?)
        }
        Command::Residue { n, xs, delta, samples, tol } => {
            let cfg = RunConfig::resolve("residue", Flags { n: n.n, tol, ..base }, &file)?;
            let delta = config::positive("delta", delta.or(file.delta).unwrap_or(DEFAULT_DELTA))?;
            let samples = match samples.or(file.samples) {
                Some(s) => config::positive_count("samples", s)?,
                None => DEFAULT_SAMPLES,
            };
            let args = commands::ResidueArgs { xs: xs.as_deref(), delta, samples };
            (cfg.clone(), commands::residue(&cfg, args)?)
        }
        Command::Equivariance { n, xs, gamma, tau, tol } => {
            let cfg = RunConfig::resolve("equivariance", Flags { n: n.n, tol, ..base }, &file)?;
            let g = commands::parse_gamma(&gamma)?;
            let taus = tau.iter().map(|t| commands::parse_tau(t)).collect::<Result<Vec<_>, _>>()?;
            (cfg.clone(), commands::equivariance(&cfg, xs.as_deref(), g, taus)?)
        }
        Command::ReportAll { n_max, criterion, sequential } => {
            let cfg = RunConfig::resolve("report-all", base, &file)?;
            let n_max = config::positive_count("n-max", n_max.or(file.n_max).unwrap_or(4))?;
            let out = commands::report_all(n_max, criterion, !sequential)?;
            eprint!("{}", commands::render_table(&out.doc));
            (cfg, out)
        }
    };
    let (cfg, outcome) = outcome;
    let mut text = serde_json::to_string_pretty(&outcome.doc).map_err(CliError::json)?;
    text.push('\n');
    match &cfg.output {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(format!("{}: {e}", p.display())))?,
        None => print!("{text}"),
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(o) if o.pass => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(4),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
