use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

/// Keys accepted in a `--config` TOML file. Flags take precedence.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<i64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub order: Option<i64>,
    pub mode: Option<Mode>,
    pub tol: Option<f64>,
    pub bits: Option<i64>,
    pub output: Option<PathBuf>,
    pub plot: Option<bool>,
    pub plot_dir: Option<PathBuf>,
    pub delta: Option<f64>,
    pub samples: Option<i64>,
    pub n_max: Option<i64>,
    pub max_den: Option<u64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }
}

/// Resolved settings shared by every subcommand.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub subcommand: &'static str,
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub order: u32,
    pub mode: Mode,
    pub tol: Option<f64>,
    pub bits: Option<u32>,
    pub output: Option<PathBuf>,
    pub plot: bool,
    pub plot_dir: PathBuf,
}

/// Flag values of the fields common to all subcommands.
#[derive(Clone, Debug, Default)]
pub struct Flags {
    pub n: Option<i64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub order: Option<i64>,
    pub mode: Option<Mode>,
    pub tol: Option<f64>,
    pub bits: Option<i64>,
    pub output: Option<PathBuf>,
    pub plot: bool,
    pub plot_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn resolve(subcommand: &'static str, flags: Flags, file: &FileConfig) -> Result<Self, CliError> {
        let n = flags.n.or(file.n).unwrap_or(0);
        if n < 0 {
            return Err(CliError::config(format!("n must be >= 0, got {n}")));
        }
        let mode = flags.mode.or(file.mode).unwrap_or(Mode::Exact);
        let order = flags.order.or(file.order).unwrap_or(match mode {
            Mode::Exact => 25,
            Mode::Float => 100,
        });
        if order < 1 || order > u32::MAX as i64 {
            return Err(CliError::config(format!("order must be >= 1, got {order}")));
        }
        let tol = flags.tol.or(file.tol);
        if let Some(t) = tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::config(format!("tol must be positive, got {t}")));
            }
        }
        let bits = match flags.bits.or(file.bits) {
            Some(b) if !(64..=1 << 20).contains(&b) => {
                return Err(CliError::config(format!("bits must be in 64..=1048576, got {b}")))
            }
            b => b.map(|b| b as u32),
        };
        let (a, b, c) = (
            flags.a.or(file.a).unwrap_or(3.0),
            flags.b.or(file.b).unwrap_or(4.0),
            flags.c.or(file.c).unwrap_or(12.0),
        );
        if [a, b, c].iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(CliError::config(format!("a, b, c must be positive, got {a}, {b}, {c}")));
        }
        Ok(Self {
            subcommand,
            n: n as usize,
            a,
            b,
            c,
            order: order as u32,
            mode,
            tol,
            bits,
            output: flags.output.or_else(|| file.output.clone()),
            plot: flags.plot || file.plot.unwrap_or(false),
            plot_dir: flags.plot_dir.or_else(|| file.plot_dir.clone()).unwrap_or_else(|| PathBuf::from(".")),
        })
    }

    pub fn plot_path(&self, what: &str) -> PathBuf {
        self.plot_dir.join(format!("{}-n{}-{what}.png", self.subcommand, self.n))
    }
}

pub fn positive_count(name: &str, v: i64) -> Result<usize, CliError> {
    if v < 1 {
        return Err(CliError::config(format!("{name} must be >= 1, got {v}")));
    }
    Ok(v as usize)
}

pub fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(CliError::config(format!("{name} must be positive, got {v}")));
    }
    Ok(v)
}
