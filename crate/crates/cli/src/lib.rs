//! The `kirkwood` command line tool. Every subcommand writes its tables
//! (CSV or JSON), a JSON manifest beside each table, and SVG plots where a
//! curve makes sense.

mod commands;
pub mod output;
pub mod svg;

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use kirkwood::return_map::Section;

#[derive(Debug, Parser)]
#[command(name = "kirkwood", version, about = "Mean motion resonances of the restricted three-body problem")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum SectionArg {
    #[value(name = "0")]
    #[serde(rename = "0")]
    Zero,
    #[value(name = "pi")]
    #[serde(rename = "pi")]
    Pi,
}

impl From<SectionArg> for Section {
    fn from(s: SectionArg) -> Self {
        match s {
            SectionArg::Zero => Section::Zero,
            SectionArg::Pi => Section::Pi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Resonance `p` (the asteroid makes `q` revolutions while the planet makes `p`).
    #[arg(long, global = true, default_value_t = 1)]
    pub p: u32,
    #[arg(long, global = true, default_value_t = 3)]
    pub q: u32,
    /// Eccentricity fixing the energy of the section.
    #[arg(long, global = true, default_value_t = 0.1)]
    pub e: f64,
    /// Mass ratio; 1e-5 by default, 1e-3 for `table1`.
    #[arg(long, global = true)]
    pub mu: Option<f64>,
    /// Section `g = 0` or `g = π`.
    #[arg(long, global = true, value_enum, default_value_t = SectionArg::Zero)]
    pub section: SectionArg,
    /// Sample count for curves, FFT side for `fourier`.
    #[arg(long, global = true, default_value_t = 512)]
    pub grid: usize,
    /// Absolute quadrature tolerance.
    #[arg(long, global = true, default_value_t = 1e-11)]
    pub tol: f64,
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// φ, ψ, χ over one period; `--sweep` overlays φ for several eccentricities.
    Phi {
        #[arg(long, value_delimiter = ',')]
        sweep: Vec<f64>,
    },
    /// The separatrix expansion `u`, `v` and the manifold graph.
    Separatrix {
        /// Index of the hyperbolic point at `jπ/p`; the first one by default.
        #[arg(long)]
        j: Option<i32>,
    },
    /// Fixed points of the scaled map, optionally refined on the full flow.
    FixedPoints {
        #[arg(long)]
        numeric: bool,
    },
    /// Homoclinic point on the symmetry line, optionally from grown manifolds.
    Homoclinic {
        #[arg(long)]
        numeric: bool,
        #[arg(long, default_value_t = 16)]
        seeds: usize,
    },
    /// Eccentricities below which the resonant periodic points are lost.
    Table1,
    /// Onset eccentricities of asymmetric librations for `p:1` resonances.
    Table2,
    /// Fourier coefficients of the disturbing function and `c*` checks.
    Fourier {
        #[arg(long, default_value_t = 10)]
        mmax: usize,
        #[arg(long, default_value_t = 30)]
        nmax: usize,
    },
    /// Error-order, symmetry and conservation checks against the full flow.
    Validate,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Phi { .. } => "phi",
            Command::Separatrix { .. } => "separatrix",
            Command::FixedPoints { .. } => "fixed-points",
            Command::Homoclinic { .. } => "homoclinic",
            Command::Table1 => "table1",
            Command::Table2 => "table2",
            Command::Fourier { .. } => "fourier",
            Command::Validate => "validate",
        }
    }

    fn uses_resonance(&self) -> bool {
        !matches!(self, Command::Table1 | Command::Table2)
    }

    fn default_mu(&self) -> f64 {
        if matches!(self, Command::Table1) { 1e-3 } else { 1e-5 }
    }
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numeric(kirkwood::Error),
    Io(std::io::Error),
    /// Checks ran but some did not pass.
    Validation(Vec<String>),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Numeric(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "{e}"),
            Failure::Validation(names) => write!(f, "checks failed: {}", names.join(", ")),
        }
    }
}

impl From<kirkwood::Error> for Failure {
    fn from(e: kirkwood::Error) -> Self {
        match e {
            kirkwood::Error::InvalidParameter(m) => Failure::Usage(m),
            other => Failure::Numeric(other),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "usage",
            Failure::Numeric(e) => e.kind(),
            Failure::Io(_) => "io",
            Failure::Validation(_) => "validation_failed",
        }
    }

    pub fn to_json(&self) -> String {
        json!({ "error": self.kind(), "message": self.to_string() }).to_string()
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// Parameters after defaults and checks.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub p: u32,
    pub q: u32,
    pub e: f64,
    pub mu: f64,
    pub section: SectionArg,
    pub grid: usize,
    pub tol: f64,
    pub out: PathBuf,
    pub format: Format,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, Failure> {
        let c = cli.common;
        let mu = c.mu.unwrap_or_else(|| cli.command.default_mu());
        let usage = |m: String| Err(Failure::Usage(m));
        if cli.command.uses_resonance() {
            if c.p == 0 || c.q == 0 || c.p == c.q || gcd(c.p, c.q) != 1 {
                return usage(format!("need coprime positive p != q, got p = {}, q = {}", c.p, c.q));
            }
            if !(c.e > 0.0 && c.e < 1.0) {
                return usage(format!("--e must lie in (0, 1), got {}", c.e));
            }
        }
        if !(mu > 0.0 && mu < 0.5) {
            return usage(format!("--mu must lie in (0, 0.5), got {mu}"));
        }
        if !(8..=1 << 14).contains(&c.grid) {
            return usage(format!("--grid must lie in [8, 16384], got {}", c.grid));
        }
        if !(c.tol > 0.0 && c.tol <= 1e-3) {
            return usage(format!("--tol must lie in (0, 1e-3], got {}", c.tol));
        }
        if let Command::Phi { sweep } = &cli.command {
            if let Some(bad) = sweep.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
                return usage(format!("--sweep eccentricities must lie in (0, 1), got {bad}"));
            }
        }
        if let Command::Homoclinic { seeds, .. } = &cli.command {
            if *seeds < 2 {
                return usage("--seeds must be at least 2".into());
            }
        }
        Ok(Self {
            command: cli.command,
            p: c.p,
            q: c.q,
            e: c.e,
            mu,
            section: c.section,
            grid: c.grid,
            tol: c.tol,
            out: c.out,
            format: c.format,
        })
    }

    fn manifest(&self) -> serde_json::Value {
        json!({
            "tool": "kirkwood",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command.name(),
            "arguments": &self.command,
            "parameters": {
                "p": self.p,
                "q": self.q,
                "e": self.e,
                "mu": self.mu,
                "section": self.section,
                "grid": self.grid,
            },
            "tolerances": {
                "quadrature": self.tol,
            },
        })
    }
}

/// Runs one command and returns the files written.
pub fn run(config: &RunConfig) -> Result<Vec<PathBuf>, Failure> {
    let mut out = output::Output::new(&config.out, config.format, config.manifest())?;
    commands::dispatch(config, &mut out)?;
    Ok(out.written)
}
