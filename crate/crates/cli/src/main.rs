use std::path::PathBuf;
use std::process::ExitCode;

use adiagrover::bounds::SuperNorm;
use adiagrover::experiments::FigureName;
use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod config;

use config::{DephasingKind, Format, KindArg, MethodArg, Param};

/// Configuration or usage problem detected by the front end.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Adiabatic Grover search under energy-basis dephasing.
#[derive(Debug, Parser)]
#[command(name = "adiagrover", version)]
pub struct Cli {
    /// TOML run configuration; command-line flags take precedence
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Output directory [default: out]
    #[arg(long, global = true, value_name = "DIR", env = "ADIAGROVER_OUT")]
    pub out_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate an interpolation schedule as (s, q, dq/ds)
    Schedule(ScheduleArgs),
    /// Integrate the dephasing master equation along a schedule
    Simulate(SimulateArgs),
    /// Evaluate a closed-form bound and print it as JSON
    #[command(subcommand)]
    Bounds(BoundsCommand),
    /// Write the data behind one figure
    Figure(FigureArgs),
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    /// Schedule family
    #[arg(long)]
    pub kind: Option<KindArg>,
    /// Construction of the optimal schedule
    #[arg(long)]
    pub method: Option<MethodArg>,
    /// Number of qubits
    #[arg(long)]
    pub n: Option<u32>,
    /// Dephasing rate the optimal schedule is built for (number or `gmin`)
    #[arg(long)]
    pub gamma: Option<Param>,
    /// Number of rows
    #[arg(long, default_value_t = 1025)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Number of qubits
    #[arg(long)]
    pub n: Option<u32>,
    /// Dephasing model
    #[arg(long)]
    pub dephasing: Option<DephasingKind>,
    /// Constant dephasing rate (number, `gmin` or a multiple such as `0.1gmin`)
    #[arg(long)]
    pub gamma: Option<Param>,
    /// Gap-tracking coefficient (number or `max`)
    #[arg(long)]
    pub kappa: Option<Param>,
    /// Schedule family
    #[arg(long)]
    pub schedule: Option<KindArg>,
    /// Construction of the optimal schedule
    #[arg(long)]
    pub method: Option<MethodArg>,
    /// Rate the optimal schedule is built for [default: the bath rate, or gmin]
    #[arg(long)]
    pub schedule_gamma: Option<Param>,
    /// Total time (number or `rc`)
    #[arg(long = "T", value_name = "T")]
    pub total_time: Option<Param>,
    /// Adiabaticity constant used by `--T rc` [default: 0.25]
    #[arg(long)]
    pub c: Option<f64>,
    /// Relative tolerance of the integrator
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Absolute tolerance of the integrator
    #[arg(long)]
    pub abs_tol: Option<f64>,
    /// Number of output samples in s
    #[arg(long)]
    pub samples: Option<usize>,
    /// Integrate in the full 2^n-dimensional space
    #[arg(long)]
    pub full: bool,
    /// Trajectory file format
    #[arg(long)]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand)]
pub enum BoundsCommand {
    /// Minimal leading-order leakage at time T
    Imin {
        /// Number of qubits
        #[arg(long)]
        n: Option<u32>,
        /// Dephasing rate (number or `gmin`)
        #[arg(long)]
        gamma: Option<Param>,
        /// Total time
        #[arg(long = "T", value_name = "T")]
        total_time: f64,
    },
    /// Minimal runtime for a target leakage, with the asymptotic regime form
    Tmin {
        /// Number of qubits
        #[arg(long)]
        n: Option<u32>,
        /// Dephasing rate (number or `gmin`)
        #[arg(long)]
        gamma: Option<Param>,
        /// Target leakage (one minus the target fidelity)
        #[arg(long)]
        target: f64,
    },
    /// Largest dephasing rate that still resolves the gap at tolerance eps
    GammaMax {
        /// Spectral gap
        #[arg(long)]
        gap: f64,
        /// Measurement tolerance, at most 1/e
        #[arg(long)]
        eps: f64,
    },
    /// Open-system adiabatic constant C
    Cbound {
        /// Number of qubits
        #[arg(long)]
        n: Option<u32>,
        /// Constant rate (number or `gmin`)
        #[arg(long, conflicts_with = "a")]
        gamma: Option<Param>,
        /// Power-law rate N^(-a/2)
        #[arg(long)]
        a: Option<f64>,
        /// Schedule family
        #[arg(long)]
        schedule: Option<KindArg>,
        /// Construction of the optimal schedule
        #[arg(long)]
        method: Option<MethodArg>,
        /// Superoperator norm
        #[arg(long, default_value = "spectral")]
        norm: NormArg,
        /// Upper end of the schedule interval
        #[arg(long, default_value_t = 1.0)]
        s_end: f64,
    },
    /// Mandelstam-Tamm path time and the Roland-Cerf ratio
    Qsl {
        /// Number of qubits
        #[arg(long)]
        n: Option<u32>,
        /// Adiabaticity constant of the Roland-Cerf schedule
        #[arg(long, default_value_t = 0.25)]
        eps_adiab: f64,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum NormArg {
    Spectral,
    Frobenius,
    InducedTrace,
}

impl From<NormArg> for SuperNorm {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::Spectral => SuperNorm::Spectral,
            NormArg::Frobenius => SuperNorm::Frobenius,
            NormArg::InducedTrace => SuperNorm::InducedTrace,
        }
    }
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    /// fig1a, fig1b, fig1c, fig2, fig3, fig4 or fig5
    #[arg(value_parser = parse_figure)]
    pub name: FigureName,
}

fn parse_figure(s: &str) -> Result<FigureName, String> {
    s.parse().map_err(|e: adiagrover::Error| e.to_string())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<adiagrover::Error>() {
        Some(
            adiagrover::Error::Domain(_)
            | adiagrover::Error::Config(_)
            | adiagrover::Error::Constraint(_)
            | adiagrover::Error::DimensionCap { .. },
        ) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
