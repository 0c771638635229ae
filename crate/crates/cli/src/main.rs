//! `walshfilter`: reproducible filter-design and noise-simulation workflows.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;
mod parse;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "walshfilter", version, about = "Walsh-modulated qubit gates: filter functions, synthesis and noise simulation")]
struct Cli {
    /// JSON file with parameters for the command; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "walshfilter-out")]
    out: PathBuf,
    /// Worker threads for the inner parallel loops.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Serialize, Default)]
pub struct GateFlags {
    /// Gate kind (primitive, sk1, bb1, p2, b2, c1, c2, wamf, wpmf, uwmf, w1, w2).
    #[arg(long, visible_alias = "gate")]
    pub kind: Option<String>,
    /// Target rotation angle, e.g. `pi` or `pi/2`.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,
    /// Phase offset of the whole gate.
    #[arg(long, allow_hyphen_values = true)]
    pub phi0: Option<String>,
    /// Duration over which Walsh-modulated gates are defined.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Rabi-rate limit, e.g. `pi`.
    #[arg(long)]
    pub rabi_max: Option<String>,
    /// Walsh coefficient X0 (rotation rate).
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<String>,
    /// Walsh coefficient X3.
    #[arg(long, allow_hyphen_values = true)]
    pub x3: Option<f64>,
    /// Further Walsh coefficients as `k=value,...`.
    #[arg(long, allow_hyphen_values = true)]
    pub coefficients: Option<String>,
    /// Segment envelope: square or gaussian.
    #[arg(long)]
    pub envelope: Option<String>,
    /// Gaussian width as a fraction of the segment.
    #[arg(long)]
    pub g: Option<f64>,
    /// Substeps per segment for filter functions.
    #[arg(long)]
    pub substeps: Option<usize>,
    /// Synthesis solution JSON providing the Walsh spectrum of a wamf gate.
    #[arg(long)]
    pub solution: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize, Default)]
pub struct NoiseFlags {
    /// Noise quadrature: z (dephasing) or omega (amplitude).
    #[arg(long)]
    pub quadrature: Option<String>,
    /// Comb strength.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Comb power-law exponent.
    #[arg(long)]
    pub p: Option<f64>,
    /// Comb cutoff omega_c / 2 pi.
    #[arg(long)]
    pub cutoff: Option<f64>,
    /// Number of comb teeth.
    #[arg(long)]
    pub teeth: Option<usize>,
    /// Single-tone frequency omega_t / 2 pi; replaces the comb.
    #[arg(long)]
    pub tone: Option<f64>,
    /// Single-tone amplitude.
    #[arg(long)]
    pub tone_amplitude: Option<f64>,
    /// Rescale the strength so the gate has this xi^2.
    #[arg(long)]
    pub xi2: Option<f64>,
    /// Noise spectrum JSON replacing the comb or tone flags.
    #[arg(long)]
    pub noise: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize, Default)]
pub struct SimFlags {
    /// Noise realizations.
    #[arg(long)]
    pub realizations: Option<usize>,
    /// Random seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Largest step as a fraction of the shortest segment.
    #[arg(long)]
    pub dt_fraction: Option<f64>,
    /// population_up or trace_fidelity.
    #[arg(long, value_parser = config::observable)]
    pub observable: Option<String>,
}

#[derive(Args, Debug, Serialize, Default)]
pub struct GridFlags {
    /// Lowest angular frequency, in units of 1/tau.
    #[arg(long)]
    pub lo: Option<f64>,
    /// Highest angular frequency.
    #[arg(long)]
    pub hi: Option<f64>,
    /// Grid points per decade.
    #[arg(long)]
    pub ppd: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a gate and write its segments as JSON.
    Gate {
        #[command(flatten)]
        gate: GateFlags,
    },
    /// Filter functions of one or more gates (comma-separated kinds).
    Ff {
        #[command(flatten)]
        gate: GateFlags,
        #[command(flatten)]
        grid: GridFlags,
    },
    /// Stopband cost of one or more gates.
    Cost {
        #[command(flatten)]
        gate: GateFlags,
        #[command(flatten)]
        flags: commands::CostFlags,
    },
    /// Cost landscape of four-segment WAMFs over (X0, X3).
    Scan {
        #[command(flatten)]
        flags: commands::ScanFlags,
    },
    /// Nelder-Mead synthesis of Walsh coefficients.
    Synth {
        #[command(flatten)]
        flags: commands::SynthFlags,
    },
    /// Predicted and simulated fidelity against the noise cutoff.
    SweepCutoff {
        #[command(flatten)]
        gate: GateFlags,
        #[command(flatten)]
        noise: NoiseFlags,
        #[command(flatten)]
        sim: SimFlags,
        /// Cutoffs omega_c / 2 pi as a list or lo:hi:n.
        #[arg(long)]
        cutoffs: Option<String>,
    },
    /// Predicted and simulated infidelity against a single-tone frequency.
    SweepTone {
        #[command(flatten)]
        gate: GateFlags,
        #[command(flatten)]
        noise: NoiseFlags,
        #[command(flatten)]
        sim: SimFlags,
        /// Tone frequencies omega_t / 2 pi as a list or lo:hi:n.
        #[arg(long)]
        tones: Option<String>,
    },
    /// Ensemble simulation of one gate under one noise spectrum.
    Simulate {
        #[command(flatten)]
        gate: GateFlags,
        #[command(flatten)]
        noise: NoiseFlags,
        #[command(flatten)]
        sim: SimFlags,
    },
    /// Randomized benchmarking under a dephasing bath.
    Rb {
        #[command(flatten)]
        flags: commands::RbFlags,
        #[command(flatten)]
        noise: NoiseFlags,
    },
    /// Static-offset infidelity exponent.
    Magnus {
        #[command(flatten)]
        gate: GateFlags,
        /// Offset quadrature: z or omega.
        #[arg(long)]
        quadrature: Option<String>,
        /// Offsets as a list or lo:hi:n (log spaced).
        #[arg(long)]
        betas: Option<String>,
    },
}

fn one_line(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let first = e.to_string();
            let first = first.lines().find(|l| !l.trim().is_empty()).unwrap_or("usage error");
            eprintln!("error: usage: {}", one_line(first.trim_start_matches("error:")));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", one_line(&format!("{e:#}")));
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let file = config::load(cli.config.as_deref())?;
    let out = output::Output::new(cli.out);
    match cli.command {
        Command::Gate { gate } => commands::gate(&file, &gate, &out),
        Command::Ff { gate, grid } => commands::ff(&file, &gate, &grid, &out),
        Command::Cost { gate, flags } => commands::cost(&file, &gate, &flags, &out),
        Command::Scan { flags } => commands::scan(&file, &flags, &out),
        Command::Synth { flags } => commands::synth(&file, &flags, &out),
        Command::SweepCutoff { gate, noise, sim, cutoffs } => {
            commands::sweep_cutoff(&file, &gate, &noise, &sim, cutoffs, &out)
        }
        Command::SweepTone { gate, noise, sim, tones } => commands::sweep_tone(&file, &gate, &noise, &sim, tones, &out),
        Command::Simulate { gate, noise, sim } => commands::simulate(&file, &gate, &noise, &sim, &out),
        Command::Rb { flags, noise } => commands::rb(&file, &flags, &noise, &out),
        Command::Magnus { gate, quadrature, betas } => commands::magnus(&file, &gate, quadrature, betas, &out),
    }
}
