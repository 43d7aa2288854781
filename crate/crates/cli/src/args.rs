use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gkdv_waves::quadrature::DEFAULT_REL_TOL;

#[derive(Debug, Parser)]
#[command(name = "gkdv", version, about = "Abelian integrals, wave speeds and limit cycles for perturbed gKdV traveling waves")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output format; defaults to csv for curve, simulate, portrait and verify, json for cycle
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Write data here (atomically) instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Relative tolerance of the Abelian-integral quadrature
    #[arg(long, global = true, default_value_t = DEFAULT_REL_TOL)]
    pub tol_quad: f64,

    /// Relative tolerance of the ODE integrator (absolute is 1% of it)
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol_ode: f64,

    /// Seed for randomized property sampling
    #[arg(long, global = true, default_value_t = 0x5eed)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate A0, An, F_n and c0 over the periodic annulus
    Curve {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(2..))]
        grid: u64,
    },
    /// Locate the limit cycle of the perturbed system by its return map
    Cycle {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], default_values = ["0.1", "0.9"], value_parser = parse_real)]
        bracket: Vec<f64>,
        /// Central-difference step for the stability multiplier
        #[arg(long, default_value_t = 1e-5)]
        fd_step: f64,
    },
    /// Integrate one trajectory of the perturbed system
    Simulate {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, num_args = 2, value_names = ["U", "Y"], allow_hyphen_values = true, value_parser = parse_real)]
        start: Vec<f64>,
        #[arg(long, default_value = "300", value_parser = parse_real)]
        span: f64,
        /// Sample the dense output every DT instead of recording integrator steps
        #[arg(long, value_parser = parse_real)]
        dt: Option<f64>,
    },
    /// Run the numerical property suite
    Verify {
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        n_min: u32,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..))]
        n_max: u32,
        #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(2..))]
        grid: u64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Sample level curves and fixed points of the unperturbed system
    Portrait {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        /// Comma-separated energies in [p1, 0]
        #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_real)]
        levels: Vec<f64>,
        /// Samples per half curve
        #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(2..))]
        points: u64,
    },
}

#[derive(Debug, Clone, Copy, Args)]
pub struct SystemArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub n: u32,
    #[arg(long = "eps", value_parser = parse_real)]
    pub epsilon: f64,
    /// Wave speed; fractions such as 100000/388851 are accepted
    #[arg(long, value_parser = parse_real)]
    pub c: f64,
}

/// A decimal number or a fraction `p/q`.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let value = match s.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|e| format!("bad numerator in {s:?}: {e}"))?;
            let den: f64 = den.trim().parse().map_err(|e| format!("bad denominator in {s:?}: {e}"))?;
            if den == 0.0 {
                return Err(format!("zero denominator in {s:?}"));
            }
            num / den
        }
        None => s.parse().map_err(|e| format!("not a number {s:?}: {e}"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("not a finite number: {s:?}"))
    }
}
