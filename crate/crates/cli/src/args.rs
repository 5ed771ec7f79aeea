use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use interwalk::engine::DEFAULT_N_TRAJ;
use interwalk::evolution::DEFAULT_EXACT_CAP;
use interwalk::{Coin, EngineOptions};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "interwalk", version, about = "Interpolating walks between a persistent random walk and a quantum walk")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Position distribution after t steps.
    Simulate(SimulateArgs),
    /// Scaled step density against the normal-mixture limit, with KS distances.
    Limit(LimitArgs),
    /// Unperturbed spectrum and second-order eigenvalue coefficient sweep.
    Spectral(SpectralArgs),
    /// Characteristic function of X_s/s with p = gamma/s against its closed form.
    Poisson(PoissonArgs),
    /// List the registered simulation engines.
    Engines,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Args)]
pub struct Common {
    /// `hadamard`, or eight comma-separated reals: re/im of a, b, c, d.
    #[arg(long, default_value = "hadamard", allow_hyphen_values = true)]
    pub coin: String,

    #[arg(long, env = "INTERWALK_OUT", default_value = ".")]
    pub out_dir: PathBuf,

    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct EngineArgs {
    /// auto, exact, mc or qw-pure.
    #[arg(long, default_value = "auto")]
    pub engine: String,

    #[arg(long, default_value_t = DEFAULT_N_TRAJ)]
    pub n_traj: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Largest t the exact engine accepts; `auto` switches to MC above it.
    #[arg(long, default_value_t = DEFAULT_EXACT_CAP)]
    pub exact_cap: usize,
}

impl EngineArgs {
    pub fn options(&self) -> EngineOptions {
        EngineOptions {
            n_traj: self.n_traj,
            seed: self.seed,
            exact_cap: self.exact_cap,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub engine: EngineArgs,

    #[arg(long)]
    pub p: f64,

    #[arg(long)]
    pub t: usize,

    /// Also write E[e^{iξX_t}] on this grid, `start:stop:count`.
    #[arg(long, allow_hyphen_values = true)]
    pub xi: Option<String>,

    #[arg(long, default_value = "distribution")]
    pub name: String,
}

#[derive(Debug, Args)]
pub struct LimitArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub engine: EngineArgs,

    /// Comma-separated.
    #[arg(long, default_value = "0.5")]
    pub p: String,

    /// Comma-separated.
    #[arg(long, default_value = "100")]
    pub t: String,
}

#[derive(Debug, Args)]
pub struct SpectralArgs {
    #[command(flatten)]
    pub common: Common,

    #[arg(long, default_value = "0.3,0.7,1.1,2.3", allow_hyphen_values = true)]
    pub k: String,

    #[arg(long, default_value = "0.5,1,2", allow_hyphen_values = true)]
    pub xi: String,

    /// p = 0 runs only the unimodularity check.
    #[arg(long, default_value = "0.2,0.5,0.8")]
    pub p: String,

    #[arg(long, default_value_t = interwalk::spectral::DEFAULT_EPS)]
    pub eps: f64,

    #[arg(long, default_value_t = interwalk::spectral::DEFAULT_LADDER_LEN)]
    pub ladder: usize,
}

#[derive(Debug, Args)]
pub struct PoissonArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub engine: EngineArgs,

    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,

    /// Comma-separated final times; empty writes only the closed form.
    #[arg(long, default_value = "1000")]
    pub s: String,

    #[arg(long, default_value = "-10:10:81", allow_hyphen_values = true)]
    pub xi: String,

    #[arg(long, default_value_t = interwalk::poisson::DEFAULT_NK)]
    pub n_k: usize,

    /// Also write the dispersion table on this many k nodes.
    #[arg(long)]
    pub dispersion: Option<usize>,
}

pub fn parse_coin(text: &str) -> Result<Coin, CliError> {
    match text.trim().to_ascii_lowercase().as_str() {
        "hadamard" | "h" => return Ok(Coin::hadamard()),
        _ => {}
    }
    let vals = parse_list::<f64>(text, "coin")?;
    let arr: [f64; 8] = vals.try_into().map_err(|v: Vec<f64>| {
        CliError::Config(format!(
            "coin needs `hadamard` or 8 reals, got {} values",
            v.len()
        ))
    })?;
    Ok(Coin::from_reals(arr)?)
}

pub fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| CliError::Config(format!("{what}: cannot parse `{s}`")))
        })
        .collect()
}

/// `start:stop:count`, endpoints included.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || CliError::Config(format!("grid `{text}` is not start:stop:count"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let start: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let stop: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if count == 0 || !start.is_finite() || !stop.is_finite() {
        return Err(bad());
    }
    Ok(interwalk::fourier::linspace(start, stop, count))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("-1:1:3").unwrap(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(parse_grid("2:2:1").unwrap(), vec![2.0]);
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("0:1:0").is_err());
    }

    #[test]
    fn coins() {
        assert_eq!(parse_coin("Hadamard").unwrap(), Coin::hadamard());
        let h = Coin::hadamard().to_reals().map(|v| v.to_string()).join(",");
        assert_eq!(parse_coin(&h).unwrap(), Coin::hadamard());
        assert!(matches!(parse_coin("1,0,0"), Err(CliError::Config(_))));
        assert!(matches!(parse_coin("1,0,1,0,1,0,1,0"), Err(CliError::Core(_))));
    }
}
