use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "fading-ic", version, about = "Finite-blocklength analysis of infinite constellations over fading channels")]
pub struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Write the table here (plus a `.manifest.json` sidecar) instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for Monte Carlo batches; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Flat `key = value` file; explicit flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Capacity, dispersion and normal-approximation NLD.
    Dispersion(DispersionArgs),
    /// Monte Carlo sphere-packing, DT and typicality bounds.
    Bounds(BoundsArgs),
    /// Plot data for one figure of the registry.
    Figures(FiguresArgs),
    /// Random-coding exponent curves.
    Exponent(ExponentArgs),
    /// Run the acceptance checks and print a pass/fail table.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fading {
    Awgn,
    Rayleigh,
    Nakagami,
    Tabulated,
}

#[derive(Debug, Clone, Args)]
pub struct FadingArgs {
    #[arg(long, value_enum, default_value_t = Fading::Rayleigh)]
    pub fading: Fading,

    /// Nakagami shape parameter.
    #[arg(long)]
    pub m: Option<f64>,

    /// Two-column CSV (h, density) for a tabulated law.
    #[arg(long)]
    pub fading_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct McArgs {
    /// Monte Carlo sample count; scientific notation such as 1e6 is accepted.
    #[arg(long, value_parser = parse_count, default_value = "1e5")]
    pub samples: u64,

    /// Defaults to $FADING_IC_SEED, then 1.
    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long, default_value_t = fading_ic::monte_carlo::engine::DEFAULT_BATCHES)]
    pub batches: u32,

    #[arg(long, default_value_t = 0.95)]
    pub confidence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DispersionDomain {
    Real,
    Complex,
    Mimo,
    Parallel,
    Memory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Process {
    /// Independent draws from `--fading`.
    Iid,
    Ar1,
    Arma,
}

#[derive(Debug, Clone, Args)]
pub struct DispersionArgs {
    #[arg(long, value_enum)]
    pub domain: DispersionDomain,

    #[command(flatten)]
    pub fading: FadingArgs,

    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,

    #[arg(long)]
    pub t: Option<u32>,

    #[arg(long)]
    pub r: Option<u32>,

    /// Number of parallel channels.
    #[arg(long)]
    pub l: Option<u32>,

    #[arg(long, value_enum, default_value_t = Process::Iid)]
    pub process: Process,

    /// AR(1) coefficient of the underlying Gaussian process.
    #[arg(long)]
    pub a: Option<f64>,

    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub ar: Vec<f64>,

    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub ma: Vec<f64>,

    /// Block lengths for the normal approximation.
    #[arg(long, value_delimiter = ',', value_parser = parse_count)]
    pub n: Vec<u64>,

    #[arg(long, value_delimiter = ',')]
    pub eps: Vec<f64>,

    #[command(flatten)]
    pub mc: McArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundKind {
    Sp,
    Dt,
    Typicality,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundsDomain {
    Real,
    Complex,
    Mimo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Estimator {
    Indicator,
    Conditional,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    #[arg(long, value_enum)]
    pub bound: BoundKind,

    /// Channel for the sphere-packing bound.
    #[arg(long, value_enum, default_value_t = BoundsDomain::Real)]
    pub domain: BoundsDomain,

    #[command(flatten)]
    pub fading: FadingArgs,

    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,

    #[arg(long)]
    pub t: Option<u32>,

    #[arg(long)]
    pub r: Option<u32>,

    #[arg(long, value_parser = parse_count)]
    pub n: u64,

    /// Normalized log density, nats.
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,

    /// Codebook size for the DT bound.
    #[arg(long = "M")]
    pub codewords: Option<f64>,

    /// Target error probability; turns the bound into an NLD.
    #[arg(long)]
    pub eps: Option<f64>,

    /// DT cube side over σ; defaults to the power-law rule.
    #[arg(long)]
    pub a_over_sigma: Option<f64>,

    /// Fixed decoding radius for the typicality bound.
    #[arg(long)]
    pub radius: Option<f64>,

    #[arg(long, value_enum, default_value_t = Estimator::Indicator)]
    pub estimator: Estimator,

    #[command(flatten)]
    pub mc: McArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FiguresArgs {
    /// Figure name; run with an unknown name to list the registry.
    pub name: String,

    /// Degrees of freedom for log-chi2-error.
    #[arg(long, value_parser = parse_count)]
    pub n: Option<u64>,

    /// Transmit antennas for mimo-vs-r.
    #[arg(long)]
    pub t: Option<u32>,

    #[command(flatten)]
    pub mc: McArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExponentDomain {
    IcScalar,
    GaussianScalar,
    Mimo,
    MimoUniform,
}

#[derive(Debug, Clone, Args)]
pub struct ExponentArgs {
    #[arg(long, value_enum)]
    pub domain: ExponentDomain,

    #[command(flatten)]
    pub fading: FadingArgs,

    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,

    #[arg(long)]
    pub snr: Option<f64>,

    #[arg(long)]
    pub t: Option<u32>,

    #[arg(long)]
    pub r: Option<u32>,

    /// Number of grid points.
    #[arg(long, default_value_t = 64)]
    pub grid: usize,

    #[command(flatten)]
    pub mc: McArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Run only these criteria.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<u32>,
}

/// Accepts plain integers and scientific notation such as `1e6`.
pub fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if x < 0.0 || x.fract() != 0.0 || x > u64::MAX as f64 {
        return Err(format!("`{s}` is not a nonnegative integer"));
    }
    Ok(x as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(parse_count("1e6"), Ok(1_000_000));
        assert_eq!(parse_count("2.5e3"), Ok(2500));
        assert_eq!(parse_count("42"), Ok(42));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
        assert!(parse_count("x").is_err());
    }

    #[test]
    fn cli_is_well_formed() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
