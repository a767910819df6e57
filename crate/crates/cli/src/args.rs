use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Region-of-attraction certificates for swing-equation oscillator networks.
///
/// Reals accept plain numbers or multiples of pi such as `pi/4`, `3pi/19`
/// and `2*pi/5`. Set SWING_ROA_THREADS to cap scan workers.
#[derive(Debug, Parser)]
#[command(name = "swing-roa", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the certificate for one initial state; exit 0 on pass, 1 on
    /// fail, 2 on input error.
    Check(CheckArgs),
    /// Integrate one trajectory and report synchronization.
    Simulate(SimulateArgs),
    /// Scan a grid of initial phase pairs for a two-oscillator system.
    Scan(ScanArgs),
    /// Emit a seeded random system file.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct StateArgs {
    /// Initial phases, comma separated; defaults to all zeros.
    #[arg(long, value_parser = parse_real, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta0: Option<Vec<f64>>,
    /// Initial frequencies, comma separated, or `derive` to compute them
    /// from the phases.
    #[arg(long, allow_hyphen_values = true)]
    pub omega0: Option<String>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub system: PathBuf,
    #[arg(long, value_parser = parse_real)]
    pub d0: f64,
    /// `auto`, a value, or `rel:<f>` for a position inside the interval.
    #[arg(long, default_value = "auto")]
    pub eps: String,
    #[command(flatten)]
    pub state: StateArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub system: PathBuf,
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 200.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Keep every k-th step in the CSV.
    #[arg(long, default_value_t = 100)]
    pub record_every: usize,
    /// `ε` of the energy channel: `auto`, a value, or `rel:<f>` at `--d0`;
    /// falls back to 1 when no admissible value exists.
    #[arg(long, default_value = "auto")]
    pub eps: String,
    #[arg(long, value_parser = parse_real, default_value = "pi/4")]
    pub d0: f64,
    /// Trajectory CSV path; stdout when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Sync report JSON path; stdout when the CSV goes to a file, stderr
    /// otherwise.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Cert,
    Sim,
    Both,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    pub system: PathBuf,
    #[arg(long, value_parser = parse_real, value_delimiter = ',', default_value = "pi/4")]
    pub d0_list: Vec<f64>,
    /// `auto`, comma-separated values, or `rel:<f1>,<f2>,...`.
    #[arg(long, default_value = "auto")]
    pub eps_list: String,
    #[arg(long, default_value_t = 100)]
    pub res: usize,
    #[arg(long, value_enum, default_value_t = Mode::Cert)]
    pub mode: Mode,
    #[arg(long, value_parser = parse_real, default_value = "0", allow_hyphen_values = true)]
    pub theta_min: f64,
    #[arg(long, value_parser = parse_real, default_value = "pi")]
    pub theta_max: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 200.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Grid CSV path; stdout when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Metadata JSON path; defaults to `<output>.json` when `--output` is
    /// given, stderr otherwise.
    #[arg(long)]
    pub meta: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    /// Use `m ∈ (0.10, 0.15)`, `d ∈ (0.30, 0.40)`, `a = 0.2`; conflicts with
    /// explicit ranges.
    #[arg(long, conflicts_with_all = ["m_range", "d_range", "coupling"])]
    pub paper_defaults: bool,
    #[arg(long, value_parser = parse_range)]
    pub m_range: Option<[f64; 2]>,
    #[arg(long, value_parser = parse_range)]
    pub d_range: Option<[f64; 2]>,
    #[arg(long)]
    pub coupling: Option<f64>,
    /// Norm of the zero-sum forcing; defaults to half the forcing threshold
    /// at `D₀ = π/4` with automatic `ε`.
    #[arg(long)]
    pub omega_norm: Option<f64>,
}

pub fn parse_real(s: &str) -> Result<f64, String> {
    let t = s.trim().to_ascii_lowercase().replace(' ', "");
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a, Some(b)),
        None => (t.as_str(), None),
    };
    let coeff = match num.strip_suffix("pi") {
        Some("") => 1.0,
        Some(c) => c
            .trim_end_matches('*')
            .parse::<f64>()
            .map_err(|_| format!("cannot parse `{s}` as a real"))?,
        None => return Err(format!("cannot parse `{s}` as a real")),
    };
    let den = match den {
        Some(d) => d
            .parse::<f64>()
            .map_err(|_| format!("cannot parse `{s}` as a real"))?,
        None => 1.0,
    };
    Ok(coeff * PI / den)
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(parse_real).collect()
}

fn parse_range(s: &str) -> Result<[f64; 2], String> {
    match parse_list(s)?.as_slice() {
        &[lo, hi] => Ok([lo, hi]),
        _ => Err(format!("`{s}` is not a `lo,hi` pair")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals() {
        assert_eq!(parse_real("0.25").unwrap(), 0.25);
        assert_eq!(parse_real("pi").unwrap(), PI);
        assert_eq!(parse_real("pi/4").unwrap(), PI / 4.0);
        assert_eq!(parse_real("3pi/19").unwrap(), 3.0 * PI / 19.0);
        assert_eq!(parse_real("2*pi/5").unwrap(), 2.0 * PI / 5.0);
        assert!(parse_real("tau").is_err());
        assert_eq!(parse_list("1, pi/2").unwrap(), vec![1.0, PI / 2.0]);
        assert!(parse_range("1").is_err());
    }
}
