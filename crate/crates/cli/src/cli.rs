use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::failure::Failure;

#[derive(Debug, Parser)]
#[command(name = "eopm", version, about = "Phase-modulation spectra and verification sweeps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Output spectrum of a single photon.
    #[command(args_override_self = true)]
    Spectrum(SpectrumArgs),
    /// Orthonormality defects of the transition rows.
    #[command(args_override_self = true)]
    Unitarity(UnitarityArgs),
    /// Closed-form amplitudes against an independent oracle.
    #[command(args_override_self = true)]
    OracleCheck(OracleCheckArgs),
    /// Spectrum for several simultaneous tones.
    #[command(args_override_self = true)]
    Multitone(MultitoneArgs),
    /// Naive and positive-frequency spectra side by side.
    #[command(args_override_self = true)]
    ClassicalCompare(CompareArgs),
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Spectrum(a) => &a.common,
            Command::Unitarity(a) => &a.common,
            Command::OracleCheck(a) => &a.common,
            Command::Multitone(a) => &a.common,
            Command::ClassicalCompare(a) => &a.common,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct Common {
    /// File of `key = value` lines using the flag names; command-line flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Worker threads (0 or absent: one per core). Never changes the output.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ToneArgs {
    /// Modulation index.
    #[arg(long, allow_negative_numbers = true)]
    pub m: f64,
    /// RF phase in radians.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta: f64,
    /// Bias phase in radians.
    #[arg(long = "phi-b", default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi_b: f64,
    /// Frequency step in mode units.
    #[arg(long = "N", default_value_t = 1)]
    pub step: u64,
}

#[derive(Debug, Args)]
pub struct CarrierArgs {
    /// Input mode index.
    #[arg(long, allow_negative_numbers = true)]
    pub n0: Option<i64>,
    /// Input angular frequency; needs --length and --speed instead of --n0.
    #[arg(long)]
    pub omega0: Option<f64>,
    #[arg(long)]
    pub length: Option<f64>,
    #[arg(long)]
    pub speed: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpectrumModel {
    Quantum,
    ClassicalNaive,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub carrier: CarrierArgs,
    #[command(flatten)]
    pub tone: ToneArgs,
    #[arg(long, value_enum, default_value_t = SpectrumModel::Quantum)]
    pub model: SpectrumModel,
    /// Largest probability left outside the quantum row.
    #[arg(long = "tail-tol", default_value = "1e-12")]
    pub tail_tol: f64,
    /// Sideband half-width of the naive model (default: Carson window with 40 extra orders).
    #[arg(long = "q-window")]
    pub q_window: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub carrier: CarrierArgs,
    #[command(flatten)]
    pub tone: ToneArgs,
    #[arg(long = "tail-tol", default_value = "1e-12")]
    pub tail_tol: f64,
    #[arg(long = "q-window")]
    pub q_window: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct UnitarityArgs {
    #[command(flatten)]
    pub tone: ToneArgs,
    #[arg(long = "p0-max", default_value_t = 12)]
    pub p0_max: i64,
    #[arg(long = "q0-max", default_value_t = 12)]
    pub q0_max: i64,
    /// Rows are summed over q = 1..=q-max (default: Carson window plus the larger input index).
    #[arg(long = "q-max")]
    pub q_max: Option<usize>,
    #[arg(long, default_value = "1e-10")]
    pub threshold: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleKind {
    MatrixExp,
    PathSum,
    Adjoint,
}

#[derive(Debug, Args)]
pub struct OracleCheckArgs {
    #[arg(long, default_value = "0.5,2,5", allow_hyphen_values = true)]
    pub m: List<f64>,
    #[arg(long = "N", default_value = "1,3")]
    pub step: List<u64>,
    #[arg(long, default_value = "1,2,7")]
    pub q0: List<i64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta: f64,
    #[arg(long = "phi-b", default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi_b: f64,
    /// Output indices compared: q = 1..=q-max.
    #[arg(long = "q-max", default_value_t = 25)]
    pub q_max: i64,
    /// Residue offset of the matrix-exponential input mode q0*N - r0.
    #[arg(long, default_value_t = 0)]
    pub r0: u64,
    #[arg(long, value_enum, default_value_t = OracleKind::MatrixExp)]
    pub oracle: OracleKind,
    /// Series order: counter-steps for path-sum, extra orders beyond the shift for adjoint.
    #[arg(long = "s-max", default_value_t = 60)]
    pub s_max: u64,
    #[arg(long, default_value = "1e-9")]
    pub tolerance: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MultitoneModel {
    TwoToneFactored,
    LargeCarrier,
    SmallM,
    Oracle,
}

#[derive(Debug, Args)]
pub struct MultitoneArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub n0: i64,
    /// Comma-separated tones, each `m:theta:N`.
    #[arg(long, allow_hyphen_values = true)]
    pub tones: ToneList,
    #[arg(long = "phi-b", default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi_b: f64,
    #[arg(long, value_enum, default_value_t = MultitoneModel::TwoToneFactored)]
    pub model: MultitoneModel,
    #[arg(long = "tail-tol", default_value = "1e-12")]
    pub tail_tol: f64,
    /// Per-tone sideband half-width of the large-carrier model.
    #[arg(long = "q-window")]
    pub q_window: Option<usize>,
    /// Mode window of the exact reference (default: smallest admissible).
    #[arg(long)]
    pub window: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

/// Comma-separated values of one type.
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T>
where
    T::Err: fmt::Display,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let values = s
            .split(',')
            .map(|v| v.trim().parse::<T>().map_err(|e| format!("`{}`: {e}", v.trim())))
            .collect::<Result<Vec<T>, String>>()?;
        Ok(List(values))
    }
}

impl<T: fmt::Display> fmt::Display for List<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToneSpec {
    pub m: f64,
    pub theta: f64,
    pub step: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToneList(pub Vec<ToneSpec>);

impl FromStr for ToneList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let tones = s
            .split(',')
            .map(|tone| {
                let fields: Vec<&str> = tone.trim().split(':').collect();
                let [m, theta, step] = fields[..] else {
                    return Err(format!("tone `{tone}` is not of the form m:theta:N"));
                };
                Ok(ToneSpec {
                    m: m.parse().map_err(|e| format!("tone `{tone}`: {e}"))?,
                    theta: theta.parse().map_err(|e| format!("tone `{tone}`: {e}"))?,
                    step: step.parse().map_err(|e| format!("tone `{tone}`: {e}"))?,
                })
            })
            .collect::<Result<Vec<_>, String>>()?;
        Ok(ToneList(tones))
    }
}

impl fmt::Display for ToneList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|t| format!("{:e}:{:e}:{}", t.m, t.theta, t.step))
            .collect();
        f.write_str(&parts.join(","))
    }
}

/// Value of `--config` if present among the raw arguments.
fn config_path(args: &[String]) -> Option<String> {
    let mut iter = args.iter();
    while let Some(arg) = iter.next() {
        if arg == "--config" {
            return iter.next().cloned();
        }
        if let Some(path) = arg.strip_prefix("--config=") {
            return Some(path.to_string());
        }
    }
    None
}

/// `key = value` pairs; blank lines and `#` comments are skipped.
pub fn read_config(text: &str) -> Result<Vec<(String, String)>, Failure> {
    let mut pairs = Vec::new();
    for (number, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Failure::Config(format!("config line {}: expected key = value", number + 1)));
        };
        let key = key.trim().trim_start_matches("--");
        if key.is_empty() || key == "config" {
            return Err(Failure::Config(format!("config line {}: invalid key `{key}`", number + 1)));
        }
        pairs.push((key.to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

/// Parses the command line after splicing config-file entries in front of
/// the explicit flags, so that the latter take precedence.
pub fn parse(args: Vec<String>) -> Result<Cli, clap::Error> {
    let Some(path) = config_path(&args) else {
        return Cli::try_parse_from(args);
    };
    let spliced = match fs::read_to_string(&path)
        .map_err(|e| Failure::Config(format!("cannot read config {path}: {e}")))
        .and_then(|text| read_config(&text))
    {
        Ok(pairs) if args.len() >= 2 => {
            let mut spliced = args[..2].to_vec();
            for (key, value) in pairs {
                spliced.push(format!("--{key}"));
                spliced.push(value);
            }
            spliced.extend_from_slice(&args[2..]);
            spliced
        }
        Ok(_) => args,
        Err(failure) => {
            return Err(clap::Error::raw(clap::error::ErrorKind::Io, format!("{failure}\n")));
        }
    };
    Cli::try_parse_from(spliced)
}
