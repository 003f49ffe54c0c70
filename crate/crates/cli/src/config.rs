//! Command-line flags, the optional TOML config file, and their merge into a
//! validated [`RunConfig`]. Flags win over the file; the file wins over the
//! `PTPU_OUT_DIR` environment variable for the output directory.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ptpu_core::exact::Surd;
use ptpu_core::fock::MetricName;
use ptpu_core::ModelParams;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const OUT_DIR_ENV: &str = "PTPU_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "ptpu-out";
pub const DEFAULT_SEED: u64 = 20240917;

#[derive(Debug, Parser)]
#[command(name = "ptpu", version, about = "Two-mode PT-pseudo-Hermitian oscillator laboratory")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory [default: $PTPU_OUT_DIR, then ./ptpu-out].
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Accepts decimals, `N/M` and `sqrt(N)` forms.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub a1: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub a2: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub a3: Option<String>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Regime, squared frequencies and (Case I) the derived scalars.
    Classify,
    /// Truncated-Fock convergence study against the level lattices.
    Spectrum {
        /// Truncations, comma separated.
        #[arg(long, value_delimiter = ',')]
        n_max: Option<Vec<usize>>,
        /// Number of lowest eigenvalues tracked.
        #[arg(long)]
        k: Option<usize>,
        /// Replace a3 by 0 (Hermitian control).
        #[arg(long)]
        hermitian_control: bool,
    },
    /// Exact classical trajectory and the fourth-order equation checks.
    Dynamics {
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        /// Real initial point x1,x2,p1,p2.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        initial: Option<Vec<f64>>,
    },
    /// Symmetry ledger, diagonalization pipeline and metric identities.
    Verify {
        #[arg(long)]
        n_max: Option<usize>,
        /// Restrict to checks tied to these metrics (P, P1, P2, T, PT).
        #[arg(long, value_delimiter = ',')]
        metric: Option<Vec<String>>,
        /// Add i*eps*x1 to H (negative control).
        #[arg(long)]
        perturb: bool,
    },
    /// Summarize previously written run reports.
    Report {
        /// Run-report files [default: run_*.json in the output directory].
        files: Vec<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Spectrum { .. } => "spectrum",
            Command::Dynamics { .. } => "dynamics",
            Command::Verify { .. } => "verify",
            Command::Report { .. } => "report",
        }
    }
}

/// Parameter values in a config file: numbers or expression strings.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Scalar {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Scalar {
    fn text(self) -> String {
        match self {
            Scalar::Int(n) => n.to_string(),
            // Display never uses exponent notation, which the exact parser
            // does not accept.
            Scalar::Float(x) => x.to_string(),
            Scalar::Text(s) => s,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    out_dir: Option<PathBuf>,
    #[serde(default)]
    params: FileParams,
    #[serde(default)]
    spectrum: FileSpectrum,
    #[serde(default)]
    dynamics: FileDynamics,
    #[serde(default)]
    verify: FileVerify,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileParams {
    a1: Option<Scalar>,
    a2: Option<Scalar>,
    a3: Option<Scalar>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileSpectrum {
    n_max: Option<Vec<usize>>,
    k: Option<usize>,
    hermitian_control: Option<bool>,
    drift_tol: Option<f64>,
    imag_tol: Option<f64>,
    match_rel_tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileDynamics {
    t_end: Option<f64>,
    points: Option<usize>,
    initial: Option<[f64; 4]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileVerify {
    n_max: Option<usize>,
    metrics: Option<Vec<String>>,
    perturb: Option<bool>,
    reality_samples: Option<usize>,
    expectation_samples: Option<usize>,
    times: Option<Vec<f64>>,
    control_strength: Option<f64>,
}

/// The parameter expressions as given, echoed into every report.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ParamInputs {
    pub a1: Option<String>,
    pub a2: Option<String>,
    pub a3: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumSettings {
    pub n_max: Vec<usize>,
    pub k: usize,
    pub hermitian_control: bool,
    pub drift_tol: f64,
    pub imag_tol: f64,
    pub match_rel_tol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DynamicsSettings {
    pub t_end: f64,
    pub points: usize,
    pub initial: [f64; 4],
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifySettings {
    pub n_max: usize,
    pub metrics: Option<Vec<MetricName>>,
    pub perturb: bool,
    pub reality_samples: usize,
    pub expectation_samples: usize,
    pub times: Vec<f64>,
    pub control_strength: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub params: ParamInputs,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub spectrum: SpectrumSettings,
    pub dynamics: DynamicsSettings,
    pub verify: VerifySettings,
    #[serde(skip)]
    pub report_files: Vec<PathBuf>,
}

impl RunConfig {
    /// Config echo for the run report: shared fields plus the section of
    /// the active command.
    pub fn echo(&self) -> serde_json::Value {
        let mut v = serde_json::json!({
            "command": self.command,
            "params": self.params,
            "seed": self.seed,
            "out_dir": self.out_dir,
        });
        let section = match self.command.as_str() {
            "spectrum" => serde_json::to_value(&self.spectrum).ok(),
            "dynamics" => serde_json::to_value(&self.dynamics).ok(),
            "verify" => serde_json::to_value(&self.verify).ok(),
            _ => None,
        };
        if let Some(s) = section {
            v[self.command.as_str()] = s;
        }
        v
    }

    /// Builds the model triple, parsing each value exactly. The Hermitian
    /// control replaces `a₃` by zero.
    pub fn model_params(&self) -> Result<ModelParams, CliError> {
        let get = |name: &str, v: &Option<String>| -> Result<Surd, CliError> {
            let s = v
                .as_deref()
                .ok_or_else(|| CliError::Input(format!("missing parameter {name}")))?;
            Ok(s.parse::<Surd>()?)
        };
        let a1 = get("a1", &self.params.a1)?;
        let a2 = get("a2", &self.params.a2)?;
        if self.command == "spectrum" && self.spectrum.hermitian_control {
            return Ok(ModelParams::hermitian_control(a1.to_f64(), a2.to_f64())?);
        }
        let a3 = get("a3", &self.params.a3)?;
        Ok(ModelParams::from_exact(a1, a2, a3)?)
    }
}

fn read_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Input(format!("config {}: {e}", path.display())))
}

fn parse_metrics(names: &[String]) -> Result<Vec<MetricName>, CliError> {
    names
        .iter()
        .map(|n| {
            n.parse::<MetricName>()
                .map_err(|_| CliError::Input(format!("unknown metric {n:?}")))
        })
        .collect()
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Input(format!("{name} must be positive, got {v}")))
    }
}

/// Merges flags over the config file over defaults.
pub fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let file = match &cli.global.config {
        Some(p) => read_file(p)?,
        None => FileConfig::default(),
    };
    let g = &cli.global;
    let params = ParamInputs {
        a1: g.a1.clone().or(file.params.a1.map(Scalar::text)),
        a2: g.a2.clone().or(file.params.a2.map(Scalar::text)),
        a3: g.a3.clone().or(file.params.a3.map(Scalar::text)),
    };
    let out_dir = g
        .out_dir
        .clone()
        .or(file.out_dir)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));

    let fs = file.spectrum;
    let mut spectrum = SpectrumSettings {
        n_max: fs.n_max.unwrap_or_else(|| vec![10, 20, 30]),
        k: fs.k.unwrap_or(4),
        hermitian_control: fs.hermitian_control.unwrap_or(false),
        drift_tol: fs.drift_tol.unwrap_or(1e-4),
        imag_tol: fs.imag_tol.unwrap_or(1e-4),
        match_rel_tol: fs.match_rel_tol.unwrap_or(1e-3),
    };
    let fd = file.dynamics;
    let mut dynamics = DynamicsSettings {
        t_end: fd.t_end.unwrap_or(10.0),
        points: fd.points.unwrap_or(1001),
        initial: fd.initial.unwrap_or([1.0, 0.0, 0.0, 0.0]),
    };
    let fv = file.verify;
    let mut verify = VerifySettings {
        n_max: fv.n_max.unwrap_or(10),
        metrics: fv.metrics.as_deref().map(parse_metrics).transpose()?,
        perturb: fv.perturb.unwrap_or(false),
        reality_samples: fv.reality_samples.unwrap_or(1000),
        expectation_samples: fv.expectation_samples.unwrap_or(1000),
        times: fv.times.unwrap_or_else(|| vec![0.5, 1.0, 5.0]),
        control_strength: fv.control_strength.unwrap_or(0.1),
    };
    let mut report_files = Vec::new();

    match &cli.command {
        Command::Classify => {}
        Command::Spectrum {
            n_max,
            k,
            hermitian_control,
        } => {
            if let Some(n) = n_max {
                spectrum.n_max = n.clone();
            }
            if let Some(k) = k {
                spectrum.k = *k;
            }
            spectrum.hermitian_control |= *hermitian_control;
        }
        Command::Dynamics { t_end, points, initial } => {
            if let Some(t) = t_end {
                dynamics.t_end = *t;
            }
            if let Some(n) = points {
                dynamics.points = *n;
            }
            if let Some(z) = initial {
                let z: [f64; 4] = z.as_slice().try_into().map_err(|_| {
                    CliError::Input(format!("--initial needs 4 values, got {}", z.len()))
                })?;
                dynamics.initial = z;
            }
        }
        Command::Verify { n_max, metric, perturb } => {
            if let Some(n) = n_max {
                verify.n_max = *n;
            }
            if let Some(m) = metric {
                verify.metrics = Some(parse_metrics(m)?);
            }
            verify.perturb |= *perturb;
        }
        Command::Report { files } => report_files = files.clone(),
    }

    if spectrum.n_max.is_empty() || spectrum.k == 0 {
        return Err(CliError::Input("spectrum needs a non-empty n_max list and k ≥ 1".into()));
    }
    positive("drift_tol", spectrum.drift_tol)?;
    positive("imag_tol", spectrum.imag_tol)?;
    positive("match_rel_tol", spectrum.match_rel_tol)?;
    positive("control_strength", verify.control_strength)?;
    if verify.times.iter().any(|t| !t.is_finite()) {
        return Err(CliError::Input("verify times must be finite".into()));
    }

    Ok(RunConfig {
        command: cli.command.name().to_string(),
        params,
        seed: g.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        out_dir,
        spectrum,
        dynamics,
        verify,
        report_files,
    })
}
