//! Command-line and JSON configuration, resolved to a single [`RunConfig`].

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lane_emden::params::sobolev_exponent;
use lane_emden::ProblemParams;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

pub const DEFAULT_H: f64 = 1e-3;
pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_ORDER: usize = 16;

#[derive(Debug, Parser)]
#[command(name = "lane-emden", version, about = "Singular solutions of the vector Lane-Emden system")]
struct Cli {
    /// Read the whole configuration from a JSON file instead of flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Write the primary output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Drift series CSV (invariants command).
    #[arg(long, global = true)]
    drift_csv: Option<PathBuf>,

    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ParamArgs {
    #[arg(long)]
    pub n: usize,

    #[arg(long, default_value_t = 1)]
    #[serde(default = "one")]
    pub m: usize,

    /// Defaults to the critical exponent (n+2)/(n-2).
    #[arg(long)]
    #[serde(default)]
    pub alpha: Option<f64>,
}

fn one() -> usize {
    1
}

fn default_h() -> f64 {
    DEFAULT_H
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_order() -> usize {
    DEFAULT_ORDER
}

impl ParamArgs {
    pub fn problem(&self) -> lane_emden::Result<ProblemParams> {
        ProblemParams::new(self.n, self.m, self.alpha.unwrap_or_else(|| sobolev_exponent(self.n)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Bubble,
    Homogeneous,
    CriticalHomogeneous,
    Spiral,
}

/// Selects and parametrizes one closed-form family.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FamilySpec {
    #[arg(long, value_enum)]
    #[serde(default)]
    pub family: Option<FamilyKind>,

    /// Bubble center.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default)]
    pub center: Option<Vec<f64>>,

    /// Bubble scale.
    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "unit_scale")]
    pub scale: f64,

    /// Unit nonnegative direction in R^m; defaults to the first axis.
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    pub direction: Option<Vec<f64>>,

    /// Spiral orbit length in t.
    #[arg(long, default_value_t = 20.0)]
    #[serde(default = "spiral_span")]
    pub spiral_span: f64,
}

fn unit_scale() -> f64 {
    1.0
}

fn spiral_span() -> f64 {
    20.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    #[default]
    Cylindrical,
    LowerCritical,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,

    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub v0: Vec<f64>,

    /// Defaults to zero.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default)]
    pub dv0: Vec<f64>,

    #[arg(long, default_value_t = 0.0)]
    #[serde(default)]
    pub t0: f64,

    #[arg(long)]
    pub span: f64,

    #[arg(long, default_value_t = DEFAULT_H)]
    #[serde(default = "default_h")]
    pub h: f64,

    #[arg(long, value_enum, default_value_t = SystemKind::Cylindrical)]
    #[serde(default)]
    pub system: SystemKind,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct InvariantsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,

    /// Initial state; omit and give --kappa/--kappa-star to run a spiral instead.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default)]
    pub v0: Option<Vec<f64>>,

    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default)]
    pub dv0: Option<Vec<f64>>,

    #[arg(long)]
    #[serde(default)]
    pub kappa: Option<f64>,

    #[arg(long)]
    #[serde(default)]
    pub kappa_star: Option<f64>,

    #[arg(long, default_value_t = 0.0)]
    #[serde(default)]
    pub t0: f64,

    #[arg(long)]
    pub span: f64,

    #[arg(long, default_value_t = DEFAULT_H)]
    #[serde(default = "default_h")]
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct ClassifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,

    /// Measure a closed-form field instead of taking evidence from flags.
    #[command(flatten)]
    #[serde(flatten)]
    pub field: FamilySpec,

    /// Critical evidence, or the spiral inputs when --family spiral.
    #[arg(long)]
    #[serde(default)]
    pub kappa: Option<f64>,

    #[arg(long)]
    #[serde(default)]
    pub kappa_star: Option<f64>,

    /// Limit of Φ at the origin (intermediate exponents).
    #[arg(long)]
    #[serde(default)]
    pub phi_limit: Option<f64>,

    /// Fitted amplitude of |u| |x|^(n-2) (below the Serrin exponent).
    #[arg(long)]
    #[serde(default)]
    pub amplitude: Option<f64>,

    /// Terminal lower-critical energy (Serrin exponent).
    #[arg(long)]
    #[serde(default)]
    pub terminal_energy: Option<f64>,

    #[arg(long, default_value_t = DEFAULT_TOL)]
    #[serde(default = "default_tol")]
    pub tol: f64,

    #[arg(long, default_value_t = DEFAULT_ORDER)]
    #[serde(default = "default_order")]
    pub order: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct FamilyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,

    #[command(flatten)]
    #[serde(flatten)]
    pub field: FamilySpec,

    /// Spiral inputs.
    #[arg(long)]
    #[serde(default)]
    pub kappa: Option<f64>,

    #[arg(long)]
    #[serde(default)]
    pub kappa_star: Option<f64>,

    /// Sampling ray; defaults to the first axis.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default)]
    pub ray: Option<Vec<f64>>,

    #[arg(long, default_value_t = 0.01)]
    #[serde(default = "r_min")]
    pub r_min: f64,

    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "r_max")]
    pub r_max: f64,

    #[arg(long, default_value_t = 101)]
    #[serde(default = "samples")]
    pub samples: usize,
}

fn r_min() -> f64 {
    0.01
}

fn r_max() -> f64 {
    1.0
}

fn samples() -> usize {
    101
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    /// (κ, κ*) grid at the critical exponent.
    Kappa,
    /// Exponent grid.
    Alpha,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,

    #[arg(long, value_enum)]
    pub grid: GridKind,

    /// min,max,count
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default)]
    pub kappa_range: Option<Vec<f64>>,

    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default)]
    pub kappa_star_range: Option<Vec<f64>>,

    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(default)]
    pub alpha_range: Option<Vec<f64>>,

    #[arg(long, default_value_t = DEFAULT_TOL)]
    #[serde(default = "default_tol")]
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[command(allow_negative_numbers = true)]
pub struct ResidualArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub params: ParamArgs,

    #[command(flatten)]
    #[serde(flatten)]
    pub field: FamilySpec,

    #[arg(long)]
    #[serde(default)]
    pub kappa: Option<f64>,

    #[arg(long)]
    #[serde(default)]
    pub kappa_star: Option<f64>,

    #[arg(long, default_value_t = 100)]
    #[serde(default = "points")]
    pub points: usize,

    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub seed: u64,

    /// Finite-difference step.
    #[arg(long, default_value_t = 1e-2)]
    #[serde(default = "fd_step")]
    pub fd_step: f64,

    #[arg(long, default_value_t = 0.1)]
    #[serde(default = "probe_min")]
    pub r_min: f64,

    #[arg(long, default_value_t = 1.0)]
    #[serde(default = "r_max")]
    pub r_max: f64,
}

fn points() -> usize {
    100
}

fn fd_step() -> f64 {
    1e-2
}

fn probe_min() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Derived constants and the exponent regime.
    Constants(ParamArgs),
    /// Sample a closed-form solution along a ray.
    Family(FamilyArgs),
    /// Integrate the radial cylindrical (or lower-critical) system.
    Simulate(SimulateArgs),
    /// Pohozaev invariants and their drift along a critical run.
    Invariants(InvariantsArgs),
    /// Classify a singularity from evidence or from a closed-form field.
    Classify(ClassifyArgs),
    /// Classify a grid of (κ, κ*) or exponents.
    Sweep(SweepArgs),
    /// PDE residual of a closed-form field at random points.
    ResidualCheck(ResidualArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Constants(_) => "constants",
            Command::Family(_) => "family",
            Command::Simulate(_) => "simulate",
            Command::Invariants(_) => "invariants",
            Command::Classify(_) => "classify",
            Command::Sweep(_) => "sweep",
            Command::ResidualCheck(_) => "residual-check",
        }
    }

    pub fn params(&self) -> &ParamArgs {
        match self {
            Command::Constants(p) => p,
            Command::Family(a) => &a.params,
            Command::Simulate(a) => &a.params,
            Command::Invariants(a) => &a.params,
            Command::Classify(a) => &a.params,
            Command::Sweep(a) => &a.params,
            Command::ResidualCheck(a) => &a.params,
        }
    }

    fn params_mut(&mut self) -> &mut ParamArgs {
        match self {
            Command::Constants(p) => p,
            Command::Family(a) => &mut a.params,
            Command::Simulate(a) => &mut a.params,
            Command::Invariants(a) => &mut a.params,
            Command::Classify(a) => &mut a.params,
            Command::Sweep(a) => &mut a.params,
            Command::ResidualCheck(a) => &mut a.params,
        }
    }
}

/// Fully resolved run description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    /// Where outputs go; not part of the configuration hash.
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub drift_csv: Option<PathBuf>,
    #[serde(skip)]
    pub jobs: Option<usize>,
}

impl RunConfig {
    pub fn params(&self) -> ProblemParams {
        self.command.params().problem().expect("validated at parse time")
    }
}

/// Parses `argv` (including the program name).
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(CliError::from_clap)?;
    let command = match (cli.config, cli.command) {
        (Some(_), Some(_)) => return Err(CliError::usage("give either --config or a subcommand, not both")),
        (None, None) => return Err(CliError::usage("missing subcommand (or --config FILE)")),
        (None, Some(c)) => c,
        (Some(path), None) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
            parse_json_command(&text)?
        }
    };
    resolve(RunConfig { command, out: cli.out, drift_csv: cli.drift_csv, jobs: cli.jobs })
}

/// Parses a JSON configuration document, rejecting unknown keys.
pub fn parse_json_command(text: &str) -> Result<Command, CliError> {
    let raw: Value = serde_json::from_str(text).map_err(|e| CliError::usage(format!("config is not valid JSON: {e}")))?;
    let command: Command =
        serde_json::from_value(raw.clone()).map_err(|e| CliError::usage(format!("invalid config: {e}")))?;
    let known = serde_json::to_value(&command).expect("serializable");
    if let (Some(given), Some(known)) = (raw.as_object(), known.as_object()) {
        let unknown: Vec<&String> = given.keys().filter(|k| !known.contains_key(*k)).collect();
        if !unknown.is_empty() {
            return Err(CliError::usage(format!("unknown config keys: {unknown:?}")));
        }
    }
    Ok(command)
}

/// Applies defaults and validates options against the command before any computation.
pub fn resolve(mut config: RunConfig) -> Result<RunConfig, CliError> {
    let params = config.command.params().problem().map_err(CliError::usage_from)?;
    config.command.params_mut().alpha = Some(params.alpha);
    if config.jobs == Some(0) {
        return Err(CliError::usage("--jobs must be at least 1"));
    }
    let m = params.m;
    match &mut config.command {
        Command::Constants(_) => {}
        Command::Simulate(a) => {
            if a.dv0.is_empty() {
                a.dv0 = vec![0.0; m];
            }
            check_len("v0", &a.v0, m)?;
            check_len("dv0", &a.dv0, m)?;
            check_step(a.h, a.span)?;
        }
        Command::Invariants(a) => {
            check_step(a.h, a.span)?;
            match (&a.v0, a.kappa, a.kappa_star) {
                (Some(v0), None, None) => {
                    check_len("v0", v0, m)?;
                    let dv0 = a.dv0.get_or_insert_with(|| vec![0.0; m]);
                    check_len("dv0", dv0, m)?;
                }
                (None, Some(_), Some(_)) => {
                    if a.dv0.is_some() {
                        return Err(CliError::usage("--dv0 needs --v0"));
                    }
                    if m != 2 {
                        return Err(CliError::usage("spiral runs have m = 2 components"));
                    }
                }
                _ => return Err(CliError::usage("give either --v0 [--dv0] or both --kappa and --kappa-star")),
            }
        }
        Command::Classify(a) => {
            let evidence = [a.phi_limit, a.amplitude, a.terminal_energy].iter().filter(|e| e.is_some()).count()
                + usize::from(a.kappa.is_some() || a.kappa_star.is_some());
            match a.field.family {
                Some(kind) => {
                    if a.phi_limit.is_some() || a.amplitude.is_some() || a.terminal_energy.is_some() {
                        return Err(CliError::usage("--family measures the evidence itself"));
                    }
                    check_family(kind, &a.field, a.kappa, a.kappa_star)?;
                }
                None if evidence != 1 => {
                    return Err(CliError::usage(
                        "give exactly one kind of evidence: --kappa/--kappa-star, --phi-limit, --amplitude or --terminal-energy",
                    ))
                }
                None => {
                    if a.kappa.is_some() != a.kappa_star.is_some() {
                        return Err(CliError::usage("--kappa and --kappa-star go together"));
                    }
                }
            }
            check_tol(a.tol)?;
        }
        Command::Family(a) => {
            let kind = a.field.family.ok_or_else(|| CliError::usage("--family is required"))?;
            check_family(kind, &a.field, a.kappa, a.kappa_star)?;
            if !(a.r_min > 0.0 && a.r_max > a.r_min) || a.samples < 2 {
                return Err(CliError::usage("need 0 < r-min < r-max and at least 2 samples"));
            }
            if let Some(ray) = &a.ray {
                check_len("ray", ray, params.n)?;
            }
        }
        Command::ResidualCheck(a) => {
            let kind = a.field.family.ok_or_else(|| CliError::usage("--family is required"))?;
            check_family(kind, &a.field, a.kappa, a.kappa_star)?;
            if !(a.r_min > 0.0 && a.r_max > a.r_min) || a.points == 0 || !(a.fd_step > 0.0) {
                return Err(CliError::usage("need 0 < r-min < r-max, points >= 1 and fd-step > 0"));
            }
        }
        Command::Sweep(a) => {
            check_tol(a.tol)?;
            match a.grid {
                GridKind::Kappa => {
                    check_range("kappa-range", &a.kappa_range)?;
                    check_range("kappa-star-range", &a.kappa_star_range)?;
                }
                GridKind::Alpha => check_range("alpha-range", &a.alpha_range)?,
            }
        }
    }
    Ok(config)
}

fn check_len(name: &str, v: &[f64], m: usize) -> Result<(), CliError> {
    if v.len() != m {
        return Err(CliError::usage(format!("--{name} has {} entries, expected {m}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(CliError::usage(format!("--{name} must be finite")));
    }
    Ok(())
}

fn check_step(h: f64, span: f64) -> Result<(), CliError> {
    if !(h > 0.0 && span > 0.0 && h.is_finite() && span.is_finite()) {
        return Err(CliError::usage("need h > 0 and span > 0"));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<(), CliError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(CliError::usage("tol must be positive"));
    }
    Ok(())
}

fn check_range(name: &str, r: &Option<Vec<f64>>) -> Result<(), CliError> {
    match r.as_deref() {
        Some([lo, hi, count]) if lo <= hi && *count >= 1.0 && count.fract() == 0.0 => Ok(()),
        _ => Err(CliError::usage(format!("--{name} expects min,max,count with min <= max and an integer count"))),
    }
}

fn check_family(kind: FamilyKind, spec: &FamilySpec, kappa: Option<f64>, kappa_star: Option<f64>) -> Result<(), CliError> {
    match kind {
        FamilyKind::Spiral => {
            if kappa.is_none() || kappa_star.is_none() {
                return Err(CliError::usage("--family spiral needs --kappa and --kappa-star"));
            }
            if !(spec.spiral_span > 0.0) {
                return Err(CliError::usage("--spiral-span must be positive"));
            }
        }
        _ => {
            if kappa.is_some() || kappa_star.is_some() {
                return Err(CliError::usage("--kappa/--kappa-star only apply to --family spiral"));
            }
        }
    }
    Ok(())
}
