//! Experiment configuration: JSON schema, validation, and the error /
//! exit-code taxonomy of the tool.

use std::path::Path;

use heavyeig::ensembles::EnsembleSpec;
use heavyeig::fixedpoint::{BivariateConfig, SolverConfig};
use heavyeig::montecarlo::ProcessPoint;
use serde::{Deserialize, Serialize};

/// Tool-level error: the variant decides the process exit code
/// (schema/config problems → 2, numeric/solver failures → 3).
#[derive(Debug)]
pub enum CliError {
    Schema(String),
    Numeric(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Schema(m) | CliError::Numeric(m) | CliError::Io(m) => m,
        }
    }
}

impl From<heavyeig::error::Error> for CliError {
    fn from(e: heavyeig::error::Error) -> CliError {
        use heavyeig::error::Error as E;
        match &e {
            E::Parameter(_) | E::Domain(_) | E::Unsupported(_) => CliError::Schema(e.to_string()),
            E::Numeric(_) | E::NonConvergence { .. } => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> CliError {
        CliError::Io(format!("i/o error: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> CliError {
        CliError::Io(format!("csv error: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// A process point in configuration form.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum PointIn {
    B { s: f64, t: f64 },
    C { s: f64, lambda: f64 },
    X { s: f64, z: [f64; 2] },
}

impl PointIn {
    pub fn to_point(&self) -> ProcessPoint {
        match *self {
            PointIn::B { s, t } => ProcessPoint::B { s, t },
            PointIn::C { s, lambda } => ProcessPoint::C { s, lambda },
            PointIn::X { s, z } => ProcessPoint::X { s, re_z: z[0], im_z: z[1] },
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            PointIn::B { s, t } => format!("B(s={s},t={t})"),
            PointIn::C { s, lambda } => format!("C(s={s},lambda={lambda})"),
            PointIn::X { s, z } => format!("X(s={s},z={}+{}i)", z[0], z[1]),
        }
    }
}

/// One (s, z; s′, z′) argument pair for the limit covariance.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairIn {
    pub s: f64,
    pub z: [f64; 2],
    pub s2: f64,
    pub z2: [f64; 2],
}

/// Univariate solver knobs (all optional; defaults from the library).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverIn {
    pub max_nodes: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    pub continuation_start: f64,
}

impl Default for SolverIn {
    fn default() -> Self {
        let d = SolverConfig::default();
        SolverIn {
            max_nodes: d.max_nodes,
            tol: d.tol,
            max_iter: d.max_iter,
            damping: d.damping,
            continuation_start: d.continuation_start,
        }
    }
}

impl SolverIn {
    pub fn to_config(&self) -> SolverConfig {
        SolverConfig {
            max_nodes: self.max_nodes,
            tol: self.tol,
            max_iter: self.max_iter,
            damping: self.damping,
            continuation_start: self.continuation_start,
        }
    }
}

/// Bivariate solver knobs (all optional; defaults from the library).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BivariateIn {
    pub max_nodes: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    pub continuation_start: f64,
    pub fd_step: f64,
}

impl Default for BivariateIn {
    fn default() -> Self {
        let d = BivariateConfig::default();
        BivariateIn {
            max_nodes: d.max_nodes,
            tol: d.tol,
            max_iter: d.max_iter,
            damping: d.damping,
            continuation_start: d.continuation_start,
            fd_step: d.fd_step,
        }
    }
}

impl BivariateIn {
    pub fn to_config(&self) -> BivariateConfig {
        BivariateConfig {
            max_nodes: self.max_nodes,
            tol: self.tol,
            max_iter: self.max_iter,
            damping: self.damping,
            continuation_start: self.continuation_start,
            fd_step: self.fd_step,
        }
    }
}

/// The experiment configuration file.  `command` selects the
/// subcommand; the other fields are required or ignored per command
/// (validation happens at dispatch).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: String,
    pub ensemble: EnsembleSpec,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub n_list: Option<Vec<usize>>,
    #[serde(default)]
    pub replicates: Option<usize>,
    /// Replicate index for single-sample commands (default 0).
    #[serde(default)]
    pub replicate: Option<u64>,
    #[serde(default)]
    pub s_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub t_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub lambda_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub points: Option<Vec<PointIn>>,
    #[serde(default)]
    pub pairs: Option<Vec<PairIn>>,
    /// (s, t) for `scaling-scan`.
    #[serde(default)]
    pub s: Option<f64>,
    #[serde(default)]
    pub t: Option<f64>,
    /// (s, λ; s′, λ′) for `cov-c`; s′/λ′ default to s/λ.
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub s2: Option<f64>,
    #[serde(default)]
    pub lambda2: Option<f64>,
    /// Descending η list for inversion commands.
    #[serde(default)]
    pub eta_schedule: Option<Vec<f64>>,
    #[serde(default)]
    pub e_window: Option<f64>,
    /// Gauss–Legendre order per E-axis in `cov-c`.
    #[serde(default)]
    pub nodes_per_axis: Option<usize>,
    #[serde(default)]
    pub solver: Option<SolverIn>,
    #[serde(default)]
    pub bivariate: Option<BivariateIn>,
    #[serde(default)]
    pub out_dir: Option<String>,
}

pub fn load(path: &Path) -> CliResult<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Schema(format!("cannot read config {}: {e}", path.display())))?;
    let cfg: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Schema(format!("config {}: {e}", path.display())))?;
    cfg.ensemble.validate()?;
    Ok(cfg)
}

impl ExperimentConfig {
    pub fn require_n(&self) -> CliResult<usize> {
        self.n
            .ok_or_else(|| CliError::Schema("this command requires the field \"n\"".into()))
    }

    pub fn require_replicates(&self) -> CliResult<usize> {
        self.replicates.ok_or_else(|| {
            CliError::Schema("this command requires the field \"replicates\"".into())
        })
    }

    pub fn require_grid<'a>(
        &'a self,
        grid: &'a Option<Vec<f64>>,
        name: &str,
    ) -> CliResult<&'a [f64]> {
        match grid {
            Some(g) if !g.is_empty() => Ok(g),
            _ => Err(CliError::Schema(format!(
                "this command requires a nonempty \"{name}\""
            ))),
        }
    }
}
