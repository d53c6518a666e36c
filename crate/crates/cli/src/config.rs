use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use sbd_core::commutant::{DEFAULT_GAP_TOL, DEFAULT_MAX_RETRIES, DEFAULT_TOL_REL};
use sbd_core::pipeline::PipelineConfig;
use sbd_core::sensitivity::DEFAULT_SENS_TOL;
use sbd_core::transform::DEFAULT_EPS_ZERO_REL;
use sbd_core::SbdError;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Canonical block decomposition of networks with equitable clusters.
#[derive(Debug, Parser)]
#[command(name = "sbd", version)]
pub struct Cli {
    /// On failure also print a JSON error object to stderr.
    #[arg(long, global = true)]
    pub error_json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coarsest equitable partition (or a validated user partition).
    Partition(GraphArgs),
    /// Canonical transformation, block report and matrix dumps.
    Transform(TransformArgs),
    /// Lyapunov exponents of every block along the quotient trajectory.
    Stability(StabilityArgs),
    /// Entries of B affected by individual edge weights.
    Sensitivity(SensitivityArgs),
    /// Runtime comparison against the full-commutant baseline.
    Bench(BenchArgs),
    /// partition, transform and stability in one run; requires --out.
    Pipeline(StabilityArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GraphArgs {
    /// Edge list: `u v [w]` per line, `#` comments, optional `# N=<n>` header.
    #[arg(long)]
    pub input: PathBuf,
    /// Label of the first node.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub base: u8,
    /// Ignore a third column and use unit weights.
    #[arg(long)]
    pub unweighted: bool,
    /// Cells file (one cell per line); default is the coarsest equitable partition.
    #[arg(long)]
    pub cells: Option<PathBuf>,
    /// Output directory; without it the main report goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Relative nullspace tolerance on the Gram spectrum.
    #[arg(long, default_value_t = DEFAULT_TOL_REL)]
    pub tol_rel: f64,
    /// Block-detection threshold relative to ‖A‖_F.
    #[arg(long, default_value_t = DEFAULT_EPS_ZERO_REL)]
    pub eps_zero: f64,
    /// Minimum relative eigenvalue gap of the sampled commutant element.
    #[arg(long, default_value_t = DEFAULT_GAP_TOL)]
    pub gap_tol: f64,
    /// Sampling attempts before keeping the best one.
    #[arg(long, default_value_t = DEFAULT_MAX_RETRIES)]
    pub max_retries: usize,
}

impl SolverArgs {
    pub fn pipeline_config(&self) -> PipelineConfig {
        PipelineConfig {
            tol_rel: self.tol_rel,
            eps_zero_rel: self.eps_zero,
            gap_tol: self.gap_tol,
            max_retries: self.max_retries,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct TransformArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct StabilityArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Dynamics preset: linear or lorenz.
    #[arg(long)]
    pub dynamics: String,
    /// Preset parameter, `name=value`; repeatable.
    #[arg(long = "dyn-param")]
    pub dyn_param: Vec<String>,
    #[arg(long, default_value_t = 100.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    /// Initial quotient state: m values (shared by all clusters) or C·m values.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub x0: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub qr_every: usize,
    /// Fraction of the run discarded before averaging.
    #[arg(long, default_value_t = 0.2)]
    pub transient: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SensitivityArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Edge parameter `name:i,j=w` in node labels; repeatable. Append `+` to
    /// the name to allow an edge absent from the network.
    #[arg(long = "param", required = true)]
    pub params: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_SENS_TOL)]
    pub sens_tol: f64,
    /// Also count affected entries after a random rotation inside each block.
    #[arg(long)]
    pub rotation_check: bool,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Planted instance sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,
    /// Edge-list instance, optionally `FILE:CELLS`; repeatable.
    #[arg(long = "instance")]
    pub instances: Vec<String>,
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub base: u8,
    #[arg(long)]
    pub unweighted: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Core(#[from] SbdError),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Core(SbdError::Io(_)) => 2,
            _ => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Io { .. } => "io",
            CliError::Core(e) => match e {
                SbdError::Parse { .. } => "parse",
                SbdError::SelfLoop { .. } => "self_loop",
                SbdError::DuplicateEdge { .. } => "duplicate_edge",
                SbdError::ConflictingWeight { .. } => "conflicting_weight",
                SbdError::InvalidNetwork(_) => "invalid_network",
                SbdError::Infeasible(_) => "infeasible",
                SbdError::PlacementFailed { .. } => "placement_failed",
                SbdError::NotAPartition(_) => "not_a_partition",
                SbdError::NotEquitable(_) => "not_equitable",
                SbdError::EmptyNullspace { .. } => "empty_nullspace",
                SbdError::ConstantDirectionMissing { .. } => "constant_direction_missing",
                SbdError::NotOrthogonal { .. } => "not_orthogonal",
                SbdError::Linalg(_) => "linalg",
                SbdError::Diverged { .. } => "diverged",
                SbdError::InvalidArgument(_) => "invalid_argument",
                SbdError::UnknownEdge { .. } => "unknown_edge",
                SbdError::Io(_) => "io",
                SbdError::Json(_) => "json",
            },
        }
    }

    pub fn to_json(&self, code: u8) -> String {
        let mut v = serde_json::json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": code,
        });
        if let CliError::Core(SbdError::NotEquitable(w)) = self {
            v["witness"] = serde_json::to_value(w).unwrap_or_default();
        }
        v.to_string()
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Everything that determines a command's output, hashed into every file.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub version: String,
    pub input: Option<String>,
    pub input_sha256: Option<String>,
    pub base: u8,
    pub weighted: bool,
    pub cells: Option<String>,
    pub cells_sha256: Option<String>,
    pub seed: u64,
    pub tol_rel: Option<f64>,
    pub eps_zero_rel: Option<f64>,
    pub gap_tol: Option<f64>,
    pub max_retries: Option<usize>,
    pub sens_tol: Option<f64>,
    pub dynamics: Option<String>,
    pub dyn_params: BTreeMap<String, f64>,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub x0: Vec<f64>,
    pub qr_every: Option<usize>,
    pub transient: Option<f64>,
    pub params: Vec<String>,
    pub sizes: Vec<usize>,
    pub instances: Vec<String>,
    pub repeats: Option<usize>,
}

impl RunConfig {
    pub fn new(command: &str, seed: u64) -> Self {
        RunConfig { command: command.into(), version: VERSION.into(), seed, weighted: true, ..Default::default() }
    }

    pub fn with_graph(mut self, g: &GraphArgs, input_text: &str, cells_text: Option<&str>) -> Self {
        self.input = Some(g.input.display().to_string());
        self.input_sha256 = Some(sha256_hex(input_text.as_bytes()));
        self.base = g.base;
        self.weighted = !g.unweighted;
        self.cells = g.cells.as_ref().map(|p| p.display().to_string());
        self.cells_sha256 = cells_text.map(|t| sha256_hex(t.as_bytes()));
        self
    }

    pub fn with_solver(mut self, s: &SolverArgs) -> Self {
        self.tol_rel = Some(s.tol_rel);
        self.eps_zero_rel = Some(s.eps_zero);
        self.gap_tol = Some(s.gap_tol);
        self.max_retries = Some(s.max_retries);
        self
    }

    pub fn hash(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("config serializes"))
    }

    pub fn meta(&self) -> Meta {
        Meta { tool: "sbd".into(), version: VERSION.into(), seed: self.seed, config_hash: self.hash() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config_hash: String,
}

impl Meta {
    /// Leading comment lines for CSV and text outputs.
    pub fn comment(&self) -> String {
        format!(
            "# tool={} version={} seed={} config_hash={}\n",
            self.tool, self.version, self.seed, self.config_hash
        )
    }
}

/// `k=v` pairs into a map; rejects duplicates and non-numeric values.
pub fn parse_kv(items: &[String]) -> CliResult<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for it in items {
        let (k, v) = it
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("expected name=value, got {it:?}")))?;
        let v: f64 = v.trim().parse().map_err(|_| CliError::Usage(format!("bad number in {it:?}")))?;
        if out.insert(k.trim().to_string(), v).is_some() {
            return Err(CliError::Usage(format!("parameter {k:?} given twice")));
        }
    }
    Ok(out)
}
