//! Command-line surface.
//!
//! Every subcommand writes one file to `--out`. A `--config` file of
//! `key=value` lines may supply any long flag of the subcommand by name;
//! flags given on the command line win.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::error_rate_table;
use crate::dataset_io::save_dataset;
use crate::error::Result;
use crate::experiments::{
    concentration_experiment, e2e_classification_multi, epsilon_coverage, fractile_vs_epsilon_comparison,
    perturbation_uniformity_check, CellOutcome, ConcentrationConfig, E2eConfig, PerturbationConfig,
};
use crate::generate::{gaussian_dataset, gaussian_mixture, gaussian_point, grid_dataset};
use crate::lsh::{default_bucket_width, lsh_recall_sweep, LshParams};
use crate::neighbors::PolicyKind;
use crate::report::{self, format_g17, write_csv, Report};
use crate::rng::RngStream;
use crate::space::{Dataset, Precision};

const BIN: &str = "ann-audit";

#[derive(Debug, Parser)]
#[command(
    name = BIN,
    version,
    about = "Exact and epsilon-approximate nearest-neighbor experiments with CSV reports"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Farthest-to-nearest distance ratio of Gaussian data per (n, d) cell
    Concentration(ConcentrationArgs),
    /// Fraction of the database that is an epsilon-approximate nearest neighbor
    Coverage(CoverageArgs),
    /// Closed-form error rates of selection policies against Monte Carlo
    LocalSim(LocalSimArgs),
    /// Nearest-neighbor classification error, exact versus epsilon-approximate
    E2e(E2eArgs),
    /// Tie randomization by grid perturbation, with an approximate companion query
    PerturbCheck(PerturbArgs),
    /// Candidate-set sizes under epsilon and rank-fractile definitions
    FractileCompare(FractileArgs),
    /// Recall of a p-stable LSH index against brute force
    LshBench(LshArgs),
    /// Write a generated dataset file
    Gen(GenArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Root seed of every random stream
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file
    #[arg(long)]
    pub out: PathBuf,
    /// File of key=value lines supplying flags by long name
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PrecisionArg {
    F32,
    F64,
}

impl From<PrecisionArg> for Precision {
    fn from(p: PrecisionArg) -> Self {
        match p {
            PrecisionArg::F32 => Precision::F32,
            PrecisionArg::F64 => Precision::F64,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ConcentrationArgs {
    /// Dimensions, comma-separated
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
    pub dims: Vec<usize>,
    /// Database sizes, comma-separated
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
    pub sizes: Vec<usize>,
    /// Runs per cell
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    /// Runs for cells with n*d >= --large-cell-elements
    #[arg(long, default_value_t = 20)]
    pub large_cell_runs: usize,
    /// Size threshold (n*d) of a large cell
    #[arg(long, default_value_t = 100_000_000)]
    pub large_cell_elements: u64,
    /// Cells with n*d above this are skipped
    #[arg(long, default_value_t = 100_000_000)]
    pub max_cell_elements: u64,
    /// Coordinate and accumulation precision
    #[arg(long, value_enum, default_value_t = PrecisionArg::F64)]
    pub precision: PrecisionArg,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct CoverageArgs {
    /// Database sizes, comma-separated
    #[arg(long, value_delimiter = ',', default_value = "1000")]
    pub sizes: Vec<usize>,
    /// Dimensions, comma-separated
    #[arg(long, value_delimiter = ',', default_value = "10000")]
    pub dims: Vec<usize>,
    /// Approximation factors, comma-separated
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    pub epsilons: Vec<f64>,
    /// Runs per cell
    #[arg(long, default_value_t = 20)]
    pub runs: usize,
    /// Coordinate and accumulation precision
    #[arg(long, value_enum, default_value_t = PrecisionArg::F64)]
    pub precision: PrecisionArg,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct LocalSimArgs {
    /// Minority posteriors E in [0, 0.5], comma-separated
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.3,0.5")]
    pub e_grid: Vec<f64>,
    /// Admissible-set sizes k, comma-separated
    #[arg(long, value_delimiter = ',', default_value = "1,2,5,10,20")]
    pub k_grid: Vec<usize>,
    /// Selection policies, comma-separated
    #[arg(long, value_delimiter = ',', default_value = "random-uniform,minority-class,wrong-class")]
    pub policies: Vec<PolicyKind>,
    /// Monte Carlo trials per cell
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct E2eArgs {
    /// Dimension
    #[arg(long, default_value_t = 16)]
    pub dim: usize,
    /// Training points
    #[arg(long, default_value_t = 2000)]
    pub n_train: usize,
    /// Distance between the class means
    #[arg(long, default_value_t = 2.0)]
    pub separation: f64,
    /// Approximation factor
    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,
    /// Test queries
    #[arg(long, default_value_t = 2000)]
    pub n_queries: usize,
    /// Selection policies, comma-separated
    #[arg(long, value_delimiter = ',', default_value = "random-uniform,minority-class,wrong-class")]
    pub policies: Vec<PolicyKind>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct PerturbArgs {
    /// Numbers of tied copies, comma-separated
    #[arg(long, value_delimiter = ',', default_value = "2,3,5")]
    pub duplicates: Vec<usize>,
    /// Perturbation draws per instance
    #[arg(long, default_value_t = 10_000)]
    pub draws: usize,
    /// Displacement radius, in (0, 0.25)
    #[arg(long, default_value_t = 0.2)]
    pub amplitude: f64,
    /// Dimension of the grid instance
    #[arg(long, default_value_t = 32)]
    pub dim: usize,
    /// Epsilon of the companion approximate query
    #[arg(long, default_value_t = 1.0)]
    pub companion_epsilon: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct FractileArgs {
    /// Dimensions, comma-separated
    #[arg(long, value_delimiter = ',', default_value = "2,8,32,128,512,2048")]
    pub dims: Vec<usize>,
    /// Database size
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Approximation factor
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Rank fractile in (0, 1]
    #[arg(long, default_value_t = 0.01)]
    pub fractile: f64,
    /// Runs per dimension
    #[arg(long, default_value_t = 20)]
    pub runs: usize,
    /// Coordinate and accumulation precision
    #[arg(long, value_enum, default_value_t = PrecisionArg::F64)]
    pub precision: PrecisionArg,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct LshArgs {
    /// Database size
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    /// Dimension
    #[arg(long, default_value_t = 32)]
    pub dim: usize,
    /// Test queries
    #[arg(long, default_value_t = 100)]
    pub queries: usize,
    /// Hashes per table k, comma-separated
    #[arg(long, value_delimiter = ',', default_value = "8")]
    pub k_values: Vec<usize>,
    /// Table counts L, comma-separated
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
    pub tables: Vec<usize>,
    /// Bucket width [default: median nearest-neighbor distance]
    #[arg(long)]
    pub width: Option<f64>,
    /// Candidates examined per query [default: 4L]
    #[arg(long)]
    pub max_candidates: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DatasetKind {
    Gaussian,
    Grid,
    Mixture,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    /// Distribution
    #[arg(long, value_enum, default_value_t = DatasetKind::Gaussian)]
    pub kind: DatasetKind,
    /// Points
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Dimension
    #[arg(long, default_value_t = 8)]
    pub dim: usize,
    /// Grid coordinates are drawn from 0..extent
    #[arg(long, default_value_t = 10)]
    pub extent: u32,
    /// Distance between the mixture means
    #[arg(long, default_value_t = 2.0)]
    pub separation: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug)]
pub enum CliError {
    /// Syntax errors and help/version output from the argument parser.
    Usage(clap::Error),
    Config { path: PathBuf, message: String },
    /// Every semantic problem found, one per entry.
    Invalid(Vec<String>),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(e) => write!(f, "{e}"),
            CliError::Config { path, message } => write!(f, "config {}: {message}", path.display()),
            CliError::Invalid(errors) => {
                writeln!(f, "invalid arguments:")?;
                for e in errors {
                    writeln!(f, "  {e}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(e) => e.exit_code(),
            _ => 2,
        }
    }
}

/// Parses `argv` (without the program name), merges the config file and
/// validates every parameter.
pub fn parse_args<I, S>(argv: I) -> Result<Cli, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let mut argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    if let Some(path) = config_path(&argv) {
        let pairs = read_config(&path)?;
        for (key, value) in pairs {
            if !has_flag(&argv, &key) {
                argv.push(format!("--{key}"));
                argv.push(value);
            }
        }
    }
    let cli = Cli::try_parse_from(std::iter::once(BIN.to_owned()).chain(argv)).map_err(CliError::Usage)?;
    let errors = cli.command.validate();
    if errors.is_empty() {
        Ok(cli)
    } else {
        Err(CliError::Invalid(errors))
    }
}

fn config_path(argv: &[String]) -> Option<PathBuf> {
    argv.iter().enumerate().find_map(|(i, a)| {
        if a == "--config" {
            argv.get(i + 1).map(PathBuf::from)
        } else {
            a.strip_prefix("--config=").map(PathBuf::from)
        }
    })
}

fn has_flag(argv: &[String], key: &str) -> bool {
    let flag = format!("--{key}");
    argv.iter()
        .any(|a| *a == flag || a.strip_prefix(&flag).is_some_and(|rest| rest.starts_with('=')))
}

/// Reads `key=value` lines. Blank lines and lines starting with `#` are
/// ignored; keys are long flag names without the leading dashes.
pub fn read_config(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let err = |message: String| CliError::Config {
        path: path.to_owned(),
        message,
    };
    let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
    let mut pairs: Vec<(String, String)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("line {}: expected key=value", i + 1)))?;
        let key = key.trim().trim_start_matches("--").to_owned();
        if key.is_empty() {
            return Err(err(format!("line {}: empty key", i + 1)));
        }
        if key == "config" {
            return Err(err(format!("line {}: config files cannot be nested", i + 1)));
        }
        if pairs.iter().any(|(k, _)| *k == key) {
            return Err(err(format!("line {}: duplicate key `{key}`", i + 1)));
        }
        pairs.push((key, value.trim().to_owned()));
    }
    Ok(pairs)
}

struct Checks(Vec<String>);

impl Checks {
    fn require(&mut self, ok: bool, flag: &str, reason: impl fmt::Display) {
        if !ok {
            self.0.push(format!("--{flag}: {reason}"));
        }
    }

    fn positive(&mut self, value: u64, flag: &str) {
        self.require(value >= 1, flag, "must be at least 1");
    }

    fn positive_list(&mut self, values: &[usize], flag: &str) {
        self.require(!values.is_empty(), flag, "must not be empty");
        self.require(!values.contains(&0), flag, "every entry must be at least 1");
    }

    fn epsilon(&mut self, value: f64, flag: &str) {
        self.require(value.is_finite() && value >= 0.0, flag, format!("must be finite and >= 0, got {value}"));
    }
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Concentration(a) => &a.common,
            Command::Coverage(a) => &a.common,
            Command::LocalSim(a) => &a.common,
            Command::E2e(a) => &a.common,
            Command::PerturbCheck(a) => &a.common,
            Command::FractileCompare(a) => &a.common,
            Command::LshBench(a) => &a.common,
            Command::Gen(a) => &a.common,
        }
    }

    /// Semantic checks; returns one message per problem.
    pub fn validate(&self) -> Vec<String> {
        let mut c = Checks(Vec::new());
        match self {
            Command::Concentration(a) => {
                c.positive_list(&a.dims, "dims");
                c.positive_list(&a.sizes, "sizes");
                c.positive(a.runs as u64, "runs");
                c.positive(a.large_cell_runs as u64, "large-cell-runs");
            }
            Command::Coverage(a) => {
                c.positive_list(&a.sizes, "sizes");
                c.positive_list(&a.dims, "dims");
                c.require(!a.epsilons.is_empty(), "epsilons", "must not be empty");
                for &e in &a.epsilons {
                    c.epsilon(e, "epsilons");
                }
                c.positive(a.runs as u64, "runs");
            }
            Command::LocalSim(a) => {
                c.require(!a.e_grid.is_empty(), "e-grid", "must not be empty");
                for &e in &a.e_grid {
                    c.require((0.0..=0.5).contains(&e), "e-grid", format!("E must lie in [0, 0.5], got {e}"));
                }
                c.positive_list(&a.k_grid, "k-grid");
                c.require(!a.policies.is_empty(), "policies", "must not be empty");
                for &p in &a.policies {
                    c.require(
                        p != PolicyKind::Farthest,
                        "policies",
                        "farthest has no local closed form",
                    );
                }
                c.positive(a.trials, "trials");
            }
            Command::E2e(a) => {
                c.positive(a.dim as u64, "dim");
                c.require(a.n_train >= 2, "n-train", "need at least two training points");
                c.require(a.separation.is_finite(), "separation", "must be finite");
                c.epsilon(a.epsilon, "epsilon");
                c.positive(a.n_queries as u64, "n-queries");
                c.require(!a.policies.is_empty(), "policies", "must not be empty");
            }
            Command::PerturbCheck(a) => {
                c.require(!a.duplicates.is_empty(), "duplicates", "must not be empty");
                c.require(a.duplicates.iter().all(|&d| d >= 2), "duplicates", "every entry must be at least 2");
                c.positive(a.draws as u64, "draws");
                c.require(
                    a.amplitude > 0.0 && a.amplitude < 0.25,
                    "amplitude",
                    format!("must lie in (0, 0.25), got {}", a.amplitude),
                );
                c.positive(a.dim as u64, "dim");
                c.epsilon(a.companion_epsilon, "companion-epsilon");
            }
            Command::FractileCompare(a) => {
                c.positive_list(&a.dims, "dims");
                c.positive(a.n as u64, "n");
                c.epsilon(a.epsilon, "epsilon");
                c.require(
                    a.fractile > 0.0 && a.fractile <= 1.0,
                    "fractile",
                    format!("must lie in (0, 1], got {}", a.fractile),
                );
                c.positive(a.runs as u64, "runs");
            }
            Command::LshBench(a) => {
                c.require(a.n >= 2, "n", "need at least two points");
                c.positive(a.dim as u64, "dim");
                c.positive(a.queries as u64, "queries");
                c.positive_list(&a.k_values, "k-values");
                c.positive_list(&a.tables, "tables");
                if let Some(w) = a.width {
                    c.require(w.is_finite() && w > 0.0, "width", format!("must be finite and > 0, got {w}"));
                }
                if let Some(m) = a.max_candidates {
                    c.positive(m as u64, "max-candidates");
                }
            }
            Command::Gen(a) => {
                c.positive(a.dim as u64, "dim");
                c.positive(u64::from(a.extent), "extent");
                c.require(a.separation.is_finite(), "separation", "must be finite");
            }
        }
        c.0
    }
}

/// What a command produces.
#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Report(Report),
    Dataset(Dataset),
}

impl Output {
    pub fn write(&self, path: &Path) -> Result<()> {
        match self {
            Output::Report(r) => write_csv(r, path),
            Output::Dataset(d) => save_dataset(d, path),
        }
    }
}

/// Runs a validated command without touching the filesystem.
pub fn execute(command: &Command) -> Result<Output> {
    let seed = command.common().seed;
    let root = RngStream::new(seed, 0);
    let report = match command {
        Command::Concentration(a) => {
            let config = ConcentrationConfig {
                dims: a.dims.clone(),
                sizes: a.sizes.clone(),
                runs: a.runs,
                large_cell_runs: a.large_cell_runs,
                large_cell_elements: a.large_cell_elements,
                max_cell_elements: a.max_cell_elements,
                seed,
                precision: a.precision.into(),
            };
            let mut r = Report::new(report::CONCENTRATION, seed);
            r.comments.push(format!("precision=f{}", config.precision.bits()));
            for cell in concentration_experiment(&config)? {
                match cell {
                    CellOutcome::Stats(s) => r.push(vec![
                        s.n.into(),
                        s.d.into(),
                        s.runs.into(),
                        s.min.into(),
                        s.q1.into(),
                        s.median.into(),
                        s.q3.into(),
                        s.max.into(),
                        s.mean.into(),
                    ]),
                    CellOutcome::Skipped { n, d, reason } => r.comments.push(format!("skipped n={n} d={d}: {reason}")),
                }
            }
            r
        }
        Command::Coverage(a) => {
            let mut r = Report::new(report::COVERAGE, seed);
            let precision = a.precision.into();
            r.comments.push(format!("precision=f{}", Precision::bits(precision)));
            for &n in &a.sizes {
                for &d in &a.dims {
                    for &eps in &a.epsilons {
                        let f = epsilon_coverage(n, d, eps, a.runs, precision, seed)?;
                        r.push(vec![n.into(), d.into(), eps.into(), a.runs.into(), f.into()]);
                    }
                }
            }
            r
        }
        Command::LocalSim(a) => {
            let mut r = Report::new(report::LOCAL_SIM, seed);
            for row in error_rate_table(&a.e_grid, &a.k_grid, &a.policies, a.trials, &root)? {
                r.push(vec![
                    row.e.into(),
                    row.k.into(),
                    row.policy.name().into(),
                    row.closed_form.into(),
                    row.printed_form.into(),
                    row.estimate.rate.into(),
                    row.estimate.half_width.into(),
                    row.estimate.trials.into(),
                    row.agree.into(),
                ]);
            }
            r
        }
        Command::E2e(a) => {
            let config = E2eConfig {
                dim: a.dim,
                n_train: a.n_train,
                separation: a.separation,
                epsilon: a.epsilon,
                n_queries: a.n_queries,
            };
            let mut r = Report::new(report::E2E, seed);
            for res in e2e_classification_multi(&config, &a.policies, &root)? {
                r.comments.push(format!("policy={} mean_k_eps={}", res.policy, format_g17(res.mean_k_eps)));
                r.push(vec![
                    a.dim.into(),
                    a.n_train.into(),
                    a.separation.into(),
                    a.epsilon.into(),
                    res.policy.name().into(),
                    a.n_queries.into(),
                    res.exact_error.into(),
                    res.approx_error.into(),
                ]);
            }
            r
        }
        Command::PerturbCheck(a) => {
            let mut r = Report::new(report::PERTURB_CHECK, seed);
            r.comments.push(format!(
                "dim={} companion_epsilon={} companion_policy=minority-class",
                a.dim,
                format_g17(a.companion_epsilon)
            ));
            for &duplicates in &a.duplicates {
                let config = PerturbationConfig {
                    duplicates,
                    draws: a.draws,
                    amplitude: a.amplitude,
                    dim: a.dim,
                    companion_epsilon: a.companion_epsilon,
                };
                let stream = root.derive("perturb-check", &[duplicates as u64]);
                let check = perturbation_uniformity_check(&config, &stream)?;
                r.comments.push(format!(
                    "companion duplicates={duplicates} minority_frequency={} chi_square={} p_value={} pass={}",
                    format_g17(check.companion_minority_frequency),
                    format_g17(check.companion_chi_square),
                    format_g17(check.companion_p_value),
                    check.companion_pass
                ));
                r.push(vec![
                    duplicates.into(),
                    a.draws.into(),
                    a.amplitude.into(),
                    check.chi_square.into(),
                    check.p_value.into(),
                    check.pass.into(),
                ]);
            }
            r
        }
        Command::FractileCompare(a) => {
            let mut r = Report::new(report::FRACTILE_COMPARE, seed);
            let rows =
                fractile_vs_epsilon_comparison(&a.dims, a.n, a.epsilon, a.fractile, a.runs, a.precision.into(), seed)?;
            for row in rows {
                r.push(vec![
                    row.d.into(),
                    row.n.into(),
                    row.epsilon.into(),
                    row.fractile.into(),
                    row.mean_eps_candidates.into(),
                    row.fractile_candidates.into(),
                ]);
            }
            r
        }
        Command::LshBench(a) => {
            let (data, queries) = lsh_workload(a.n, a.dim, a.queries, seed)?;
            let width = match a.width {
                Some(w) => w,
                None => default_bucket_width(&data)?,
            };
            let grid: Vec<LshParams> = a
                .k_values
                .iter()
                .flat_map(|&k| {
                    a.tables.iter().map(move |&l| LshParams {
                        hashes_per_table: k,
                        num_tables: l,
                        bucket_width: width,
                        seed,
                    })
                })
                .collect();
            let mut r = Report::new(report::LSH_BENCH, seed);
            r.comments.push(format!(
                "n={} dim={} queries={} width={}",
                a.n,
                a.dim,
                a.queries,
                if a.width.is_some() { "given" } else { "median-nn" }
            ));
            for row in lsh_recall_sweep(&data, &queries, &grid, a.max_candidates)? {
                r.push(vec![
                    row.params.hashes_per_table.into(),
                    row.params.num_tables.into(),
                    row.params.bucket_width.into(),
                    row.max_candidates.into(),
                    row.recall_at_1.into(),
                    row.mean_candidates.into(),
                    row.mean_distance_ratio.into(),
                ]);
            }
            r
        }
        Command::Gen(a) => {
            let mut rng = root.derive("gen", &[]).rng();
            let ds = match a.kind {
                DatasetKind::Gaussian => gaussian_dataset(a.n, a.dim, &mut rng)?,
                DatasetKind::Grid => grid_dataset(a.n, a.dim, a.extent, &mut rng)?,
                DatasetKind::Mixture => gaussian_mixture(a.n, a.dim, a.separation, &mut rng)?,
            };
            return Ok(Output::Dataset(ds));
        }
    };
    Ok(Output::Report(report))
}

/// Gaussian database and independent Gaussian queries used by `lsh-bench`.
pub fn lsh_workload(n: usize, dim: usize, queries: usize, seed: u64) -> Result<(Dataset, Vec<Vec<f64>>)> {
    let root = RngStream::new(seed, 0);
    let data = gaussian_dataset(n, dim, &mut root.derive("lsh-data", &[]).rng())?;
    let mut qrng = root.derive("lsh-queries", &[]).rng();
    let qs = (0..queries).map(|_| gaussian_point(dim, &mut qrng)).collect();
    Ok((data, qs))
}

/// Parses, runs and writes. Returns the process exit code.
pub fn main_with_args<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let cli = match parse_args(argv) {
        Ok(cli) => cli,
        Err(CliError::Usage(e)) => {
            let _ = e.print();
            return e.exit_code();
        }
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let out = &cli.command.common().out;
    match execute(&cli.command).and_then(|o| o.write(out)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Field;

    fn args(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_owned).collect()
    }

    #[test]
    fn concentration_example() {
        let cli = parse_args(args("concentration --dims 100,1000 --sizes 100 --runs 5 --seed 42 --out r.csv")).unwrap();
        let Command::Concentration(a) = cli.command else {
            panic!("wrong subcommand")
        };
        assert_eq!(a.dims, vec![100, 1000]);
        assert_eq!(a.sizes, vec![100]);
        assert_eq!(a.runs, 5);
        assert_eq!(a.common.seed, 42);
        assert_eq!(a.common.out, PathBuf::from("r.csv"));
        assert_eq!(a.large_cell_runs, 20);
    }

    #[test]
    fn missing_out_is_named() {
        let err = parse_args(["concentration"]).unwrap_err();
        assert!(err.to_string().contains("--out"), "{err}");
        assert_ne!(err.exit_code(), 0);
    }

    #[test]
    fn every_invalid_flag_is_listed() {
        let err = parse_args(args("perturb-check --duplicates 1 --amplitude 0.3 --draws 0 --out x.csv")).unwrap_err();
        let CliError::Invalid(errors) = &err else {
            panic!("{err}")
        };
        assert_eq!(errors.len(), 3, "{errors:?}");
        let text = err.to_string();
        for flag in ["--duplicates", "--amplitude", "--draws"] {
            assert!(text.contains(flag), "{text}");
        }
    }

    #[test]
    fn unparseable_value_names_the_flag() {
        let err = parse_args(args("local-sim --trials many --out x.csv")).unwrap_err();
        assert!(err.to_string().contains("--trials"), "{err}");
        let err = parse_args(args("local-sim --policies sneaky --out x.csv")).unwrap_err();
        assert!(err.to_string().contains("--policies"), "{err}");
        let err = parse_args(args("local-sim --policies farthest --out x.csv")).unwrap_err();
        assert!(err.to_string().contains("--policies"), "{err}");
    }

    #[test]
    fn unknown_command_fails() {
        assert!(parse_args(args("bogus --out x.csv")).is_err());
    }

    #[test]
    fn config_supplies_and_yields() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        std::fs::write(&cfg, "# comment\nruns=100\ndims = 10,20\nout=from-config.csv\n").unwrap();
        let c = cfg.display();
        let cli = parse_args(args(&format!("concentration --config {c} --runs 20"))).unwrap();
        let Command::Concentration(a) = cli.command else {
            panic!()
        };
        assert_eq!(a.runs, 20);
        assert_eq!(a.dims, vec![10, 20]);
        assert_eq!(a.common.out, PathBuf::from("from-config.csv"));

        let cli = parse_args(args(&format!("concentration --config={c} --runs=7 --out o.csv"))).unwrap();
        let Command::Concentration(a) = cli.command else {
            panic!()
        };
        assert_eq!((a.runs, a.common.out), (7, PathBuf::from("o.csv")));
    }

    #[test]
    fn bad_config_files() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("bad.cfg");
        std::fs::write(&cfg, "runs\n").unwrap();
        let err = parse_args(args(&format!("concentration --config {} --out x", cfg.display()))).unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
        std::fs::write(&cfg, "bogus=1\n").unwrap();
        let err = parse_args(args(&format!("concentration --config {} --out x", cfg.display()))).unwrap_err();
        assert!(err.to_string().contains("--bogus"), "{err}");
        let err = parse_args(args("concentration --config /nonexistent/c.cfg --out x")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/c.cfg"), "{err}");
    }

    #[test]
    fn local_sim_rows_follow_the_grid() {
        let cli = parse_args(args("local-sim --e-grid 0.1,0.3 --k-grid 1,4 --trials 2000 --out x.csv")).unwrap();
        let Output::Report(r) = execute(&cli.command).unwrap() else {
            panic!()
        };
        assert_eq!(r.rows.len(), 12);
        assert_eq!(r.rows[0][0], Field::Float(0.1));
        assert_eq!(r.rows[0][2], Field::Text("random-uniform".into()));
    }
}
