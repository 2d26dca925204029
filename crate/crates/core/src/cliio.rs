//! File formats and command implementations behind the `fplr` binary.
//!
//! * Curve files are CSV: the first row holds the ascending, uniformly
//!   spaced grid points, every further row one curve's samples.
//! * A dataset manifest is JSON pointing at the `X` and `T` curve files
//!   (paths relative to the manifest) with the responses inline or in a
//!   one-column CSV, plus an optional truth block for simulated data.
//! * A model file is versioned JSON holding every fitted quantity needed to
//!   predict.
//!
//! Numbers are written in shortest round-trip decimal form, so reading a
//! file back reproduces the stored `f64` values exactly.

use crate::error::FplmError;
use crate::fplm::{
    cross_validate, fit_fplm, Bandwidth, CvConfig, CvResult, FitConfig, FittedModel, FlmPath,
};
use crate::funcspace::{Curve, FunctionalDataset, Grid};
use crate::kernelreg::{pairwise_distances, KernelSpec, WeightMatrix};
use crate::simstudy::{
    error_report, export_bhat, generate, regression_mse, run_benchmark, BenchmarkMode,
    BenchmarkSpec, BenchmarkTable, SimConfig, TruthBundle,
};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const MODEL_FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Estimator(#[from] FplmError),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    /// 2 for user errors, 3 for estimator failures, 4 for I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Format(_) => 2,
            CliError::Estimator(FplmError::InvalidConfig(_)) => 2,
            CliError::Estimator(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(io_err(path))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(io_err(path))
}

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

// ---------------------------------------------------------------- curves

/// Serializes curves sharing `grid` in the curve CSV layout.
pub fn curves_to_csv(grid: &Grid, curves: &[Curve]) -> CliResult<String> {
    let mut out = String::new();
    push_row(&mut out, grid.points().into_iter());
    for c in curves {
        if c.grid() != grid {
            return Err(
                FplmError::GridMismatch("curve does not live on the file grid".into()).into(),
            );
        }
        push_row(&mut out, c.values().iter().copied());
    }
    Ok(out)
}

fn push_row(out: &mut String, values: impl Iterator<Item = f64>) {
    let mut first = true;
    for v in values {
        if !first {
            out.push(',');
        }
        first = false;
        out.push_str(&fmt_f64(v));
    }
    out.push('\n');
}

/// Parses the curve CSV layout. Zero curves is allowed; the grid row is not optional.
pub fn parse_curves(text: &str) -> CliResult<(Grid, Vec<Curve>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Format(format!("row {}: {e}", k + 1)))?;
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        let row = record
            .iter()
            .map(|f| parse_finite(f).map_err(|e| CliError::Format(format!("row {}: {e}", k + 1))))
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(row);
    }
    let Some((points, curves)) = rows.split_first() else {
        return Err(CliError::Format("curve file has no grid row".into()));
    };
    let grid = grid_from_points(points)?;
    let curves = curves
        .iter()
        .enumerate()
        .map(|(k, vals)| {
            if vals.len() != grid.len() {
                return Err(CliError::Format(format!(
                    "curve {} has {} values, grid has {}",
                    k + 1,
                    vals.len(),
                    grid.len()
                )));
            }
            Ok(Curve::new(grid, vals.clone())?)
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok((grid, curves))
}

fn parse_finite(field: &str) -> std::result::Result<f64, String> {
    let v: f64 = field
        .parse()
        .map_err(|_| format!("'{field}' is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{field}' is not finite"))
    }
}

/// Rebuilds a uniform grid from its listed points.
pub fn grid_from_points(points: &[f64]) -> CliResult<Grid> {
    if points.len() < 2 {
        return Err(CliError::Format("grid row needs at least 2 points".into()));
    }
    let start = points[0];
    let end = points[points.len() - 1];
    let grid = Grid::new(start, end, points.len())
        .map_err(|e| CliError::Format(format!("grid row: {e}")))?;
    let tol = 1e-9 * (end - start).abs().max(1.0);
    for (k, p) in points.iter().enumerate() {
        if (p - grid.point(k)).abs() > tol {
            return Err(CliError::Format(format!(
                "grid point {k} ({p}) breaks uniform spacing"
            )));
        }
    }
    Ok(grid)
}

pub fn read_curves(path: &Path) -> CliResult<(Grid, Vec<Curve>)> {
    parse_curves(&read_text(path)?).map_err(|e| match e {
        CliError::Format(msg) => CliError::Format(format!("{}: {msg}", path.display())),
        other => other,
    })
}

// -------------------------------------------------------------- manifest

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthBlock {
    /// Curve file holding the true slope function.
    pub b_true: String,
    pub g_values: Vec<f64>,
    pub linear_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format_version: u32,
    pub x_curves: String,
    pub t_curves: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
    /// One-column CSV of responses, with or without a `y` header.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_file: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<TruthBlock>,
}

impl Manifest {
    pub fn from_json_str(text: &str) -> CliResult<Self> {
        let m: Manifest =
            serde_json::from_str(text).map_err(|e| CliError::Format(format!("manifest: {e}")))?;
        if m.format_version != MANIFEST_FORMAT_VERSION {
            return Err(CliError::Format(format!(
                "unsupported manifest version {}",
                m.format_version
            )));
        }
        if m.y.is_some() == m.y_file.is_some() {
            return Err(CliError::Format(
                "manifest needs exactly one of 'y' and 'y_file'".into(),
            ));
        }
        if let Some(y) = &m.y {
            if y.iter().any(|v| !v.is_finite()) {
                return Err(CliError::Format("responses must be finite".into()));
            }
        }
        if let Some(t) = &m.truth {
            if t.g_values.len() != t.linear_values.len() {
                return Err(CliError::Format(
                    "truth g_values and linear_values differ in length".into(),
                ));
            }
        }
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

pub fn parse_y_column(text: &str) -> CliResult<Vec<f64>> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (k == 0 && line.eq_ignore_ascii_case("y")) {
            continue;
        }
        out.push(
            parse_finite(line).map_err(|e| CliError::Format(format!("y row {}: {e}", k + 1)))?,
        );
    }
    Ok(out)
}

/// Dataset and optional truth described by a manifest file.
#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub data: FunctionalDataset,
    pub truth: Option<TruthBundle>,
}

pub fn load_dataset(manifest_path: &Path) -> CliResult<LoadedDataset> {
    let manifest = Manifest::from_json_str(&read_text(manifest_path)?)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let (_, x) = read_curves(&base.join(&manifest.x_curves))?;
    let (_, t) = read_curves(&base.join(&manifest.t_curves))?;
    let y = match (&manifest.y, &manifest.y_file) {
        (Some(y), _) => y.clone(),
        (None, Some(f)) => parse_y_column(&read_text(&base.join(f))?)?,
        (None, None) => unreachable!("validated by Manifest::from_json_str"),
    };
    if x.len() != y.len() || t.len() != y.len() {
        return Err(CliError::Format(format!(
            "row counts disagree: {} X curves, {} T curves, {} responses",
            x.len(),
            t.len(),
            y.len()
        )));
    }
    let data = FunctionalDataset::new(x, t, y).map_err(|e| CliError::Format(e.to_string()))?;
    let truth = match &manifest.truth {
        None => None,
        Some(block) => {
            let (_, b) = read_curves(&base.join(&block.b_true))?;
            let [b_true] = <[Curve; 1]>::try_from(b)
                .map_err(|_| CliError::Format("truth b_true file must hold one curve".into()))?;
            if block.g_values.len() != data.len() {
                return Err(CliError::Format("truth block length differs from n".into()));
            }
            Some(TruthBundle {
                b_true,
                g_values: block.g_values.clone(),
                linear_values: block.linear_values.clone(),
            })
        }
    };
    Ok(LoadedDataset { data, truth })
}

// ----------------------------------------------------------------- model

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub end: f64,
    pub num_points: usize,
}

impl From<&Grid> for GridSpec {
    fn from(g: &Grid) -> Self {
        Self {
            start: g.start(),
            end: g.end(),
            num_points: g.len(),
        }
    }
}

impl GridSpec {
    fn to_grid(self) -> CliResult<Grid> {
        Grid::new(self.start, self.end, self.num_points)
            .map_err(|e| CliError::Format(format!("model grid: {e}")))
    }
}

/// On-disk form of a [`FittedModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format_version: u32,
    pub grid_x: GridSpec,
    pub grid_t: GridSpec,
    pub b_hat: Vec<f64>,
    pub m: usize,
    pub h: f64,
    pub kernel: KernelSpec,
    pub t_train: Vec<Vec<f64>>,
    pub partial_residuals: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub eigenvalues_used: Vec<f64>,
    pub fitted_g: Vec<f64>,
}

impl ModelFile {
    pub fn from_model(model: &FittedModel) -> Self {
        Self {
            format_version: MODEL_FORMAT_VERSION,
            grid_x: model.b_hat.grid().into(),
            grid_t: model.t_train[0].grid().into(),
            b_hat: model.b_hat.values().to_vec(),
            m: model.m,
            h: model.h,
            kernel: model.kernel,
            t_train: model.t_train.iter().map(|c| c.values().to_vec()).collect(),
            partial_residuals: model.partial_residuals.clone(),
            coefficients: model.coefficients.clone(),
            eigenvalues_used: model.eigenvalues_used.clone(),
            fitted_g: model.fitted_g.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn from_json_str(text: &str) -> CliResult<Self> {
        // Check the version before the full schema so that newer files get a
        // clear message rather than a field error.
        let probe: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::Format(format!("model file: {e}")))?;
        match probe.get("format_version").and_then(|v| v.as_u64()) {
            Some(v) if v == MODEL_FORMAT_VERSION as u64 => {}
            Some(v) => {
                return Err(CliError::Format(format!(
                    "model format version {v} is not supported (expected {MODEL_FORMAT_VERSION})"
                )))
            }
            None => return Err(CliError::Format("model file lacks format_version".into())),
        }
        serde_json::from_value(probe).map_err(|e| CliError::Format(format!("model file: {e}")))
    }

    pub fn to_model(&self) -> CliResult<FittedModel> {
        let bad = |msg: &str| CliError::Format(format!("model file: {msg}"));
        let grid_x = self.grid_x.to_grid()?;
        let grid_t = self.grid_t.to_grid()?;
        let n = self.t_train.len();
        if n == 0 {
            return Err(bad("no training curves"));
        }
        if self.partial_residuals.len() != n || self.fitted_g.len() != n {
            return Err(bad(
                "per-observation arrays disagree with the training size",
            ));
        }
        if self.m == 0 || self.coefficients.len() != self.m || self.eigenvalues_used.len() != self.m
        {
            return Err(bad("coefficient arrays disagree with m"));
        }
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(bad("bandwidth must be positive"));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&self.partial_residuals)
            || !finite(&self.coefficients)
            || !finite(&self.eigenvalues_used)
            || !finite(&self.fitted_g)
        {
            return Err(bad("non-finite value"));
        }
        let b_hat = Curve::new(grid_x, self.b_hat.clone()).map_err(|e| bad(&e.to_string()))?;
        let t_train = self
            .t_train
            .iter()
            .map(|v| Curve::new(grid_t, v.clone()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| bad(&e.to_string()))?;
        Ok(FittedModel {
            b_hat,
            m: self.m,
            h: self.h,
            kernel: self.kernel,
            t_train,
            partial_residuals: self.partial_residuals.clone(),
            coefficients: self.coefficients.clone(),
            eigenvalues_used: self.eigenvalues_used.clone(),
            fitted_g: self.fitted_g.clone(),
        })
    }
}

pub fn save_model(model: &FittedModel, path: &Path) -> CliResult<()> {
    write_text(path, &ModelFile::from_model(model).to_json())
}

pub fn load_model(path: &Path) -> CliResult<FittedModel> {
    ModelFile::from_json_str(&read_text(path)?)?.to_model()
}

// ---------------------------------------------------------- tabular output

pub fn benchmark_to_csv(table: &BenchmarkTable) -> String {
    let mut out = String::from("m,multiplier,mse1,mse2,mse3,completed,missing\n");
    for c in &table.cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            c.m.map(|m| m.to_string()).unwrap_or_default(),
            fmt_opt(c.multiplier),
            fmt_opt(c.mse1),
            fmt_opt(c.mse2),
            fmt_opt(c.mse3),
            c.completed,
            c.missing
        );
    }
    out
}

pub fn cv_to_csv(result: &CvResult) -> String {
    let mut out = String::from("m,multiplier,cv_error,failed_folds\n");
    for c in &result.table {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            c.m,
            fmt_f64(c.multiplier),
            fmt_opt(c.mean_error),
            c.failed_folds
        );
    }
    out
}

pub fn slope_to_csv(rows: &[[f64; 3]]) -> String {
    let mut out = String::from("s,b_true,b_hat\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", fmt_f64(r[0]), fmt_f64(r[1]), fmt_f64(r[2]));
    }
    out
}

/// One prediction; `None` parts mark an empty kernel neighborhood.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionRow {
    pub linear: f64,
    pub g: Option<f64>,
}

pub fn predictions_to_csv(rows: &[PredictionRow]) -> String {
    let mut out = String::from("index,linear,g,total,status\n");
    for (i, r) in rows.iter().enumerate() {
        let _ = match r.g {
            Some(g) => writeln!(
                out,
                "{i},{},{},{},ok",
                fmt_f64(r.linear),
                fmt_f64(g),
                fmt_f64(r.linear + g)
            ),
            None => writeln!(out, "{i},{},,,empty_neighborhood", fmt_f64(r.linear)),
        };
    }
    out
}

// -------------------------------------------------------------- commands

#[derive(Debug, Parser)]
#[command(name = "fplr", version, about = "Functional partial linear regression")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a simulated dataset and write X.csv, T.csv, b_true.csv and manifest.json
    Simulate(SimulateArgs),
    /// Fit the partial linear model to a dataset and save it
    Fit(FitArgs),
    /// Predict responses for pairs of X and T curves with a saved model
    Predict(PredictArgs),
    /// Monte Carlo benchmark over a grid of truncation levels and bandwidths
    Benchmark(BenchmarkArgs),
    /// Fit the fully linear and fully nonparametric comparison models
    Compare(CompareArgs),
    /// K-fold cross-validation over truncation levels and bandwidth multipliers
    Crossval(CrossvalArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.5)]
    pub noise_sd: f64,
    #[arg(long, default_value_t = crate::funcspace::DEFAULT_GRID_POINTS)]
    pub grid_points: usize,
    #[arg(long, default_value_t = 50)]
    pub series_terms: usize,
    /// Draw a and d of T independently of X
    #[arg(long)]
    pub independent: bool,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub m: usize,
    /// Absolute bandwidth; overrides the multiplier
    #[arg(long, conflicts_with = "bandwidth_multiplier")]
    pub bandwidth: Option<f64>,
    /// Bandwidth as a multiple of the median pairwise T distance
    #[arg(long)]
    pub bandwidth_multiplier: Option<f64>,
    #[arg(long, default_value = "quadratic")]
    pub kernel: String,
    #[arg(long)]
    pub out_model: PathBuf,
    /// Write (s, b_true, b_hat) rows; requires a truth block
    #[arg(long)]
    pub slope_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub x_curves: PathBuf,
    #[arg(long)]
    pub t_curves: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct BenchmarkArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub replications: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// fplm, flm or npfr
    #[arg(long, default_value = "fplm")]
    pub mode: String,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    pub m_grid: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
    pub multipliers: Vec<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub noise_sd: f64,
    #[arg(long, default_value_t = crate::funcspace::DEFAULT_GRID_POINTS)]
    pub grid_points: usize,
    #[arg(long, default_value = "quadratic")]
    pub kernel: String,
    /// Worker threads; 0 uses the default pool
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    pub m_grid: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
    pub multipliers: Vec<f64>,
    #[arg(long, default_value = "quadratic")]
    pub kernel: String,
}

#[derive(Debug, Clone, Args)]
pub struct CrossvalArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    pub m_grid: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
    pub multipliers: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "quadratic")]
    pub kernel: String,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_kernel(s: &str) -> CliResult<KernelSpec> {
    s.parse()
        .map_err(|e: FplmError| CliError::Usage(e.to_string()))
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

/// Runs one subcommand and returns the text for standard output.
pub fn run(cli: &Cli) -> CliResult<String> {
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Benchmark(a) => cmd_benchmark(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Crossval(a) => cmd_crossval(a),
    }
}

pub fn cmd_simulate(args: &SimulateArgs) -> CliResult<String> {
    let cfg = SimConfig {
        n: args.n,
        noise_sd: args.noise_sd,
        seed: args.seed,
        grid_points: args.grid_points,
        series_truncation: args.series_terms,
        dependence: !args.independent,
        include_g: true,
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let (data, truth) = generate(&cfg)?;
    ensure_dir(&args.out_dir)?;
    write_text(
        &args.out_dir.join("X.csv"),
        &curves_to_csv(data.grid_x(), data.x())?,
    )?;
    write_text(
        &args.out_dir.join("T.csv"),
        &curves_to_csv(data.grid_t(), data.t())?,
    )?;
    write_text(
        &args.out_dir.join("b_true.csv"),
        &curves_to_csv(truth.b_true.grid(), std::slice::from_ref(&truth.b_true))?,
    )?;
    let manifest = Manifest {
        format_version: MANIFEST_FORMAT_VERSION,
        x_curves: "X.csv".into(),
        t_curves: "T.csv".into(),
        y: Some(data.y().to_vec()),
        y_file: None,
        truth: Some(TruthBlock {
            b_true: "b_true.csv".into(),
            g_values: truth.g_values.clone(),
            linear_values: truth.linear_values.clone(),
        }),
    };
    write_text(&args.out_dir.join("manifest.json"), &manifest.to_json())?;
    Ok(format!(
        "simulated n={} seed={} into {}\n",
        cfg.n,
        cfg.seed,
        args.out_dir.display()
    ))
}

pub fn cmd_fit(args: &FitArgs) -> CliResult<String> {
    let kernel = parse_kernel(&args.kernel)?;
    let loaded = load_dataset(&args.manifest)?;
    let bandwidth = match (args.bandwidth, args.bandwidth_multiplier) {
        (Some(h), _) => Bandwidth::Absolute(h),
        (None, Some(c)) => Bandwidth::Multiplier(c),
        (None, None) => Bandwidth::Multiplier(1.0),
    };
    let cfg = FitConfig::new(args.m, bandwidth, kernel);
    let model = fit_fplm(&loaded.data, &cfg)?;
    save_model(&model, &args.out_model)?;

    let median = pairwise_distances(loaded.data.t())?.median().ok();
    let mut out = String::new();
    let _ = writeln!(out, "n\t{}", loaded.data.len());
    let _ = writeln!(out, "median_distance\t{}", fmt_opt(median));
    let _ = writeln!(out, "bandwidth\t{}", fmt_f64(model.h));
    let _ = writeln!(out, "kernel\t{}", model.kernel);
    let _ = writeln!(out, "m\t{}", model.m);
    let eig: Vec<String> = model.eigenvalues_used.iter().map(|v| fmt_f64(*v)).collect();
    let _ = writeln!(out, "eigenvalues\t{}", eig.join(","));
    if let Some(truth) = &loaded.truth {
        let report = error_report(&model, &loaded.data, truth)?;
        let _ = writeln!(out, "mse1\t{}", fmt_f64(report.mse1));
        let _ = writeln!(out, "mse2\t{}", fmt_f64(report.mse2));
        let _ = writeln!(out, "mse3\t{}", fmt_f64(report.mse3));
    }
    if let Some(path) = &args.slope_out {
        let truth = loaded.truth.as_ref().ok_or_else(|| {
            CliError::Usage("--slope-out needs a manifest with a truth block".into())
        })?;
        write_text(path, &slope_to_csv(&export_bhat(&model, &truth.b_true)?))?;
    }
    Ok(out)
}

/// Predictions for paired curves; rows whose `T` curve has no training
/// neighbor within the bandwidth carry `g = None`.
pub fn predict_rows(
    model: &FittedModel,
    x: &[Curve],
    t: &[Curve],
) -> CliResult<Vec<PredictionRow>> {
    if x.len() != t.len() {
        return Err(CliError::Format(format!(
            "{} X curves but {} T curves",
            x.len(),
            t.len()
        )));
    }
    x.iter()
        .zip(t)
        .map(|(xi, ti)| {
            let linear = crate::funcspace::inner_product(&model.b_hat, xi)?;
            match model.predict_g(ti) {
                Ok(g) => Ok(PredictionRow { linear, g: Some(g) }),
                Err(FplmError::EmptyNeighborhood { .. }) => Ok(PredictionRow { linear, g: None }),
                Err(e) => Err(e.into()),
            }
        })
        .collect()
}

pub fn cmd_predict(args: &PredictArgs) -> CliResult<String> {
    let model = load_model(&args.model)?;
    let (_, x) = read_curves(&args.x_curves)?;
    let (_, t) = read_curves(&args.t_curves)?;
    let rows = predict_rows(&model, &x, &t)?;
    write_text(&args.out, &predictions_to_csv(&rows))?;
    let ok = rows.iter().filter(|r| r.g.is_some()).count();
    if ok == 0 && !rows.is_empty() {
        let d = crate::kernelreg::distances_to(&model.t_train, &t[0])?;
        let nearest = d.into_iter().fold(f64::INFINITY, f64::min);
        return Err(FplmError::EmptyNeighborhood {
            nearest,
            bandwidth: model.h,
        }
        .into());
    }
    Ok(format!(
        "predicted {} rows ({} without kernel neighbors)\n",
        rows.len(),
        rows.len() - ok
    ))
}

fn benchmark_inputs(args: &BenchmarkArgs) -> CliResult<(SimConfig, BenchmarkSpec)> {
    let mode: BenchmarkMode = args
        .mode
        .parse()
        .map_err(|e: FplmError| CliError::Usage(e.to_string()))?;
    let config = SimConfig {
        noise_sd: args.noise_sd,
        grid_points: args.grid_points,
        ..SimConfig::new(args.n, args.seed)
    };
    config
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let spec = BenchmarkSpec {
        m_grid: args.m_grid.clone(),
        multipliers: args.multipliers.clone(),
        replications: args.replications,
        mode,
        kernel: parse_kernel(&args.kernel)?,
    };
    Ok((config, spec))
}

pub fn cmd_benchmark(args: &BenchmarkArgs) -> CliResult<String> {
    let (config, spec) = benchmark_inputs(args)?;
    let table = if args.threads == 0 {
        run_benchmark(&config, &spec)?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(args.threads)
            .build()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?
            .install(|| run_benchmark(&config, &spec))?
    };
    let csv = benchmark_to_csv(&table);
    write_text(&args.out, &csv)?;
    Ok(csv)
}

pub fn cmd_compare(args: &CompareArgs) -> CliResult<String> {
    let kernel = parse_kernel(&args.kernel)?;
    let loaded = load_dataset(&args.manifest)?;
    let data = &loaded.data;
    let z = data.concatenated()?;
    let max_m = args.m_grid.iter().copied().max().unwrap_or(1);
    let mut out = String::from("model,m,multiplier,in_sample_mse,regression_mse\n");
    let score = |preds: &[f64]| -> CliResult<(f64, Option<f64>)> {
        let resid: f64 = preds
            .iter()
            .zip(data.y())
            .map(|(p, y)| (p - y).powi(2))
            .sum::<f64>()
            / preds.len() as f64;
        let truth = match &loaded.truth {
            Some(t) => Some(regression_mse(preds, t)?),
            None => None,
        };
        Ok((resid, truth))
    };
    let path = FlmPath::new(&z, data.y(), max_m)?;
    for &m in &args.m_grid {
        match path.model(m) {
            Ok(fit) => {
                let preds = z
                    .iter()
                    .map(|zi| fit.predict(zi))
                    .collect::<Result<Vec<_>, _>>()?;
                let (r, t) = score(&preds)?;
                let _ = writeln!(out, "flm,{m},,{},{}", fmt_f64(r), fmt_opt(t));
            }
            Err(e) => {
                let _ = writeln!(out, "flm,{m},,,  # {e}");
            }
        }
    }
    let dist = pairwise_distances(&z)?;
    let h0 = dist.median()?;
    for &c in &args.multipliers {
        let w = WeightMatrix::from_distances(&dist, c * h0, kernel)?;
        let preds = w.smooth(data.y())?;
        let (r, t) = score(&preds)?;
        let _ = writeln!(out, "npfr,,{},{},{}", fmt_f64(c), fmt_f64(r), fmt_opt(t));
    }
    Ok(out)
}

pub fn cmd_crossval(args: &CrossvalArgs) -> CliResult<String> {
    let loaded = load_dataset(&args.manifest)?;
    let cfg = CvConfig {
        m_grid: args.m_grid.clone(),
        multipliers: args.multipliers.clone(),
        folds: args.folds,
        seed: args.seed,
        kernel: parse_kernel(&args.kernel)?,
    };
    let result = cross_validate(&loaded.data, &cfg)?;
    write_text(&args.out, &cv_to_csv(&result))?;
    Ok(format!(
        "selected m={} multiplier={}\n",
        result.best_m,
        fmt_f64(result.best_multiplier)
    ))
}
