//! Command-line front end.
//!
//! Four subcommands: `fit` and `cv` work on a CSV file, `simulate` writes a
//! synthetic data set, and `bench` runs a simulation study. Every flag can
//! also come from a JSON file given by `--config`; flags given on the
//! command line win.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::warn;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bench::{self, BenchOptions, Covariance, Method, ProbsKind, ReplicateSeeds, SimDesign};
use crate::error::{Error, PairMember, Result};
use crate::linalg::NormKind;
use crate::lpd::{LpdConfig, DEFAULT_EPSILON};
use crate::missing::{
    apply_missing, read_csv, write_csv, Affected, CsvOptions, IncompleteMatrix, IncompleteVector, MechanismKind,
    MissingMechanism, ZeroPairPolicy,
};
use crate::select::{self, LambdaRule, ProbsPolicy, TuneOptions};
use crate::summation;

#[derive(Debug, Parser)]
#[command(name = "lpd-lasso", version, about = "Lasso for data with missing values")]
pub struct Cli {
    /// JSON file with default values for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Increase log verbosity.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit on a CSV file and write coefficients.csv and diagnostics.json.
    Fit(DataArgs),
    /// Corrected cross-validation; writes cv_curve.csv and lambda.json.
    Cv(DataArgs),
    /// Simulate a data set with missing values; writes data.csv and beta.csv.
    Simulate(SimulateArgs),
    /// Run a simulation study; writes table.csv, replicates.csv and manifest.json.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleArg {
    Min,
    #[value(name = "1se")]
    #[serde(rename = "1se")]
    OneSe,
}

impl From<RuleArg> for LambdaRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Min => LambdaRule::Min,
            RuleArg::OneSe => LambdaRule::OneSe,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MechanismArg {
    Mcar,
    Mar,
    Mnar,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Name of the response column (default: the first column).
    #[arg(long)]
    pub response_col: Option<String>,
    /// Token for missing cells (empty cells are always missing).
    #[arg(long)]
    pub na_token: Option<String>,
    /// Norm for the positive definite modification.
    #[arg(long, value_parser = parse_norm)]
    pub norm: Option<NormKind>,
    /// Multiplier applied to the optimal mu when the optimum is a half-line.
    #[arg(long)]
    pub mu_factor: Option<f64>,
    /// Lower bound on the smallest eigenvalue after modification.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Fit at this lambda instead of cross-validating.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Take lambda_1se from a lambda.json written by `cv`.
    #[arg(long)]
    pub lambda_from: Option<PathBuf>,
    /// Rule for picking lambda from the CV curve.
    #[arg(long, value_enum)]
    pub rule: Option<RuleArg>,
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Fit on the raw scale (assumes centred data).
    #[arg(long)]
    pub no_standardize: bool,
    /// Estimate observation probabilities once from all rows during CV.
    #[arg(long)]
    pub pooled_probs: bool,
    /// Replace never-observed pairs by 1/n instead of failing.
    #[arg(long)]
    pub zero_pair_fallback: bool,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    /// Proportion of non-zero coefficients.
    #[arg(long)]
    pub sparsity: Option<f64>,
    /// Value of the non-zero coefficients.
    #[arg(long)]
    pub signal: Option<f64>,
    #[arg(long)]
    pub sigma_y: Option<f64>,
    /// Compound-symmetry correlation.
    #[arg(long)]
    pub correlation: Option<f64>,
    #[arg(long, value_enum)]
    pub mechanism: Option<MechanismArg>,
    /// Observation probability of the affected cells.
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub design: DesignArgs,
    #[arg(long)]
    pub na_token: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub design: DesignArgs,
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Comma-separated methods: `<norm>[:k]`, `naive`, `true`.
    #[arg(long, value_delimiter = ',')]
    pub methods: Option<Vec<String>>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long, value_enum)]
    pub rule: Option<RuleArg>,
    /// Use the exact MCAR observation probabilities.
    #[arg(long)]
    pub known_probs: bool,
    /// Leave out timing columns so reruns are byte-identical.
    #[arg(long)]
    pub omit_timing: bool,
}

fn parse_norm(s: &str) -> std::result::Result<NormKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Overlays the non-default values of `flags` on the JSON object in `file`.
fn merge_config<T: Serialize + for<'de> Deserialize<'de>>(flags: &T, file: Option<&Path>) -> Result<T> {
    let Some(path) = file else {
        return Ok(serde_json::from_value(serde_json::to_value(flags)?)?);
    };
    let mut base: Value = serde_json::from_reader(File::open(path)?)?;
    let Value::Object(ref mut map) = base else {
        return Err(Error::InvalidInput(format!("{}: config must be a JSON object", path.display())));
    };
    if let Value::Object(over) = serde_json::to_value(flags)? {
        for (k, v) in over {
            if !(v.is_null() || v == Value::Bool(false)) {
                map.insert(k, v);
            }
        }
    }
    Ok(serde_json::from_value(base)?)
}

pub fn run(cli: Cli) -> Result<()> {
    let config = cli.config.as_deref();
    match cli.command {
        Command::Fit(a) => cmd_fit(&merge_config(&a, config)?),
        Command::Cv(a) => cmd_cv(&merge_config(&a, config)?),
        Command::Simulate(a) => cmd_simulate(&merge_config(&a, config)?),
        Command::Bench(a) => cmd_bench(&merge_config(&a, config)?),
    }
}

/// Entry point used by the binary: parses `args`, runs, returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            1
        }
    }
}

fn out_dir(dir: &Option<PathBuf>) -> Result<PathBuf> {
    let dir = dir.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    std::io::Write::write_all(&mut f, b"\n")?;
    Ok(())
}

/// Response and covariates read from a CSV file.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub names: Vec<String>,
    pub response_name: String,
    pub x: IncompleteMatrix,
    pub y: IncompleteVector,
}

pub fn load_dataset(path: &Path, response: Option<&str>, na_token: &str) -> Result<Dataset> {
    let opts = CsvOptions { na_token: na_token.to_string(), ..Default::default() };
    let table = read_csv(File::open(path)?, &opts)?;
    let yj = match response {
        Some(name) => table
            .column_index(name)
            .ok_or_else(|| Error::InvalidInput(format!("no column named '{name}' in {}", path.display())))?,
        None => 0,
    };
    let p = table.headers.len();
    if p < 2 {
        return Err(Error::InvalidInput("need a response and at least one covariate".into()));
    }
    let cols: Vec<usize> = (0..p).filter(|&j| j != yj).collect();
    let d = &table.data;
    let x = IncompleteMatrix::from_columns_fn(d.nrows(), cols.len(), |i, j| d.get(i, cols[j]))?;
    let y = IncompleteVector::from_options((0..d.nrows()).map(|i| d.get(i, yj)))?;
    Ok(Dataset {
        names: cols.iter().map(|&j| table.headers[j].clone()).collect(),
        response_name: table.headers[yj].clone(),
        x,
        y,
    })
}

/// Observed-cell means and standard deviations.
#[derive(Debug, Clone, Serialize)]
pub struct Scaling {
    pub x_mean: Vec<f64>,
    pub x_sd: Vec<f64>,
    pub y_mean: f64,
    pub y_sd: f64,
}

fn observed_mean_sd(values: &[f64], mask: &[bool]) -> (f64, f64, usize) {
    let obs: Vec<f64> = values.iter().zip(mask).filter(|(_, &m)| m).map(|(&v, _)| v).collect();
    let n = obs.len();
    if n == 0 {
        return (0.0, 0.0, 0);
    }
    let mean = summation::sum(obs.iter().copied()) / n as f64;
    let ss = summation::sum(obs.iter().map(|v| (v - mean).powi(2)));
    let sd = if n > 1 { (ss / (n - 1) as f64).sqrt() } else { 0.0 };
    (mean, sd, n)
}

/// Standardises every column in place; returns the scaling and warnings
/// for columns treated as constant.
pub fn standardize(data: &mut Dataset) -> (Scaling, Vec<String>) {
    let mut warnings = Vec::new();
    let mut guard = |name: &str, sd: f64| {
        if sd > 0.0 && sd.is_finite() {
            sd
        } else {
            let msg = format!("column '{name}' is constant on its observed cells; using sd = 1");
            warn!("{msg}");
            warnings.push(msg);
            1.0
        }
    };
    let (y_mean, y_sd, _) = observed_mean_sd(data.y.values(), data.y.mask());
    let y_sd = guard(&data.response_name, y_sd);
    data.y.map_observed(|v| (v - y_mean) / y_sd);
    let mut x_mean = Vec::new();
    let mut x_sd = Vec::new();
    for j in 0..data.x.ncols() {
        let (m, s, _) = observed_mean_sd(data.x.column(j), data.x.mask_column(j));
        let s = guard(&data.names[j], s);
        data.x.map_observed(j, |v| (v - m) / s);
        x_mean.push(m);
        x_sd.push(s);
    }
    (Scaling { x_mean, x_sd, y_mean, y_sd }, warnings)
}

/// Resolved settings for `fit` and `cv`.
#[derive(Debug, Clone)]
struct DataSettings {
    input: PathBuf,
    na_token: String,
    lpd: LpdConfig,
    tune: TuneOptions,
    standardize: bool,
    zero_pair: ZeroPairPolicy,
    out_dir: PathBuf,
}

impl DataSettings {
    fn from_args(a: &DataArgs) -> Result<Self> {
        let input = a.input.clone().ok_or_else(|| Error::InvalidInput("--input is required".into()))?;
        if !input.exists() {
            return Err(Error::InvalidInput(format!("input file {} does not exist", input.display())));
        }
        let lpd = LpdConfig::new(a.epsilon.unwrap_or(DEFAULT_EPSILON), a.norm.unwrap_or(NormKind::LInf))
            .with_mu_factor(a.mu_factor.unwrap_or(1.0));
        lpd.validate()?;
        let zero_pair = if a.zero_pair_fallback { ZeroPairPolicy::FallbackOneOverN } else { ZeroPairPolicy::Error };
        let tune = TuneOptions {
            grid_points: a.grid_points.unwrap_or(select::DEFAULT_GRID_POINTS),
            folds: a.folds.unwrap_or(select::DEFAULT_FOLDS),
            seed: a.seed.unwrap_or(0),
            rule: a.rule.map(LambdaRule::from).unwrap_or_default(),
            probs: if a.pooled_probs { ProbsPolicy::Pooled } else { ProbsPolicy::FoldLocal },
        };
        if tune.grid_points < 2 {
            return Err(Error::InvalidInput("--grid-points must be at least 2".into()));
        }
        if let Some(l) = a.lambda {
            if !(l >= 0.0) {
                return Err(Error::InvalidInput(format!("--lambda must be >= 0, got {l}")));
            }
        }
        Ok(DataSettings {
            input,
            na_token: a.na_token.clone().unwrap_or_else(|| "NA".into()),
            lpd,
            tune,
            standardize: !a.no_standardize,
            zero_pair,
            out_dir: out_dir(&a.out_dir)?,
        })
    }
}

/// Renames covariate indices in probability errors to column names.
fn name_pairs(e: Error, names: &[String], response: &str) -> Error {
    let describe = |j: usize, k: &PairMember| {
        let other = match k {
            PairMember::Covariate(k) => names[*k].as_str(),
            PairMember::Response => response,
        };
        Error::InvalidInput(format!("columns '{}' and '{}' are never observed together", names[j], other))
    };
    match e {
        Error::ZeroPairProbability { j, k } => describe(j, &k),
        Error::FoldEstimation { fold, source } => match *source {
            Error::ZeroPairProbability { j, k } => {
                Error::FoldEstimation { fold, source: Box::new(describe(j, &k)) }
            }
            other => Error::FoldEstimation { fold, source: Box::new(other) },
        },
        other => other,
    }
}

fn prepare(s: &DataSettings, response: Option<&str>) -> Result<(Dataset, Option<Scaling>, Vec<String>)> {
    let mut data = load_dataset(&s.input, response, &s.na_token)?;
    if s.standardize {
        let (scaling, warnings) = standardize(&mut data);
        Ok((data, Some(scaling), warnings))
    } else {
        Ok((data, None, Vec::new()))
    }
}

fn probs_for(data: &Dataset, s: &DataSettings) -> Result<ProbsPolicy> {
    Ok(match (&s.tune.probs, s.zero_pair) {
        (_, ZeroPairPolicy::FallbackOneOverN) => {
            ProbsPolicy::Known(crate::missing::estimate_probs_with(&data.x, &data.y, s.zero_pair)?)
        }
        (p, _) => p.clone(),
    })
}

fn read_lambda_file(path: &Path) -> Result<f64> {
    let v: Value = serde_json::from_reader(File::open(path)?)?;
    v.get("lambda_1se")
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::InvalidInput(format!("{}: no numeric lambda_1se", path.display())))
}

pub fn cmd_fit(args: &DataArgs) -> Result<()> {
    let s = DataSettings::from_args(args)?;
    let (data, scaling, warnings) = prepare(&s, args.response_col.as_deref())?;
    let names = data.names.clone();
    let rename = |e| name_pairs(e, &names, &data.response_name);
    let mut tune = s.tune.clone();
    tune.probs = probs_for(&data, &s).map_err(rename)?;

    let (lambda, source, pipeline) = match (args.lambda, &args.lambda_from) {
        (Some(l), _) => (l, "given".to_string(), None),
        (None, Some(path)) => (read_lambda_file(path)?, format!("lambda_1se from {}", path.display()), None),
        (None, None) => {
            let tuned = select::fit_tuned(&data.x, &data.y, &s.lpd, &tune).map_err(rename)?;
            let src = match tune.rule {
                LambdaRule::Min => "cv-min",
                LambdaRule::OneSe => "cv-1se",
            };
            (tuned.lambda, src.to_string(), Some(tuned.pipeline))
        }
    };
    let pipeline = match pipeline {
        Some(p) => p,
        None => {
            let probs = select::full_data_probs(&data.x, &data.y, &tune.probs).map_err(rename)?;
            select::fit_at_lambda(&data.x, &data.y, &probs, &s.lpd, lambda).map_err(rename)?
        }
    };

    let beta = &pipeline.fit.beta;
    let (coef, intercept): (Vec<f64>, Option<f64>) = match &scaling {
        Some(sc) => {
            let c: Vec<f64> = beta.iter().enumerate().map(|(j, b)| b * sc.y_sd / sc.x_sd[j]).collect();
            let icpt = sc.y_mean - summation::dot(&c, &sc.x_mean);
            (c, Some(icpt))
        }
        None => (beta.clone(), None),
    };

    let mut w = csv::Writer::from_path(s.out_dir.join("coefficients.csv"))?;
    w.write_record(["variable", "coefficient", "standardized"])?;
    if let Some(b0) = intercept {
        w.write_record(["(intercept)", &b0.to_string(), "0"])?;
    }
    for (j, name) in data.names.iter().enumerate() {
        w.write_record([name.as_str(), &coef[j].to_string(), &beta[j].to_string()])?;
    }
    w.flush()?;

    let positive = beta.iter().filter(|b| **b > 0.0).count();
    let negative = beta.iter().filter(|b| **b < 0.0).count();
    let lpd = &pipeline.moments.lpd;
    let mut all_warnings = warnings;
    all_warnings.extend(lpd.warning.clone());
    if !pipeline.fit.converged {
        all_warnings.push("lasso did not converge".into());
    }
    let diagnostics = json!({
        "rows": data.x.nrows(),
        "covariates": data.x.ncols(),
        "response": data.response_name,
        "response_observed": data.y.observed_count(),
        "lambda": lambda,
        "lambda_source": source,
        "standardized": s.standardize,
        "signs": { "positive": positive, "negative": negative, "zero": beta.len() - positive - negative },
        "converged": pipeline.fit.converged,
        "iterations": pipeline.fit.iterations,
        "max_kkt_violation": pipeline.fit.max_kkt_violation,
        "objective": pipeline.fit.objective,
        "lpd": {
            "modified": lpd.modified,
            "alpha": lpd.alpha,
            "mu": lpd.mu,
            "epsilon": lpd.epsilon,
            "mu_factor": s.lpd.mu_factor,
            "lambda_min_input": lpd.lambda_min_input,
            "norm_requested": lpd.norm_requested,
            "norm_used": lpd.norm_used,
            "distance": lpd.achieved_distance,
        },
        "scaling": scaling,
        "warnings": all_warnings,
    });
    write_json(&s.out_dir.join("diagnostics.json"), &diagnostics)
}

pub fn cmd_cv(args: &DataArgs) -> Result<()> {
    let s = DataSettings::from_args(args)?;
    let (data, _, warnings) = prepare(&s, args.response_col.as_deref())?;
    let rename = |e| name_pairs(e, &data.names, &data.response_name);
    let probs = probs_for(&data, &s).map_err(rename)?;
    let grid = select::build_grid(&data.x, &data.y, s.tune.grid_points, s.tune.seed)?;
    let cv = select::corrected_cv(&data.x, &data.y, &probs, &s.lpd, &grid, s.tune.folds, s.tune.seed)
        .map_err(rename)?;
    cv.write_curve(BufWriter::new(File::create(s.out_dir.join("cv_curve.csv"))?))?;
    let summary = json!({
        "lambda_opt": cv.lambda_opt,
        "lambda_1se": cv.lambda_1se,
        "index_opt": cv.index_opt,
        "index_1se": cv.index_1se,
        "min_error": cv.mean_error[cv.index_opt],
        "grid_r": grid.r,
        "grid_points": grid.n_points,
        "folds": cv.folds,
        "seed": cv.seed,
        "norm": s.lpd.norm,
        "epsilon": s.lpd.epsilon,
        "mu_factor": s.lpd.mu_factor,
        "standardized": s.standardize,
        "warnings": warnings,
    });
    write_json(&s.out_dir.join("lambda.json"), &summary)
}

fn design_from(a: &DesignArgs, replicates: usize) -> Result<SimDesign> {
    let d = SimDesign::default();
    let theta = a.theta.unwrap_or(d.mechanism.theta);
    let kind = match a.mechanism.unwrap_or(MechanismArg::Mcar) {
        MechanismArg::Mcar => MechanismKind::Mcar,
        MechanismArg::Mar => MechanismKind::Mar,
        MechanismArg::Mnar => MechanismKind::Mnar,
    };
    let design = SimDesign {
        n: a.n.unwrap_or(d.n),
        p: a.p.unwrap_or(d.p),
        sparsity: a.sparsity.unwrap_or(d.sparsity),
        signal: a.signal.unwrap_or(d.signal),
        sigma_y: a.sigma_y.unwrap_or(d.sigma_y),
        covariance: Covariance::CompoundSymmetry { rho: a.correlation.unwrap_or(0.5) },
        mechanism: MissingMechanism { kind, theta, affected: Affected::EveryThird },
        replicates,
        seed: a.seed.unwrap_or(d.seed),
    };
    design.validate()?;
    Ok(design)
}

/// Simulates replicate 0 of the design: the same data `bench` uses for
/// its first replicate.
pub fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let design = design_from(&args.design, 1)?;
    let dir = out_dir(&args.design.out_dir)?;
    let seeds = ReplicateSeeds::for_replicate(design.seed, 0);
    let data = bench::generate(&design, seeds.data)?;
    let (xm, ym) = apply_missing(&data.x, &data.y, &design.mechanism, seeds.missing)?;
    let p = design.p;
    let mut headers = vec!["y".to_string()];
    headers.extend((1..=p).map(|j| format!("X{j}")));
    let table = IncompleteMatrix::from_columns_fn(design.n, p + 1, |i, j| {
        if j == 0 {
            ym.mask()[i].then(|| ym.values()[i])
        } else {
            xm.get(i, j - 1)
        }
    })?;
    let na = args.na_token.clone().unwrap_or_else(|| "NA".into());
    write_csv(BufWriter::new(File::create(dir.join("data.csv"))?), &headers, &table, &na)?;
    let mut w = csv::Writer::from_path(dir.join("beta.csv"))?;
    w.write_record(["variable", "beta"])?;
    for (j, b) in data.beta_star.iter().enumerate() {
        w.write_record([headers[j + 1].as_str(), &b.to_string()])?;
    }
    w.flush()?;
    write_json(&dir.join("simulation.json"), &json!({ "design": design, "seeds": seeds }))
}

/// Parses `linf`, `linf:2`, `spectral:1.5`, `naive`, `true`.
pub fn parse_method(s: &str) -> Result<Method> {
    let s = s.trim();
    match s.to_ascii_lowercase().as_str() {
        "naive" => return Ok(Method::NaiveLasso),
        "true" | "tl" => return Ok(Method::TrueLasso),
        _ => {}
    }
    let (norm, k) = match s.split_once(':') {
        Some((n, k)) => {
            let k: f64 = k.parse().map_err(|_| Error::InvalidInput(format!("bad mu factor in method '{s}'")))?;
            (n, k)
        }
        None => (s, 1.0),
    };
    Ok(Method::lpd(norm.parse()?, k))
}

pub fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let design = design_from(&args.design, args.replicates.unwrap_or(30))?;
    let dir = out_dir(&args.design.out_dir)?;
    let methods = match &args.methods {
        Some(m) => m.iter().map(|s| parse_method(s)).collect::<Result<Vec<_>>>()?,
        None => Method::default_set(),
    };
    let opts = BenchOptions {
        methods,
        epsilon: args.epsilon.unwrap_or(DEFAULT_EPSILON),
        probs: if args.known_probs { ProbsKind::Known } else { ProbsKind::Estimated },
        grid_points: args.grid_points.unwrap_or(select::DEFAULT_GRID_POINTS),
        folds: args.folds.unwrap_or(select::DEFAULT_FOLDS),
        rule: args.rule.map(LambdaRule::from).unwrap_or_default(),
        timing: !args.omit_timing,
    };
    let report = bench::run_benchmark(&design, &opts)?;
    report.write_table(BufWriter::new(File::create(dir.join("table.csv"))?), opts.timing)?;
    report.write_replicates(BufWriter::new(File::create(dir.join("replicates.csv"))?), opts.timing)?;
    let seeds: Vec<ReplicateSeeds> =
        (0..design.replicates).map(|r| ReplicateSeeds::for_replicate(design.seed, r)).collect();
    let manifest = json!({
        "package": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "design": design,
        "options": opts,
        "seeds": seeds,
        "failed": report.summary.iter().map(|s| (s.method.clone(), s.failed)).collect::<Vec<_>>(),
    });
    write_json(&dir.join("manifest.json"), &manifest)
}
