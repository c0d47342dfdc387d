//! Simulation studies: data generation, estimation metrics and step timing.
//!
//! Covariate rows are Gaussian with compound-symmetry covariance, the
//! coefficient vector has `round(s p)` entries equal to the signal value at
//! random positions, and `y = X b + sigma_y e`.
//!
//! The partial AUC ranks variables by `|b_hat|` (ties sharing a single ROC
//! segment), integrates the ROC over false-positive rates in `[0, 0.1]` and
//! divides by `0.1`.

use std::io::Write;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ipw::ipw_moments;
use crate::lasso::QuadLassoProblem;
use crate::linalg::{NormKind, SymMatrix};
use crate::lpd::{lpd_modify, LpdConfig};
use crate::missing::{apply_missing, IncompleteMatrix, IncompleteVector, MechanismKind, MissingMechanism, ObsProbabilities};
use crate::select::{self, build_grid, LambdaRule, NaiveTuning, ProbsPolicy, TuneOptions};
use crate::{derive_seed, seeded_rng, summation};

/// False-positive-rate cut-off of the partial AUC.
pub const PAUC_FPR_MAX: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Covariance {
    /// Unit variances, constant correlation `rho`.
    CompoundSymmetry { rho: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimDesign {
    pub n: usize,
    pub p: usize,
    pub sparsity: f64,
    pub signal: f64,
    pub sigma_y: f64,
    pub covariance: Covariance,
    pub mechanism: MissingMechanism,
    pub replicates: usize,
    pub seed: u64,
}

impl Default for SimDesign {
    fn default() -> Self {
        SimDesign {
            n: 200,
            p: 200,
            sparsity: 0.05,
            signal: 1.0,
            sigma_y: 3.0,
            covariance: Covariance::CompoundSymmetry { rho: 0.5 },
            mechanism: MissingMechanism::mcar(0.9),
            replicates: 30,
            seed: 0,
        }
    }
}

impl SimDesign {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 {
            return Err(Error::InvalidInput("n and p must be positive".into()));
        }
        if !(self.sparsity > 0.0 && self.sparsity < 1.0) {
            return Err(Error::InvalidInput(format!("sparsity must lie in (0, 1), got {}", self.sparsity)));
        }
        if !(self.sigma_y >= 0.0) || !self.signal.is_finite() {
            return Err(Error::InvalidInput("sigma_y must be >= 0 and the signal finite".into()));
        }
        let Covariance::CompoundSymmetry { rho } = self.covariance;
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::InvalidInput(format!("compound-symmetry rho must lie in [0, 1), got {rho}")));
        }
        self.mechanism.validate()?;
        self.mechanism.affected_columns(self.p)?;
        Ok(())
    }

    pub fn support_size(&self) -> usize {
        (self.sparsity * self.p as f64).round() as usize
    }

    pub fn covariance_matrix(&self) -> SymMatrix {
        let Covariance::CompoundSymmetry { rho } = self.covariance;
        SymMatrix::from_fn(self.p, |i, j| if i == j { 1.0 } else { rho }).expect("p >= 1")
    }
}

#[derive(Debug, Clone)]
pub struct SimData {
    pub x: DMatrix<f64>,
    pub y: Vec<f64>,
    pub beta_star: Vec<f64>,
    pub sigma_true: SymMatrix,
}

impl SimData {
    pub fn support(&self) -> Vec<usize> {
        (0..self.beta_star.len()).filter(|&j| self.beta_star[j] != 0.0).collect()
    }
}

/// Complete data for one replicate.
pub fn generate(design: &SimDesign, rep_seed: u64) -> Result<SimData> {
    design.validate()?;
    let (n, p) = (design.n, design.p);
    let mut rng = seeded_rng(rep_seed);
    let mut beta_star = vec![0.0; p];
    for j in rand::seq::index::sample(&mut rng, p, design.support_size()) {
        beta_star[j] = design.signal;
    }
    let Covariance::CompoundSymmetry { rho } = design.covariance;
    let (a, b) = (rho.sqrt(), (1.0 - rho).sqrt());
    let mut x = DMatrix::zeros(n, p);
    for i in 0..n {
        let common: f64 = rng.sample(StandardNormal);
        for j in 0..p {
            let e: f64 = rng.sample(StandardNormal);
            x[(i, j)] = a * common + b * e;
        }
    }
    let y = (0..n)
        .map(|i| {
            let e: f64 = rng.sample(StandardNormal);
            summation::sum((0..p).map(|j| x[(i, j)] * beta_star[j])) + design.sigma_y * e
        })
        .collect();
    Ok(SimData { x, y, beta_star, sigma_true: design.covariance_matrix() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub pe: f64,
    pub mse: f64,
    pub tp: usize,
    pub fp: usize,
    pub f1: f64,
    pub pauc: f64,
    pub auc: f64,
    pub l2_error: f64,
    pub elapsed_pd_seconds: Option<f64>,
    pub elapsed_lasso_seconds: Option<f64>,
}

/// Estimation and support-recovery metrics of `beta_hat`.
pub fn metrics(beta_hat: &[f64], beta_star: &[f64], sigma: &SymMatrix) -> Result<MetricsRow> {
    let p = beta_star.len();
    if beta_hat.len() != p || sigma.dim() != p {
        return Err(Error::DimensionMismatch(format!(
            "beta_hat {}, beta_star {p}, Sigma {}",
            beta_hat.len(),
            sigma.dim()
        )));
    }
    let diff: Vec<f64> = beta_hat.iter().zip(beta_star).map(|(a, b)| a - b).collect();
    let mse = summation::dot(&diff, &diff);
    let truth: Vec<bool> = beta_star.iter().map(|b| *b != 0.0).collect();
    let selected: Vec<bool> = beta_hat.iter().map(|b| *b != 0.0).collect();
    let tp = truth.iter().zip(&selected).filter(|(t, s)| **t && **s).count();
    let fp = truth.iter().zip(&selected).filter(|(t, s)| !**t && **s).count();
    let n_sel = tp + fp;
    let n_true = truth.iter().filter(|t| **t).count();
    let f1 = if n_sel == 0 || n_true == 0 || tp == 0 {
        0.0
    } else {
        let precision = tp as f64 / n_sel as f64;
        let recall = tp as f64 / n_true as f64;
        2.0 * precision * recall / (precision + recall)
    };
    let scores: Vec<f64> = beta_hat.iter().map(|b| b.abs()).collect();
    Ok(MetricsRow {
        pe: sigma.quad_form(&diff),
        mse,
        tp,
        fp,
        f1,
        pauc: roc_area(&scores, &truth, PAUC_FPR_MAX) / PAUC_FPR_MAX,
        auc: roc_area(&scores, &truth, 1.0),
        l2_error: mse.sqrt(),
        elapsed_pd_seconds: None,
        elapsed_lasso_seconds: None,
    })
}

/// Area under the ROC curve for FPR in `[0, fpr_max]`; tied scores form one
/// straight segment. Returns `fpr_max` when either class is empty.
pub fn roc_area(scores: &[f64], truth: &[bool], fpr_max: f64) -> f64 {
    let pos = truth.iter().filter(|t| **t).count();
    let neg = truth.len() - pos;
    if pos == 0 || neg == 0 {
        return fpr_max;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let (mut fpr, mut tpr, mut area) = (0.0f64, 0.0f64, 0.0f64);
    let mut i = 0;
    while i < order.len() && fpr < fpr_max {
        let mut j = i;
        let (mut dp, mut dn) = (0usize, 0usize);
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            if truth[order[j]] {
                dp += 1;
            } else {
                dn += 1;
            }
            j += 1;
        }
        let next_fpr = fpr + dn as f64 / neg as f64;
        let next_tpr = tpr + dp as f64 / pos as f64;
        if next_fpr > fpr {
            let end = next_fpr.min(fpr_max);
            let t_end = tpr + (next_tpr - tpr) * (end - fpr) / (next_fpr - fpr);
            area += 0.5 * (tpr + t_end) * (end - fpr);
        }
        fpr = next_fpr;
        tpr = next_tpr;
        i = j;
    }
    if fpr < fpr_max {
        area += tpr * (fpr_max - fpr);
    }
    area
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    /// IPW, LPD and corrected CV.
    Lpd { norm: NormKind, mu_factor: f64 },
    /// Lasso on mean-imputed data, tuned by ordinary CV.
    NaiveLasso,
    /// Lasso on the complete data, tuned by ordinary CV.
    TrueLasso,
}

impl Method {
    pub fn lpd(norm: NormKind, mu_factor: f64) -> Self {
        Method::Lpd { norm, mu_factor }
    }

    pub fn label(&self) -> String {
        match self {
            Method::Lpd { norm, mu_factor } => format!("LPD-{}(k={})", norm.tag(), mu_factor),
            Method::NaiveLasso => "Naive".into(),
            Method::TrueLasso => "TL".into(),
        }
    }

    pub fn default_set() -> Vec<Method> {
        vec![Method::lpd(NormKind::LInf, 1.0), Method::NaiveLasso, Method::TrueLasso]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbsKind {
    /// Empirical joint-observation proportions.
    #[default]
    Estimated,
    /// Exact MCAR probabilities (only valid for MCAR designs).
    Known,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchOptions {
    pub methods: Vec<Method>,
    pub epsilon: f64,
    pub probs: ProbsKind,
    pub grid_points: usize,
    pub folds: usize,
    pub rule: LambdaRule,
    /// Measure the LPD step and a mid-grid lasso solve.
    pub timing: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            methods: Method::default_set(),
            epsilon: crate::lpd::DEFAULT_EPSILON,
            probs: ProbsKind::Estimated,
            grid_points: select::DEFAULT_GRID_POINTS,
            folds: select::DEFAULT_FOLDS,
            rule: LambdaRule::Min,
            timing: true,
        }
    }
}

/// Seeds used by replicate `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicateSeeds {
    pub data: u64,
    pub missing: u64,
    pub cv: u64,
}

impl ReplicateSeeds {
    pub fn for_replicate(design_seed: u64, r: usize) -> Self {
        let base = derive_seed(design_seed, r as u64);
        ReplicateSeeds { data: derive_seed(base, 0), missing: derive_seed(base, 1), cv: derive_seed(base, 2) }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub replicate: usize,
    pub method: String,
    pub lambda: Option<f64>,
    pub metrics: Option<MetricsRow>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub sd: f64,
}

impl Stat {
    fn of(values: &[f64]) -> Stat {
        let n = values.len() as f64;
        if values.is_empty() {
            return Stat { mean: f64::NAN, sd: f64::NAN };
        }
        let mean = summation::sum(values.iter().copied()) / n;
        let sd = if values.len() > 1 {
            (summation::sum(values.iter().map(|v| (v - mean).powi(2))) / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Stat { mean, sd }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub succeeded: usize,
    pub failed: usize,
    pub pe: Stat,
    pub mse: Stat,
    pub tp: Stat,
    pub fp: Stat,
    pub f1: Stat,
    pub pauc: Stat,
    pub auc: Stat,
    pub l2_error: Stat,
    pub pd_seconds: Option<Stat>,
    pub lasso_seconds: Option<Stat>,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchReport {
    pub design: SimDesign,
    pub options: BenchOptions,
    pub records: Vec<ReplicateRecord>,
    pub summary: Vec<MethodSummary>,
}

impl BenchReport {
    pub fn summary_for(&self, method: &Method) -> Option<&MethodSummary> {
        let label = method.label();
        self.summary.iter().find(|s| s.method == label)
    }

    /// One row per method: means and sds of every metric, then timings.
    pub fn write_table<W: Write>(&self, out: W, include_timing: bool) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let metrics = ["PE", "MSE", "TP", "FP", "F1", "pAUC", "AUC", "L2"];
        let mut header = vec!["method".to_string(), "replicates".into(), "failed".into()];
        for m in metrics {
            header.push(format!("{m}_mean"));
            header.push(format!("{m}_sd"));
        }
        if include_timing {
            header.extend(["PD_seconds_mean".into(), "Lasso_seconds_mean".into()]);
        }
        header.push("errors".into());
        w.write_record(&header)?;
        let fmt = |v: f64| format!("{v:.6}");
        for s in &self.summary {
            let mut row = vec![s.method.clone(), s.succeeded.to_string(), s.failed.to_string()];
            for st in [&s.pe, &s.mse, &s.tp, &s.fp, &s.f1, &s.pauc, &s.auc, &s.l2_error] {
                row.push(fmt(st.mean));
                row.push(fmt(st.sd));
            }
            if include_timing {
                for t in [&s.pd_seconds, &s.lasso_seconds] {
                    row.push(t.as_ref().map(|t| fmt(t.mean)).unwrap_or_default());
                }
            }
            row.push(s.errors.join("; "));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// One row per (replicate, method).
    pub fn write_replicates<W: Write>(&self, out: W, include_timing: bool) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<&str> =
            vec!["replicate", "method", "lambda", "PE", "MSE", "TP", "FP", "F1", "pAUC", "AUC", "L2"];
        if include_timing {
            header.extend(["PD_seconds", "Lasso_seconds"]);
        }
        header.push("error");
        w.write_record(&header)?;
        for r in &self.records {
            let mut row = vec![r.replicate.to_string(), r.method.clone(), r.lambda.map(|l| format!("{l:e}")).unwrap_or_default()];
            match &r.metrics {
                Some(m) => {
                    row.extend([m.pe, m.mse].map(|v| format!("{v:e}")));
                    row.extend([m.tp.to_string(), m.fp.to_string()]);
                    row.extend([m.f1, m.pauc, m.auc, m.l2_error].map(|v| format!("{v:e}")));
                    if include_timing {
                        for t in [m.elapsed_pd_seconds, m.elapsed_lasso_seconds] {
                            row.push(t.map(|t| format!("{t:e}")).unwrap_or_default());
                        }
                    }
                }
                None => row.extend(std::iter::repeat_n(String::new(), if include_timing { 10 } else { 8 })),
            }
            row.push(r.error.clone().unwrap_or_default());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Seconds spent in the LPD step and in one lasso solve at the middle of
/// the tuning grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepTiming {
    pub pd_seconds: f64,
    pub lasso_seconds: f64,
    pub lambda: f64,
}

fn elapsed(start: Instant) -> f64 {
    start.elapsed().as_secs_f64()
}

/// Times the two LPD steps on one replicate's data.
pub fn time_steps(
    x: &IncompleteMatrix,
    y: &IncompleteVector,
    probs: &ObsProbabilities,
    lpd_cfg: &LpdConfig,
    lambda: f64,
) -> Result<StepTiming> {
    let ipw = ipw_moments(x, y, probs)?;
    let start = Instant::now();
    let sol = lpd_modify(&ipw.sigma, lpd_cfg)?;
    let pd_seconds = elapsed(start);
    let start = Instant::now();
    select::solve_lenient(&QuadLassoProblem::new(&sol.sigma_lpd, &ipw.rho, lambda), None, false)?;
    Ok(StepTiming { pd_seconds, lasso_seconds: elapsed(start), lambda })
}

/// Timing of one simulated replicate, with `lambda` fixed at the middle of
/// the naive-lasso grid.
pub fn time_replicate(design: &SimDesign, replicate: usize, lpd_cfg: &LpdConfig, grid_points: usize) -> Result<StepTiming> {
    let seeds = ReplicateSeeds::for_replicate(design.seed, replicate);
    let data = generate(design, seeds.data)?;
    let (xm, ym) = apply_missing(&data.x, &data.y, &design.mechanism, seeds.missing)?;
    let probs = crate::missing::estimate_probs(&xm, &ym)?;
    let grid = build_grid(&xm, &ym, grid_points, seeds.cv)?;
    time_steps(&xm, &ym, &probs, lpd_cfg, grid.middle())
}

fn known_probs(design: &SimDesign) -> Result<ObsProbabilities> {
    if design.mechanism.kind != MechanismKind::Mcar {
        return Err(Error::InvalidMechanism("known probabilities require an MCAR design".into()));
    }
    ObsProbabilities::mcar_known(design.p, &design.mechanism)
}

/// Per-replicate inputs shared by all methods.
struct ReplicateContext {
    data: SimData,
    xm: IncompleteMatrix,
    ym: IncompleteVector,
    seeds: ReplicateSeeds,
    /// Tuned naive lasso; also provides the LPD grid.
    naive: std::result::Result<NaiveTuning, String>,
}

fn tune_options(opts: &BenchOptions, design: &SimDesign, seed: u64) -> Result<TuneOptions> {
    let probs = match opts.probs {
        ProbsKind::Estimated => ProbsPolicy::FoldLocal,
        ProbsKind::Known => ProbsPolicy::Known(known_probs(design)?),
    };
    Ok(TuneOptions { grid_points: opts.grid_points, folds: opts.folds, seed, rule: opts.rule, probs })
}

fn run_method(method: &Method, ctx: &ReplicateContext, design: &SimDesign, opts: &BenchOptions) -> Result<(f64, MetricsRow)> {
    let tune = tune_options(opts, design, ctx.seeds.cv)?;
    let data = &ctx.data;
    let naive = || ctx.naive.as_ref().map_err(|e| Error::InvalidInput(format!("naive lasso: {e}")));
    match method {
        Method::Lpd { norm, mu_factor } => {
            let cfg = LpdConfig::new(opts.epsilon, *norm).with_mu_factor(*mu_factor);
            let grid = naive()?.grid.clone();
            let tuned = select::fit_tuned_on_grid(&ctx.xm, &ctx.ym, &cfg, &tune, grid)?;
            let mut row = metrics(&tuned.pipeline.fit.beta, &data.beta_star, &data.sigma_true)?;
            if opts.timing {
                let t = time_steps(&ctx.xm, &ctx.ym, &tuned.pipeline.probs, &cfg, tuned.grid.middle())?;
                row.elapsed_pd_seconds = Some(t.pd_seconds);
                row.elapsed_lasso_seconds = Some(t.lasso_seconds);
            }
            Ok((tuned.lambda, row))
        }
        Method::NaiveLasso => {
            let fit = &naive()?.fit;
            Ok((fit.lambda, metrics(&fit.beta, &data.beta_star, &data.sigma_true)?))
        }
        Method::TrueLasso => {
            let (fit, _) = select::fit_tuned_complete(&data.x, &data.y, &tune)?;
            Ok((fit.lambda, metrics(&fit.beta, &data.beta_star, &data.sigma_true)?))
        }
    }
}

fn prepare_replicate(design: &SimDesign, opts: &BenchOptions, r: usize) -> Result<ReplicateContext> {
    let seeds = ReplicateSeeds::for_replicate(design.seed, r);
    let data = generate(design, seeds.data)?;
    let (xm, ym) = apply_missing(&data.x, &data.y, &design.mechanism, seeds.missing)?;
    let needs_naive = opts.methods.iter().any(|m| !matches!(m, Method::TrueLasso));
    let naive = if needs_naive {
        select::naive_tuning(&xm, &ym, opts.grid_points, opts.folds, seeds.cv).map_err(|e| e.to_string())
    } else {
        Err("not requested".into())
    };
    Ok(ReplicateContext { data, xm, ym, seeds, naive })
}

fn run_replicate(design: &SimDesign, opts: &BenchOptions, r: usize) -> Vec<ReplicateRecord> {
    let ctx = prepare_replicate(design, opts, r).map_err(|e| e.to_string());
    opts.methods
        .iter()
        .map(|m| {
            let outcome =
                ctx.as_ref().map_err(|e| e.clone()).and_then(|c| run_method(m, c, design, opts).map_err(|e| e.to_string()));
            match outcome {
                Ok((lambda, row)) => {
                    ReplicateRecord { replicate: r, method: m.label(), lambda: Some(lambda), metrics: Some(row), error: None }
                }
                Err(e) => ReplicateRecord { replicate: r, method: m.label(), lambda: None, metrics: None, error: Some(e) },
            }
        })
        .collect()
}

fn summarise(method: &Method, records: &[ReplicateRecord]) -> MethodSummary {
    let label = method.label();
    let mine: Vec<&ReplicateRecord> = records.iter().filter(|r| r.method == label).collect();
    let ok: Vec<&MetricsRow> = mine.iter().filter_map(|r| r.metrics.as_ref()).collect();
    let stat = |f: &dyn Fn(&MetricsRow) -> f64| Stat::of(&ok.iter().map(|m| f(m)).collect::<Vec<_>>());
    let timing = |f: &dyn Fn(&MetricsRow) -> Option<f64>| {
        let v: Vec<f64> = ok.iter().filter_map(|m| f(m)).collect();
        (!v.is_empty()).then(|| Stat::of(&v))
    };
    MethodSummary {
        method: label,
        succeeded: ok.len(),
        failed: mine.len() - ok.len(),
        pe: stat(&|m| m.pe),
        mse: stat(&|m| m.mse),
        tp: stat(&|m| m.tp as f64),
        fp: stat(&|m| m.fp as f64),
        f1: stat(&|m| m.f1),
        pauc: stat(&|m| m.pauc),
        auc: stat(&|m| m.auc),
        l2_error: stat(&|m| m.l2_error),
        pd_seconds: timing(&|m| m.elapsed_pd_seconds),
        lasso_seconds: timing(&|m| m.elapsed_lasso_seconds),
        errors: mine.iter().filter_map(|r| r.error.as_ref().map(|e| format!("rep {}: {e}", r.replicate))).collect(),
    }
}

/// Runs every method on every replicate. Replicates run in parallel; a
/// failing replicate is recorded in the error column instead of aborting.
pub fn run_benchmark(design: &SimDesign, opts: &BenchOptions) -> Result<BenchReport> {
    design.validate()?;
    if opts.methods.is_empty() {
        return Err(Error::InvalidInput("no methods requested".into()));
    }
    if opts.probs == ProbsKind::Known {
        known_probs(design)?;
    }
    let records: Vec<ReplicateRecord> = (0..design.replicates)
        .into_par_iter()
        .map(|r| run_replicate(design, opts, r))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    let summary = opts.methods.iter().map(|m| summarise(m, &records)).collect();
    Ok(BenchReport { design: design.clone(), options: opts.clone(), records, summary })
}
