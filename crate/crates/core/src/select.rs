//! Tuning-parameter selection.
//!
//! The grid is log-spaced on `[R/10000, R]` with `R = 2 ||b_naive||_max`,
//! where `b_naive` is the mean-imputation lasso tuned by ordinary 5-fold CV.
//! [`corrected_cv`] scores each `lambda` on a held-out fold by
//! `b' (Sigma_k)+ b - 2 rho_k' b`, with `(Sigma_k)+` the LPD-modified IPW
//! covariance of that fold.

use std::io::Write;

use log::{debug, warn};
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ipw::{ipw_moments, IpwEstimate};
use crate::lasso::{self, imputed_moments, LassoFit, QuadLassoProblem, SolverOptions};
use crate::linalg::SymMatrix;
use crate::lpd::{lpd_modify, LpdConfig, LpdSolution};
use crate::missing::{estimate_probs, IncompleteMatrix, IncompleteVector, ObsProbabilities};
use crate::{seeded_rng, summation};

pub const DEFAULT_GRID_POINTS: usize = 100;
pub const DEFAULT_FOLDS: usize = 5;
/// Ratio between the top and bottom of the grid.
pub const GRID_SPAN: f64 = 1e4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaGrid {
    pub values: Vec<f64>,
    pub r: f64,
    pub n_points: usize,
}

impl LambdaGrid {
    /// `n_points` values spaced evenly in log scale from `r` down to `r / 10000`.
    pub fn log_spaced(r: f64, n_points: usize) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::DegenerateGrid);
        }
        if n_points < 2 {
            return Err(Error::InvalidInput(format!("a grid needs at least 2 points, got {n_points}")));
        }
        let lo = r / GRID_SPAN;
        let (a, b) = (r.ln(), lo.ln());
        let last = (n_points - 1) as f64;
        let mut values: Vec<f64> = (0..n_points).map(|k| (a + (b - a) * k as f64 / last).exp()).collect();
        values[0] = r;
        values[n_points - 1] = lo;
        Ok(LambdaGrid { values, r, n_points })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Middle grid value (upper middle for an even count).
    pub fn middle(&self) -> f64 {
        self.values[(self.values.len() - 1) / 2]
    }
}

/// `2 ||r_naive||_max`, or `xty_max` when the naive fit is identically zero.
pub fn grid_radius(r_naive: &[f64], xty_max: f64) -> Result<f64> {
    let r = 2.0 * lasso::lambda_max(r_naive);
    if r > 0.0 {
        Ok(r)
    } else if xty_max > 0.0 {
        Ok(xty_max)
    } else {
        Err(Error::DegenerateGrid)
    }
}

/// Grid anchored on the naive lasso of the incomplete data.
pub fn build_grid(x: &IncompleteMatrix, y: &IncompleteVector, n_points: usize, seed: u64) -> Result<LambdaGrid> {
    Ok(naive_tuning(x, y, n_points, DEFAULT_FOLDS, seed)?.grid)
}

/// The naive lasso, tuned by ordinary CV on mean-imputed data.
#[derive(Debug, Clone)]
pub struct NaiveTuning {
    pub fit: LassoFit,
    pub cv: CvResult,
    /// Grid anchored on the tuned naive fit.
    pub grid: LambdaGrid,
}

pub fn naive_tuning(
    x: &IncompleteMatrix,
    y: &IncompleteVector,
    n_points: usize,
    folds: usize,
    seed: u64,
) -> Result<NaiveTuning> {
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(Error::InvalidInput("data is empty".into()));
    }
    let (xi, yi) = imputed_dense(x, y)?;
    let (gram, rho) = imputed_moments(x, y)?;
    let r0 = lasso::lambda_max(&rho);
    let naive_grid = LambdaGrid::log_spaced(r0, n_points)?;
    let cv = ordinary_cv(&xi, &yi, &naive_grid, folds, seed)?;
    let fit = solve_lenient(&QuadLassoProblem::new(&gram, &rho, cv.lambda_opt), None, true)?;
    let grid = LambdaGrid::log_spaced(grid_radius(&fit.beta, r0)?, n_points)?;
    Ok(NaiveTuning { fit, cv, grid })
}

fn imputed_dense(x: &IncompleteMatrix, y: &IncompleteVector) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let cols = lasso::mean_impute_columns(x);
    let xi = DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| cols[j][i]);
    let yv = IncompleteMatrix::from_columns_fn(y.len(), 1, |i, _| y.mask()[i].then(|| y.values()[i]))?;
    let yi = lasso::mean_impute_columns(&yv).swap_remove(0);
    Ok((xi, yi))
}

/// Fold label of every row: a seeded shuffle dealt round-robin, so fold
/// sizes differ by at most one.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 folds, got {folds}")));
    }
    if n < folds {
        return Err(Error::TooFewSamples { n, required: folds });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seeded_rng(seed));
    let mut labels = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        labels[i] = pos % folds;
    }
    Ok(labels)
}

fn split(labels: &[usize], fold: usize) -> (Vec<usize>, Vec<usize>) {
    (0..labels.len()).partition(|&i| labels[i] != fold)
}

/// Source of the observation probabilities inside cross-validation.
#[derive(Debug, Clone, Default)]
pub enum ProbsPolicy {
    /// Fixed probabilities, used for every fold.
    Known(ObsProbabilities),
    /// Estimated from the rows of each training or held-out part.
    #[default]
    FoldLocal,
    /// Estimated once from all rows.
    Pooled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub lambdas: Vec<f64>,
    pub mean_error: Vec<f64>,
    pub se_error: Vec<f64>,
    /// `fold_errors[k][l]`: error on fold `k` at `lambdas[l]`.
    pub fold_errors: Vec<Vec<f64>>,
    pub lambda_opt: f64,
    pub lambda_1se: f64,
    pub index_opt: usize,
    pub index_1se: usize,
    pub folds: usize,
    pub seed: u64,
}

impl CvResult {
    fn from_fold_errors(lambdas: &[f64], fold_errors: Vec<Vec<f64>>, seed: u64) -> Self {
        let k = fold_errors.len();
        let kf = k as f64;
        let mut mean_error = Vec::with_capacity(lambdas.len());
        let mut se_error = Vec::with_capacity(lambdas.len());
        for l in 0..lambdas.len() {
            let mean = summation::sum(fold_errors.iter().map(|f| f[l])) / kf;
            let ss = summation::sum(fold_errors.iter().map(|f| (f[l] - mean).powi(2)));
            let sd = if k > 1 { (ss / (kf - 1.0)).sqrt() } else { 0.0 };
            mean_error.push(mean);
            se_error.push(sd / kf.sqrt());
        }
        let index_opt = argmin_largest_lambda(lambdas, &mean_error);
        let index_1se = one_se_index(lambdas, &mean_error, &se_error, index_opt);
        CvResult {
            lambdas: lambdas.to_vec(),
            lambda_opt: lambdas[index_opt],
            lambda_1se: lambdas[index_1se],
            index_opt,
            index_1se,
            mean_error,
            se_error,
            fold_errors,
            folds: k,
            seed,
        }
    }

    /// Writes `lambda,mean_error,se` rows.
    pub fn write_curve<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["lambda", "mean_error", "se"])?;
        for l in 0..self.lambdas.len() {
            w.write_record(&[
                format!("{:e}", self.lambdas[l]),
                format!("{:e}", self.mean_error[l]),
                format!("{:e}", self.se_error[l]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Index of the minimum; among ties, the one with the largest lambda.
fn argmin_largest_lambda(lambdas: &[f64], err: &[f64]) -> usize {
    let mut best = 0;
    for l in 1..err.len() {
        if err[l] < err[best] || (err[l] == err[best] && lambdas[l] > lambdas[best]) {
            best = l;
        }
    }
    best
}

fn one_se_index(lambdas: &[f64], mean: &[f64], se: &[f64], index_opt: usize) -> usize {
    let threshold = mean[index_opt] + se[index_opt];
    let mut best = index_opt;
    for l in 0..lambdas.len() {
        if mean[l] <= threshold && lambdas[l] > lambdas[best] {
            best = l;
        }
    }
    best
}

/// Largest lambda whose mean error is within one standard error of the minimum.
pub fn one_se_rule(result: &CvResult) -> f64 {
    let opt = argmin_largest_lambda(&result.lambdas, &result.mean_error);
    result.lambdas[one_se_index(&result.lambdas, &result.mean_error, &result.se_error, opt)]
}

/// Training and held-out moments of one fold.
struct FoldMoments {
    train_gram: SymMatrix,
    train_rho: Vec<f64>,
    test_gram: SymMatrix,
    test_rho: Vec<f64>,
}

/// Solves, mapping `Unconverged` to its last iterate with a warning.
pub(crate) fn solve_lenient(problem: &QuadLassoProblem, warm: Option<&[f64]>, allow_degenerate: bool) -> Result<LassoFit> {
    let opts = SolverOptions::default();
    let res = if allow_degenerate {
        lasso::solve_allow_degenerate(problem, warm, &opts)
    } else {
        lasso::solve(problem, warm, &opts)
    };
    match res {
        Err(Error::Unconverged { fit }) if allow_degenerate => {
            debug!(
                "lasso at lambda={:.4e} stopped after {} sweeps (KKT {:.2e})",
                fit.lambda, fit.iterations, fit.max_kkt_violation
            );
            Ok(*fit)
        }
        Err(Error::Unconverged { fit }) => {
            warn!(
                "lasso at lambda={:.4e} stopped after {} sweeps (KKT {:.2e})",
                fit.lambda, fit.iterations, fit.max_kkt_violation
            );
            Ok(*fit)
        }
        other => other,
    }
}

fn path_errors(m: &FoldMoments, lambdas: &[f64], allow_degenerate: bool) -> Result<Vec<f64>> {
    let mut warm: Option<Vec<f64>> = None;
    let mut errs = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let problem = QuadLassoProblem::new(&m.train_gram, &m.train_rho, lambda);
        let fit = solve_lenient(&problem, warm.as_deref(), allow_degenerate)?;
        errs.push(held_out_error(&m.test_gram, &m.test_rho, &fit.beta));
        warm = Some(fit.beta);
    }
    Ok(errs)
}

/// `b' G b - 2 r' b`; exactly zero for `b = 0`.
pub fn held_out_error(gram: &SymMatrix, rho: &[f64], beta: &[f64]) -> f64 {
    if beta.iter().all(|b| *b == 0.0) {
        return 0.0;
    }
    gram.quad_form(beta) - 2.0 * summation::dot(rho, beta)
}

/// IPW moments followed by the LPD modification.
#[derive(Debug, Clone)]
pub struct CorrectedMoments {
    pub ipw: IpwEstimate,
    pub lpd: LpdSolution,
}

pub fn corrected_moments(
    x: &IncompleteMatrix,
    y: &IncompleteVector,
    probs: &ObsProbabilities,
    lpd_cfg: &LpdConfig,
) -> Result<CorrectedMoments> {
    let ipw = ipw_moments(x, y, probs)?;
    let lpd = lpd_modify(&ipw.sigma, lpd_cfg)?;
    Ok(CorrectedMoments { ipw, lpd })
}

/// K-fold cross-validation with corrected held-out risk.
///
/// Folds are processed in parallel; results do not depend on the schedule.
pub fn corrected_cv(
    x: &IncompleteMatrix,
    y: &IncompleteVector,
    probs: &ProbsPolicy,
    lpd_cfg: &LpdConfig,
    grid: &LambdaGrid,
    folds: usize,
    seed: u64,
) -> Result<CvResult> {
    let n = x.nrows();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!("X has {n} rows, y has {}", y.len())));
    }
    lpd_cfg.validate()?;
    let labels = fold_assignment(n, folds, seed)?;
    let pooled = match probs {
        ProbsPolicy::Pooled => Some(estimate_probs(x, y)?),
        _ => None,
    };

    let fold_errors = (0..folds)
        .into_par_iter()
        .map(|k| {
            let (train, test) = split(&labels, k);
            let moments = |rows: &[usize]| -> Result<(SymMatrix, Vec<f64>)> {
                let xs = x.select_rows(rows);
                let ys = y.select_rows(rows);
                let pr = match (probs, &pooled) {
                    (ProbsPolicy::Known(p), _) => p.clone(),
                    (_, Some(p)) => p.clone(),
                    _ => estimate_probs(&xs, &ys)?,
                };
                let cm = corrected_moments(&xs, &ys, &pr, lpd_cfg)?;
                Ok((cm.lpd.sigma_lpd, cm.ipw.rho))
            };
            let wrap = |e: Error| Error::FoldEstimation { fold: k, source: Box::new(e) };
            let (train_gram, train_rho) = moments(&train).map_err(wrap)?;
            let (test_gram, test_rho) = moments(&test).map_err(wrap)?;
            path_errors(&FoldMoments { train_gram, train_rho, test_gram, test_rho }, &grid.values, false)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CvResult::from_fold_errors(&grid.values, fold_errors, seed))
}

/// Cross-validation of the plain lasso on complete data, scored by the
/// held-out quadratic risk `b' S_k b - 2 r_k' b`.
pub fn ordinary_cv(x: &DMatrix<f64>, y: &[f64], grid: &LambdaGrid, folds: usize, seed: u64) -> Result<CvResult> {
    let n = x.nrows();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!("X has {n} rows, y has {}", y.len())));
    }
    let labels = fold_assignment(n, folds, seed)?;
    let fold_errors = (0..folds)
        .into_par_iter()
        .map(|k| {
            let (train, test) = split(&labels, k);
            let (train_gram, train_rho) = sample_moments(x, y, &train)?;
            let (test_gram, test_rho) = sample_moments(x, y, &test)?;
            path_errors(&FoldMoments { train_gram, train_rho, test_gram, test_rho }, &grid.values, true)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CvResult::from_fold_errors(&grid.values, fold_errors, seed))
}

/// `(X_R' X_R / |R|, X_R' y_R / |R|)` over the rows `R`.
pub fn sample_moments(x: &DMatrix<f64>, y: &[f64], rows: &[usize]) -> Result<(SymMatrix, Vec<f64>)> {
    let p = x.ncols();
    let m = rows.len() as f64;
    let cols: Vec<Vec<f64>> = (0..p).map(|j| rows.iter().map(|&i| x[(i, j)]).collect()).collect();
    let ys: Vec<f64> = rows.iter().map(|&i| y[i]).collect();
    let gram = SymMatrix::from_fn(p, |j, k| summation::dot(&cols[j], &cols[k]) / m)?;
    let rho = cols.iter().map(|c| summation::dot(c, &ys) / m).collect();
    Ok((gram, rho))
}

/// How the final lambda is picked from a CV curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LambdaRule {
    #[default]
    Min,
    OneSe,
}

impl LambdaRule {
    pub fn pick(self, cv: &CvResult) -> f64 {
        match self {
            LambdaRule::Min => cv.lambda_opt,
            LambdaRule::OneSe => cv.lambda_1se,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TuneOptions {
    pub grid_points: usize,
    pub folds: usize,
    pub seed: u64,
    pub rule: LambdaRule,
    pub probs: ProbsPolicy,
}

impl Default for TuneOptions {
    fn default() -> Self {
        TuneOptions {
            grid_points: DEFAULT_GRID_POINTS,
            folds: DEFAULT_FOLDS,
            seed: 0,
            rule: LambdaRule::Min,
            probs: ProbsPolicy::FoldLocal,
        }
    }
}

/// Full-data fit at one lambda.
#[derive(Debug, Clone)]
pub struct PipelineFit {
    pub fit: LassoFit,
    pub moments: CorrectedMoments,
    pub probs: ObsProbabilities,
}

/// Probabilities for a full-data fit under `policy`.
pub fn full_data_probs(x: &IncompleteMatrix, y: &IncompleteVector, policy: &ProbsPolicy) -> Result<ObsProbabilities> {
    match policy {
        ProbsPolicy::Known(p) => Ok(p.clone()),
        _ => estimate_probs(x, y),
    }
}

/// IPW, LPD and lasso at a single lambda.
pub fn fit_at_lambda(
    x: &IncompleteMatrix,
    y: &IncompleteVector,
    probs: &ObsProbabilities,
    lpd_cfg: &LpdConfig,
    lambda: f64,
) -> Result<PipelineFit> {
    let moments = corrected_moments(x, y, probs, lpd_cfg)?;
    let fit = solve_lenient(&QuadLassoProblem::new(&moments.lpd.sigma_lpd, &moments.ipw.rho, lambda), None, false)?;
    Ok(PipelineFit { fit, moments, probs: probs.clone() })
}

#[derive(Debug, Clone)]
pub struct TunedFit {
    pub grid: LambdaGrid,
    pub cv: CvResult,
    pub lambda: f64,
    pub pipeline: PipelineFit,
}

/// Grid from the naive lasso, corrected CV, then a full-data refit.
pub fn fit_tuned(
    x: &IncompleteMatrix,
    y: &IncompleteVector,
    lpd_cfg: &LpdConfig,
    opts: &TuneOptions,
) -> Result<TunedFit> {
    let grid = build_grid(x, y, opts.grid_points, opts.seed)?;
    fit_tuned_on_grid(x, y, lpd_cfg, opts, grid)
}

/// [`fit_tuned`] with a precomputed grid.
pub fn fit_tuned_on_grid(
    x: &IncompleteMatrix,
    y: &IncompleteVector,
    lpd_cfg: &LpdConfig,
    opts: &TuneOptions,
    grid: LambdaGrid,
) -> Result<TunedFit> {
    let cv = corrected_cv(x, y, &opts.probs, lpd_cfg, &grid, opts.folds, opts.seed)?;
    let lambda = opts.rule.pick(&cv);
    let probs = full_data_probs(x, y, &opts.probs)?;
    let pipeline = fit_at_lambda(x, y, &probs, lpd_cfg, lambda)?;
    Ok(TunedFit { grid, cv, lambda, pipeline })
}

/// Plain lasso on complete data, tuned by [`ordinary_cv`] on the grid from
/// `lambda_max` down to `lambda_max / 10000`.
pub fn fit_tuned_complete(x: &DMatrix<f64>, y: &[f64], opts: &TuneOptions) -> Result<(LassoFit, CvResult)> {
    let (gram, rho) = sample_moments(x, y, &(0..x.nrows()).collect::<Vec<_>>())?;
    let grid = LambdaGrid::log_spaced(lasso::lambda_max(&rho), opts.grid_points)?;
    let cv = ordinary_cv(x, y, &grid, opts.folds, opts.seed)?;
    let lambda = opts.rule.pick(&cv);
    Ok((solve_lenient(&QuadLassoProblem::new(&gram, &rho, lambda), None, true)?, cv))
}

/// Naive lasso tuned by ordinary CV on mean-imputed data.
pub fn fit_tuned_naive(x: &IncompleteMatrix, y: &IncompleteVector, opts: &TuneOptions) -> Result<(LassoFit, CvResult)> {
    let t = naive_tuning(x, y, opts.grid_points, opts.folds, opts.seed)?;
    Ok((t.fit, t.cv))
}
