//! Coordinate descent for `min 1/2 b'Qb - rho'b + lambda ||b||_1`.
//!
//! The solver keeps `Q b` up to date incrementally, sweeps the active set to
//! convergence, then confirms with a full pass. Convergence requires both a
//! small coordinate change and a small KKT violation recomputed from scratch.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::missing::{IncompleteMatrix, IncompleteVector};
use crate::summation;

/// Active-set sweeps between checks for a stable signed support.
const EXACT_STEP_EVERY: usize = 8;
const MAX_SIGN_DROPS: usize = 64;

/// Lasso problem in Gram form.
#[derive(Debug, Clone, Copy)]
pub struct QuadLassoProblem<'a> {
    pub gram: &'a SymMatrix,
    pub rho: &'a [f64],
    pub lambda: f64,
}

impl<'a> QuadLassoProblem<'a> {
    pub fn new(gram: &'a SymMatrix, rho: &'a [f64], lambda: f64) -> Self {
        QuadLassoProblem { gram, rho, lambda }
    }

    pub fn objective(&self, beta: &[f64]) -> f64 {
        objective(self.gram, self.rho, self.lambda, beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    /// Bound on the largest coordinate change, relative to `max(1, ||b||_inf)`.
    pub tol: f64,
    pub kkt_tol: f64,
    /// Maximum number of coordinate sweeps (active and full passes combined).
    pub max_iter: usize,
    /// Once a full pass leaves the signed support unchanged, try the exact
    /// minimiser on that support (kept only if it preserves the signs).
    pub exact_active_step: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-7, kkt_tol: 1e-6, max_iter: 10_000, exact_active_step: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LassoFit {
    pub beta: Vec<f64>,
    pub lambda: f64,
    pub iterations: usize,
    pub max_kkt_violation: f64,
    pub converged: bool,
    pub objective: f64,
}

impl LassoFit {
    pub fn support(&self) -> Vec<usize> {
        self.beta.iter().enumerate().filter(|(_, b)| **b != 0.0).map(|(j, _)| j).collect()
    }

    pub fn nonzeros(&self) -> usize {
        self.beta.iter().filter(|b| **b != 0.0).count()
    }
}

#[inline]
pub fn soft_threshold(z: f64, gamma: f64) -> f64 {
    // ties at |z| == gamma resolve to zero
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

pub fn objective(gram: &SymMatrix, rho: &[f64], lambda: f64, beta: &[f64]) -> f64 {
    let qb = gram.mul_vec(beta);
    let quad = summation::dot(&qb, beta);
    let lin = summation::dot(rho, beta);
    0.5 * quad - lin + lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
}

/// Largest KKT violation of `beta`, with the gradient recomputed as `Q b - rho`.
pub fn kkt_violation(gram: &SymMatrix, rho: &[f64], lambda: f64, beta: &[f64]) -> f64 {
    let grad: Vec<f64> = gram.mul_vec(beta).iter().zip(rho).map(|(g, r)| g - r).collect();
    kkt_from_gradient(&grad, lambda, beta)
}

fn kkt_from_gradient(grad: &[f64], lambda: f64, beta: &[f64]) -> f64 {
    grad.iter()
        .zip(beta)
        .map(|(&g, &b)| if b != 0.0 { (g + lambda * b.signum()).abs() } else { (g.abs() - lambda).max(0.0) })
        .fold(0.0, f64::max)
}

/// Smallest `lambda` for which zero solves every problem with this `rho`.
pub fn lambda_max(rho: &[f64]) -> f64 {
    rho.iter().fold(0.0, |m, r| m.max(r.abs()))
}

fn validate(problem: &QuadLassoProblem, opts: &SolverOptions, allow_zero_diag: bool) -> Result<()> {
    let p = problem.gram.dim();
    if problem.rho.len() != p {
        return Err(Error::DimensionMismatch(format!("Q is {p}x{p}, rho has {}", problem.rho.len())));
    }
    if !(problem.lambda >= 0.0) || !problem.lambda.is_finite() {
        return Err(Error::InvalidInput(format!("lambda must be >= 0, got {}", problem.lambda)));
    }
    if problem.rho.iter().any(|r| !r.is_finite()) {
        return Err(Error::InvalidInput("rho has non-finite entries".into()));
    }
    if !(opts.tol > 0.0 && opts.kkt_tol > 0.0) {
        return Err(Error::InvalidInput("tolerances must be positive".into()));
    }
    for (j, d) in problem.gram.diagonal().into_iter().enumerate() {
        if d < 0.0 || (d == 0.0 && !allow_zero_diag) || !d.is_finite() {
            return Err(Error::InvalidInput(format!("Q[{j},{j}] = {d}, expected > 0")));
        }
    }
    Ok(())
}

/// Solves the problem from `beta0` (or zero).
///
/// Returns [`Error::Unconverged`] carrying the last iterate when
/// `max_iter` sweeps are not enough.
pub fn solve(problem: &QuadLassoProblem, beta0: Option<&[f64]>, opts: &SolverOptions) -> Result<LassoFit> {
    validate(problem, opts, false)?;
    run(problem, beta0, opts)
}

/// Like [`solve`] but coordinates with `Q_jj == 0` are pinned at zero.
pub(crate) fn solve_allow_degenerate(
    problem: &QuadLassoProblem,
    beta0: Option<&[f64]>,
    opts: &SolverOptions,
) -> Result<LassoFit> {
    validate(problem, opts, true)?;
    run(problem, beta0, opts)
}

struct State<'a> {
    gram: &'a SymMatrix,
    rho: &'a [f64],
    lambda: f64,
    diag: Vec<f64>,
    beta: Vec<f64>,
    qb: Vec<f64>,
}

impl State<'_> {
    /// Updates coordinate `j`, returning the absolute change.
    #[inline]
    fn update(&mut self, j: usize) -> f64 {
        let d = self.diag[j];
        if d <= 0.0 {
            return 0.0;
        }
        let old = self.beta[j];
        let partial = self.rho[j] - (self.qb[j] - d * old);
        let new = soft_threshold(partial, self.lambda) / d;
        let delta = new - old;
        if delta != 0.0 {
            self.beta[j] = new;
            for (q, &g) in self.qb.iter_mut().zip(self.gram.column(j)) {
                *q += g * delta;
            }
        }
        delta.abs()
    }

    fn scale(&self) -> f64 {
        self.beta.iter().fold(1.0f64, |m, b| m.max(b.abs()))
    }

    fn refresh(&mut self) {
        self.qb = self.gram.mul_vec(&self.beta);
    }

    fn signs(&self) -> Vec<i8> {
        self.beta.iter().map(|b| if *b > 0.0 { 1 } else if *b < 0.0 { -1 } else { 0 }).collect()
    }

    fn objective(&self) -> f64 {
        let l1: f64 = self.beta.iter().map(|b| b.abs()).sum();
        0.5 * summation::dot(&self.qb, &self.beta) - summation::dot(self.rho, &self.beta) + self.lambda * l1
    }

    /// Feature-sign step on the support of `signs`: moves `beta` towards the
    /// solution of `Q_AA b_A = rho_A - lambda s_A`, stopping where a
    /// coefficient first crosses zero, dropping it and re-solving. Returns
    /// whether the objective decreased.
    fn exact_step(&mut self, signs: &[i8]) -> bool {
        let mut active: Vec<usize> = (0..signs.len()).filter(|&j| signs[j] != 0).collect();
        let before = self.objective();
        let saved = self.beta.clone();
        for _ in 0..MAX_SIGN_DROPS {
            if active.is_empty() {
                break;
            }
            let q = self.gram.as_matrix().select_rows(&active).select_columns(&active);
            let Some(chol) = q.cholesky() else {
                break;
            };
            let rhs = DVector::from_iterator(
                active.len(),
                active.iter().map(|&j| self.rho[j] - self.lambda * f64::from(signs[j])),
            );
            let b = chol.solve(&rhs);
            if b.iter().any(|v| !v.is_finite()) {
                break;
            }
            // first zero crossing along beta -> b
            let mut step = 1.0;
            let mut hit = None;
            for (k, &j) in active.iter().enumerate() {
                if f64::from(signs[j]) * b[k] <= 0.0 {
                    let t = self.beta[j] / (self.beta[j] - b[k]);
                    if t < step {
                        step = t;
                        hit = Some(k);
                    }
                }
            }
            for (k, &j) in active.iter().enumerate() {
                self.beta[j] += step * (b[k] - self.beta[j]);
            }
            match hit {
                Some(k) => {
                    self.beta[active[k]] = 0.0;
                    active.remove(k);
                }
                None => break,
            }
        }
        self.refresh();
        if self.objective() < before {
            true
        } else {
            self.beta = saved;
            self.refresh();
            false
        }
    }
}

fn run(problem: &QuadLassoProblem, beta0: Option<&[f64]>, opts: &SolverOptions) -> Result<LassoFit> {
    let p = problem.gram.dim();
    let beta = match beta0 {
        Some(b) if b.len() == p => b.to_vec(),
        Some(b) => {
            return Err(Error::DimensionMismatch(format!("warm start has {} entries, expected {p}", b.len())))
        }
        None => vec![0.0; p],
    };
    let mut st = State {
        gram: problem.gram,
        rho: problem.rho,
        lambda: problem.lambda,
        diag: problem.gram.diagonal(),
        beta,
        qb: Vec::new(),
    };
    st.refresh();

    let mut sweeps = 0usize;
    let mut kkt = f64::INFINITY;
    let mut converged = false;
    let mut tried: Option<Vec<i8>> = None;

    while sweeps < opts.max_iter {
        // full pass
        let before = st.signs();
        let mut max_change = 0.0f64;
        for j in 0..p {
            max_change = max_change.max(st.update(j));
        }
        sweeps += 1;

        if max_change <= opts.tol * st.scale() {
            st.refresh();
            let grad: Vec<f64> = st.qb.iter().zip(st.rho).map(|(q, r)| q - r).collect();
            kkt = kkt_from_gradient(&grad, st.lambda, &st.beta);
            if kkt <= opts.kkt_tol {
                converged = true;
                break;
            }
        }

        if opts.exact_active_step && tried.as_ref() != Some(&before) && st.signs() == before {
            let ok = st.exact_step(&before);
            tried = Some(before);
            if ok {
                continue;
            }
        }

        // active-set passes
        let active: Vec<usize> = (0..p).filter(|&j| st.beta[j] != 0.0).collect();
        if active.is_empty() {
            continue;
        }
        let mut mark = st.signs();
        let mut inner = 0usize;
        while sweeps < opts.max_iter {
            let mut change = 0.0f64;
            for &j in &active {
                change = change.max(st.update(j));
            }
            sweeps += 1;
            inner += 1;
            if change <= opts.tol * st.scale() {
                break;
            }
            if opts.exact_active_step && inner.is_multiple_of(EXACT_STEP_EVERY) {
                let now = st.signs();
                if now == mark && tried.as_ref() != Some(&now) {
                    let ok = st.exact_step(&now);
                    tried = Some(now);
                    if ok {
                        break;
                    }
                } else {
                    mark = now;
                }
            }
        }
    }

    if !converged {
        st.refresh();
        kkt = kkt_violation(problem.gram, problem.rho, problem.lambda, &st.beta);
    }
    let objective = objective(problem.gram, problem.rho, problem.lambda, &st.beta);
    let fit = LassoFit {
        beta: st.beta,
        lambda: problem.lambda,
        iterations: sweeps,
        max_kkt_violation: kkt,
        converged,
        objective,
    };
    if converged {
        Ok(fit)
    } else {
        Err(Error::Unconverged { fit: Box::new(fit) })
    }
}

/// Solves along `lambdas` (expected descending), warm-starting each problem
/// from the previous solution.
pub fn solve_path(
    gram: &SymMatrix,
    rho: &[f64],
    lambdas: &[f64],
    opts: &SolverOptions,
) -> Result<Vec<LassoFit>> {
    path_with(gram, rho, lambdas, opts, solve)
}

pub(crate) fn path_with(
    gram: &SymMatrix,
    rho: &[f64],
    lambdas: &[f64],
    opts: &SolverOptions,
    solver: fn(&QuadLassoProblem, Option<&[f64]>, &SolverOptions) -> Result<LassoFit>,
) -> Result<Vec<LassoFit>> {
    let mut fits: Vec<LassoFit> = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let warm = fits.last().map(|f| f.beta.as_slice());
        let fit = solver(&QuadLassoProblem::new(gram, rho, lambda), warm, opts)?;
        fits.push(fit);
    }
    Ok(fits)
}

/// Naive moments from mean-imputed data: `(X_imp'X_imp/n, X_imp'y_imp/n)`.
pub fn imputed_moments(x: &IncompleteMatrix, y: &IncompleteVector) -> Result<(SymMatrix, Vec<f64>)> {
    let n = x.nrows();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!("X has {n} rows, y has {}", y.len())));
    }
    let imputed = mean_impute_columns(x);
    let y_imp = mean_impute(y.values(), y.mask());
    let nf = n as f64;
    let p = x.ncols();
    let gram = SymMatrix::from_fn(p, |j, k| summation::dot(&imputed[j], &imputed[k]) / nf)?;
    let rho = (0..p).map(|j| summation::dot(&imputed[j], &y_imp) / nf).collect();
    Ok((gram, rho))
}

/// Observed-cell mean per column, substituted for the missing cells.
pub fn mean_impute_columns(x: &IncompleteMatrix) -> Vec<Vec<f64>> {
    (0..x.ncols()).map(|j| mean_impute(x.column(j), x.mask_column(j))).collect()
}

fn mean_impute(values: &[f64], mask: &[bool]) -> Vec<f64> {
    let count = mask.iter().filter(|&&m| m).count();
    let mean = if count == 0 {
        0.0
    } else {
        summation::sum(values.iter().zip(mask).filter(|(_, &m)| m).map(|(&v, _)| v)) / count as f64
    };
    values.iter().zip(mask).map(|(&v, &m)| if m { v } else { mean }).collect()
}

/// Lasso on mean-imputed data.
pub fn naive_lasso(x: &IncompleteMatrix, y: &IncompleteVector, lambda: f64) -> Result<LassoFit> {
    let (gram, rho) = imputed_moments(x, y)?;
    solve_allow_degenerate(&QuadLassoProblem::new(&gram, &rho, lambda), None, &SolverOptions::default())
}
