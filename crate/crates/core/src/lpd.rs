//! Linear-shrinkage positive definite modification.
//!
//! A symmetric matrix `A` with `lambda_min(A) < eps` is replaced by
//! `alpha * A + (1 - alpha) * mu * I`. For a fixed target `mu` the largest
//! feasible weight is `alpha = (mu - eps) / (mu - lambda_min)`, which puts
//! the smallest eigenvalue of the result exactly at `eps`. The remaining
//! freedom in `mu` is spent minimising `(1 - alpha) * ||A - mu I||` in one of
//! four norms; each has a closed-form optimum computed by [`optimal_mu`].

use log::info;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig_sym, EigenInfo, NormKind, SymMatrix};

pub const DEFAULT_EPSILON: f64 = 0.01;

/// Relative tolerance below which `lambda_min` is treated as non-positive.
pub const PD_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpdConfig {
    /// Floor imposed on the smallest eigenvalue.
    pub epsilon: f64,
    pub norm: NormKind,
    /// Use this `mu` instead of the norm-optimal one.
    pub mu_override: Option<f64>,
    /// Multiplier applied to half-line optima (`k` in `LPD-norm-k`).
    pub mu_factor: f64,
}

impl LpdConfig {
    pub fn new(epsilon: f64, norm: NormKind) -> Self {
        LpdConfig { epsilon, norm, mu_override: None, mu_factor: 1.0 }
    }

    pub fn with_mu_factor(mut self, k: f64) -> Self {
        self.mu_factor = k;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidInput(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.mu_factor >= 1.0 && self.mu_factor.is_finite()) {
            return Err(Error::InvalidInput(format!("mu_factor must be >= 1, got {}", self.mu_factor)));
        }
        if let Some(mu) = self.mu_override {
            if !(mu > self.epsilon && mu.is_finite()) {
                return Err(Error::InvalidInput(format!("mu override {mu} must exceed epsilon")));
            }
        }
        Ok(())
    }
}

impl Default for LpdConfig {
    fn default() -> Self {
        LpdConfig::new(DEFAULT_EPSILON, NormKind::LInf)
    }
}

/// Shape of the set of optimal `mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MuKind {
    /// Unique minimiser.
    Point,
    /// Every `mu >= lower_bound` is optimal.
    HalfLine { lower_bound: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuOptimum {
    pub mu: f64,
    pub kind: MuKind,
    /// Optimal `||A - Phi||` in the requested norm.
    pub predicted_distance: f64,
}

#[derive(Debug, Clone)]
pub struct LpdSolution {
    pub alpha: f64,
    pub mu: f64,
    pub epsilon: f64,
    pub sigma_lpd: SymMatrix,
    pub lambda_min_input: f64,
    /// `false` when the input was already positive definite.
    pub modified: bool,
    /// `||A - Phi||` in the requested norm.
    pub achieved_distance: f64,
    pub norm_requested: NormKind,
    /// Differs from `norm_requested` when the requested norm had no minimiser.
    pub norm_used: NormKind,
    /// Closed-form optimum before `mu_factor` scaling and the `2 eps` clamp.
    pub optimum: Option<MuOptimum>,
    pub warning: Option<String>,
}

fn check_diagonal(a: &SymMatrix) -> Result<()> {
    if let Some((j, d)) = a.diagonal().into_iter().enumerate().find(|(_, d)| !(*d > 0.0)) {
        return Err(Error::InvalidInput(format!("diagonal entry {j} is {d}, expected > 0")));
    }
    Ok(())
}

fn is_positive_definite(lambda_min: f64, a: &SymMatrix) -> bool {
    lambda_min > PD_TOLERANCE * a.norm(NormKind::ElemMax).max(1.0)
}

/// Row-sum constants `(M1, M2)` with
/// `M1 = max_j (a_jj + sum_{i != j} |a_ij|)` and
/// `M2 = max_j (-a_jj + sum_{i != j} |a_ij|)`.
pub fn row_sum_bounds(a: &SymMatrix) -> (f64, f64) {
    let p = a.dim();
    let mut m1 = f64::NEG_INFINITY;
    let mut m2 = f64::NEG_INFINITY;
    for j in 0..p {
        let col = a.column(j);
        let off: f64 = col.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, v)| v.abs()).sum();
        m1 = m1.max(col[j] + off);
        m2 = m2.max(-col[j] + off);
    }
    (m1, m2)
}

/// Diagonal extremes and the largest off-diagonal magnitude.
pub fn elementwise_bounds(a: &SymMatrix) -> (f64, f64, f64) {
    let d = a.diagonal();
    let d_max = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let d_min = d.iter().copied().fold(f64::INFINITY, f64::min);
    let p = a.dim();
    let mut off = 0.0f64;
    for j in 0..p {
        for (i, v) in a.column(j).iter().enumerate() {
            if i != j {
                off = off.max(v.abs());
            }
        }
    }
    (d_max, d_min, off)
}

/// `(eps - lambda_min) * max(M1 - mu, mu + M2) / (mu - lambda_min)`, the
/// l-infinity distance as a function of `mu`.
pub fn linf_distance(lambda_min: f64, m1: f64, m2: f64, epsilon: f64, mu: f64) -> f64 {
    (epsilon - lambda_min) * (m1 - mu).max(mu + m2) / (mu - lambda_min)
}

/// Closed-form l-infinity optimum from the row-sum constants.
pub fn linf_closed_form(lambda_min: f64, m1: f64, m2: f64, epsilon: f64) -> Result<MuOptimum> {
    let gap = lambda_min + m2;
    let tol = PD_TOLERANCE * m1.abs().max(1.0);
    let kink = (m1 - m2) / 2.0;
    if gap > tol {
        return Err(Error::NoSolutionForNorm { norm: NormKind::LInf, gap });
    }
    if gap.abs() <= tol {
        let lower = kink.max(epsilon);
        return Ok(MuOptimum {
            mu: lower,
            kind: MuKind::HalfLine { lower_bound: lower },
            predicted_distance: epsilon - lambda_min,
        });
    }
    let mu = kink.max(epsilon);
    let predicted_distance = if mu == kink {
        (epsilon - lambda_min) * ((m1 + m2) / 2.0) / (kink - lambda_min)
    } else {
        linf_distance(lambda_min, m1, m2, epsilon, mu)
    };
    Ok(MuOptimum { mu, kind: MuKind::Point, predicted_distance })
}

/// Norm-optimal `mu` for `A` with `lambda_min(A) <= 0 < eps`.
pub fn optimal_mu(a: &SymMatrix, norm: NormKind, epsilon: f64) -> Result<MuOptimum> {
    check_diagonal(a)?;
    let eig = eig_sym(a, norm == NormKind::ScaledFrobenius);
    if is_positive_definite(eig.lambda_min, a) {
        return Err(Error::AlreadyPositiveDefinite { lambda_min: eig.lambda_min });
    }
    optimal_mu_with(a, &eig, norm, epsilon)
}

fn optimal_mu_with(a: &SymMatrix, eig: &EigenInfo, norm: NormKind, epsilon: f64) -> Result<MuOptimum> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidInput(format!("epsilon must be positive, got {epsilon}")));
    }
    let lmin = eig.lambda_min;
    let gap = epsilon - lmin;
    match norm {
        NormKind::Spectral => {
            let lower = epsilon.max((eig.lambda_max + lmin) / 2.0);
            Ok(MuOptimum {
                mu: lower,
                kind: MuKind::HalfLine { lower_bound: lower },
                predicted_distance: gap,
            })
        }
        NormKind::ScaledFrobenius => {
            let owned;
            let spectrum = match &eig.spectrum {
                Some(s) => s,
                None => {
                    owned = eig_sym(a, true).spectrum.expect("full spectrum requested");
                    &owned
                }
            };
            let p = spectrum.len() as f64;
            let mean = spectrum.iter().sum::<f64>() / p;
            let (s1, s2) = spectrum.iter().fold((0.0, 0.0), |(s1, s2), &l| {
                let d = l - lmin;
                (s1 + d, s2 + d * d)
            });
            let spread: f64 = spectrum.iter().map(|l| (l - mean).powi(2)).sum();
            // s1 > 0 because positive diagonals rule out A = lambda_min * I.
            let mu = (lmin + s2 / s1).max(epsilon);
            let ratio = spread / s2;
            let predicted_distance = if mu == lmin + s2 / s1 {
                gap * ratio.sqrt()
            } else {
                let sq: f64 = spectrum.iter().map(|l| (l - mu).powi(2)).sum();
                gap / (mu - lmin) * (sq / p).sqrt()
            };
            Ok(MuOptimum { mu, kind: MuKind::Point, predicted_distance })
        }
        NormKind::LInf => {
            let (m1, m2) = row_sum_bounds(a);
            linf_closed_form(lmin, m1, m2, epsilon)
        }
        NormKind::ElemMax => {
            let (d_max, d_min, off) = elementwise_bounds(a);
            let half_spread = (d_max - d_min) / 2.0;
            let (mu, numer) = if half_spread > off {
                ((d_max + d_min) / 2.0, half_spread)
            } else {
                (d_min + off, off)
            };
            if mu >= epsilon {
                Ok(MuOptimum { mu, kind: MuKind::Point, predicted_distance: gap * numer / (mu - lmin) })
            } else {
                let mu = epsilon;
                let worst = off.max((d_max - mu).abs()).max((d_min - mu).abs());
                Ok(MuOptimum { mu, kind: MuKind::Point, predicted_distance: gap * worst / (mu - lmin) })
            }
        }
    }
}

/// `(1 - alpha) * ||A - mu I||` without forming the difference.
fn shrinkage_distance(a: &SymMatrix, eig: &EigenInfo, norm: NormKind, alpha: f64, mu: f64) -> f64 {
    let w = 1.0 - alpha;
    let p = a.dim();
    match norm {
        NormKind::Spectral => w * (eig.lambda_max - mu).abs().max((eig.lambda_min - mu).abs()),
        NormKind::LInf => {
            let worst = (0..p)
                .map(|j| {
                    a.column(j)
                        .iter()
                        .enumerate()
                        .map(|(i, v)| if i == j { (v - mu).abs() } else { v.abs() })
                        .sum::<f64>()
                })
                .fold(0.0, f64::max);
            w * worst
        }
        NormKind::ElemMax => {
            let worst = (0..p)
                .flat_map(|j| {
                    a.column(j)
                        .iter()
                        .enumerate()
                        .map(move |(i, v)| if i == j { (v - mu).abs() } else { v.abs() })
                })
                .fold(0.0, f64::max);
            w * worst
        }
        NormKind::ScaledFrobenius => {
            let sq: f64 = (0..p)
                .flat_map(|j| {
                    a.column(j)
                        .iter()
                        .enumerate()
                        .map(move |(i, v)| if i == j { (v - mu).powi(2) } else { v * v })
                })
                .sum();
            w * (sq / p as f64).sqrt()
        }
    }
}

/// Returns a matrix with `lambda_min >= eps`, leaving positive definite
/// input untouched.
pub fn lpd_modify(a: &SymMatrix, cfg: &LpdConfig) -> Result<LpdSolution> {
    cfg.validate()?;
    check_diagonal(a)?;
    let needs_full = cfg.norm == NormKind::ScaledFrobenius && cfg.mu_override.is_none();
    let eig = eig_sym(a, needs_full);
    let lmin = eig.lambda_min;

    if is_positive_definite(lmin, a) {
        return Ok(LpdSolution {
            alpha: 1.0,
            mu: 0.0,
            epsilon: cfg.epsilon,
            sigma_lpd: a.clone(),
            lambda_min_input: lmin,
            modified: false,
            achieved_distance: 0.0,
            norm_requested: cfg.norm,
            norm_used: cfg.norm,
            optimum: None,
            warning: None,
        });
    }

    let eps = cfg.epsilon;
    let mut norm_used = cfg.norm;
    let mut warning = None;
    let (mu, optimum) = match cfg.mu_override {
        Some(mu) => (mu, None),
        None => {
            let opt = match optimal_mu_with(a, &eig, cfg.norm, eps) {
                Err(Error::NoSolutionForNorm { norm, gap }) => {
                    let msg = format!(
                        "{norm:?} distance has no minimiser (lambda_min + M2 = {gap:.3e}); using the spectral-norm optimum"
                    );
                    info!("{msg}");
                    warning = Some(msg);
                    norm_used = NormKind::Spectral;
                    optimal_mu_with(a, &eig, NormKind::Spectral, eps)?
                }
                other => other?,
            };
            let scaled = match opt.kind {
                MuKind::HalfLine { lower_bound } => cfg.mu_factor * lower_bound,
                MuKind::Point => opt.mu,
            };
            (scaled.max(2.0 * eps), Some(opt))
        }
    };

    let alpha = (mu - eps) / (mu - lmin);
    let sigma_lpd = a.scaled_shift(alpha, (1.0 - alpha) * mu);
    let achieved_distance = shrinkage_distance(a, &eig, cfg.norm, alpha, mu);

    Ok(LpdSolution {
        alpha,
        mu,
        epsilon: eps,
        sigma_lpd,
        lambda_min_input: lmin,
        modified: true,
        achieved_distance,
        norm_requested: cfg.norm,
        norm_used,
        optimum,
        warning,
    })
}
