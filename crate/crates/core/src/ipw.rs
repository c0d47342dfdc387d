//! Inverse-probability-weighted second moments.
//!
//! Every entry of `X'X/n` and `X'y/n` computed from zero-filled data is
//! divided by the probability that its pair of cells is jointly observed.
//! The centred variants subtract IPW column means first; their response
//! moments are centred the same way.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::missing::{IncompleteMatrix, IncompleteVector, ObsProbabilities, ProbSource};
use crate::summation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IpwVariant {
    /// Uncentred moments, for data already centred.
    #[default]
    Plain,
    /// Centred by IPW means.
    Centered2,
    /// Unbiased correction using the cross-sample sum.
    Centered3,
}

#[derive(Debug, Clone)]
pub struct IpwEstimate {
    pub sigma: SymMatrix,
    pub rho: Vec<f64>,
    pub variant: IpwVariant,
    pub probs_source: ProbSource,
}

fn check_dims(x: &IncompleteMatrix, probs: &ObsProbabilities) -> Result<()> {
    if probs.dim() != x.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "probabilities for {} covariates, data has {}",
            probs.dim(),
            x.ncols()
        )));
    }
    probs.validate()
}

/// Symmetric matrix whose `(j, k)` entry (`k <= j`) is `entry(j, k)`;
/// columns are processed in parallel and each entry is independent of the
/// schedule.
fn par_symmetric(p: usize, entry: impl Fn(usize, usize) -> f64 + Sync) -> Result<SymMatrix> {
    let cols: Vec<Vec<f64>> = (0..p)
        .into_par_iter()
        .map(|k| (k..p).map(|j| entry(j, k)).collect())
        .collect();
    let mut m = DMatrix::zeros(p, p);
    for (k, col) in cols.into_iter().enumerate() {
        for (off, v) in col.into_iter().enumerate() {
            m[(k + off, k)] = v;
        }
    }
    SymMatrix::from_lower(m)
}

/// `Sigma_ipw = S / pi_xx` and `rho_ipw = r / pi_xy` (entrywise).
pub fn ipw_moments(
    x: &IncompleteMatrix,
    y: &IncompleteVector,
    probs: &ObsProbabilities,
) -> Result<IpwEstimate> {
    ipw_moments_variant(x, y, probs, IpwVariant::Plain)
}

pub fn ipw_moments_variant(
    x: &IncompleteMatrix,
    y: &IncompleteVector,
    probs: &ObsProbabilities,
    variant: IpwVariant,
) -> Result<IpwEstimate> {
    check_dims(x, probs)?;
    let n = x.nrows();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!("X has {n} rows, y has {}", y.len())));
    }
    let nf = n as f64;
    let p = x.ncols();

    let (sigma, rho) = match variant {
        IpwVariant::Plain => {
            let sigma = par_symmetric(p, |j, k| {
                summation::dot(x.column(j), x.column(k)) / (nf * probs.pi_xx[(j, k)])
            })?;
            let rho = (0..p)
                .map(|j| summation::dot(x.column(j), y.values()) / (nf * probs.pi_xy[j]))
                .collect();
            (sigma, rho)
        }
        IpwVariant::Centered2 => {
            let centred = centred_columns(x, probs);
            let sigma = par_symmetric(p, |j, k| {
                summation::dot(&centred[j], &centred[k]) / (nf * probs.pi_xx[(j, k)])
            })?;
            let y_mean = summation::sum(y.values().iter().copied()) / (nf * probs.pi_y);
            let yc: Vec<f64> = y
                .values()
                .iter()
                .zip(y.mask())
                .map(|(&v, &m)| if m { v - y_mean } else { 0.0 })
                .collect();
            let rho = (0..p)
                .map(|j| summation::dot(&centred[j], &yc) / (nf * probs.pi_xy[j]))
                .collect();
            (sigma, rho)
        }
        IpwVariant::Centered3 => {
            if n < 2 {
                return Err(Error::TooFewSamples { n, required: 2 });
            }
            let sums: Vec<f64> =
                (0..p).map(|j| summation::sum(x.column(j).iter().copied())).collect();
            let cross = nf * (nf - 1.0);
            let sigma = par_symmetric(p, |j, k| {
                let same = summation::dot(x.column(j), x.column(k));
                let off = sums[j] * sums[k] - same;
                same / (nf * probs.pi_xx[(j, k)])
                    - off / (cross * probs.pi_xx[(j, j)] * probs.pi_xx[(k, k)])
            })?;
            let y_sum = summation::sum(y.values().iter().copied());
            let rho = (0..p)
                .map(|j| {
                    let same = summation::dot(x.column(j), y.values());
                    let off = sums[j] * y_sum - same;
                    same / (nf * probs.pi_xy[j]) - off / (cross * probs.pi_xx[(j, j)] * probs.pi_y)
                })
                .collect();
            (sigma, rho)
        }
    };

    Ok(IpwEstimate { sigma, rho, variant, probs_source: probs.source })
}

/// IPW column means `sum_i x_ij / (n pi_jj)`.
pub fn ipw_mean(x: &IncompleteMatrix, probs: &ObsProbabilities) -> Result<Vec<f64>> {
    check_dims(x, probs)?;
    let nf = x.nrows() as f64;
    Ok((0..x.ncols())
        .map(|j| summation::sum(x.column(j).iter().copied()) / (nf * probs.pi_xx[(j, j)]))
        .collect())
}

fn centred_columns(x: &IncompleteMatrix, probs: &ObsProbabilities) -> Vec<Vec<f64>> {
    let nf = x.nrows() as f64;
    (0..x.ncols())
        .map(|j| {
            let mean = summation::sum(x.column(j).iter().copied()) / (nf * probs.pi_xx[(j, j)]);
            x.column(j)
                .iter()
                .zip(x.mask_column(j))
                .map(|(&v, &m)| if m { v - mean } else { 0.0 })
                .collect()
        })
        .collect()
}

pub fn ipw_centered2(x: &IncompleteMatrix, probs: &ObsProbabilities) -> Result<SymMatrix> {
    let y = IncompleteVector::complete(&vec![0.0; x.nrows()])?;
    Ok(ipw_moments_variant(x, &y, probs, IpwVariant::Centered2)?.sigma)
}

pub fn ipw_centered3(x: &IncompleteMatrix, probs: &ObsProbabilities) -> Result<SymMatrix> {
    let y = IncompleteVector::complete(&vec![0.0; x.nrows()])?;
    Ok(ipw_moments_variant(x, &y, probs, IpwVariant::Centered3)?.sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::missing::{estimate_probs, estimate_probs_with, ZeroPairPolicy};
    use crate::seeded_rng;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn two_row_case() -> (IncompleteMatrix, IncompleteVector) {
        let x = IncompleteMatrix::from_columns_fn(2, 2, |i, j| {
            if i == 0 && j == 1 { None } else { Some([[1.0, 0.0], [3.0, 4.0]][i][j]) }
        })
        .unwrap();
        (x, IncompleteVector::complete(&[1.0, 2.0]).unwrap())
    }

    fn random_masked(n: usize, p: usize, seed: u64) -> IncompleteMatrix {
        let mut rng = seeded_rng(seed);
        let mut cells = vec![None; n * p];
        for c in cells.iter_mut() {
            if rng.random::<f64>() < 0.75 {
                *c = Some(rng.random::<f64>() * 4.0 - 1.0);
            }
        }
        // keep every pair jointly observed at least once
        for j in 0..p {
            cells[j * n] = Some(0.5 + j as f64);
        }
        IncompleteMatrix::from_columns_fn(n, p, |i, j| cells[j * n + i]).unwrap()
    }

    #[test]
    fn complete_data_reduces_to_gram() {
        let x = random_masked(30, 4, 1);
        let full = IncompleteMatrix::complete(&x.to_dense()).unwrap();
        let y = IncompleteVector::complete(&vec![1.0; 30]).unwrap();
        let est = ipw_moments(&full, &y, &ObsProbabilities::complete(4)).unwrap();
        let dense = full.to_dense();
        let gram = dense.transpose() * &dense / 30.0;
        for j in 0..4 {
            for k in 0..4 {
                assert_abs_diff_eq!(est.sigma[(j, k)], gram[(j, k)], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn two_row_hand_computed() {
        let (x, y) = two_row_case();
        let probs = estimate_probs(&x, &y).unwrap();
        let est = ipw_moments(&x, &y, &probs).unwrap();
        // S = [[5, 6], [6, 8]] divided by [[1, .5], [.5, .5]]
        assert_eq!(est.sigma.as_matrix().as_slice(), &[5.0, 12.0, 12.0, 16.0]);
        // r = [(1 + 6)/2, 8/2] divided by [1, .5]
        assert_eq!(est.rho, vec![3.5, 8.0]);
    }

    #[test]
    fn zero_data_gives_zero_moments() {
        let x = IncompleteMatrix::complete(&DMatrix::zeros(5, 3)).unwrap();
        let y = IncompleteVector::complete(&[0.0; 5]).unwrap();
        let est = ipw_moments(&x, &y, &ObsProbabilities::complete(3)).unwrap();
        assert!(est.sigma.as_matrix().iter().all(|&v| v == 0.0));
        assert!(est.rho.iter().all(|&v| v == 0.0));
        assert_eq!(ipw_mean(&x, &ObsProbabilities::complete(3)).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn means() {
        let ones = IncompleteMatrix::complete(&DMatrix::from_element(4, 1, 1.0)).unwrap();
        assert_eq!(ipw_mean(&ones, &ObsProbabilities::complete(1)).unwrap(), vec![1.0]);

        let x = IncompleteMatrix::from_columns_fn(2, 1, |i, _| (i == 0).then_some(2.0)).unwrap();
        let probs = estimate_probs(&x, &IncompleteVector::complete(&[0.0, 0.0]).unwrap()).unwrap();
        assert_eq!(ipw_mean(&x, &probs).unwrap(), vec![2.0]);
    }

    #[test]
    fn bad_probabilities_rejected() {
        let (x, y) = two_row_case();
        let mut probs = estimate_probs(&x, &y).unwrap();
        probs.pi_xy[0] = 0.0;
        assert!(matches!(ipw_moments(&x, &y, &probs), Err(Error::InvalidProbability { .. })));
    }

    #[test]
    fn centered2_complete_is_sample_covariance() {
        let x = IncompleteMatrix::complete(&random_masked(25, 3, 4).to_dense()).unwrap();
        let probs = ObsProbabilities::complete(3);
        let got = ipw_centered2(&x, &probs).unwrap();
        let d = x.to_dense();
        let means: Vec<f64> = (0..3).map(|j| d.column(j).mean()).collect();
        for j in 0..3 {
            for k in 0..3 {
                let cov: f64 =
                    (0..25).map(|i| (d[(i, j)] - means[j]) * (d[(i, k)] - means[k])).sum::<f64>() / 25.0;
                assert_abs_diff_eq!(got[(j, k)], cov, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn centered2_constant_column_has_zero_variance() {
        let x = IncompleteMatrix::from_columns_fn(6, 2, |i, j| {
            if j == 0 { (i % 2 == 0).then_some(3.0) } else { Some(i as f64) }
        })
        .unwrap();
        let probs = estimate_probs(&x, &IncompleteVector::complete(&[0.0; 6]).unwrap()).unwrap();
        assert_abs_diff_eq!(ipw_centered2(&x, &probs).unwrap()[(0, 0)], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn centered2_matches_triple_loop() {
        let x = random_masked(5, 3, 9);
        let y = IncompleteVector::complete(&[0.0; 5]).unwrap();
        let probs = estimate_probs(&x, &y).unwrap();
        let got = ipw_centered2(&x, &probs).unwrap();
        let n = 5.0;
        for j in 0..3 {
            for k in 0..3 {
                let mu = |c: usize| (0..5).map(|i| x.value(i, c)).sum::<f64>() / (n * probs.pi_xx[(c, c)]);
                let mut acc = 0.0;
                for i in 0..5 {
                    if x.is_observed(i, j) && x.is_observed(i, k) {
                        acc += (x.value(i, j) - mu(j)) * (x.value(i, k) - mu(k));
                    }
                }
                assert_abs_diff_eq!(got[(j, k)], acc / (n * probs.pi_xx[(j, k)]), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn centered3_two_rows() {
        let x = IncompleteMatrix::from_columns_fn(2, 2, |i, _| Some([1.0, 3.0][i])).unwrap();
        let got = ipw_centered3(&x, &ObsProbabilities::complete(2)).unwrap();
        for v in got.as_matrix().iter() {
            assert_abs_diff_eq!(*v, 2.0, epsilon = 1e-14);
        }
        let one = IncompleteMatrix::complete(&DMatrix::from_element(1, 2, 1.0)).unwrap();
        assert!(matches!(
            ipw_centered3(&one, &ObsProbabilities::complete(2)),
            Err(Error::TooFewSamples { n: 1, .. })
        ));
    }

    #[test]
    fn centered3_matches_double_sum() {
        for seed in 0..20 {
            let (n, p) = (10 + seed as usize * 2, 1 + seed as usize % 10);
            let x = random_masked(n, p, 100 + seed);
            let y = IncompleteVector::complete(&vec![0.0; n]).unwrap();
            let probs = estimate_probs(&x, &y).unwrap();
            let got = ipw_centered3(&x, &probs).unwrap();
            let nf = n as f64;
            for j in 0..p {
                for k in 0..p {
                    let mut same = 0.0;
                    let mut cross = 0.0;
                    for i in 0..n {
                        same += x.value(i, j) * x.value(i, k);
                        for i2 in 0..n {
                            if i2 != i {
                                cross += x.value(i, j) * x.value(i2, k);
                            }
                        }
                    }
                    let want = same / (nf * probs.pi_xx[(j, k)])
                        - cross / (nf * (nf - 1.0) * probs.pi_xx[(j, j)] * probs.pi_xx[(k, k)]);
                    assert_abs_diff_eq!(got[(j, k)], want, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn centered3_missing_column_with_fallback_is_finite() {
        let x = IncompleteMatrix::from_columns_fn(4, 2, |i, j| (j == 0).then_some(i as f64)).unwrap();
        let y = IncompleteVector::complete(&[0.0; 4]).unwrap();
        let probs = estimate_probs_with(&x, &y, ZeroPairPolicy::FallbackOneOverN).unwrap();
        let got = ipw_centered3(&x, &probs).unwrap();
        assert!(got.as_matrix().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn rho_centering_for_variants() {
        let x = IncompleteMatrix::complete(&random_masked(12, 2, 3).to_dense()).unwrap();
        let yv: Vec<f64> = (0..12).map(|i| (i as f64).sin() + 2.0).collect();
        let y = IncompleteVector::complete(&yv).unwrap();
        let probs = ObsProbabilities::complete(2);
        let est = ipw_moments_variant(&x, &y, &probs, IpwVariant::Centered2).unwrap();
        let d = x.to_dense();
        let ym = yv.iter().sum::<f64>() / 12.0;
        let xm = d.column(1).mean();
        let want: f64 = (0..12).map(|i| (d[(i, 1)] - xm) * (yv[i] - ym)).sum::<f64>() / 12.0;
        assert_abs_diff_eq!(est.rho[1], want, epsilon = 1e-12);

        let est3 = ipw_moments_variant(&x, &y, &probs, IpwVariant::Centered3).unwrap();
        // with complete data Centered3 equals the unbiased covariance
        let unbiased: f64 = (0..12).map(|i| (d[(i, 1)] - xm) * (yv[i] - ym)).sum::<f64>() / 11.0;
        assert_abs_diff_eq!(est3.rho[1], unbiased, epsilon = 1e-12);
    }
}
