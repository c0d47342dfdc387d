//! Dense symmetric matrices, their spectra, and the four matrix norms used
//! to measure the cost of a positive definite modification.

use std::ops::Index;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Matrix norms supported by the shrinkage modification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    /// Largest singular value.
    Spectral,
    /// `sqrt(sum a_ij^2 / ncols)`.
    #[serde(rename = "frobenius")]
    ScaledFrobenius,
    /// Maximum absolute row sum.
    #[serde(rename = "linf")]
    LInf,
    /// Maximum absolute entry.
    #[serde(rename = "elemmax")]
    ElemMax,
}

impl NormKind {
    pub const ALL: [NormKind; 4] = [
        NormKind::Spectral,
        NormKind::ScaledFrobenius,
        NormKind::LInf,
        NormKind::ElemMax,
    ];

    /// Short tag used in method names (`LPD-I-1` and friends).
    pub fn tag(self) -> &'static str {
        match self {
            NormKind::Spectral => "S",
            NormKind::ScaledFrobenius => "F",
            NormKind::LInf => "I",
            NormKind::ElemMax => "E",
        }
    }
}

impl std::str::FromStr for NormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "spectral" | "s" => Ok(NormKind::Spectral),
            "frobenius" | "f" => Ok(NormKind::ScaledFrobenius),
            "linf" | "i" | "l" => Ok(NormKind::LInf),
            "elemmax" | "max" | "e" => Ok(NormKind::ElemMax),
            other => Err(Error::InvalidInput(format!("unknown norm '{other}'"))),
        }
    }
}

/// Dense symmetric matrix. Entries are stored in full and kept exactly
/// symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    /// Wraps a square matrix, rejecting non-finite or asymmetric input.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        check_square_finite(&m)?;
        let p = m.nrows();
        let scale = m.amax().max(1.0);
        for j in 0..p {
            for i in (j + 1)..p {
                if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidMatrix(format!(
                        "entries ({i},{j}) and ({j},{i}) differ"
                    )));
                }
            }
        }
        Ok(Self::from_lower_unchecked(m))
    }

    /// Builds a symmetric matrix from the lower triangle of `m`.
    pub fn from_lower(m: DMatrix<f64>) -> Result<Self> {
        check_square_finite(&m)?;
        Ok(Self::from_lower_unchecked(m))
    }

    fn from_lower_unchecked(mut m: DMatrix<f64>) -> Self {
        let p = m.nrows();
        for j in 0..p {
            for i in (j + 1)..p {
                m[(j, i)] = m[(i, j)];
            }
        }
        SymMatrix(m)
    }

    /// Builds from a closure evaluated on the lower triangle (`i >= j`).
    pub fn from_fn(p: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidMatrix("dimension must be at least 1".into()));
        }
        let mut m = DMatrix::zeros(p, p);
        for j in 0..p {
            for i in j..p {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        check_square_finite(&m)?;
        Ok(SymMatrix(m))
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let p = rows.len();
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::InvalidMatrix("rows must form a square matrix".into()));
        }
        Self::new(DMatrix::from_fn(p, p, |i, j| rows[i][j]))
    }

    pub fn identity(p: usize) -> Self {
        SymMatrix(DMatrix::identity(p, p))
    }

    pub fn from_diagonal(d: &[f64]) -> Result<Self> {
        Self::from_fn(d.len(), |i, j| if i == j { d[i] } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    /// Column `j` as a contiguous slice.
    pub fn column(&self, j: usize) -> &[f64] {
        let p = self.dim();
        &self.0.as_slice()[j * p..(j + 1) * p]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|j| self.0[(j, j)]).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    /// `alpha * self + shift * I`.
    pub fn scaled_shift(&self, alpha: f64, shift: f64) -> SymMatrix {
        let mut m = self.0.scale(alpha);
        for j in 0..self.dim() {
            m[(j, j)] += shift;
        }
        SymMatrix(m)
    }

    pub fn sub(&self, other: &SymMatrix) -> Result<SymMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(SymMatrix(&self.0 - &other.0))
    }

    /// `self * v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let p = self.dim();
        let mut out = vec![0.0; p];
        for (k, &vk) in v.iter().enumerate() {
            if vk != 0.0 {
                for (o, &q) in out.iter_mut().zip(self.column(k)) {
                    *o += q * vk;
                }
            }
        }
        out
    }

    /// `v' self v`.
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        self.mul_vec(v).iter().zip(v).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self, which: NormKind) -> f64 {
        norm(self, which)
    }
}

impl Index<(usize, usize)> for SymMatrix {
    type Output = f64;

    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

fn check_square_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() == 0 || m.nrows() != m.ncols() {
        return Err(Error::InvalidMatrix(format!(
            "expected a non-empty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if let Some(pos) = m.iter().position(|v| !v.is_finite()) {
        let p = m.nrows();
        return Err(Error::InvalidMatrix(format!(
            "non-finite entry at ({}, {})",
            pos % p,
            pos / p
        )));
    }
    Ok(())
}

/// Extremal eigenvalues, optionally with the full ascending spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenInfo {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub spectrum: Option<Vec<f64>>,
}

impl EigenInfo {
    fn from_sorted(values: Vec<f64>, full: bool) -> Self {
        EigenInfo {
            lambda_min: values[0],
            lambda_max: values[values.len() - 1],
            spectrum: full.then_some(values),
        }
    }
}

fn sorted(mut values: Vec<f64>) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    values
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn eig_sym(a: &SymMatrix, full: bool) -> EigenInfo {
    let values = a.0.clone().symmetric_eigenvalues();
    EigenInfo::from_sorted(sorted(values.as_slice().to_vec()), full)
}

/// Full eigendecomposition: ascending eigenvalues and matching unit
/// eigenvectors (as columns).
pub fn eig_decompose(a: &SymMatrix) -> (Vec<f64>, DMatrix<f64>) {
    let eig = a.0.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..a.dim()).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_columns(
        &order
            .iter()
            .map(|&k| eig.eigenvectors.column(k).into_owned())
            .collect::<Vec<DVector<f64>>>(),
    );
    (values, vectors)
}

pub fn norm(a: &SymMatrix, which: NormKind) -> f64 {
    let m = &a.0;
    match which {
        NormKind::Spectral => {
            let e = eig_sym(a, false);
            e.lambda_min.abs().max(e.lambda_max.abs())
        }
        NormKind::ScaledFrobenius => (m.iter().map(|v| v * v).sum::<f64>() / m.ncols() as f64).sqrt(),
        NormKind::LInf => (0..m.nrows())
            .map(|i| m.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max),
        NormKind::ElemMax => m.amax(),
    }
}
