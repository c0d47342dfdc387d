//! Incompletely observed data, simulated missingness, and empirical
//! observation probabilities.
//!
//! Missing cells are stored as zeros next to a boolean mask (`true` means
//! observed), so moment sums over the value buffer never need to branch.

mod table;

pub use table::{read_csv, write_csv, CsvOptions, CsvTable};

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, PairMember, Result};
use crate::linalg::SymMatrix;
use crate::seeded_rng;

/// `n x p` matrix of zero-filled values with an observation mask,
/// stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct IncompleteMatrix {
    n: usize,
    p: usize,
    values: Vec<f64>,
    mask: Vec<bool>,
}

impl IncompleteMatrix {
    /// Builds from full values and a mask; masked-out cells are zeroed.
    pub fn new(values: &DMatrix<f64>, mask: &DMatrix<bool>) -> Result<Self> {
        let (n, p) = values.shape();
        if mask.shape() != (n, p) {
            return Err(Error::DimensionMismatch(format!(
                "values {n}x{p} vs mask {}x{}",
                mask.nrows(),
                mask.ncols()
            )));
        }
        Self::from_columns_fn(n, p, |i, j| mask[(i, j)].then(|| values[(i, j)]))
    }

    pub fn complete(values: &DMatrix<f64>) -> Result<Self> {
        let (n, p) = values.shape();
        Self::from_columns_fn(n, p, |i, j| Some(values[(i, j)]))
    }

    /// Builds from a closure returning `None` for missing cells.
    pub fn from_columns_fn(
        n: usize,
        p: usize,
        mut cell: impl FnMut(usize, usize) -> Option<f64>,
    ) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::InvalidInput(format!("empty data matrix ({n}x{p})")));
        }
        let mut values = vec![0.0; n * p];
        let mut mask = vec![false; n * p];
        for j in 0..p {
            for i in 0..n {
                if let Some(v) = cell(i, j) {
                    if !v.is_finite() {
                        return Err(Error::InvalidInput(format!(
                            "non-finite observed value at row {i}, column {j}"
                        )));
                    }
                    values[j * n + i] = v;
                    mask[j * n + i] = true;
                }
            }
        }
        Ok(IncompleteMatrix { n, p, values, mask })
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn ncols(&self) -> usize {
        self.p
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.n + i]
    }

    pub fn is_observed(&self, i: usize, j: usize) -> bool {
        self.mask[j * self.n + i]
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.is_observed(i, j).then(|| self.value(i, j))
    }

    /// Zero-filled column `j`.
    pub fn column(&self, j: usize) -> &[f64] {
        &self.values[j * self.n..(j + 1) * self.n]
    }

    pub fn mask_column(&self, j: usize) -> &[bool] {
        &self.mask[j * self.n..(j + 1) * self.n]
    }

    pub fn observed_count(&self, j: usize) -> usize {
        self.mask_column(j).iter().filter(|&&m| m).count()
    }

    pub fn is_complete(&self) -> bool {
        self.mask.iter().all(|&m| m)
    }

    /// Rows selected by `rows`, in that order.
    pub fn select_rows(&self, rows: &[usize]) -> IncompleteMatrix {
        let n = rows.len();
        let mut values = Vec::with_capacity(n * self.p);
        let mut mask = Vec::with_capacity(n * self.p);
        for j in 0..self.p {
            let (col, m) = (self.column(j), self.mask_column(j));
            values.extend(rows.iter().map(|&i| col[i]));
            mask.extend(rows.iter().map(|&i| m[i]));
        }
        IncompleteMatrix { n, p: self.p, values, mask }
    }

    /// Applies `f` to every observed cell of column `j`.
    pub fn map_observed(&mut self, j: usize, mut f: impl FnMut(f64) -> f64) {
        let n = self.n;
        for i in 0..n {
            if self.mask[j * n + i] {
                self.values[j * n + i] = f(self.values[j * n + i]);
            }
        }
    }

    /// Zero-filled values as a dense matrix.
    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_column_slice(self.n, self.p, &self.values)
    }
}

/// Zero-filled response vector with an observation mask.
#[derive(Debug, Clone, PartialEq)]
pub struct IncompleteVector {
    values: Vec<f64>,
    mask: Vec<bool>,
}

impl IncompleteVector {
    pub fn new(values: &[f64], mask: &[bool]) -> Result<Self> {
        if values.len() != mask.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values vs {} mask entries",
                values.len(),
                mask.len()
            )));
        }
        Self::from_options(values.iter().zip(mask).map(|(&v, &m)| m.then_some(v)))
    }

    pub fn complete(values: &[f64]) -> Result<Self> {
        Self::from_options(values.iter().map(|&v| Some(v)))
    }

    pub fn from_options(cells: impl IntoIterator<Item = Option<f64>>) -> Result<Self> {
        let mut values = Vec::new();
        let mut mask = Vec::new();
        for (i, c) in cells.into_iter().enumerate() {
            match c {
                Some(v) if !v.is_finite() => {
                    return Err(Error::InvalidInput(format!("non-finite response at row {i}")))
                }
                Some(v) => {
                    values.push(v);
                    mask.push(true);
                }
                None => {
                    values.push(0.0);
                    mask.push(false);
                }
            }
        }
        if values.is_empty() {
            return Err(Error::InvalidInput("empty response vector".into()));
        }
        Ok(IncompleteVector { values, mask })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn observed_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn select_rows(&self, rows: &[usize]) -> IncompleteVector {
        IncompleteVector {
            values: rows.iter().map(|&i| self.values[i]).collect(),
            mask: rows.iter().map(|&i| self.mask[i]).collect(),
        }
    }

    pub fn map_observed(&mut self, mut f: impl FnMut(f64) -> f64) {
        for (v, &m) in self.values.iter_mut().zip(&self.mask) {
            if m {
                *v = f(*v);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProbSource {
    Known,
    Estimated,
}

/// Pairwise observation probabilities.
///
/// `pi_y` (probability the response is observed) is only consumed by the
/// mean-centred moment variants.
#[derive(Debug, Clone, PartialEq)]
pub struct ObsProbabilities {
    pub pi_xx: SymMatrix,
    pub pi_xy: Vec<f64>,
    pub pi_y: f64,
    pub source: ProbSource,
}

impl ObsProbabilities {
    pub fn new(pi_xx: SymMatrix, pi_xy: Vec<f64>, pi_y: f64, source: ProbSource) -> Result<Self> {
        let p = pi_xx.dim();
        if pi_xy.len() != p {
            return Err(Error::DimensionMismatch(format!(
                "pi_xx is {p}x{p} but pi_xy has {} entries",
                pi_xy.len()
            )));
        }
        let probs = ObsProbabilities { pi_xx, pi_xy, pi_y, source };
        probs.validate()?;
        Ok(probs)
    }

    /// All probabilities equal to one.
    pub fn complete(p: usize) -> Self {
        ObsProbabilities {
            pi_xx: SymMatrix::from_fn(p, |_, _| 1.0).expect("p >= 1"),
            pi_xy: vec![1.0; p],
            pi_y: 1.0,
            source: ProbSource::Known,
        }
    }

    /// Exact probabilities implied by an MCAR mechanism with independent
    /// Bernoulli cells.
    pub fn mcar_known(p: usize, mech: &MissingMechanism) -> Result<Self> {
        mech.validate()?;
        if mech.kind != MechanismKind::Mcar {
            return Err(Error::InvalidMechanism(
                "closed-form probabilities only exist for MCAR".into(),
            ));
        }
        let affected = mech.affected_columns(p)?;
        let mut hit = vec![false; p];
        for &j in &affected {
            hit[j] = true;
        }
        let cell = |j: usize| if hit[j] { mech.theta } else { 1.0 };
        let pi_xx = SymMatrix::from_fn(p, |i, j| if i == j { cell(i) } else { cell(i) * cell(j) })?;
        let pi_xy = (0..p).map(|j| cell(j) * mech.theta).collect();
        Self::new(pi_xx, pi_xy, mech.theta, ProbSource::Known)
    }

    pub fn dim(&self) -> usize {
        self.pi_xx.dim()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |v: f64| !(v > 0.0 && v <= 1.0);
        let p = self.dim();
        for j in 0..p {
            for k in 0..=j {
                let v = self.pi_xx[(j, k)];
                if bad(v) {
                    return Err(Error::InvalidProbability {
                        value: v,
                        location: format!("pi_xx({j},{k})"),
                    });
                }
            }
            if bad(self.pi_xy[j]) {
                return Err(Error::InvalidProbability {
                    value: self.pi_xy[j],
                    location: format!("pi_xy({j})"),
                });
            }
        }
        if bad(self.pi_y) {
            return Err(Error::InvalidProbability { value: self.pi_y, location: "pi_y".into() });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum MechanismKind {
    Mcar,
    Mar,
    Mnar,
}

/// Which columns a mechanism corrupts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Affected {
    /// Columns 3, 6, 9, ... (1-based).
    EveryThird,
    /// Explicit 0-based column indices.
    Columns(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissingMechanism {
    pub kind: MechanismKind,
    /// Observation probability.
    pub theta: f64,
    pub affected: Affected,
}

impl MissingMechanism {
    pub fn mcar(theta: f64) -> Self {
        MissingMechanism { kind: MechanismKind::Mcar, theta, affected: Affected::EveryThird }
    }

    pub fn mar(theta: f64) -> Self {
        MissingMechanism { kind: MechanismKind::Mar, theta, affected: Affected::EveryThird }
    }

    pub fn mnar(theta: f64) -> Self {
        MissingMechanism { kind: MechanismKind::Mnar, theta, affected: Affected::EveryThird }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::InvalidMechanism(format!(
                "theta must lie in (0, 1], got {}",
                self.theta
            )));
        }
        Ok(())
    }

    /// 0-based indices of corrupted columns.
    pub fn affected_columns(&self, p: usize) -> Result<Vec<usize>> {
        let cols: Vec<usize> = match &self.affected {
            Affected::EveryThird => (1..=p / 3).map(|j| 3 * j - 1).collect(),
            Affected::Columns(c) => c.clone(),
        };
        if let Some(&bad) = cols.iter().find(|&&c| c >= p) {
            return Err(Error::InvalidMechanism(format!("column {bad} out of range for p={p}")));
        }
        if self.kind == MechanismKind::Mar {
            if let Some(&bad) = cols.iter().find(|&&c| c < 2) {
                return Err(Error::InvalidMechanism(format!(
                    "MAR column {bad} has no anchor column two positions to its left"
                )));
            }
        }
        Ok(cols)
    }
}

/// Corrupts complete data with the given mechanism.
///
/// Under MCAR the response is masked with the same probability; MAR and
/// MNAR only touch the covariates.
pub fn apply_missing(
    x: &DMatrix<f64>,
    y: &[f64],
    mech: &MissingMechanism,
    seed: u64,
) -> Result<(IncompleteMatrix, IncompleteVector)> {
    mech.validate()?;
    let (n, p) = x.shape();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!("X has {n} rows, y has {}", y.len())));
    }
    let affected = mech.affected_columns(p)?;
    let mut mask = DMatrix::from_element(n, p, true);
    let mut y_mask = vec![true; n];
    let mut rng = seeded_rng(seed);

    match mech.kind {
        MechanismKind::Mcar => {
            for &j in &affected {
                for i in 0..n {
                    mask[(i, j)] = rng.random::<f64>() < mech.theta;
                }
            }
            for m in y_mask.iter_mut() {
                *m = rng.random::<f64>() < mech.theta;
            }
        }
        MechanismKind::Mar | MechanismKind::Mnar if mech.theta < 1.0 => {
            let cut = standard_normal_quantile(1.0 - mech.theta)?;
            for &j in &affected {
                let anchor = if mech.kind == MechanismKind::Mar { j - 2 } else { j };
                for i in 0..n {
                    mask[(i, j)] = !(x[(i, anchor)] < cut);
                }
            }
        }
        _ => {}
    }

    Ok((IncompleteMatrix::new(x, &mask)?, IncompleteVector::new(y, &y_mask)?))
}

/// How to handle pairs that are never jointly observed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ZeroPairPolicy {
    #[default]
    Error,
    /// Replace the zero proportion by `1/n`.
    FallbackOneOverN,
}

/// Empirical joint-observation proportions.
pub fn estimate_probs(x: &IncompleteMatrix, y: &IncompleteVector) -> Result<ObsProbabilities> {
    estimate_probs_with(x, y, ZeroPairPolicy::Error)
}

pub fn estimate_probs_with(
    x: &IncompleteMatrix,
    y: &IncompleteVector,
    policy: ZeroPairPolicy,
) -> Result<ObsProbabilities> {
    let (n, p) = (x.nrows(), x.ncols());
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!("X has {n} rows, y has {}", y.len())));
    }
    let nf = n as f64;
    let resolve = |count: usize, j: usize, k: PairMember| -> Result<f64> {
        match (count, policy) {
            (0, ZeroPairPolicy::Error) => Err(Error::ZeroPairProbability { j, k }),
            (0, ZeroPairPolicy::FallbackOneOverN) => Ok(1.0 / nf),
            (c, _) => Ok(c as f64 / nf),
        }
    };
    let joint = |a: &[bool], b: &[bool]| a.iter().zip(b).filter(|(&u, &v)| u && v).count();

    let mut pi_xx = DMatrix::zeros(p, p);
    for j in 0..p {
        let mj = x.mask_column(j);
        for k in 0..=j {
            let count = joint(mj, x.mask_column(k));
            let v = resolve(count, j, PairMember::Covariate(k))?;
            pi_xx[(j, k)] = v;
            pi_xx[(k, j)] = v;
        }
    }
    let pi_xy = (0..p)
        .map(|j| resolve(joint(x.mask_column(j), y.mask()), j, PairMember::Response))
        .collect::<Result<Vec<_>>>()?;
    let y_count = y.observed_count();
    let pi_y = if y_count == 0 {
        match policy {
            ZeroPairPolicy::Error => {
                return Err(Error::InvalidInput("response is never observed".into()))
            }
            ZeroPairPolicy::FallbackOneOverN => 1.0 / nf,
        }
    } else {
        y_count as f64 / nf
    };
    ObsProbabilities::new(SymMatrix::new(pi_xx)?, pi_xy, pi_y, ProbSource::Estimated)
}

/// Inverse of the standard normal CDF.
pub fn standard_normal_quantile(q: f64) -> Result<f64> {
    use statrs::distribution::{ContinuousCDF, Normal};
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::DomainError(format!("quantile level must lie in (0, 1), got {q}")));
    }
    let normal = Normal::standard();
    Ok(normal.inverse_cdf(q))
}
