//! Lasso regression for incompletely observed covariates and responses.
//!
//! The pipeline corrects the sample Gram matrix and cross-moment vector for
//! missingness by inverse probability weighting ([`ipw`]), restores positive
//! definiteness with a closed-form linear shrinkage toward a scaled identity
//! ([`lpd`]), and solves the resulting strictly convex lasso problem by
//! coordinate descent ([`lasso`]). Tuning uses a cross-validation criterion
//! computed from the corrected moments of each held-out fold ([`select`]).
//! [`bench`] reproduces simulation studies and [`cli`] drives everything
//! from the command line.
//!
//! ```
//! use lpd_lasso::prelude::*;
//!
//! let a = SymMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]).unwrap();
//! let sol = lpd_modify(&a, &LpdConfig::new(0.1, NormKind::Spectral)).unwrap();
//! assert!((sol.alpha - 0.45).abs() < 1e-12);
//! ```

// NaN must fail the positivity checks, hence `!(x > 0.0)` rather than `x <= 0.0`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cli;
pub mod error;
pub mod ipw;
pub mod lasso;
pub mod linalg;
pub mod lpd;
pub mod missing;
pub mod select;

mod summation;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use error::{Error, Result};

/// Every stochastic routine draws from ChaCha8 seeded through this function.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Deterministic child seed for the `index`-th independent stream.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub mod prelude {
    pub use crate::bench::{generate, metrics, run_benchmark, Method, MetricsRow, SimDesign};
    pub use crate::error::{Error, Result};
    pub use crate::ipw::{ipw_centered2, ipw_centered3, ipw_mean, ipw_moments, IpwEstimate, IpwVariant};
    pub use crate::lasso::{lambda_max, naive_lasso, solve, LassoFit, QuadLassoProblem, SolverOptions};
    pub use crate::linalg::{eig_sym, norm, EigenInfo, NormKind, SymMatrix};
    pub use crate::lpd::{lpd_modify, optimal_mu, LpdConfig, LpdSolution, MuKind};
    pub use crate::missing::{
        apply_missing, estimate_probs, IncompleteMatrix, IncompleteVector, MissingMechanism,
        ObsProbabilities,
    };
    pub use crate::select::{build_grid, corrected_cv, fit_tuned, one_se_rule, CvResult, LambdaGrid, TuneOptions, TunedFit};
}
