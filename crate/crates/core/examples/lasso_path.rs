//! Warm-started lasso path on corrected moments.

use lpd_lasso::bench::{generate, SimDesign};
use lpd_lasso::lasso::{lambda_max, solve_path, SolverOptions};
use lpd_lasso::lpd::LpdConfig;
use lpd_lasso::missing::{apply_missing, estimate_probs};
use lpd_lasso::select::{corrected_moments, LambdaGrid};

fn main() -> lpd_lasso::Result<()> {
    let design = SimDesign { p: 100, sparsity: 0.05, ..Default::default() };
    let data = generate(&design, 10)?;
    let (xm, ym) = apply_missing(&data.x, &data.y, &design.mechanism, 11)?;
    let m = corrected_moments(&xm, &ym, &estimate_probs(&xm, &ym)?, &LpdConfig::default())?;

    let grid = LambdaGrid::log_spaced(lambda_max(&m.ipw.rho), 12)?;
    let path = solve_path(&m.lpd.sigma_lpd, &m.ipw.rho, &grid.values, &SolverOptions::default())?;
    println!("{:>10} {:>6} {:>7} {:>10}", "lambda", "nnz", "sweeps", "kkt");
    for fit in &path {
        println!("{:>10.4} {:>6} {:>7} {:>10.2e}", fit.lambda, fit.nonzeros(), fit.iterations, fit.max_kkt_violation);
    }
    println!("true support: {:?}", data.support());
    Ok(())
}
