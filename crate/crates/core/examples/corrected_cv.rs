//! Corrected cross-validation curve with the minimum and 1-se choices.

use lpd_lasso::bench::{generate, SimDesign};
use lpd_lasso::lpd::LpdConfig;
use lpd_lasso::missing::apply_missing;
use lpd_lasso::select::{build_grid, corrected_cv, ProbsPolicy};

fn main() -> lpd_lasso::Result<()> {
    let design = SimDesign { p: 60, ..Default::default() };
    let data = generate(&design, 21)?;
    let (xm, ym) = apply_missing(&data.x, &data.y, &design.mechanism, 22)?;
    let grid = build_grid(&xm, &ym, 40, 5)?;
    let cv = corrected_cv(&xm, &ym, &ProbsPolicy::FoldLocal, &LpdConfig::default(), &grid, 5, 5)?;

    for (l, (m, s)) in cv.lambdas.iter().zip(cv.mean_error.iter().zip(&cv.se_error)).step_by(4) {
        println!("{l:>10.5} {m:>10.4} +- {s:.4}");
    }
    println!("lambda_opt = {:.5}, lambda_1se = {:.5}", cv.lambda_opt, cv.lambda_1se);
    cv.write_curve(std::io::stdout().lock())?;
    Ok(())
}
