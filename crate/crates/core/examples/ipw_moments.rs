//! Inverse probability weighting removes the shrinkage that missing cells
//! cause in the Gram matrix, at the cost of positive definiteness.

use lpd_lasso::bench::{generate, SimDesign};
use lpd_lasso::ipw::ipw_moments;
use lpd_lasso::linalg::eig_sym;
use lpd_lasso::missing::{apply_missing, estimate_probs, IncompleteMatrix, IncompleteVector, MissingMechanism, ObsProbabilities};

fn main() -> lpd_lasso::Result<()> {
    let design = SimDesign { n: 60, p: 90, mechanism: MissingMechanism::mcar(0.6), ..Default::default() };
    let data = generate(&design, 3)?;
    let (xm, ym) = apply_missing(&data.x, &data.y, &design.mechanism, 4)?;

    let complete = ipw_moments(
        &IncompleteMatrix::complete(&data.x)?,
        &IncompleteVector::complete(&data.y)?,
        &ObsProbabilities::complete(design.p),
    )?;
    let est = ipw_moments(&xm, &ym, &estimate_probs(&xm, &ym)?)?;

    let j = 2;
    println!("Sigma[{j},{j}]: complete {:.3}, IPW {:.3}", complete.sigma[(j, j)], est.sigma[(j, j)]);
    println!("lambda_min complete-data S: {:.4}", eig_sym(&complete.sigma, false).lambda_min);
    println!("lambda_min IPW estimate:    {:.4}", eig_sym(&est.sigma, false).lambda_min);
    Ok(())
}
