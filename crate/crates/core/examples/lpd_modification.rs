//! Linear shrinkage toward `mu I` under each norm.

use lpd_lasso::linalg::{eig_sym, NormKind, SymMatrix};
use lpd_lasso::lpd::{lpd_modify, LpdConfig};

fn main() -> lpd_lasso::Result<()> {
    let a = SymMatrix::from_rows(&[
        &[1.0, 0.9, 0.9, 0.0],
        &[0.9, 1.0, -0.9, 0.3],
        &[0.9, -0.9, 1.0, 0.2],
        &[0.0, 0.3, 0.2, 1.0],
    ])?;
    println!("input lambda_min = {:.4}", eig_sym(&a, false).lambda_min);
    println!("{:<16} {:>8} {:>8} {:>10} {:>10}  note", "norm", "alpha", "mu", "lmin(Phi)", "distance");
    for norm in NormKind::ALL {
        let sol = lpd_modify(&a, &LpdConfig::new(0.01, norm))?;
        println!(
            "{:<16} {:>8.4} {:>8.4} {:>10.4} {:>10.4}  {}",
            format!("{norm:?}"),
            sol.alpha,
            sol.mu,
            eig_sym(&sol.sigma_lpd, false).lambda_min,
            sol.achieved_distance,
            sol.warning.as_deref().unwrap_or("")
        );
    }
    Ok(())
}
