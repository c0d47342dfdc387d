//! Spectrum and the four matrix norms of a small indefinite matrix.

use lpd_lasso::linalg::{eig_sym, NormKind, SymMatrix};

fn main() -> lpd_lasso::Result<()> {
    let a = SymMatrix::from_rows(&[&[2.0, -1.0, 0.5], &[-1.0, 1.0, 1.8], &[0.5, 1.8, 1.0]])?;
    let eig = eig_sym(&a, true);
    println!("eigenvalues: {:?}", eig.spectrum.as_deref().unwrap_or_default());
    println!("lambda_min = {:.6}, lambda_max = {:.6}", eig.lambda_min, eig.lambda_max);
    for norm in NormKind::ALL {
        println!("{:<16} {:.6}", format!("{norm:?}"), a.norm(norm));
    }
    Ok(())
}
