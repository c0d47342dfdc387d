//! MCAR, MAR and MNAR masks on the same data, and the estimated
//! observation probabilities.

use lpd_lasso::missing::{apply_missing, estimate_probs, MissingMechanism};
use lpd_lasso::seeded_rng;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

fn main() -> lpd_lasso::Result<()> {
    let (n, p) = (500, 9);
    let mut rng = seeded_rng(1);
    let x = DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal));
    let y: Vec<f64> = (0..n).map(|i| x[(i, 0)] + rng.sample::<f64, _>(StandardNormal)).collect();

    for mech in [MissingMechanism::mcar(0.8), MissingMechanism::mar(0.8), MissingMechanism::mnar(0.8)] {
        let (xm, ym) = apply_missing(&x, &y, &mech, 7)?;
        let probs = estimate_probs(&xm, &ym)?;
        let observed: Vec<String> = (0..p).map(|j| format!("{:.2}", probs.pi_xx[(j, j)])).collect();
        println!("{:?}: per-column observed fraction [{}], response {:.2}", mech.kind, observed.join(", "), probs.pi_y);
    }
    Ok(())
}
