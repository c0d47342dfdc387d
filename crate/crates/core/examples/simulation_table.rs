//! Small simulation study: LPD, naive and complete-data lasso under MCAR.
//!
//! cargo run --release --example simulation_table -- [replicates] [theta] [p]

use lpd_lasso::bench::{run_benchmark, BenchOptions, Method, SimDesign};
use lpd_lasso::linalg::NormKind;
use lpd_lasso::missing::MissingMechanism;

fn main() -> lpd_lasso::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let replicates = args.first().and_then(|s| s.parse().ok()).unwrap_or(10);
    let theta = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0.9);
    let p = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(200);

    let design = SimDesign {
        p,
        replicates,
        mechanism: MissingMechanism::mcar(theta),
        seed: 2024,
        ..Default::default()
    };
    let opts = BenchOptions {
        methods: vec![
            Method::lpd(NormKind::LInf, 1.0),
            Method::lpd(NormKind::Spectral, 1.0),
            Method::NaiveLasso,
            Method::TrueLasso,
        ],
        ..Default::default()
    };
    let start = std::time::Instant::now();
    let report = run_benchmark(&design, &opts)?;

    println!("n={} p={} s={} theta={} replicates={}", design.n, design.p, design.sparsity, theta, replicates);
    println!("{:<14} {:>16} {:>16} {:>12} {:>12} {:>8}", "method", "PE", "MSE", "TP", "FP", "pAUC");
    for s in &report.summary {
        println!(
            "{:<14} {:>7.3} ({:>6.3}) {:>7.3} ({:>6.3}) {:>5.2} ({:>4.2}) {:>5.2} ({:>4.2}) {:>8.3}",
            s.method, s.pe.mean, s.pe.sd, s.mse.mean, s.mse.sd, s.tp.mean, s.tp.sd, s.fp.mean, s.fp.sd, s.pauc.mean
        );
        for e in &s.errors {
            println!("  {e}");
        }
    }
    println!("elapsed {:.1}s", start.elapsed().as_secs_f64());
    Ok(())
}
