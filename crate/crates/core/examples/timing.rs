//! Seconds spent in the LPD step and in one mid-grid lasso solve.
//!
//! cargo run --release --example timing -- [p...]

use lpd_lasso::bench::{time_replicate, SimDesign};
use lpd_lasso::lpd::LpdConfig;

fn main() -> lpd_lasso::Result<()> {
    let ps: Vec<usize> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let ps = if ps.is_empty() { vec![200, 500, 1000] } else { ps };
    println!("{:>6} {:>10} {:>10} {:>10}", "p", "PD (s)", "Lasso (s)", "lambda");
    for p in ps {
        let design = SimDesign { p, seed: 5, ..Default::default() };
        let t = time_replicate(&design, 0, &LpdConfig::default(), 100)?;
        println!("{p:>6} {:>10.4} {:>10.4} {:>10.4}", t.pd_seconds, t.lasso_seconds, t.lambda);
    }
    Ok(())
}
