//! Nelder-Mead search for the attack with the largest phase-to-bit error
//! ratio. The best matrix is written in the attack file format.

use dps_qkd::search::{optimize_attack, Objective, SearchConfig};
use dps_qkd::BOUND_FACTOR;

fn main() -> dps_qkd::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let mut config = SearchConfig::new(n, Objective::MaxRatio);
    config.samples = 5_000;
    config.restarts = 8;
    config.seed = 11;

    let report = optimize_attack(&config)?;
    println!("n = {n}");
    println!("best ratio e_p/e_b = {:.6} (bound {BOUND_FACTOR:.6})", report.best_ratio);
    println!("best slack         = {:+.3e}", report.best_slack);
    println!("counterexample     = {}", report.counterexample);
    for (i, r) in report.restart_traces.iter().enumerate() {
        println!(
            "restart {i}: {:.5} -> {:.5} in {} evaluations",
            r.start_value, r.final_value, r.evaluations
        );
    }

    let path = std::env::temp_dir().join(format!("dpsqkd_best_attack_n{n}.json"));
    report.best_matrix.write_file(&path)?;
    println!("best matrix written to {}", path.display());
    Ok(())
}
