//! Random scan of the phase-error bound for several block lengths, including
//! n = 2 where the bound does not hold.

use dps_qkd::search::{evaluate, sample_random_attacks, RATIO_FLOOR};

fn main() {
    let samples = 20_000;
    println!(" n  min slack        max ratio");
    for n in 2..=6 {
        let (mut min_slack, mut max_ratio) = (f64::INFINITY, 0.0f64);
        for e in sample_random_attacks(n, 1, samples) {
            if let Some(ev) = evaluate(&e, RATIO_FLOOR) {
                min_slack = min_slack.min(ev.slack);
                max_ratio = max_ratio.max(ev.ratio);
            }
        }
        let tag = if min_slack < 0.0 { "  <- violated" } else { "" };
        println!("{n:>2}  {min_slack:+.6e}  {max_ratio:.4}{tag}");
    }
}
