//! Without an eavesdropper every conclusive slot leaves Alice and Bob sharing
//! the Bell state |Φ+⟩.

use dps_qkd::state::{bell_fidelity, conditional_pair_state, filter_probabilities, PairOutcome};
use dps_qkd::AttackMatrix;

fn main() -> dps_qkd::Result<()> {
    println!(" n  P(conclusive)  (n-1)/n   min fidelity");
    for n in 2..=10 {
        let e = AttackMatrix::identity(n);
        let probs = filter_probabilities(&e)?;
        let conclusive: f64 = probs[1..].iter().sum();

        let mut worst = f64::INFINITY;
        for l in 2..=n {
            if let PairOutcome::Occupied { density, .. } = conditional_pair_state(&e, l)? {
                worst = worst.min(bell_fidelity(&density));
            }
        }
        let expected = (n - 1) as f64 / n as f64;
        println!("{n:>2}  {conclusive:>13.10}  {expected:.10}  {worst:.12}");
    }
    Ok(())
}
