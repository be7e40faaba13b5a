//! Scans the two-number inequality along real b = t·a and shows that it is
//! tight at the golden ratio.

use dps_qkd::error_probs::{lemma_gap, LEMMA_FACTOR};
use num_complex::Complex64;

fn main() {
    let a = Complex64::new(1.0, 0.0);
    let steps = 400_000;
    let (t_min, gap_min) = (0..=steps)
        .map(|i| {
            let t = 4.0 * i as f64 / steps as f64;
            (t, lemma_gap(a, Complex64::new(t, 0.0)))
        })
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .unwrap();

    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    println!("constant (3+√5)/2  = {LEMMA_FACTOR:.12}");
    println!("argmin b/a         = {t_min:.6}");
    println!("golden ratio       = {golden:.6}");
    println!("minimum gap        = {gap_min:.3e}");

    for t in [0.0, 1.0, golden, 2.0, 4.0] {
        println!("  gap(1, {t:.4}) = {:.6}", lemma_gap(a, Complex64::new(t, 0.0)));
    }
}
