//! Encodes a key into a single-photon block, sends it through the delay
//! interferometer and reads off which output ports can click.

use dps_qkd::state::{self, ModeBasis};

fn main() -> dps_qkd::Result<()> {
    let n = 4;
    let key = 0b011;

    let phi = state::build_encoded_state(n, key)?;
    println!("n = {n}, key bits = {:0w$b}", key, w = n - 1);
    println!("pulse signs: {:?}", state::encoding_signs(n, key));

    let out = state::apply_mz(&phi)?;
    let basis = ModeBasis::output(n)?;
    println!("\noutput mode   amplitude");
    for i in 0..basis.dim() {
        let a = out.amplitudes()[i];
        if a.norm_sqr() > 1e-15 {
            println!("{:<12}  {:+.4}", format!("{:?}", basis.mode(i).unwrap()), a.re);
        }
    }
    println!("norm after interferometer: {:.12}", out.norm_sqr());

    // A click in slot l (2 ≤ l ≤ n) reveals the parity of neighbouring pulses.
    for l in 2..=n {
        let slot = state::apply_filter(&out, l)?;
        let u = slot.amplitude(state::Mode::U(l)).norm_sqr();
        let v = slot.amplitude(state::Mode::V(l)).norm_sqr();
        let bit = state::key_bit(n, key, l - 2);
        println!("slot {l}: P(U) = {u:.4}, P(V) = {v:.4}, key bit {bit}");
    }
    Ok(())
}
