use dps_qkd::rates::{tolerable_ber, tolerable_ber_with_efficiency, Protocol};

fn main() {
    for p in [Protocol::Bb84, Protocol::DpsIndividual, Protocol::DpsUnconditional] {
        println!(
            "{:<4} tolerable BER {:.4}  (f = 1.16: {:.4})",
            p.label(),
            tolerable_ber(p),
            tolerable_ber_with_efficiency(p, 1.16)
        );
    }
}
