//! Key rate per pulse and per photon against channel loss, with the loss at
//! which each curve reaches zero.

use dps_qkd::rates::{cutoff_loss, sweep_loss, write_rate_csv, ChannelParams, Curve, Protocol};

fn main() -> dps_qkd::Result<()> {
    let template = ChannelParams::with_defaults(1.0, 3)?;
    let mut curves = vec![Curve { protocol: Protocol::Bb84, n: 1 }];
    for n in [3, 10] {
        curves.push(Curve { protocol: Protocol::DpsUnconditional, n });
        curves.push(Curve { protocol: Protocol::DpsIndividual, n });
    }

    println!("curve      cutoff (dB)");
    for c in &curves {
        let cut = cutoff_loss(*c, &template, 1.0, 150.0)?;
        println!("{:<4} n={:<3} {:.2}", c.protocol, c.n, cut.unwrap_or(f64::NAN));
    }

    let losses: Vec<f64> = (0..=8).map(|i| 10.0 * i as f64).collect();
    let rows = sweep_loss(&curves, &losses, &template, 1.0)?;
    println!();
    write_rate_csv(&rows, &mut std::io::stdout())?;
    Ok(())
}
