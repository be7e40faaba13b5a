//! Key-rate formulas and the channel/detector model behind them.
//!
//! All three protocols are assumed to use a single-photon source and two
//! detectors, with error correction at the Shannon limit unless an
//! inefficiency factor `f ≥ 1` is supplied.
//!
//! | protocol | click rate per pulse | rate factor |
//! |---|---|---|
//! | BB84 | `(η + 2d)/2` | `1 − 2H(e_b)` |
//! | DPS, unconditional | `η(n−1)/n² + 2d(n−1)/n` | `1 − H(e_b) − H((3+√5)e_b)` |
//! | DPS, individual attacks | same as DPS | `−log₂[1 − e_b² − (1−6e_b)²/2] − H(e_b)` |
//!
//! The bit error rates follow the same click model:
//! `e_b = (eη + d)/(η + 2d)` for BB84 and
//! `e_b = [eη(n−1)/n² + d(n−1)/n] / [η(n−1)/n² + 2d(n−1)/n]` for DPS.

use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::error_probs::BOUND_FACTOR;
use crate::table::{format_float, write_row};

/// Dark-count probability per detector per time slot.
pub const DEFAULT_DARK_COUNT: f64 = 2.5e-9;
/// Baseline (optical misalignment) error rate.
pub const DEFAULT_BASELINE_ERROR: f64 = 0.023;

/// Bisection bracket and tolerance for tolerable bit error rates.
pub const THRESHOLD_BRACKET: (f64, f64) = (0.0, 0.25);
pub const THRESHOLD_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Protocol {
    #[serde(rename = "BB84")]
    Bb84,
    /// Unconditionally secure single-photon DPS.
    #[serde(rename = "DPS")]
    DpsUnconditional,
    /// DPS secure against general individual-photon attacks.
    #[serde(rename = "IND")]
    DpsIndividual,
}

impl Protocol {
    pub const ALL: [Protocol; 3] = [Protocol::Bb84, Protocol::DpsUnconditional, Protocol::DpsIndividual];

    pub fn label(&self) -> &'static str {
        match self {
            Protocol::Bb84 => "BB84",
            Protocol::DpsUnconditional => "DPS",
            Protocol::DpsIndividual => "IND",
        }
    }

    pub fn is_dps(&self) -> bool {
        !matches!(self, Protocol::Bb84)
    }
}

impl std::fmt::Display for Protocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bb84" => Ok(Protocol::Bb84),
            "dps" | "dps-unconditional" => Ok(Protocol::DpsUnconditional),
            "ind" | "dps-individual" => Ok(Protocol::DpsIndividual),
            other => Err(Error::Config(format!("unknown protocol `{other}`"))),
        }
    }
}

/// Channel and detector parameters. `n` is ignored by BB84.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChannelParams {
    /// Total efficiency: channel, detectors and optics.
    pub eta: f64,
    /// Dark-count probability per detector per time slot.
    pub dark: f64,
    pub baseline_error: f64,
    pub n: usize,
}

impl ChannelParams {
    pub fn new(eta: f64, dark: f64, baseline_error: f64, n: usize) -> Result<Self> {
        let p = Self {
            eta,
            dark,
            baseline_error,
            n,
        };
        p.validate()?;
        Ok(p)
    }

    /// Default detector (`d = 2.5e-9`, `e = 0.023`) at efficiency `eta`.
    pub fn with_defaults(eta: f64, n: usize) -> Result<Self> {
        Self::new(eta, DEFAULT_DARK_COUNT, DEFAULT_BASELINE_ERROR, n)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(domain(format!("efficiency {} outside [0, 1]", self.eta)));
        }
        if !(0.0..1.0).contains(&self.dark) {
            return Err(domain(format!("dark-count probability {} outside [0, 1)", self.dark)));
        }
        if !(0.0..0.5).contains(&self.baseline_error) {
            return Err(domain(format!("baseline error {} outside [0, 0.5)", self.baseline_error)));
        }
        if self.n < 2 {
            return Err(domain(format!("block length must be at least 2, got {}", self.n)));
        }
        Ok(())
    }

    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        Self::new(eta, self.dark, self.baseline_error, self.n)
    }

    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(self.eta, self.dark, self.baseline_error, n)
    }
}

/// Binary Shannon entropy with `0·log 0 = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(domain(format!("entropy argument {x} outside [0, 1]")));
    }
    Ok(entropy_unchecked(x))
}

fn entropy_unchecked(x: f64) -> f64 {
    let term = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.log2() };
    term(x) + term(1.0 - x)
}

/// `(p_BB84, p_DPS)`; the individual-attack DPS click rate equals `p_DPS`.
pub fn click_rates(params: &ChannelParams) -> (f64, f64) {
    let (eta, d, n) = (params.eta, params.dark, params.n as f64);
    let bb84 = (eta + 2.0 * d) / 2.0;
    let dps = eta * (n - 1.0) / (n * n) + 2.0 * d * (n - 1.0) / n;
    (bb84, dps)
}

/// `(e_b^BB84, e_b^DPS)`.
pub fn model_bit_error(params: &ChannelParams) -> Result<(f64, f64)> {
    let (eta, d, e, n) = (params.eta, params.dark, params.baseline_error, params.n as f64);
    if eta + 2.0 * d <= 0.0 {
        return Err(domain("bit error rate undefined with zero efficiency and no dark counts"));
    }
    let bb84 = (e * eta + d) / (eta + 2.0 * d);
    let signal = eta * (n - 1.0) / (n * n);
    let dark = d * (n - 1.0) / n;
    let dps = (e * signal + dark) / (signal + 2.0 * dark);
    Ok((bb84, dps))
}

/// Secret fraction per click as a function of the bit error rate.
///
/// `ec_efficiency` multiplies the error-correction term `H(e_b)`. For the
/// unconditional DPS rate the phase-error estimate `(3+√5)e_b` is capped at
/// 1/2, where privacy amplification already consumes the whole key. Returns
/// `Err` with a diagnostic when the individual-attack log argument leaves
/// `(0, 1]`.
pub fn rate_factor(protocol: Protocol, e_b: f64, ec_efficiency: f64) -> std::result::Result<f64, String> {
    let h = entropy_unchecked(e_b);
    match protocol {
        Protocol::Bb84 => Ok(1.0 - ec_efficiency * h - h),
        Protocol::DpsUnconditional => {
            let phase = (BOUND_FACTOR * e_b).min(0.5);
            Ok(1.0 - ec_efficiency * h - entropy_unchecked(phase))
        }
        Protocol::DpsIndividual => {
            let arg = 1.0 - e_b * e_b - (1.0 - 6.0 * e_b).powi(2) / 2.0;
            if arg <= 0.0 || arg > 1.0 {
                return Err(format!("log argument {arg} outside (0, 1] at e_b = {e_b}"));
            }
            Ok(-arg.log2() - ec_efficiency * h)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProtocolRates {
    pub protocol: Protocol,
    pub n: usize,
    pub p_click: f64,
    pub e_b: f64,
    /// Unclamped formula value; 0 when the formula is undefined (see `diagnostic`).
    pub rate_raw: f64,
    /// `max(rate_raw, 0)`, and 0 once `e_b` reaches the tolerable bit error rate.
    pub rate: f64,
    /// Key per emitted photon.
    pub ee: f64,
    pub diagnostic: Option<String>,
}

/// Photons emitted per pulse: one per n-pulse block for DPS, one per pulse for BB84.
pub fn photons_per_pulse(protocol: Protocol, n: usize) -> f64 {
    if protocol.is_dps() {
        1.0 / n as f64
    } else {
        1.0
    }
}

pub fn key_rate(protocol: Protocol, params: &ChannelParams) -> Result<ProtocolRates> {
    key_rate_with_efficiency(protocol, params, 1.0)
}

pub fn key_rate_with_efficiency(
    protocol: Protocol,
    params: &ChannelParams,
    ec_efficiency: f64,
) -> Result<ProtocolRates> {
    params.validate()?;
    if !(ec_efficiency >= 1.0 && ec_efficiency.is_finite()) {
        return Err(domain(format!("error-correction inefficiency {ec_efficiency} must be ≥ 1")));
    }
    let (p_bb84, p_dps) = click_rates(params);
    let (e_bb84, e_dps) = model_bit_error(params)?;
    let (p_click, e_b) = if protocol.is_dps() { (p_dps, e_dps) } else { (p_bb84, e_bb84) };
    let (rate_raw, diagnostic) = match rate_factor(protocol, e_b, ec_efficiency) {
        Ok(f) => (p_click * f, None),
        Err(msg) => (0.0, Some(msg)),
    };
    // Past the tolerable bit error rate the protocol aborts, even where the
    // individual-attack formula turns positive again near its log singularity.
    let rate = if e_b < tolerable_ber_with_efficiency(protocol, ec_efficiency) {
        rate_raw.max(0.0)
    } else {
        0.0
    };
    Ok(ProtocolRates {
        protocol,
        n: if protocol.is_dps() { params.n } else { 1 },
        p_click,
        e_b,
        rate_raw,
        rate,
        ee: rate / photons_per_pulse(protocol, params.n),
        diagnostic,
    })
}

/// Largest bit error rate with a nonnegative rate factor (Shannon-limit error
/// correction).
pub fn tolerable_ber(protocol: Protocol) -> f64 {
    tolerable_ber_with_efficiency(protocol, 1.0)
}

pub fn tolerable_ber_with_efficiency(protocol: Protocol, ec_efficiency: f64) -> f64 {
    let factor = |e: f64| rate_factor(protocol, e, ec_efficiency).unwrap_or(f64::NEG_INFINITY);
    let (mut lo, mut hi) = THRESHOLD_BRACKET;
    while hi - lo > THRESHOLD_TOL {
        let mid = 0.5 * (lo + hi);
        if factor(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// One protocol curve of a loss sweep. `n` is ignored for BB84.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Curve {
    pub protocol: Protocol,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateRow {
    pub loss_db: f64,
    pub eta: f64,
    #[serde(flatten)]
    pub rates: ProtocolRates,
}

/// `η = 10^(−loss/10)`.
pub fn loss_to_eta(loss_db: f64) -> f64 {
    10f64.powf(-loss_db / 10.0)
}

/// Evaluates every curve on the loss grid. Rows are ordered by protocol, then
/// block length, then ascending loss.
pub fn sweep_loss(curves: &[Curve], losses_db: &[f64], template: &ChannelParams, ec_efficiency: f64) -> Result<Vec<RateRow>> {
    if losses_db.is_empty() {
        return Err(domain("loss grid is empty"));
    }
    if let Some(bad) = losses_db.iter().find(|l| !l.is_finite() || **l < 0.0) {
        return Err(domain(format!("loss {bad} dB is not a finite nonnegative value")));
    }
    let mut grid = losses_db.to_vec();
    grid.sort_by(f64::total_cmp);
    let mut curves: Vec<Curve> = curves
        .iter()
        .map(|c| Curve {
            protocol: c.protocol,
            n: if c.protocol.is_dps() { c.n } else { 1 },
        })
        .collect();
    curves.sort();
    curves.dedup();

    let mut rows = Vec::with_capacity(curves.len() * grid.len());
    for curve in curves {
        let base = if curve.protocol.is_dps() { template.with_n(curve.n)? } else { *template };
        for &loss in &grid {
            let eta = loss_to_eta(loss);
            let rates = key_rate_with_efficiency(curve.protocol, &base.with_eta(eta)?, ec_efficiency)?;
            rows.push(RateRow { loss_db: loss, eta, rates });
        }
    }
    Ok(rows)
}

/// Loss (dB) at which the clamped rate drops to zero, by bisection on
/// `[0, max_loss]`. `None` if the rate is already zero at 0 dB or still
/// positive at `max_loss`.
pub fn cutoff_loss(curve: Curve, template: &ChannelParams, ec_efficiency: f64, max_loss: f64) -> Result<Option<f64>> {
    let base = if curve.protocol.is_dps() { template.with_n(curve.n)? } else { *template };
    let rate_at = |loss: f64| -> Result<f64> {
        Ok(key_rate_with_efficiency(curve.protocol, &base.with_eta(loss_to_eta(loss))?, ec_efficiency)?.rate)
    };
    if rate_at(0.0)? <= 0.0 || rate_at(max_loss)? > 0.0 {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0.0, max_loss);
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if rate_at(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

pub const RATE_CSV_HEADER: [&str; 9] = ["protocol", "n", "loss_db", "eta", "p_click", "e_b", "rate_raw", "rate", "ee"];

/// Writes the sweep as CSV with the [`RATE_CSV_HEADER`] columns.
pub fn write_rate_csv<W: Write>(rows: &[RateRow], w: &mut W) -> std::io::Result<()> {
    write_row(w, &RATE_CSV_HEADER)?;
    for row in rows {
        let r = &row.rates;
        write_row(
            w,
            &[
                r.protocol.label().to_string(),
                r.n.to_string(),
                format_float(row.loss_db),
                format_float(row.eta),
                format_float(r.p_click),
                format_float(r.e_b),
                format_float(r.rate_raw),
                format_float(r.rate),
                format_float(r.ee),
            ],
        )?;
    }
    Ok(())
}
