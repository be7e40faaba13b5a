//! Closed-form per-slot error probabilities and the phase-error bound.
//!
//! For an attack component `E = (a_ij)` on an n-pulse block and a conclusive
//! slot `l ∈ 2..=n`:
//!
//! ```text
//! p_b,l = 1/(4n) [ |a_{l−1,l−1} − a_{l,l}|² + |a_{l−1,l} − a_{l,l−1}|²
//!                  + Σ_{m∉{l−1,l}} |a_{l−1,m}|² + Σ_{m∉{l−1,l}} |a_{l,m}|² ]
//! p_p,l = 1/(2n) [ Σ_{m<l} |a_{l,m}|² + Σ_{m≥l} |a_{l−1,m}|² ]
//! ```
//!
//! Both are joint probabilities (slot outcome and error), so they scale with
//! `|c|²` under `E → cE`. Summed over slots they obey
//! `Σ p_p,l ≤ (3+√5) Σ p_b,l` for every `E` once `n ≥ 3`.

use serde::Serialize;

use crate::attack::AttackMatrix;
use crate::error::{domain, Error, Result};
use crate::state;

/// `3 + √5`, the factor relating total phase error to total bit error.
pub const BOUND_FACTOR: f64 = 5.236_067_977_499_79;

/// `(3 + √5)/2 = φ²`, the constant of the two-complex-number inequality.
pub const LEMMA_FACTOR: f64 = BOUND_FACTOR / 2.0;

/// Negative round-off accepted (and clamped to zero) on a probability.
pub const CLAMP_TOL: f64 = 1e-14;

fn check_conclusive(e: &AttackMatrix, l: usize) -> Result<usize> {
    let n = e.n();
    if !(2..=n).contains(&l) {
        return Err(domain(format!("conclusive slot {l} outside 2..={n}")));
    }
    Ok(n)
}

/// Clamps `[−CLAMP_TOL, 0)` to zero; anything more negative is a bug.
pub fn clamp_probability(x: f64) -> Result<f64> {
    if x >= 0.0 {
        Ok(x)
    } else if x >= -CLAMP_TOL {
        Ok(0.0)
    } else {
        Err(Error::Consistency(format!("negative probability {x:e}")))
    }
}

pub fn closed_form_bit_error(e: &AttackMatrix, l: usize) -> Result<f64> {
    let n = check_conclusive(e, l)?;
    let (p, q) = (l - 1, l);
    let mut acc = (e.get(p, p) - e.get(q, q)).norm_sqr() + (e.get(p, q) - e.get(q, p)).norm_sqr();
    for m in (1..=n).filter(|&m| m != p && m != q) {
        acc += e.get(p, m).norm_sqr() + e.get(q, m).norm_sqr();
    }
    clamp_probability(acc / (4.0 * n as f64))
}

pub fn closed_form_phase_error(e: &AttackMatrix, l: usize) -> Result<f64> {
    let n = check_conclusive(e, l)?;
    let low: f64 = (1..l).map(|m| e.get(l, m).norm_sqr()).sum();
    let high: f64 = (l..=n).map(|m| e.get(l - 1, m).norm_sqr()).sum();
    clamp_probability((low + high) / (2.0 * n as f64))
}

/// `(Σ_l p_b,l, Σ_l p_p,l)` from the closed forms.
pub fn closed_form_totals(e: &AttackMatrix) -> (f64, f64) {
    (2..=e.n()).fold((0.0, 0.0), |(b, p), l| {
        (
            b + closed_form_bit_error(e, l).unwrap_or(0.0),
            p + closed_form_phase_error(e, l).unwrap_or(0.0),
        )
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlotErrors {
    pub slot: usize,
    /// Joint probability that the filter reports this slot.
    pub occupancy: f64,
    pub bit: f64,
    pub phase: f64,
}

/// Per-slot joint error probabilities for one attack component.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlotErrorTable {
    pub n: usize,
    /// Slots `2..=n` in order.
    pub slots: Vec<SlotErrors>,
    /// Probability of the `F_1` outcome.
    pub inconclusive: f64,
    pub total_bit: f64,
    pub total_phase: f64,
}

impl SlotErrorTable {
    fn from_slots(n: usize, slots: Vec<SlotErrors>, inconclusive: f64) -> Self {
        let total_bit = slots.iter().map(|s| s.bit).sum();
        let total_phase = slots.iter().map(|s| s.phase).sum();
        Self {
            n,
            slots,
            inconclusive,
            total_bit,
            total_phase,
        }
    }

    pub fn slot(&self, l: usize) -> Option<&SlotErrors> {
        l.checked_sub(2).and_then(|i| self.slots.get(i))
    }

    pub fn conclusive(&self) -> f64 {
        self.slots.iter().map(|s| s.occupancy).sum()
    }

    /// Largest elementwise difference in bit/phase entries.
    pub fn max_discrepancy(&self, other: &SlotErrorTable) -> f64 {
        self.slots
            .iter()
            .zip(&other.slots)
            .flat_map(|(a, b)| [(a.bit - b.bit).abs(), (a.phase - b.phase).abs()])
            .fold(if self.n == other.n { 0.0 } else { f64::INFINITY }, f64::max)
    }
}

/// Closed-form table; occupancies and the inconclusive probability come from
/// the state vector.
pub fn error_table(e: &AttackMatrix) -> Result<SlotErrorTable> {
    let n = e.n();
    let occupancy = state::filter_probabilities(e)?;
    let slots = (2..=n)
        .map(|l| {
            Ok(SlotErrors {
                slot: l,
                occupancy: occupancy[l - 1],
                bit: closed_form_bit_error(e, l)?,
                phase: closed_form_phase_error(e, l)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SlotErrorTable::from_slots(n, slots, occupancy[0]))
}

/// The same table computed entirely from Pauli expectations on the full
/// entangled state vector.
pub fn oracle_error_table(e: &AttackMatrix) -> Result<SlotErrorTable> {
    let n = e.n();
    let occupancy = state::filter_probabilities(e)?;
    let slots = (2..=n)
        .map(|l| {
            let (bit, phase) = state::pauli_error_expectations(e, l)?;
            Ok(SlotErrors {
                slot: l,
                occupancy: occupancy[l - 1],
                bit: clamp_probability(bit)?,
                phase: clamp_probability(phase)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SlotErrorTable::from_slots(n, slots, occupancy[0]))
}

/// `((3+√5)/2)(|a − b|² + |a|²) − (|a|² + |b|²)`, never below zero beyond
/// round-off.
pub fn lemma_gap(a: num_complex::Complex64, b: num_complex::Complex64) -> f64 {
    LEMMA_FACTOR * ((a - b).norm_sqr() + a.norm_sqr()) - (a.norm_sqr() + b.norm_sqr())
}

/// `(3+√5) Σ p_b,l − Σ p_p,l`. Nonnegative for every attack when `n ≥ 3`.
pub fn bound_slack(e: &AttackMatrix) -> f64 {
    let (bit, phase) = closed_form_totals(e);
    BOUND_FACTOR * bit - phase
}
