//! Block-by-block Monte Carlo of the entanglement-based protocol.
//!
//! Each block is attacked by one scheduled Kraus component. The filter outcome
//! is drawn from the exact slot probabilities of that component, and given a
//! conclusive slot `l` the bit-error and phase-error flags are drawn
//! independently with probabilities `p_b,l / q_l` and `p_p,l / q_l`, where
//! `q_l` is the slot occupancy. Only the per-type marginals are modelled;
//! correlations between the two flags are not.
//!
//! Probability mass lost by a non-unitary attack is counted as inconclusive,
//! so `inconclusive + Σ_l detections_l = N` always holds.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::attack::AttackMatrix;
use crate::error::{Error, Result};
use crate::error_probs::{error_table, SlotErrorTable};

/// Largest run for which the raw per-block log may be serialized.
pub const BLOCK_LOG_LIMIT: usize = 10_000_000;
/// Schedule switches kept in the trace of an outcome-feedback run.
pub const SCHEDULE_TRACE_CAP: usize = 10_000;

/// Which matrix attacks each block.
#[derive(Clone, Debug, PartialEq)]
pub enum Schedule {
    Constant(AttackMatrix),
    /// Cycles through the matrices by block index.
    Alternating(Vec<AttackMatrix>),
    /// Starts with the first matrix and moves to the next (cyclically) after
    /// every block that shows a bit error.
    Feedback(Vec<AttackMatrix>),
}

impl Schedule {
    pub fn matrices(&self) -> &[AttackMatrix] {
        match self {
            Schedule::Constant(m) => std::slice::from_ref(m),
            Schedule::Alternating(ms) | Schedule::Feedback(ms) => ms,
        }
    }

    pub fn is_adaptive(&self) -> bool {
        matches!(self, Schedule::Feedback(_))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Schedule::Constant(_) => "constant",
            Schedule::Alternating(_) => "alternating",
            Schedule::Feedback(_) => "feedback",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub schedule: Schedule,
    /// Number of blocks `N`.
    pub blocks: usize,
    /// Fraction of conclusive blocks used as test bits.
    pub test_fraction: f64,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(schedule: Schedule, blocks: usize, seed: u64) -> Self {
        let n = schedule.matrices().first().map_or(0, AttackMatrix::n);
        Self {
            n,
            schedule,
            blocks,
            test_fraction: 0.5,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks == 0 {
            return Err(Error::Config("number of blocks must be at least 1".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::Config(format!(
                "test fraction {} outside (0, 1)",
                self.test_fraction
            )));
        }
        let ms = self.schedule.matrices();
        if ms.is_empty() {
            return Err(Error::Config("attack schedule has no matrices".into()));
        }
        if ms.len() > u16::MAX as usize {
            return Err(Error::Config("attack schedule has too many matrices".into()));
        }
        for m in ms {
            if m.n() != self.n {
                return Err(Error::Config(format!(
                    "scheduled {0}x{0} matrix does not match block length {1}",
                    m.n(),
                    self.n
                )));
            }
            m.require_physical()?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "lowercase")]
pub enum BlockOutcome {
    Inconclusive,
    Conclusive {
        slot: u16,
        bit_error: bool,
        phase_error: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BlockRecord {
    /// Index into the schedule's matrix list.
    pub matrix: u16,
    #[serde(flatten)]
    pub outcome: BlockOutcome,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlotCounts {
    pub slot: usize,
    pub detections: u64,
    pub bit_errors: u64,
    pub phase_errors: u64,
    /// `Σ_k q_l^(k)` over blocks.
    pub expected_detections: f64,
    /// `Σ_k p_b,l^(k)`.
    pub expected_bit: f64,
    /// `Σ_k p_p,l^(k)`.
    pub expected_phase: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ScheduleSwitch {
    pub block: usize,
    pub matrix: u16,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub n: usize,
    pub blocks: usize,
    pub seed: u64,
    pub schedule: &'static str,
    pub inconclusive: u64,
    pub slots: Vec<SlotCounts>,
    /// Closed-form table of each scheduled matrix; per-block conditional
    /// probabilities are `tables[records[k].matrix]`.
    pub tables: Vec<SlotErrorTable>,
    pub records: Vec<BlockRecord>,
    pub schedule_trace: Vec<ScheduleSwitch>,
}

struct Sampler {
    /// Cumulative probabilities of slots 2..=n; anything above the last entry
    /// is inconclusive.
    cumulative: Vec<f64>,
    bit: Vec<f64>,
    phase: Vec<f64>,
}

impl Sampler {
    fn new(table: &SlotErrorTable) -> Self {
        let mut acc = 0.0;
        let mut cumulative = Vec::new();
        let (mut bit, mut phase) = (Vec::new(), Vec::new());
        for s in &table.slots {
            acc += s.occupancy;
            cumulative.push(acc);
            let cond = |p: f64| if s.occupancy > 0.0 { (p / s.occupancy).clamp(0.0, 1.0) } else { 0.0 };
            bit.push(cond(s.bit));
            phase.push(cond(s.phase));
        }
        Self { cumulative, bit, phase }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> BlockOutcome {
        let u: f64 = rng.random();
        let Some(i) = self.cumulative.iter().position(|&c| u < c) else {
            // Keep the stream aligned with conclusive blocks.
            let _: (f64, f64) = (rng.random(), rng.random());
            return BlockOutcome::Inconclusive;
        };
        let bit_error = rng.random::<f64>() < self.bit[i];
        let phase_error = rng.random::<f64>() < self.phase[i];
        BlockOutcome::Conclusive {
            slot: (i + 2) as u16,
            bit_error,
            phase_error,
        }
    }
}

/// Runs the simulation. Deterministic given the configuration.
pub fn simulate(config: &SimConfig) -> Result<TrialRecord> {
    config.validate()?;
    let n = config.n;
    let matrices = config.schedule.matrices();
    let tables = matrices.iter().map(error_table).collect::<Result<Vec<_>>>()?;
    let samplers: Vec<Sampler> = tables.iter().map(Sampler::new).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut slots: Vec<SlotCounts> = (2..=n)
        .map(|slot| SlotCounts {
            slot,
            detections: 0,
            bit_errors: 0,
            phase_errors: 0,
            expected_detections: 0.0,
            expected_bit: 0.0,
            expected_phase: 0.0,
        })
        .collect();
    let mut uses = vec![0u64; matrices.len()];
    let mut inconclusive = 0;
    let mut records = Vec::with_capacity(config.blocks);
    let mut schedule_trace = Vec::new();
    let mut current = 0usize;
    if config.schedule.is_adaptive() {
        schedule_trace.push(ScheduleSwitch { block: 0, matrix: 0 });
    }

    for block in 0..config.blocks {
        let m = match &config.schedule {
            Schedule::Constant(_) => 0,
            Schedule::Alternating(ms) => block % ms.len(),
            Schedule::Feedback(_) => current,
        };
        uses[m] += 1;
        let outcome = samplers[m].draw(&mut rng);
        match outcome {
            BlockOutcome::Inconclusive => inconclusive += 1,
            BlockOutcome::Conclusive { slot, bit_error, phase_error } => {
                let counts = &mut slots[slot as usize - 2];
                counts.detections += 1;
                counts.bit_errors += u64::from(bit_error);
                counts.phase_errors += u64::from(phase_error);
                if bit_error {
                    if let Schedule::Feedback(ms) = &config.schedule {
                        current = (current + 1) % ms.len();
                        if schedule_trace.len() < SCHEDULE_TRACE_CAP {
                            schedule_trace.push(ScheduleSwitch {
                                block: block + 1,
                                matrix: current as u16,
                            });
                        }
                    }
                }
            }
        }
        records.push(BlockRecord { matrix: m as u16, outcome });
    }

    for (table, &count) in tables.iter().zip(&uses) {
        let w = count as f64;
        for (acc, s) in slots.iter_mut().zip(&table.slots) {
            acc.expected_detections += w * s.occupancy;
            acc.expected_bit += w * s.bit;
            acc.expected_phase += w * s.phase;
        }
    }

    Ok(TrialRecord {
        n,
        blocks: config.blocks,
        seed: config.seed,
        schedule: config.schedule.name(),
        inconclusive,
        slots,
        tables,
        records,
        schedule_trace,
    })
}

/// Per-block rates (`count / N`) next to their expectations
/// (`Σ_k p^(k) / N`) and the matching binomial standard deviations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateSummary {
    pub conclusive: f64,
    pub expected_conclusive: f64,
    pub bit: f64,
    pub expected_bit: f64,
    pub phase: f64,
    pub expected_phase: f64,
    pub sigma_conclusive: f64,
    pub sigma_bit: f64,
    pub sigma_phase: f64,
}

fn binomial_sigma(p: f64, n: f64) -> f64 {
    (p.clamp(0.0, 1.0) * (1.0 - p.clamp(0.0, 1.0)) / n).sqrt()
}

impl TrialRecord {
    pub fn conclusive(&self) -> u64 {
        self.slots.iter().map(|s| s.detections).sum()
    }

    pub fn total_bit_errors(&self) -> u64 {
        self.slots.iter().map(|s| s.bit_errors).sum()
    }

    pub fn total_phase_errors(&self) -> u64 {
        self.slots.iter().map(|s| s.phase_errors).sum()
    }

    pub fn rates(&self) -> RateSummary {
        let n = self.blocks as f64;
        let exp_c: f64 = self.slots.iter().map(|s| s.expected_detections).sum::<f64>() / n;
        let exp_b: f64 = self.slots.iter().map(|s| s.expected_bit).sum::<f64>() / n;
        let exp_p: f64 = self.slots.iter().map(|s| s.expected_phase).sum::<f64>() / n;
        RateSummary {
            conclusive: self.conclusive() as f64 / n,
            expected_conclusive: exp_c,
            bit: self.total_bit_errors() as f64 / n,
            expected_bit: exp_b,
            phase: self.total_phase_errors() as f64 / n,
            expected_phase: exp_p,
            sigma_conclusive: binomial_sigma(exp_c, n),
            sigma_bit: binomial_sigma(exp_b, n),
            sigma_phase: binomial_sigma(exp_p, n),
        }
    }

    /// `|e_Λ,l − Σ_k p^(k)_Λ,l / N|` for each slot, as `(slot, bit, phase)`.
    pub fn deviations(&self) -> Vec<(usize, f64, f64)> {
        let n = self.blocks as f64;
        self.slots
            .iter()
            .map(|s| {
                (
                    s.slot,
                    (s.bit_errors as f64 / n - s.expected_bit / n).abs(),
                    (s.phase_errors as f64 / n - s.expected_phase / n).abs(),
                )
            })
            .collect()
    }

    pub fn summary(&self) -> TrialSummary<'_> {
        TrialSummary {
            n: self.n,
            blocks: self.blocks,
            seed: self.seed,
            schedule: self.schedule,
            inconclusive: self.inconclusive,
            conclusive: self.conclusive(),
            bit_errors: self.total_bit_errors(),
            phase_errors: self.total_phase_errors(),
            rates: self.rates(),
            slots: &self.slots,
            schedule_trace: &self.schedule_trace,
        }
    }

    /// Per-block log, refused beyond [`BLOCK_LOG_LIMIT`] blocks.
    pub fn block_log(&self) -> Result<&[BlockRecord]> {
        if self.records.len() > BLOCK_LOG_LIMIT {
            return Err(Error::Config(format!(
                "per-block log of {} blocks exceeds the limit of {BLOCK_LOG_LIMIT}",
                self.records.len()
            )));
        }
        Ok(&self.records)
    }
}

/// Serializable digest of a [`TrialRecord`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialSummary<'a> {
    pub n: usize,
    pub blocks: usize,
    pub seed: u64,
    pub schedule: &'static str,
    pub inconclusive: u64,
    pub conclusive: u64,
    pub bit_errors: u64,
    pub phase_errors: u64,
    pub rates: RateSummary,
    pub slots: &'a [SlotCounts],
    pub schedule_trace: &'a [ScheduleSwitch],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AzumaRow {
    pub slot: usize,
    pub error: &'static str,
    pub violations: usize,
    pub fraction: f64,
    pub max_deviation: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AzumaReport {
    pub blocks: usize,
    pub epsilon: f64,
    pub repetitions: usize,
    /// `2 exp(−N ε² / 2)`.
    pub bound: f64,
    /// Three binomial standard deviations of the violation fraction at `bound`.
    pub slack: f64,
    pub rows: Vec<AzumaRow>,
    pub pass: bool,
}

/// Seed of repetition `rep` in a repeated campaign.
pub fn repetition_seed(seed: u64, rep: usize) -> u64 {
    // splitmix64 finalizer keeps neighbouring seeds far apart
    let mut z = seed.wrapping_add((rep as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Repeats the simulation `repetitions` times and counts, per slot and error
/// type, how often `|e_Λ,l − Σ_k p^(k)_Λ,l / N| ≥ ε`. Each row passes when the
/// violation fraction is at most `2 exp(−Nε²/2)` plus three binomial standard
/// deviations.
pub fn azuma_check(config: &SimConfig, epsilon: f64, repetitions: usize) -> Result<AzumaReport> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Config(format!("epsilon {epsilon} must be positive")));
    }
    if repetitions == 0 {
        return Err(Error::Config("at least one repetition is required".into()));
    }
    config.validate()?;
    let deviations: Vec<Vec<(usize, f64, f64)>> = (0..repetitions)
        .into_par_iter()
        .map(|rep| {
            let cfg = SimConfig {
                seed: repetition_seed(config.seed, rep),
                ..config.clone()
            };
            simulate(&cfg).map(|r| r.deviations())
        })
        .collect::<Result<_>>()?;

    let n = config.blocks as f64;
    let bound = 2.0 * (-n * epsilon * epsilon / 2.0).exp();
    let m = repetitions as f64;
    let slack = 3.0 * (bound.min(1.0) * (1.0 - bound.min(1.0)) / m).sqrt();
    let mut rows = Vec::new();
    for (i, slot) in (2..=config.n).enumerate() {
        for (error, pick) in [("bit", 1usize), ("phase", 2usize)] {
            let devs: Vec<f64> = deviations
                .iter()
                .map(|d| if pick == 1 { d[i].1 } else { d[i].2 })
                .collect();
            let violations = devs.iter().filter(|&&d| d >= epsilon).count();
            let fraction = violations as f64 / m;
            rows.push(AzumaRow {
                slot,
                error,
                violations,
                fraction,
                max_deviation: devs.iter().copied().fold(0.0, f64::max),
                pass: fraction <= bound + slack,
            });
        }
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(AzumaReport {
        blocks: config.blocks,
        epsilon,
        repetitions,
        bound,
        slack,
        rows,
        pass,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SiftEstimate {
    pub conclusive: usize,
    pub test_size: usize,
    pub key_size: usize,
    pub test_bit_errors: usize,
    pub key_bit_errors: usize,
    /// Bit error rate on the test blocks.
    pub test_rate: f64,
    /// Bit error rate on the untested (key) blocks; `None` if there are none.
    pub key_rate: Option<f64>,
    pub gap: Option<f64>,
    /// Five standard deviations of the difference of two binomial proportions
    /// at the pooled rate.
    pub gap_bound: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum SiftOutcome {
    /// No conclusive blocks to sample from.
    Empty,
    Estimated(SiftEstimate),
}

/// Splits the conclusive blocks at random into test and key sets and
/// compares their bit error rates.
pub fn sift_and_estimate(record: &TrialRecord, test_fraction: f64, seed: u64) -> Result<SiftOutcome> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(format!("test fraction {test_fraction} outside (0, 1)")));
    }
    let mut flags: Vec<bool> = record
        .records
        .iter()
        .filter_map(|r| match r.outcome {
            BlockOutcome::Conclusive { bit_error, .. } => Some(bit_error),
            BlockOutcome::Inconclusive => None,
        })
        .collect();
    let total = flags.len();
    if total == 0 {
        return Ok(SiftOutcome::Empty);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    flags.shuffle(&mut rng);
    let mut test_size = (test_fraction * total as f64).round() as usize;
    test_size = if total >= 2 { test_size.clamp(1, total - 1) } else { 1 };
    let (test, key) = flags.split_at(test_size);
    let count = |s: &[bool]| s.iter().filter(|&&b| b).count();
    let (test_errors, key_errors) = (count(test), count(key));
    let test_rate = test_errors as f64 / test.len() as f64;
    let key_rate = (!key.is_empty()).then(|| key_errors as f64 / key.len() as f64);
    let pooled = (test_errors + key_errors) as f64 / total as f64;
    let gap_bound = (!key.is_empty()).then(|| {
        5.0 * (pooled * (1.0 - pooled) * (1.0 / test.len() as f64 + 1.0 / key.len() as f64)).sqrt()
    });
    Ok(SiftOutcome::Estimated(SiftEstimate {
        conclusive: total,
        test_size: test.len(),
        key_size: key.len(),
        test_bit_errors: test_errors,
        key_bit_errors: key_errors,
        test_rate,
        key_rate,
        gap: key_rate.map(|k| (test_rate - k).abs()),
        gap_bound,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::C64;

    fn swap3() -> AttackMatrix {
        AttackMatrix::swap(3, 1, 2).unwrap()
    }

    #[test]
    fn identity_attack_has_no_errors() {
        for n in [2, 3, 5] {
            let cfg = SimConfig::new(Schedule::Constant(AttackMatrix::identity(n)), 100_000, 1);
            let r = simulate(&cfg).unwrap();
            assert_eq!(r.total_bit_errors(), 0);
            assert_eq!(r.total_phase_errors(), 0);
            let rates = r.rates();
            assert!((rates.expected_conclusive - (n - 1) as f64 / n as f64).abs() < 1e-12);
            assert!((rates.conclusive - rates.expected_conclusive).abs() <= 5.0 * rates.sigma_conclusive);
            assert_eq!(r.inconclusive + r.conclusive(), 100_000);
        }
    }

    #[test]
    fn alternating_schedule_tracks_averaged_tables() {
        let sched = Schedule::Alternating(vec![AttackMatrix::identity(3), swap3()]);
        let r = simulate(&SimConfig::new(sched, 200_000, 4)).unwrap();
        let rates = r.rates();
        assert!((rates.expected_bit - 1.0 / 12.0).abs() < 1e-12);
        assert!((rates.expected_phase - 1.0 / 6.0).abs() < 1e-12);
        assert!((rates.bit - rates.expected_bit).abs() <= 5.0 * rates.sigma_bit);
        assert!((rates.phase - rates.expected_phase).abs() <= 5.0 * rates.sigma_phase);
        assert_eq!(r.records[0].matrix, 0);
        assert_eq!(r.records[1].matrix, 1);
    }

    #[test]
    fn feedback_schedule_switches_after_bit_errors() {
        let sched = Schedule::Feedback(vec![swap3(), AttackMatrix::identity(3)]);
        let r = simulate(&SimConfig::new(sched, 10_000, 8)).unwrap();
        // The identity never produces a bit error, so the run gets stuck on
        // it after the first switch.
        assert_eq!(r.schedule_trace.len(), 2);
        let switch = r.schedule_trace[1].block;
        assert!(r.records[switch..].iter().all(|b| b.matrix == 1));
        assert!(r.records[..switch].iter().all(|b| b.matrix == 0));
        assert_eq!(r.total_bit_errors(), 1);
    }

    #[test]
    fn simulations_are_deterministic() {
        let cfg = SimConfig::new(Schedule::Constant(swap3()), 50_000, 99);
        assert_eq!(simulate(&cfg).unwrap(), simulate(&cfg).unwrap());
        let other = SimConfig { seed: 100, ..cfg.clone() };
        assert_ne!(simulate(&cfg).unwrap().records, simulate(&other).unwrap().records);
    }

    #[test]
    fn nonphysical_schedule_rejected_before_sampling() {
        let big = AttackMatrix::identity(3).scaled(C64::new(2.0, 0.0));
        let cfg = SimConfig::new(Schedule::Constant(big), 10, 0);
        assert!(matches!(simulate(&cfg), Err(Error::Config(_))));
        let mixed = Schedule::Alternating(vec![AttackMatrix::identity(3), AttackMatrix::identity(4)]);
        assert!(simulate(&SimConfig::new(mixed, 10, 0)).is_err());
        assert!(simulate(&SimConfig::new(Schedule::Constant(swap3()), 0, 0)).is_err());
    }

    #[test]
    fn lossy_attack_conserves_blocks() {
        let half = AttackMatrix::identity(4).scaled(C64::new(0.5, 0.0));
        let r = simulate(&SimConfig::new(Schedule::Constant(half), 40_000, 2)).unwrap();
        assert_eq!(r.inconclusive + r.conclusive(), 40_000);
        let rates = r.rates();
        assert!((rates.expected_conclusive - 0.25 * 0.75).abs() < 1e-12);
        assert!((rates.conclusive - rates.expected_conclusive).abs() <= 5.0 * rates.sigma_conclusive);
    }

    #[test]
    fn azuma_identity_has_zero_deviation() {
        let cfg = SimConfig::new(Schedule::Constant(AttackMatrix::identity(3)), 10_000, 3);
        let rep = azuma_check(&cfg, 0.05, 20).unwrap();
        assert!(rep.pass);
        assert!(rep.rows.iter().all(|r| r.violations == 0 && r.max_deviation == 0.0));
    }

    #[test]
    fn azuma_large_epsilon_never_violated() {
        let cfg = SimConfig::new(Schedule::Constant(swap3()), 1_000, 3);
        let rep = azuma_check(&cfg, 1.0, 10).unwrap();
        assert!(rep.rows.iter().all(|r| r.violations == 0));
        assert!(azuma_check(&cfg, 0.0, 10).is_err());
    }

    #[test]
    fn sift_identity_estimates_zero() {
        let r = simulate(&SimConfig::new(Schedule::Constant(AttackMatrix::identity(3)), 1000, 5)).unwrap();
        match sift_and_estimate(&r, 0.5, 1).unwrap() {
            SiftOutcome::Estimated(e) => {
                assert_eq!(e.test_rate, 0.0);
                assert_eq!(e.key_rate, Some(0.0));
            }
            SiftOutcome::Empty => panic!("expected conclusive blocks"),
        }
    }

    #[test]
    fn sift_two_blocks_splits_one_each() {
        let mut r = simulate(&SimConfig::new(Schedule::Constant(AttackMatrix::identity(3)), 50, 5)).unwrap();
        let mut kept = 0;
        for rec in &mut r.records {
            if matches!(rec.outcome, BlockOutcome::Conclusive { .. }) {
                kept += 1;
                if kept > 2 {
                    rec.outcome = BlockOutcome::Inconclusive;
                }
            }
        }
        match sift_and_estimate(&r, 0.5, 1).unwrap() {
            SiftOutcome::Estimated(e) => assert_eq!((e.test_size, e.key_size), (1, 1)),
            SiftOutcome::Empty => panic!(),
        }
    }

    #[test]
    fn sift_without_conclusive_blocks_is_empty() {
        let r = simulate(&SimConfig::new(Schedule::Constant(AttackMatrix::zeros(3)), 100, 5)).unwrap();
        assert_eq!(r.conclusive(), 0);
        assert_eq!(sift_and_estimate(&r, 0.5, 1).unwrap(), SiftOutcome::Empty);
        assert!(sift_and_estimate(&r, 1.0, 1).is_err());
    }
}
