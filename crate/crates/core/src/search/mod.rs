//! Adversarial search over attack matrices.
//!
//! The phase-error bound is a theorem; this module tries hard to break it
//! anyway. A seeded ensemble of complex Gaussian matrices is scanned first,
//! then the most extreme samples are polished with Nelder-Mead over the `2n²`
//! real parameters of the matrix.
//!
//! Both objectives are evaluated on the Frobenius-normalized matrix so that
//! the quadratic scaling of the error probabilities cannot be exploited:
//!
//! * [`Objective::MinSlack`] minimizes `(3+√5) Σ p_b − Σ p_p`;
//! * [`Objective::MaxRatio`] maximizes `Σ p_p / max(Σ p_b, ε)` with the
//!   denominator floor `ε = 1e-9`.

pub mod nelder_mead;

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::attack::AttackMatrix;
use crate::error::{Error, Result};
use crate::error_probs::{closed_form_totals, BOUND_FACTOR};
use crate::state::C64;

use self::nelder_mead::{NelderMeadOptions, NelderMeadResult};

pub const RATIO_FLOOR: f64 = 1e-9;
/// Slack below this (on a normalized matrix) is reported as a counterexample.
pub const COUNTEREXAMPLE_TOL: f64 = 1e-9;
pub const VISIT_LOG_CAP: usize = 100_000;
pub const MAX_SEARCH_N: usize = 10;

const CHUNK: usize = 4096;
const TRACE_POINTS: usize = 100;
const VISIT_STREAM_BASE: u64 = 1 << 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    MaxRatio,
    MinSlack,
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max-ratio" => Ok(Objective::MaxRatio),
            "min-slack" => Ok(Objective::MinSlack),
            other => Err(Error::Config(format!(
                "unknown objective `{other}` (expected max-ratio or min-slack)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchConfig {
    pub n: usize,
    /// Number of random matrices scanned.
    pub samples: usize,
    /// Nelder-Mead evaluation budget per restart.
    pub iterations: usize,
    /// Number of Nelder-Mead polishes, started from the best samples.
    pub restarts: usize,
    pub seed: u64,
    pub objective: Objective,
    pub ratio_floor: f64,
}

impl SearchConfig {
    pub fn new(n: usize, objective: Objective) -> Self {
        Self {
            n,
            samples: 10_000,
            iterations: 4_000,
            restarts: 8,
            seed: 0,
            objective,
            ratio_floor: RATIO_FLOOR,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=MAX_SEARCH_N).contains(&self.n) {
            return Err(Error::Config(format!(
                "search block length must be in 2..={MAX_SEARCH_N}, got {}",
                self.n
            )));
        }
        if self.samples == 0 {
            return Err(Error::Config("ensemble size must be at least 1".into()));
        }
        if self.restarts > self.samples {
            return Err(Error::Config(format!(
                "{} restarts requested but only {} samples to start from",
                self.restarts, self.samples
            )));
        }
        if self.restarts > 0 && self.iterations == 0 {
            return Err(Error::Config("optimizer iterations must be at least 1".into()));
        }
        if !(self.ratio_floor > 0.0 && self.ratio_floor.is_finite()) {
            return Err(Error::Config(format!("ratio floor {} must be positive", self.ratio_floor)));
        }
        Ok(())
    }
}

/// Deterministic stream of n×n matrices with i.i.d. standard complex Gaussian
/// entries (real and imaginary parts each of variance 1/2).
pub struct AttackSampler {
    n: usize,
    rng: ChaCha8Rng,
}

impl AttackSampler {
    pub fn new(n: usize, seed: u64) -> Self {
        Self::with_stream(n, seed, 0)
    }

    /// Independent sub-stream `stream` of the generator seeded with `seed`.
    pub fn with_stream(n: usize, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { n, rng }
    }
}

impl Iterator for AttackSampler {
    type Item = AttackMatrix;

    fn next(&mut self) -> Option<AttackMatrix> {
        let rng = &mut self.rng;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Some(AttackMatrix::from_fn(self.n, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(s * re, s * im)
        }))
    }
}

/// First `count` matrices of the stream seeded with `seed`.
pub fn sample_random_attacks(n: usize, seed: u64, count: usize) -> impl Iterator<Item = AttackMatrix> {
    AttackSampler::new(n, seed).take(count)
}

/// Error totals of a Frobenius-normalized attack.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Evaluation {
    pub total_bit: f64,
    pub total_phase: f64,
    /// `(3+√5) Σ p_b − Σ p_p`.
    pub slack: f64,
    /// `Σ p_p / max(Σ p_b, floor)`.
    pub ratio: f64,
}

impl Evaluation {
    /// The value the optimizer minimizes.
    fn loss(&self, objective: Objective) -> f64 {
        match objective {
            Objective::MaxRatio => -self.ratio,
            Objective::MinSlack => self.slack,
        }
    }

    /// The objective in its natural orientation (ratio or slack).
    pub fn value(&self, objective: Objective) -> f64 {
        match objective {
            Objective::MaxRatio => self.ratio,
            Objective::MinSlack => self.slack,
        }
    }
}

/// Evaluates `e / ‖e‖_F`; `None` for the zero matrix.
pub fn evaluate(e: &AttackMatrix, ratio_floor: f64) -> Option<Evaluation> {
    let unit = e.normalized()?;
    let (bit, phase) = closed_form_totals(&unit);
    Some(Evaluation {
        total_bit: bit,
        total_phase: phase,
        slack: BOUND_FACTOR * bit - phase,
        ratio: phase / bit.max(ratio_floor),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RestartTrace {
    /// Index of the starting sample within the random ensemble.
    pub start_sample: usize,
    pub start_value: f64,
    pub final_value: f64,
    pub evaluations: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Best objective value along the run, decimated to at most 100 points.
    pub trace: Vec<f64>,
    pub discarded: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchReport {
    pub config: SearchConfig,
    /// Best objective value found (largest ratio or smallest slack).
    pub best_value: f64,
    pub best_ratio: f64,
    pub best_slack: f64,
    pub best_total_bit: f64,
    pub best_total_phase: f64,
    /// Frobenius-normalized.
    pub best_matrix: AttackMatrix,
    pub random_min_slack: f64,
    pub random_max_ratio: f64,
    /// Matrices evaluated by the optimizer.
    pub visited_evaluations: u64,
    pub visited_min_slack: f64,
    /// Reservoir sample of the slack at visited matrices.
    #[serde(skip)]
    pub visit_log: Vec<f64>,
    pub restart_traces: Vec<RestartTrace>,
    pub discarded_restarts: usize,
    /// Some evaluated matrix had slack below `−COUNTEREXAMPLE_TOL`.
    pub counterexample: bool,
}

impl SearchReport {
    pub fn min_slack(&self) -> f64 {
        self.random_min_slack.min(self.visited_min_slack)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Clone)]
struct Candidate {
    loss: f64,
    index: usize,
    matrix: AttackMatrix,
    eval: Evaluation,
}

struct ChunkResult {
    top: Vec<Candidate>,
    min_slack: f64,
    max_ratio: f64,
}

fn insert_top(top: &mut Vec<Candidate>, cand: Candidate, k: usize) {
    if k == 0 {
        return;
    }
    let pos = top
        .iter()
        .position(|c| (cand.loss, cand.index) < (c.loss, c.index))
        .unwrap_or(top.len());
    if pos < k {
        top.insert(pos, cand);
        top.truncate(k);
    }
}

fn scan_chunk(config: &SearchConfig, chunk: usize, keep: usize) -> ChunkResult {
    let start = chunk * CHUNK;
    let len = CHUNK.min(config.samples - start);
    let mut out = ChunkResult {
        top: Vec::new(),
        min_slack: f64::INFINITY,
        max_ratio: f64::NEG_INFINITY,
    };
    let sampler = AttackSampler::with_stream(config.n, config.seed, chunk as u64);
    for (offset, matrix) in sampler.take(len).enumerate() {
        let Some(eval) = evaluate(&matrix, config.ratio_floor) else {
            continue;
        };
        out.min_slack = out.min_slack.min(eval.slack);
        out.max_ratio = out.max_ratio.max(eval.ratio);
        let loss = eval.loss(config.objective);
        if loss.is_finite() {
            insert_top(
                &mut out.top,
                Candidate { loss, index: start + offset, matrix, eval },
                keep,
            );
        }
    }
    out
}

struct VisitStats {
    count: u64,
    min_slack: f64,
    reservoir: Vec<f64>,
}

fn polish(config: &SearchConfig, restart: usize, start: &Candidate, reservoir_cap: usize) -> (RestartTrace, Option<Candidate>, VisitStats) {
    let mut stats = VisitStats {
        count: 0,
        min_slack: f64::INFINITY,
        reservoir: Vec::new(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(VISIT_STREAM_BASE + restart as u64);
    let n = config.n;
    let x0 = start.matrix.normalized().expect("nonzero start").to_params();
    let opts = NelderMeadOptions {
        max_evals: config.iterations,
        step: 0.5 / n as f64,
        ..Default::default()
    };

    let result: NelderMeadResult = nelder_mead::minimize(
        |x| {
            let Some(eval) = AttackMatrix::from_params(n, x)
                .ok()
                .and_then(|m| evaluate(&m, config.ratio_floor))
            else {
                return f64::NAN;
            };
            stats.count += 1;
            stats.min_slack = stats.min_slack.min(eval.slack);
            if stats.reservoir.len() < reservoir_cap {
                stats.reservoir.push(eval.slack);
            } else if reservoir_cap > 0 {
                let j = rng.random_range(0..stats.count) as usize;
                if j < reservoir_cap {
                    stats.reservoir[j] = eval.slack;
                }
            }
            eval.loss(config.objective)
        },
        &x0,
        &opts,
    );

    let sign = match config.objective {
        Objective::MaxRatio => -1.0,
        Objective::MinSlack => 1.0,
    };
    let stride = result.trace.len().div_ceil(TRACE_POINTS).max(1);
    let mut trace: Vec<f64> = result.trace.iter().step_by(stride).map(|v| sign * v).collect();
    if let Some(last) = result.trace.last() {
        if !(result.trace.len() - 1).is_multiple_of(stride) {
            trace.push(sign * last);
        }
    }

    let best = AttackMatrix::from_params(n, &result.x)
        .ok()
        .and_then(|m| m.normalized())
        .and_then(|m| evaluate(&m, config.ratio_floor).map(|eval| (m, eval)));
    let discarded = !result.f.is_finite() || !start.loss.is_finite() || best.is_none();
    let candidate = best.filter(|_| !discarded).map(|(matrix, eval)| Candidate {
        loss: eval.loss(config.objective),
        index: start.index,
        matrix,
        eval,
    });
    let trace = RestartTrace {
        start_sample: start.index,
        start_value: start.eval.value(config.objective),
        final_value: candidate
            .as_ref()
            .map_or(f64::NAN, |c| c.eval.value(config.objective)),
        evaluations: result.evaluations,
        iterations: result.iterations,
        converged: result.converged,
        trace,
        discarded,
    };
    (trace, candidate, stats)
}

/// Runs the random scan followed by the Nelder-Mead restarts. Identical
/// configurations produce identical reports regardless of thread scheduling.
pub fn optimize_attack(config: &SearchConfig) -> Result<SearchReport> {
    config.validate()?;
    let chunks = config.samples.div_ceil(CHUNK);
    let keep = config.restarts.max(1);
    let results: Vec<ChunkResult> = (0..chunks)
        .into_par_iter()
        .map(|c| scan_chunk(config, c, keep))
        .collect();

    let mut top = Vec::new();
    let (mut random_min_slack, mut random_max_ratio) = (f64::INFINITY, f64::NEG_INFINITY);
    for r in results {
        random_min_slack = random_min_slack.min(r.min_slack);
        random_max_ratio = random_max_ratio.max(r.max_ratio);
        for cand in r.top {
            insert_top(&mut top, cand, keep);
        }
    }
    let Some(mut best) = top.first().cloned() else {
        return Err(Error::Consistency("no finite objective among the random samples".into()));
    };

    let reservoir_cap = VISIT_LOG_CAP / config.restarts.max(1);
    let polished: Vec<_> = top
        .par_iter()
        .take(config.restarts)
        .enumerate()
        .map(|(i, start)| polish(config, i, start, reservoir_cap))
        .collect();

    let mut restart_traces = Vec::with_capacity(polished.len());
    let mut visited_evaluations = 0;
    let mut visited_min_slack = f64::INFINITY;
    let mut visit_log = Vec::new();
    let mut discarded_restarts = 0;
    for (trace, candidate, stats) in polished {
        if trace.discarded {
            discarded_restarts += 1;
        }
        visited_evaluations += stats.count;
        visited_min_slack = visited_min_slack.min(stats.min_slack);
        visit_log.extend(stats.reservoir);
        if let Some(c) = candidate {
            if c.loss < best.loss {
                best = c;
            }
        }
        restart_traces.push(trace);
    }

    let best_matrix = best.matrix.normalized().expect("nonzero best matrix");
    let counterexample = random_min_slack.min(visited_min_slack) < -COUNTEREXAMPLE_TOL;
    Ok(SearchReport {
        config: config.clone(),
        best_value: best.eval.value(config.objective),
        best_ratio: best.eval.ratio,
        best_slack: best.eval.slack,
        best_total_bit: best.eval.total_bit,
        best_total_phase: best.eval.total_phase,
        best_matrix,
        random_min_slack,
        random_max_ratio,
        visited_evaluations,
        visited_min_slack,
        visit_log,
        restart_traces,
        discarded_restarts,
        counterexample,
    })
}
