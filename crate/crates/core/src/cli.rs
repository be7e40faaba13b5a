//! Command-line front end for the `dpsqkd` binary.
//!
//! Every subcommand reads its parameters from flags and, optionally, from a
//! flat `key = value` config file (`#` starts a comment). Flags win over file
//! values; file keys that the chosen subcommand does not understand are an
//! error. Keys use the flag names with `-` or `_` interchangeably.
//!
//! Output is built in memory and only written once the command has finished,
//! so a failed run never leaves a partial table behind.
//!
//! Exit codes: 0 success, 1 validation or parse error, 2 internal-consistency
//! failure.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::attack::AttackMatrix;
use crate::error::{Error, Result};
use crate::error_probs::{error_table, oracle_error_table};
use crate::montecarlo::{self, Schedule, SimConfig};
use crate::rates::{self, ChannelParams, Curve, Protocol};
use crate::search::{self, Objective, SearchConfig};
use crate::table::{format_float, write_row};

/// Largest closed-form/oracle difference tolerated by `error-probs`.
pub const DISCREPANCY_TOL: f64 = 1e-8;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_CONSISTENCY: i32 = 2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    #[default]
    Csv,
    /// Human-readable tables, or indented JSON for structured reports.
    Text,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "text" => Ok(OutputFormat::Text),
            other => Err(Error::Config(format!("unknown format `{other}` (expected csv or text)"))),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "dpsqkd", version, about = "Single-photon DPS-QKD numerical laboratory")]
pub struct Cli {
    /// Seed for every random stream (default 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Flat key = value file supplying defaults for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-slot bit/phase error probabilities of an attack, closed form vs state vector.
    ErrorProbs(ErrorProbsArgs),
    /// Random and optimized search for violations of the phase-error bound.
    VerifyBound(VerifyBoundArgs),
    /// Key-rate and energy-efficiency curves against channel loss.
    Keyrate(KeyrateArgs),
    /// Tolerable bit error rates of each protocol.
    Thresholds(ThresholdsArgs),
    /// Monte Carlo run of the entanglement-based protocol.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct ErrorProbsArgs {
    /// Attack matrix file (JSON).
    #[arg(long)]
    pub attack: Option<PathBuf>,
    /// Expected block length; must match the file.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyBoundArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// Random matrices to scan (default 100000).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Nelder-Mead polishes when optimizing (default 50).
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Evaluation budget per polish (default 4000).
    #[arg(long)]
    pub iterations: Option<usize>,
    /// min-slack or max-ratio (default min-slack).
    #[arg(long)]
    pub objective: Option<String>,
    /// Polish the best samples with Nelder-Mead.
    #[arg(long)]
    pub optimize: bool,
}

#[derive(Debug, Args)]
pub struct ChannelArgs {
    /// Dark count probability per detector per slot.
    #[arg(long)]
    pub dark: Option<f64>,
    /// Intrinsic (baseline) bit error rate.
    #[arg(long)]
    pub baseline_error: Option<f64>,
    /// Error-correction inefficiency f ≥ 1 (default 1).
    #[arg(long)]
    pub ec_efficiency: Option<f64>,
}

#[derive(Debug, Args)]
pub struct KeyrateArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Comma-separated DPS block lengths (default 3,10).
    #[arg(long)]
    pub n_list: Option<String>,
    /// Comma-separated losses in dB; overrides the min/max/step grid.
    #[arg(long)]
    pub losses: Option<String>,
    #[arg(long)]
    pub loss_min: Option<f64>,
    #[arg(long)]
    pub loss_max: Option<f64>,
    #[arg(long)]
    pub loss_step: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ThresholdsArgs {
    #[arg(long)]
    pub ec_efficiency: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Comma-separated attack matrix files.
    #[arg(long)]
    pub attack: Option<String>,
    /// Comma-separated built-in attacks (identity, swap) instead of files.
    #[arg(long)]
    pub kind: Option<String>,
    /// Block length for built-in attacks (default 3).
    #[arg(long)]
    pub n: Option<usize>,
    /// constant, alternating or feedback.
    #[arg(long)]
    pub schedule: Option<String>,
    /// Number of blocks (default 100000).
    #[arg(long)]
    pub blocks: Option<usize>,
    /// Fraction of conclusive blocks used as test bits (default 0.5).
    #[arg(long)]
    pub test_fraction: Option<f64>,
    /// Deviation threshold of the concentration check (default 0.05).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Repetitions of the concentration check; 0 skips it (default 20).
    #[arg(long)]
    pub repetitions: Option<usize>,
    /// Write the per-block log as JSON lines to this file.
    #[arg(long)]
    pub block_log: Option<PathBuf>,
}

/// Parsed config file, consumed key by key.
#[derive(Debug, Default)]
pub struct ConfigFile {
    entries: BTreeMap<String, (usize, String)>,
}

fn normalize_key(key: &str) -> String {
    key.trim().replace('-', "_")
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    location: format!("config line {line_no}"),
                    message: format!("expected `key = value`, found `{line}`"),
                });
            };
            let key = normalize_key(key);
            if key.is_empty() {
                return Err(Error::Parse {
                    location: format!("config line {line_no}"),
                    message: "empty key".into(),
                });
            }
            if let Some((first, _)) = entries.insert(key.clone(), (line_no, value.trim().to_string())) {
                return Err(Error::Parse {
                    location: format!("config line {line_no}"),
                    message: format!("key `{key}` already set on line {first}"),
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Removes `key` from the file and returns the flag value if given,
    /// otherwise the parsed file value.
    fn pick_with<T>(&mut self, key: &str, flag: Option<T>, parse: impl Fn(&str) -> Result<T>) -> Result<Option<T>> {
        let from_file = self.entries.remove(key);
        if flag.is_some() {
            return Ok(flag);
        }
        match from_file {
            None => Ok(None),
            Some((line, raw)) => parse(&raw).map(Some).map_err(|e| Error::Parse {
                location: format!("config line {line}, key `{key}`"),
                message: e.to_string(),
            }),
        }
    }

    fn pick<T: FromStr>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T::Err: Display,
    {
        self.pick_with(key, flag, |s| s.parse::<T>().map_err(|e| Error::Config(e.to_string())))
    }

    fn finish_ref(&mut self) -> Result<()> {
        std::mem::take(self).finish()
    }

    fn finish(self) -> Result<()> {
        match self.entries.iter().next() {
            None => Ok(()),
            Some((key, (line, _))) => Err(Error::Config(format!(
                "unknown config key `{key}` on line {line}"
            ))),
        }
    }
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: Display,
{
    let items = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|e| Error::Config(format!("bad list item `{t}`: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    if items.is_empty() {
        return Err(Error::Config(format!("empty list `{s}`")));
    }
    Ok(items)
}

fn parse_bool(s: &str) -> Result<bool> {
    match s {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(Error::Config(format!("expected true or false, found `{other}`"))),
    }
}

/// Result of one subcommand, ready to be written out.
#[derive(Debug, Default)]
pub struct Outcome {
    pub body: Vec<u8>,
    /// Lines for stderr.
    pub notes: Vec<String>,
    /// Set when the run found an internal inconsistency; maps to exit code 2
    /// after the body has been written.
    pub failure: Option<String>,
}

fn aligned(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, s)| format!("{s:>w$}", w = widths[c]))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn emit_table(format: OutputFormat, rows: &[Vec<String>]) -> Vec<u8> {
    match format {
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            for row in rows {
                write_row(&mut buf, row).expect("writing to memory");
            }
            buf
        }
        OutputFormat::Text => aligned(rows).into_bytes(),
    }
}

fn emit_json(value: &impl serde::Serialize) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s.into_bytes()
}

pub fn cmd_error_probs(args: &ErrorProbsArgs, cfg: &mut ConfigFile, format: OutputFormat) -> Result<Outcome> {
    let path = cfg
        .pick("attack", args.attack.clone())?
        .ok_or_else(|| Error::Config("error-probs needs --attack <file>".into()))?;
    let n = cfg.pick("n", args.n)?;
    cfg.finish_ref()?;
    let attack = AttackMatrix::read_file(&path)?;
    if let Some(n) = n {
        if n != attack.n() {
            return Err(Error::Config(format!(
                "--n {n} does not match the {0}x{0} attack matrix",
                attack.n()
            )));
        }
    }
    let closed = error_table(&attack)?;
    let oracle = oracle_error_table(&attack)?;
    let max = closed.max_discrepancy(&oracle);

    let mut rows = vec![
        ["slot", "occupancy", "p_b_closed", "p_p_closed", "p_b_oracle", "p_p_oracle", "discrepancy"]
            .map(String::from)
            .to_vec(),
    ];
    for (c, o) in closed.slots.iter().zip(&oracle.slots) {
        let d = (c.bit - o.bit).abs().max((c.phase - o.phase).abs());
        rows.push(vec![
            c.slot.to_string(),
            format_float(c.occupancy),
            format_float(c.bit),
            format_float(c.phase),
            format_float(o.bit),
            format_float(o.phase),
            format_float(d),
        ]);
    }
    let mut body = emit_table(format, &rows);
    if format == OutputFormat::Text {
        body.extend_from_slice(format!("max discrepancy: {}\n", format_float(max)).as_bytes());
    }
    let mut out = Outcome {
        body,
        notes: vec![format!("max discrepancy {}", format_float(max))],
        failure: None,
    };
    if max > DISCREPANCY_TOL {
        out.failure = Some(format!(
            "closed form and state vector disagree by {} (tolerance {})",
            format_float(max),
            format_float(DISCREPANCY_TOL)
        ));
    }
    Ok(out)
}

pub fn cmd_verify_bound(args: &VerifyBoundArgs, cfg: &mut ConfigFile, format: OutputFormat, seed: u64) -> Result<Outcome> {
    let n = cfg.pick("n", args.n)?.unwrap_or(3);
    let samples = cfg.pick("samples", args.samples)?.unwrap_or(100_000);
    let restarts = cfg.pick("restarts", args.restarts)?;
    let iterations = cfg.pick("iterations", args.iterations)?.unwrap_or(4_000);
    let objective = cfg.pick_with("objective", args.objective.clone(), |s| Ok(s.to_string()))?;
    let optimize = cfg.pick_with("optimize", args.optimize.then_some(true), parse_bool)?.unwrap_or(false);
    cfg.finish_ref()?;
    let objective: Objective = objective.as_deref().unwrap_or("min-slack").parse()?;
    if restarts.is_some() && !optimize {
        return Err(Error::Config("restarts given without --optimize".into()));
    }

    let mut config = SearchConfig::new(n, objective);
    config.samples = samples;
    config.iterations = iterations;
    config.restarts = if optimize { restarts.unwrap_or(50) } else { 0 };
    config.seed = seed;
    let report = search::optimize_attack(&config)?;

    let body = match format {
        OutputFormat::Text => {
            let mut s = report.to_json();
            s.push('\n');
            s.into_bytes()
        }
        OutputFormat::Csv => emit_table(
            format,
            &[
                [
                    "n",
                    "objective",
                    "samples",
                    "restarts",
                    "random_min_slack",
                    "random_max_ratio",
                    "visited_evaluations",
                    "visited_min_slack",
                    "min_slack",
                    "best_ratio",
                    "best_total_bit",
                    "best_total_phase",
                    "counterexample",
                ]
                .map(String::from)
                .to_vec(),
                vec![
                    n.to_string(),
                    serde_json::to_value(objective).expect("objective serializes").as_str().unwrap_or("").to_string(),
                    samples.to_string(),
                    config.restarts.to_string(),
                    format_float(report.random_min_slack),
                    format_float(report.random_max_ratio),
                    report.visited_evaluations.to_string(),
                    format_float(report.visited_min_slack),
                    format_float(report.min_slack()),
                    format_float(report.best_ratio),
                    format_float(report.best_total_bit),
                    format_float(report.best_total_phase),
                    report.counterexample.to_string(),
                ],
            ],
        ),
    };
    let mut out = Outcome {
        body,
        notes: vec![format!(
            "n={n}: min slack {}, max ratio {}",
            format_float(report.min_slack()),
            format_float(report.best_ratio.max(report.random_max_ratio))
        )],
        failure: None,
    };
    if n == 2 {
        out.notes.push(format!(
            "notice: n=2 excluded from the bound; witness {}",
            if report.counterexample { "found (negative slack)" } else { "not found" }
        ));
    } else if report.counterexample {
        out.failure = Some(format!(
            "bound violated at n={n}: slack {}",
            format_float(report.min_slack())
        ));
    }
    Ok(out)
}

fn channel_template(args: &ChannelArgs, cfg: &mut ConfigFile) -> Result<(ChannelParams, f64)> {
    let dark = cfg.pick("dark", args.dark)?.unwrap_or(rates::DEFAULT_DARK_COUNT);
    let baseline = cfg.pick("baseline_error", args.baseline_error)?.unwrap_or(rates::DEFAULT_BASELINE_ERROR);
    let ec = ec_efficiency(cfg, args.ec_efficiency)?;
    Ok((ChannelParams::new(1.0, dark, baseline, 3)?, ec))
}

fn ec_efficiency(cfg: &mut ConfigFile, flag: Option<f64>) -> Result<f64> {
    let ec = cfg.pick("ec_efficiency", flag)?.unwrap_or(1.0);
    if !(ec >= 1.0 && ec.is_finite()) {
        return Err(Error::Config(format!("error-correction inefficiency {ec} must be ≥ 1")));
    }
    Ok(ec)
}

pub fn cmd_keyrate(args: &KeyrateArgs, cfg: &mut ConfigFile, format: OutputFormat) -> Result<Outcome> {
    let (template, ec) = channel_template(&args.channel, cfg)?;
    let n_list = cfg
        .pick_with("n_list", args.n_list.clone(), |s| Ok(s.to_string()))?
        .map(|s| parse_list::<usize>(&s))
        .transpose()?
        .unwrap_or_else(|| vec![3, 10]);
    let losses = cfg
        .pick_with("losses", args.losses.clone(), |s| Ok(s.to_string()))?
        .map(|s| parse_list::<f64>(&s))
        .transpose()?;
    let loss_min = cfg.pick("loss_min", args.loss_min)?.unwrap_or(0.0);
    let loss_max = cfg.pick("loss_max", args.loss_max)?.unwrap_or(80.0);
    let loss_step = cfg.pick("loss_step", args.loss_step)?.unwrap_or(0.5);
    cfg.finish_ref()?;

    let losses = match losses {
        Some(l) => l,
        None => {
            if !(loss_step > 0.0 && loss_step.is_finite() && loss_min.is_finite() && loss_max >= loss_min) {
                return Err(Error::Config(format!(
                    "invalid loss grid {loss_min}..{loss_max} step {loss_step}"
                )));
            }
            let count = ((loss_max - loss_min) / loss_step + 1e-9).floor() as usize + 1;
            if count > 1_000_000 {
                return Err(Error::Config(format!("loss grid of {count} points is too large")));
            }
            (0..count).map(|i| loss_min + i as f64 * loss_step).collect()
        }
    };
    for &n in &n_list {
        template.with_n(n)?;
    }
    let mut curves = vec![Curve { protocol: Protocol::Bb84, n: 1 }];
    for &n in &n_list {
        curves.push(Curve { protocol: Protocol::DpsUnconditional, n });
        curves.push(Curve { protocol: Protocol::DpsIndividual, n });
    }
    let rows = rates::sweep_loss(&curves, &losses, &template, ec)?;

    let mut notes = Vec::new();
    if let Some(r) = rows.iter().find(|r| r.rates.diagnostic.is_some()) {
        notes.push(format!(
            "note: {} n={} at {} dB: {}",
            r.rates.protocol,
            r.rates.n,
            format_float(r.loss_db),
            r.rates.diagnostic.as_deref().unwrap_or("")
        ));
    }
    let body = match format {
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            rates::write_rate_csv(&rows, &mut buf)?;
            buf
        }
        OutputFormat::Text => {
            let mut table = vec![rates::RATE_CSV_HEADER.map(String::from).to_vec()];
            for row in &rows {
                let r = &row.rates;
                table.push(vec![
                    r.protocol.label().to_string(),
                    r.n.to_string(),
                    format_float(row.loss_db),
                    format_float(row.eta),
                    format_float(r.p_click),
                    format_float(r.e_b),
                    format_float(r.rate_raw),
                    format_float(r.rate),
                    format_float(r.ee),
                ]);
            }
            aligned(&table).into_bytes()
        }
    };
    Ok(Outcome { body, notes, failure: None })
}

pub fn cmd_thresholds(args: &ThresholdsArgs, cfg: &mut ConfigFile, format: OutputFormat) -> Result<Outcome> {
    let ec = ec_efficiency(cfg, args.ec_efficiency)?;
    cfg.finish_ref()?;
    let values: Vec<(Protocol, f64)> = [Protocol::Bb84, Protocol::DpsIndividual, Protocol::DpsUnconditional]
        .iter()
        .map(|&p| (p, rates::tolerable_ber_with_efficiency(p, ec)))
        .collect();
    let body = match format {
        OutputFormat::Csv => {
            let mut rows = vec![vec!["protocol".to_string(), "tolerable_ber".to_string()]];
            rows.extend(values.iter().map(|(p, e)| vec![p.label().to_string(), format_float(*e)]));
            emit_table(format, &rows)
        }
        OutputFormat::Text => values
            .iter()
            .map(|(p, e)| format!("{:<4} {e:.4}\n", p.label()))
            .collect::<String>()
            .into_bytes(),
    };
    Ok(Outcome { body, notes: Vec::new(), failure: None })
}

fn builtin_attack(kind: &str, n: usize) -> Result<AttackMatrix> {
    if n < 2 {
        return Err(Error::Config(format!("block length must be at least 2, got {n}")));
    }
    match kind {
        "identity" => Ok(AttackMatrix::identity(n)),
        "swap" => AttackMatrix::swap(n, 1, 2),
        other => Err(Error::Config(format!("unknown attack kind `{other}` (expected identity or swap)"))),
    }
}

pub fn cmd_simulate(args: &SimulateArgs, cfg: &mut ConfigFile, format: OutputFormat, seed: u64) -> Result<Outcome> {
    let text = |s: &str| Ok(s.to_string());
    let files = cfg.pick_with("attack", args.attack.clone(), text)?;
    let kinds = cfg.pick_with("kind", args.kind.clone(), text)?;
    let n = cfg.pick("n", args.n)?;
    let schedule = cfg.pick_with("schedule", args.schedule.clone(), text)?;
    let blocks = cfg.pick("blocks", args.blocks)?.unwrap_or(100_000);
    let test_fraction = cfg.pick("test_fraction", args.test_fraction)?.unwrap_or(0.5);
    let epsilon = cfg.pick("epsilon", args.epsilon)?.unwrap_or(0.05);
    let repetitions = cfg.pick("repetitions", args.repetitions)?.unwrap_or(20);
    let block_log = cfg.pick("block_log", args.block_log.clone())?;
    cfg.finish_ref()?;

    let matrices: Vec<AttackMatrix> = match (files, kinds) {
        (Some(_), Some(_)) => return Err(Error::Config("give either --attack or --kind, not both".into())),
        (Some(files), None) => {
            let ms = parse_list::<PathBuf>(&files)?
                .iter()
                .map(AttackMatrix::read_file)
                .collect::<Result<Vec<_>>>()?;
            if let Some(n) = n {
                if ms.iter().any(|m| m.n() != n) {
                    return Err(Error::Config(format!("attack files do not all have block length {n}")));
                }
            }
            ms
        }
        (None, kinds) => parse_list::<String>(kinds.as_deref().unwrap_or("identity"))?
            .iter()
            .map(|k| builtin_attack(k, n.unwrap_or(3)))
            .collect::<Result<Vec<_>>>()?,
    };
    let schedule = match schedule.as_deref().unwrap_or("constant") {
        "constant" => {
            if matrices.len() != 1 {
                return Err(Error::Config(format!(
                    "constant schedule needs exactly one attack, got {}",
                    matrices.len()
                )));
            }
            Schedule::Constant(matrices.into_iter().next().expect("one matrix"))
        }
        "alternating" => Schedule::Alternating(matrices),
        "feedback" => Schedule::Feedback(matrices),
        other => {
            return Err(Error::Config(format!(
                "unknown schedule `{other}` (expected constant, alternating or feedback)"
            )))
        }
    };
    let mut config = SimConfig::new(schedule, blocks, seed);
    config.test_fraction = test_fraction;
    config.validate()?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Config(format!("epsilon {epsilon} must be positive")));
    }

    let record = montecarlo::simulate(&config)?;
    let sift = montecarlo::sift_and_estimate(&record, test_fraction, montecarlo::repetition_seed(seed, usize::MAX))?;
    let azuma = if repetitions > 0 {
        Some(montecarlo::azuma_check(&config, epsilon, repetitions)?)
    } else {
        None
    };
    if let Some(path) = block_log {
        let mut buf = Vec::new();
        for (k, rec) in record.block_log()?.iter().enumerate() {
            let mut line = serde_json::to_value(rec).expect("record serializes");
            line["block"] = json!(k);
            writeln!(buf, "{line}")?;
        }
        std::fs::write(path, buf)?;
    }

    let mut notes = Vec::new();
    if let montecarlo::SiftOutcome::Estimated(e) = &sift {
        notes.push(format!(
            "sift: test rate {} key rate {} gap bound {}",
            format_float(e.test_rate),
            e.key_rate.map_or("-".into(), format_float),
            e.gap_bound.map_or("-".into(), format_float)
        ));
    }
    if let Some(a) = &azuma {
        notes.push(format!(
            "azuma: {} repetitions, bound {} + slack {}, {}",
            a.repetitions,
            format_float(a.bound),
            format_float(a.slack),
            if a.pass { "pass" } else { "FAIL" }
        ));
    }

    let body = match format {
        OutputFormat::Text => emit_json(&json!({
            "summary": record.summary(),
            "azuma": azuma,
            "sift": sift,
        })),
        OutputFormat::Csv => {
            let mut rows = vec![[
                "slot",
                "detections",
                "bit_errors",
                "phase_errors",
                "expected_detections",
                "expected_bit",
                "expected_phase",
            ]
            .map(String::from)
            .to_vec()];
            for s in &record.slots {
                rows.push(vec![
                    s.slot.to_string(),
                    s.detections.to_string(),
                    s.bit_errors.to_string(),
                    s.phase_errors.to_string(),
                    format_float(s.expected_detections),
                    format_float(s.expected_bit),
                    format_float(s.expected_phase),
                ]);
            }
            emit_table(format, &rows)
        }
    };
    Ok(Outcome { body, notes, failure: None })
}

/// Exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Consistency(_) => EXIT_CONSISTENCY,
        _ => EXIT_VALIDATION,
    }
}

fn dispatch(cli: &Cli) -> Result<(Outcome, Option<PathBuf>)> {
    let mut cfg = match &cli.config {
        Some(path) => ConfigFile::read(path)?,
        None => ConfigFile::default(),
    };
    let seed = cfg.pick("seed", cli.seed)?.unwrap_or(0);
    let out = cfg.pick("out", cli.out.clone())?;
    let format = cfg.pick("format", cli.format)?.unwrap_or_default();
    let outcome = match &cli.command {
        Command::ErrorProbs(a) => cmd_error_probs(a, &mut cfg, format)?,
        Command::VerifyBound(a) => cmd_verify_bound(a, &mut cfg, format, seed)?,
        Command::Keyrate(a) => cmd_keyrate(a, &mut cfg, format)?,
        Command::Thresholds(a) => cmd_thresholds(a, &mut cfg, format)?,
        Command::Simulate(a) => cmd_simulate(a, &mut cfg, format, seed)?,
    };
    Ok((outcome, out))
}

/// Parses `args` (including the program name) and runs the command. Returns
/// the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(stdout, "{rendered}")
            } else {
                write!(stderr, "{rendered}")
            };
            return code;
        }
    };
    let (outcome, out) = match dispatch(&cli) {
        Ok(v) => v,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return exit_code(&e);
        }
    };
    let written = match &out {
        Some(path) => std::fs::write(path, &outcome.body),
        None => stdout.write_all(&outcome.body).and_then(|()| stdout.flush()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_VALIDATION;
    }
    for note in &outcome.notes {
        let _ = writeln!(stderr, "{note}");
    }
    match outcome.failure {
        Some(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_CONSISTENCY
        }
        None => EXIT_OK,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let mut full = vec!["dpsqkd"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn config_file_parsing() {
        let mut cfg = ConfigFile::parse("# comment\nseed = 7\n loss-min=3 # trailing\n\n").unwrap();
        assert_eq!(cfg.pick::<u64>("seed", None).unwrap(), Some(7));
        assert_eq!(cfg.pick::<f64>("loss_min", Some(1.0)).unwrap(), Some(1.0));
        cfg.finish().unwrap();

        assert!(matches!(ConfigFile::parse("seed 7"), Err(Error::Parse { .. })));
        assert!(matches!(ConfigFile::parse("seed=1\nseed=2"), Err(Error::Parse { .. })));
        let mut bad = ConfigFile::parse("seed = x").unwrap();
        let err = bad.pick::<u64>("seed", None).unwrap_err();
        assert!(err.to_string().contains("config line 1"), "{err}");
    }

    #[test]
    fn unknown_config_key_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "samples = 10\n").unwrap();
        let (code, out, err) = run_capture(&["thresholds", "--config", path.to_str().unwrap()]);
        assert_eq!(code, EXIT_VALIDATION);
        assert!(out.is_empty());
        assert!(err.contains("unknown config key `samples`"), "{err}");
    }

    #[test]
    fn thresholds_text() {
        let (code, out, _) = run_capture(&["thresholds", "--format", "text"]);
        assert_eq!(code, 0);
        assert_eq!(out, "BB84 0.1100\nIND  0.0609\nDPS  0.0412\n");
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "format = text\nlosses = 0,10\nn-list = 3\n").unwrap();
        let p = path.to_str().unwrap();
        let (code, out, _) = run_capture(&["keyrate", "--config", p, "--format", "csv"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "protocol,n,loss_db,eta,p_click,e_b,rate_raw,rate,ee");
        assert_eq!(lines.len(), 1 + 3 * 2);
        let (_, text, _) = run_capture(&["keyrate", "--config", p]);
        assert!(text.starts_with("protocol"));
        assert!(!text.contains(','));
    }

    #[test]
    fn single_point_grid_gives_one_row_per_curve() {
        let (code, out, _) = run_capture(&["keyrate", "--losses", "0", "--n-list", "3"]);
        assert_eq!(code, 0);
        let protocols: Vec<&str> = out.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
        assert_eq!(protocols, ["BB84", "DPS", "IND"]);
    }

    #[test]
    fn usage_errors_exit_one_and_help_exits_zero() {
        assert_eq!(run_capture(&["bogus"]).0, EXIT_VALIDATION);
        assert_eq!(run_capture(&["keyrate", "--dark", "abc"]).0, EXIT_VALIDATION);
        let (code, out, _) = run_capture(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("verify-bound"));
    }

    #[test]
    fn verify_bound_rejects_zero_samples() {
        let (code, out, err) = run_capture(&["verify-bound", "--n", "3", "--samples", "0"]);
        assert_eq!(code, EXIT_VALIDATION);
        assert!(out.is_empty());
        assert!(err.contains("ensemble size"), "{err}");
    }

    #[test]
    fn verify_bound_n2_reports_witness_without_failing() {
        let (code, out, err) = run_capture(&["verify-bound", "--n", "2", "--samples", "2000"]);
        assert_eq!(code, EXIT_OK, "{err}");
        assert!(err.contains("n=2 excluded"));
        assert!(out.lines().nth(1).unwrap().ends_with(",true"));
    }

    #[test]
    fn error_probs_swap_and_nan() {
        let dir = tempfile::tempdir().unwrap();
        let swap = dir.path().join("swap.json");
        AttackMatrix::swap(3, 1, 2).unwrap().write_file(&swap).unwrap();
        let (code, out, _) = run_capture(&["error-probs", "--attack", swap.to_str().unwrap()]);
        assert_eq!(code, 0);
        let rows: Vec<Vec<&str>> = out.lines().skip(1).map(|l| l.split(',').collect()).collect();
        assert_eq!(&rows[0][..4], ["2", "0.333333333333", "0", "0.333333333333"]);
        assert_eq!(&rows[1][..4], ["3", "0.333333333333", "0.166666666667", "0"]);

        let nan = dir.path().join("nan.json");
        std::fs::write(&nan, r#"{"n": 2, "entries": [[1,0],[0,0],[0,0],[NaN,0]]}"#).unwrap();
        let (code, out, err) = run_capture(&["error-probs", "--attack", nan.to_str().unwrap()]);
        assert_eq!(code, EXIT_VALIDATION);
        assert!(out.is_empty());
        assert!(err.contains("parse error at line 1"), "{err}");

        let (code, _, _) = run_capture(&["error-probs", "--attack", swap.to_str().unwrap(), "--n", "4"]);
        assert_eq!(code, EXIT_VALIDATION);
    }

    #[test]
    fn simulate_identity_csv_and_out_file() {
        let dir = tempfile::tempdir().unwrap();
        let out_path = dir.path().join("sim.csv");
        let (code, out, err) = run_capture(&[
            "simulate",
            "--kind",
            "identity",
            "--blocks",
            "10000",
            "--repetitions",
            "0",
            "--out",
            out_path.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{err}");
        assert!(out.is_empty());
        let table = std::fs::read_to_string(&out_path).unwrap();
        for line in table.lines().skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            assert_eq!((f[2], f[3]), ("0", "0"));
        }
    }

    #[test]
    fn simulate_rejects_nonphysical_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("big.json");
        std::fs::write(&path, r#"{"n": 2, "entries": [[2,0],[0,0],[0,0],[1,0]]}"#).unwrap();
        let (code, _, err) = run_capture(&["simulate", "--attack", path.to_str().unwrap()]);
        assert_eq!(code, EXIT_VALIDATION);
        assert!(err.contains("configuration error"), "{err}");
    }
}
