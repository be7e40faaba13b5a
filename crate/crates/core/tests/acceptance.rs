//! Acceptance criteria. Each test prints one PASS/FAIL line; run with
//! `cargo test --test acceptance -- --nocapture` to see them.

use std::process::Command;

use dps_qkd::cli;
use dps_qkd::error_probs::{error_table, lemma_gap, oracle_error_table};
use dps_qkd::montecarlo::{azuma_check, sift_and_estimate, simulate, Schedule, SiftOutcome, SimConfig};
use dps_qkd::rates::{cutoff_loss, key_rate, loss_to_eta, tolerable_ber, ChannelParams, Curve, Protocol};
use dps_qkd::search::{optimize_attack, sample_random_attacks, Objective, SearchConfig};
use dps_qkd::state::{bell_fidelity, conditional_pair_state, filter_probabilities, PairOutcome};
use dps_qkd::{AttackMatrix, BOUND_FACTOR};
use num_complex::Complex64;

const ORACLE_TOL: f64 = 1e-10;
const ORACLE_SAMPLES: usize = 1000;
const SLACK_TOL: f64 = 1e-12;
const CAMPAIGN_SAMPLES: usize = 100_000;
const CAMPAIGN_RESTARTS: usize = 50;
const THRESHOLD_TOL: f64 = 5e-4;
const IDEAL_TOL: f64 = 1e-12;
const MODERATE_LOSS_DB: f64 = 20.0;
const MC_BLOCKS: usize = 1_000_000;
const MC_SIGMAS: f64 = 5.0;
const AZUMA_BLOCKS: usize = 10_000;
const AZUMA_EPSILON: f64 = 0.05;
const AZUMA_REPETITIONS: usize = 200;
const LEMMA_STEP: f64 = 1e-5;
const LEMMA_ARGMIN_TOL: f64 = 1e-3;
const LEMMA_GAP_TOL: f64 = 1e-6;

fn report(id: &str, name: &str, pass: bool, detail: &str) {
    println!("{id} {name:<28} {} {detail}", if pass { "PASS" } else { "FAIL" });
}

#[test]
fn c1_closed_form_matches_state_vector() {
    let mut worst = 0.0f64;
    for n in 3..=8 {
        for e in sample_random_attacks(n, 100 + n as u64, ORACLE_SAMPLES) {
            let closed = error_table(&e).unwrap();
            let oracle = oracle_error_table(&e).unwrap();
            worst = worst.max(closed.max_discrepancy(&oracle));
        }
    }
    let pass = worst <= ORACLE_TOL;
    report("C1", "oracle equivalence", pass, &format!("max |closed - oracle| = {worst:.3e} over n=3..8"));
    assert!(pass);
}

#[test]
fn c2_bound_campaign() {
    let mut lines = Vec::new();
    let mut pass = true;
    for n in 3..=6 {
        let mut cfg = SearchConfig::new(n, Objective::MinSlack);
        cfg.samples = CAMPAIGN_SAMPLES;
        cfg.restarts = CAMPAIGN_RESTARTS;
        cfg.seed = 2024 + n as u64;
        let rep = optimize_attack(&cfg).unwrap();
        pass &= rep.min_slack() >= -SLACK_TOL && !rep.counterexample;

        let mut ratio_cfg = SearchConfig::new(n, Objective::MaxRatio);
        ratio_cfg.samples = 5_000;
        ratio_cfg.restarts = 8;
        ratio_cfg.seed = cfg.seed;
        let ratio = optimize_attack(&ratio_cfg).unwrap();
        pass &= ratio.best_ratio <= BOUND_FACTOR * (1.0 + 1e-9);
        lines.push(format!(
            "n={n}: min slack {:+.2e}, sup ratio {:.9}",
            rep.min_slack(),
            ratio.best_ratio
        ));
    }

    let mut witness = SearchConfig::new(2, Objective::MinSlack);
    witness.samples = 10_000;
    witness.restarts = 4;
    let w = optimize_attack(&witness).unwrap();
    pass &= w.counterexample && w.min_slack() < 0.0;
    lines.push(format!("n=2 witness slack {:+.4}", w.min_slack()));

    report("C2", "bound campaign", pass, &format!("(3+√5 = {BOUND_FACTOR:.9})"));
    for l in &lines {
        println!("     {l}");
    }
    assert!(pass);
}

#[test]
fn c3_thresholds() {
    let expected = [
        (Protocol::Bb84, 0.1100),
        (Protocol::DpsIndividual, 0.0609),
        (Protocol::DpsUnconditional, 0.0412),
    ];
    let got: Vec<f64> = expected.iter().map(|&(p, _)| tolerable_ber(p)).collect();
    let pass = expected.iter().zip(&got).all(|(&(_, e), g)| (g - e).abs() <= THRESHOLD_TOL);
    report(
        "C3",
        "tolerable bit error rates",
        pass,
        &format!("BB84 {:.5}, IND {:.5}, DPS {:.5}", got[0], got[1], got[2]),
    );
    assert!(pass);
}

#[test]
fn c4_ideal_channel() {
    let (mut fid_err, mut prob_err, mut conc_err) = (0.0f64, 0.0f64, 0.0f64);
    for n in 2..=10 {
        let e = AttackMatrix::identity(n);
        for l in 2..=n {
            match conditional_pair_state(&e, l).unwrap() {
                PairOutcome::Occupied { density, .. } => fid_err = fid_err.max((bell_fidelity(&density) - 1.0).abs()),
                PairOutcome::Unoccupied => fid_err = f64::INFINITY,
            }
        }
        for t in [error_table(&e).unwrap(), oracle_error_table(&e).unwrap()] {
            for s in &t.slots {
                prob_err = prob_err.max(s.bit.abs()).max(s.phase.abs());
            }
        }
        let conclusive: f64 = filter_probabilities(&e).unwrap()[1..].iter().sum();
        conc_err = conc_err.max((conclusive - (n - 1) as f64 / n as f64).abs());
    }
    let pass = fid_err <= IDEAL_TOL && prob_err <= IDEAL_TOL && conc_err <= IDEAL_TOL;
    report(
        "C4",
        "ideal channel",
        pass,
        &format!("|F-1| {fid_err:.1e}, max p {prob_err:.1e}, |P_c-(n-1)/n| {conc_err:.1e}"),
    );
    assert!(pass);
}

#[test]
fn c5_figure_two_orderings() {
    let eta = loss_to_eta(MODERATE_LOSS_DB);
    let rate = |p: Protocol, n: usize| key_rate(p, &ChannelParams::with_defaults(eta, n).unwrap()).unwrap();
    let template = ChannelParams::with_defaults(1.0, 3).unwrap();
    let cutoff = |protocol: Protocol, n: usize| {
        cutoff_loss(Curve { protocol, n }, &template, 1.0, 200.0).unwrap().unwrap()
    };

    let mut pass = true;
    let mut notes = Vec::new();
    for n in [3, 10] {
        let (b, i, d) = (
            rate(Protocol::Bb84, n).rate,
            rate(Protocol::DpsIndividual, n).rate,
            rate(Protocol::DpsUnconditional, n).rate,
        );
        pass &= d > 0.0 && b > i && i > d;
        notes.push(format!("n={n} @{MODERATE_LOSS_DB} dB: BB84 {b:.3e} > IND {i:.3e} > DPS {d:.3e}"));
    }

    let (r3, r10) = (rate(Protocol::DpsUnconditional, 3), rate(Protocol::DpsUnconditional, 10));
    let (c3, c10) = (cutoff(Protocol::DpsUnconditional, 3), cutoff(Protocol::DpsUnconditional, 10));
    let c_bb84 = cutoff(Protocol::Bb84, 1);
    pass &= r3.rate > r10.rate && c3 > c10 && r10.ee > r3.ee;
    pass &= [c3, c10, cutoff(Protocol::DpsIndividual, 3), cutoff(Protocol::DpsIndividual, 10)]
        .iter()
        .all(|&c| c_bb84 > c);
    notes.push(format!("DPS rate n=3 {:.3e} > n=10 {:.3e}", r3.rate, r10.rate));
    notes.push(format!("cutoff BB84 {c_bb84:.2} dB, DPS n=3 {c3:.2} dB > n=10 {c10:.2} dB"));
    notes.push(format!("EE n=10 {:.3e} > n=3 {:.3e}", r10.ee, r3.ee));

    report("C5", "key-rate orderings", pass, "");
    for n in &notes {
        println!("     {n}");
    }
    assert!(pass);
}

#[test]
fn c6_monte_carlo_agreement() {
    let swap = AttackMatrix::swap(3, 1, 2).unwrap();
    let config = SimConfig::new(Schedule::Constant(swap), MC_BLOCKS, 7);
    let record = simulate(&config).unwrap();
    let r = record.rates();
    let bit_ok = (r.bit - 1.0 / 6.0).abs() <= MC_SIGMAS * r.sigma_bit;
    let phase_ok = (r.phase - 1.0 / 3.0).abs() <= MC_SIGMAS * r.sigma_phase;

    let sift_ok = match sift_and_estimate(&record, 0.5, 7).unwrap() {
        SiftOutcome::Estimated(e) => e.gap.unwrap() <= e.gap_bound.unwrap(),
        SiftOutcome::Empty => false,
    };

    let small = SimConfig { blocks: AZUMA_BLOCKS, ..config };
    let azuma = azuma_check(&small, AZUMA_EPSILON, AZUMA_REPETITIONS).unwrap();
    let worst = azuma.rows.iter().map(|row| row.fraction).fold(0.0, f64::max);

    let pass = bit_ok && phase_ok && sift_ok && azuma.pass;
    report(
        "C6",
        "Monte Carlo agreement",
        pass,
        &format!(
            "e_b {:.5} (1/6 ± {:.5}), e_p {:.5} (1/3 ± {:.5}), violation fraction {worst} ≤ {:.3e}",
            r.bit,
            MC_SIGMAS * r.sigma_bit,
            r.phase,
            MC_SIGMAS * r.sigma_phase,
            azuma.bound + azuma.slack
        ),
    );
    assert!(pass);
}

#[test]
fn c7_lemma_tightness() {
    let a = Complex64::new(1.0, 0.0);
    let steps = (4.0 / LEMMA_STEP).round() as usize;
    let (t_min, gap) = (0..=steps)
        .map(|i| {
            let t = i as f64 * LEMMA_STEP;
            (t, lemma_gap(a, Complex64::new(t, 0.0)))
        })
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .unwrap();
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    let relative = gap / (1.0 + t_min * t_min);
    let pass = (t_min - golden).abs() <= LEMMA_ARGMIN_TOL && relative.abs() <= LEMMA_GAP_TOL;
    report(
        "C7",
        "lemma tightness",
        pass,
        &format!("argmin b/a = {t_min:.5} (golden {golden:.5}), relative gap {relative:.2e}"),
    );
    assert!(pass);
}

fn run_in_process(args: &[&str]) -> (i32, Vec<u8>) {
    let mut full = vec!["dpsqkd"];
    full.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli::run(full, &mut out, &mut err);
    (code, out)
}

fn run_binary(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_dpsqkd")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), out.stdout)
}

#[test]
fn c8_determinism() {
    let runs: [&[&str]; 4] = [
        &["verify-bound", "--n", "3", "--samples", "20000", "--optimize", "--restarts", "4", "--seed", "5"],
        &["verify-bound", "--n", "4", "--samples", "5000", "--format", "text", "--seed", "9"],
        &["simulate", "--kind", "swap", "--blocks", "200000", "--repetitions", "10", "--seed", "7"],
        &["simulate", "--kind", "swap,identity", "--schedule", "feedback", "--blocks", "50000", "--format", "text", "--seed", "3"],
    ];
    let mut pass = true;
    for args in runs {
        let first = run_in_process(args);
        let second = run_in_process(args);
        let binary = run_binary(args);
        pass &= first.0 == 0 && !first.1.is_empty() && first == second && first == binary;
    }
    report("C8", "determinism", pass, "verify-bound and simulate, in-process and via the binary");
    assert!(pass);
}
