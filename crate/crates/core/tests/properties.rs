use dps_qkd::error_probs::{error_table, BOUND_FACTOR};
use dps_qkd::montecarlo::{simulate, Schedule, SimConfig};
use dps_qkd::state::{build_entangled_state, filter_probabilities, C64};
use dps_qkd::AttackMatrix;
use proptest::prelude::*;

fn attack(n: usize) -> impl Strategy<Value = AttackMatrix> {
    proptest::collection::vec(-1.0f64..1.0, 2 * n * n).prop_map(move |p| AttackMatrix::from_params(n, &p).unwrap())
}

fn physical(n: usize) -> impl Strategy<Value = AttackMatrix> {
    attack(n).prop_filter_map("nonzero", |e| {
        let s = e.largest_singular_value();
        (s > 1e-6).then(|| e.scaled(C64::new(1.0 / s, 0.0)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn filter_outcomes_account_for_received_norm(e in (2usize..6).prop_flat_map(attack)) {
        let n = e.n();
        let received = build_entangled_state(n).unwrap().attack(&e).unwrap().norm_sqr();
        let total: f64 = filter_probabilities(&e).unwrap().iter().sum();
        prop_assert!((total - received).abs() <= 1e-10 * (1.0 + received));
    }

    #[test]
    fn slot_errors_never_exceed_occupancy(e in (2usize..6).prop_flat_map(attack)) {
        let t = error_table(&e).unwrap();
        for s in &t.slots {
            prop_assert!(s.bit <= s.occupancy + 1e-12);
            prop_assert!(s.phase <= s.occupancy + 1e-12);
        }
    }

    #[test]
    fn bound_holds_for_random_attacks(e in (3usize..7).prop_flat_map(attack)) {
        let t = error_table(&e).unwrap();
        prop_assert!(BOUND_FACTOR * t.total_bit - t.total_phase >= -1e-12 * e.frobenius_norm_sqr());
    }

    #[test]
    fn simulation_conserves_blocks(e in (2usize..5).prop_flat_map(physical), blocks in 1usize..3000, seed: u64) {
        let r = simulate(&SimConfig::new(Schedule::Constant(e), blocks, seed)).unwrap();
        prop_assert_eq!(r.inconclusive + r.conclusive(), blocks as u64);
        prop_assert_eq!(r.records.len(), blocks);
        for s in &r.slots {
            prop_assert!(s.bit_errors <= s.detections && s.phase_errors <= s.detections);
        }
    }
}
