use std::f64::consts::PI;

use josephus_core::analysis::{expectation_functional, MomentRecord};
use josephus_core::deterministic::{
    survivor_binary_rotation, survivor_closed_form, survivor_recurrence,
};
use josephus_core::montecarlo::sample_survivor;
use josephus_core::process::{Coin, ProcessState};
use josephus_core::survival_dp::{distribution, r1_distribution, r2_distribution};
use josephus_core::Rule;
use proptest::prelude::*;

const TOL: f64 = 1e-12;

fn any_rule() -> impl Strategy<Value = Rule> {
    prop_oneof![
        Just(Rule::Deterministic),
        (0.0..=1.0f64).prop_map(|p| Rule::R1 { p }),
        (0.0..=1.0f64).prop_map(|p| Rule::R2 { p }),
        (0.0..=1.0f64, 0.0..=1.0f64).prop_map(|(p, q)| Rule::R3 { p, q }),
    ]
}

proptest! {
    #[test]
    fn survivor_methods_agree(n in 1u64..(1 << 40)) {
        let r = survivor_recurrence(n).unwrap();
        prop_assert_eq!(r, survivor_closed_form(n).unwrap());
        prop_assert_eq!(r, survivor_binary_rotation(n).unwrap());
        prop_assert!(r.survivor_one_based % 2 == 1);
        prop_assert!(1 <= r.survivor_one_based && r.survivor_one_based <= n);
    }

    #[test]
    fn distributions_are_stochastic(rule in any_rule(), n in 3usize..400) {
        let d = distribution(&rule, n).unwrap();
        prop_assert_eq!(d.len(), n);
        prop_assert!(d.probs.iter().all(|&g| g >= 0.0));
        prop_assert!((d.total() - 1.0).abs() <= TOL);
    }

    #[test]
    fn expectation_is_bounded_by_sup(
        rule in any_rule(),
        n in 3usize..300,
        freq in 1u32..6,
        phase in 0.0..(2.0 * PI),
        scale in -5.0..5.0f64,
    ) {
        let d = distribution(&rule, n).unwrap();
        let e = expectation_functional(&d, |x| scale * (2.0 * PI * freq as f64 * x + phase).sin());
        prop_assert!(e.abs() <= scale.abs() + TOL);
    }

    #[test]
    fn unbiased_rule_is_mirror_symmetric(n in 3usize..4000) {
        let d = r1_distribution(n, 0.5).unwrap();
        for k in 0..n {
            prop_assert!((d.probs[k] - d.probs[(n - k) % n]).abs() <= TOL);
        }
        let mean: f64 = d.probs.iter().enumerate().map(|(k, g)| k as f64 / n as f64 * g).sum();
        prop_assert!((0.5 - mean - d.probs[0] / 2.0).abs() <= TOL);
    }

    #[test]
    fn variance_identity(rule in any_rule(), n in 3usize..500) {
        let d = distribution(&rule, n).unwrap();
        let m = MomentRecord::from_probs(&d.probs);
        prop_assert!((m.variance - (m.phi2 - m.phi1 * m.phi1)).abs() <= TOL);
    }

    #[test]
    fn one_coin_rules_coincide_when_unbiased(n in 3usize..1000) {
        let a = r1_distribution(n, 0.5).unwrap();
        let b = r2_distribution(n, 0.5).unwrap();
        prop_assert!(a.max_abs_diff(&b) <= TOL);
    }

    #[test]
    fn r1_at_one_is_the_classical_survivor(n in 3usize..3000) {
        let d = r1_distribution(n, 1.0).unwrap();
        let a = survivor_closed_form(n as u64).unwrap().survivor_zero_based as usize;
        prop_assert_eq!(d.argmax(), a);
        prop_assert!((d.probs[a] - 1.0).abs() <= TOL);
        prop_assert!((d.total() - 1.0).abs() <= TOL);
    }

    #[test]
    fn each_step_removes_exactly_one(rule in any_rule(), n in 2usize..60, bits in prop::collection::vec(any::<u64>(), 120)) {
        let mut s = ProcessState::new(rule, n).unwrap();
        let is_r3 = matches!(rule, Rule::R3 { .. });
        let (p, q) = (rule.p().unwrap_or(1.0), rule.q().unwrap_or(1.0));
        for (step, pair) in bits.chunks(2).take(n - 1).enumerate() {
            let victim_coin = Coin::from_bits(pair[0], p);
            let knife_coin = is_r3.then(|| Coin::from_bits(pair[1], q));
            let victim = s.step(victim_coin, knife_coin).unwrap();
            prop_assert!(!s.is_alive(victim));
            prop_assert_eq!(s.alive_count(), n - 1 - step);
        }
        let survivor = s.survivor();
        prop_assert!(survivor.is_some_and(|a| a < n));
    }

    #[test]
    fn sampling_is_a_function_of_the_seed(rule in any_rule(), n in 2usize..300, seed in any::<u64>()) {
        let a = sample_survivor(&rule, n, seed).unwrap();
        prop_assert_eq!(a, sample_survivor(&rule, n, seed).unwrap());
        prop_assert!(a.survivor < n);
        prop_assert_eq!(a.normalized_position, a.survivor as f64 / n as f64);
    }
}

#[test]
fn survivor_ratio_has_two_accumulation_points() {
    for m in 2..40 {
        let n = 1u64 << m;
        assert_eq!(survivor_recurrence(n).unwrap().survivor_zero_based, 0);
        let n = n + (n >> 1);
        let a = survivor_recurrence(n).unwrap().survivor_zero_based;
        assert!(a as f64 / n as f64 >= 0.5, "N = {n}: a_N = {a}");
    }
}
