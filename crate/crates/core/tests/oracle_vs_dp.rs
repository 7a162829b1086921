use josephus_core::oracle::{oracle_distribution, oracle_exact};
use josephus_core::rule::{ratio, ExactRule, Rule};
use josephus_core::survival_dp::{distribution, exact_dp_distribution, r2_distribution};
use josephus_core::montecarlo::empirical_distribution;
use num_rational::BigRational;

const TOL: f64 = 1e-12;

fn quarter_grid() -> Vec<(i64, i64)> {
    // {0, 1/4, 1/2, 3/4, 1} plus interior points off the dyadic grid
    vec![(0, 4), (1, 4), (2, 4), (3, 4), (4, 4), (1, 7), (3, 11), (5, 9), (13, 17), (2, 3)]
}

fn check(exact: &ExactRule, n: usize) {
    let oracle = oracle_distribution(exact, n).unwrap();
    let dp = distribution(&exact.to_float(), n).unwrap();
    let diff = oracle.max_abs_diff(&dp);
    assert!(diff <= TOL, "{} N = {n}: max diff {diff:e}", exact.to_float());
}

#[test]
fn one_coin_rules_match_oracle() {
    for (a, b) in quarter_grid() {
        let p = ratio(a, b).unwrap();
        for n in 3..=13 {
            check(&ExactRule::r1(p.clone()).unwrap(), n);
            check(&ExactRule::r2(p.clone()).unwrap(), n);
        }
    }
}

#[test]
fn r3_matches_oracle() {
    let grid = quarter_grid();
    for &(a, b) in &grid {
        for &(c, d) in &grid[..6] {
            let rule = ExactRule::r3(ratio(a, b).unwrap(), ratio(c, d).unwrap()).unwrap();
            for n in 3..=10 {
                check(&rule, n);
            }
        }
    }
}

#[test]
fn r3_two_coin_example_at_ten() {
    let rule = ExactRule::r3(ratio(3, 10).unwrap(), ratio(7, 10).unwrap()).unwrap();
    check(&rule, 10);
}

#[test]
fn r2_example_at_ten() {
    let rule = ExactRule::r2(ratio(2, 5).unwrap()).unwrap();
    let oracle = oracle_distribution(&rule, 10).unwrap();
    let dp = r2_distribution(10, 0.4).unwrap();
    assert!(oracle.max_abs_diff(&dp) <= TOL);
}

#[test]
fn exact_dp_equals_oracle_exactly() {
    let rules = [
        ExactRule::r1(ratio(2, 7).unwrap()).unwrap(),
        ExactRule::r2(ratio(5, 8).unwrap()).unwrap(),
        ExactRule::r3(ratio(1, 3).unwrap(), ratio(4, 5).unwrap()).unwrap(),
    ];
    for rule in rules {
        for n in 3..=9 {
            let a: Vec<BigRational> = oracle_exact(&rule, n).unwrap();
            let b = exact_dp_distribution(&rule, n).unwrap();
            assert_eq!(a, b, "{rule:?} N = {n}");
        }
    }
}

#[test]
fn rules_coincide_when_unbiased() {
    for n in 3..400 {
        let a = distribution(&Rule::R1 { p: 0.5 }, n).unwrap();
        let b = distribution(&Rule::R2 { p: 0.5 }, n).unwrap();
        assert!(a.max_abs_diff(&b) <= TOL, "N = {n}");
    }
}

/// Monte Carlo against the exact DP at N = 50: every label within five
/// binomial standard errors.
#[test]
fn monte_carlo_tracks_dp() {
    let samples = 1_000_000u64;
    for rule in [Rule::R1 { p: 0.5 }, Rule::R3 { p: 0.3, q: 0.6 }] {
        let exact = distribution(&rule, 50).unwrap();
        let mc = empirical_distribution(&rule, 50, samples, 2024).unwrap();
        for (n, (&e, &m)) in exact.probs.iter().zip(&mc.probs).enumerate() {
            let se = (e * (1.0 - e) / samples as f64).sqrt();
            assert!(
                (e - m).abs() <= 5.0 * se + 1e-12,
                "{rule} label {n}: exact {e} vs mc {m} (se {se})"
            );
        }
    }
}
