//! Exhaustive enumeration of every coin sequence, in exact arithmetic.
//!
//! Paths are advanced one elimination at a time through
//! [`ProcessState::step`]. Paths that reach the same `(alive set, holder,
//! direction)` are merged, their weights summed. Weights are kept as integer
//! numerators over the common denominator `(den_p * den_q)^steps`.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::distribution::{Method, SurvivalDistribution};
use crate::error::{domain, Error, Result};
use crate::process::{Coin, Direction, ProcessState};
use crate::rule::ExactRule;

/// Largest `N` enumerated for the one-coin rules.
pub const ORACLE_MAX_N: usize = 16;
/// Largest `N` enumerated for R3 (two coins per step).
pub const ORACLE_MAX_N_R3: usize = 12;

type Key = (u64, u8, Direction);

/// `num / den` split into its non-negative numerator and denominator.
fn parts(x: &BigRational) -> (BigUint, BigUint) {
    let r = x.reduced();
    let num = r.numer().abs().to_biguint().expect("non-negative");
    let den = r.denom().abs().to_biguint().expect("positive");
    (num, den)
}

/// Branches of one step: (victim coin, knife coin, numerator factor).
fn branches(rule: &ExactRule) -> (Vec<(Coin, Option<Coin>, BigUint)>, BigUint) {
    use Coin::{Heads, Tails};
    match rule {
        ExactRule::Deterministic => (vec![(Heads, None, BigUint::one())], BigUint::one()),
        ExactRule::R1 { p } | ExactRule::R2 { p } => {
            let (a, b) = parts(p);
            let not_a = &b - &a;
            (vec![(Heads, None, a), (Tails, None, not_a)], b)
        }
        ExactRule::R3 { p, q } => {
            let (a, b) = parts(p);
            let (c, d) = parts(q);
            let (na, nc) = (&b - &a, &d - &c);
            let out = vec![
                (Heads, Some(Heads), &a * &c),
                (Heads, Some(Tails), &a * &nc),
                (Tails, Some(Heads), &na * &c),
                (Tails, Some(Tails), &na * &nc),
            ];
            (out, b * d)
        }
    }
}

fn key(s: &ProcessState) -> Key {
    (s.alive_mask(), s.knife() as u8, s.direction())
}

fn labels(mask: u64) -> Vec<usize> {
    (0..64).filter(|l| mask >> l & 1 == 1).collect()
}

/// Exact survival probabilities for `N >= 2`.
pub fn oracle_exact(rule: &ExactRule, n: usize) -> Result<Vec<BigRational>> {
    rule.validate()?;
    let cap = match rule {
        ExactRule::R3 { .. } => ORACLE_MAX_N_R3,
        _ => ORACLE_MAX_N,
    };
    if n > cap {
        return Err(Error::EnumerationCap {
            rule: rule.to_float().name().to_string(),
            n,
            cap,
        });
    }
    if n < 2 {
        return domain(format!("oracle needs N >= 2, got {n}"));
    }
    let float_rule = rule.to_float();
    let (steps, den) = branches(rule);

    let start = ProcessState::new(float_rule, n)?;
    let mut level: HashMap<Key, BigUint> = HashMap::new();
    level.insert(key(&start), BigUint::one());
    for _ in 1..n {
        let mut next: HashMap<Key, BigUint> = HashMap::with_capacity(level.len() * 2);
        for ((mask, knife, dir), weight) in level {
            let state = ProcessState::from_parts(float_rule, n, &labels(mask), knife as usize, dir)?;
            for (vc, kc, factor) in &steps {
                if factor.is_zero() {
                    continue;
                }
                let mut s = state.clone();
                s.step(*vc, *kc)?;
                *next.entry(key(&s)).or_default() += &weight * factor;
            }
        }
        level = next;
    }

    let total_den = BigInt::from(den.pow((n - 1) as u32));
    let mut probs = vec![BigRational::zero(); n];
    for ((mask, knife, _), weight) in level {
        debug_assert_eq!(mask.count_ones(), 1);
        let w = BigRational::new(BigInt::from(weight), total_den.clone());
        probs[knife as usize] += w;
    }
    Ok(probs)
}

/// [`oracle_exact`] rounded to doubles.
pub fn oracle_distribution(rule: &ExactRule, n: usize) -> Result<SurvivalDistribution> {
    let exact = oracle_exact(rule, n)?;
    let probs = exact
        .iter()
        .map(|x| x.to_f64().expect("probability fits in f64"))
        .collect::<Vec<_>>();
    Ok(SurvivalDistribution {
        rule: rule.to_float(),
        n_participants: n,
        probs,
        method: Method::ExactOracle,
        mc_samples: None,
    })
}

/// `(numerator, denominator)` of each probability in lowest terms.
pub fn as_fractions(probs: &[BigRational]) -> Vec<(BigInt, BigInt)> {
    probs
        .iter()
        .map(|x| {
            let g = x.numer().gcd(x.denom());
            if g.is_zero() {
                (BigInt::zero(), BigInt::one())
            } else {
                (x.numer() / &g, x.denom() / &g)
            }
        })
        .collect()
}
