//! Exact survival distributions by relabelling recursions on `N`.
//!
//! Every recursion conditions on the first elimination of a round with `N`
//! participants, relabels the `N - 1` survivors so that the new knife holder
//! is `0`, and reads their survival probabilities off the `(N - 1)` vector.
//! All rules start from `(0, 1 - p, p)` at `N = 3`.
//!
//! R1 relabels with a mirror when the stabbing direction flips (the new
//! round's "right" is always the current stabbing direction). R2 and R3 keep
//! the orientation of the circle. The R3 recursion is not a published one;
//! it is derived from the rule and checked against the exhaustive oracle in
//! [`crate::oracle`].

use std::ops::{Add, Mul, Sub};

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::deterministic::survivor_closed_form;
use crate::distribution::SurvivalDistribution;
use crate::error::{domain, Result};
use crate::rule::{ExactRule, Rule};

/// Largest `N` accepted by [`exact_dp_distribution`].
pub const EXACT_DP_MAX_N: usize = 64;

/// Scalars the recursions can run over: `f64` and exact rationals.
pub trait Weight:
    Clone + Zero + One + for<'a> Add<&'a Self, Output = Self> + Sub<Output = Self>
where
    for<'a> &'a Self: Mul<&'a Self, Output = Self>,
{
}

impl Weight for f64 {}
impl Weight for BigRational {}

fn check_n(n: usize) -> Result<()> {
    if n < 3 {
        return domain(format!("N = {n}: the recursions start at N = 3"));
    }
    Ok(())
}

fn base<T: Weight>(p: &T) -> Vec<T>
where
    for<'a> &'a T: Mul<&'a T, Output = T>,
{
    vec![T::zero(), T::one() - p.clone(), p.clone()]
}

/// One step of the four-case R1 recursion: `prev` has `N - 1` entries,
/// `out` receives `N`.
fn r1_step<T: Weight>(prev: &[T], p: &T, q: &T, out: &mut Vec<T>)
where
    for<'a> &'a T: Mul<&'a T, Output = T>,
{
    let m = prev.len();
    let n = m + 1;
    out.clear();
    out.resize(n, T::zero());
    out[0] = prev[m - 1].clone();
    out[1] = q * &prev[m - 2];
    out[n - 1] = p * &prev[m - 2];
    for k in 2..n - 1 {
        out[k] = (p * &prev[(k - 2) % m]) + &(q * &prev[(n - k - 2) % m]);
    }
}

/// R1 at `p = 1/2`, where `g(n) = g(-n)` lets us fill only half the row.
fn r1_unbiased_step(prev: &[f64], out: &mut Vec<f64>) {
    let m = prev.len();
    let n = m + 1;
    out.clear();
    out.resize(n, 0.0);
    out[0] = prev[m - 1];
    out[1] = 0.5 * prev[m - 2];
    out[n - 1] = out[1];
    for k in 2..=n / 2 {
        let v = 0.5 * (prev[k - 2] + prev[(k + 1) % m]);
        out[k] = v;
        out[n - k] = v;
    }
}

/// R2. The `n = 0` branch reads `f_{N-1}(1)`: after a leftward stab the
/// holder `N - 2` becomes `0` and participant `0` becomes `1`.
fn r2_step<T: Weight>(prev: &[T], p: &T, q: &T, out: &mut Vec<T>)
where
    for<'a> &'a T: Mul<&'a T, Output = T>,
{
    let m = prev.len();
    let n = m + 1;
    out.clear();
    out.resize(n, T::zero());
    out[0] = (p * &prev[m - 1]) + &(q * &prev[1]);
    out[1] = q * &prev[2 % m];
    out[n - 1] = p * &prev[m - 2];
    for k in 2..n - 1 {
        out[k] = (p * &prev[k - 2]) + &(q * &prev[(k + 1) % m]);
    }
}

/// R3. Four branches (victim side x knife side); in each, the survivors are
/// listed counterclockwise from the new holder.
fn r3_step<T: Weight>(prev: &[T], p: &T, q: &T, out: &mut Vec<T>)
where
    for<'a> &'a T: Mul<&'a T, Output = T>,
{
    let m = prev.len();
    let n = m + 1;
    let one = T::one();
    let p_bar = one.clone() - p.clone();
    let q_bar = one - q.clone();
    let w_rr = p * q;
    let w_rl = p * &q_bar;
    let w_lr = &p_bar * q;
    let w_ll = &p_bar * &q_bar;

    out.clear();
    out.resize(n, T::zero());
    for (k, slot) in out.iter_mut().enumerate() {
        let mut acc = T::zero();
        if k != 1 {
            // right victim, knife to 2
            let rr = if k == 0 { n - 2 } else { k - 2 };
            // right victim, knife to N-1
            let rl = match k {
                _ if k == n - 1 => 0,
                0 => 1,
                _ => k,
            };
            acc = acc + &(&w_rr * &prev[rr]) + &(&w_rl * &prev[rl]);
        }
        if k != n - 1 {
            // left victim, knife to 1
            let lr = if k == 0 { n - 2 } else { k - 1 };
            // left victim, knife to N-2
            let ll = if k == n - 2 { 0 } else { k + 1 };
            acc = acc + &(&w_lr * &prev[lr]) + &(&w_ll * &prev[ll]);
        }
        *slot = acc;
    }
}

/// Runs `step` from the `N = 3` base to `n_max`, handing each row to `visit`.
/// Only two rows are alive at any time.
fn iterate<T, S, V>(p: &T, n_max: usize, mut step: S, mut visit: V)
where
    T: Weight,
    for<'a> &'a T: Mul<&'a T, Output = T>,
    S: FnMut(&[T], &mut Vec<T>),
    V: FnMut(usize, &[T]),
{
    let mut row = base(p);
    let mut next = Vec::with_capacity(n_max);
    visit(3, &row);
    for n in 4..=n_max {
        step(&row, &mut next);
        std::mem::swap(&mut row, &mut next);
        visit(n, &row);
    }
}

fn last_row<T, S>(p: &T, n: usize, step: S) -> Vec<T>
where
    T: Weight,
    for<'a> &'a T: Mul<&'a T, Output = T>,
    S: FnMut(&[T], &mut Vec<T>),
{
    let mut out = Vec::new();
    iterate(p, n, step, |k, row| {
        if k == n {
            out = row.to_vec();
        }
    });
    out
}

fn point_mass(n: usize) -> Vec<f64> {
    let a = survivor_closed_form(n as u64)
        .expect("n >= 1")
        .survivor_zero_based as usize;
    let mut v = vec![0.0; n];
    v[a] = 1.0;
    v
}

pub fn r1_distribution(n: usize, p: f64) -> Result<SurvivalDistribution> {
    check_n(n)?;
    let rule = Rule::r1(p)?;
    let q = 1.0 - p;
    let probs = last_row(&p, n, |prev, out| r1_step(prev, &p, &q, out));
    Ok(SurvivalDistribution::exact(rule, probs))
}

pub fn r1_unbiased_distribution(n: usize) -> Result<SurvivalDistribution> {
    check_n(n)?;
    let probs = last_row(&0.5, n, r1_unbiased_step);
    Ok(SurvivalDistribution::exact(Rule::R1 { p: 0.5 }, probs))
}

pub fn r2_distribution(n: usize, p: f64) -> Result<SurvivalDistribution> {
    check_n(n)?;
    let rule = Rule::r2(p)?;
    let q = 1.0 - p;
    let probs = last_row(&p, n, |prev, out| r2_step(prev, &p, &q, out));
    Ok(SurvivalDistribution::exact(rule, probs))
}

pub fn r3_distribution(n: usize, p: f64, q: f64) -> Result<SurvivalDistribution> {
    check_n(n)?;
    let rule = Rule::r3(p, q)?;
    let probs = last_row(&p, n, |prev, out| r3_step(prev, &p, &q, out));
    Ok(SurvivalDistribution::exact(rule, probs))
}

/// Exact distribution for any rule. The deterministic rule yields the point
/// mass at `a_N` and accepts every `N >= 1`; the others need `N >= 3`.
/// R1 at exactly `p = 1/2` takes the symmetric fast path.
pub fn distribution(rule: &Rule, n: usize) -> Result<SurvivalDistribution> {
    rule.validate()?;
    match *rule {
        Rule::Deterministic => {
            if n == 0 {
                return domain("N must be at least 1");
            }
            Ok(SurvivalDistribution::exact(*rule, point_mass(n)))
        }
        Rule::R1 { p } if p == 0.5 => r1_unbiased_distribution(n),
        Rule::R1 { p } => r1_distribution(n, p),
        Rule::R2 { p } => r2_distribution(n, p),
        Rule::R3 { p, q } => r3_distribution(n, p, q),
    }
}

/// Streams the rows `N = 3 ..= n_max` of the probability triangle to `visit`
/// without storing the triangle.
pub fn for_each_row<V>(rule: &Rule, n_max: usize, mut visit: V) -> Result<()>
where
    V: FnMut(usize, &[f64]),
{
    check_n(n_max)?;
    rule.validate()?;
    match *rule {
        Rule::Deterministic => {
            for n in 3..=n_max {
                visit(n, &point_mass(n));
            }
        }
        Rule::R1 { p } if p == 0.5 => iterate(&0.5, n_max, r1_unbiased_step, visit),
        Rule::R1 { p } => {
            let q = 1.0 - p;
            iterate(&p, n_max, |a, b| r1_step(a, &p, &q, b), visit)
        }
        Rule::R2 { p } => {
            let q = 1.0 - p;
            iterate(&p, n_max, |a, b| r2_step(a, &p, &q, b), visit)
        }
        Rule::R3 { p, q } => iterate(&p, n_max, |a, b| r3_step(a, &p, &q, b), visit),
    }
    Ok(())
}

/// The same recursions in exact rational arithmetic, for `3 <= N <= 64`.
pub fn exact_dp_distribution(rule: &ExactRule, n: usize) -> Result<Vec<BigRational>> {
    check_n(n)?;
    if n > EXACT_DP_MAX_N {
        return domain(format!(
            "exact rational DP is limited to N <= {EXACT_DP_MAX_N}, got {n}"
        ));
    }
    rule.validate()?;
    let probs = match rule {
        ExactRule::Deterministic => point_mass(n)
            .into_iter()
            .map(|x| if x == 1.0 { BigRational::one() } else { BigRational::zero() })
            .collect(),
        ExactRule::R1 { p } => {
            let q = BigRational::one() - p;
            last_row(p, n, |a, b| r1_step(a, p, &q, b))
        }
        ExactRule::R2 { p } => {
            let q = BigRational::one() - p;
            last_row(p, n, |a, b| r2_step(a, p, &q, b))
        }
        ExactRule::R3 { p, q } => last_row(p, n, |a, b| r3_step(a, p, q, b)),
    };
    Ok(probs)
}

/// Rounds an exact distribution to doubles.
pub fn to_f64(probs: &[BigRational]) -> Vec<f64> {
    probs
        .iter()
        .map(|x| x.to_f64().expect("probability fits in f64"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rule::ratio;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn base_case_is_exact() {
        for p in [0.0, 0.3, 0.5, 0.77, 1.0] {
            let expect = vec![0.0, 1.0 - p, p];
            assert_eq!(r1_distribution(3, p).unwrap().probs, expect);
            assert_eq!(r2_distribution(3, p).unwrap().probs, expect);
            for q in [0.0, 0.4, 1.0] {
                assert_eq!(r3_distribution(3, p, q).unwrap().probs, expect);
            }
        }
        assert_eq!(r1_unbiased_distribution(3).unwrap().probs, vec![0.0, 0.5, 0.5]);
    }

    #[test]
    fn four_participants() {
        for p in [0.0, 0.2, 0.5, 0.9, 1.0] {
            let d = r1_distribution(4, p).unwrap();
            let expect = [p, (1.0 - p) * (1.0 - p), 0.0, p * (1.0 - p)];
            assert!(close(&d.probs, &expect, 1e-15), "p = {p}: {:?}", d.probs);
        }
        assert_eq!(r1_unbiased_distribution(4).unwrap().probs, vec![0.5, 0.25, 0.0, 0.25]);
        assert_eq!(r2_distribution(4, 0.5).unwrap().probs, vec![0.5, 0.25, 0.0, 0.25]);
    }

    #[test]
    fn small_n_rejected() {
        assert!(r1_distribution(2, 0.5).is_err());
        assert!(r1_unbiased_distribution(0).is_err());
        assert!(r2_distribution(1, 0.5).is_err());
        assert!(r3_distribution(2, 0.5, 0.5).is_err());
        assert!(r1_distribution(10, 1.2).is_err());
        assert!(distribution(&Rule::Deterministic, 0).is_err());
        assert!(exact_dp_distribution(&ExactRule::Deterministic, 65).is_err());
    }

    #[test]
    fn unbiased_fast_path_matches_general() {
        for n in 3..300 {
            let a = r1_unbiased_distribution(n).unwrap();
            let b = r1_distribution(n, 0.5).unwrap();
            assert!(a.max_abs_diff(&b) <= 1e-12, "N = {n}");
        }
    }

    #[test]
    fn r1_at_one_is_classical() {
        for n in 3..200 {
            let d = r1_distribution(n, 1.0).unwrap();
            let a = survivor_closed_form(n as u64).unwrap().survivor_zero_based as usize;
            assert_eq!(d.argmax(), a);
            assert_eq!(d.probs[a], 1.0);
        }
    }

    #[test]
    fn r3_fully_deterministic() {
        for n in 3..200 {
            let d = r3_distribution(n, 1.0, 1.0).unwrap();
            let a = survivor_closed_form(n as u64).unwrap().survivor_zero_based as usize;
            assert_eq!(d.probs[a], 1.0, "N = {n}");
        }
    }

    #[test]
    fn r3_unbiased_is_mirror_symmetric() {
        for n in 3..120 {
            let d = r3_distribution(n, 0.5, 0.5).unwrap();
            assert!(d.mirror_asymmetry() <= 1e-15, "N = {n}");
        }
    }

    #[test]
    fn rows_stream_in_order() {
        let mut seen = Vec::new();
        for_each_row(&Rule::R2 { p: 0.3 }, 40, |n, row| {
            assert_eq!(row.len(), n);
            seen.push(n);
            if n == 40 {
                assert_eq!(row, &r2_distribution(40, 0.3).unwrap().probs[..]);
            }
        })
        .unwrap();
        assert_eq!(seen, (3..=40).collect::<Vec<_>>());
    }

    #[test]
    fn exact_dp_agrees_with_float_dp() {
        let p = ratio(3, 10).unwrap();
        let q = ratio(7, 10).unwrap();
        let rules = [
            (ExactRule::r1(p.clone()).unwrap(), Rule::R1 { p: 0.3 }),
            (ExactRule::r2(p.clone()).unwrap(), Rule::R2 { p: 0.3 }),
            (ExactRule::r3(p, q).unwrap(), Rule::R3 { p: 0.3, q: 0.7 }),
        ];
        for (exact, float) in rules {
            for n in [3, 4, 10, 33, 64] {
                let e = exact_dp_distribution(&exact, n).unwrap();
                assert_eq!(e.iter().sum::<BigRational>(), BigRational::one());
                let f = distribution(&float, n).unwrap();
                assert!(close(&to_f64(&e), &f.probs, 1e-13), "{float} N = {n}");
            }
        }
    }
}
