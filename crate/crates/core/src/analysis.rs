//! Statistics of survival distributions and finite-range checks of their
//! asymptotics.
//!
//! Asymptotic statements (`O(.)`, `≍`, exponential decay) can only be
//! certified on finite prefixes, so every check here reports the fitted
//! constant or ratio over an explicit range together with a pass flag for a
//! pre-registered criterion.

use rand_chacha::rand_core::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::distribution::SurvivalDistribution;
use crate::error::{domain, Error, Result};
use crate::montecarlo::{rng_stream, run_round};
use crate::rule::Rule;
use crate::survival_dp::for_each_row;

/// `sum_n phi(n / N) * probs[n]`.
pub fn expectation_functional<F: Fn(f64) -> f64>(dist: &SurvivalDistribution, phi: F) -> f64 {
    expectation(&dist.probs, phi)
}

fn expectation<F: Fn(f64) -> f64>(probs: &[f64], phi: F) -> f64 {
    let len = probs.len() as f64;
    probs
        .iter()
        .enumerate()
        .filter(|(_, &w)| w != 0.0)
        .map(|(n, &w)| phi(n as f64 / len) * w)
        .sum()
}

/// The test function `x -> (1/2 - x)^k`.
pub fn phi_k(k: u32) -> impl Fn(f64) -> f64 {
    move |x| (0.5 - x).powi(k as i32)
}

/// `E_N[phi_k]`, or `E_N[|phi_k|]` when `absolute`.
pub fn moment(dist: &SurvivalDistribution, k: u32, absolute: bool) -> Result<f64> {
    if k == 0 {
        return domain("moment order must be at least 1");
    }
    Ok(raw_moment(&dist.probs, k, absolute))
}

fn raw_moment(probs: &[f64], k: u32, absolute: bool) -> f64 {
    let f = phi_k(k);
    if absolute {
        expectation(probs, |x| f(x).abs())
    } else {
        expectation(probs, f)
    }
}

/// `max(probs[n])` over `n` in `{-2, -1, 0, 1, 2}` taken modulo `N`.
pub fn eta(dist: &SurvivalDistribution) -> f64 {
    eta_of(&dist.probs)
}

fn eta_of(probs: &[f64]) -> f64 {
    let len = probs.len() as i64;
    (-2..=2)
        .map(|n: i64| probs[n.rem_euclid(len) as usize])
        .fold(0.0, f64::max)
}

/// Mean, variance and third absolute central moment of `X_N = n / N`.
pub fn central_moments(probs: &[f64]) -> (f64, f64, f64) {
    let mean = expectation(probs, |x| x);
    let var = expectation(probs, |x| (x - mean).powi(2));
    let third = expectation(probs, |x| (x - mean).abs().powi(3));
    (mean, var, third)
}

/// Circular distance between two labels on a ring of `n`.
pub fn circular_distance(a: usize, b: usize, n: usize) -> usize {
    let d = a.abs_diff(b) % n;
    d.min(n - d)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRecord {
    pub n: usize,
    pub mean: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub abs_phi3: f64,
    pub variance: f64,
    pub third_central: f64,
    pub eta: f64,
    pub g0: f64,
}

impl MomentRecord {
    pub fn from_probs(probs: &[f64]) -> Self {
        let (mean, variance, third_central) = central_moments(probs);
        MomentRecord {
            n: probs.len(),
            mean,
            phi1: raw_moment(probs, 1, false),
            phi2: raw_moment(probs, 2, false),
            abs_phi3: raw_moment(probs, 3, true),
            variance,
            third_central,
            eta: eta_of(probs),
            g0: probs[0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub rule: Rule,
    pub n_min: usize,
    pub n_max: usize,
    pub per_n: Vec<MomentRecord>,
}

pub fn moment_report(rule: &Rule, n_min: usize, n_max: usize) -> Result<MomentReport> {
    if n_min < 3 || n_min > n_max {
        return domain(format!("bad range {n_min}..={n_max} (need 3 <= min <= max)"));
    }
    let mut per_n = Vec::with_capacity(n_max - n_min + 1);
    for_each_row(rule, n_max, |n, row| {
        if n >= n_min {
            per_n.push(MomentRecord::from_probs(row));
        }
    })?;
    Ok(MomentReport {
        rule: *rule,
        n_min,
        n_max,
        per_n,
    })
}

/// Least-squares line through `(x, y)` with its coefficient of determination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Some(LinearFit {
        slope,
        intercept,
        r_squared,
        points: n,
    })
}

// ---------------------------------------------------------------------------
// Exponential bounds in the middle range 1/3 < p < 2/3

/// Left-hand sides of the four constraints on `(beta, gamma)`; the pair is
/// admissible when all four are `<= 1`.
pub fn decay_constraints(p: f64, beta: f64, gamma: f64) -> [f64; 4] {
    [
        p * beta * beta * gamma * gamma,
        (1.0 - p) * beta * gamma,
        gamma * (p * beta + (1.0 - p) / (beta * beta)),
        gamma * ((1.0 - p) * beta + p / (beta * beta)),
    ]
}

/// Largest `gamma` admissible for a given `beta`.
fn gamma_for(p: f64, beta: f64) -> f64 {
    let worst = decay_constraints(p, beta, 1.0);
    1.0 / worst[0].sqrt().max(worst[1]).max(worst[2]).max(worst[3])
}

/// Finds `beta, gamma > 1` satisfying all four constraints, maximising
/// `gamma`.
///
/// For fixed `beta` the best `gamma` is explicit (the constraints are
/// monotone in `gamma`), so the search is over `beta` alone: a 2000-point
/// grid on `(1, beta_max)`, then golden-section refinement around the best
/// grid cell. `gamma(beta)` is the reciprocal of a maximum of convex
/// functions, hence unimodal. The returned `gamma` is shaded by one part in
/// `10^12` so that the constraints hold in floating point.
pub fn decay_params_feasible(p: f64) -> Result<(f64, f64)> {
    if !(p > 1.0 / 3.0 && p < 2.0 / 3.0) {
        return domain(format!("p = {p} is outside the open interval (1/3, 2/3)"));
    }
    let beta_max = (1.0 / p.sqrt()).min(1.0 / (1.0 - p));
    const GRID: usize = 2000;
    let at = |i: usize| 1.0 + (beta_max - 1.0) * i as f64 / GRID as f64;
    let best = (1..GRID)
        .max_by(|&a, &b| gamma_for(p, at(a)).total_cmp(&gamma_for(p, at(b))))
        .expect("non-empty grid");

    let (mut lo, mut hi) = (at(best - 1), at(best + 1));
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let m1 = hi - ratio * (hi - lo);
        let m2 = lo + ratio * (hi - lo);
        if gamma_for(p, m1) >= gamma_for(p, m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let beta = 0.5 * (lo + hi);
    let gamma = gamma_for(p, beta) * (1.0 - 1e-12);
    let lhs = decay_constraints(p, beta, gamma);
    if !(beta > 1.0 && gamma > 1.0) || lhs.iter().any(|&v| v > 1.0) {
        return Err(Error::Infeasible(format!(
            "no admissible (beta, gamma) above (1, 1) found for p = {p}"
        )));
    }
    Ok((beta, gamma))
}

/// Smallest constant in `g_N(n) <= K beta^<n>_N / gamma^N` found over a range
/// of `N`, and whether it has settled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayBoundFit {
    pub p: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Smallest admissible constant over `3 <= N <= n_max`.
    pub k: f64,
    /// The same over `3 <= N <= n_max / 2`.
    pub k_half: f64,
    /// `k <= 1.05 * k_half`.
    pub stabilized: bool,
    /// `max(g - k * bound)`; `<= 0` when the bound holds with constant `k`.
    pub max_violation: f64,
    pub n_max: usize,
}

/// Relative slack allowed in `max_violation` for rounding in `exp`/`ln`.
pub const BOUND_RTOL: f64 = 1e-12;

impl DecayBoundFit {
    /// The bound holds with constant `k` up to [`BOUND_RTOL`].
    pub fn holds(&self) -> bool {
        self.max_violation <= BOUND_RTOL * self.k
    }
}

/// Running maximum of `ln g - ln bound` and the `N` it was last raised at.
struct LogRatioMax {
    all: f64,
    half: f64,
    half_limit: usize,
}

impl LogRatioMax {
    fn new(half_limit: usize) -> Self {
        LogRatioMax {
            all: f64::NEG_INFINITY,
            half: f64::NEG_INFINITY,
            half_limit,
        }
    }

    fn push(&mut self, n: usize, log_ratio: f64) {
        self.all = self.all.max(log_ratio);
        if n <= self.half_limit {
            self.half = self.half.max(log_ratio);
        }
    }
}

pub fn decay_bound_check(p: f64, n_max: usize) -> Result<DecayBoundFit> {
    let (beta, gamma) = decay_params_feasible(p)?;
    if n_max < 6 {
        return domain("n_max must be at least 6");
    }
    let (lb, lg) = (beta.ln(), gamma.ln());
    let log_bound = |n: usize, k: usize| (circular_distance(k, 0, n) as f64) * lb - n as f64 * lg;
    let mut acc = LogRatioMax::new(n_max / 2);
    for_each_row(&Rule::R1 { p }, n_max, |n, row| {
        for (k, &g) in row.iter().enumerate() {
            if g > 0.0 {
                acc.push(n, g.ln() - log_bound(n, k));
            }
        }
    })?;
    let k_const = acc.all.exp();
    let k_half = acc.half.exp();
    let mut max_violation = f64::NEG_INFINITY;
    for_each_row(&Rule::R1 { p }, n_max, |n, row| {
        for (k, &g) in row.iter().enumerate() {
            let v = g - k_const * log_bound(n, k).exp();
            max_violation = max_violation.max(v);
        }
    })?;
    Ok(DecayBoundFit {
        p,
        beta,
        gamma,
        k: k_const,
        k_half,
        stabilized: k_const <= 1.05 * k_half,
        max_violation,
        n_max,
    })
}

// ---------------------------------------------------------------------------
// Unbiased case: decay away from the mid-point

/// The two quantities that must both be `<= 2`:
/// `alpha^(2 + 4(1+eps))` and `alpha^(1 - 4(1+eps)) + alpha^(1 + 2(1+eps))`.
pub fn unbiased_decay_inequality(epsilon: f64, alpha: f64) -> [f64; 2] {
    let e = 1.0 + epsilon;
    [
        alpha.powf(2.0 + 4.0 * e),
        alpha.powf(1.0 - 4.0 * e) + alpha.powf(1.0 + 2.0 * e),
    ]
}

/// Largest `alpha` in `(1, 2]` meeting [`unbiased_decay_inequality`], by
/// bisection; `None` if even `alpha` slightly above 1 fails.
pub fn max_admissible_alpha(epsilon: f64) -> Option<f64> {
    let ok = |a: f64| unbiased_decay_inequality(epsilon, a).iter().all(|&v| v <= 2.0);
    let (mut lo, mut hi) = (1.0, 2.0);
    if !ok(1.0 + 1e-9) {
        return None;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnbiasedDecayFit {
    pub epsilon: f64,
    pub alpha: f64,
    /// Left-hand sides of the two conditions (each must be `<= 2`).
    pub inequality_lhs: [f64; 2],
    pub inequality_holds: bool,
    pub k: f64,
    pub k_half: f64,
    pub stabilized: bool,
    pub max_violation: f64,
    pub n_max: usize,
}

impl UnbiasedDecayFit {
    /// The bound holds with constant `k` up to [`BOUND_RTOL`].
    pub fn holds(&self) -> bool {
        self.max_violation <= BOUND_RTOL * self.k
    }
}

/// Smallest `K` with `g_N(n) <= K alpha^(2(1+eps)n - N)` for `1 <= N <= n_max`
/// and `0 <= n <= N/2`, without checking the admissibility of `alpha`.
/// `N = 1, 2` use the point masses at the starting holder.
pub fn unbiased_decay_constant(n_max: usize, epsilon: f64, alpha: f64) -> Result<UnbiasedDecayFit> {
    if n_max < 6 {
        return domain("n_max must be at least 6");
    }
    if !(alpha > 1.0) || !(epsilon > 0.0) {
        return domain(format!("need alpha > 1 and epsilon > 0, got alpha = {alpha}, epsilon = {epsilon}"));
    }
    let la = alpha.ln();
    let slope = 2.0 * (1.0 + epsilon);
    let log_bound = |n: usize, k: usize| (slope * k as f64 - n as f64) * la;
    let mut acc = LogRatioMax::new(n_max / 2);
    let visit = |n: usize, row: &[f64], acc: &mut LogRatioMax| {
        for (k, &g) in row.iter().enumerate().take(n / 2 + 1) {
            if g > 0.0 {
                acc.push(n, g.ln() - log_bound(n, k));
            }
        }
    };
    visit(1, &[1.0], &mut acc);
    visit(2, &[1.0, 0.0], &mut acc);
    for_each_row(&Rule::R1 { p: 0.5 }, n_max, |n, row| visit(n, row, &mut acc))?;
    let k_const = acc.all.exp();
    let k_half = acc.half.exp();

    let mut max_violation = f64::NEG_INFINITY;
    let mut check = |n: usize, row: &[f64]| {
        for (k, &g) in row.iter().enumerate().take(n / 2 + 1) {
            max_violation = max_violation.max(g - k_const * log_bound(n, k).exp());
        }
    };
    check(1, &[1.0]);
    check(2, &[1.0, 0.0]);
    for_each_row(&Rule::R1 { p: 0.5 }, n_max, check)?;

    let lhs = unbiased_decay_inequality(epsilon, alpha);
    Ok(UnbiasedDecayFit {
        epsilon,
        alpha,
        inequality_lhs: lhs,
        inequality_holds: lhs.iter().all(|&v| v <= 2.0),
        k: k_const,
        k_half,
        stabilized: k_const <= 1.05 * k_half,
        max_violation,
        n_max,
    })
}

/// [`unbiased_decay_constant`] after verifying that `alpha` is admissible.
pub fn unbiased_decay_check(n_max: usize, epsilon: f64, alpha: f64) -> Result<UnbiasedDecayFit> {
    let [a, b] = unbiased_decay_inequality(epsilon, alpha);
    if a > 2.0 {
        return domain(format!(
            "alpha^(2+4(1+eps)) = {a} exceeds 2 (alpha = {alpha}, eps = {epsilon})"
        ));
    }
    if b > 2.0 {
        return domain(format!(
            "alpha^(1-4(1+eps)) + alpha^(1+2(1+eps)) = {b} exceeds 2 (alpha = {alpha}, eps = {epsilon})"
        ));
    }
    unbiased_decay_constant(n_max, epsilon, alpha)
}

/// Fits `ln g_N(0)` against `N` for the unbiased rule over `n_min..=n_max`,
/// skipping the `N` where `g_N(0) = 0` (every multiple of 3).
pub fn knife_starter_decay_fit(n_min: usize, n_max: usize) -> Result<LinearFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for_each_row(&Rule::R1 { p: 0.5 }, n_max, |n, row| {
        if n >= n_min && row[0] > 0.0 {
            xs.push(n as f64);
            ys.push(row[0].ln());
        }
    })?;
    linear_fit(&xs, &ys).ok_or_else(|| Error::Domain("not enough points to fit".into()))
}

// ---------------------------------------------------------------------------
// Moment estimates (unbiased rule)

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentScaling {
    pub k: u32,
    pub n_min: usize,
    pub n_max: usize,
    /// `(N, E_N[|phi_k|] / (ln N / N)^(k/2))`.
    pub ratios: Vec<(usize, f64)>,
    pub sup: f64,
    /// Max ratio over `[n_min, n_max/2]`.
    pub early_max: f64,
    /// Max ratio over `(n_max/2, n_max]`.
    pub late_max: f64,
    /// Finite sup and `late_max <= early_max`.
    pub bounded: bool,
    /// For `k = 1`: fit of `ln |E_N[phi_1]|` against `N` over the terms above
    /// [`CANCELLATION_FLOOR`].
    pub exponential_fit: Option<LinearFit>,
}

pub const MOMENT_SCALING_N_MIN: usize = 50;

/// `E_N[phi_1]` is a sum of terms of both signs of size up to 1/2, so values
/// below this are rounding noise rather than signal.
pub const CANCELLATION_FLOOR: f64 = 1e-13;

pub fn moment_scaling_check(n_max: usize, k: u32) -> Result<MomentScaling> {
    if !(1..=3).contains(&k) {
        return domain(format!("moment order {k} not in 1..=3"));
    }
    let n_min = MOMENT_SCALING_N_MIN;
    if n_max < 2 * n_min {
        return domain(format!("n_max must be at least {}", 2 * n_min));
    }
    let mut ratios = Vec::new();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for_each_row(&Rule::R1 { p: 0.5 }, n_max, |n, row| {
        if n < n_min {
            return;
        }
        let nf = n as f64;
        let scale = (nf.ln() / nf).powf(k as f64 / 2.0);
        ratios.push((n, raw_moment(row, k, true) / scale));
        if k == 1 {
            let m = raw_moment(row, 1, false).abs();
            if m > CANCELLATION_FLOOR {
                xs.push(nf);
                ys.push(m.ln());
            }
        }
    })?;
    let split = n_max / 2;
    let max_of = |pred: &dyn Fn(usize) -> bool| {
        ratios
            .iter()
            .filter(|(n, _)| pred(*n))
            .map(|&(_, r)| r)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let sup = max_of(&|_| true);
    let early_max = max_of(&|n| n <= split);
    let late_max = max_of(&|n| n > split);
    Ok(MomentScaling {
        k,
        n_min,
        n_max,
        bounded: sup.is_finite() && late_max <= early_max,
        ratios,
        sup,
        early_max,
        late_max,
        exponential_fit: if k == 1 { linear_fit(&xs, &ys) } else { None },
    })
}

// ---------------------------------------------------------------------------
// Second-moment sums and B_L

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumPoint {
    pub l: usize,
    /// `S_L = sum_{N=3}^{L} E_N[phi_2]`.
    pub s_l: f64,
    pub s_over_ln: f64,
    /// `B_L^2 = sum_{N=3}^{L} V_N`.
    pub b_l_sq: f64,
    pub b_sq_over_ln: f64,
    /// `sum_{N=3}^{L} E_N[phi_1]^2`.
    pub phi1_sq_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondMomentSums {
    pub l_max: usize,
    pub points: Vec<SumPoint>,
    /// `max / min` of `S_L / ln L` over the grid.
    pub s_band_ratio: f64,
    /// `max / min` of `B_L^2 / ln L` over the grid.
    pub b_band_ratio: f64,
    /// `max / min` of `S_L / ln L` over the top two octaves `[l_max/4, l_max]`.
    pub top_octaves_band_ratio: f64,
    pub increasing: bool,
    /// `max |B_L^2 - (S_L - sum E_N[phi_1]^2)|` over all `L`.
    pub decomposition_error: f64,
    /// `sum_{N > 100} E_N[phi_1]^2` up to `l_max`.
    pub phi1_sq_tail_beyond_100: f64,
}

pub const SUM_GRID_L_MIN: usize = 100;

/// Log-spaced grid from 100 to `l_max`, ten points per decade, both ends kept.
pub fn log_grid(l_min: usize, l_max: usize, per_decade: usize) -> Vec<usize> {
    let (a, b) = ((l_min as f64).log10(), (l_max as f64).log10());
    let steps = ((b - a) * per_decade as f64).ceil().max(1.0) as usize;
    let mut grid: Vec<usize> = (0..=steps)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / steps as f64).round() as usize)
        .collect();
    grid[0] = l_min;
    *grid.last_mut().unwrap() = l_max;
    grid.dedup();
    grid
}

pub fn second_moment_sum_check(l_max: usize) -> Result<SecondMomentSums> {
    if l_max < SUM_GRID_L_MIN {
        return domain(format!("l_max must be at least {SUM_GRID_L_MIN}"));
    }
    let grid = log_grid(SUM_GRID_L_MIN, l_max, 10);
    let mut points = Vec::with_capacity(grid.len());
    let (mut s, mut b2, mut p1sq, mut tail) = (0.0, 0.0, 0.0, 0.0);
    let mut decomposition_error: f64 = 0.0;
    let mut gi = 0;
    for_each_row(&Rule::R1 { p: 0.5 }, l_max, |n, row| {
        let phi1 = raw_moment(row, 1, false);
        let phi2 = raw_moment(row, 2, false);
        let (_, var, _) = central_moments(row);
        s += phi2;
        b2 += var;
        p1sq += phi1 * phi1;
        if n > 100 {
            tail += phi1 * phi1;
        }
        decomposition_error = decomposition_error.max((b2 - (s - p1sq)).abs());
        if gi < grid.len() && grid[gi] == n {
            let ln = (n as f64).ln();
            points.push(SumPoint {
                l: n,
                s_l: s,
                s_over_ln: s / ln,
                b_l_sq: b2,
                b_sq_over_ln: b2 / ln,
                phi1_sq_sum: p1sq,
            });
            gi += 1;
        }
    })?;
    let band = |f: &dyn Fn(&SumPoint) -> f64, from: usize| {
        let vals: Vec<f64> = points.iter().filter(|p| p.l >= from).map(f).collect();
        let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        max / min
    };
    Ok(SecondMomentSums {
        l_max,
        s_band_ratio: band(&|p| p.s_over_ln, 0),
        b_band_ratio: band(&|p| p.b_sq_over_ln, 0),
        top_octaves_band_ratio: band(&|p| p.s_over_ln, l_max / 4),
        increasing: points.windows(2).all(|w| w[1].s_l > w[0].s_l),
        decomposition_error,
        phi1_sq_tail_beyond_100: tail,
        points,
    })
}

// ---------------------------------------------------------------------------
// Central limit theorem

/// How the survivor of each round is drawn in [`clt_experiment`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CltSampling {
    /// Inverse-CDF draw from the exact DP distribution (one `u64` per round).
    InverseCdf,
    /// Full process simulation (`N - 1` tosses per round).
    Simulation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    /// `b_l[i]` and `lyapunov_ratio[i]` belong to `L = l_min + i`.
    pub l_min: usize,
    pub l_max: usize,
    /// `B_L = sqrt(sum_{N=3}^{L} V_N)`.
    pub b_l: Vec<f64>,
    /// `sum_{N=3}^{L} W_N / B_L^3`.
    pub lyapunov_ratio: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub sampling: CltSampling,
    /// `sum_{N=3}^{L} (X_N - E_N(X_N)) / B_L` per trial.
    pub normalized_sums: Vec<f64>,
    /// Kolmogorov-Smirnov distance of `normalized_sums` to N(0, 1).
    pub ks_distance: f64,
    /// Asymptotic 1% critical value `sqrt(ln(200) / 2) / sqrt(trials)`.
    pub ks_critical_1pct: f64,
    /// KS distance of `sum_{N=1}^{L} (X_N - 1/2) / B_L` (reported only).
    pub ks_distance_half_centered: f64,
    /// `sum_{N} (1/2 - E_N(X_N))`, the offset between the two centerings.
    pub centering_offset: f64,
}

impl CltReport {
    pub fn b_at(&self, l: usize) -> f64 {
        self.b_l[l - self.l_min]
    }

    pub fn lyapunov_at(&self, l: usize) -> f64 {
        self.lyapunov_ratio[l - self.l_min]
    }
}

pub const CLT_MIN_TRIALS: usize = 1000;

/// Sup distance between the empirical CDF of `sample` and the standard normal.
pub fn ks_distance_to_normal(sample: &[f64]) -> f64 {
    let normal = Normal::standard();
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal.cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

pub fn ks_critical_value(alpha: f64, n: usize) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

fn uniform(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Draws `X_N` for `N = 3..=l_max` independently in every trial (trial `t`
/// owns ChaCha stream `t` of `seed`) and normalises the centred sums by
/// `B_{l_max}`. Variances come from the exact DP.
pub fn clt_experiment(l_max: usize, trials: usize, seed: u64, sampling: CltSampling) -> Result<CltReport> {
    if l_max < 4 {
        return domain("l_max must be at least 4");
    }
    if trials < CLT_MIN_TRIALS {
        return domain(format!("at least {CLT_MIN_TRIALS} trials are required, got {trials}"));
    }
    let mut rngs: Vec<_> = (0..trials as u64).map(|t| rng_stream(seed, t)).collect();
    let mut centered = vec![0.0f64; trials];
    // N = 1 and N = 2 survivors sit at label 0: X - 1/2 = -1/2 each
    let mut half = vec![-1.0f64; trials];
    let mut b2 = 0.0;
    let mut w_sum = 0.0;
    let mut offset = 1.0;
    let mut b_l = Vec::with_capacity(l_max - 2);
    let mut lyapunov_ratio = Vec::with_capacity(l_max - 2);
    let mut cdf: Vec<f64> = Vec::with_capacity(l_max);
    let rule = Rule::R1 { p: 0.5 };

    for_each_row(&rule, l_max, |n, row| {
        let (mean, var, third) = central_moments(row);
        b2 += var;
        w_sum += third;
        offset += 0.5 - mean;
        b_l.push(b2.sqrt());
        lyapunov_ratio.push(w_sum / b2.powf(1.5));

        let nf = n as f64;
        match sampling {
            CltSampling::InverseCdf => {
                cdf.clear();
                let mut acc = 0.0;
                cdf.extend(row.iter().map(|&g| {
                    acc += g;
                    acc
                }));
                let last = row.iter().rposition(|&g| g > 0.0).expect("non-empty support");
                rngs.par_iter_mut()
                    .zip(centered.par_iter_mut().zip(half.par_iter_mut()))
                    .for_each(|(rng, (c, h))| {
                        let u = uniform(rng);
                        let idx = cdf.partition_point(|&v| v <= u).min(last);
                        let x = idx as f64 / nf;
                        *c += x - mean;
                        *h += x - 0.5;
                    });
            }
            CltSampling::Simulation => {
                rngs.par_iter_mut()
                    .zip(centered.par_iter_mut().zip(half.par_iter_mut()))
                    .for_each(|(rng, (c, h))| {
                        let idx = run_round(&rule, n, rng).expect("valid rule");
                        let x = idx as f64 / nf;
                        *c += x - mean;
                        *h += x - 0.5;
                    });
            }
        }
    })?;

    let b = b2.sqrt();
    let normalized_sums: Vec<f64> = centered.iter().map(|s| s / b).collect();
    let half_sums: Vec<f64> = half.iter().map(|s| s / b).collect();
    Ok(CltReport {
        l_min: 3,
        l_max,
        b_l,
        lyapunov_ratio,
        trials,
        seed,
        sampling,
        ks_distance: ks_distance_to_normal(&normalized_sums),
        ks_critical_1pct: ks_critical_value(0.01, trials),
        ks_distance_half_centered: ks_distance_to_normal(&half_sums),
        centering_offset: offset,
        normalized_sums,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::survival_dp::{distribution, r1_distribution, r1_unbiased_distribution};
    use std::f64::consts::PI;

    #[test]
    fn constant_functional_is_one() {
        let d = r1_distribution(37, 0.3).unwrap();
        assert!((expectation_functional(&d, |_| 1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cosine_on_base_vector() {
        let d = r1_unbiased_distribution(3).unwrap();
        let v = expectation_functional(&d, |x| -(2.0 * PI * x).cos());
        assert!((v - 0.5).abs() < 1e-15, "{v}");
    }

    #[test]
    fn second_moment_at_three() {
        let d = r1_unbiased_distribution(3).unwrap();
        assert!((moment(&d, 2, false).unwrap() - 1.0 / 36.0).abs() < 1e-15);
        assert!(moment(&d, 0, false).is_err());
    }

    #[test]
    fn first_moment_is_half_knife_starter() {
        for n in 3..500 {
            let d = r1_unbiased_distribution(n).unwrap();
            let m = moment(&d, 1, false).unwrap();
            assert!((m - d.probs[0] / 2.0).abs() < 1e-12, "N = {n}");
        }
    }

    #[test]
    fn eta_small_cases() {
        for p in [0.1, 0.5, 0.8] {
            let d = r1_distribution(3, p).unwrap();
            assert_eq!(eta(&d), p.max(1.0 - p));
        }
        assert_eq!(eta(&r1_unbiased_distribution(4).unwrap()), 0.5);
        for p in [0.4, 0.5, 0.6] {
            let a = eta(&r1_distribution(100, p).unwrap());
            let b = eta(&r1_distribution(200, p).unwrap());
            assert!(b < a, "p = {p}: {b} !< {a}");
        }
    }

    #[test]
    fn variance_identity() {
        let report = moment_report(&Rule::R2 { p: 0.45 }, 3, 300).unwrap();
        for r in &report.per_n {
            assert!((r.variance - (r.phi2 - r.phi1 * r.phi1)).abs() < 1e-12, "N = {}", r.n);
        }
        assert!(moment_report(&Rule::R1 { p: 0.5 }, 2, 10).is_err());
        assert!(moment_report(&Rule::R1 { p: 0.5 }, 11, 10).is_err());
    }

    #[test]
    fn feasible_parameters() {
        for p in [0.34, 0.4, 0.5, 0.6, 0.66] {
            let (beta, gamma) = decay_params_feasible(p).unwrap();
            assert!(beta > 1.0 && gamma > 1.0);
            assert!(decay_constraints(p, beta, gamma).iter().all(|&v| v <= 1.0));
        }
        let g = |p| decay_params_feasible(p).unwrap().1;
        assert!(g(0.334) < g(0.34) && g(0.34) < g(0.4) && g(0.4) < g(0.5));
        assert!(g(0.3334) - 1.0 < 1e-6);
        for p in [0.2, 1.0 / 3.0, 2.0 / 3.0, 0.9] {
            assert!(matches!(decay_params_feasible(p), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn feasible_unbiased_matches_closed_form() {
        // p = 1/2: the binding constraint is gamma (beta + 1/beta^2) / 2 <= 1,
        // optimal at beta = 2^(1/3)
        let (beta, gamma) = decay_params_feasible(0.5).unwrap();
        let b = 2f64.powf(1.0 / 3.0);
        assert!((beta - b).abs() < 1e-6, "{beta}");
        assert!((gamma - 2.0 / (b + 1.0 / (b * b))).abs() < 1e-9);
    }

    #[test]
    fn decay_bound_holds() {
        for p in [0.34, 0.4, 0.5] {
            let fit = decay_bound_check(p, 200).unwrap();
            assert!(fit.k.is_finite() && fit.k > 0.0);
            assert!(fit.holds(), "{fit:?}");
        }
    }

    #[test]
    fn unbiased_inequality() {
        let [a, _] = unbiased_decay_inequality(0.05, 1.2);
        assert!(a > 3.0 && a < 3.2, "{a}");
        assert!(matches!(unbiased_decay_check(100, 0.05, 1.2), Err(Error::Domain(_))));
        // alpha = 1.03 violates the second condition at eps = 0.05
        let [_, b] = unbiased_decay_inequality(0.05, 1.03);
        assert!(b > 2.005 && b < 2.006, "{b}");
        let amax = max_admissible_alpha(0.05).unwrap();
        assert!(amax > 1.01 && amax < 1.012, "{amax}");
        let fit = unbiased_decay_check(300, 0.05, 1.01).unwrap();
        assert!(fit.inequality_holds && fit.holds());
    }

    #[test]
    fn knife_starter_vanishes_on_multiples_of_three() {
        for n in 3..300 {
            let g0 = r1_unbiased_distribution(n).unwrap().probs[0];
            assert_eq!(g0 == 0.0, n % 3 == 0, "N = {n}: {g0}");
        }
    }

    #[test]
    fn log_grid_shape() {
        let g = log_grid(100, 10_000, 10);
        assert_eq!(g.first(), Some(&100));
        assert_eq!(g.last(), Some(&10_000));
        assert_eq!(g.len(), 21);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn linear_fit_exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [3.0, 5.0, 7.0, 9.0];
        let f = linear_fit(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert!(linear_fit(&[1.0], &[1.0]).is_none());
    }

    #[test]
    fn ks_against_known_sample() {
        // quantiles of N(0,1) at (i + 1/2)/n: distance is exactly 1/(2n)
        let normal = Normal::standard();
        let n = 200;
        let xs: Vec<f64> = (0..n)
            .map(|i| normal.inverse_cdf((i as f64 + 0.5) / n as f64))
            .collect();
        let d = ks_distance_to_normal(&xs);
        assert!((d - 0.5 / n as f64).abs() < 1e-9, "{d}");
        assert!((ks_critical_value(0.01, 10_000) - 0.016276).abs() < 1e-5);
    }

    #[test]
    fn clt_small_run() {
        let r = clt_experiment(60, 1000, 11, CltSampling::InverseCdf).unwrap();
        assert_eq!(r.b_l.len(), 58);
        assert!(r.b_l.windows(2).all(|w| w[1] > w[0]));
        assert!(r.lyapunov_ratio.iter().all(|&x| x >= 0.0));
        assert_eq!(r.normalized_sums.len(), 1000);
        let again = clt_experiment(60, 1000, 11, CltSampling::InverseCdf).unwrap();
        assert_eq!(r, again);
        assert!(clt_experiment(60, 999, 11, CltSampling::InverseCdf).is_err());
    }

    #[test]
    fn clt_sampling_modes_agree_in_law() {
        // both draw from the same laws; compare the two ensembles' first two moments
        let a = clt_experiment(40, 4000, 3, CltSampling::InverseCdf).unwrap();
        let b = clt_experiment(40, 4000, 4, CltSampling::Simulation).unwrap();
        let stats = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            let s = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64;
            (m, s)
        };
        let ((ma, sa), (mb, sb)) = (stats(&a.normalized_sums), stats(&b.normalized_sums));
        // sd of a mean over 4000 unit-variance draws is ~0.016
        assert!((ma - mb).abs() < 0.1, "{ma} vs {mb}");
        assert!((sa - 1.0).abs() < 0.1 && (sb - 1.0).abs() < 0.1, "{sa} {sb}");
    }

    #[test]
    fn circular() {
        assert_eq!(circular_distance(1, 9, 10), 2);
        assert_eq!(circular_distance(0, 5, 10), 5);
        assert_eq!(circular_distance(7, 7, 10), 0);
    }

    #[test]
    fn deterministic_distribution_moments() {
        let d = distribution(&Rule::Deterministic, 41).unwrap();
        let (mean, var, _) = central_moments(&d.probs);
        assert!((mean - 18.0 / 41.0).abs() < 1e-15);
        assert_eq!(var, 0.0);
    }
}
