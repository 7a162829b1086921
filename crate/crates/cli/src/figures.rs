//! Survival curves at N = 2000 for the three rules, and the sweep of the
//! mass near 0 versus near 1/2.

use josephus_core::analysis::circular_distance;
use josephus_core::montecarlo::empirical_distribution;
use josephus_core::rule::Rule;
use josephus_core::survival_dp::distribution;
use josephus_core::{Result, SurvivalDistribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const FIGURE_N: usize = 2000;
pub const R1_P_GRID: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
pub const R2_P_GRID: [f64; 6] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5];
pub const R3_AXIS: [f64; 3] = [0.25, 0.5, 0.75];

pub fn default_pq_grid() -> Vec<(f64, f64)> {
    R3_AXIS
        .iter()
        .flat_map(|&p| R3_AXIS.iter().map(move |&q| (p, q)))
        .collect()
}

/// Monte Carlo instead of the exact DP: sample count and seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sampling {
    pub samples: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureSeries {
    /// File stem, e.g. `figure_r1_p0.4`.
    pub label: String,
    pub dist: SurvivalDistribution,
}

fn series(rules: Vec<(String, Rule)>, n: usize, sampling: Option<Sampling>) -> Result<Vec<FigureSeries>> {
    rules
        .into_par_iter()
        .map(|(label, rule)| {
            let dist = match sampling {
                None => distribution(&rule, n)?,
                Some(s) => empirical_distribution(&rule, n, s.samples, s.seed)?,
            };
            Ok(FigureSeries { label, dist })
        })
        .collect()
}

pub fn figure_r1(n: usize, p_grid: &[f64], sampling: Option<Sampling>) -> Result<Vec<FigureSeries>> {
    let rules = p_grid
        .iter()
        .map(|&p| Ok((format!("figure_r1_p{p}"), Rule::r1(p)?)))
        .collect::<Result<Vec<_>>>()?;
    series(rules, n, sampling)
}

pub fn figure_r2(n: usize, p_grid: &[f64], sampling: Option<Sampling>) -> Result<Vec<FigureSeries>> {
    let rules = p_grid
        .iter()
        .map(|&p| Ok((format!("figure_r2_p{p}"), Rule::r2(p)?)))
        .collect::<Result<Vec<_>>>()?;
    series(rules, n, sampling)
}

pub fn figure_r3(n: usize, pq_grid: &[(f64, f64)], sampling: Option<Sampling>) -> Result<Vec<FigureSeries>> {
    let rules = pq_grid
        .iter()
        .map(|&(p, q)| Ok((format!("figure_r3_p{p}_q{q}"), Rule::r3(p, q)?)))
        .collect::<Result<Vec<_>>>()?;
    series(rules, n, sampling)
}

/// Whether R2's argmax sits within `0.03 N` of `(3p - 1) N` on the ring.
/// `None` outside `1/3 < p <= 2/3`, where no limit is claimed.
pub fn r2_argmax_near_limit(dist: &SurvivalDistribution) -> Option<bool> {
    let p = match dist.rule {
        Rule::R2 { p } if p > 1.0 / 3.0 && p <= 2.0 / 3.0 => p,
        _ => return None,
    };
    let n = dist.len();
    let target = ((3.0 * p - 1.0) * n as f64).round() as usize % n;
    Some(circular_distance(dist.argmax(), target, n) as f64 <= 0.03 * n as f64)
}

/// One line of the sweep. Purely descriptive: no limit is asserted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub p: f64,
    pub n: usize,
    pub delta: f64,
    /// Mass with `X_N` in `[0, delta) U (1 - delta, 1)`.
    pub mass_near_zero: f64,
    /// Mass with `X_N` in `[1/2 - delta, 1/2 + delta]`.
    pub mass_near_half: f64,
}

pub const SWEEP_DELTA: f64 = 0.02;

pub fn sweep_limit_parameter(p_grid: &[f64], n_values: &[usize], delta: f64) -> Result<Vec<SweepRecord>> {
    let points: Vec<(f64, usize)> = p_grid
        .iter()
        .flat_map(|&p| n_values.iter().map(move |&n| (p, n)))
        .collect();
    points
        .into_par_iter()
        .map(|(p, n)| {
            let dist = distribution(&Rule::r1(p)?, n)?;
            let len = n as f64;
            let near_zero = dist
                .probs
                .iter()
                .enumerate()
                .filter(|(k, _)| {
                    let x = *k as f64 / len;
                    x < delta || x > 1.0 - delta
                })
                .map(|(_, &w)| w)
                .sum();
            Ok(SweepRecord {
                p,
                n,
                delta,
                mass_near_zero: near_zero,
                mass_near_half: dist.mass_between(0.5 - delta, 0.5 + delta),
            })
        })
        .collect()
}
