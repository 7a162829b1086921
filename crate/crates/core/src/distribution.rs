use serde::{Deserialize, Serialize};

use crate::rule::Rule;

/// How a [`SurvivalDistribution`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ExactDp,
    ExactOracle,
    MonteCarlo,
}

/// Survival probabilities of the labels `0..N` under one rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalDistribution {
    pub rule: Rule,
    pub n_participants: usize,
    pub probs: Vec<f64>,
    pub method: Method,
    pub mc_samples: Option<u64>,
}

impl SurvivalDistribution {
    pub(crate) fn exact(rule: Rule, probs: Vec<f64>) -> Self {
        SurvivalDistribution {
            rule,
            n_participants: probs.len(),
            probs,
            method: Method::ExactDp,
            mc_samples: None,
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Survival probability of label `n`, read modulo `N`.
    pub fn prob(&self, n: i64) -> f64 {
        let len = self.probs.len() as i64;
        self.probs[n.rem_euclid(len) as usize]
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Largest `|probs[n] - probs[(N - n) mod N]|`.
    pub fn mirror_asymmetry(&self) -> f64 {
        let len = self.probs.len();
        (0..len)
            .map(|n| (self.probs[n] - self.probs[(len - n) % len]).abs())
            .fold(0.0, f64::max)
    }

    /// Index of the largest probability (the first one on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &x) in self.probs.iter().enumerate() {
            if x > self.probs[best] {
                best = i;
            }
        }
        best
    }

    /// Mass on the labels `n` with `lo <= n/N <= hi`.
    pub fn mass_between(&self, lo: f64, hi: f64) -> f64 {
        let len = self.probs.len() as f64;
        self.probs
            .iter()
            .enumerate()
            .filter(|(n, _)| {
                let x = *n as f64 / len;
                lo <= x && x <= hi
            })
            .map(|(_, &w)| w)
            .sum()
    }

    /// Total-variation distance to another distribution on the same labels.
    pub fn total_variation(&self, other: &SurvivalDistribution) -> f64 {
        assert_eq!(self.len(), other.len(), "distributions over different N");
        0.5 * self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }

    pub fn max_abs_diff(&self, other: &SurvivalDistribution) -> f64 {
        assert_eq!(self.len(), other.len(), "distributions over different N");
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
