//! Seeded Monte Carlo sampling of survivors.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`): the 64-bit user
//! seed is expanded to a 256-bit key with `SeedableRng::seed_from_u64` (a
//! PCG32 expansion), and replicate `i` reads ChaCha stream `i` under that key.
//! Streams are disjoint by construction and the output is identical on every
//! platform. Each toss consumes one `u64` (see [`Coin::from_bits`]); R3 draws
//! the victim coin first, then the knife coin.
//!
//! [`Coin::from_bits`]: crate::process::Coin::from_bits

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::{Method, SurvivalDistribution};
use crate::error::{domain, Result};
use crate::process::ProcessState;
use crate::rule::Rule;

/// Replicates handed to one rayon task.
const CHUNK: u64 = 1024;

/// The generator for replicate `stream` under `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivorSample {
    pub rule: Rule,
    pub n_participants: usize,
    pub survivor: usize,
    /// `survivor / N`.
    pub normalized_position: f64,
    pub rng_seed: u64,
    pub path_length: usize,
}

fn check(rule: &Rule, n: usize) -> Result<()> {
    rule.validate()?;
    if n < 2 {
        return domain(format!("simulation needs N >= 2, got {n}"));
    }
    Ok(())
}

/// Plays one round with tosses drawn from `rng`.
pub fn run_round<R: RngCore>(rule: &Rule, n: usize, rng: &mut R) -> Result<usize> {
    check(rule, n)?;
    let mut state = ProcessState::new(*rule, n)?;
    Ok(state.run_with(|| rng.next_u64()))
}

/// One survivor drawn from stream 0 of `seed`.
pub fn sample_survivor(rule: &Rule, n: usize, seed: u64) -> Result<SurvivorSample> {
    let mut rng = rng_stream(seed, 0);
    let survivor = run_round(rule, n, &mut rng)?;
    Ok(SurvivorSample {
        rule: *rule,
        n_participants: n,
        survivor,
        normalized_position: survivor as f64 / n as f64,
        rng_seed: seed,
        path_length: n - 1,
    })
}

/// Survivor counts over `samples` replicates; replicate `i` uses stream `i`.
/// The result does not depend on how rayon schedules the work.
pub fn empirical_counts(rule: &Rule, n: usize, samples: u64, seed: u64) -> Result<Vec<u64>> {
    check(rule, n)?;
    if samples == 0 {
        return domain("at least one sample is required");
    }
    let chunks = samples.div_ceil(CHUNK);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut counts = vec![0u64; n];
            let mut state = ProcessState::new(*rule, n).expect("validated");
            let fresh = state.clone();
            for i in c * CHUNK..((c + 1) * CHUNK).min(samples) {
                let mut rng = rng_stream(seed, i);
                state.clone_from(&fresh);
                counts[state.run_with(|| rng.next_u64())] += 1;
            }
            counts
        })
        .reduce(
            || vec![0u64; n],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(counts)
}

pub fn empirical_distribution(
    rule: &Rule,
    n: usize,
    samples: u64,
    seed: u64,
) -> Result<SurvivalDistribution> {
    let counts = empirical_counts(rule, n, samples, seed)?;
    Ok(from_counts(rule, &counts))
}

/// Frequencies from raw counts.
pub fn from_counts(rule: &Rule, counts: &[u64]) -> SurvivalDistribution {
    let total: u64 = counts.iter().sum();
    SurvivalDistribution {
        rule: *rule,
        n_participants: counts.len(),
        probs: counts.iter().map(|&c| c as f64 / total as f64).collect(),
        method: Method::MonteCarlo,
        mc_samples: Some(total),
    }
}
