//! Survival distributions of probabilistic Josephus elimination processes.
//!
//! * [`deterministic`]: the classical survivor `b_N` three ways, plus its
//!   generating series.
//! * [`survival_dp`]: exact distributions for rules R1, R2 and R3.
//! * [`process`]: the step-by-step process, its exhaustive [`oracle`] and a
//!   seeded Monte Carlo sampler ([`montecarlo`]).
//! * [`analysis`]: moments, decay bounds and the central-limit harness.

pub mod analysis;
pub mod deterministic;
pub mod distribution;
pub mod error;
pub mod montecarlo;
pub mod oracle;
pub mod process;
pub mod rule;
pub mod series;
pub mod survival_dp;

pub use distribution::{Method, SurvivalDistribution};
pub use error::{Error, Result};
pub use rule::{ExactRule, Rule};
