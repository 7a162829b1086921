use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Which elimination process is run, with its Bernoulli parameters.
///
/// * `Deterministic`: each holder kills the right neighbour and passes right.
/// * `R1`: the holder keeps the previous stabbing direction with probability
///   `p` and flips it otherwise; the first holder's "previous" direction is
///   right. The knife goes past the victim in the stabbing direction.
/// * `R2`: stab right with probability `p`, else left; the knife follows the
///   victim's side. No memory.
/// * `R3`: the victim side is right with probability `p`, and independently
///   the knife goes to the holder's right neighbour with probability `q`.
///
/// "Right" is the direction of increasing labels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Rule {
    Deterministic,
    R1 { p: f64 },
    R2 { p: f64 },
    R3 { p: f64, q: f64 },
}

fn check_prob(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return domain(format!("{name} = {x} is not a probability in [0, 1]"));
    }
    Ok(())
}

impl Rule {
    pub fn r1(p: f64) -> Result<Rule> {
        check_prob("p", p)?;
        Ok(Rule::R1 { p })
    }

    pub fn r2(p: f64) -> Result<Rule> {
        check_prob("p", p)?;
        Ok(Rule::R2 { p })
    }

    pub fn r3(p: f64, q: f64) -> Result<Rule> {
        check_prob("p", p)?;
        check_prob("q", q)?;
        Ok(Rule::R3 { p, q })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Rule::Deterministic => Ok(()),
            Rule::R1 { p } | Rule::R2 { p } => check_prob("p", p),
            Rule::R3 { p, q } => {
                check_prob("p", p)?;
                check_prob("q", q)
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Rule::Deterministic => "deterministic",
            Rule::R1 { .. } => "r1",
            Rule::R2 { .. } => "r2",
            Rule::R3 { .. } => "r3",
        }
    }

    pub fn p(&self) -> Option<f64> {
        match *self {
            Rule::Deterministic => None,
            Rule::R1 { p } | Rule::R2 { p } | Rule::R3 { p, .. } => Some(p),
        }
    }

    pub fn q(&self) -> Option<f64> {
        match *self {
            Rule::R3 { q, .. } => Some(q),
            _ => None,
        }
    }

    /// True when no coin toss can change the outcome.
    pub fn is_degenerate(&self) -> bool {
        let edge = |x: f64| x == 0.0 || x == 1.0;
        match *self {
            Rule::Deterministic => true,
            Rule::R1 { p } | Rule::R2 { p } => edge(p),
            Rule::R3 { p, q } => edge(p) && edge(q),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Rule::Deterministic => write!(f, "deterministic"),
            Rule::R1 { p } => write!(f, "R1(p={p})"),
            Rule::R2 { p } => write!(f, "R2(p={p})"),
            Rule::R3 { p, q } => write!(f, "R3(p={p}, q={q})"),
        }
    }
}

/// A [`Rule`] whose parameters are exact rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExactRule {
    Deterministic,
    R1 { p: BigRational },
    R2 { p: BigRational },
    R3 { p: BigRational, q: BigRational },
}

fn check_exact(name: &str, x: &BigRational) -> Result<()> {
    if x < &BigRational::zero() || x > &BigRational::one() {
        return domain(format!("{name} = {x} is not a probability in [0, 1]"));
    }
    Ok(())
}

/// `num / den` as an exact rational.
pub fn ratio(num: i64, den: i64) -> Result<BigRational> {
    if den == 0 {
        return domain("zero denominator");
    }
    Ok(BigRational::new(BigInt::from(num), BigInt::from(den)))
}

impl ExactRule {
    pub fn r1(p: BigRational) -> Result<Self> {
        check_exact("p", &p)?;
        Ok(ExactRule::R1 { p })
    }

    pub fn r2(p: BigRational) -> Result<Self> {
        check_exact("p", &p)?;
        Ok(ExactRule::R2 { p })
    }

    pub fn r3(p: BigRational, q: BigRational) -> Result<Self> {
        check_exact("p", &p)?;
        check_exact("q", &q)?;
        Ok(ExactRule::R3 { p, q })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ExactRule::Deterministic => Ok(()),
            ExactRule::R1 { p } | ExactRule::R2 { p } => check_exact("p", p),
            ExactRule::R3 { p, q } => {
                check_exact("p", p)?;
                check_exact("q", q)
            }
        }
    }

    /// The same rule with parameters rounded to the nearest `f64`.
    pub fn to_float(&self) -> Rule {
        let f = |x: &BigRational| x.to_f64().expect("probability fits in f64");
        match self {
            ExactRule::Deterministic => Rule::Deterministic,
            ExactRule::R1 { p } => Rule::R1 { p: f(p) },
            ExactRule::R2 { p } => Rule::R2 { p: f(p) },
            ExactRule::R3 { p, q } => Rule::R3 { p: f(p), q: f(q) },
        }
    }
}
