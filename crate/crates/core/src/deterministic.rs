//! The classical (every second person) Josephus survivor.
//!
//! Three independent routes to the one-based survivor `b_N`: the halving
//! recurrence `b_N = 2 b_{N/2} - (-1)^N`, the closed form `2l + 1` for
//! `N = 2^m + l`, and a one-position left rotation of the binary digits of `N`.
//! The generating series of `(b_N)` is expanded exactly for cross-checks.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::series::PowerSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeterministicSurvivor {
    pub n_participants: u64,
    /// `a_N`, a label in `0..N`.
    pub survivor_zero_based: u64,
    /// `b_N = a_N + 1`.
    pub survivor_one_based: u64,
}

impl DeterministicSurvivor {
    fn from_one_based(n: u64, b: u64) -> Self {
        DeterministicSurvivor {
            n_participants: n,
            survivor_zero_based: b - 1,
            survivor_one_based: b,
        }
    }
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        return domain("the number of participants must be at least 1");
    }
    Ok(())
}

/// Evaluates the halving recurrence along the chain `N, N/2, N/4, ..., 1`.
///
/// The chain is walked from its root `b_1 = 1` downwards through the binary
/// prefixes of `N`, so each query costs `O(log N)`.
pub fn survivor_recurrence(n: u64) -> Result<DeterministicSurvivor> {
    check_n(n)?;
    let bits = 64 - n.leading_zeros();
    let mut b: u64 = 1;
    for shift in (0..bits - 1).rev() {
        let prefix = n >> shift;
        b = if prefix & 1 == 0 { 2 * b - 1 } else { 2 * b + 1 };
    }
    Ok(DeterministicSurvivor::from_one_based(n, b))
}

pub fn survivor_closed_form(n: u64) -> Result<DeterministicSurvivor> {
    check_n(n)?;
    let top = 1u64 << (63 - n.leading_zeros());
    let l = n - top;
    Ok(DeterministicSurvivor::from_one_based(n, 2 * l + 1))
}

/// Moves the leading binary digit of `N` to the least significant position.
pub fn survivor_binary_rotation(n: u64) -> Result<DeterministicSurvivor> {
    check_n(n)?;
    let bits = 64 - n.leading_zeros();
    let top = 1u64 << (bits - 1);
    let b = ((n - top) << 1) | 1;
    Ok(DeterministicSurvivor::from_one_based(n, b))
}

/// Coefficients of `x^0 ..= x^max_degree` in
/// `1 + (1/(1-x)) * ((3x - 1)/(1-x) - sum_{k>=1} 2^k x^(2^k))`.
pub fn generating_series_coefficients(max_degree: usize) -> Result<Vec<BigInt>> {
    if max_degree == 0 {
        return domain("max_degree must be at least 1");
    }
    let d = max_degree;
    let inv_one_minus_x = PowerSeries::from_coeffs(d, [1, -1])
        .inverse()
        .expect("1 - x is a unit");
    let numerator = PowerSeries::from_coeffs(d, [-1, 3]);
    let mut inner = &numerator * &inv_one_minus_x;
    let mut k = 1u32;
    while let Some(pow) = 1usize.checked_shl(k).filter(|&e| e <= d) {
        inner.add_monomial(pow, -(BigInt::from(1u8) << k));
        k += 1;
    }
    let mut total = &inner * &inv_one_minus_x;
    total.add_monomial(0, 1);
    Ok(total.into_coeffs())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Step-by-step elimination on a `Vec`, independent of every formula above.
    fn simulate(n: u64) -> u64 {
        let mut ring: Vec<u64> = (0..n).collect();
        let mut knife = 0usize;
        while ring.len() > 1 {
            let victim = (knife + 1) % ring.len();
            ring.remove(victim);
            knife = if victim == 0 { 0 } else { victim % ring.len() };
        }
        ring[0] + 1
    }

    #[test]
    fn small_cases() {
        assert_eq!(survivor_recurrence(1).unwrap().survivor_one_based, 1);
        assert_eq!(survivor_recurrence(2).unwrap().survivor_one_based, 1);
        assert_eq!(survivor_closed_form(6).unwrap().survivor_one_based, 5);
        assert_eq!(survivor_binary_rotation(0b110).unwrap().survivor_one_based, 0b101);
        assert_eq!(survivor_binary_rotation(1).unwrap().survivor_one_based, 1);
    }

    #[test]
    fn forty_one() {
        assert_eq!(simulate(41), 19);
        for f in [survivor_recurrence, survivor_closed_form, survivor_binary_rotation] {
            let s = f(41).unwrap();
            assert_eq!(s.survivor_one_based, 19);
            assert_eq!(s.survivor_zero_based, 18);
        }
        assert_eq!(survivor_binary_rotation(0b101001).unwrap().survivor_one_based, 0b010011);
    }

    #[test]
    fn powers_of_two_survive_at_one() {
        for m in 0..63 {
            assert_eq!(survivor_closed_form(1 << m).unwrap().survivor_one_based, 1);
        }
    }

    #[test]
    fn matches_simulation() {
        for n in 1..=300 {
            assert_eq!(survivor_recurrence(n).unwrap().survivor_one_based, simulate(n), "N = {n}");
        }
    }

    #[test]
    fn zero_is_rejected() {
        assert!(survivor_recurrence(0).is_err());
        assert!(survivor_closed_form(0).is_err());
        assert!(survivor_binary_rotation(0).is_err());
        assert!(generating_series_coefficients(0).is_err());
    }

    #[test]
    fn series_matches_closed_form() {
        let coeffs = generating_series_coefficients(1024).unwrap();
        assert_eq!(coeffs.len(), 1025);
        assert_eq!(coeffs[1], BigInt::from(1));
        assert_eq!(coeffs[41], BigInt::from(19));
        for n in 1..=1024u64 {
            let b = survivor_recurrence(n).unwrap().survivor_one_based;
            assert_eq!(coeffs[n as usize], BigInt::from(b), "x^{n}");
        }
    }

    #[test]
    fn normalized_position_has_two_accumulation_points() {
        for m in 4..40u32 {
            let at_power = survivor_closed_form(1 << m).unwrap();
            assert_eq!(at_power.survivor_zero_based, 0);
            let n = (1u64 << m) + (1u64 << (m - 1));
            let s = survivor_closed_form(n).unwrap();
            let x = s.survivor_zero_based as f64 / n as f64;
            // a_N / N = 2/3 exactly here
            assert!(x >= 0.5, "m = {m}: {x}");
        }
    }
}
