//! Truncated formal power series with arbitrary-precision integer coefficients.

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};

/// A power series `sum c_k x^k` kept modulo `x^(max_degree + 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerSeries {
    coeffs: Vec<BigInt>,
}

impl PowerSeries {
    pub fn zero(max_degree: usize) -> Self {
        PowerSeries {
            coeffs: vec![BigInt::zero(); max_degree + 1],
        }
    }

    /// Builds a series from the leading coefficients; missing ones are zero,
    /// extra ones are truncated.
    pub fn from_coeffs<I, T>(max_degree: usize, coeffs: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: Into<BigInt>,
    {
        let mut s = Self::zero(max_degree);
        for (k, c) in coeffs.into_iter().enumerate().take(max_degree + 1) {
            s.coeffs[k] = c.into();
        }
        s
    }

    pub fn max_degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &BigInt {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<BigInt> {
        self.coeffs
    }

    /// Adds `c x^k` in place (ignored beyond the truncation order).
    pub fn add_monomial(&mut self, k: usize, c: impl Into<BigInt>) {
        if k <= self.max_degree() {
            self.coeffs[k] += c.into();
        }
    }

    /// Multiplicative inverse; requires a constant term of +1 or -1.
    pub fn inverse(&self) -> Option<Self> {
        let c0 = &self.coeffs[0];
        if !(c0.is_one() || (-c0).is_one()) {
            return None;
        }
        let d = self.max_degree();
        let mut inv = Self::zero(d);
        inv.coeffs[0] = c0.clone();
        for k in 1..=d {
            let mut acc = BigInt::zero();
            for j in 1..=k {
                if !self.coeffs[j].is_zero() {
                    acc += &self.coeffs[j] * &inv.coeffs[k - j];
                }
            }
            // c0 * inv_k = -acc and c0 = c0^{-1}
            inv.coeffs[k] = -(acc * c0);
        }
        Some(inv)
    }

    /// Multiplication by `1/(1-x)`, i.e. prefix sums of the coefficients.
    pub fn cumulative(&self) -> Self {
        let mut out = self.clone();
        for k in 1..out.coeffs.len() {
            let prev = out.coeffs[k - 1].clone();
            out.coeffs[k] += prev;
        }
        out
    }

    fn check_degree(&self, other: &Self) {
        assert_eq!(
            self.max_degree(),
            other.max_degree(),
            "power series truncated at different orders"
        );
    }
}

impl Add for &PowerSeries {
    type Output = PowerSeries;
    fn add(self, rhs: &PowerSeries) -> PowerSeries {
        self.check_degree(rhs);
        PowerSeries {
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &PowerSeries {
    type Output = PowerSeries;
    fn sub(self, rhs: &PowerSeries) -> PowerSeries {
        self.check_degree(rhs);
        PowerSeries {
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &PowerSeries {
    type Output = PowerSeries;
    fn neg(self) -> PowerSeries {
        PowerSeries {
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }
}

impl Mul for &PowerSeries {
    type Output = PowerSeries;
    fn mul(self, rhs: &PowerSeries) -> PowerSeries {
        self.check_degree(rhs);
        let d = self.max_degree();
        let mut out = PowerSeries::zero(d);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs[..=d - i].iter().enumerate() {
                if !b.is_zero() {
                    out.coeffs[i + j] += a * b;
                }
            }
        }
        out
    }
}
