//! Exact scalars of the form `q·√π`.
//!
//! Gamma at half-integers produces rational multiples of √π; ratios of two such
//! values are exact rationals again, which is what keeps the θ = 1/2 moment
//! formulas exact.

use num_bigint::BigInt;
use num_traits::One;
use std::ops::{Add, Mul};

use super::{factorial, rat_to_f64, Rational};

/// A scalar `coeff·√π` with `coeff` rational.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SqrtPiMultiple {
    coeff: Rational,
}

impl SqrtPiMultiple {
    pub fn new(coeff: Rational) -> Self {
        SqrtPiMultiple { coeff }
    }

    /// The rational coefficient of √π.
    pub fn coeff(&self) -> &Rational {
        &self.coeff
    }

    /// Exact rational ratio `self / other`. Panics if `other` is zero.
    pub fn ratio(&self, other: &SqrtPiMultiple) -> Rational {
        &self.coeff / &other.coeff
    }

    /// The product of two `q·√π` scalars is `q₁q₂·π`; this returns the exact
    /// rational coefficient of π.
    pub fn product_pi_coeff(&self, other: &SqrtPiMultiple) -> Rational {
        &self.coeff * &other.coeff
    }

    pub fn to_f64(&self) -> f64 {
        rat_to_f64(&self.coeff) * std::f64::consts::PI.sqrt()
    }
}

impl Mul<Rational> for SqrtPiMultiple {
    type Output = SqrtPiMultiple;
    fn mul(self, rhs: Rational) -> SqrtPiMultiple {
        SqrtPiMultiple::new(self.coeff * rhs)
    }
}

impl Add for SqrtPiMultiple {
    type Output = SqrtPiMultiple;
    fn add(self, rhs: SqrtPiMultiple) -> SqrtPiMultiple {
        SqrtPiMultiple::new(self.coeff + rhs.coeff)
    }
}

/// `Γ(k + 1/2) = (2k)! / (4^k k!) · √π`, exact.
pub fn gamma_half(k: u64) -> SqrtPiMultiple {
    let num = factorial(2 * k);
    let den = factorial(k) * (BigInt::one() << (2 * k));
    SqrtPiMultiple::new(Rational::new(num, den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    #[test]
    fn gamma_half_values() {
        // Γ(1/2) = √π, Γ(3/2) = (1/2)√π, Γ(5/2) = (3/4)√π.
        assert_eq!(*gamma_half(0).coeff(), rat(1, 1));
        assert_eq!(*gamma_half(1).coeff(), rat(1, 2));
        assert_eq!(*gamma_half(2).coeff(), rat(3, 4));
        // Recurrence Γ(z+1) = z·Γ(z) at z = k + 1/2.
        for k in 0..20u64 {
            let lhs = gamma_half(k + 1);
            let rhs = gamma_half(k) * rat(2 * k as i64 + 1, 2);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn ratio_and_product() {
        let a = gamma_half(3);
        let b = gamma_half(1);
        assert_eq!(a.ratio(&b), rat(15, 4)); // (15/8)/(1/2)
        assert_eq!(a.product_pi_coeff(&b), rat(15, 16));
        assert!((gamma_half(0).to_f64() - std::f64::consts::PI.sqrt()).abs() < 1e-15);
    }
}
