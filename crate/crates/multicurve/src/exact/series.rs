//! Truncated power series with explicit order bookkeeping.
//!
//! A `PowerSeries` stores coefficients of `z^0 ..= z^order` and remembers
//! `order` as the truncation point: arithmetic on two series is only valid up
//! to the smaller order, and every operation records the order of what it
//! actually knows rather than padding with silent zeros.

use std::ops::{Add, Div, Mul, Sub};

use num_traits::{One, ToPrimitive, Zero};

use super::Rational;

/// Coefficient ring for truncated series: exact rationals or floats.
pub trait SeriesCoeff:
    Clone
    + PartialEq
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_integer(n: u64) -> Self;
    fn as_f64(&self) -> f64;
}

impl SeriesCoeff for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn from_integer(n: u64) -> Self {
        Rational::from_integer(n.into())
    }
    fn as_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).expect("rational to f64 conversion")
    }
}

impl SeriesCoeff for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn from_integer(n: u64) -> Self {
        n.to_f64().expect("u64 fits in f64 range")
    }
    fn as_f64(&self) -> f64 {
        *self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries<T: SeriesCoeff> {
    /// `coeffs[k]` is the coefficient of `z^k`; length is `order + 1`.
    coeffs: Vec<T>,
}

impl<T: SeriesCoeff> PowerSeries<T> {
    /// Series with the given coefficients of `z^0 ..= z^{len-1}`.
    pub fn from_coeffs(coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty(), "series needs at least the constant term");
        PowerSeries { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        PowerSeries { coeffs: vec![T::zero(); order + 1] }
    }

    pub fn one(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = T::one();
        s
    }

    /// Truncation order: coefficients above it are unknown, not zero.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> T {
        assert!(
            k <= self.order(),
            "coefficient {k} beyond truncation order {}",
            self.order()
        );
        self.coeffs[k].clone()
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn set_coeff(&mut self, k: usize, v: T) {
        assert!(k <= self.order());
        self.coeffs[k] = v;
    }

    pub fn truncate(&self, order: usize) -> Self {
        assert!(order <= self.order(), "cannot extend a truncated series");
        PowerSeries { coeffs: self.coeffs[..=order].to_vec() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        PowerSeries {
            coeffs: (0..=n)
                .map(|k| self.coeffs[k].clone() + other.coeffs[k].clone())
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        PowerSeries {
            coeffs: (0..=n)
                .map(|k| self.coeffs[k].clone() - other.coeffs[k].clone())
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        let mut coeffs = vec![T::zero(); n + 1];
        for i in 0..=n.min(self.order()) {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..=(n - i).min(other.order()) {
                coeffs[i + j] = coeffs[i + j].clone()
                    + self.coeffs[i].clone() * other.coeffs[j].clone();
            }
        }
        PowerSeries { coeffs }
    }

    pub fn scale(&self, c: &T) -> Self {
        PowerSeries {
            coeffs: self.coeffs.iter().map(|a| a.clone() * c.clone()).collect(),
        }
    }

    /// Formal derivative; the top coefficient is lost, so the order drops.
    pub fn derivative(&self) -> Self {
        assert!(self.order() >= 1, "derivative needs order at least 1");
        PowerSeries {
            coeffs: (1..=self.order())
                .map(|k| self.coeffs[k].clone() * T::from_integer(k as u64))
                .collect(),
        }
    }

    /// Multiply by `z^k`; the known range extends accordingly.
    pub fn shift_up(&self, k: usize) -> Self {
        let mut coeffs = vec![T::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        PowerSeries { coeffs }
    }

    /// Substitute `z ↦ z^k` for `k ≥ 1`.
    pub fn substitute_power(&self, k: usize) -> Self {
        assert!(k >= 1);
        let mut coeffs = vec![T::zero(); self.order() * k + 1];
        for (j, c) in self.coeffs.iter().enumerate() {
            coeffs[j * k] = c.clone();
        }
        PowerSeries { coeffs }
    }

    /// `exp` of a series with zero constant term, via the standard
    /// coefficient recurrence `n·f_n = Σ_{k=1}^{n} k·s_k·f_{n-k}`.
    pub fn exp(&self) -> Self {
        assert!(
            self.coeffs[0].is_zero(),
            "exp of a series requires zero constant term"
        );
        let n = self.order();
        let mut f = vec![T::zero(); n + 1];
        f[0] = T::one();
        for m in 1..=n {
            let mut acc = T::zero();
            for k in 1..=m {
                if self.coeffs[k].is_zero() {
                    continue;
                }
                acc = acc
                    + T::from_integer(k as u64)
                        * self.coeffs[k].clone()
                        * f[m - k].clone();
            }
            f[m] = acc / T::from_integer(m as u64);
        }
        PowerSeries { coeffs: f }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    #[test]
    fn exp_recurrence_matches_hand_expansion() {
        // exp(z + z^2) = 1 + z + 3/2 z^2 + 7/6 z^3 + ...
        let s = PowerSeries::from_coeffs(vec![rat(0, 1), rat(1, 1), rat(1, 1), rat(0, 1)]);
        let e = s.exp();
        assert_eq!(e.coeff(0), rat(1, 1));
        assert_eq!(e.coeff(1), rat(1, 1));
        assert_eq!(e.coeff(2), rat(3, 2));
        assert_eq!(e.coeff(3), rat(7, 6));
    }

    #[test]
    fn mul_truncates_to_min_order() {
        let a = PowerSeries::from_coeffs(vec![1.0, 1.0, 1.0, 1.0]);
        let b = PowerSeries::from_coeffs(vec![1.0, -1.0]);
        let p = a.mul(&b);
        assert_eq!(p.order(), 1);
        assert_eq!(p.coeff(0), 1.0);
        assert_eq!(p.coeff(1), 0.0);
    }

    #[test]
    fn derivative_and_shift_track_order() {
        let s = PowerSeries::from_coeffs(vec![rat(5, 1), rat(3, 1), rat(2, 1)]);
        let d = s.derivative();
        assert_eq!(d.order(), 1);
        assert_eq!(d.coeff(0), rat(3, 1));
        assert_eq!(d.coeff(1), rat(4, 1));
        let up = d.shift_up(2);
        assert_eq!(up.order(), 3);
        assert_eq!(up.coeff(2), rat(3, 1));
        assert_eq!(up.coeff(0), rat(0, 1));
    }

    #[test]
    fn geometric_series_inverts_one_minus_z() {
        let n = 16;
        let geo = PowerSeries::from_coeffs(vec![rat(1, 1); n + 1]);
        let mut one_minus_z = PowerSeries::zero(n);
        one_minus_z.set_coeff(0, rat(1, 1));
        one_minus_z.set_coeff(1, rat(-1, 1));
        let prod = geo.mul(&one_minus_z);
        assert_eq!(prod.coeff(0), rat(1, 1));
        for k in 1..=n {
            assert_eq!(prod.coeff(k), rat(0, 1));
        }
    }
}
