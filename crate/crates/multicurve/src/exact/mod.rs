//! Exact arithmetic building blocks: big rationals, `q·√π` scalars, sparse
//! multivariate polynomials, and truncated power series.

mod combinatorics;
mod poly;
mod series;
mod sqrt_pi;

pub use combinatorics::{
    bernoulli_numbers, binomial, compositions, double_factorial, factorial, factorial_rat,
    for_each_composition, partitions,
};
pub use poly::SparsePolynomial;
pub use series::{PowerSeries, SeriesCoeff};
pub use sqrt_pi::{gamma_half, SqrtPiMultiple};

use num_bigint::BigInt;
use num_traits::ToPrimitive;

/// Arbitrary-precision rational number. All exact results in this crate are
/// reduced fractions of this type.
pub type Rational = num_rational::BigRational;

/// Rational from an integer pair. Panics on zero denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Rational from an integer.
pub fn rat_int(n: i64) -> Rational {
    Rational::from(BigInt::from(n))
}

/// Convert a rational to the nearest `f64`.
///
/// `BigRational::to_f64` handles magnitudes beyond the `f64` range by scaling,
/// so this is safe for the large factorial ratios that appear in the mass
/// formulas.
pub fn rat_to_f64(x: &Rational) -> f64 {
    x.to_f64().expect("rational to f64 conversion")
}

/// A scalar that is exact when the arithmetic permits and floating point
/// otherwise (the `m = ∞` paths, where ζ values are irrational).
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Exact(Rational),
    Float(f64),
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(q) => rat_to_f64(q),
            Value::Float(x) => *x,
        }
    }

    /// The exact rational, if this value carries one.
    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            Value::Exact(q) => Some(q),
            Value::Float(_) => None,
        }
    }

    /// Render for output files: `p/q` for exact values, 17 significant digits
    /// for floats.
    pub fn render(&self) -> String {
        match self {
            Value::Exact(q) => format!("{}/{}", q.numer(), q.denom()),
            Value::Float(x) => format_f64(*x),
        }
    }
}

/// Format a float with 17 significant digits (enough to round-trip an `f64`).
pub fn format_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_roundtrip() {
        let x = rat(49, 36);
        assert_eq!(x, rat(7, 6) * rat(7, 6));
        assert!((rat_to_f64(&x) - 49.0 / 36.0).abs() < 1e-15);
    }

    #[test]
    fn value_render() {
        assert_eq!(Value::Exact(rat(1, 24)).render(), "1/24");
        let s = Value::Float(0.5).render();
        assert!(s.parse::<f64>().unwrap() == 0.5, "{s}");
    }

    #[test]
    fn float_format_roundtrips() {
        for &x in &[1.0, std::f64::consts::PI, 2.0 / 3.0, 1.0e-300, 6.02e23] {
            let s = format_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }
}
