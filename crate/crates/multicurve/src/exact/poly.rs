//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Monomials are dense exponent vectors (one entry per variable) kept in a
//! `BTreeMap` so that iteration order, and therefore every downstream table
//! and sampler CDF, is deterministic.

use num_traits::Zero;
use std::collections::BTreeMap;
use std::fmt;

use super::{rat_to_f64, Rational};

/// A polynomial in `nvars` variables over the rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsePolynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u16>, Rational>,
}

impl SparsePolynomial {
    pub fn zero(nvars: usize) -> Self {
        SparsePolynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(&vec![0; nvars], c);
        p
    }

    /// Single monomial `c · Π x_i^{e_i}`.
    pub fn monomial(exponents: &[u16], c: Rational) -> Self {
        let mut p = Self::zero(exponents.len());
        p.add_term(exponents, c);
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Add `c · Π x_i^{e_i}` in place, dropping the monomial if the
    /// coefficient cancels.
    pub fn add_term(&mut self, exponents: &[u16], c: Rational) {
        assert_eq!(exponents.len(), self.nvars, "exponent vector length");
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exponents.to_vec()) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// Iterate monomials in deterministic (lexicographic exponent) order.
    pub fn iter(&self) -> impl Iterator<Item = (&[u16], &Rational)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn coefficient(&self, exponents: &[u16]) -> Rational {
        self.terms.get(exponents).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add(&self, other: &SparsePolynomial) -> SparsePolynomial {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (e, c) in other.iter() {
            out.add_term(e, c.clone());
        }
        out
    }

    pub fn mul(&self, other: &SparsePolynomial) -> SparsePolynomial {
        assert_eq!(self.nvars, other.nvars);
        let mut out = SparsePolynomial::zero(self.nvars);
        let mut exps = vec![0u16; self.nvars];
        for (e1, c1) in self.iter() {
            for (e2, c2) in other.iter() {
                for i in 0..self.nvars {
                    exps[i] = e1[i] + e2[i];
                }
                out.add_term(&exps, c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> SparsePolynomial {
        if c.is_zero() {
            return SparsePolynomial::zero(self.nvars);
        }
        SparsePolynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, q)| (e.clone(), q * c)).collect(),
        }
    }

    /// Substitute `x_i ↦ y_{map[i]}` into a polynomial over `new_nvars`
    /// variables (exponents of coinciding targets add). Used to evaluate a
    /// vertex polynomial on edge variables, where a loop repeats its variable.
    pub fn substitute_vars(&self, new_nvars: usize, map: &[usize]) -> SparsePolynomial {
        assert_eq!(map.len(), self.nvars);
        assert!(map.iter().all(|&j| j < new_nvars));
        let mut out = SparsePolynomial::zero(new_nvars);
        let mut exps = vec![0u16; new_nvars];
        for (e, c) in self.iter() {
            exps.iter_mut().for_each(|x| *x = 0);
            for (i, &ei) in e.iter().enumerate() {
                exps[map[i]] += ei;
            }
            out.add_term(&exps, c.clone());
        }
        out
    }

    /// Multiply by the monomial `Π x_i^{extra[i]}`.
    pub fn shift_exponents(&self, extra: &[u16]) -> SparsePolynomial {
        assert_eq!(extra.len(), self.nvars);
        SparsePolynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let shifted: Vec<u16> =
                        e.iter().zip(extra).map(|(a, b)| a + b).collect();
                    (shifted, c.clone())
                })
                .collect(),
        }
    }

    pub fn eval_rational(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.nvars);
        let mut acc = Rational::zero();
        for (e, c) in self.iter() {
            let mut term = c.clone();
            for (x, &k) in point.iter().zip(e) {
                for _ in 0..k {
                    term *= x;
                }
            }
            acc += term;
        }
        acc
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.nvars);
        self.iter()
            .map(|(e, c)| {
                rat_to_f64(c)
                    * point
                        .iter()
                        .zip(e)
                        .map(|(x, &k)| x.powi(k as i32))
                        .product::<f64>()
            })
            .sum()
    }
}

impl fmt::Display for SparsePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.iter() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    write!(f, "*x{i}^{k}")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    #[test]
    fn arithmetic_roundtrip() {
        // (x + y)^2 = x^2 + 2xy + y^2
        let mut p = SparsePolynomial::zero(2);
        p.add_term(&[1, 0], rat(1, 1));
        p.add_term(&[0, 1], rat(1, 1));
        let sq = p.mul(&p);
        assert_eq!(sq.coefficient(&[2, 0]), rat(1, 1));
        assert_eq!(sq.coefficient(&[1, 1]), rat(2, 1));
        assert_eq!(sq.coefficient(&[0, 2]), rat(1, 1));
        assert_eq!(sq.num_terms(), 3);
        assert_eq!(
            sq.eval_rational(&[rat(1, 2), rat(1, 3)]),
            rat(25, 36)
        );
    }

    #[test]
    fn cancellation_drops_terms() {
        let mut p = SparsePolynomial::zero(1);
        p.add_term(&[3], rat(2, 5));
        p.add_term(&[3], rat(-2, 5));
        assert!(p.is_zero());
    }

    #[test]
    fn substitution_merges_variables() {
        // x0^2 x1^4 with both variables mapped onto y0 gives y0^6.
        let p = SparsePolynomial::monomial(&[2, 4], rat(3, 1));
        let q = p.substitute_vars(2, &[0, 0]);
        assert_eq!(q.coefficient(&[6, 0]), rat(3, 1));
    }
}
