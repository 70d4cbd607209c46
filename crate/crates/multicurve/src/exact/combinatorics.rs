//! Factorials, double factorials, binomials, and small integer-vector
//! iterators (compositions and partitions) used throughout the crate.

use num_bigint::BigInt;
use num_traits::One;

use super::Rational;

/// `n!` as a big integer.
pub fn factorial(n: u64) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= k;
    }
    acc
}

/// `n!` as a rational (numerator `n!`, denominator 1).
pub fn factorial_rat(n: u64) -> Rational {
    Rational::from(factorial(n))
}

/// Double factorial `n!!` with the usual conventions `0!! = (-1)!! = 1`.
///
/// Only `n ≥ -1` is meaningful here; the recursions use odd arguments.
pub fn double_factorial(n: i64) -> BigInt {
    assert!(n >= -1, "double factorial of {n}");
    let mut acc = BigInt::one();
    let mut k = n;
    while k > 1 {
        acc *= k;
        k -= 2;
    }
    acc
}

/// Binomial coefficient `C(n, k)` as a big integer; 0 when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Bernoulli numbers `B_0 … B_n` (convention `B_1 = -1/2`), from the
/// recurrence `Σ_{j≤m} C(m+1, j)·B_j = 0`.
pub fn bernoulli_numbers(n: usize) -> Vec<Rational> {
    let mut b: Vec<Rational> = Vec::with_capacity(n + 1);
    b.push(Rational::one());
    for m in 1..=n {
        let mut acc = Rational::from(BigInt::from(0));
        for (j, bj) in b.iter().enumerate() {
            acc += Rational::from(binomial(m as u64 + 1, j as u64)) * bj;
        }
        b.push(-acc / Rational::from(BigInt::from(m as i64 + 1)));
    }
    b
}

/// Visit every composition of `total` into exactly `parts` parts, each
/// `≥ min_part`, in lexicographic order. The callback receives a shared
/// scratch buffer; it must not hold on to the slice.
pub fn for_each_composition<F: FnMut(&[u32])>(total: u32, parts: usize, min_part: u32, mut f: F) {
    if parts == 0 {
        if total == 0 {
            f(&[]);
        }
        return;
    }
    if total < min_part * parts as u32 {
        return;
    }
    let mut buf = vec![min_part; parts];
    fn rec<F: FnMut(&[u32])>(buf: &mut [u32], idx: usize, rest: u32, min_part: u32, f: &mut F) {
        let parts_after = (buf.len() - idx - 1) as u32;
        if idx == buf.len() - 1 {
            buf[idx] = rest;
            f(buf);
            return;
        }
        for v in min_part..=rest - min_part * parts_after {
            buf[idx] = v;
            rec(buf, idx + 1, rest - v, min_part, f);
        }
    }
    rec(&mut buf, 0, total, min_part, &mut f);
}

/// All compositions of `total` into `parts` parts `≥ min_part`, materialized.
pub fn compositions(total: u32, parts: usize, min_part: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for_each_composition(total, parts, min_part, |c| out.push(c.to_vec()));
    out
}

/// All partitions of `total` into at most `max_parts` parts, each `≤ max_part`,
/// as non-increasing vectors (the empty partition of 0 included).
pub fn partitions(total: u32, max_parts: usize, max_part: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut buf = Vec::new();
    fn rec(rest: u32, slots: usize, cap: u32, buf: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rest == 0 {
            out.push(buf.clone());
            return;
        }
        if slots == 0 {
            return;
        }
        for v in (1..=rest.min(cap)).rev() {
            buf.push(v);
            rec(rest - v, slots - 1, v, buf, out);
            buf.pop();
        }
    }
    rec(total, max_parts, max_part, &mut buf, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorial_small() {
        assert_eq!(factorial(0), BigInt::from(1));
        assert_eq!(factorial(5), BigInt::from(120));
        assert_eq!(factorial(20), BigInt::from(2_432_902_008_176_640_000u64));
    }

    #[test]
    fn double_factorial_small() {
        assert_eq!(double_factorial(-1), BigInt::from(1));
        assert_eq!(double_factorial(0), BigInt::from(1));
        assert_eq!(double_factorial(5), BigInt::from(15));
        assert_eq!(double_factorial(9), BigInt::from(945));
        assert_eq!(double_factorial(8), BigInt::from(384));
    }

    #[test]
    fn binomial_row() {
        let row: Vec<_> = (0..=4).map(|k| binomial(4, k)).collect();
        assert_eq!(
            row,
            [1, 4, 6, 4, 1].iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>()
        );
        assert_eq!(binomial(3, 7), BigInt::from(0));
    }

    #[test]
    fn compositions_count_and_order() {
        // C(total-1, parts-1) compositions into positive parts.
        let c = compositions(5, 3, 1);
        assert_eq!(c.len(), 6);
        assert_eq!(c[0], vec![1, 1, 3]);
        assert_eq!(c[5], vec![3, 1, 1]);
        assert!(c.windows(2).all(|w| w[0] < w[1]));
        // Degenerate cases.
        assert_eq!(compositions(0, 0, 0).len(), 1);
        assert_eq!(compositions(2, 3, 1).len(), 0);
        assert_eq!(compositions(4, 2, 0).len(), 5);
    }

    #[test]
    fn partitions_count() {
        // p(6) = 11.
        assert_eq!(partitions(6, 6, 6).len(), 11);
        // partitions of 6 into at most 2 parts: 6, 5+1, 4+2, 3+3.
        assert_eq!(partitions(6, 2, 6).len(), 4);
    }

    #[test]
    fn bernoulli_values() {
        use super::super::rat;
        let b = bernoulli_numbers(12);
        assert_eq!(b[0], rat(1, 1));
        assert_eq!(b[1], rat(-1, 2));
        assert_eq!(b[2], rat(1, 6));
        assert_eq!(b[3], rat(0, 1));
        assert_eq!(b[4], rat(-1, 30));
        assert_eq!(b[6], rat(1, 42));
        assert_eq!(b[12], rat(-691, 2730));
    }
}
