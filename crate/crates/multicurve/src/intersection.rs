//! ψ-class correlators, Kontsevich volume polynomials, and deviation factors.
//!
//! The correlators `⟨τ_{d_1}⋯τ_{d_n}⟩_{g,n}` are rational numbers defined for
//! stable `(g,n)` (that is `2g-2+n > 0`) and nonzero only when the dimension
//! constraint `Σd_i = 3g-3+n` holds. They are computed exactly by the
//! Dijkgraaf–Verlinde–Verlinde (Virasoro) one-index reduction together with
//! the string and dilaton equations, bottoming out at the two seed values
//! `⟨τ_0³⟩_{0,3} = 1` and `⟨τ_1⟩_{1,1} = 1/24`. All results are memoized in a
//! [`CorrelatorTable`] that can be persisted to a line-oriented text cache.
//!
//! On top of the correlators the module assembles the Kontsevich volume
//! polynomials
//!
//! ```text
//! V_{g,n}(x_1,…,x_n) = (1/2^{3g-3+n}) Σ_{Σd = 3g-3+n} ⟨τ_d⟩/Πd_i! · Πx_i^{2d_i}
//! ```
//!
//! the large-genus deviation `ε(d)` of a correlator from its double-factorial
//! approximation, and the coefficients `c̃_{g,k}(j)` appearing in the expansion
//! of the one-vertex graph polynomials `F_{g,k}`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use sha2::{Digest, Sha256};

use crate::exact::{
    double_factorial, factorial, for_each_composition, rat_int, Rational, SparsePolynomial,
};
use crate::{Error, Result};

/// Memo key: genus plus the multiset of τ-indices in nonincreasing order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CorrelatorKey {
    genus: u32,
    indices: Vec<u32>,
}

impl CorrelatorKey {
    /// Build a key, sorting the indices into canonical nonincreasing order.
    pub fn new(genus: u32, indices: &[u32]) -> Self {
        let mut v = indices.to_vec();
        v.sort_unstable_by(|a, b| b.cmp(a));
        CorrelatorKey { genus, indices: v }
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    /// Stability of the moduli space: `2g - 2 + n > 0`.
    pub fn is_stable(&self) -> bool {
        2 * self.genus as i64 - 2 + self.indices.len() as i64 > 0
    }

    /// Dimension constraint for a nonzero correlator: `Σd_i = 3g - 3 + n`.
    pub fn dimension_matches(&self) -> bool {
        let total: i64 = self.indices.iter().map(|&d| d as i64).sum();
        total == 3 * self.genus as i64 - 3 + self.indices.len() as i64
    }
}

/// Shared memo table for ψ-class correlators.
///
/// Queries are pure; a lock is held for the duration of a cache miss so that
/// recursive fills are linearized, and results are immutable afterwards.
pub struct CorrelatorTable {
    memo: Mutex<BTreeMap<CorrelatorKey, Rational>>,
    volumes: Mutex<BTreeMap<(u32, usize), SparsePolynomial>>,
}

impl Default for CorrelatorTable {
    fn default() -> Self {
        Self::new()
    }
}

const CACHE_HEADER: &str = "psi-cache v1";

impl CorrelatorTable {
    /// Fresh table containing the two seed records.
    pub fn new() -> Self {
        let mut memo = BTreeMap::new();
        memo.insert(CorrelatorKey::new(0, &[0, 0, 0]), Rational::one());
        memo.insert(CorrelatorKey::new(1, &[1]), rat_int(24).recip());
        CorrelatorTable { memo: Mutex::new(memo), volumes: Mutex::new(BTreeMap::new()) }
    }

    /// Number of memoized correlator records.
    pub fn len(&self) -> usize {
        self.memo.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Exact value of `⟨τ_{d_1}⋯τ_{d_n}⟩_{g,n}`.
    ///
    /// Returns zero when the dimension constraint fails and an error when
    /// `(g,n)` is unstable. Symmetric in `d`.
    pub fn correlator(&self, g: u32, d: &[u32]) -> Result<Rational> {
        let key = CorrelatorKey::new(g, d);
        if !key.is_stable() {
            return Err(Error::invalid(format!(
                "correlator requested for unstable (g,n) = ({g},{})",
                d.len()
            )));
        }
        let mut memo = self.memo.lock().unwrap();
        Ok(compute(&mut memo, key.genus, key.indices))
    }

    /// The Kontsevich volume polynomial `V_{g,n}` in `n` variables.
    pub fn volume_polynomial(&self, g: u32, n: usize) -> Result<SparsePolynomial> {
        if 2 * g as i64 - 2 + n as i64 <= 0 {
            return Err(Error::invalid(format!(
                "volume polynomial requested for unstable (g,n) = ({g},{n})"
            )));
        }
        if let Some(p) = self.volumes.lock().unwrap().get(&(g, n)) {
            return Ok(p.clone());
        }
        let dim = 3 * g + n as u32 - 3;
        let mut poly = SparsePolynomial::zero(n);
        let two_pow: BigInt = BigInt::one() << dim;
        let mut memo = self.memo.lock().unwrap();
        let mut exps = vec![0u16; n];
        for_each_composition(dim, n, 0, |d| {
            let corr = compute(&mut memo, g, {
                let mut v = d.to_vec();
                v.sort_unstable_by(|a, b| b.cmp(a));
                v
            });
            if corr.is_zero() {
                return;
            }
            let mut denom = two_pow.clone();
            for &di in d {
                denom *= factorial(di as u64);
            }
            for (e, &di) in exps.iter_mut().zip(d) {
                *e = 2 * di as u16;
            }
            poly.add_term(&exps, corr / Rational::from_integer(denom));
        });
        drop(memo);
        self.volumes.lock().unwrap().insert((g, n), poly.clone());
        Ok(poly)
    }

    /// Apply `f` to the memoized `V_{g,n}` without cloning it. Useful for
    /// large tables where the caller only needs a derived polynomial (for
    /// example a variable substitution).
    pub fn map_volume_polynomial<R>(
        &self,
        g: u32,
        n: usize,
        f: impl FnOnce(&SparsePolynomial) -> R,
    ) -> Result<R> {
        {
            let volumes = self.volumes.lock().unwrap();
            if let Some(p) = volumes.get(&(g, n)) {
                return Ok(f(p));
            }
        }
        self.volume_polynomial(g, n)?;
        let volumes = self.volumes.lock().unwrap();
        Ok(f(volumes.get(&(g, n)).expect("volume polynomial just inserted")))
    }

    /// Deviation `ε(d)` of a correlator from its double-factorial
    /// approximation, defined by
    ///
    /// ```text
    /// ⟨τ_d⟩_{g,n} = ((6g-5+2n)!! / Π(2d_i+1)!!) · 1/(g!·24^g) · (1 + ε(d))
    /// ```
    pub fn epsilon_deviation(&self, g: u32, d: &[u32]) -> Result<Rational> {
        let key = CorrelatorKey::new(g, d);
        if !key.is_stable() {
            return Err(Error::invalid(format!(
                "epsilon requested for unstable (g,n) = ({g},{})",
                d.len()
            )));
        }
        if !key.dimension_matches() {
            return Err(Error::invalid(format!(
                "epsilon requires Σd = 3g-3+n; got genus {g} and d = {d:?}"
            )));
        }
        let n = d.len() as i64;
        let mut denom = Rational::from_integer(factorial(g as u64)) * rat_int(24).pow(g as i32);
        for &di in d {
            denom *= Rational::from_integer(double_factorial(2 * di as i64 + 1));
        }
        let predicted =
            Rational::from_integer(double_factorial(6 * g as i64 - 5 + 2 * n)) / denom;
        if predicted.is_zero() {
            return Err(Error::invalid("epsilon undefined: predicted value is zero"));
        }
        let actual = self.correlator(g, d)?;
        Ok(actual / predicted - Rational::one())
    }

    /// The coefficient `c̃_{g,k}(j_1,…,j_k) = c_{g-k,k}(j_1-1,…,j_k-1)` from
    /// the expansion of the one-vertex graph polynomial `F_{g,k}`, where
    ///
    /// ```text
    /// c_{h,k}(d) = (h!·(3h-3+2k)!/(6h-5+4k)!) · (3^h/2^{3h-6+5k})
    ///              · Π(2d_i+2)! · Σ_{d_i^- + d_i^+ = d_i} ⟨Πτ_{d_i^-}τ_{d_i^+}⟩_{h,2k} / Π d_i^-! d_i^+!
    /// ```
    pub fn c_tilde(&self, g: u32, j: &[u32]) -> Result<Rational> {
        let k = j.len() as u32;
        if k == 0 || k > g {
            return Err(Error::invalid(format!(
                "c̃_{{g,k}} requires 1 ≤ k ≤ g; got g = {g}, k = {k}"
            )));
        }
        if j.iter().any(|&ji| ji == 0) {
            return Err(Error::invalid("c̃_{g,k} requires all j_i ≥ 1"));
        }
        let total: u64 = j.iter().map(|&ji| ji as u64).sum();
        if total != 3 * g as u64 - 3 {
            return Err(Error::invalid(format!(
                "c̃_{{g,k}} requires Σj = 3g-3 = {}; got {total}",
                3 * g - 3
            )));
        }
        let h = g - k;
        if 3 * (h as i64) - 3 + 2 * (k as i64) < 0 {
            return Err(Error::invalid("c̃_{g,k} undefined: (h,2k) out of range"));
        }
        let d: Vec<u32> = j.iter().map(|&ji| ji - 1).collect();

        let mut prefactor = Rational::from_integer(
            factorial(h as u64) * factorial((3 * h + 2 * k - 3) as u64),
        ) / Rational::from_integer(factorial((6 * h as i64 - 5 + 4 * k as i64) as u64));
        prefactor *= Rational::from_integer(BigInt::from(3u32).pow(h))
            * pow2(6 - 3 * h as i64 - 5 * k as i64);
        for &di in &d {
            prefactor *= Rational::from_integer(factorial(2 * di as u64 + 2));
        }

        // Sum over all ways to split each d_i into an ordered pair
        // (d_i^-, d_i^+); iterate with an odometer over the split points.
        let mut sum = Rational::zero();
        let mut sel = vec![0u32; d.len()];
        let mut memo = self.memo.lock().unwrap();
        loop {
            let mut indices = Vec::with_capacity(2 * d.len());
            let mut fact_denom = BigInt::one();
            for (i, &di) in d.iter().enumerate() {
                let lo = sel[i];
                let hi = di - lo;
                indices.push(lo);
                indices.push(hi);
                fact_denom *= factorial(lo as u64) * factorial(hi as u64);
            }
            indices.sort_unstable_by(|a, b| b.cmp(a));
            let corr = compute(&mut memo, h, indices);
            if !corr.is_zero() {
                sum += corr / Rational::from_integer(fact_denom);
            }
            // Advance the odometer.
            let mut pos = 0;
            loop {
                if pos == d.len() {
                    drop(memo);
                    return Ok(prefactor * sum);
                }
                if sel[pos] < d[pos] {
                    sel[pos] += 1;
                    break;
                }
                sel[pos] = 0;
                pos += 1;
            }
        }
    }

    /// Serialize the memo as the versioned text cache format.
    pub fn to_cache_string(&self) -> String {
        let memo = self.memo.lock().unwrap();
        let mut out = String::with_capacity(32 * memo.len() + 16);
        out.push_str(CACHE_HEADER);
        out.push('\n');
        for (key, value) in memo.iter() {
            write!(out, "{} {}", key.genus, key.indices.len()).unwrap();
            for d in &key.indices {
                write!(out, " {d}").unwrap();
            }
            writeln!(out, " {}/{}", value.numer(), value.denom()).unwrap();
        }
        out
    }

    /// Parse a cache produced by [`Self::to_cache_string`]. Any malformed or
    /// truncated content is reported as a cache-corruption error.
    pub fn from_cache_str(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(CACHE_HEADER) => {}
            _ => {
                return Err(Error::cache(format!(
                    "correlator cache missing `{CACHE_HEADER}` header line"
                )))
            }
        }
        if !text.ends_with('\n') {
            return Err(Error::cache("correlator cache is truncated (no final newline)"));
        }
        let mut memo = BTreeMap::new();
        for (lineno, line) in lines.enumerate() {
            let corrupt =
                |what: &str| Error::cache(format!("cache line {}: {what}", lineno + 2));
            if line.is_empty() {
                return Err(corrupt("empty record"));
            }
            let tokens: Vec<&str> = line.split(' ').collect();
            if tokens.len() < 3 {
                return Err(corrupt("expected `g n d_1 … d_n p/q`"));
            }
            let g: u32 = tokens[0].parse().map_err(|_| corrupt("bad genus"))?;
            let n: usize = tokens[1].parse().map_err(|_| corrupt("bad index count"))?;
            if tokens.len() != n + 3 {
                return Err(corrupt("index count does not match record length"));
            }
            let mut indices = Vec::with_capacity(n);
            for t in &tokens[2..2 + n] {
                indices.push(t.parse::<u32>().map_err(|_| corrupt("bad index"))?);
            }
            let (num, den) = tokens[n + 2]
                .split_once('/')
                .ok_or_else(|| corrupt("value is not of the form p/q"))?;
            let num = BigInt::from_str(num).map_err(|_| corrupt("bad numerator"))?;
            let den = BigInt::from_str(den).map_err(|_| corrupt("bad denominator"))?;
            if !den.is_positive() {
                return Err(corrupt("denominator must be positive"));
            }
            let key = CorrelatorKey::new(g, &indices);
            if !key.is_stable() || !key.dimension_matches() {
                return Err(corrupt("record violates stability or dimension"));
            }
            if memo.insert(key, Rational::new(num, den)).is_some() {
                return Err(corrupt("duplicate record"));
            }
        }
        Ok(CorrelatorTable { memo: Mutex::new(memo), volumes: Mutex::new(BTreeMap::new()) })
    }

    /// Check that the two seed records are present with their exact values.
    pub fn verify_seeds(&self) -> Result<()> {
        let memo = self.memo.lock().unwrap();
        let seeds: [(CorrelatorKey, Rational); 2] = [
            (CorrelatorKey::new(0, &[0, 0, 0]), Rational::one()),
            (CorrelatorKey::new(1, &[1]), rat_int(24).recip()),
        ];
        for (key, expected) in seeds {
            match memo.get(&key) {
                Some(v) if *v == expected => {}
                _ => {
                    return Err(Error::cache(format!(
                        "correlator cache is missing seed ⟨τ_d⟩ for genus {} d = {:?}",
                        key.genus, key.indices
                    )))
                }
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_cache_str(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_cache_string())?;
        Ok(())
    }

    /// SHA-256 of the serialized cache, as lowercase hex.
    pub fn checksum_hex(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.to_cache_string().as_bytes());
        let digest = hasher.finalize();
        let mut out = String::with_capacity(64);
        for byte in digest {
            write!(out, "{byte:02x}").unwrap();
        }
        out
    }
}

/// `2^e` for a possibly negative exponent.
fn pow2(e: i64) -> Rational {
    if e >= 0 {
        Rational::from_integer(BigInt::one() << e)
    } else {
        Rational::from_integer(BigInt::one() << (-e)).recip()
    }
}

fn ddf(n: i64) -> Rational {
    Rational::from_integer(double_factorial(n))
}

/// Core recursion. `indices` must be sorted nonincreasing.
fn compute(memo: &mut BTreeMap<CorrelatorKey, Rational>, g: u32, indices: Vec<u32>) -> Rational {
    let n = indices.len() as i64;
    if 2 * g as i64 - 2 + n <= 0 {
        return Rational::zero();
    }
    let total: i64 = indices.iter().map(|&d| d as i64).sum();
    if total != 3 * g as i64 - 3 + n {
        return Rational::zero();
    }
    if g == 0 && n == 3 {
        return Rational::one();
    }
    if g == 1 && n == 1 {
        return rat_int(24).recip();
    }
    let key = CorrelatorKey { genus: g, indices };
    if let Some(v) = memo.get(&key) {
        return v.clone();
    }
    let d = &key.indices;
    let min = *d.last().unwrap();
    let value = if min == 0 {
        string_rule(memo, g, d)
    } else if min == 1 && d.len() >= 2 {
        dilaton_rule(memo, g, d)
    } else {
        dvv_rule(memo, g, d)
    };
    memo.insert(key, value.clone());
    value
}

/// String equation: `⟨τ_0 Πτ_{d_i}⟩_{g,n} = Σ_j ⟨τ_{d_j-1} Π_{i≠j}τ_{d_i}⟩_{g,n-1}`.
fn string_rule(memo: &mut BTreeMap<CorrelatorKey, Rational>, g: u32, d: &[u32]) -> Rational {
    debug_assert_eq!(*d.last().unwrap(), 0);
    let base = &d[..d.len() - 1];
    let mut acc = Rational::zero();
    for (value, count) in distinct_counts(base) {
        if value == 0 {
            continue;
        }
        let mut child = base.to_vec();
        let pos = child.iter().position(|&x| x == value).unwrap();
        child[pos] = value - 1;
        child.sort_unstable_by(|a, b| b.cmp(a));
        let term = compute(memo, g, child);
        if !term.is_zero() {
            acc += rat_int(count as i64) * term;
        }
    }
    acc
}

/// Dilaton equation: `⟨τ_1 Πτ_{d_i}⟩_{g,n} = (2g-2+n-1)·⟨Πτ_{d_i}⟩_{g,n-1}`.
fn dilaton_rule(memo: &mut BTreeMap<CorrelatorKey, Rational>, g: u32, d: &[u32]) -> Rational {
    debug_assert_eq!(*d.last().unwrap(), 1);
    let child = d[..d.len() - 1].to_vec();
    let factor = 2 * g as i64 - 2 + d.len() as i64 - 1;
    rat_int(factor) * compute(memo, g, child)
}

/// One-index DVV (Virasoro) reduction on the largest index `d_0 = k+1`:
///
/// ```text
/// (2k+3)!!·⟨τ_{k+1} S⟩_g =
///     Σ_{j∈S} ((2k+2d_j+1)!!/(2d_j-1)!!)·⟨τ_{k+d_j} S∖{d_j}⟩_g
///   + (1/2) Σ_{a+b=k-1} (2a+1)!!(2b+1)!!·( ⟨τ_a τ_b S⟩_{g-1}
///       + Σ_{g_1+g_2=g} Σ_{I⊆S} ⟨τ_a I⟩_{g_1}·⟨τ_b S∖I⟩_{g_2} )
/// ```
///
/// Terms whose key is unstable or misses the dimension constraint vanish.
fn dvv_rule(memo: &mut BTreeMap<CorrelatorKey, Rational>, g: u32, d: &[u32]) -> Rational {
    let k = d[0] - 1;
    let s = &d[1..];
    let mut acc = Rational::zero();

    // Joining term: merge τ_{k+1} with one marked point of S.
    for (value, count) in distinct_counts(s) {
        let mut child = s.to_vec();
        let pos = child.iter().position(|&x| x == value).unwrap();
        child[pos] = k + value;
        child.sort_unstable_by(|a, b| b.cmp(a));
        let term = compute(memo, g, child);
        if !term.is_zero() {
            acc += rat_int(count as i64) * ddf(2 * k as i64 + 2 * value as i64 + 1)
                / ddf(2 * value as i64 - 1)
                * term;
        }
    }

    let half = rat_int(1) / rat_int(2);
    let counts = distinct_counts(s);
    for a in 0..k {
        let b = k - 1 - a;
        let dfab = ddf(2 * a as i64 + 1) * ddf(2 * b as i64 + 1);

        // Nonseparating term: one handle removed.
        if g >= 1 {
            let mut child = s.to_vec();
            child.push(a);
            child.push(b);
            child.sort_unstable_by(|a, b| b.cmp(a));
            let term = compute(memo, g - 1, child);
            if !term.is_zero() {
                acc += half.clone() * dfab.clone() * term;
            }
        }

        // Separating terms: the genus of the left part is forced by the
        // dimension constraint, `3g_1 = Σ_I + a + 2 - |I|`.
        for_each_submultiset(&counts, &mut |sel, mult| {
            let sum_i: i64 = counts
                .iter()
                .zip(sel)
                .map(|((v, _), &c)| *v as i64 * c as i64)
                .sum();
            let len_i: i64 = sel.iter().map(|&c| c as i64).sum();
            let three_g1 = sum_i + a as i64 + 2 - len_i;
            if three_g1 < 0 || three_g1 % 3 != 0 {
                return;
            }
            let g1 = (three_g1 / 3) as u32;
            if g1 > g {
                return;
            }
            let g2 = g - g1;
            let mut left = Vec::with_capacity(len_i as usize + 1);
            let mut right = Vec::with_capacity(s.len() - len_i as usize + 1);
            for ((v, total), &c) in counts.iter().zip(sel) {
                for _ in 0..c {
                    left.push(*v);
                }
                for _ in 0..(total - c) {
                    right.push(*v);
                }
            }
            left.push(a);
            right.push(b);
            left.sort_unstable_by(|x, y| y.cmp(x));
            right.sort_unstable_by(|x, y| y.cmp(x));
            let lhs = compute(memo, g1, left);
            if lhs.is_zero() {
                return;
            }
            let rhs = compute(memo, g2, right);
            if rhs.is_zero() {
                return;
            }
            acc += half.clone() * dfab.clone() * Rational::from_integer(mult) * lhs * rhs;
        });
    }

    acc / ddf(2 * k as i64 + 3)
}

/// Distinct values of a multiset with their multiplicities.
fn distinct_counts(values: &[u32]) -> Vec<(u32, u32)> {
    let mut out: Vec<(u32, u32)> = Vec::new();
    for &v in values {
        match out.iter_mut().find(|(w, _)| *w == v) {
            Some((_, c)) => *c += 1,
            None => out.push((v, 1)),
        }
    }
    out
}

/// Visit every submultiset of a multiset given as `(value, count)` pairs,
/// reporting the selected count per value and the number of labeled subsets
/// realizing it, `Π binomial(count_v, selected_v)`.
fn for_each_submultiset(counts: &[(u32, u32)], f: &mut impl FnMut(&[u32], BigInt)) {
    let mut sel = vec![0u32; counts.len()];
    loop {
        let mut mult = BigInt::one();
        for ((_, total), &c) in counts.iter().zip(&sel) {
            mult *= crate::exact::binomial(*total as u64, c as u64);
        }
        f(&sel, mult);
        let mut pos = 0;
        loop {
            if pos == counts.len() {
                return;
            }
            if sel[pos] < counts[pos].1 {
                sel[pos] += 1;
                break;
            }
            sel[pos] = 0;
            pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    #[test]
    fn seed_values() {
        let t = CorrelatorTable::new();
        assert_eq!(t.correlator(0, &[0, 0, 0]).unwrap(), rat(1, 1));
        assert_eq!(t.correlator(1, &[1]).unwrap(), rat(1, 24));
    }

    #[test]
    fn genus_one_two_point_values() {
        let t = CorrelatorTable::new();
        assert_eq!(t.correlator(1, &[2, 0]).unwrap(), rat(1, 24));
        assert_eq!(t.correlator(1, &[1, 1]).unwrap(), rat(1, 24));
    }

    #[test]
    fn one_point_closed_form() {
        // ⟨τ_{3g-2}⟩_g = 1/(24^g·g!), an independent closed form.
        let t = CorrelatorTable::new();
        for g in 1u32..=6 {
            let expected = rat_int(24).pow(g as i32) * Rational::from_integer(factorial(g as u64));
            assert_eq!(
                t.correlator(g, &[3 * g - 2]).unwrap(),
                expected.recip(),
                "genus {g}"
            );
        }
    }

    #[test]
    fn genus_two_one_point_value() {
        let t = CorrelatorTable::new();
        assert_eq!(t.correlator(2, &[4]).unwrap(), rat(1, 1152));
    }

    #[test]
    fn symmetric_in_indices() {
        let t = CorrelatorTable::new();
        let a = t.correlator(2, &[3, 2, 2, 0]).unwrap();
        let b = t.correlator(2, &[0, 2, 2, 3]).unwrap();
        let c = t.correlator(2, &[2, 0, 3, 2]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert!(a.is_positive());
    }

    #[test]
    fn unstable_is_an_error_and_dimension_miss_is_zero() {
        let t = CorrelatorTable::new();
        assert!(t.correlator(0, &[0, 0]).is_err());
        assert_eq!(t.correlator(1, &[2]).unwrap(), rat(0, 1));
    }

    #[test]
    fn genus_one_all_ones() {
        // Dilaton chain: ⟨τ_1^n⟩_1 = (n-1)!/24.
        let t = CorrelatorTable::new();
        for n in 1u64..=6 {
            let expected = Rational::from_integer(factorial(n - 1)) / rat_int(24);
            assert_eq!(t.correlator(1, &vec![1; n as usize]).unwrap(), expected);
        }
    }

    #[test]
    fn volume_polynomial_tables() {
        let t = CorrelatorTable::new();
        let v03 = t.volume_polynomial(0, 3).unwrap();
        assert_eq!(v03, SparsePolynomial::constant(3, rat(1, 1)));

        let v11 = t.volume_polynomial(1, 1).unwrap();
        assert_eq!(v11, SparsePolynomial::monomial(&[2], rat(1, 48)));

        let v04 = t.volume_polynomial(0, 4).unwrap();
        let mut expected = SparsePolynomial::zero(4);
        for i in 0..4 {
            let mut e = [0u16; 4];
            e[i] = 2;
            expected.add_term(&e, rat(1, 2));
        }
        assert_eq!(v04, expected);

        // V_{1,2} = (1/192)(x_1² + x_2²)².
        let v12 = t.volume_polynomial(1, 2).unwrap();
        let mut sq = SparsePolynomial::zero(2);
        sq.add_term(&[2, 0], rat(1, 1));
        sq.add_term(&[0, 2], rat(1, 1));
        assert_eq!(v12, sq.mul(&sq).scale(&rat(1, 192)));
    }

    #[test]
    fn volume_polynomial_coefficient_formula() {
        // Coefficient of Πx_i^{2d_i} is ⟨τ_d⟩/(2^{3g-3+n}·Πd_i!); check on V_{2,2}.
        let t = CorrelatorTable::new();
        let v22 = t.volume_polynomial(2, 2).unwrap();
        for d in [[5u32, 0], [4, 1], [3, 2]] {
            let corr = t.correlator(2, &d).unwrap();
            let denom = Rational::from_integer(
                (BigInt::one() << 5) * factorial(d[0] as u64) * factorial(d[1] as u64),
            );
            let e = [2 * d[0] as u16, 2 * d[1] as u16];
            assert_eq!(v22.coefficient(&e), corr / denom, "d = {d:?}");
        }
        // Even total degree 2(3g-3+n) for every monomial, all coefficients positive.
        for (e, c) in v22.iter() {
            assert_eq!(e.iter().map(|&x| x as u32).sum::<u32>(), 10);
            assert!(c.is_positive());
        }
    }

    #[test]
    fn epsilon_examples() {
        let t = CorrelatorTable::new();
        assert_eq!(t.epsilon_deviation(0, &[0, 0, 0]).unwrap(), rat(0, 1));
        // For one-point correlators the closed form makes ε vanish identically.
        for g in 1u32..=5 {
            assert_eq!(t.epsilon_deviation(g, &[3 * g - 2]).unwrap(), rat(0, 1));
        }
        // Dimension violation is a contract error.
        assert!(t.epsilon_deviation(4, &[9]).is_err());
    }

    #[test]
    fn string_equation_self_consistency() {
        // Re-derive every memoized record containing a zero index from the
        // table and compare (the recursion may have used another route).
        let t = CorrelatorTable::new();
        t.correlator(2, &[3, 3, 2, 0, 0]).unwrap();
        let records: Vec<(u32, Vec<u32>)> = {
            let memo = t.memo.lock().unwrap();
            memo.keys()
                .filter(|k| k.indices.contains(&0) && (k.genus, k.indices.len()) != (0, 3))
                .map(|k| (k.genus, k.indices.clone()))
                .collect()
        };
        assert!(!records.is_empty());
        for (g, d) in records {
            let lhs = t.correlator(g, &d).unwrap();
            let mut memo = t.memo.lock().unwrap();
            let rhs = string_rule(&mut memo, g, &d);
            assert_eq!(lhs, rhs, "string identity at genus {g}, d = {d:?}");
        }
    }

    #[test]
    fn c_tilde_one_vertex_examples() {
        let t = CorrelatorTable::new();
        // Forced by F_{2,1}(x) = x·V_{1,2}(x,x) = x⁵/48.
        assert_eq!(t.c_tilde(2, &[3]).unwrap(), rat(3, 4));
        // Constraint violations are errors.
        assert!(t.c_tilde(2, &[2, 2]).is_err());
        assert!(t.c_tilde(1, &[0]).is_err());
        assert!(t.c_tilde(2, &[1, 1, 2]).is_err());
    }

    #[test]
    fn c_tilde_rebuilds_one_vertex_polynomial() {
        // F_{g,k}(x) = x_1⋯x_k·V_{g-k,2k}(x_1,x_1,…,x_k,x_k) must equal
        // (w_{g,k}/(6g-7)!)·Σ_j c̃_{g,k}(j)·Π x_i^{2j_i-1}/(2j_i)!.
        let t = CorrelatorTable::new();
        for (g, k) in [(2u32, 1usize), (3, 1), (3, 2), (4, 2)] {
            let vol = t.volume_polynomial(g - k as u32, 2 * k).unwrap();
            let map: Vec<usize> = (0..2 * k).map(|i| i / 2).collect();
            let direct = vol
                .substitute_vars(k, &map)
                .shift_exponents(&vec![1; k]);

            let prefactor = Rational::from_integer(
                factorial(6 * g as u64 - 5 - 2 * k as u64),
            ) / Rational::from_integer(
                factorial((g as u64) - k as u64) * factorial(3 * g as u64 - 3 - k as u64),
            ) * pow2(3 * k as i64 - 3)
                / Rational::from_integer(BigInt::from(3u32).pow(g - k as u32));
            let mut rebuilt = SparsePolynomial::zero(k);
            for_each_composition(3 * g - 3, k, 1, |j| {
                let c = t.c_tilde(g, j).unwrap();
                let mut denom = BigInt::one();
                let mut exps = vec![0u16; k];
                for (i, &ji) in j.iter().enumerate() {
                    denom *= factorial(2 * ji as u64);
                    exps[i] = (2 * ji - 1) as u16;
                }
                rebuilt.add_term(
                    &exps,
                    prefactor.clone() * c / Rational::from_integer(denom),
                );
            });
            assert_eq!(direct, rebuilt, "one-vertex identity at (g,k) = ({g},{k})");
        }
    }

    #[test]
    fn c_tilde_one_loop_approaches_one() {
        // |c̃_{g,1}(3g-3) - 1| shrinks as the genus grows.
        let t = CorrelatorTable::new();
        let dev = |g: u32| {
            let c = t.c_tilde(g, &[3 * g - 3]).unwrap();
            crate::exact::rat_to_f64(&(c - Rational::one())).abs()
        };
        assert!(dev(12) < dev(4));
    }

    #[test]
    fn cache_roundtrip_is_bit_exact() {
        let t = CorrelatorTable::new();
        t.correlator(2, &[4]).unwrap();
        t.correlator(1, &[2, 0]).unwrap();
        let text = t.to_cache_string();
        assert!(text.starts_with("psi-cache v1\n"));
        assert!(text.contains("0 3 0 0 0 1/1"));
        assert!(text.contains("1 1 1 1/24"));
        let reloaded = CorrelatorTable::from_cache_str(&text).unwrap();
        reloaded.verify_seeds().unwrap();
        assert_eq!(reloaded.to_cache_string(), text);
        assert_eq!(reloaded.checksum_hex(), t.checksum_hex());
    }

    #[test]
    fn cache_rejects_corruption() {
        let t = CorrelatorTable::new();
        t.correlator(2, &[4]).unwrap();
        let text = t.to_cache_string();
        // Truncated mid-record.
        let cut = &text[..text.len() - 3];
        assert!(matches!(
            CorrelatorTable::from_cache_str(cut),
            Err(Error::CacheCorrupt(_))
        ));
        // Wrong header.
        assert!(CorrelatorTable::from_cache_str("psi-cache v2\n").is_err());
        // Malformed value.
        assert!(CorrelatorTable::from_cache_str("psi-cache v1\n0 3 0 0 0 1\n").is_err());
    }
}
