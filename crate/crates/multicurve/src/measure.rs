//! The multicurve frequency measure: graph polynomials F_Γ, the averaging
//! operators Y and Z, Mirzakhani frequencies c(γ), total masses b_{g,m},
//! truncated masses, and the large-genus mass asymptote.
//!
//! For a stable graph Γ the polynomial
//!
//! ```text
//! F_Γ = Π_e x_e · Π_v V_{g_v, n_v}(edge variables at v)
//! ```
//!
//! collects one Kontsevich volume factor per vertex; a loop passes its
//! variable twice. Every monomial `Π x_e^{n_e}` of F_Γ has all exponents odd
//! and satisfies `Σ_e (n_e + 1) = 6g − 6`.
//!
//! The operator Y averages against a fixed multiplicity vector,
//! `Y_m(Πx^{n_e}) = Πn_e!/Πm_e^{n_e+1}`, and Z sums Y over all multiplicity
//! vectors bounded by `m`, which factorizes through partial zeta values:
//! `Z_m(Πx^{n_e}) = Π n_e!·ζ_m(n_e+1)`.
//!
//! Because every exponent `n_e` is odd, the unbounded case `m = ∞` only ever
//! evaluates ζ at even integers, where `ζ(2k)/π^{2k}` is rational. All masses
//! are therefore carried exactly as `MassValue`, a rational multiple of a
//! power of π; in particular probability ratios are exact rationals in both
//! the bounded and unbounded modes, and floats appear only on output.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::exact::{
    bernoulli_numbers, factorial, factorial_rat, rat_to_f64, Rational, SparsePolynomial, Value,
};
use crate::graphs::{enumerate_stable_graphs, single_vertex_graph, StableGraph, WeightedStableGraph};
use crate::intersection::CorrelatorTable;
use crate::{Error, Result};

/// Upper bound on component multiplicities: a positive integer or `∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultiplicityBound {
    Finite(u64),
    Infinite,
}

impl MultiplicityBound {
    pub fn is_finite(&self) -> bool {
        matches!(self, MultiplicityBound::Finite(_))
    }

    /// The factor `√(m/(m+1))` appearing in the mass asymptote; 1 for `∞`.
    pub fn sqrt_ratio(&self) -> f64 {
        match self {
            MultiplicityBound::Finite(m) => (*m as f64 / (*m as f64 + 1.0)).sqrt(),
            MultiplicityBound::Infinite => 1.0,
        }
    }
}

impl fmt::Display for MultiplicityBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MultiplicityBound::Finite(m) => write!(f, "{m}"),
            MultiplicityBound::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for MultiplicityBound {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "INF" | "infinity" | "oo" => Ok(MultiplicityBound::Infinite),
            t => {
                let m: u64 = t
                    .parse()
                    .map_err(|_| Error::invalid(format!("multiplicity bound `{t}`")))?;
                if m == 0 {
                    return Err(Error::invalid("multiplicity bound must be ≥ 1"));
                }
                Ok(MultiplicityBound::Finite(m))
            }
        }
    }
}

/// An exact scalar of the form `q·π^k` with `q` rational.
///
/// Finite-multiplicity masses have `k = 0`; unbounded masses of genus `g`
/// have `k = 6g−6`. Sums only combine values of equal π-power (zero is
/// compatible with everything), so ratios of same-genus masses reduce to
/// exact rationals.
#[derive(Debug, Clone, PartialEq)]
pub struct MassValue {
    coeff: Rational,
    pi_power: u32,
}

impl MassValue {
    pub fn zero() -> Self {
        MassValue { coeff: Rational::zero(), pi_power: 0 }
    }

    pub fn from_rational(coeff: Rational) -> Self {
        MassValue { coeff, pi_power: 0 }
    }

    pub fn pi_multiple(coeff: Rational, pi_power: u32) -> Self {
        if coeff.is_zero() {
            return MassValue::zero();
        }
        MassValue { coeff, pi_power }
    }

    pub fn coeff(&self) -> &Rational {
        &self.coeff
    }

    pub fn pi_power(&self) -> u32 {
        self.pi_power
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn add(&self, other: &MassValue) -> MassValue {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        assert_eq!(self.pi_power, other.pi_power, "mixed π powers in a mass sum");
        MassValue::pi_multiple(&self.coeff + &other.coeff, self.pi_power)
    }

    pub fn mul(&self, other: &MassValue) -> MassValue {
        MassValue::pi_multiple(&self.coeff * &other.coeff, self.pi_power + other.pi_power)
    }

    pub fn scale(&self, q: &Rational) -> MassValue {
        MassValue::pi_multiple(&self.coeff * q, self.pi_power)
    }

    /// Exact ratio of two values with the same π-power.
    pub fn ratio_to(&self, other: &MassValue) -> Option<Rational> {
        if other.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Rational::zero());
        }
        if self.pi_power != other.pi_power {
            return None;
        }
        Some(&self.coeff / &other.coeff)
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        if self.pi_power <= 300 {
            rat_to_f64(&self.coeff) * std::f64::consts::PI.powi(self.pi_power as i32)
        } else {
            let sign = if self.coeff.is_negative() { -1.0 } else { 1.0 };
            let ln = ln_abs_bigint(self.coeff.numer()) - ln_abs_bigint(self.coeff.denom())
                + self.pi_power as f64 * std::f64::consts::PI.ln();
            sign * ln.exp()
        }
    }

    /// Exact rendering for finite modes, float rendering otherwise.
    pub fn to_value(&self) -> Value {
        if self.pi_power == 0 {
            Value::Exact(self.coeff.clone())
        } else {
            Value::Float(self.to_f64())
        }
    }
}

/// Natural log of `|x|` for a big integer, stable for huge magnitudes.
fn ln_abs_bigint(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 512 {
        return x.abs().to_f64().unwrap_or(f64::MAX).ln();
    }
    let shift = bits - 64;
    let reduced = (x.abs() >> shift).to_f64().unwrap_or(f64::MAX);
    reduced.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Partial zeta `ζ_m(s) = Σ_{n=1}^m n^{−s}`: exact for finite `m`, float for
/// `m = ∞` (where `s ≥ 2` is required).
pub fn zeta_partial(m: &MultiplicityBound, s: u32) -> Result<Value> {
    match m {
        MultiplicityBound::Finite(bound) => {
            let mut acc = Rational::zero();
            for n in 1..=*bound {
                acc += Rational::new(BigInt::one(), BigInt::from(n).pow(s));
            }
            Ok(Value::Exact(acc))
        }
        MultiplicityBound::Infinite => {
            if s <= 1 {
                return Err(Error::invalid(format!("ζ({s}) diverges")));
            }
            if s % 2 == 0 {
                Ok(zeta_mass(m, s)?.to_value())
            } else {
                Ok(Value::Float(zeta_f64(s)))
            }
        }
    }
}

/// `ζ(2k)/π^{2k}` as an exact rational, via Bernoulli numbers.
fn zeta_even_pi_coeff(k: u32) -> Rational {
    let b = bernoulli_numbers(2 * k as usize);
    let sign = if k % 2 == 1 { Rational::one() } else { -Rational::one() };
    let two_pow = Rational::from(BigInt::one() << (2 * k as usize - 1));
    sign * &b[2 * k as usize] * two_pow / factorial_rat(2 * k as u64)
}

/// Exact `ζ_m(s)` as a `MassValue`; for `m = ∞` the argument must be even.
pub(crate) fn zeta_mass(m: &MultiplicityBound, s: u32) -> Result<MassValue> {
    match m {
        MultiplicityBound::Finite(_) => Ok(MassValue::from_rational(
            zeta_partial(m, s)?.as_exact().expect("finite zeta is exact").clone(),
        )),
        MultiplicityBound::Infinite => {
            if s <= 1 {
                return Err(Error::invalid(format!("ζ({s}) diverges")));
            }
            if s % 2 != 0 {
                return Err(Error::invalid(format!(
                    "exact ζ({s}) unavailable: odd argument has no closed rational π-form"
                )));
            }
            Ok(MassValue::pi_multiple(zeta_even_pi_coeff(s / 2), s))
        }
    }
}

/// Float `ζ(s)` for `s ≥ 2` via Euler–Maclaurin summation.
pub fn zeta_f64(s: u32) -> f64 {
    let sf = s as f64;
    if s >= 60 {
        return 1.0 + 2f64.powi(-(s as i32)) + 3f64.powi(-(s as i32));
    }
    let n = 32.0f64;
    let mut acc = 0.0;
    let mut k = 1.0;
    while k < n {
        acc += k.powf(-sf);
        k += 1.0;
    }
    acc + euler_maclaurin_zeta_tail(n, sf)
}

/// `Σ_{n≥a} n^{−s}` by Euler–Maclaurin through the fifth derivative.
fn euler_maclaurin_zeta_tail(a: f64, s: f64) -> f64 {
    a.powf(1.0 - s) / (s - 1.0) + a.powf(-s) / 2.0 + s * a.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * a.powf(-s - 3.0) / 720.0
        + s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * a.powf(-s - 5.0) / 30240.0
}

/// Float `ζ_m(s)` for any bound, used by the large-genus machinery.
pub fn zeta_bound_f64(m: &MultiplicityBound, s: u32) -> f64 {
    match m {
        MultiplicityBound::Finite(bound) => {
            if *bound <= 10_000 {
                (1..=*bound).map(|n| (n as f64).powi(-(s as i32))).sum()
            } else {
                zeta_f64(s) - euler_maclaurin_zeta_tail(*bound as f64 + 1.0, s as f64)
            }
        }
        MultiplicityBound::Infinite => zeta_f64(s),
    }
}

/// A stable graph together with its expanded polynomial F_Γ over the edge
/// variables, in the graph's edge order.
#[derive(Debug, Clone)]
pub struct GraphPolynomial {
    pub graph: StableGraph,
    pub polynomial: SparsePolynomial,
}

/// Expand `F_Γ = Π_e x_e · Π_v V_{g_v, n_v}` over the edge variables.
pub fn graph_polynomial(table: &CorrelatorTable, graph: &StableGraph) -> Result<GraphPolynomial> {
    let e = graph.num_edges();
    let mut parts: Vec<SparsePolynomial> = Vec::with_capacity(graph.num_vertices());
    for v in 0..graph.num_vertices() {
        let slots = graph.vertex_edge_slots(v);
        let part = table.map_volume_polynomial(graph.vertex_genera()[v], slots.len(), |poly| {
            poly.substitute_vars(e, &slots)
        })?;
        parts.push(part);
    }
    // Multiply small factors first to keep intermediate expansions short.
    parts.sort_by_key(|p| p.num_terms());
    let mut product = SparsePolynomial::constant(e, Rational::one());
    for part in &parts {
        product = product.mul(part);
    }
    let polynomial = product.shift_exponents(&vec![1; e]);
    #[cfg(debug_assertions)]
    {
        let target = 6 * graph.genus() as u64 - 6;
        for (exps, _) in polynomial.iter() {
            debug_assert!(exps.iter().all(|&n| n % 2 == 1));
            debug_assert_eq!(exps.iter().map(|&n| n as u64 + 1).sum::<u64>(), target);
        }
    }
    Ok(GraphPolynomial { graph: graph.clone(), polynomial })
}

/// `Y_m(p)`: average against a fixed multiplicity vector, one entry per
/// variable; linear extension of `Πn_e!/Πm_e^{n_e+1}` over monomials.
pub fn apply_y(p: &SparsePolynomial, m: &[u64]) -> Result<Rational> {
    if m.len() != p.nvars() {
        return Err(Error::invalid(format!(
            "Y needs one multiplicity per variable: got {} for {} variables",
            m.len(),
            p.nvars()
        )));
    }
    if m.iter().any(|&me| me == 0) {
        return Err(Error::invalid("multiplicities must be ≥ 1"));
    }
    let mut acc = Rational::zero();
    for (exps, coeff) in p.iter() {
        let mut numer = BigInt::one();
        let mut denom = BigInt::one();
        for (&n, &me) in exps.iter().zip(m) {
            numer *= factorial(n as u64);
            denom *= BigInt::from(me).pow(n as u32 + 1);
        }
        acc += coeff * Rational::new(numer, denom);
    }
    Ok(acc)
}

/// Per-argument tables of `n!` and `ζ_m(n)` shared across many Z evaluations.
pub(crate) struct ZetaTable {
    factorials: Vec<Rational>,
    zetas: Vec<MassValue>,
}

impl ZetaTable {
    pub(crate) fn new(m: &MultiplicityBound, max_arg: u32) -> Result<ZetaTable> {
        let mut factorials = Vec::with_capacity(max_arg as usize + 1);
        let mut zetas = Vec::with_capacity(max_arg as usize + 1);
        for s in 0..=max_arg {
            factorials.push(factorial_rat(s as u64));
            if s >= 2 && (s % 2 == 0 || m.is_finite()) {
                zetas.push(zeta_mass(m, s)?);
            } else {
                // Unused slots (ζ(0), ζ(1), odd arguments at m = ∞).
                zetas.push(MassValue::zero());
            }
        }
        Ok(ZetaTable { factorials, zetas })
    }

    /// `coeff·Π n_e!·ζ_m(n_e+1)` for one monomial.
    pub(crate) fn monomial_mass(&self, exps: &[u16], coeff: &Rational) -> MassValue {
        let mut rational = coeff.clone();
        let mut mass = MassValue::from_rational(Rational::one());
        for &n in exps {
            rational *= &self.factorials[n as usize];
            mass = mass.mul(&self.zetas[n as usize + 1]);
        }
        mass.scale(&rational)
    }
}

/// `Z_m(p) = Σ coeff·Π n_e!·ζ_m(n_e+1)`: the closed form of summing `apply_y`
/// over all multiplicity vectors bounded by `m`.
pub fn apply_z(p: &SparsePolynomial, m: &MultiplicityBound) -> Result<MassValue> {
    let max_exp = p
        .iter()
        .flat_map(|(exps, _)| exps.iter().copied())
        .max()
        .unwrap_or(0) as u32;
    if !m.is_finite() {
        for (exps, _) in p.iter() {
            if exps.iter().any(|&n| n == 0) {
                return Err(Error::invalid(
                    "Z at m = ∞ needs every exponent ≥ 1 (ζ(1) diverges)",
                ));
            }
        }
    }
    let table = ZetaTable::new(m, max_exp + 1)?;
    let mut acc = MassValue::zero();
    for (exps, coeff) in p.iter() {
        acc = acc.add(&table.monomial_mass(exps, coeff));
    }
    Ok(acc)
}

/// Mirzakhani frequency of a topological type:
/// `c(γ) = Y_m(F_Γ) / ((6g−6)!·|Aut(Γ,m)|)`.
pub fn frequency_c(table: &CorrelatorTable, weighted: &WeightedStableGraph) -> Result<Rational> {
    let graph = weighted.graph();
    let g = graph.genus();
    let fpoly = graph_polynomial(table, graph)?;
    let m: Vec<u64> = weighted.multiplicities().iter().map(|&x| x as u64).collect();
    let y = apply_y(&fpoly.polynomial, &m)?;
    let aut = Rational::from(BigInt::from(weighted.automorphism_count()));
    Ok(y / aut / factorial_rat(6 * g as u64 - 6))
}

/// The exact frequency measure on stable graphs of one genus: entry weights
/// `Z_m(F_Γ)/|Aut Γ|`, total `(6g−6)!·b_{g,m}`.
#[derive(Debug, Clone)]
pub struct MulticurveMeasure {
    genus: u32,
    bound: MultiplicityBound,
    entries: Vec<(StableGraph, MassValue)>,
    total_mass: MassValue,
}

impl MulticurveMeasure {
    /// Build the measure for one bound; enumeration order (hence entry
    /// order) is the deterministic canonical order.
    pub fn build(
        table: &CorrelatorTable,
        genus: u32,
        bound: MultiplicityBound,
    ) -> Result<MulticurveMeasure> {
        Ok(build_measures(table, genus, &[bound])?.pop().expect("one measure per bound"))
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn bound(&self) -> MultiplicityBound {
        self.bound
    }

    pub fn entries(&self) -> &[(StableGraph, MassValue)] {
        &self.entries
    }

    /// `(6g−6)!·b_{g,m}`.
    pub fn total_mass(&self) -> &MassValue {
        &self.total_mass
    }

    /// `b_{g,m}`.
    pub fn b(&self) -> MassValue {
        self.total_mass.scale(&factorial_rat(6 * self.genus as u64 - 6).recip())
    }

    /// Exact selection probabilities, in entry order; they sum to 1.
    pub fn probabilities(&self) -> Vec<Rational> {
        self.entries
            .iter()
            .map(|(_, w)| w.ratio_to(&self.total_mass).expect("weights share the π power"))
            .collect()
    }
}

/// Build measures for several bounds in one enumeration and one F_Γ pass per
/// graph (the expansion dominates the cost and is bound-independent).
pub fn build_measures(
    table: &CorrelatorTable,
    genus: u32,
    bounds: &[MultiplicityBound],
) -> Result<Vec<MulticurveMeasure>> {
    let graphs = enumerate_stable_graphs(genus, None)?;
    let max_arg = 6 * genus - 6;
    let tables: Vec<ZetaTable> =
        bounds.iter().map(|m| ZetaTable::new(m, max_arg)).collect::<Result<_>>()?;
    let mut entries: Vec<Vec<(StableGraph, MassValue)>> =
        bounds.iter().map(|_| Vec::with_capacity(graphs.len())).collect();
    for graph in &graphs {
        let fpoly = graph_polynomial(table, graph)?;
        let aut = Rational::from(BigInt::from(graph.automorphism_count())).recip();
        for (bi, ztable) in tables.iter().enumerate() {
            let mut z = MassValue::zero();
            for (exps, coeff) in fpoly.polynomial.iter() {
                z = z.add(&ztable.monomial_mass(exps, coeff));
            }
            entries[bi].push((graph.clone(), z.scale(&aut)));
        }
    }
    Ok(entries
        .into_iter()
        .zip(bounds)
        .map(|(entries, &bound)| {
            let total_mass = entries
                .iter()
                .fold(MassValue::zero(), |acc, (_, w)| acc.add(w));
            MulticurveMeasure { genus, bound, entries, total_mass }
        })
        .collect())
}

/// Total mass `b_{g,m} = (1/(6g−6)!) Σ_Γ Z_m(F_Γ)/|Aut Γ|`.
pub fn total_mass_b(
    table: &CorrelatorTable,
    genus: u32,
    bound: MultiplicityBound,
) -> Result<MassValue> {
    Ok(MulticurveMeasure::build(table, genus, bound)?.b())
}

/// Number of loops admitted by the truncation: `⌊κ·log(6g−6)/2⌋`, further
/// capped by the existence range of one-vertex graphs.
pub fn truncation_loop_bound(genus: u32, kappa: f64) -> Result<u32> {
    if kappa <= 1.0 {
        return Err(Error::invalid("truncation requires κ > 1"));
    }
    let raw = (kappa * ((6 * genus - 6) as f64).ln() / 2.0).floor() as u32;
    Ok(raw.min(genus).min(3 * genus - 3))
}

/// Truncated mass `b̃_{g,m,κ}`: the part of `b_{g,m}` carried by one-vertex
/// graphs with at most `⌊κ·log(6g−6)/2⌋` loops.
pub fn truncated_mass_b(
    table: &CorrelatorTable,
    genus: u32,
    bound: MultiplicityBound,
    kappa: f64,
) -> Result<MassValue> {
    let k_max = truncation_loop_bound(genus, kappa)?;
    let mut acc = MassValue::zero();
    for k in 1..=k_max {
        let graph = single_vertex_graph(genus, k)?;
        let fpoly = graph_polynomial(table, &graph)?;
        let z = apply_z(&fpoly.polynomial, &bound)?;
        let aut = Rational::from(BigInt::from(graph.automorphism_count())).recip();
        acc = acc.add(&z.scale(&aut));
    }
    Ok(acc.scale(&factorial_rat(6 * genus as u64 - 6).recip()))
}

/// Large-genus mass asymptote:
/// `(1/π)·(1/((6g−6)(4g−4)!))·√(m/(m+1))·(4/3)^{4g−4}`, computed in log
/// space so large genera stay in range.
pub fn mass_asymptote(genus: u32, bound: &MultiplicityBound) -> f64 {
    let n = 4 * genus as u64 - 4;
    let ln_fact: f64 = (2..=n).map(|k| (k as f64).ln()).sum();
    let ln = -std::f64::consts::PI.ln() - ((6 * genus - 6) as f64).ln() - ln_fact
        + n as f64 * (4f64 / 3f64).ln()
        + bound.sqrt_ratio().ln();
    ln.exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    fn bound(m: u64) -> MultiplicityBound {
        MultiplicityBound::Finite(m)
    }

    const INF: MultiplicityBound = MultiplicityBound::Infinite;

    #[test]
    fn genus_two_graph_polynomials_closed_forms() {
        let table = CorrelatorTable::new();
        let graphs = enumerate_stable_graphs(2, None).unwrap();
        // Enumeration order: one-loop, bridge, two-loop, loop+edge,
        // dumbbell, theta (checked in the graphs module).
        let f = |i: usize| graph_polynomial(&table, &graphs[i]).unwrap().polynomial;
        assert_eq!(f(0).coefficient(&[5]), rat(1, 48));
        assert_eq!(f(0).num_terms(), 1);
        assert_eq!(f(1).coefficient(&[5]), rat(1, 2304));
        assert_eq!(f(1).num_terms(), 1);
        assert_eq!(f(2).coefficient(&[3, 1]), rat(1, 1));
        assert_eq!(f(2).coefficient(&[1, 3]), rat(1, 1));
        assert_eq!(f(2).num_terms(), 2);
        assert_eq!(f(3).coefficient(&[1, 3]), rat(1, 48));
        assert_eq!(f(3).num_terms(), 1);
        assert_eq!(f(4).coefficient(&[1, 1, 1]), rat(1, 1));
        assert_eq!(f(4).num_terms(), 1);
        assert_eq!(f(5).coefficient(&[1, 1, 1]), rat(1, 1));
        assert_eq!(f(5).num_terms(), 1);
    }

    #[test]
    fn graph_polynomial_invariants_through_genus_three() {
        let table = CorrelatorTable::new();
        for g in 2u32..=3 {
            for graph in enumerate_stable_graphs(g, None).unwrap() {
                let fpoly = graph_polynomial(&table, &graph).unwrap();
                assert!(fpoly.polynomial.num_terms() > 0);
                for (exps, coeff) in fpoly.polynomial.iter() {
                    assert!(coeff > &Rational::zero());
                    assert!(exps.iter().all(|&n| n % 2 == 1), "odd exponents");
                    assert_eq!(
                        exps.iter().map(|&n| n as u64 + 1).sum::<u64>(),
                        6 * g as u64 - 6,
                        "degree identity"
                    );
                }
            }
        }
    }

    #[test]
    fn y_operator_examples() {
        let x5 = SparsePolynomial::monomial(&[5], rat(1, 1));
        assert_eq!(apply_y(&x5, &[1]).unwrap(), rat(120, 1));
        let f21 = SparsePolynomial::monomial(&[5], rat(1, 48));
        assert_eq!(apply_y(&f21, &[1]).unwrap(), rat(5, 2));
        assert_eq!(apply_y(&f21, &[2]).unwrap(), rat(5, 2) / rat(64, 1));
        assert_eq!(apply_y(&f21, &[3]).unwrap(), rat(5, 2) / rat(729, 1));
        let f_bridge = SparsePolynomial::monomial(&[5], rat(1, 2304));
        assert_eq!(apply_y(&f_bridge, &[1]).unwrap(), rat(5, 96));
        assert!(apply_y(&x5, &[1, 1]).is_err());
        assert!(apply_y(&x5, &[0]).is_err());
    }

    #[test]
    fn zeta_values() {
        assert_eq!(zeta_partial(&bound(1), 4).unwrap(), Value::Exact(rat(1, 1)));
        assert_eq!(zeta_partial(&bound(2), 2).unwrap(), Value::Exact(rat(5, 4)));
        let z2 = zeta_partial(&INF, 2).unwrap().to_f64();
        assert!((z2 - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-12);
        assert!(zeta_partial(&INF, 1).is_err());
        // Exact π-power forms.
        let z4 = zeta_mass(&INF, 4).unwrap();
        assert_eq!(z4.coeff(), &rat(1, 90));
        assert_eq!(z4.pi_power(), 4);
        let z6 = zeta_mass(&INF, 6).unwrap();
        assert_eq!(z6.coeff(), &rat(1, 945));
        // Odd arguments fall back to floats; ζ(3) ≈ 1.2020569.
        let z3 = zeta_partial(&INF, 3).unwrap().to_f64();
        assert!((z3 - 1.2020569031595943).abs() < 1e-12);
    }

    #[test]
    fn z_operator_examples_and_box_oracle() {
        let x5 = SparsePolynomial::monomial(&[5], rat(1, 1));
        assert_eq!(apply_z(&x5, &bound(1)).unwrap(), MassValue::from_rational(rat(120, 1)));
        let mixed = SparsePolynomial::monomial(&[1, 3], rat(1, 1));
        assert_eq!(
            apply_z(&mixed, &bound(2)).unwrap(),
            MassValue::from_rational(rat(255, 32))
        );
        // ∞ rejects exponent zero.
        let with_zero = SparsePolynomial::monomial(&[0, 3], rat(1, 1));
        assert!(apply_z(&with_zero, &INF).is_err());
        assert!(apply_z(&with_zero, &bound(3)).is_ok());
    }

    #[test]
    fn z_equals_boxed_y_sum_small_genus() {
        let table = CorrelatorTable::new();
        for g in 2u32..=3 {
            for graph in enumerate_stable_graphs(g, None).unwrap() {
                let fpoly = graph_polynomial(&table, &graph).unwrap();
                let e = graph.num_edges();
                for m in 1u64..=4 {
                    let z = apply_z(&fpoly.polynomial, &bound(m)).unwrap();
                    let mut total = Rational::zero();
                    let mut vector = vec![1u64; e];
                    loop {
                        total += apply_y(&fpoly.polynomial, &vector).unwrap();
                        let mut pos = 0;
                        while pos < e {
                            if vector[pos] < m {
                                vector[pos] += 1;
                                break;
                            }
                            vector[pos] = 1;
                            pos += 1;
                        }
                        if pos == e {
                            break;
                        }
                    }
                    assert_eq!(z, MassValue::from_rational(total), "g={g}, m={m}");
                }
            }
        }
    }

    #[test]
    fn frequency_examples() {
        let table = CorrelatorTable::new();
        let g21 = single_vertex_graph(2, 1).unwrap();
        let weighted = WeightedStableGraph::new(g21, vec![1]).unwrap();
        assert_eq!(frequency_c(&table, &weighted).unwrap(), rat(1, 576));

        let theta = StableGraph::new(vec![0, 0], vec![(0, 1), (0, 1), (0, 1)]).unwrap();
        let wt = WeightedStableGraph::new(theta, vec![1, 1, 1]).unwrap();
        assert_eq!(frequency_c(&table, &wt).unwrap(), rat(1, 8640));
    }

    #[test]
    fn frequency_scaling_under_doubled_multiplicities() {
        // Doubling every multiplicity scales Y by 2^{−(6g−6)} because every
        // monomial satisfies Σ(n_e+1) = 6g−6.
        let table = CorrelatorTable::new();
        for graph in enumerate_stable_graphs(2, None).unwrap() {
            let fpoly = graph_polynomial(&table, &graph).unwrap();
            let e = graph.num_edges();
            let ones = vec![1u64; e];
            let twos = vec![2u64; e];
            let base = apply_y(&fpoly.polynomial, &ones).unwrap();
            let doubled = apply_y(&fpoly.polynomial, &twos).unwrap();
            assert_eq!(doubled * rat(1 << 6, 1), base);
        }
    }

    #[test]
    fn total_mass_genus_two() {
        let table = CorrelatorTable::new();
        let b1 = total_mass_b(&table, 2, bound(1)).unwrap();
        assert_eq!(b1, MassValue::from_rational(rat(13, 3072)));
        let b2 = total_mass_b(&table, 2, bound(2)).unwrap();
        let binf = total_mass_b(&table, 2, INF).unwrap();
        assert_eq!(binf.pi_power(), 6);
        assert!(b1.to_f64() < b2.to_f64());
        assert!(b2.to_f64() < binf.to_f64());
    }

    #[test]
    fn measure_probabilities_sum_to_one() {
        let table = CorrelatorTable::new();
        for m in [bound(1), bound(3), INF] {
            let measure = MulticurveMeasure::build(&table, 2, m).unwrap();
            assert_eq!(measure.entries().len(), 6);
            let probs = measure.probabilities();
            assert!(probs.iter().all(|p| p > &Rational::zero()));
            assert_eq!(probs.iter().sum::<Rational>(), Rational::one());
        }
    }

    #[test]
    fn weighted_class_sum_matches_boxed_measure() {
        // Σ_Γ Z_m(F_Γ)/|Aut Γ| over plain graphs equals
        // Σ_{(Γ,m)} Y_m(F_Γ)/|Aut(Γ,m)| over weighted classes, multiplicity
        // entries bounded by m: orbit-stabilizer, checked by brute force.
        let table = CorrelatorTable::new();
        for m in 1u64..=3 {
            let measure = MulticurveMeasure::build(&table, 2, bound(m)).unwrap();
            let mut by_classes = Rational::zero();
            for (graph, _) in measure.entries() {
                let fpoly = graph_polynomial(&table, graph).unwrap();
                let e = graph.num_edges();
                let mut seen = std::collections::BTreeSet::new();
                let mut vector = vec![1u32; e];
                loop {
                    let weighted =
                        WeightedStableGraph::new(graph.clone(), vector.clone()).unwrap();
                    if seen.insert(weighted.canonical_form()) {
                        let y = apply_y(
                            &fpoly.polynomial,
                            &vector.iter().map(|&x| x as u64).collect::<Vec<_>>(),
                        )
                        .unwrap();
                        by_classes +=
                            y / Rational::from(BigInt::from(weighted.automorphism_count()));
                    }
                    let mut pos = 0;
                    while pos < e {
                        if vector[pos] < m as u32 {
                            vector[pos] += 1;
                            break;
                        }
                        vector[pos] = 1;
                        pos += 1;
                    }
                    if pos == e {
                        break;
                    }
                }
            }
            let direct = measure.total_mass();
            assert_eq!(direct, &MassValue::from_rational(by_classes), "m={m}");
        }
    }

    #[test]
    fn truncated_mass_examples() {
        let table = CorrelatorTable::new();
        // κ=1.5 at genus 2 admits only the one-loop graph.
        assert_eq!(truncation_loop_bound(2, 1.5).unwrap(), 1);
        assert!(truncation_loop_bound(2, 0.9).is_err());
        let bt = truncated_mass_b(&table, 2, bound(1), 1.5).unwrap();
        assert_eq!(bt, MassValue::from_rational(rat(1, 576)));
        // b̃ ≤ b for a small grid.
        for g in 2u32..=3 {
            for m in [bound(1), bound(2), INF] {
                let full = total_mass_b(&table, g, m).unwrap();
                let truncated = truncated_mass_b(&table, g, m, 1.5).unwrap();
                assert!(truncated.to_f64() <= full.to_f64(), "g={g} m={m}");
            }
        }
    }

    #[test]
    fn mass_asymptote_values() {
        let direct = (1.0 / std::f64::consts::PI) * (1.0 / (6.0 * 24.0))
            * 0.5f64.sqrt()
            * (4.0f64 / 3.0).powi(4);
        assert!((mass_asymptote(2, &bound(1)) - direct).abs() < 1e-15 * direct);
        // √(m/(m+1)) → 1 as m → ∞.
        assert!(
            (mass_asymptote(2, &INF) - mass_asymptote(2, &bound(1)) / 0.5f64.sqrt()).abs()
                < 1e-12
        );
    }

    #[test]
    fn truncated_ratio_improves_with_genus() {
        // The ratio b̃/b climbs toward 1 in jumps: it improves whenever the
        // loop bound ⌊κ·ln(6g−6)/2⌋ increments (g=4 at κ=1.5) and decays
        // slowly in between, so only the endpoints are compared.
        let table = CorrelatorTable::new();
        let ratio = |g: u32| {
            let full = total_mass_b(&table, g, bound(1)).unwrap();
            let truncated = truncated_mass_b(&table, g, bound(1), 1.5).unwrap();
            truncated.to_f64() / full.to_f64()
        };
        assert!(ratio(4) > ratio(2));
        // At fixed genus a larger κ admits more loops and more mass.
        let loose = truncated_mass_b(&table, 3, bound(1), 4.0).unwrap();
        let tight = truncated_mass_b(&table, 3, bound(1), 1.5).unwrap();
        let full = total_mass_b(&table, 3, bound(1)).unwrap();
        assert!(tight.to_f64() < loose.to_f64());
        assert!(loose.to_f64() <= full.to_f64());
    }

    #[test]
    fn multiplicity_bound_parsing() {
        assert_eq!("3".parse::<MultiplicityBound>().unwrap(), bound(3));
        assert_eq!("inf".parse::<MultiplicityBound>().unwrap(), INF);
        assert!("0".parse::<MultiplicityBound>().is_err());
        assert!("-2".parse::<MultiplicityBound>().is_err());
        assert_eq!(bound(7).to_string(), "7");
        assert_eq!(INF.to_string(), "inf");
    }
}
