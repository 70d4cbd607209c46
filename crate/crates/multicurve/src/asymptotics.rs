//! Part-weighted composition sums and their square-root growth law.
//!
//! The central object is the sum
//!
//! ```text
//! S(θ, p, n) = Σ_{k ≥ r} 1/(k−r)! · Σ_{j_1+⋯+j_k = n} Π_{i=1}^{k} θ_{j_i}/(2j_i) · Π_{i=1}^{r} (2j_i+p_i)!/(2j_i−1)!
//! ```
//!
//! over compositions of `n` into parts `j_i ≥ 1`, where the first `r` parts
//! are ordered and carry the moment exponents `p` while the remaining parts
//! are unordered. Three independent routes to its value are implemented:
//! dynamic programming over compositions ([`s_direct`]), coefficient
//! extraction from a generating function built with the operators
//! [`apply_dp`] ([`s_via_series`]), and the closed growth law valid for
//! admissible weights ([`s_asymptote`]). [`s_truncated`] caps the number of
//! parts at `⌊κ·log(2n)/2⌋`, and [`mp_asymptotic_multicurve`] combines the
//! capped sum with the genus prefactor into the large-genus moment formula
//! whose limit is the GEM(1/2) moment.

use std::f64::consts::PI;

use crate::error::Error;
use crate::exact::{factorial_rat, gamma_half, rat_int, rat_to_f64, PowerSeries, Rational, SeriesCoeff};
use crate::measure::{zeta_bound_f64, zeta_partial, MultiplicityBound};
use crate::moments::MomentIndex;
use crate::Result;

use num_bigint::BigInt;

/// Radius at which the admissibility residue is probed numerically.
const ADMISSIBILITY_RADIUS: f64 = 2.0;

/// Part sizes probed by the admissibility check.
const ADMISSIBILITY_PROBES: [u32; 3] = [40, 44, 48];

/// Largest admissibility residue accepted by [`AdmissiblePair::new`].
const ADMISSIBILITY_TOLERANCE: f64 = 1e-6;

/// Nonnegative weights `θ_j` indexed by part size `j ≥ 1`.
///
/// The evaluator must return a nonnegative weight for every part size; the
/// built-in families below guarantee this. `exact` records whether the
/// evaluator produces exact values, and `beta` carries the value at `z = 1`
/// of `g_θ(z) + log(1−z)` when it is known.
pub struct WeightSequence<C: SeriesCoeff> {
    evaluator: Box<dyn Fn(u32) -> C + Send + Sync>,
    exact: bool,
    beta: Option<f64>,
}

impl<C: SeriesCoeff> WeightSequence<C> {
    pub fn new(
        evaluator: impl Fn(u32) -> C + Send + Sync + 'static,
        exact: bool,
        beta: Option<f64>,
    ) -> Self {
        WeightSequence { evaluator: Box::new(evaluator), exact, beta }
    }

    /// The weight `θ_j`; part sizes start at 1.
    pub fn weight(&self, j: u32) -> C {
        assert!(j >= 1, "part sizes start at 1");
        (self.evaluator)(j)
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn beta(&self) -> Option<f64> {
        self.beta
    }
}

/// The constant weights `θ_j ≡ 1`, for which `g_θ(z) = −log(1−z)` and the
/// admissibility constant vanishes.
pub fn unit_weights<C: SeriesCoeff>() -> WeightSequence<C> {
    WeightSequence::new(|_| C::one(), true, Some(0.0))
}

/// The exact weights `θ_j = ζ_m(2j)` for a finite multiplicity bound `m ≥ 1`.
pub fn zeta_weights_exact(m: u64) -> Result<WeightSequence<Rational>> {
    if m == 0 {
        return Err(Error::invalid("ζ_m weights need m ≥ 1"));
    }
    let beta = beta_value(MultiplicityBound::Finite(m))?.value;
    Ok(WeightSequence::new(
        move |j| {
            let value = zeta_partial(&MultiplicityBound::Finite(m), 2 * j)
                .expect("finite partial ζ always evaluates");
            value.as_exact().expect("finite partial ζ is rational").clone()
        },
        true,
        Some(beta),
    ))
}

/// Float weights `θ_j = ζ_m(2j)`, with `m = ∞` allowed.
pub fn zeta_weights_f64(bound: MultiplicityBound) -> Result<WeightSequence<f64>> {
    if bound == MultiplicityBound::Finite(0) {
        return Err(Error::invalid("ζ_m weights need m ≥ 1"));
    }
    let beta = beta_value(bound)?.value;
    Ok(WeightSequence::new(move |j| zeta_bound_f64(&bound, 2 * j), false, Some(beta)))
}

/// The constant `β = log(2m/(m+1))` together with its exact logarithm
/// argument; the argument degenerates to 2 as `m → ∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaValue {
    pub argument: Rational,
    pub value: f64,
}

pub fn beta_value(bound: MultiplicityBound) -> Result<BetaValue> {
    let argument = match bound {
        MultiplicityBound::Finite(0) => {
            return Err(Error::invalid("β is defined for m ≥ 1"));
        }
        MultiplicityBound::Finite(m) => {
            Rational::new(BigInt::from(2u32) * BigInt::from(m), BigInt::from(m) + 1u32)
        }
        MultiplicityBound::Infinite => Rational::from_integer(BigInt::from(2u32)),
    };
    let value = rat_to_f64(&argument).ln();
    Ok(BetaValue { argument, value })
}

/// A weight sequence with a known constant `β`, accepted only when the
/// residue coefficients `(θ_j − 1)/j` of `g_θ(z) + log(1−z)` vanish
/// numerically on a circle of radius 2. The built-in ζ families decay like
/// `4^{−j}` there, so the probe has a wide margin.
pub struct AdmissiblePair<C: SeriesCoeff> {
    sequence: WeightSequence<C>,
    beta: f64,
}

impl<C: SeriesCoeff> AdmissiblePair<C> {
    pub fn new(sequence: WeightSequence<C>) -> Result<Self> {
        let beta = sequence
            .beta()
            .ok_or_else(|| Error::invalid("admissible pair needs a β value"))?;
        let mut residue: f64 = 0.0;
        for &j in &ADMISSIBILITY_PROBES {
            let term = (sequence.weight(j).as_f64() - 1.0) * ADMISSIBILITY_RADIUS.powi(j as i32)
                / f64::from(j);
            residue = residue.max(term.abs());
        }
        if !(residue <= ADMISSIBILITY_TOLERANCE) {
            return Err(Error::invalid(format!(
                "weights fail the admissibility probe: residue {residue:.3e} at radius {ADMISSIBILITY_RADIUS}"
            )));
        }
        Ok(AdmissiblePair { sequence, beta })
    }

    pub fn sequence(&self) -> &WeightSequence<C> {
        &self.sequence
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
}

/// The series `g_θ(z) = Σ_{j ≥ 1} θ_j z^j / j` truncated at `order`.
pub fn g_theta_series<C: SeriesCoeff>(theta: &WeightSequence<C>, order: usize) -> PowerSeries<C> {
    assert!(order >= 1, "the series starts at z^1");
    let mut coeffs = vec![C::zero(); order + 1];
    for (j, slot) in coeffs.iter_mut().enumerate().skip(1) {
        *slot = theta.weight(j as u32) / C::from_integer(j as u64);
    }
    PowerSeries::from_coeffs(coeffs)
}

/// The operator `D_p(f) = z·d^{p+1}/dz^{p+1}(z^p f)`.
///
/// It acts diagonally on monomials: `z^k ↦ (k+p)!/(k−1)!·z^k` for `k ≥ 1`,
/// and it kills constants.
pub fn apply_dp<C: SeriesCoeff>(series: &PowerSeries<C>, p: u64) -> PowerSeries<C> {
    let mut out = PowerSeries::zero(series.order());
    for k in 1..=series.order() {
        let coeff = series.coeff(k);
        if coeff.is_zero() {
            continue;
        }
        let mut factor = C::one();
        for t in 0..=p {
            factor = factor * C::from_integer(k as u64 + t);
        }
        out.set_coeff(k, coeff * factor);
    }
    out
}

/// The full composition sum `S(θ, p, n)`, organized as a prefix convolution
/// for the `r` ordered parts and an exponential for the unordered remainder.
pub fn s_direct<C: SeriesCoeff>(theta: &WeightSequence<C>, p: &MomentIndex, n: u32) -> C {
    s_core(theta, p, n as usize, None)
}

/// The composition sum with the total number of parts capped at
/// `⌊κ·log(2n)/2⌋`; `κ` must exceed 1.
pub fn s_truncated<C: SeriesCoeff>(
    theta: &WeightSequence<C>,
    p: &MomentIndex,
    n: u32,
    kappa: f64,
) -> Result<C> {
    if !(kappa > 1.0) {
        return Err(Error::invalid("truncation requires κ > 1"));
    }
    if n == 0 {
        return Ok(C::zero());
    }
    let cap = (kappa * (2.0 * f64::from(n)).ln() / 2.0).floor() as usize;
    Ok(s_core(theta, p, n as usize, Some(cap)))
}

fn s_core<C: SeriesCoeff>(
    theta: &WeightSequence<C>,
    p: &MomentIndex,
    n: usize,
    max_parts: Option<usize>,
) -> C {
    let r = p.r();
    if r > n {
        return C::zero();
    }
    // base[j] = θ_j/(2j) is the weight a part of size j always carries.
    let mut base = vec![C::zero(); n + 1];
    for (j, slot) in base.iter_mut().enumerate().skip(1) {
        *slot = theta.weight(j as u32) / C::from_integer(2 * j as u64);
    }
    let base = PowerSeries::from_coeffs(base);

    // Ordered prefix: slot i multiplies the base weight by
    // (2j+p_i)!/(2j−1)! = (2j)(2j+1)⋯(2j+p_i).
    let mut prefix = PowerSeries::one(n);
    for &pi in p.powers() {
        let mut slot = vec![C::zero(); n + 1];
        for (j, value) in slot.iter_mut().enumerate().skip(1) {
            let mut factor = C::one();
            for t in 0..=pi {
                factor = factor * C::from_integer(2 * j as u64 + t);
            }
            *value = base.coeff(j) * factor;
        }
        prefix = prefix.mul(&PowerSeries::from_coeffs(slot));
    }

    // Unordered suffix: Σ_s base^{*s}/s!, the whole exponential when the part
    // count is not capped, otherwise the partial sum with r + s ≤ cap.
    let suffix = match max_parts {
        None => base.exp(),
        Some(cap) => {
            let mut acc = PowerSeries::zero(n);
            if cap >= r {
                let extra = (cap - r).min(n);
                let mut power = PowerSeries::one(n);
                let mut inv_factorial = C::one();
                acc = acc.add(&power);
                for s in 1..=extra {
                    power = power.mul(&base);
                    inv_factorial = inv_factorial / C::from_integer(s as u64);
                    acc = acc.add(&power.scale(&inv_factorial));
                }
            }
            acc
        }
    };

    let mut total = C::zero();
    for t in r..=n {
        let weight = prefix.coeff(t);
        if weight.is_zero() {
            continue;
        }
        total = total + weight * suffix.coeff(n - t);
    }
    total
}

/// The same sum through its generating function: `S(θ, p, n)` is the
/// `z^{2n}` coefficient of `exp(h)·Π_i D_{p_i}(h)` with `h = ½·g_θ(z²)`.
pub fn s_via_series<C: SeriesCoeff>(theta: &WeightSequence<C>, p: &MomentIndex, n: u32) -> C {
    let n = n as usize;
    if p.r() > n {
        return C::zero();
    }
    let half = C::one() / C::from_integer(2);
    let h = g_theta_series(theta, n).substitute_power(2).scale(&half);
    let mut series = h.exp();
    for &pi in p.powers() {
        series = series.mul(&apply_dp(&h, pi));
    }
    series.coeff(2 * n)
}

/// The growth law of the composition sum for admissible weights:
///
/// ```text
/// S(θ, p, n) ~ √(e^β/2) · (p_1!⋯p_r!/2^{r−1}) · (2n)^{P+r−1/2} / Γ(P+r+1/2)
/// ```
///
/// with `P = p_1+⋯+p_r`. Both square-root singularities of the generating
/// function contribute to the even coefficient `z^{2n}`, which is why the
/// power is carried by `2n`.
pub fn s_asymptote<C: SeriesCoeff>(pair: &AdmissiblePair<C>, p: &MomentIndex, n: u32) -> f64 {
    let r = p.r();
    let total: u64 = p.total();
    let exponent = total as f64 + r as f64 - 0.5;
    let mut moment_factorials = rat_int(1);
    for &pi in p.powers() {
        moment_factorials *= factorial_rat(pi);
    }
    let prefactor = (pair.beta().exp() / 2.0).sqrt();
    prefactor * rat_to_f64(&moment_factorials) / 2f64.powi(r as i32 - 1)
        * (2.0 * f64::from(n)).powf(exponent)
        / gamma_half(total + r as u64).to_f64()
}

/// Upper bound `exp(−λ(x·log x − x))` for the Poisson tail
/// `Σ_{k ≥ ⌈xλ⌉} λ^k/k!`.
pub fn poisson_tail_bound(lambda: f64, x: f64) -> f64 {
    assert!(lambda > 0.0 && x > 0.0, "the tail bound needs positive λ and x");
    (-lambda * (x * x.ln() - x)).exp()
}

/// Large-genus moment formula: the capped composition sum with `θ_j = ζ_m(2j)`
/// at `n = 3g−3`, scaled by `√((m+1)/m)·√π/(2·(6g−6)^{P+r−1/2})`. As
/// `g → ∞` this converges to the GEM(1/2) moment of the same index.
pub fn mp_asymptotic_multicurve(
    genus: u32,
    bound: MultiplicityBound,
    index: &MomentIndex,
    kappa: f64,
) -> Result<f64> {
    if genus < 2 {
        return Err(Error::invalid("multicurve moments need genus ≥ 2"));
    }
    let theta = zeta_weights_f64(bound)?;
    let sum = s_truncated(&theta, index, 3 * genus - 3, kappa)?;
    let exponent = index.total() as f64 + index.r() as f64 - 0.5;
    let prefactor =
        PI.sqrt() / (bound.sqrt_ratio() * 2.0 * f64::from(6 * genus - 6).powf(exponent));
    Ok(prefactor * sum)
}
