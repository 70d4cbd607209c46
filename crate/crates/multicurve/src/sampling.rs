//! Seeded samplers: topological types and normalized length vectors of
//! random multicurves, GEM/Poisson–Dirichlet stick breaking, size-biased
//! reordering, Ewens cycle vectors, and the truncated large-genus sampler.
//!
//! Every sampler draws from a [`RandomStream`], a ChaCha12 generator keyed
//! by `(seed, stream_index)`. Samplers are pure functions of their
//! parameters and the stream, so a fixed key reproduces identical draws on
//! any machine and any thread count; parallel drivers assign one stream
//! index per draw.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::exact::{for_each_composition, rat_to_f64};
use crate::graphs::StableGraph;
use crate::intersection::CorrelatorTable;
use crate::measure::{
    graph_polynomial, zeta_bound_f64, MulticurveMeasure, MultiplicityBound, ZetaTable,
};
use crate::{Error, Result};

/// Largest genus for which the exact sampler enumerates the full census.
pub const EXACT_SAMPLER_MAX_GENUS: u32 = 6;

/// Largest genus for which the large-genus sampler evaluates exact
/// correlator factors.
pub const EXACT_CORRELATOR_MAX_GENUS: u32 = 12;

/// Reproducible random source: ChaCha12 keyed by `(seed, stream_index)`.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    stream_index: u64,
    rng: ChaCha12Rng,
}

impl RandomStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream_index);
        RandomStream { seed, stream_index, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// A fresh stream with the same seed and a new index, independent of
    /// how much this stream has been consumed.
    pub fn substream(&self, stream_index: u64) -> RandomStream {
        RandomStream::new(self.seed, stream_index)
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index range must be nonempty");
        ((self.uniform() * n as f64) as usize).min(n - 1)
    }

    /// Unit-rate exponential draw.
    pub fn exponential(&mut self) -> f64 {
        -(1.0 - self.uniform()).ln()
    }
}

/// Declared ordering of a length vector's entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorOrdering {
    Unordered,
    SortedDesc,
    SizeBiased,
}

impl fmt::Display for VectorOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            VectorOrdering::Unordered => "unordered",
            VectorOrdering::SortedDesc => "sorted_desc",
            VectorOrdering::SizeBiased => "size_biased",
        };
        write!(f, "{name}")
    }
}

impl FromStr for VectorOrdering {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unordered" => Ok(VectorOrdering::Unordered),
            "sorted_desc" | "sorted" => Ok(VectorOrdering::SortedDesc),
            "size_biased" => Ok(VectorOrdering::SizeBiased),
            other => Err(Error::invalid(format!("unknown ordering `{other}`"))),
        }
    }
}

/// A finite vector on the simplex, implicitly zero-padded to infinite
/// length. Entries of the multicurve and stick-breaking laws sum to 1 up
/// to the declared truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthVector {
    values: Vec<f64>,
    ordering: VectorOrdering,
}

impl LengthVector {
    pub fn new(values: Vec<f64>, ordering: VectorOrdering) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid("length vector entries must be finite and ≥ 0"));
        }
        if ordering == VectorOrdering::SortedDesc && values.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::invalid("sorted_desc vector has increasing entries"));
        }
        Ok(LengthVector { values, ordering })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn ordering(&self) -> VectorOrdering {
        self.ordering
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Entry `j` (0-based) under the implicit zero padding.
    pub fn component(&self, j: usize) -> f64 {
        self.values.get(j).copied().unwrap_or(0.0)
    }

    /// The same entries sorted in decreasing order.
    pub fn sorted_desc(&self) -> LengthVector {
        let mut values = self.values.clone();
        values.sort_by(|a, b| b.partial_cmp(a).expect("entries are finite"));
        LengthVector { values, ordering: VectorOrdering::SortedDesc }
    }
}

/// A sampled topological type: stable graph, per-edge multiplicities, and
/// the latent monomial of the graph polynomial that was drawn.
#[derive(Debug, Clone)]
pub struct TopologicalTypeSample {
    graph_index: usize,
    multiplicities: Vec<u64>,
    monomial: Vec<u16>,
}

impl TopologicalTypeSample {
    pub fn multiplicities(&self) -> &[u64] {
        &self.multiplicities
    }

    /// Exponent vector `n_e` of the drawn monomial, in edge order.
    pub fn monomial(&self) -> &[u16] {
        &self.monomial
    }

    /// Index of the graph in the sampler's measure entry order.
    pub fn graph_index(&self) -> usize {
        self.graph_index
    }
}

struct MonomialChoice {
    cumulative: f64,
    exponents: Vec<u16>,
}

/// Exact sampler for the multicurve law at fixed genus and multiplicity
/// bound: graph ∝ `Z_m(F_Γ)/|Aut Γ|`, monomial ∝ `coeff·Πn_e!·ζ_m(n_e+1)`,
/// multiplicities from the per-edge truncated zeta law, lengths from the
/// Dirichlet law with parameters `n_e+1`.
pub struct MulticurveSampler {
    measure: MulticurveMeasure,
    graph_cumulative: Vec<f64>,
    monomials: Vec<Vec<MonomialChoice>>,
    zeta_norms: Vec<f64>,
}

impl MulticurveSampler {
    pub fn new(table: &CorrelatorTable, genus: u32, bound: MultiplicityBound) -> Result<Self> {
        if genus > EXACT_SAMPLER_MAX_GENUS {
            return Err(Error::budget(format!(
                "exact sampling enumerates the full genus-{genus} census; \
                 supported up to genus {EXACT_SAMPLER_MAX_GENUS}, use the large-genus sampler"
            )));
        }
        let measure = MulticurveMeasure::build(table, genus, bound)?;
        let mut graph_cumulative = Vec::with_capacity(measure.entries().len());
        let mut acc = 0.0;
        for p in measure.probabilities() {
            acc += rat_to_f64(&p);
            graph_cumulative.push(acc);
        }

        let max_arg = 6 * genus - 6;
        let ztable = ZetaTable::new(&bound, max_arg)?;
        let mut monomials = Vec::with_capacity(measure.entries().len());
        for (graph, _) in measure.entries() {
            let fpoly = graph_polynomial(table, graph)?;
            let masses: Vec<_> = fpoly
                .polynomial
                .iter()
                .map(|(exps, coeff)| (exps.to_vec(), ztable.monomial_mass(exps, coeff)))
                .collect();
            let total = masses
                .iter()
                .fold(crate::measure::MassValue::zero(), |t, (_, m)| t.add(m));
            let mut cum = 0.0;
            let choices = masses
                .into_iter()
                .map(|(exponents, mass)| {
                    cum += rat_to_f64(&mass.ratio_to(&total).expect("same π power"));
                    MonomialChoice { cumulative: cum, exponents }
                })
                .collect();
            monomials.push(choices);
        }

        let zeta_norms = (0..=max_arg)
            .map(|s| if s >= 2 { zeta_bound_f64(&bound, s) } else { 0.0 })
            .collect();
        Ok(MulticurveSampler { measure, graph_cumulative, monomials, zeta_norms })
    }

    pub fn genus(&self) -> u32 {
        self.measure.genus()
    }

    pub fn bound(&self) -> MultiplicityBound {
        self.measure.bound()
    }

    pub fn measure(&self) -> &MulticurveMeasure {
        &self.measure
    }

    pub fn graph(&self, index: usize) -> &StableGraph {
        &self.measure.entries()[index].0
    }

    pub fn sample_topological_type(&self, stream: &mut RandomStream) -> TopologicalTypeSample {
        let graph_index = walk_cumulative(&self.graph_cumulative, stream.uniform());
        let choices = &self.monomials[graph_index];
        let u = stream.uniform();
        let mono_index = choices.partition_point(|c| c.cumulative < u).min(choices.len() - 1);
        let monomial = choices[mono_index].exponents.clone();
        let multiplicities = monomial
            .iter()
            .map(|&n| sample_truncated_zeta(n as u32 + 1, &self.bound(), &self.zeta_norms, stream))
            .collect();
        TopologicalTypeSample { graph_index, multiplicities, monomial }
    }

    /// Normalized length vector conditional on a topological type:
    /// Dirichlet with parameters `n_e+1`, components in edge order.
    pub fn sample_length_vector(
        &self,
        sample: &TopologicalTypeSample,
        stream: &mut RandomStream,
    ) -> LengthVector {
        dirichlet_integer(
            &sample.monomial.iter().map(|&n| n as u32 + 1).collect::<Vec<_>>(),
            stream,
        )
    }

    /// One full draw: topological type, then its length vector.
    pub fn sample(&self, stream: &mut RandomStream) -> (TopologicalTypeSample, LengthVector) {
        let t = self.sample_topological_type(stream);
        let v = self.sample_length_vector(&t, stream);
        (t, v)
    }
}

fn walk_cumulative(cumulative: &[f64], u: f64) -> usize {
    cumulative.partition_point(|&c| c < u).min(cumulative.len() - 1)
}

/// Draw from `P(μ) ∝ μ^{−s}` for `1 ≤ μ ≤ m` by partial-sum inversion.
fn sample_truncated_zeta(
    s: u32,
    bound: &MultiplicityBound,
    zeta_norms: &[f64],
    stream: &mut RandomStream,
) -> u64 {
    let limit = match bound {
        MultiplicityBound::Finite(1) => return 1,
        MultiplicityBound::Finite(m) => *m,
        MultiplicityBound::Infinite => u64::MAX,
    };
    let target = stream.uniform() * zeta_norms[s as usize];
    let mut cum = 0.0;
    let mut mu = 0u64;
    while mu < limit {
        mu += 1;
        cum += (mu as f64).powi(-(s as i32));
        if cum >= target {
            return mu;
        }
        // s ≥ 2: the tail is at most ∫_μ^∞ x^{−s} dx; once it cannot reach
        // the target the partial sums never will (float plateau).
        if mu > 1_000_000 {
            let tail = (mu as f64).powi(1 - s as i32) / (s as f64 - 1.0);
            if cum + tail < target {
                return mu;
            }
        }
    }
    limit
}

/// Dirichlet draw with integer shape parameters, as normalized sums of
/// unit exponentials.
fn dirichlet_integer(shapes: &[u32], stream: &mut RandomStream) -> LengthVector {
    let mut values: Vec<f64> = shapes
        .iter()
        .map(|&a| (0..a).map(|_| stream.exponential()).sum())
        .collect();
    let total: f64 = values.iter().sum();
    for v in &mut values {
        *v /= total;
    }
    LengthVector { values, ordering: VectorOrdering::Unordered }
}

/// Random reordering where each next pick is chosen with probability
/// proportional to its value; zero entries are ordered uniformly at the
/// end.
pub fn size_biased_reorder(v: &LengthVector, stream: &mut RandomStream) -> LengthVector {
    let mut remaining: Vec<usize> = (0..v.len()).collect();
    let mut values = Vec::with_capacity(v.len());
    while !remaining.is_empty() {
        let total: f64 = remaining.iter().map(|&i| v.values[i]).sum();
        let pick = if total > 0.0 {
            let target = stream.uniform() * total;
            let mut cum = 0.0;
            let mut chosen = remaining.len() - 1;
            for (pos, &i) in remaining.iter().enumerate() {
                cum += v.values[i];
                if cum >= target {
                    chosen = pos;
                    break;
                }
            }
            chosen
        } else {
            stream.index(remaining.len())
        };
        values.push(v.values[remaining.swap_remove(pick)]);
    }
    LengthVector { values, ordering: VectorOrdering::SizeBiased }
}

/// Tail mass below which the default GEM truncation stops.
pub const GEM_TAIL_EPSILON: f64 = 1e-12;

const GEM_MAX_COMPONENTS: usize = 100_000;

/// Stick-breaking GEM(θ) draw: `V_i = U_i·Π_{l<i}(1−U_l)` with
/// `U_i ~ Beta(1,θ)` by inversion. With `k = None` components are drawn
/// until the undrawn tail mass falls below [`GEM_TAIL_EPSILON`].
pub fn gem_sample(theta: f64, k: Option<usize>, stream: &mut RandomStream) -> Result<LengthVector> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(Error::invalid(format!("GEM requires θ > 0, got {theta}")));
    }
    if k == Some(0) {
        return Err(Error::invalid("GEM truncation length must be ≥ 1"));
    }
    let mut values = Vec::new();
    let mut remaining = 1.0f64;
    loop {
        let u = stream.uniform();
        let stick = 1.0 - (1.0 - u).powf(1.0 / theta);
        values.push(remaining * stick);
        remaining *= 1.0 - stick;
        match k {
            Some(k) => {
                if values.len() == k {
                    break;
                }
            }
            None => {
                if remaining < GEM_TAIL_EPSILON || values.len() == GEM_MAX_COMPONENTS {
                    break;
                }
            }
        }
    }
    Ok(LengthVector { values, ordering: VectorOrdering::SizeBiased })
}

/// Poisson–Dirichlet PD(θ) draw: the GEM draw sorted in decreasing order
/// (shared stream, so it couples deterministically with [`gem_sample`]).
pub fn pd_sample(theta: f64, k: Option<usize>, stream: &mut RandomStream) -> Result<LengthVector> {
    Ok(gem_sample(theta, k, stream)?.sorted_desc())
}

/// Normalized sorted cycle-length vector of an Ewens(θ) random permutation
/// of `n` elements, via the Chinese-restaurant construction.
pub fn sample_ewens_cycles(n: u64, theta: f64, stream: &mut RandomStream) -> Result<LengthVector> {
    if n == 0 {
        return Err(Error::invalid("Ewens sampling requires n ≥ 1"));
    }
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(Error::invalid(format!("Ewens requires θ > 0, got {theta}")));
    }
    let n = usize::try_from(n).map_err(|_| Error::budget("Ewens n exceeds address space"))?;
    let mut cycle_of: Vec<u32> = Vec::with_capacity(n);
    let mut sizes: Vec<u64> = Vec::new();
    for i in 0..n {
        // New cycle with probability θ/(θ+i), otherwise join the cycle of a
        // uniformly chosen earlier element (joining ∝ cycle size).
        if stream.uniform() * (theta + i as f64) < theta {
            cycle_of.push(sizes.len() as u32);
            sizes.push(1);
        } else {
            let j = stream.index(i);
            let c = cycle_of[j];
            cycle_of.push(c);
            sizes[c as usize] += 1;
        }
    }
    let mut values: Vec<f64> = sizes.iter().map(|&s| s as f64 / n as f64).collect();
    values.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    Ok(LengthVector { values, ordering: VectorOrdering::SortedDesc })
}

enum CompositionLaw {
    /// Per k: compositions of 3g−3 with cumulative probabilities.
    Exact(Vec<Vec<(Vec<u32>, f64)>>),
    /// Convolution powers of `a_j = ζ_m(2j)/(2j)`: `conv[t][n]` is the
    /// total weight of compositions of `n` into `t` parts.
    Approx { a: Vec<f64>, conv: Vec<Vec<f64>> },
}

/// Sampler for the truncated large-genus law: one-vertex graphs `Γ_{g,k}`
/// with `k ≤ ⌊κ·ln(6g−6)/2⌋`, a composition `(j_1,…,j_k)` of `3g−3`, and a
/// Dirichlet length vector with parameters `2j_i`.
pub struct LargeGenusSampler {
    genus: u32,
    bound: MultiplicityBound,
    approx_correlators: bool,
    k_cumulative: Vec<f64>,
    law: CompositionLaw,
}

impl LargeGenusSampler {
    pub fn new(
        table: &CorrelatorTable,
        genus: u32,
        bound: MultiplicityBound,
        kappa: f64,
        approx_correlators: bool,
    ) -> Result<Self> {
        let k_max = crate::measure::truncation_loop_bound(genus, kappa)?;
        if !approx_correlators && genus > EXACT_CORRELATOR_MAX_GENUS {
            return Err(Error::budget(format!(
                "exact correlator factors supported up to genus {EXACT_CORRELATOR_MAX_GENUS}; \
                 pass approx_correlators for genus {genus}"
            )));
        }
        let n = 3 * genus as usize - 3;
        let a: Vec<f64> = (0..=n)
            .map(|j| if j == 0 { 0.0 } else { zeta_bound_f64(&bound, 2 * j as u32) / (2 * j) as f64 })
            .collect();

        // ln weight of k: ln w_{g,k} − ln(2^k·k!) + ln Σ_j c̃(j)·Π a_{j_i},
        // with the k-independent (6g−7)!/2³ factor dropped.
        let lf = ln_factorial_table(6 * genus as usize);
        let mut ln_weights = Vec::with_capacity(k_max as usize);
        let law = if approx_correlators {
            let mut conv: Vec<Vec<f64>> = vec![vec![0.0; n + 1]];
            conv[0][0] = 1.0;
            for t in 1..=k_max as usize {
                let prev = &conv[t - 1];
                let mut next = vec![0.0; n + 1];
                for total in t..=n {
                    let mut acc = 0.0;
                    for j in 1..=(total - t + 1) {
                        acc += a[j] * prev[total - j];
                    }
                    next[total] = acc;
                }
                conv.push(next);
            }
            for k in 1..=k_max {
                ln_weights.push(ln_one_vertex_weight(genus, k, &lf) + conv[k as usize][n].ln());
            }
            CompositionLaw::Approx { a, conv }
        } else {
            let mut per_k = Vec::with_capacity(k_max as usize);
            for k in 1..=k_max {
                let mut comps: Vec<(Vec<u32>, f64)> = Vec::new();
                let mut total = 0.0;
                let mut failure: Option<Error> = None;
                for_each_composition(3 * genus - 3, k as usize, 1, |j| {
                    if failure.is_some() {
                        return;
                    }
                    match table.c_tilde(genus, j) {
                        Ok(c) => {
                            let w = rat_to_f64(&c)
                                * j.iter().map(|&ji| a[ji as usize]).product::<f64>();
                            total += w;
                            comps.push((j.to_vec(), total));
                        }
                        Err(e) => failure = Some(e),
                    }
                });
                if let Some(e) = failure {
                    return Err(e);
                }
                for (_, cum) in &mut comps {
                    *cum /= total;
                }
                ln_weights.push(ln_one_vertex_weight(genus, k, &lf) + total.ln());
                per_k.push(comps);
            }
            CompositionLaw::Exact(per_k)
        };

        let max_ln = ln_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = ln_weights.iter().map(|w| (w - max_ln).exp()).collect();
        let total: f64 = weights.iter().sum();
        let mut acc = 0.0;
        let k_cumulative = weights
            .iter()
            .map(|w| {
                acc += w / total;
                acc
            })
            .collect();
        Ok(LargeGenusSampler { genus, bound, approx_correlators, k_cumulative, law })
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn bound(&self) -> MultiplicityBound {
        self.bound
    }

    pub fn approx_correlators(&self) -> bool {
        self.approx_correlators
    }

    pub fn loop_bound(&self) -> u32 {
        self.k_cumulative.len() as u32
    }

    /// `P(k)` over the admitted one-vertex graphs.
    pub fn k_probability(&self, k: u32) -> f64 {
        let i = (k - 1) as usize;
        let prev = if i == 0 { 0.0 } else { self.k_cumulative[i - 1] };
        self.k_cumulative[i] - prev
    }

    /// Probability of one ordered composition `(j_1,…,j_k)` conditional on
    /// its length `k`.
    pub fn composition_probability(&self, j: &[u32]) -> Result<f64> {
        let k = j.len();
        if k == 0 || k > self.k_cumulative.len() {
            return Err(Error::invalid("composition length outside the loop bound"));
        }
        let n: u32 = j.iter().sum();
        if n != 3 * self.genus - 3 || j.iter().any(|&ji| ji == 0) {
            return Err(Error::invalid("not a composition of 3g−3 into positive parts"));
        }
        match &self.law {
            CompositionLaw::Exact(per_k) => {
                let comps = &per_k[k - 1];
                for (pos, (jj, cum)) in comps.iter().enumerate() {
                    if jj == j {
                        let prev = if pos == 0 { 0.0 } else { comps[pos - 1].1 };
                        return Ok(cum - prev);
                    }
                }
                Ok(0.0)
            }
            CompositionLaw::Approx { a, conv } => {
                let mut p = 1.0;
                let mut rest = n as usize;
                for (t, &ji) in j.iter().enumerate() {
                    let slots_left = k - t;
                    p *= a[ji as usize] * conv[slots_left - 1][rest - ji as usize]
                        / conv[slots_left][rest];
                    rest -= ji as usize;
                }
                Ok(p)
            }
        }
    }

    /// One draw: the Dirichlet length vector of the sampled composition.
    pub fn sample(&self, stream: &mut RandomStream) -> LengthVector {
        dirichlet_integer(&self.sample_composition(stream), stream)
    }

    /// The sampled `(2j_1,…,2j_k)` Dirichlet parameters.
    fn sample_composition(&self, stream: &mut RandomStream) -> Vec<u32> {
        let k = walk_cumulative(&self.k_cumulative, stream.uniform()) + 1;
        let j = match &self.law {
            CompositionLaw::Exact(per_k) => {
                let comps = &per_k[k - 1];
                let u = stream.uniform();
                let i = comps.partition_point(|(_, cum)| *cum < u).min(comps.len() - 1);
                comps[i].0.clone()
            }
            CompositionLaw::Approx { a, conv } => {
                let mut j = Vec::with_capacity(k);
                let mut rest = 3 * self.genus as usize - 3;
                for slots_left in (1..=k).rev() {
                    if slots_left == 1 {
                        j.push(rest as u32);
                        break;
                    }
                    let total = conv[slots_left][rest];
                    let target = stream.uniform() * total;
                    let mut cum = 0.0;
                    let mut pick = rest - slots_left + 1;
                    for cand in 1..=(rest - slots_left + 1) {
                        cum += a[cand] * conv[slots_left - 1][rest - cand];
                        if cum >= target {
                            pick = cand;
                            break;
                        }
                    }
                    j.push(pick as u32);
                    rest -= pick;
                }
                j
            }
        };
        j.iter().map(|&ji| 2 * ji).collect()
    }
}

fn ln_factorial_table(max: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(max + 1);
    t.push(0.0);
    for k in 1..=max {
        t.push(t[k - 1] + (k as f64).ln());
    }
    t
}

/// `ln(w_{g,k}/(2^k k!))` up to k-independent terms:
/// `w_{g,k} = (6g−5−2k)!·(6g−7)!/((g−k)!·(3g−3−k)!)·2^{3k−3}/3^{g−k}`.
fn ln_one_vertex_weight(genus: u32, k: u32, lf: &[f64]) -> f64 {
    let g = genus as usize;
    let k = k as usize;
    lf[6 * g - 5 - 2 * k] - lf[g - k] - lf[3 * g - 3 - k]
        + (3.0 * k as f64) * 2f64.ln()
        - ((g - k) as f64) * 3f64.ln()
        - (k as f64) * 2f64.ln()
        - lf[k]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::single_vertex_graph;
    use crate::measure::apply_z;

    const INF: MultiplicityBound = MultiplicityBound::Infinite;

    fn fin(m: u64) -> MultiplicityBound {
        MultiplicityBound::Finite(m)
    }

    #[test]
    fn stream_reproducibility_and_substreams() {
        let mut a = RandomStream::new(7, 0);
        let mut b = RandomStream::new(7, 0);
        let seq_a: Vec<f64> = (0..32).map(|_| a.uniform()).collect();
        let seq_b: Vec<f64> = (0..32).map(|_| b.uniform()).collect();
        assert_eq!(seq_a, seq_b);

        let mut c = RandomStream::new(7, 1);
        let seq_c: Vec<f64> = (0..32).map(|_| c.uniform()).collect();
        assert_ne!(seq_a, seq_c);

        // Substreams depend only on (seed, index), not on consumption.
        let mut d = a.substream(1);
        let seq_d: Vec<f64> = (0..32).map(|_| d.uniform()).collect();
        assert_eq!(seq_c, seq_d);

        let mut e = RandomStream::new(8, 0);
        let seq_e: Vec<f64> = (0..32).map(|_| e.uniform()).collect();
        assert_ne!(seq_a, seq_e);
    }

    #[test]
    fn length_vector_validation() {
        assert!(LengthVector::new(vec![0.5, 0.5], VectorOrdering::Unordered).is_ok());
        assert!(LengthVector::new(vec![-0.1], VectorOrdering::Unordered).is_err());
        assert!(LengthVector::new(vec![f64::NAN], VectorOrdering::Unordered).is_err());
        assert!(LengthVector::new(vec![0.2, 0.8], VectorOrdering::SortedDesc).is_err());
        let v = LengthVector::new(vec![0.2, 0.8], VectorOrdering::Unordered).unwrap();
        assert_eq!(v.component(1), 0.8);
        assert_eq!(v.component(5), 0.0);
        assert_eq!(v.sorted_desc().values(), &[0.8, 0.2]);
    }

    #[test]
    fn size_biased_first_pick_and_order_frequencies() {
        let v = LengthVector::new(vec![0.5, 0.3, 0.2], VectorOrdering::Unordered).unwrap();
        let mut stream = RandomStream::new(11, 0);
        let n = 200_000;
        let mut first_is_half = 0u32;
        let mut order_231 = 0u32;
        for _ in 0..n {
            let out = size_biased_reorder(&v, &mut stream);
            if out.values()[0] == 0.5 {
                first_is_half += 1;
            }
            if out.values() == [0.3, 0.5, 0.2] {
                order_231 += 1;
            }
        }
        let p1 = first_is_half as f64 / n as f64;
        assert!((p1 - 0.5).abs() < 4.0 * (0.25f64 / n as f64).sqrt(), "p1 = {p1}");
        // P(order (2,1,3)) = (0.3/1)·(0.5/0.7) = 3/14.
        let p = order_231 as f64 / n as f64;
        let expect = 3.0 / 14.0;
        let sigma = (expect * (1.0 - expect) / n as f64).sqrt();
        assert!((p - expect).abs() < 4.0 * sigma, "p = {p}");
    }

    #[test]
    fn size_biased_zeros_order_uniformly_last() {
        let v = LengthVector::new(vec![0.6, 0.4, 0.0, 0.0], VectorOrdering::Unordered).unwrap();
        let mut stream = RandomStream::new(3, 0);
        for _ in 0..5_000 {
            let out = size_biased_reorder(&v, &mut stream);
            assert_eq!(&out.values()[2..], &[0.0, 0.0]);
        }
        // Fully zero vector: uniform permutation.
        let z = LengthVector::new(vec![0.0, 0.0], VectorOrdering::Unordered).unwrap();
        let out = size_biased_reorder(&z, &mut stream);
        assert_eq!(out.len(), 2);
        assert_eq!(out.ordering(), VectorOrdering::SizeBiased);
    }

    #[test]
    fn gem_moments_and_truncation() {
        let mut stream = RandomStream::new(5, 0);
        let n = 100_000;
        let mut sum1 = 0.0;
        let mut sum2 = 0.0;
        for _ in 0..n {
            let v = gem_sample(0.5, None, &mut stream).unwrap();
            assert!((v.sum() - 1.0).abs() < 1e-11);
            assert!(v.values().iter().all(|&x| x > 0.0 && x < 1.0));
            sum1 += v.component(0);
            sum2 += v.component(1);
        }
        let mean1 = sum1 / n as f64;
        let mean2 = sum2 / n as f64;
        // E V₁ = 1/(1+θ) = 2/3, Var = θ/((1+θ)²(θ+2)) = 0.0889.
        assert!((mean1 - 2.0 / 3.0).abs() < 4.0 * (0.0889f64 / n as f64).sqrt(), "{mean1}");
        assert!((mean2 - 2.0 / 9.0).abs() < 4.0 * (0.05f64 / n as f64).sqrt(), "{mean2}");

        let fixed = gem_sample(0.5, Some(4), &mut stream).unwrap();
        assert_eq!(fixed.len(), 4);
        assert!(fixed.sum() < 1.0);
        assert!(gem_sample(0.0, None, &mut stream).is_err());
        assert!(gem_sample(0.5, Some(0), &mut stream).is_err());
    }

    #[test]
    fn pd_is_sorted_gem_under_shared_stream() {
        let mut s1 = RandomStream::new(42, 9);
        let mut s2 = RandomStream::new(42, 9);
        for _ in 0..50 {
            let gem = gem_sample(0.5, None, &mut s1).unwrap();
            let pd = pd_sample(0.5, None, &mut s2).unwrap();
            assert_eq!(pd, gem.sorted_desc());
            assert_eq!(pd.ordering(), VectorOrdering::SortedDesc);
        }
    }

    #[test]
    fn ewens_small_permutation_frequencies() {
        let mut stream = RandomStream::new(17, 0);
        let one = sample_ewens_cycles(1, 0.5, &mut stream).unwrap();
        assert_eq!(one.values(), &[1.0]);

        // θ = 1 is the uniform measure on S_n. n=2: P(two fixed points)=1/2;
        // n=3 cycle types: (1,1,1) w.p. 1/6, (2,1) w.p. 1/2, (3) w.p. 1/3.
        let n = 100_000;
        let mut two_fixed = 0u32;
        for _ in 0..n {
            let v = sample_ewens_cycles(2, 1.0, &mut stream).unwrap();
            if v.len() == 2 {
                two_fixed += 1;
            }
        }
        let p = two_fixed as f64 / n as f64;
        assert!((p - 0.5).abs() < 4.0 * (0.25f64 / n as f64).sqrt(), "{p}");

        let mut counts = [0u32; 3];
        for _ in 0..n {
            let v = sample_ewens_cycles(3, 1.0, &mut stream).unwrap();
            counts[3 - v.len()] += 1;
        }
        for (idx, expect) in [(0usize, 1.0 / 6.0), (1, 0.5), (2, 1.0 / 3.0)] {
            let p = counts[idx] as f64 / n as f64;
            let sigma = (expect * (1.0 - expect) / n as f64).sqrt();
            assert!((p - expect).abs() < 4.0 * sigma, "type {idx}: {p} vs {expect}");
        }
        assert!(sample_ewens_cycles(0, 1.0, &mut stream).is_err());
        assert!(sample_ewens_cycles(3, -1.0, &mut stream).is_err());
    }

    #[test]
    fn multicurve_sampler_matches_exact_graph_frequencies() {
        let table = CorrelatorTable::new();
        let sampler = MulticurveSampler::new(&table, 2, fin(1)).unwrap();
        let probs: Vec<f64> = sampler
            .measure()
            .probabilities()
            .iter()
            .map(rat_to_f64)
            .collect();
        let mut stream = RandomStream::new(100, 0);
        let n = 100_000;
        let mut counts = vec![0u32; probs.len()];
        for _ in 0..n {
            let (t, v) = sampler.sample(&mut stream);
            counts[t.graph_index()] += 1;
            // m = 1 forces unit multiplicities.
            assert!(t.multiplicities().iter().all(|&m| m == 1));
            assert!((v.sum() - 1.0).abs() < 1e-12);
            assert_eq!(v.len(), sampler.graph(t.graph_index()).num_edges());
        }
        for (i, &expect) in probs.iter().enumerate() {
            let p = counts[i] as f64 / n as f64;
            let sigma = (expect * (1.0 - expect) / n as f64).sqrt();
            assert!((p - expect).abs() < 4.0 * sigma, "graph {i}: {p} vs {expect}");
        }
    }

    #[test]
    fn dirichlet_component_mean_matches_moment() {
        // Conditional on monomial (3,1) the first component has mean 4/6.
        let table = CorrelatorTable::new();
        let sampler = MulticurveSampler::new(&table, 2, fin(1)).unwrap();
        let mut stream = RandomStream::new(2024, 0);
        let mut hits = 0u32;
        let mut sum = 0.0;
        for _ in 0..200_000 {
            let (t, v) = sampler.sample(&mut stream);
            if t.monomial() == [3, 1] {
                hits += 1;
                sum += v.values()[0];
            }
        }
        assert!(hits > 10_000, "conditioning event too rare: {hits}");
        let mean = sum / hits as f64;
        // Dirichlet(4,2): mean 2/3, variance (2/3)(1/3)/7.
        let sigma = ((2.0 / 27.0) / hits as f64).sqrt();
        assert!((mean - 2.0 / 3.0).abs() < 4.0 * sigma, "{mean}");
    }

    #[test]
    fn multiplicity_conditional_law_matches_truncated_zeta() {
        let table = CorrelatorTable::new();
        for bound in [fin(3), INF] {
            let sampler = MulticurveSampler::new(&table, 2, bound).unwrap();
            let mut stream = RandomStream::new(55, 0);
            let mut counts = std::collections::BTreeMap::<u64, u32>::new();
            let mut total = 0u32;
            for _ in 0..200_000 {
                let t = sampler.sample_topological_type(&mut stream);
                if t.monomial() == [5] {
                    *counts.entry(t.multiplicities()[0]).or_default() += 1;
                    total += 1;
                }
            }
            assert!(total > 20_000);
            let norm = zeta_bound_f64(&bound, 6);
            for mu in 1..=3u64 {
                let expect = (mu as f64).powi(-6) / norm;
                let p = counts.get(&mu).copied().unwrap_or(0) as f64 / total as f64;
                let sigma = (expect * (1.0 - expect) / total as f64).sqrt();
                assert!((p - expect).abs() < 4.0 * sigma, "μ={mu}: {p} vs {expect}");
            }
        }
    }

    #[test]
    fn sampler_rejects_genus_above_budget() {
        let table = CorrelatorTable::new();
        assert!(MulticurveSampler::new(&table, 7, fin(1)).is_err());
    }

    #[test]
    fn large_genus_composition_law_matches_exact_sampler_weights() {
        // For single-vertex graphs the large-genus law must reproduce the
        // general measure: P(k) ∝ Z_m(F_{g,k})/(2^k·k!) and the ordered
        // composition law matches the monomial law of F_{g,k}.
        let table = CorrelatorTable::new();
        for bound in [fin(1), fin(2), INF] {
            let lg = LargeGenusSampler::new(&table, 4, bound, 1.5, false).unwrap();
            assert_eq!(lg.loop_bound(), 2);

            let z_over_aut: Vec<f64> = (1..=2u32)
                .map(|k| {
                    let graph = single_vertex_graph(4, k).unwrap();
                    let fpoly = graph_polynomial(&table, &graph).unwrap();
                    let z = apply_z(&fpoly.polynomial, &bound).unwrap();
                    z.to_f64() / graph.automorphism_count() as f64
                })
                .collect();
            let total: f64 = z_over_aut.iter().sum();
            for k in 1..=2u32 {
                let expect = z_over_aut[(k - 1) as usize] / total;
                let got = lg.k_probability(k);
                assert!((got - expect).abs() < 1e-10, "k={k}: {got} vs {expect}");
            }

            // Composition (j_1, j_2) of 9 versus the monomial law of F_{4,2}.
            let graph = single_vertex_graph(4, 2).unwrap();
            let fpoly = graph_polynomial(&table, &graph).unwrap();
            let ztable = ZetaTable::new(&bound, 19).unwrap();
            let masses: Vec<(Vec<u16>, f64)> = fpoly
                .polynomial
                .iter()
                .map(|(exps, coeff)| (exps.to_vec(), ztable.monomial_mass(exps, coeff).to_f64()))
                .collect();
            let mass_total: f64 = masses.iter().map(|(_, m)| m).sum();
            for (exps, mass) in &masses {
                // Each ordered composition j_i = (n_i+1)/2 is one monomial.
                let j: Vec<u32> = exps.iter().map(|&e| (e as u32 + 1) / 2).collect();
                let p_mono = mass / mass_total;
                let p_comp = lg.composition_probability(&j).unwrap();
                assert!(
                    (p_mono - p_comp).abs() < 1e-9,
                    "monomial {exps:?}: {p_mono} vs {p_comp}"
                );
            }
        }
    }

    #[test]
    fn approx_composition_dp_normalizes_and_draws() {
        let table = CorrelatorTable::new();
        // Genus 5 at κ = 1.5 admits k ≤ 2.
        let lg = LargeGenusSampler::new(&table, 5, fin(1), 1.5, true).unwrap();
        let n = 3 * 5 - 3;
        let mut total = 0.0;
        for j1 in 1..n as u32 {
            total += lg.composition_probability(&[j1, n as u32 - j1]).unwrap();
        }
        assert!((total - 1.0).abs() < 1e-12, "composition law sums to {total}");

        let mut stream = RandomStream::new(808, 0);
        for _ in 0..200 {
            let v = lg.sample(&mut stream);
            assert!((v.sum() - 1.0).abs() < 1e-12);
            assert!(!v.is_empty() && v.len() <= 2);
        }
    }

    #[test]
    fn large_genus_exact_reduces_to_single_loop_at_genus_two() {
        let table = CorrelatorTable::new();
        let lg = LargeGenusSampler::new(&table, 2, fin(1), 1.5, false).unwrap();
        assert_eq!(lg.loop_bound(), 1);
        assert_eq!(lg.k_probability(1), 1.0);
        // Only composition (3): the vector is Dirichlet(6) on one part.
        let mut stream = RandomStream::new(1, 0);
        let v = lg.sample(&mut stream);
        assert_eq!(v.values(), &[1.0]);

        // The general sampler restricted to the one-loop graph draws the
        // same degenerate vector.
        let sampler = MulticurveSampler::new(&table, 2, fin(1)).unwrap();
        let mut stream = RandomStream::new(1, 1);
        loop {
            let (t, v) = sampler.sample(&mut stream);
            if sampler.graph(t.graph_index()).num_edges() == 1 {
                assert_eq!(v.values(), &[1.0]);
                break;
            }
        }
    }

    #[test]
    fn large_genus_rejects_exact_above_budget_and_bad_kappa() {
        let table = CorrelatorTable::new();
        assert!(LargeGenusSampler::new(&table, 64, fin(1), 1.5, false).is_err());
        assert!(LargeGenusSampler::new(&table, 64, fin(1), 0.5, true).is_err());
        assert!(LargeGenusSampler::new(&table, 64, fin(1), 1.5, true).is_ok());
    }

    #[test]
    fn large_genus_approx_top_component_approaches_pd_mean() {
        // At genus 512 with enough admitted loops the sorted top component
        // mean sits on the PD(1/2) value 0.758. κ = 1.5 keeps only k ≤ 6
        // and overshoots; the bias is pure truncation.
        let table = CorrelatorTable::new();
        let mut means = Vec::new();
        for kappa in [1.5, 2.5] {
            let lg = LargeGenusSampler::new(&table, 512, INF, kappa, true).unwrap();
            let mut stream = RandomStream::new(99, 0);
            let n = 20_000;
            let mut sum = 0.0;
            for _ in 0..n {
                sum += lg.sample(&mut stream).sorted_desc().component(0);
            }
            means.push(sum / n as f64);
        }
        assert!((means[1] - 0.758).abs() < 0.02, "top-component mean {}", means[1]);
        assert!(means[0] > means[1], "truncation bias is upward: {means:?}");
    }
}
