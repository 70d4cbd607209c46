//! Stable graphs: duals of primitive multicurves on a closed genus-g surface.
//!
//! A stable graph has vertices decorated with genera `g_v ≥ 0` and undirected
//! edges (loops allowed, parallel edges allowed) subject to
//!
//! * connectedness,
//! * stability `2g_v - 2 + deg(v) > 0` at every vertex, where a loop counts
//!   twice in the degree,
//! * the genus identity `|E| - |V| + 1 + Σg_v = g`.
//!
//! The edgeless one-vertex graph of genus `g` is deliberately excluded from
//! enumeration: it corresponds to the empty multicurve, which carries no
//! length data.
//!
//! Isomorphism classes are identified by a canonical form computed with
//! partition refinement plus individualization, minimizing a serialized
//! adjacency encoding over all refinement-consistent vertex orderings. The
//! same search counts vertex automorphisms; automorphisms of the half-edge
//! structure (pairs `(φ,ψ)` of vertex and half-edge bijections) follow by the
//! closed formula
//!
//! ```text
//! |Aut(Γ)| = (vertex automorphisms) · Π_{u<v} m_{uv}! · Π_v l_v!·2^{l_v}
//! ```
//!
//! since parallel edges of a bundle may be permuted freely and every loop may
//! be flipped. A weighted stable graph carries one multiplicity per edge and
//! its automorphisms must preserve weights, which restricts the bundle and
//! loop permutations to weight classes.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::Serialize;

use crate::exact::factorial;
use crate::{Error, Result};

/// An isomorphism-class representative of a stable graph.
///
/// Edges are stored as vertex pairs `(u, v)` with `u ≤ v`, sorted; a loop has
/// `u == v` and parallel edges repeat the pair. The stored labeling of an
/// enumerated graph is the canonical one.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct StableGraph {
    vertex_genera: Vec<u32>,
    edges: Vec<(usize, usize)>,
}

impl StableGraph {
    /// Validate and build a stable graph; the edge list is sorted.
    pub fn new(vertex_genera: Vec<u32>, mut edges: Vec<(usize, usize)>) -> Result<Self> {
        let s = vertex_genera.len();
        if s == 0 {
            return Err(Error::invalid("stable graph needs at least one vertex"));
        }
        if edges.is_empty() {
            return Err(Error::invalid(
                "stable graph needs at least one edge (empty multicurves are excluded)",
            ));
        }
        for e in &mut edges {
            if e.0 > e.1 {
                *e = (e.1, e.0);
            }
            if e.1 >= s {
                return Err(Error::invalid(format!(
                    "edge ({},{}) references a vertex out of range",
                    e.0, e.1
                )));
            }
        }
        edges.sort_unstable();
        let graph = StableGraph { vertex_genera, edges };
        for v in 0..s {
            if 2 * graph.vertex_genera[v] as i64 - 2 + graph.degree(v) as i64 <= 0 {
                return Err(Error::invalid(format!(
                    "vertex {v} violates stability: genus {}, degree {}",
                    graph.vertex_genera[v],
                    graph.degree(v)
                )));
            }
        }
        if !graph.is_connected() {
            return Err(Error::invalid("stable graph must be connected"));
        }
        Ok(graph)
    }

    pub fn num_vertices(&self) -> usize {
        self.vertex_genera.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_genera(&self) -> &[u32] {
        &self.vertex_genera
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Degree of a vertex; a loop contributes two.
    pub fn degree(&self, v: usize) -> u32 {
        let mut d = 0;
        for &(a, b) in &self.edges {
            if a == v {
                d += 1;
            }
            if b == v {
                d += 1;
            }
        }
        d
    }

    /// Genus of the graph: `|E| - |V| + 1 + Σ g_v`.
    pub fn genus(&self) -> u32 {
        (self.edges.len() as i64 - self.vertex_genera.len() as i64
            + 1
            + self.vertex_genera.iter().map(|&g| g as i64).sum::<i64>()) as u32
    }

    /// Edge indices incident to `v`, one entry per half-edge (loops twice),
    /// in edge-list order. This is the variable-slot list used to evaluate a
    /// vertex volume polynomial on edge variables.
    pub fn vertex_edge_slots(&self, v: usize) -> Vec<usize> {
        let mut slots = Vec::new();
        for (idx, &(a, b)) in self.edges.iter().enumerate() {
            if a == v {
                slots.push(idx);
            }
            if b == v {
                slots.push(idx);
            }
        }
        slots
    }

    fn is_connected(&self) -> bool {
        let s = self.vertex_genera.len();
        let mut dsu = DisjointSets::new(s);
        for &(a, b) in &self.edges {
            dsu.union(a, b);
        }
        (1..s).all(|v| dsu.find(v) == dsu.find(0))
    }

    fn decorated(&self) -> Decorated {
        Decorated::from_edges(&self.vertex_genera, &self.edges, None)
    }

    /// Canonical identifier of the isomorphism class.
    pub fn canonical_form(&self) -> String {
        self.decorated().canonical_string()
    }

    /// Number of vertex bijections preserving genera and adjacency.
    pub fn vertex_automorphism_count(&self) -> u128 {
        self.decorated().search().2
    }

    /// `|Aut(Γ)|` acting on half-edges: vertex automorphisms times the free
    /// permutations of parallel edges and flips of loops.
    pub fn automorphism_count(&self) -> u128 {
        let dec = self.decorated();
        let vertex_auts = dec.search().2;
        vertex_auts * dec.edge_factor()
    }

    /// Relabel vertices by the canonical order (used by the enumerator).
    fn relabeled_canonically(&self) -> StableGraph {
        let order = self.decorated().search().0;
        let mut new_label = vec![0usize; order.len()];
        for (pos, &v) in order.iter().enumerate() {
            new_label[v] = pos;
        }
        let genera: Vec<u32> = order.iter().map(|&v| self.vertex_genera[v]).collect();
        let edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .map(|&(a, b)| {
                let (x, y) = (new_label[a], new_label[b]);
                (x.min(y), x.max(y))
            })
            .collect();
        StableGraph::new(genera, edges).expect("relabeling preserves validity")
    }

    /// JSON record with the fields `vertex_genera`, `edges`, `aut`,
    /// `canonical`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "vertex_genera": self.vertex_genera,
            "edges": self.edges.iter().map(|&(a, b)| vec![a, b]).collect::<Vec<_>>(),
            "aut": self.automorphism_count() as u64,
            "canonical": self.canonical_form(),
        })
    }
}

/// A stable graph together with one positive multiplicity per edge; the dual
/// of a general (not necessarily primitive) multicurve.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct WeightedStableGraph {
    graph: StableGraph,
    multiplicities: Vec<u32>,
}

impl WeightedStableGraph {
    /// `multiplicities[i]` is the weight of `graph.edges()[i]`.
    pub fn new(graph: StableGraph, multiplicities: Vec<u32>) -> Result<Self> {
        if multiplicities.len() != graph.num_edges() {
            return Err(Error::invalid("one multiplicity per edge required"));
        }
        if multiplicities.iter().any(|&m| m == 0) {
            return Err(Error::invalid("edge multiplicities must be ≥ 1"));
        }
        Ok(WeightedStableGraph { graph, multiplicities })
    }

    pub fn graph(&self) -> &StableGraph {
        &self.graph
    }

    pub fn multiplicities(&self) -> &[u32] {
        &self.multiplicities
    }

    /// A multicurve is primitive when every component has multiplicity one.
    pub fn is_primitive(&self) -> bool {
        self.multiplicities.iter().all(|&m| m == 1)
    }

    fn decorated(&self) -> Decorated {
        Decorated::from_edges(
            self.graph.vertex_genera(),
            self.graph.edges(),
            Some(&self.multiplicities),
        )
    }

    /// Canonical identifier of the weighted isomorphism class.
    pub fn canonical_form(&self) -> String {
        self.decorated().canonical_string()
    }

    /// `|Aut(Γ, m)|`: automorphisms of the half-edge structure preserving
    /// edge weights.
    pub fn automorphism_count(&self) -> u128 {
        let dec = self.decorated();
        let vertex_auts = dec.search().2;
        vertex_auts * dec.edge_factor()
    }
}

/// The one-vertex graph `Γ_{g,k}`: a vertex of genus `g-k` with `k` loops.
pub fn single_vertex_graph(g: u32, k: u32) -> Result<StableGraph> {
    if k == 0 || k > g || k as i64 > 3 * g as i64 - 3 {
        return Err(Error::invalid(format!(
            "one-vertex graph requires 1 ≤ k ≤ min(g, 3g-3); got g = {g}, k = {k}"
        )));
    }
    StableGraph::new(vec![g - k], vec![(0, 0); k as usize])
}

/// All isomorphism classes of stable graphs of genus `g` with at least one
/// and at most `min(max_edges, 3g-3)` edges, in a deterministic order
/// (increasing edge count, then vertex count, then canonical form).
pub fn enumerate_stable_graphs(g: u32, max_edges: Option<usize>) -> Result<Vec<StableGraph>> {
    if g < 2 {
        return Err(Error::invalid(format!(
            "stable graph enumeration requires genus ≥ 2; got {g}"
        )));
    }
    let edge_cap = max_edges
        .unwrap_or(usize::MAX)
        .min((3 * g - 3) as usize);
    let mut classes: BTreeMap<Vec<u64>, StableGraph> = BTreeMap::new();

    for s in 1..=(2 * g as usize - 2) {
        each_genus_multiset(g, s, &mut |genera| {
            let sum_g: u32 = genera.iter().sum();
            let e = g as i64 - 1 + s as i64 - sum_g as i64;
            if e < (s as i64 - 1).max(1) || e > edge_cap as i64 {
                return;
            }
            let mut search = MatrixSearch::new(genera, e as u32);
            search.run(&mut |mat| {
                if !matrix_connected(mat) {
                    return;
                }
                let mut edges = Vec::with_capacity(e as usize);
                for u in 0..s {
                    for _ in 0..mat[u][u] {
                        edges.push((u, u));
                    }
                    for v in u + 1..s {
                        for _ in 0..mat[u][v] {
                            edges.push((u, v));
                        }
                    }
                }
                let graph = StableGraph::new(genera.to_vec(), edges)
                    .expect("enumerator emits valid graphs");
                debug_assert_eq!(graph.genus(), g);
                let key = graph.decorated().search().1;
                classes.entry(key).or_insert(graph);
            });
        });
    }

    let mut out: Vec<StableGraph> = classes
        .into_values()
        .map(|graph| graph.relabeled_canonically())
        .collect();
    out.sort_by(|a, b| {
        (a.num_edges(), a.num_vertices())
            .cmp(&(b.num_edges(), b.num_vertices()))
            .then_with(|| a.canonical_form().cmp(&b.canonical_form()))
    });
    Ok(out)
}

/// Visit every nonincreasing genus vector of length `s` with entries in
/// `0..=g-1` (a vertex of genus `g` would force the edgeless graph).
fn each_genus_multiset(g: u32, s: usize, f: &mut impl FnMut(&[u32])) {
    fn rec(g: u32, buf: &mut Vec<u32>, s: usize, max: u32, f: &mut impl FnMut(&[u32])) {
        if buf.len() == s {
            f(buf);
            return;
        }
        let mut v = max;
        loop {
            buf.push(v);
            rec(g, buf, s, v, f);
            buf.pop();
            if v == 0 {
                break;
            }
            v -= 1;
        }
    }
    if g >= 1 {
        rec(g, &mut Vec::with_capacity(s), s, g - 1, f);
    }
}

/// Backtracking fill of the symmetric adjacency matrix, row by row. Cell
/// `(u,u)` holds the loop count, `(u,v)` with `v > u` the bundle size. After
/// row `u` completes, the degree of `u` is final.
///
/// Pruning, all soundness-preserving:
/// * per-vertex degree caps from the handshake identity: since every other
///   vertex `w` needs degree at least `need_w`, no vertex may exceed
///   `2E - Σ_{w≠v} need_w`;
/// * stability and minimality under adjacent equal-genus transpositions,
///   checked as soon as a row completes;
/// * remaining degree needs versus twice the remaining edge budget;
/// * components of processed vertices with no link to an unprocessed vertex
///   can never become connected.
struct MatrixSearch<'a> {
    genera: &'a [u32],
    need: Vec<u32>,
    cap: Vec<i64>,
    total: u32,
    mat: Vec<Vec<u32>>,
    pdeg: Vec<u32>,
}

impl<'a> MatrixSearch<'a> {
    fn new(genera: &'a [u32], total: u32) -> Self {
        let s = genera.len();
        let need: Vec<u32> = genera
            .iter()
            .map(|&gv| {
                let stability = 3i64 - 2 * gv as i64;
                let connect = if s > 1 { 1 } else { 0 };
                stability.max(connect).max(0) as u32
            })
            .collect();
        let need_sum: i64 = need.iter().map(|&n| n as i64).sum();
        let cap: Vec<i64> = need
            .iter()
            .map(|&n| 2 * total as i64 - (need_sum - n as i64))
            .collect();
        MatrixSearch {
            genera,
            need,
            cap,
            total,
            mat: vec![vec![0u32; s]; s],
            pdeg: vec![0u32; s],
        }
    }

    fn run(&mut self, emit: &mut impl FnMut(&Vec<Vec<u32>>)) {
        if self.cap.iter().zip(&self.need).any(|(&c, &n)| c < n as i64) {
            return;
        }
        self.fill(0, 0, 0, emit);
    }

    fn fill(&mut self, row: usize, col_offset: usize, used: u32, emit: &mut impl FnMut(&Vec<Vec<u32>>)) {
        let s = self.genera.len();
        if row == s {
            if used == self.total {
                emit(&self.mat);
            }
            return;
        }
        let col = row + col_offset;
        if col == s {
            self.row_complete(row, used, emit);
            return;
        }
        let budget = self.total - used;
        let head = if col == row {
            // Loops add two to the degree of `row`.
            ((self.cap[row] - self.pdeg[row] as i64) / 2).min(budget as i64)
        } else {
            (self.cap[row] - self.pdeg[row] as i64)
                .min(self.cap[col] - self.pdeg[col] as i64)
                .min(budget as i64)
        };
        for value in 0..=head.max(0) as u32 {
            self.mat[row][col] = value;
            self.mat[col][row] = value;
            let delta = if col == row { 2 * value } else { value };
            self.pdeg[row] += delta;
            if col != row {
                self.pdeg[col] += value;
            }
            self.fill(row, col_offset + 1, used + value, emit);
            self.pdeg[row] -= delta;
            if col != row {
                self.pdeg[col] -= value;
            }
        }
        self.mat[row][col] = 0;
        self.mat[col][row] = 0;
    }

    fn row_complete(&mut self, row: usize, used: u32, emit: &mut impl FnMut(&Vec<Vec<u32>>)) {
        let s = self.genera.len();
        let deg = self.pdeg[row];
        if 2 * self.genera[row] as i64 - 2 + deg as i64 <= 0 {
            return;
        }
        if row > 0
            && self.genera[row - 1] == self.genera[row]
            && !transposition_minimal(&self.mat, row - 1)
        {
            return;
        }
        // Remaining degree needs must be coverable by the remaining edges:
        // each unused edge adds at most two to future degrees.
        let remaining = self.total - used;
        let mut want: i64 = 0;
        for v in row + 1..s {
            want += (self.need[v] as i64 - self.pdeg[v] as i64).max(0);
        }
        if want > 2 * remaining as i64 {
            return;
        }
        // Any fully processed component must already reach a future vertex;
        // edges added later join future vertices only. Final connectivity is
        // checked at the leaf.
        if row + 1 < s {
            let mut dsu = DisjointSets::new(s);
            for u in 0..=row {
                for v in u + 1..s {
                    if self.mat[u][v] > 0 {
                        dsu.union(u, v);
                    }
                }
            }
            let mut reaches_future = vec![false; s];
            for v in row + 1..s {
                let root = dsu.find(v);
                reaches_future[root] = true;
            }
            for u in 0..=row {
                let root = dsu.find(u);
                if !reaches_future[root] {
                    return;
                }
            }
        }
        self.fill(row + 1, 0, used, emit);
    }
}

/// Lexicographic minimality of the filled part of the matrix under swapping
/// vertices `u` and `u+1`; rows `0..=u+1` must be complete, which makes every
/// affected cell determined.
fn transposition_minimal(mat: &[Vec<u32>], u: usize) -> bool {
    let s = mat.len();
    let swap = |v: usize| -> usize {
        if v == u {
            u + 1
        } else if v == u + 1 {
            u
        } else {
            v
        }
    };
    for a in 0..s {
        for b in a..s {
            let (sa, sb) = (swap(a), swap(b));
            let swapped = mat[sa.min(sb)][sa.max(sb)];
            match mat[a][b].cmp(&swapped) {
                std::cmp::Ordering::Less => return true,
                std::cmp::Ordering::Greater => return false,
                std::cmp::Ordering::Equal => {}
            }
        }
    }
    true
}

fn matrix_connected(mat: &[Vec<u32>]) -> bool {
    let s = mat.len();
    let mut dsu = DisjointSets::new(s);
    for u in 0..s {
        for v in u + 1..s {
            if mat[u][v] > 0 {
                dsu.union(u, v);
            }
        }
    }
    (1..s).all(|v| dsu.find(v) == dsu.find(0))
}

struct DisjointSets {
    parent: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

/// A multigraph with vertex genera and sorted weight lists on loops and
/// bundles; the shared input of canonicalization for both plain graphs
/// (all weights 1) and weighted graphs.
struct Decorated {
    genera: Vec<u32>,
    loops: Vec<Vec<u32>>,
    bundles: BTreeMap<(usize, usize), Vec<u32>>,
}

const TOKEN_GENUS: u64 = 1 << 40;
const TOKEN_LOOPS: u64 = 2 << 40;
const TOKEN_BUNDLE: u64 = 3 << 40;

impl Decorated {
    fn from_edges(
        genera: &[u32],
        edges: &[(usize, usize)],
        weights: Option<&[u32]>,
    ) -> Self {
        let s = genera.len();
        let mut loops = vec![Vec::new(); s];
        let mut bundles: BTreeMap<(usize, usize), Vec<u32>> = BTreeMap::new();
        for (idx, &(a, b)) in edges.iter().enumerate() {
            let w = weights.map_or(1, |m| m[idx]);
            if a == b {
                loops[a].push(w);
            } else {
                bundles.entry((a.min(b), a.max(b))).or_default().push(w);
            }
        }
        for l in &mut loops {
            l.sort_unstable();
        }
        for b in bundles.values_mut() {
            b.sort_unstable();
        }
        Decorated { genera: genera.to_vec(), loops, bundles }
    }

    fn bundle(&self, a: usize, b: usize) -> &[u32] {
        static EMPTY: [u32; 0] = [];
        self.bundles
            .get(&(a.min(b), a.max(b)))
            .map_or(&EMPTY[..], |v| &v[..])
    }

    /// `Π_{u<v} (weight-class permutations of the bundle) · Π_v (weight-class
    /// permutations of the loops)·2^{l_v}`.
    fn edge_factor(&self) -> u128 {
        let mut factor: u128 = 1;
        for weights in self.bundles.values() {
            factor *= multiset_permutations(weights);
        }
        for l in &self.loops {
            factor *= multiset_permutations(l) << l.len();
        }
        factor
    }

    /// Canonical labeling search. Returns the canonical vertex order, the
    /// minimal serialized stream (the class key), and the number of vertex
    /// automorphisms (orderings attaining the minimum).
    fn search(&self) -> (Vec<usize>, Vec<u64>, u128) {
        let cells = self.refine(self.initial_partition());
        let mut best: Option<(Vec<u64>, Vec<usize>)> = None;
        let mut count: u128 = 0;
        self.search_rec(cells, &mut best, &mut count);
        let (stream, order) = best.expect("at least one ordering exists");
        (order, stream, count)
    }

    fn search_rec(
        &self,
        cells: Vec<Vec<usize>>,
        best: &mut Option<(Vec<u64>, Vec<usize>)>,
        count: &mut u128,
    ) {
        if let Some(pos) = cells.iter().position(|c| c.len() > 1) {
            for i in 0..cells[pos].len() {
                let mut next = Vec::with_capacity(cells.len() + 1);
                next.extend(cells[..pos].iter().cloned());
                next.push(vec![cells[pos][i]]);
                let mut rest = cells[pos].clone();
                rest.remove(i);
                next.push(rest);
                next.extend(cells[pos + 1..].iter().cloned());
                self.search_rec(self.refine(next), best, count);
            }
            return;
        }
        let order: Vec<usize> = cells.into_iter().map(|c| c[0]).collect();
        let stream = self.stream(&order);
        match best {
            Some((b, _)) => match stream.cmp(b) {
                std::cmp::Ordering::Less => {
                    *best = Some((stream, order));
                    *count = 1;
                }
                std::cmp::Ordering::Equal => *count += 1,
                std::cmp::Ordering::Greater => {}
            },
            None => {
                *best = Some((stream, order));
                *count = 1;
            }
        }
    }

    fn initial_partition(&self) -> Vec<Vec<usize>> {
        let mut groups: BTreeMap<(u32, u32, Vec<u32>), Vec<usize>> = BTreeMap::new();
        for v in 0..self.genera.len() {
            let degree: u32 = self
                .bundles
                .iter()
                .filter(|((a, b), _)| *a == v || *b == v)
                .map(|(_, w)| w.len() as u32)
                .sum::<u32>()
                + 2 * self.loops[v].len() as u32;
            groups
                .entry((self.genera[v], degree, self.loops[v].clone()))
                .or_default()
                .push(v);
        }
        groups.into_values().collect()
    }

    /// Split cells by the multiset of (cell-of-neighbor, bundle-weights)
    /// pairs until stable; subcells are ordered by signature.
    fn refine(&self, mut cells: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
        let n = self.genera.len();
        loop {
            let mut cell_of = vec![0usize; n];
            for (ci, cell) in cells.iter().enumerate() {
                for &v in cell {
                    cell_of[v] = ci;
                }
            }
            let signature = |v: usize| -> Vec<(usize, Vec<u32>)> {
                let mut sig: Vec<(usize, Vec<u32>)> = (0..n)
                    .filter(|&u| u != v)
                    .map(|u| (cell_of[u], self.bundle(v, u).to_vec()))
                    .collect();
                sig.sort();
                sig
            };
            let mut next: Vec<Vec<usize>> = Vec::with_capacity(cells.len());
            let mut split = false;
            for cell in &cells {
                if cell.len() == 1 {
                    next.push(cell.clone());
                    continue;
                }
                let mut by_sig: BTreeMap<Vec<(usize, Vec<u32>)>, Vec<usize>> = BTreeMap::new();
                for &v in cell {
                    by_sig.entry(signature(v)).or_default().push(v);
                }
                if by_sig.len() > 1 {
                    split = true;
                }
                next.extend(by_sig.into_values());
            }
            cells = next;
            if !split {
                return cells;
            }
        }
    }

    /// Serialized adjacency stream for a vertex ordering: per vertex its
    /// genus, sorted loop weights, and sorted bundle weights to every earlier
    /// vertex. Equal streams correspond exactly to vertex automorphisms.
    fn stream(&self, order: &[usize]) -> Vec<u64> {
        let mut out = Vec::new();
        for (i, &v) in order.iter().enumerate() {
            out.push(TOKEN_GENUS + self.genera[v] as u64);
            out.push(TOKEN_LOOPS);
            out.extend(self.loops[v].iter().map(|&w| w as u64));
            for &u in &order[..i] {
                out.push(TOKEN_BUNDLE);
                out.extend(self.bundle(v, u).iter().map(|&w| w as u64));
            }
        }
        out
    }

    /// Human-readable canonical string: the graph relabeled by the canonical
    /// order, rendered as genera plus a sorted weighted edge list.
    fn canonical_string(&self) -> String {
        let (order, _, _) = self.search();
        let mut new_label = vec![0usize; order.len()];
        for (pos, &v) in order.iter().enumerate() {
            new_label[v] = pos;
        }
        let genera: Vec<String> = order.iter().map(|&v| self.genera[v].to_string()).collect();
        let mut edges: Vec<(usize, usize, u32)> = Vec::new();
        for (v, l) in self.loops.iter().enumerate() {
            for &w in l {
                edges.push((new_label[v], new_label[v], w));
            }
        }
        for (&(a, b), weights) in &self.bundles {
            let (x, y) = (new_label[a].min(new_label[b]), new_label[a].max(new_label[b]));
            for &w in weights {
                edges.push((x, y, w));
            }
        }
        edges.sort_unstable();
        let edge_strs: Vec<String> = edges
            .iter()
            .map(|&(a, b, w)| {
                if w == 1 {
                    format!("{a}-{b}")
                } else {
                    format!("{a}-{b}x{w}")
                }
            })
            .collect();
        format!("g[{}] e[{}]", genera.join(","), edge_strs.join(","))
    }
}

/// Number of permutations of a sorted multiset preserving values:
/// the product of the factorials of the value multiplicities.
fn multiset_permutations(sorted: &[u32]) -> u128 {
    let mut factor: u128 = 1;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let run = (j - i) as u128;
        let mut f: u128 = 1;
        for t in 2..=run {
            f *= t;
        }
        factor *= f;
        i = j;
    }
    factor
}

/// `|Aut(Γ)|` as an arbitrary-precision integer, for exact measure formulas.
pub fn automorphism_count_bigint(graph: &StableGraph) -> BigInt {
    BigInt::from(graph.automorphism_count())
}

/// Sum of `s!/|vertex automorphisms|` over classes equals the number of
/// labeled stable graphs; exposed for the orbit-counting cross-check.
pub fn labeled_count_from_classes(classes: &[StableGraph]) -> BigInt {
    let mut total = BigInt::from(0u32);
    for graph in classes {
        let s = graph.num_vertices() as u64;
        let aut = BigInt::from(graph.vertex_automorphism_count());
        let fact = factorial(s);
        debug_assert_eq!(&fact % &aut, BigInt::from(0u32));
        total += fact / aut;
    }
    total
}
