//! Inversion graphs, their orientations and chromatic polynomials.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::diagram::{rook_numbers, sw_diagram};
use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::poly::IntPolynomial;

/// Simple graph on vertices `1..=n` stored as neighbour bitmasks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InversionGraph {
    n: usize,
    adj: Vec<u32>,
    source: Option<Permutation>,
}

/// Largest vertex count handled by the bitmask representation.
pub const MAX_VERTICES: usize = 32;

/// Orientation enumeration is only attempted up to this many edges.
pub const DIRECT_ORIENTATION_EDGE_CAP: usize = 20;

pub fn inversion_graph(w: &Permutation) -> InversionGraph {
    let n = w.len();
    let mut adj = vec![0u32; n];
    for i in 1..=n {
        for j in i + 1..=n {
            if w.value(i) > w.value(j) {
                adj[i - 1] |= 1 << (j - 1);
                adj[j - 1] |= 1 << (i - 1);
            }
        }
    }
    InversionGraph {
        n,
        adj,
        source: Some(w.clone()),
    }
}

impl InversionGraph {
    /// A graph given by its edge list, with no source permutation attached.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n > MAX_VERTICES {
            return Err(Error::InvalidBoard(format!("{n} vertices exceeds {MAX_VERTICES}")));
        }
        let mut adj = vec![0u32; n];
        for &(a, b) in edges {
            if a == b || a == 0 || b == 0 || a > n || b > n {
                return Err(Error::IndexOutOfRange { index: a.max(b), len: n });
            }
            adj[a - 1] |= 1 << (b - 1);
            adj[b - 1] |= 1 << (a - 1);
        }
        Ok(InversionGraph { n, adj, source: None })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn source(&self) -> Option<&Permutation> {
        self.source.as_ref()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a - 1] >> (b - 1) & 1 == 1
    }

    pub fn neighbours(&self, v: usize) -> u32 {
        self.adj[v - 1]
    }

    /// Edges `(a, b)` with `a < b` in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 1..=self.n {
            for b in a + 1..=self.n {
                if self.has_edge(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|m| m.count_ones() as usize).sum::<usize>() / 2
    }

    pub fn complement(&self) -> InversionGraph {
        let full = if self.n == 32 { u32::MAX } else { (1u32 << self.n) - 1 };
        let adj = (0..self.n).map(|v| !self.adj[v] & full & !(1 << v)).collect();
        InversionGraph {
            n: self.n,
            adj,
            source: None,
        }
    }

    /// For `a < b < c`: edges `ab` and `bc` force `ac`.
    pub fn is_transitive(&self) -> bool {
        for b in 1..=self.n {
            for a in 1..b {
                for c in b + 1..=self.n {
                    if self.has_edge(a, b) && self.has_edge(b, c) && !self.has_edge(a, c) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// For `a < b < c`: edge `ac` forces `ab` or `bc`.
    pub fn has_betweenness(&self) -> bool {
        for b in 1..=self.n {
            for a in 1..b {
                for c in b + 1..=self.n {
                    if self.has_edge(a, c) && !self.has_edge(a, b) && !self.has_edge(b, c) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// From the smaller vertex to the larger one.
    Right,
    Left,
}

/// One direction per edge, aligned with `graph.edges()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orientation {
    pub graph: InversionGraph,
    pub direction: Vec<Direction>,
}

impl Orientation {
    pub fn new(graph: InversionGraph, direction: Vec<Direction>) -> Result<Self> {
        let m = graph.edge_count();
        if direction.len() != m {
            return Err(Error::SizeMismatch {
                left: direction.len(),
                right: m,
            });
        }
        Ok(Orientation { graph, direction })
    }

    pub fn all_right(graph: &InversionGraph) -> Self {
        let m = graph.edge_count();
        Orientation {
            graph: graph.clone(),
            direction: vec![Direction::Right; m],
        }
    }

    /// Orientation whose `k`-th edge points right iff bit `k` of `bits` is set.
    pub fn from_bits(graph: &InversionGraph, bits: u64) -> Self {
        let m = graph.edge_count();
        let direction = (0..m)
            .map(|k| if bits >> k & 1 == 1 { Direction::Right } else { Direction::Left })
            .collect();
        Orientation {
            graph: graph.clone(),
            direction,
        }
    }

    /// Out-neighbour masks.
    pub fn out_masks(&self) -> Vec<u32> {
        let mut out = vec![0u32; self.graph.n()];
        for (&(a, b), d) in self.graph.edges().iter().zip(&self.direction) {
            match d {
                Direction::Right => out[a - 1] |= 1 << (b - 1),
                Direction::Left => out[b - 1] |= 1 << (a - 1),
            }
        }
        out
    }

    /// Acyclicity by repeatedly peeling off sinks.
    pub fn is_acyclic(&self) -> bool {
        is_acyclic_masks(&self.out_masks())
    }
}

fn is_acyclic_masks(out: &[u32]) -> bool {
    let n = out.len();
    let mut alive: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    loop {
        if alive == 0 {
            return true;
        }
        let mut peeled = false;
        let mut rest = alive;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if out[v] & alive == 0 {
                alive &= !(1 << v);
                peeled = true;
            }
        }
        if !peeled {
            return false;
        }
    }
}

/// Acyclicity of an orientation of an inversion graph, read off from the
/// absence of directed triangles and of directed 4-cycles whose edges
/// alternate between right and left.
pub fn acyclicity_by_small_cycles(o: &Orientation) -> Result<bool> {
    if !o.graph.is_transitive() {
        return Err(Error::NotAnInversionGraph);
    }
    let out = o.out_masks();
    let n = o.graph.n();
    let arc = |a: usize, b: usize| out[a] >> b & 1 == 1;
    for a in 0..n {
        for b in 0..n {
            if !arc(a, b) {
                continue;
            }
            for c in 0..n {
                if !arc(b, c) {
                    continue;
                }
                if arc(c, a) {
                    return Ok(false);
                }
                // a -> b -> c -> d -> a with directions alternating
                let alternating_first = (a < b) != (b < c);
                if !alternating_first {
                    continue;
                }
                for d in 0..n {
                    if arc(c, d) && arc(d, a) && (b < c) != (c < d) && (c < d) != (d < a) {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Basis {
    Monomial,
    FallingFactorial,
}

type Memo = Mutex<HashMap<Vec<u32>, IntPolynomial>>;

fn memo() -> &'static Memo {
    static MEMO: OnceLock<Memo> = OnceLock::new();
    MEMO.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Relabels vertices by (degree, sorted neighbour degrees). Equal keys mean
/// equal graphs after relabelling, hence equal chromatic polynomials.
fn graph_key(adj: &[u32]) -> Vec<u32> {
    let n = adj.len();
    let deg: Vec<u32> = adj.iter().map(|m| m.count_ones()).collect();
    let sig: Vec<(u32, Vec<u32>)> = (0..n)
        .map(|v| {
            let mut nd: Vec<u32> = (0..n).filter(|&u| adj[v] >> u & 1 == 1).map(|u| deg[u]).collect();
            nd.sort_unstable();
            (deg[v], nd)
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sig[a].cmp(&sig[b]).then(a.cmp(&b)));
    let mut pos = vec![0usize; n];
    for (k, &v) in order.iter().enumerate() {
        pos[v] = k;
    }
    order
        .iter()
        .map(|&v| {
            let mut m = 0u32;
            for u in 0..n {
                if adj[v] >> u & 1 == 1 {
                    m |= 1 << pos[u];
                }
            }
            m
        })
        .collect()
}

fn remove_vertex(adj: &[u32], v: usize) -> Vec<u32> {
    let low = (1u32 << v) - 1;
    adj.iter()
        .enumerate()
        .filter(|&(u, _)| u != v)
        .map(|(_, &m)| (m & low) | ((m >> 1) & !low))
        .collect()
}

fn chromatic_dc(adj: &[u32]) -> IntPolynomial {
    let n = adj.len();
    let edges: u32 = adj.iter().map(|m| m.count_ones()).sum::<u32>() / 2;
    if edges == 0 {
        return IntPolynomial::monomial(1, n);
    }
    if edges as usize == n * (n - 1) / 2 {
        return IntPolynomial::falling_factorial(n);
    }
    if let Some(v) = (0..n).find(|&v| adj[v] == 0) {
        return chromatic_dc(&remove_vertex(adj, v)).shift(1);
    }
    let key = graph_key(adj);
    if let Some(p) = memo().lock().expect("memo lock").get(&key) {
        return p.clone();
    }
    // Split on an edge at a vertex of maximum degree.
    let u = (0..n).max_by_key(|&v| adj[v].count_ones()).expect("nonempty");
    let v = adj[u].trailing_zeros() as usize;
    let mut deleted = adj.to_vec();
    deleted[u] &= !(1 << v);
    deleted[v] &= !(1 << u);
    let mut merged = deleted.clone();
    let nv = merged[v];
    merged[u] |= nv;
    for x in 0..n {
        if nv >> x & 1 == 1 {
            merged[x] |= 1 << u;
        }
    }
    let contracted = remove_vertex(&merged, v);
    let result = &chromatic_dc(&deleted) - &chromatic_dc(&contracted);
    memo().lock().expect("memo lock").insert(key, result.clone());
    result
}

/// `sum_i r_{n-i}(O_w) t(t-1)...(t-i+1)`.
pub fn chromatic_by_rooks(w: &Permutation) -> IntPolynomial {
    let n = w.len();
    let r = rook_numbers(&sw_diagram(w));
    (0..=n).fold(IntPolynomial::zero(), |acc, i| {
        let c = i64::try_from(r.get(n - i)).expect("rook number fits");
        acc + IntPolynomial::falling_factorial(i) * IntPolynomial::new(vec![c])
    })
}

/// Chromatic polynomial in the monomial basis. The falling-factorial route
/// needs the source permutation and is checked against deletion-contraction.
pub fn chromatic_polynomial(g: &InversionGraph, basis: Basis) -> Result<IntPolynomial> {
    let dc = chromatic_dc(&g.adj);
    match basis {
        Basis::Monomial => Ok(dc),
        Basis::FallingFactorial => {
            let w = g.source().ok_or(Error::NotFromPermutation)?;
            let ff = chromatic_by_rooks(w);
            assert_eq!(ff, dc, "chromatic routes disagree for {w}");
            Ok(ff)
        }
    }
}

/// Counts acyclic orientations of `g` by direct enumeration.
pub fn count_acyclic_by_enumeration(g: &InversionGraph) -> u128 {
    let edges = g.edges();
    let n = g.n();
    let mut count = 0u128;
    let mut out = vec![0u32; n];
    for bits in 0u64..1 << edges.len() {
        out.iter_mut().for_each(|m| *m = 0);
        for (k, &(a, b)) in edges.iter().enumerate() {
            if bits >> k & 1 == 1 {
                out[a - 1] |= 1 << (b - 1);
            } else {
                out[b - 1] |= 1 << (a - 1);
            }
        }
        if is_acyclic_masks(&out) {
            count += 1;
        }
    }
    count
}

/// `(-1)^n chi(-1)`, cross-checked by enumeration when the graph is small.
pub fn count_acyclic_orientations(g: &InversionGraph) -> u128 {
    let chi = chromatic_dc(&g.adj);
    let signed = chi.eval(-1) * if g.n() % 2 == 0 { 1 } else { -1 };
    let ao = u128::try_from(signed).expect("acyclic orientation count is nonnegative");
    if g.edge_count() <= DIRECT_ORIENTATION_EDGE_CAP {
        assert_eq!(ao, count_acyclic_by_enumeration(g), "acyclic orientation routes disagree");
    }
    ao
}

/// Counts without the enumeration cross-check.
pub fn count_acyclic_orientations_fast(g: &InversionGraph) -> u128 {
    let chi = chromatic_dc(&g.adj);
    let signed = chi.eval(-1) * if g.n() % 2 == 0 { 1 } else { -1 };
    u128::try_from(signed).expect("acyclic orientation count is nonnegative")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpinePartitionCounts {
    /// `spines_by_edges[k]`: k-edge spanning subgraphs of the complement in
    /// which every vertex has at most one smaller and one larger neighbour.
    pub spines_by_edges: Vec<u128>,
    /// `partitions_by_blocks[i]`: partitions of `[n]` into `i` independent
    /// sets; index 0 is always 0 for `n >= 1`.
    pub partitions_by_blocks: Vec<u128>,
}

pub fn spine_partition_counts(w: &Permutation) -> SpinePartitionCounts {
    let g = inversion_graph(w);
    let n = g.n();
    let non_edges = g.complement().edges();
    let mut spines = vec![0u128; n];
    count_spines(&non_edges, 0, 0, 0, 0, &mut spines);
    let mut parts = vec![0u128; n + 1];
    let mut blocks: Vec<u32> = Vec::new();
    count_partitions(&g, 1, &mut blocks, &mut parts);
    SpinePartitionCounts {
        spines_by_edges: spines,
        partitions_by_blocks: parts,
    }
}

fn count_spines(
    edges: &[(usize, usize)],
    idx: usize,
    has_larger: u32,
    has_smaller: u32,
    chosen: usize,
    out: &mut [u128],
) {
    if idx == edges.len() {
        out[chosen] += 1;
        return;
    }
    count_spines(edges, idx + 1, has_larger, has_smaller, chosen, out);
    let (a, b) = edges[idx];
    let (ba, bb) = (1u32 << (a - 1), 1u32 << (b - 1));
    if has_larger & ba == 0 && has_smaller & bb == 0 {
        count_spines(edges, idx + 1, has_larger | ba, has_smaller | bb, chosen + 1, out);
    }
}

fn count_partitions(g: &InversionGraph, v: usize, blocks: &mut Vec<u32>, out: &mut [u128]) {
    if v > g.n() {
        out[blocks.len()] += 1;
        return;
    }
    let bit = 1u32 << (v - 1);
    for k in 0..blocks.len() {
        if blocks[k] & g.neighbours(v) == 0 {
            blocks[k] |= bit;
            count_partitions(g, v + 1, blocks, out);
            blocks[k] &= !bit;
        }
    }
    blocks.push(bit);
    count_partitions(g, v + 1, blocks, out);
    blocks.pop();
}

/// Chordality by repeatedly removing simplicial vertices.
pub fn is_chordal(g: &InversionGraph) -> bool {
    let n = g.n();
    let mut alive: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    while alive != 0 {
        let simplicial = (0..n).filter(|&v| alive >> v & 1 == 1).find(|&v| {
            let nb = g.adj[v] & alive;
            (0..n)
                .filter(|&u| nb >> u & 1 == 1)
                .all(|u| nb & !(1 << u) & !g.adj[u] == 0)
        });
        match simplicial {
            Some(v) => alive &= !(1 << v),
            None => return false,
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::rp_avoiding;
    use crate::perm::parse;

    fn p(s: &str) -> Permutation {
        parse(s).unwrap()
    }

    /// Proper colourings with `t` colours by brute force.
    fn colourings(g: &InversionGraph, t: usize) -> i128 {
        let n = g.n();
        let mut col = vec![0usize; n];
        let mut count = 0;
        loop {
            if g.edges().iter().all(|&(a, b)| col[a - 1] != col[b - 1]) {
                count += 1;
            }
            let mut k = 0;
            loop {
                if k == n {
                    return count;
                }
                col[k] += 1;
                if col[k] < t {
                    break;
                }
                col[k] = 0;
                k += 1;
            }
        }
    }

    #[test]
    fn graph_examples() {
        assert_eq!(inversion_graph(&p("3412")).edges(), vec![(1, 3), (1, 4), (2, 3), (2, 4)]);
        assert_eq!(inversion_graph(&Permutation::identity(4)).edge_count(), 0);
        assert_eq!(inversion_graph(&Permutation::reverse_identity(5)).edge_count(), 10);
    }

    #[test]
    fn chromatic_examples() {
        let g = inversion_graph(&p("3412"));
        let chi = chromatic_polynomial(&g, Basis::Monomial).unwrap();
        assert_eq!(chi.coeffs(), &[0, -3, 6, -4, 1]);
        assert_eq!(chromatic_polynomial(&g, Basis::FallingFactorial).unwrap(), chi);
        let id = inversion_graph(&Permutation::identity(4));
        assert_eq!(chromatic_polynomial(&id, Basis::Monomial).unwrap(), IntPolynomial::monomial(1, 4));
        let tree = chromatic_polynomial(&inversion_graph(&p("3142")), Basis::Monomial).unwrap();
        let t_minus_1 = IntPolynomial::new(vec![-1, 1]);
        let expected = IntPolynomial::monomial(1, 1) * t_minus_1.clone() * t_minus_1.clone() * t_minus_1;
        assert_eq!(tree, expected);
        let bare = InversionGraph::from_edges(2, &[(1, 2)]).unwrap();
        assert_eq!(chromatic_polynomial(&bare, Basis::FallingFactorial), Err(Error::NotFromPermutation));
    }

    #[test]
    fn chromatic_matches_colouring_oracle() {
        for n in 1..=5 {
            for w in Permutation::all(n) {
                let g = inversion_graph(&w);
                let chi = chromatic_polynomial(&g, Basis::FallingFactorial).unwrap();
                for t in 1..5 {
                    assert_eq!(chi.eval(t as i128), colourings(&g, t), "{w} t={t}");
                }
            }
        }
    }

    #[test]
    fn acyclic_examples() {
        assert_eq!(count_acyclic_orientations(&inversion_graph(&p("3412"))), 14);
        assert_eq!(count_acyclic_orientations(&inversion_graph(&Permutation::identity(3))), 1);
        assert_eq!(count_acyclic_orientations(&inversion_graph(&p("3142"))), 8);
    }

    #[test]
    fn alternating_cycle_detected() {
        let g = inversion_graph(&p("3412"));
        // edges (1,3),(1,4),(2,3),(2,4): 1->3, 4->1, 3->2, 2->4
        let o = Orientation::new(g.clone(), vec![Direction::Right, Direction::Left, Direction::Left, Direction::Right]).unwrap();
        assert!(!o.is_acyclic());
        assert_eq!(acyclicity_by_small_cycles(&o), Ok(false));
        let all = Orientation::all_right(&g);
        assert_eq!(acyclicity_by_small_cycles(&all), Ok(true));
        let path = InversionGraph::from_edges(3, &[(1, 2), (2, 3)]).unwrap();
        assert_eq!(acyclicity_by_small_cycles(&Orientation::all_right(&path)), Err(Error::NotAnInversionGraph));
    }

    #[test]
    fn small_cycle_criterion_matches_dfs() {
        for n in 1..=5 {
            for w in Permutation::all(n) {
                let g = inversion_graph(&w);
                for bits in 0u64..1 << g.edge_count() {
                    let o = Orientation::from_bits(&g, bits);
                    assert_eq!(acyclicity_by_small_cycles(&o).unwrap(), o.is_acyclic(), "{w} {bits}");
                }
            }
        }
    }

    #[test]
    fn transitivity_laws() {
        for n in 1..=7 {
            for w in Permutation::all(n) {
                let g = inversion_graph(&w);
                assert!(g.is_transitive() && g.has_betweenness(), "{w}");
            }
        }
    }

    #[test]
    fn spine_examples() {
        let c = spine_partition_counts(&p("3412"));
        assert_eq!(c.partitions_by_blocks[4], 1);
        assert_eq!(c.partitions_by_blocks[3], 2);
        let c = spine_partition_counts(&p("341265"));
        assert!(c.spines_by_edges[3] > 0);
        assert_eq!(c.spines_by_edges[3], c.partitions_by_blocks[3]);
    }

    #[test]
    fn spines_partitions_and_rooks_agree() {
        for n in 1..=5 {
            for w in Permutation::all(n) {
                let c = spine_partition_counts(&w);
                let r = rook_numbers(&sw_diagram(&w));
                for k in 0..n {
                    assert_eq!(c.spines_by_edges[k], r.get(k), "{w}");
                    assert_eq!(c.partitions_by_blocks[n - k], r.get(k), "{w}");
                }
            }
        }
    }

    #[test]
    fn acyclic_matches_rook_placements() {
        for n in 1..=6 {
            for w in Permutation::all(n) {
                let g = inversion_graph(&w);
                assert_eq!(count_acyclic_orientations(&g), rp_avoiding(&sw_diagram(&w)), "{w}");
            }
        }
    }

    #[test]
    fn chordal_iff_avoids_3412() {
        let pat = p("3412");
        for n in 1..=6 {
            for w in Permutation::all(n) {
                assert_eq!(is_chordal(&inversion_graph(&w)), !w.contains_pattern(&pat).unwrap_or(false), "{w}");
            }
        }
        let c4 = InversionGraph::from_edges(4, &[(1, 2), (2, 3), (3, 4), (1, 4)]).unwrap();
        assert!(!is_chordal(&c4));
    }

    #[test]
    fn memo_key_respects_isomorphism() {
        let a = InversionGraph::from_edges(4, &[(1, 2), (2, 3)]).unwrap();
        let b = InversionGraph::from_edges(4, &[(3, 4), (4, 1)]).unwrap();
        assert_eq!(chromatic_polynomial(&a, Basis::Monomial), chromatic_polynomial(&b, Basis::Monomial));
    }
}
