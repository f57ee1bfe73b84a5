use std::io::Write;

use super::template::{pair_bit, MotifTemplate};
use crate::bounds::c_d_subgraph;
use crate::error::{Error, Result};
use crate::geograph::{ConnectionSet, GeoGraph};
use crate::ppp::PointSet;

/// Point-count guard for [`brute_force_count`].
pub const BRUTE_FORCE_LIMIT: usize = 60;

/// Copies of `H` in a graph, in total and per vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CopyCensus {
    k: usize,
    total: u64,
    per_vertex: Vec<u64>,
}

impl CopyCensus {
    pub fn new(k: usize, total: u64, per_vertex: Vec<u64>) -> Self {
        Self { k, total, per_vertex }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Copies containing each vertex.
    pub fn per_vertex(&self) -> &[u64] {
        &self.per_vertex
    }

    /// `F(x, ξ) = copies(x)/k`.
    pub fn local(&self, x: usize) -> f64 {
        self.per_vertex[x] as f64 / self.k as f64
    }

    /// `Σ_x copies(x)² `, the exact numerator of `Σ_x F(x,ξ)²` over `k²`.
    pub fn sum_squares(&self) -> u128 {
        self.per_vertex.iter().map(|&c| c as u128 * c as u128).sum()
    }

    /// `Σ_x copies(x) == k · total`.
    pub fn is_consistent(&self) -> bool {
        self.per_vertex.iter().map(|&c| c as u128).sum::<u128>() == self.k as u128 * self.total as u128
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "vertex,copies")?;
        for (v, c) in self.per_vertex.iter().enumerate() {
            writeln!(out, "{v},{c}")?;
        }
        Ok(())
    }
}

/// Outcome of checking `Σ_x F(x,ξ)² ≤ c_d F(ξ)^{(2k-1)/k}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

struct Plan {
    order: Vec<usize>,
    parent: Vec<usize>,
    /// Earlier slots (other than the parent) that must be adjacent.
    adjacent_to: Vec<Vec<usize>>,
    /// Earlier slots whose image must be smaller than this slot's image.
    above: Vec<Vec<usize>>,
    /// Earlier slots whose image must be larger than this slot's image.
    below: Vec<Vec<usize>>,
}

impl Plan {
    fn new(h: &MotifTemplate, break_symmetry: bool) -> Self {
        let k = h.k();
        let order = h.slot_order().to_vec();
        let parent = h.slot_parent().to_vec();
        let mut pos = vec![0; k];
        for (s, &v) in order.iter().enumerate() {
            pos[v] = s;
        }
        let adjacent_to = (0..k)
            .map(|s| (0..s).filter(|&j| (s == 0 || j != parent[s]) && h.has_edge(order[s], order[j])).collect())
            .collect();
        let mut above = vec![Vec::new(); k];
        let mut below = vec![Vec::new(); k];
        if break_symmetry {
            for &(a, b) in h.order_constraints() {
                let (sa, sb) = (pos[a], pos[b]);
                if sa < sb {
                    above[sb].push(sa);
                } else {
                    below[sa].push(sb);
                }
            }
        }
        Self { order, parent, adjacent_to, above, below }
    }
}

struct Search<'g, 'p> {
    graph: &'g GeoGraph<'p>,
    plan: Plan,
    phi: Vec<usize>,
    total: u64,
    per_vertex: Vec<u64>,
}

impl<'g, 'p> Search<'g, 'p> {
    fn extend(&mut self, s: usize) {
        let k = self.plan.order.len();
        if s == k {
            self.total += 1;
            for &v in &self.phi {
                self.per_vertex[v] += 1;
            }
            return;
        }
        let lo = self.plan.above[s].iter().map(|&j| self.phi[j]).max();
        let hi = self.plan.below[s].iter().map(|&j| self.phi[j]).min();
        let graph = self.graph;
        let candidates = graph.neighbors(self.phi[self.plan.parent[s]]);
        let start = lo.map_or(0, |lo| candidates.partition_point(|&c| c <= lo));
        let end = hi.map_or(candidates.len(), |hi| candidates.partition_point(|&c| c < hi));
        for &c in &candidates[start..end.max(start)] {
            if self.phi[..s].contains(&c) {
                continue;
            }
            if !self.plan.adjacent_to[s].iter().all(|&j| graph.is_adjacent(self.phi[j], c)) {
                continue;
            }
            self.phi[s] = c;
            self.extend(s + 1);
        }
    }

    fn run(graph: &'g GeoGraph<'p>, h: &MotifTemplate, break_symmetry: bool) -> (u64, Vec<u64>) {
        let n = graph.vertex_count();
        let mut search =
            Search { graph, plan: Plan::new(h, break_symmetry), phi: vec![0; h.k()], total: 0, per_vertex: vec![0; n] };
        for root in 0..n {
            search.phi[0] = root;
            search.extend(1);
        }
        (search.total, search.per_vertex)
    }
}

/// Non-induced copies of `H` in `g`.
///
/// Backtracks over template slots in BFS order, drawing candidates for each
/// slot from the neighbours of its parent's image. Ordering constraints from
/// the automorphism group admit exactly one embedding per copy, so the
/// result equals the embedding count divided by `aut(H)`.
pub fn count(g: &GeoGraph<'_>, h: &MotifTemplate) -> CopyCensus {
    let (total, per_vertex) = Search::run(g, h, true);
    CopyCensus::new(h.k(), total, per_vertex)
}

/// Number of injective edge-preserving maps `V(H) → V(g)`.
pub fn count_embeddings(g: &GeoGraph<'_>, h: &MotifTemplate) -> u64 {
    Search::run(g, h, false).0
}

/// Reference count by scanning every `k`-subset of the points. Refuses more
/// than [`BRUTE_FORCE_LIMIT`] points.
pub fn brute_force_count(points: &PointSet, s: &ConnectionSet, h: &MotifTemplate) -> Result<CopyCensus> {
    let n = points.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::OracleTooLarge(n));
    }
    let k = h.k();
    let mut per_vertex = vec![0u64; n];
    let mut total = 0u64;
    if n >= k {
        let mut subset: Vec<usize> = (0..k).collect();
        loop {
            let copies = h.copies_in_mask(pair_mask(points, s, &subset));
            if copies > 0 {
                total += copies;
                for &v in &subset {
                    per_vertex[v] += copies;
                }
            }
            if !next_combination(&mut subset, n) {
                break;
            }
        }
    }
    Ok(CopyCensus::new(k, total, per_vertex))
}

/// Pair mask of the geometric graph induced on `subset` (local labels
/// `0..subset.len()`).
pub fn pair_mask(points: &PointSet, s: &ConnectionSet, subset: &[usize]) -> u64 {
    let mut mask = 0;
    for a in 0..subset.len() {
        for b in a + 1..subset.len() {
            if s.connects_unchecked(points.point(subset[a]), points.point(subset[b])) {
                mask |= pair_bit(a, b);
            }
        }
    }
    mask
}

/// Lexicographic successor of a sorted `k`-subset of `0..n`.
pub(crate) fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let Some(i) = (0..k).rev().find(|&i| c[i] < n - k + i) else {
        return false;
    };
    c[i] += 1;
    for j in i + 1..k {
        c[j] = c[j - 1] + 1;
    }
    true
}

/// Evaluates `Σ_x F(x,ξ)² ≤ c_d F(ξ)^{(2k-1)/k}` for a census of `H` on a
/// graph with eccentricity `theta` in dimension `d`.
pub fn check_condition(census: &CopyCensus, h: &MotifTemplate, d: usize, theta: f64) -> ConditionCheck {
    let k = census.k() as f64;
    let lhs = census.sum_squares() as f64 / (k * k);
    let rhs = c_d_subgraph(h, d, theta) * (census.total() as f64).powf((2.0 * k - 1.0) / k);
    ConditionCheck { lhs, rhs, holds: lhs <= rhs }
}
