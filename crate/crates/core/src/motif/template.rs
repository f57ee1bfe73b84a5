use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const MAX_TEMPLATE_VERTICES: usize = 8;

/// Bit of the unordered pair `{i, j}` in a pair mask (`k <= 8`).
#[inline]
pub fn pair_bit(i: usize, j: usize) -> u64 {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    1u64 << (a * MAX_TEMPLATE_VERTICES + b)
}

/// Named templates accepted by the configuration file.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Edge,
    Path3,
    Triangle,
    Path4,
    Cycle4,
    Clique4,
}

impl Preset {
    pub const ALL: [Preset; 6] =
        [Preset::Edge, Preset::Path3, Preset::Triangle, Preset::Path4, Preset::Cycle4, Preset::Clique4];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Edge => "edge",
            Preset::Path3 => "path3",
            Preset::Triangle => "triangle",
            Preset::Path4 => "path4",
            Preset::Cycle4 => "cycle4",
            Preset::Clique4 => "clique4",
        }
    }

    pub fn template(self) -> MotifTemplate {
        let (k, edges): (usize, &[(usize, usize)]) = match self {
            Preset::Edge => (2, &[(0, 1)]),
            Preset::Path3 => (3, &[(0, 1), (1, 2)]),
            Preset::Triangle => (3, &[(0, 1), (1, 2), (0, 2)]),
            Preset::Path4 => (4, &[(0, 1), (1, 2), (2, 3)]),
            Preset::Cycle4 => (4, &[(0, 1), (1, 2), (2, 3), (3, 0)]),
            Preset::Clique4 => (4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]),
        };
        let mut t = MotifTemplate::from_edges(k, edges).expect("presets are valid templates");
        t.name = self.name().to_string();
        t
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidTemplate(format!("unknown preset `{s}`")))
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A connected template graph `H` on `k <= 8` vertices.
#[derive(Clone, Debug)]
pub struct MotifTemplate {
    name: String,
    k: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<bool>>,
    diam: usize,
    aut: u64,
    a_h: u64,
    copy_masks: Vec<u64>,
    automorphisms: Vec<Vec<usize>>,
    slot_order: Vec<usize>,
    slot_parent: Vec<usize>,
    order_constraints: Vec<(usize, usize)>,
}

impl MotifTemplate {
    /// Builds a template from an edge list. Automorphisms are found by
    /// checking all `k!` vertex permutations.
    pub fn from_edges(k: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if k > MAX_TEMPLATE_VERTICES {
            return Err(Error::TemplateTooLarge(k));
        }
        if k < 2 {
            return Err(Error::InvalidTemplate(format!("need at least 2 vertices, got {k}")));
        }
        let mut adjacency = vec![vec![false; k]; k];
        for &(u, v) in edges {
            if u >= k || v >= k {
                return Err(Error::InvalidTemplate(format!("edge ({u},{v}) out of range for k={k}")));
            }
            if u == v {
                return Err(Error::InvalidTemplate(format!("self-loop at vertex {u}")));
            }
            adjacency[u][v] = true;
            adjacency[v][u] = true;
        }
        let mut edge_list: Vec<(usize, usize)> =
            (0..k).flat_map(|u| (u + 1..k).map(move |v| (u, v))).filter(|&(u, v)| adjacency[u][v]).collect();
        edge_list.sort_unstable();

        let dist = all_pairs_hops(&adjacency);
        if dist[0].iter().any(Option::is_none) {
            return Err(Error::InvalidTemplate("template graph must be connected".into()));
        }
        let diam = dist.iter().flatten().map(|d| d.unwrap()).max().unwrap_or(0);

        let h_mask: u64 = edge_list.iter().map(|&(u, v)| pair_bit(u, v)).fold(0, |a, b| a | b);
        let mut automorphisms = Vec::new();
        let mut masks = Vec::new();
        for_each_permutation(k, |perm| {
            let m = edge_list.iter().map(|&(u, v)| pair_bit(perm[u], perm[v])).fold(0, |a, b| a | b);
            if m == h_mask {
                automorphisms.push(perm.to_vec());
            }
            masks.push(m);
        });
        masks.sort_unstable();
        masks.dedup();
        let aut = automorphisms.len() as u64;
        let a_h = masks.len() as u64;
        debug_assert_eq!(aut * a_h, factorial(k));

        let (slot_order, slot_parent) = bfs_slots(&adjacency);
        let order_constraints = symmetry_breaking(&automorphisms, &slot_order);

        Ok(Self {
            name: format!("k{k}:{edge_list:?}"),
            k,
            edges: edge_list,
            adjacency,
            diam,
            aut,
            a_h,
            copy_masks: masks,
            automorphisms,
            slot_order,
            slot_parent,
            order_constraints,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u][v]
    }

    /// Longest shortest path in `H`.
    pub fn diam(&self) -> usize {
        self.diam
    }

    /// `|Aut(H)|`.
    pub fn aut(&self) -> u64 {
        self.aut
    }

    /// Number of copies of `H` in the complete graph `K_k`; equals `k!/aut`.
    pub fn a_h(&self) -> u64 {
        self.a_h
    }

    pub fn automorphisms(&self) -> &[Vec<usize>] {
        &self.automorphisms
    }

    pub fn is_clique(&self) -> bool {
        self.edges.len() == self.k * (self.k - 1) / 2
    }

    /// Pair masks (see [`pair_bit`]) of the `a_H` copies of `H` in `K_k`.
    pub fn copy_masks(&self) -> &[u64] {
        &self.copy_masks
    }

    /// Number of `H`-subgraphs of a graph on vertices `0..k` given by its
    /// pair mask.
    #[inline]
    pub fn copies_in_mask(&self, graph_mask: u64) -> u64 {
        self.copy_masks.iter().filter(|&&m| m & graph_mask == m).count() as u64
    }

    /// Vertex visiting order for the backtracking search: BFS from a
    /// maximum-degree root.
    pub fn slot_order(&self) -> &[usize] {
        &self.slot_order
    }

    /// For each slot position `s > 0`, the position of its BFS parent.
    pub fn slot_parent(&self) -> &[usize] {
        &self.slot_parent
    }

    /// Constraints `(a, b)` meaning `φ(a) < φ(b)` that select exactly one
    /// embedding per automorphism class.
    pub fn order_constraints(&self) -> &[(usize, usize)] {
        &self.order_constraints
    }
}

pub fn factorial(k: usize) -> u64 {
    (1..=k as u64).product()
}

fn all_pairs_hops(adj: &[Vec<bool>]) -> Vec<Vec<Option<usize>>> {
    let k = adj.len();
    (0..k)
        .map(|s| {
            let mut dist = vec![None; k];
            dist[s] = Some(0);
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for v in 0..k {
                    if adj[u][v] && dist[v].is_none() {
                        dist[v] = Some(dist[u].unwrap() + 1);
                        queue.push_back(v);
                    }
                }
            }
            dist
        })
        .collect()
}

fn bfs_slots(adj: &[Vec<bool>]) -> (Vec<usize>, Vec<usize>) {
    let k = adj.len();
    let degree = |v: usize| adj[v].iter().filter(|&&b| b).count();
    let root = (0..k).max_by_key(|&v| (degree(v), std::cmp::Reverse(v))).unwrap();
    let mut order = vec![root];
    let mut parent = vec![0];
    let mut seen = vec![false; k];
    seen[root] = true;
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        for v in 0..k {
            if adj[u][v] && !seen[v] {
                seen[v] = true;
                order.push(v);
                parent.push(head);
            }
        }
        head += 1;
    }
    (order, parent)
}

/// Orbit/stabiliser chain along `order`: whenever the current group moves
/// vertex `v`, require `φ(v) < φ(w)` for every other `w` in its orbit and
/// pass to the stabiliser of `v`.
fn symmetry_breaking(automorphisms: &[Vec<usize>], order: &[usize]) -> Vec<(usize, usize)> {
    let mut group: Vec<&Vec<usize>> = automorphisms.iter().collect();
    let mut constraints = Vec::new();
    for &v in order {
        let mut orbit: Vec<usize> = group.iter().map(|g| g[v]).collect();
        orbit.sort_unstable();
        orbit.dedup();
        for &w in &orbit {
            if w != v {
                constraints.push((v, w));
            }
        }
        group.retain(|g| g[v] == v);
        if group.len() == 1 {
            break;
        }
    }
    constraints
}

/// Heap's algorithm.
fn for_each_permutation(k: usize, mut f: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..k).collect();
    let mut c = vec![0usize; k];
    f(&perm);
    let mut i = 0;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            f(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}
