use std::collections::HashMap;
use std::io::Write;

use super::connection::ConnectionSet;
use crate::error::{Error, Result};
use crate::ppp::PointSet;

/// Uniform grid with cell side `θρ`, keyed by integer cell coordinates.
#[derive(Clone, Debug)]
struct Grid {
    side: f64,
    origin: Vec<f64>,
    cells: HashMap<Box<[i64]>, Vec<usize>>,
}

impl Grid {
    fn cell_of(&self, x: &[f64], out: &mut [i64]) {
        for ((o, v), c) in out.iter_mut().zip(x).zip(&self.origin) {
            *o = ((v - c) / self.side).floor() as i64;
        }
    }

    /// Calls `f` with every occupied cell in the `reach`-ring around `center`.
    fn for_each_in_ring(&self, center: &[i64], reach: i64, mut f: impl FnMut(&[usize])) {
        let d = center.len();
        let mut offset = vec![-reach; d];
        let mut key = vec![0i64; d];
        loop {
            for j in 0..d {
                key[j] = center[j] + offset[j];
            }
            if let Some(members) = self.cells.get(key.as_slice()) {
                f(members);
            }
            let mut j = 0;
            loop {
                if j == d {
                    return;
                }
                offset[j] += 1;
                if offset[j] <= reach {
                    break;
                }
                offset[j] = -reach;
                j += 1;
            }
        }
    }
}

/// Geometric graph `G_S(ξ)`: vertices are the points, edges join `x ≠ y`
/// with `x - y ∈ S`.
#[derive(Clone, Debug)]
pub struct GeoGraph<'a> {
    points: &'a PointSet,
    connection: ConnectionSet,
    adjacency: Vec<Vec<usize>>,
    grid: Grid,
}

impl<'a> GeoGraph<'a> {
    pub fn build(points: &'a PointSet, connection: &ConnectionSet) -> Result<Self> {
        Self::build_with_origin(points, connection, None)
    }

    /// Like [`GeoGraph::build`] with the grid anchored at `origin`
    /// instead of `0`.
    pub fn build_with_origin(points: &'a PointSet, connection: &ConnectionSet, origin: Option<&[f64]>) -> Result<Self> {
        let d = points.dim();
        if connection.dim() != d && !points.is_empty() {
            return Err(Error::DimensionMismatch { expected: connection.dim(), found: d });
        }
        let origin = match origin {
            Some(o) if o.len() != d => return Err(Error::DimensionMismatch { expected: d, found: o.len() }),
            Some(o) => o.to_vec(),
            None => vec![0.0; d],
        };
        let mut grid = Grid { side: connection.outer_radius(), origin, cells: HashMap::new() };
        let mut key = vec![0i64; d];
        for (i, p) in points.iter().enumerate() {
            grid.cell_of(p, &mut key);
            grid.cells.entry(key.clone().into_boxed_slice()).or_default().push(i);
        }

        let mut adjacency = vec![Vec::new(); points.len()];
        for (cell, members) in &grid.cells {
            grid.for_each_in_ring(cell, 1, |others| {
                for &i in members {
                    let xi = points.point(i);
                    for &j in others {
                        if i < j && connection.connects_unchecked(xi, points.point(j)) {
                            adjacency[i].push(j);
                            adjacency[j].push(i);
                        }
                    }
                }
            });
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self { points, connection: connection.clone(), adjacency, grid })
    }

    pub fn points(&self) -> &'a PointSet {
        self.points
    }

    pub fn connection(&self) -> &ConnectionSet {
        &self.connection
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Sorted neighbour list of vertex `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    pub fn is_adjacent(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search(&j).is_ok()
    }

    /// Edges `(i, j)` with `i < j` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, list)| list.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    /// Vertices at Euclidean distance at most `radius` from vertex `v`
    /// (including `v`), found by scanning the `⌈radius/θρ⌉`-ring of cells.
    pub fn neighbors_within(&self, v: usize, radius: f64) -> Result<Vec<usize>> {
        if v >= self.vertex_count() {
            return Err(Error::InvalidIndex { index: v, len: self.vertex_count() });
        }
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("radius must be finite and >= 0, got {radius}")));
        }
        let x = self.points.point(v);
        let mut key = vec![0i64; x.len()];
        self.grid.cell_of(x, &mut key);
        let reach = (radius / self.grid.side).ceil().max(1.0) as i64;
        let r2 = radius * radius;
        let mut out = Vec::new();
        self.grid.for_each_in_ring(&key, reach, |members| {
            for &j in members {
                let dist2: f64 = x.iter().zip(self.points.point(j)).map(|(a, b)| (a - b) * (a - b)).sum();
                if dist2 <= r2 {
                    out.push(j);
                }
            }
        });
        out.sort_unstable();
        Ok(out)
    }

    /// Edge list CSV `i,j` with `i < j`.
    pub fn write_edge_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "i,j")?;
        for (i, j) in self.edges() {
            writeln!(out, "{i},{j}")?;
        }
        Ok(())
    }
}

/// All-pairs adjacency by direct evaluation of `x - y ∈ S`; `O(n²)` oracle.
pub fn brute_force_adjacency(points: &PointSet, connection: &ConnectionSet) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut adj = vec![Vec::new(); n];
    for (i, list) in adj.iter_mut().enumerate() {
        for j in 0..n {
            if i != j && connection.connects_unchecked(points.point(i), points.point(j)) {
                list.push(j);
            }
        }
    }
    adj
}
