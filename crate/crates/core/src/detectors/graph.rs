//! Vertex-arrival graphs built from square Boolean streams, with small exact oracles.

use num_rational::Ratio;
use rand::seq::index::sample as sample_indices;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::state::bits_for;
use crate::bits::BitRow;
use crate::distributions::{Row, StreamSource};
use crate::error::{Error, Result};
use crate::rng::{derived_rng, Domain};

pub const MAX_BICLIQUE_CAP: usize = 24;
pub const DENSEST_EXACT_CAP: usize = 20;

/// Vertex `vertex` arrives with its edges to `j <= vertex` (a self-edge when `j == vertex`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexArrivalEvent {
    pub vertex: usize,
    pub edges: Vec<usize>,
}

impl VertexArrivalEvent {
    /// Row `i` of the stream read as the arrival of vertex `i`: an edge to `j <= i` iff `x_j = 1`.
    pub fn from_row(row: &Row) -> Result<Self> {
        let bits =
            row.data.as_bits().ok_or_else(|| Error::ShapeMismatch("vertex arrival needs Boolean rows".into()))?;
        let i = row.index;
        if i >= bits.len() {
            return Err(Error::ShapeMismatch(format!("row {i} has only {} columns", bits.len())));
        }
        Ok(VertexArrivalEvent { vertex: i, edges: bits.ones().take_while(|&j| j <= i).collect() })
    }
}

/// Turns an `n x n` Boolean stream into vertex-arrival events.
///
/// The adapter itself only keeps the index of the next vertex.
#[derive(Debug)]
pub struct VertexArrival {
    source: StreamSource,
    n: usize,
    next: usize,
}

impl VertexArrival {
    pub fn new(mut source: StreamSource) -> Result<Self> {
        let spec = source.spec();
        if !spec.kind.is_boolean() {
            return Err(Error::ShapeMismatch(format!("{} streams are not Boolean", spec.kind)));
        }
        if spec.rows != spec.cols {
            return Err(Error::ShapeMismatch(format!("stream is {} x {}, not square", spec.rows, spec.cols)));
        }
        let n = spec.rows;
        source.rewind();
        Ok(VertexArrival { source, n, next: 0 })
    }

    pub fn vertices(&self) -> usize {
        self.n
    }

    pub fn counter_bits(&self) -> u32 {
        bits_for(self.n as u64)
    }

    /// Collects every event into a graph.
    pub fn into_graph(self) -> Result<Graph> {
        let n = self.n;
        let mut g = Graph::new(n);
        for ev in self {
            g.add_event(&ev?);
        }
        Ok(g)
    }
}

impl Iterator for VertexArrival {
    type Item = Result<VertexArrivalEvent>;

    fn next(&mut self) -> Option<Self::Item> {
        match self.source.next_row() {
            Ok(Some(row)) => {
                self.next += 1;
                Some(VertexArrivalEvent::from_row(&row))
            }
            Ok(None) => None,
            Err(e) => Some(Err(e)),
        }
    }
}

/// Undirected graph with optional self-edges, stored as adjacency bit rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<BitRow>,
}

fn and_count(a: &BitRow, b: &BitRow) -> usize {
    a.words().iter().zip(b.words()).map(|(x, y)| (x & y).count_ones() as usize).sum()
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph { adj: (0..n).map(|_| BitRow::zeros(n)).collect() }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Graph::new(n);
        for &(a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    /// Reads rows directly: `{i, j}` with `j <= i` is an edge iff `x^i_j = 1`.
    pub fn from_rows(rows: &[Row]) -> Result<Self> {
        let mut g = Graph::new(rows.len());
        for row in rows {
            let bits = row.data.as_bits().ok_or_else(|| Error::ShapeMismatch("Boolean rows expected".into()))?;
            if bits.len() != rows.len() {
                return Err(Error::ShapeMismatch("rows do not form a square matrix".into()));
            }
            for j in 0..=row.index {
                if bits.get(j) {
                    g.add_edge(row.index, j);
                }
            }
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        self.adj[a].set(b, true);
        self.adj[b].set(a, true);
    }

    pub fn add_event(&mut self, ev: &VertexArrivalEvent) {
        for &j in &ev.edges {
            self.add_edge(ev.vertex, j);
        }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].get(b)
    }

    pub fn neighbours(&self, v: usize) -> &BitRow {
        &self.adj[v]
    }

    /// Number of edges, self-edges counted once.
    pub fn edge_count(&self) -> usize {
        let loops = (0..self.len()).filter(|&v| self.has_edge(v, v)).count();
        let total: usize = self.adj.iter().map(BitRow::count_ones).sum();
        (total + loops) / 2
    }

    /// Edges with both ends in `set`.
    pub fn induced_edges(&self, set: &[usize]) -> usize {
        let mut mask = BitRow::zeros(self.len());
        for &v in set {
            mask.set(v, true);
        }
        self.induced_edges_mask(set, &mask)
    }

    fn induced_edges_mask(&self, set: &[usize], mask: &BitRow) -> usize {
        let mut total = 0;
        let mut loops = 0;
        for &v in set {
            total += and_count(&self.adj[v], mask);
            loops += self.has_edge(v, v) as usize;
        }
        (total + loops) / 2
    }

    fn masks(&self) -> Vec<u32> {
        self.adj.iter().map(|r| r.ones().fold(0u32, |m, j| m | 1 << j)).collect()
    }
}

/// Largest `k` such that some `S`, `R` with `|S| = |R| = k` have every `u in S` adjacent to every `v in R`.
pub fn max_biclique_exact(g: &Graph) -> Result<usize> {
    let n = g.len();
    if n > MAX_BICLIQUE_CAP {
        return Err(Error::TooLarge { n, cap: MAX_BICLIQUE_CAP });
    }
    let adj = g.masks();
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut best = 0;
    fn grow(adj: &[u32], start: usize, size: usize, common: u32, best: &mut usize) {
        for v in start..adj.len() {
            let next = common & adj[v];
            let c = next.count_ones() as usize;
            *best = (*best).max(c.min(size + 1));
            if c > *best && size + 1 + (adj.len() - v - 1) > *best {
                grow(adj, v + 1, size + 1, next, best);
            }
        }
    }
    grow(&adj, 0, 0, full, &mut best);
    Ok(best)
}

/// Exact `max |E(H)| / |H|` over `1 <= |H| <= beta`.
pub fn densest_at_most_beta_exact(g: &Graph, beta: usize) -> Result<Ratio<u64>> {
    let n = g.len();
    if beta == 0 {
        return Err(Error::invalid("beta", "must be at least 1"));
    }
    if n > DENSEST_EXACT_CAP {
        return Err(Error::TooLarge { n, cap: DENSEST_EXACT_CAP });
    }
    let adj = g.masks();
    let mut best = (0u64, 1u64);
    fn grow(adj: &[u32], beta: usize, start: usize, set: u32, size: u64, edges: u64, best: &mut (u64, u64)) {
        for v in start..adj.len() {
            let bit = 1u32 << v;
            let e = edges + (adj[v] & set).count_ones() as u64 + u64::from(adj[v] & bit != 0);
            let s = size + 1;
            if e * best.1 > best.0 * s {
                *best = (e, s);
            }
            if (s as usize) < beta {
                grow(adj, beta, v + 1, set | bit, s, e, best);
            }
        }
    }
    grow(&adj, beta, 0, 0, 0, 0, &mut best);
    Ok(Ratio::new(best.0, best.1))
}

/// Best density among `samples` random subsets, each of a uniformly drawn size in `1..=beta`.
pub fn densest_sampled(g: &Graph, beta: usize, samples: usize, seed: u64) -> f64 {
    let n = g.len();
    let top = beta.min(n);
    if top == 0 {
        return 0.0;
    }
    let mut rng = derived_rng(seed, Domain::Sampler, 0);
    let mut best = 0.0f64;
    let mut mask = BitRow::zeros(n);
    for _ in 0..samples {
        let size = rng.gen_range(1..=top);
        let set = sample_indices(&mut rng, n, size).into_vec();
        for &v in &set {
            mask.set(v, true);
        }
        best = best.max(g.induced_edges_mask(&set, &mask) as f64 / size as f64);
        for &v in &set {
            mask.set(v, false);
        }
    }
    best
}

/// Greedy peeling: repeatedly drop a minimum-degree vertex and keep the best density seen at size `<= beta`.
pub fn densest_peeling(g: &Graph, beta: usize) -> f64 {
    let n = g.len();
    let mut alive = vec![true; n];
    let mut degree: Vec<usize> = (0..n).map(|v| g.neighbours(v).count_ones()).collect();
    let mut edges = g.edge_count();
    let mut best = 0.0f64;
    for size in (1..=n).rev() {
        if size <= beta {
            best = best.max(edges as f64 / size as f64);
        }
        let v = (0..n).filter(|&v| alive[v]).min_by_key(|&v| (degree[v], v)).expect("a live vertex");
        alive[v] = false;
        edges -= degree[v];
        for u in g.neighbours(v).ones() {
            if alive[u] {
                degree[u] -= 1;
            }
        }
    }
    best
}
