//! Forest representation, generators, structural statistics and edge-list I/O.

mod generate;
mod io;
pub mod prufer;

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};

pub use generate::{generate, GenKind, GenSpec};
pub use io::{load_edge_list, parse_edge_list, store_edge_list, write_edge_list};

/// Dense node identifier; one identifier is one word of memory.
pub type NodeId = u32;

/// Undirected simple graph in compressed adjacency form with sorted
/// neighbor lists.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    adj: Vec<NodeId>,
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n())
            .field("m", &self.m())
            .finish()
    }
}

impl Graph {
    /// Builds a graph from an edge list, rejecting out-of-range endpoints,
    /// self-loops and parallel edges.
    pub fn from_edges(n: usize, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let mut deg = vec![0usize; n];
        for &(u, v) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::InvariantViolation(format!(
                    "edge {u}-{v} out of range for n = {n}"
                )));
            }
            if u == v {
                return Err(Error::InvariantViolation(format!("self-loop at {u}")));
            }
            deg[u as usize] += 1;
            deg[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &deg {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut adj = vec![0; offsets[n]];
        for &(u, v) in edges {
            adj[fill[u as usize]] = v;
            fill[u as usize] += 1;
            adj[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        for v in 0..n {
            let list = &mut adj[offsets[v]..offsets[v + 1]];
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::InvariantViolation(format!(
                    "parallel edge {v}-{}",
                    w[0]
                )));
            }
        }
        Ok(Graph { offsets, adj })
    }

    /// Like [`Graph::from_edges`] but additionally requires acyclicity.
    pub fn forest_from_edges(n: usize, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let g = Self::from_edges(n, edges)?;
        if !g.is_forest() {
            return Err(Error::NotAForest);
        }
        Ok(g)
    }

    pub fn empty(n: usize) -> Self {
        Graph {
            offsets: vec![0; n + 1],
            adj: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn m(&self) -> usize {
        self.adj.len() / 2
    }

    #[inline]
    pub fn degree(&self, v: NodeId) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    #[inline]
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        let v = v as usize;
        &self.adj[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        0..self.n() as NodeId
    }

    pub fn max_degree(&self) -> usize {
        self.nodes().map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Each edge once, as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes().flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn is_forest(&self) -> bool {
        let mut seen = vec![false; self.n()];
        let mut comps = 0usize;
        let mut stack = Vec::new();
        for s in self.nodes() {
            if seen[s as usize] {
                continue;
            }
            comps += 1;
            seen[s as usize] = true;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &w in self.neighbors(u) {
                    if !seen[w as usize] {
                        seen[w as usize] = true;
                        stack.push(w);
                    }
                }
            }
        }
        self.m() + comps == self.n()
    }

    /// Subgraph induced by the nodes with `keep[v]`, relabeled monotonically
    /// so that the relative order of IDs (and hence every minimum-ID choice)
    /// is preserved. Returns the subgraph and the map from new to old IDs.
    pub fn induced(&self, keep: &[bool]) -> (Graph, Vec<NodeId>) {
        assert_eq!(keep.len(), self.n());
        let mut new_id = vec![NodeId::MAX; self.n()];
        let mut old_of = Vec::new();
        for v in self.nodes() {
            if keep[v as usize] {
                new_id[v as usize] = old_of.len() as NodeId;
                old_of.push(v);
            }
        }
        let mut offsets = Vec::with_capacity(old_of.len() + 1);
        offsets.push(0);
        let mut adj = Vec::new();
        for &v in &old_of {
            // old neighbor lists are sorted and the relabeling is monotone
            adj.extend(
                self.neighbors(v)
                    .iter()
                    .filter(|&&w| keep[w as usize])
                    .map(|&w| new_id[w as usize]),
            );
            offsets.push(adj.len());
        }
        (Graph { offsets, adj }, old_of)
    }

    /// BFS from `s`; returns the farthest node and its distance.
    fn farthest(&self, s: NodeId, dist: &mut [u32], queue: &mut VecDeque<NodeId>) -> (NodeId, u32) {
        dist[s as usize] = 0;
        queue.push_back(s);
        let mut best = (s, 0);
        let mut visited = vec![s];
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            if du > best.1 {
                best = (u, du);
            }
            for &w in self.neighbors(u) {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = du + 1;
                    visited.push(w);
                    queue.push_back(w);
                }
            }
        }
        for v in visited {
            dist[v as usize] = u32::MAX;
        }
        best
    }
}

/// Exact structural statistics of a forest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GraphStats {
    pub n: usize,
    pub m: usize,
    pub max_degree: usize,
    /// Largest diameter over all trees of the forest.
    pub diameter: usize,
}

/// Computes n, m, maximum degree and the exact diameter (double BFS per
/// tree, which is exact on trees).
pub fn graph_stats(g: &Graph) -> Result<GraphStats> {
    if !g.is_forest() {
        return Err(Error::NotAForest);
    }
    let n = g.n();
    let mut dist = vec![u32::MAX; n];
    let mut done = vec![false; n];
    let mut queue = VecDeque::new();
    let mut diameter = 0;
    for s in g.nodes() {
        if done[s as usize] {
            continue;
        }
        let (a, _) = g.farthest(s, &mut dist, &mut queue);
        let (_, ecc) = g.farthest(a, &mut dist, &mut queue);
        diameter = diameter.max(ecc as usize);
        // mark the tree as handled
        let mut stack = vec![s];
        done[s as usize] = true;
        while let Some(u) = stack.pop() {
            for &w in g.neighbors(u) {
                if !done[w as usize] {
                    done[w as usize] = true;
                    stack.push(w);
                }
            }
        }
    }
    Ok(GraphStats {
        n,
        m: g.m(),
        max_degree: g.max_degree(),
        diameter,
    })
}
