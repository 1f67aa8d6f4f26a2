//! Prüfer sequences: the bijection between labeled trees on `n` nodes and
//! sequences of length `n - 2` over `0..n`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::{Graph, NodeId};
use crate::error::{Error, Result};

/// Decodes a Prüfer sequence into the labeled tree it encodes.
pub fn decode(seq: &[NodeId], n: usize) -> Result<Graph> {
    if n == 0 {
        return Err(Error::BadSpec("tree needs n >= 1".into()));
    }
    if n == 1 {
        return Ok(Graph::empty(1));
    }
    if seq.len() != n - 2 {
        return Err(Error::BadSpec(format!(
            "Prüfer sequence for n = {n} must have length {}",
            n - 2
        )));
    }
    let mut degree = vec![1u32; n];
    for &x in seq {
        if x as usize >= n {
            return Err(Error::BadSpec(format!("Prüfer entry {x} out of range")));
        }
        degree[x as usize] += 1;
    }
    let mut leaves: BinaryHeap<Reverse<NodeId>> = (0..n as NodeId)
        .filter(|&v| degree[v as usize] == 1)
        .map(Reverse)
        .collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &x in seq {
        let Reverse(leaf) = leaves.pop().expect("a tree always has a leaf");
        edges.push((leaf, x));
        degree[x as usize] -= 1;
        if degree[x as usize] == 1 {
            leaves.push(Reverse(x));
        }
    }
    let Reverse(a) = leaves.pop().unwrap();
    let Reverse(b) = leaves.pop().unwrap();
    edges.push((a, b));
    Graph::forest_from_edges(n, &edges)
}

/// Encodes a tree as its Prüfer sequence (repeatedly strip the smallest leaf
/// and record its neighbor).
pub fn encode(tree: &Graph) -> Result<Vec<NodeId>> {
    let n = tree.n();
    if n == 0 || tree.m() != n - 1 || !tree.is_forest() {
        return Err(Error::InvariantViolation("not a tree".into()));
    }
    if n <= 2 {
        return Ok(Vec::new());
    }
    let mut degree: Vec<usize> = tree.nodes().map(|v| tree.degree(v)).collect();
    let mut removed = vec![false; n];
    let mut leaves: BinaryHeap<Reverse<NodeId>> = tree
        .nodes()
        .filter(|&v| degree[v as usize] == 1)
        .map(Reverse)
        .collect();
    let mut seq = Vec::with_capacity(n - 2);
    while seq.len() < n - 2 {
        let Reverse(leaf) = leaves.pop().unwrap();
        removed[leaf as usize] = true;
        let nb = tree
            .neighbors(leaf)
            .iter()
            .copied()
            .find(|&w| !removed[w as usize])
            .unwrap();
        seq.push(nb);
        degree[nb as usize] -= 1;
        if degree[nb as usize] == 1 {
            leaves.push(Reverse(nb));
        }
    }
    Ok(seq)
}

/// Every labeled tree on `n` nodes, in lexicographic Prüfer order
/// (`n^(n-2)` of them).
pub fn all_trees(n: usize) -> impl Iterator<Item = Graph> {
    let len = n.saturating_sub(2);
    let total = if n <= 2 {
        1
    } else {
        (n as u64).pow(len as u32)
    };
    (0..total).map(move |mut code| {
        let mut seq = vec![0 as NodeId; len];
        for slot in seq.iter_mut().rev() {
            *slot = (code % n as u64) as NodeId;
            code /= n as u64;
        }
        decode(&seq, n.max(1)).expect("every sequence decodes")
    })
}
