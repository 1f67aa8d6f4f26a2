//! Sequential reference checks. Nothing here calls into the simulated
//! algorithms.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

pub fn check_independent(g: &Graph, s: &[bool]) -> bool {
    first_conflict(g, s).is_none()
}

fn first_conflict(g: &Graph, s: &[bool]) -> Option<(NodeId, NodeId)> {
    g.edges().find(|&(u, v)| s[u as usize] && s[v as usize])
}

/// True iff every node outside `s` has a neighbor in `s`. Fails if `s` is
/// not independent.
pub fn check_maximal(g: &Graph, s: &[bool]) -> Result<bool> {
    if let Some((u, v)) = first_conflict(g, s) {
        return Err(Error::NotIndependent(u, v));
    }
    Ok(g.nodes()
        .all(|v| s[v as usize] || g.neighbors(v).iter().any(|&u| s[u as usize])))
}

/// One connected component of the masked subgraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleComponent {
    pub leader: NodeId,
    pub members: Vec<NodeId>,
    pub diameter: usize,
}

/// BFS decomposition of the subgraph induced by `live`, ordered by leader
/// (the minimum ID). Diameters are exact for forests.
pub fn components(g: &Graph, live: &[bool]) -> Vec<OracleComponent> {
    let n = g.n();
    let mut seen = vec![false; n];
    let mut dist = vec![usize::MAX; n];
    let mut out = Vec::new();
    for s in 0..n {
        if !live[s] || seen[s] {
            continue;
        }
        let members = bfs(g, live, s as NodeId, &mut dist);
        for &m in &members {
            seen[m as usize] = true;
        }
        let far = *members
            .iter()
            .max_by_key(|&&m| (dist[m as usize], std::cmp::Reverse(m)))
            .unwrap();
        for &m in &members {
            dist[m as usize] = usize::MAX;
        }
        let again = bfs(g, live, far, &mut dist);
        let diameter = again.iter().map(|&m| dist[m as usize]).max().unwrap_or(0);
        for &m in &again {
            dist[m as usize] = usize::MAX;
        }
        let mut members = members;
        members.sort_unstable();
        out.push(OracleComponent {
            leader: members[0],
            members,
            diameter,
        });
    }
    out
}

fn bfs(g: &Graph, live: &[bool], s: NodeId, dist: &mut [usize]) -> Vec<NodeId> {
    let mut q = VecDeque::from([s]);
    dist[s as usize] = 0;
    let mut order = vec![s];
    while let Some(u) = q.pop_front() {
        for &w in g.neighbors(u) {
            if live[w as usize] && dist[w as usize] == usize::MAX {
                dist[w as usize] = dist[u as usize] + 1;
                order.push(w);
                q.push_back(w);
            }
        }
    }
    order
}

/// Ascending-ID greedy maximal independent set.
pub fn greedy_mis(g: &Graph) -> Vec<bool> {
    let mut s = vec![false; g.n()];
    for v in g.nodes() {
        if !g.neighbors(v).iter().any(|&u| s[u as usize]) {
            s[v as usize] = true;
        }
    }
    s
}

/// Sizes `|T(v)|` of the subtree below every node of a rooted forest given
/// by parent pointers (`parent[r] == r` at roots). Only nodes with
/// `keep[v]` are counted; a kept node's parent must be kept.
pub fn subtree_sizes(parent: &[NodeId], keep: &[bool]) -> Vec<usize> {
    let n = parent.len();
    let mut depth = vec![usize::MAX; n];
    for (v, _) in keep.iter().enumerate().filter(|(_, &k)| k) {
        let mut path = vec![];
        let mut x = v;
        while depth[x] == usize::MAX && parent[x] as usize != x {
            path.push(x);
            x = parent[x] as usize;
        }
        let mut d = if depth[x] == usize::MAX { 0 } else { depth[x] };
        if depth[x] == usize::MAX {
            depth[x] = 0;
        }
        while let Some(y) = path.pop() {
            d += 1;
            depth[y] = d;
        }
    }
    let mut order: Vec<usize> = (0..n).filter(|&v| keep[v]).collect();
    order.sort_unstable_by_key(|&v| std::cmp::Reverse(depth[v]));
    let mut size = vec![0usize; n];
    for v in order {
        size[v] += 1;
        let p = parent[v] as usize;
        if p != v {
            size[p] += size[v];
        }
    }
    size
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: usize) -> Graph {
        let e: Vec<_> = (1..n as NodeId).map(|v| (v - 1, v)).collect();
        Graph::from_edges(n, &e).unwrap()
    }

    fn set(n: usize, ids: &[NodeId]) -> Vec<bool> {
        let mut s = vec![false; n];
        for &v in ids {
            s[v as usize] = true;
        }
        s
    }

    #[test]
    fn independence() {
        assert!(check_independent(&p(3), &set(3, &[0, 2])));
        assert!(!check_independent(&p(3), &set(3, &[0, 1])));
    }

    #[test]
    fn maximality() {
        assert!(check_maximal(&p(3), &set(3, &[1])).unwrap());
        assert!(!check_maximal(&p(3), &set(3, &[0])).unwrap());
        assert!(matches!(
            check_maximal(&p(3), &set(3, &[0, 1])),
            Err(Error::NotIndependent(0, 1))
        ));
    }

    #[test]
    fn component_listing() {
        assert!(components(&p(9), &[false; 9]).is_empty());
        let c = components(&p(9), &[true; 9]);
        assert_eq!(c.len(), 1);
        assert_eq!((c[0].leader, c[0].diameter), (0, 8));
        let c = components(&p(5), &[true, true, false, true, true]);
        assert_eq!(c.iter().map(|c| c.leader).collect::<Vec<_>>(), vec![0, 3]);
    }

    #[test]
    fn greedy() {
        assert_eq!(greedy_mis(&p(4)), set(4, &[0, 2]));
        let star = Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        assert_eq!(greedy_mis(&star), set(5, &[0]));
    }

    #[test]
    fn subtree_sizes_of_rooted_path() {
        // 0 -> 1 -> 2 (root), 3 -> 2
        let s = subtree_sizes(&[1, 2, 2, 2], &[true; 4]);
        assert_eq!(s, vec![1, 2, 4, 1]);
    }
}
