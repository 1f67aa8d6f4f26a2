use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::mpc::{NodeState, System};
use crate::nodeset::NodeSet;

use super::components::{assign_components, components_from_labels, relocate, ComponentMap};

struct State {
    base: u64,
    done: bool,
    nbrs: NodeSet,
    leader: NodeId,
    recv: Vec<u64>,
}

impl NodeState for State {
    fn resident_words(&self) -> u64 {
        self.base + self.nbrs.len() as u64
    }
}

/// Per-component measurements of one naive gathering run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NaiveComponentStats {
    pub leader: NodeId,
    pub size: u64,
    /// Distinct virtual edges at termination (neighborhoods only grow).
    pub virtual_edges: u64,
    /// Largest number of edge copies held by the component's nodes in any
    /// round (each received neighborhood list counts its words).
    pub edge_copies: u64,
}

#[derive(Debug, Clone)]
pub struct NaiveGather {
    pub map: ComponentMap,
    /// Clique-completion rounds until every component is a clique.
    pub rounds: u64,
    /// Rounds spent moving components onto their machines.
    pub move_rounds: u64,
    pub components: Vec<NaiveComponentStats>,
}

const MAX_ROUNDS: u64 = 64;

/// Gathers every connected component of the subgraph induced by `live`:
/// nodes repeatedly complete their virtual neighborhoods to cliques until
/// each component is a clique, whose minimum ID becomes the leader.
pub fn naive_gather(g: &Graph, live: &[bool], sys: &mut System) -> Result<NaiveGather> {
    let labels = naive_labels(g, live, sys)?;
    let (label, rounds, recv, nbrs) = labels;
    let comps = components_from_labels(g, live, &label);
    let mut stats = Vec::with_capacity(comps.len());
    for c in &comps {
        let virtual_edges = c.members.iter().map(|&v| nbrs[v as usize]).sum::<u64>() / 2;
        let edge_copies = (0..rounds as usize)
            .map(|r| {
                c.members
                    .iter()
                    .map(|&v| recv[v as usize].get(r).copied().unwrap_or(0))
                    .sum::<u64>()
            })
            .max()
            .unwrap_or(0);
        stats.push(NaiveComponentStats {
            leader: c.leader,
            size: c.members.len() as u64,
            virtual_edges,
            edge_copies,
        });
    }
    let map = assign_components(g.n(), comps, sys)?;
    let move_rounds = relocate(&map, sys)?;
    Ok(NaiveGather {
        map,
        rounds,
        move_rounds,
        components: stats,
    })
}

type Labels = (Vec<NodeId>, u64, Vec<Vec<u64>>, Vec<u64>);

fn naive_labels(g: &Graph, live: &[bool], sys: &mut System) -> Result<Labels> {
    let mut states: Vec<State> = g
        .nodes()
        .map(|v| {
            let active = live[v as usize];
            State {
                base: 1 + g.degree(v) as u64,
                done: !active,
                nbrs: if active {
                    g.neighbors(v)
                        .iter()
                        .copied()
                        .filter(|&u| live[u as usize])
                        .collect()
                } else {
                    NodeSet::new()
                },
                leader: v,
                recv: Vec::new(),
            }
        })
        .collect();
    let mut rounds = 0;
    while states.iter().any(|s| !s.done) {
        if rounds == MAX_ROUNDS {
            return Err(Error::InvariantViolation(format!(
                "naive gathering did not converge in {MAX_ROUNDS} rounds"
            )));
        }
        sys.exec_round(
            &mut states,
            |v, s, out| {
                if !s.done {
                    out.multicast(s.nbrs.iter(), s.nbrs.with(v));
                }
            },
            |v, s, inbox| {
                if s.done {
                    return;
                }
                let own = s.nbrs.with(v);
                s.recv.push(inbox.iter().map(|x| x.len() as u64).sum());
                if inbox.iter().all(|x| *x == own) {
                    s.done = true;
                    s.leader = own.first().unwrap_or(v);
                } else {
                    s.nbrs = NodeSet::union_all(inbox.iter().chain([&own])).without(v);
                }
            },
        )?;
        rounds += 1;
    }
    let label = states.iter().map(|s| s.leader).collect();
    let sizes = states.iter().map(|s| s.nbrs.len() as u64).collect();
    let recv = states.into_iter().map(|s| s.recv).collect();
    Ok((label, rounds, recv, sizes))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        let e: Vec<_> = (1..n as NodeId).map(|v| (v - 1, v)).collect();
        Graph::from_edges(n, &e).unwrap()
    }

    fn roomy(g: &Graph) -> System {
        let mut sys = System::new(1 << 20, 4);
        sys.place(g).unwrap();
        sys
    }

    #[test]
    fn clique_takes_one_round() {
        for g in [path(1), path(2), Graph::empty(3)] {
            let mut sys = roomy(&g);
            let out = naive_gather(&g, &vec![true; g.n()], &mut sys).unwrap();
            assert_eq!(out.rounds, 1);
            assert_eq!(out.map.leader_of(0), Some(0));
        }
    }

    #[test]
    fn path_of_nine() {
        let g = path(9);
        let mut sys = roomy(&g);
        let out = naive_gather(&g, &[true; 9], &mut sys).unwrap();
        assert!(out.rounds <= 8);
        assert!((0..9).all(|v| out.map.leader_of(v) == Some(0)));
        let c = out.components[0];
        assert_eq!(c.virtual_edges, 36);
        assert!(c.edge_copies <= 9 * 9 * 9);
        // one component on one machine
        let m = out.map.machine_of(0);
        assert!((0..9).all(|v| out.map.machine_of(v) == m));
        assert!((0..9).all(|v| Some(sys.machine_of(v)) == m));
    }

    #[test]
    fn respects_live_mask() {
        let g = path(6);
        let live = [true, true, false, true, true, true];
        let mut sys = roomy(&g);
        let out = naive_gather(&g, &live, &mut sys).unwrap();
        let leaders: Vec<_> = (0..6).map(|v| out.map.leader_of(v)).collect();
        assert_eq!(
            leaders,
            vec![Some(0), Some(0), None, Some(3), Some(3), Some(3)]
        );
    }
}
