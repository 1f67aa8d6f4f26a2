use serde::Serialize;

use crate::error::Result;
use crate::graph::{Graph, NodeId};
use crate::mpc::{NodeState, System};
use crate::rng::{dyadic, Stream};
use crate::scalar::{dyadic_level, effective_degree, Real};

use super::{max_live_degree, NodeStatus, ShatterParams};

/// Desire levels stored as exponents: `p(v) = 2^-level[v]`, level >= 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesireState {
    pub level: Vec<u32>,
}

/// Levels beyond this are indistinguishable from zero at 64-bit draws.
const MAX_LEVEL: u32 = 62;

impl DesireState {
    pub fn new(n: usize) -> Self {
        DesireState { level: vec![1; n] }
    }

    pub fn p<T: Real>(&self, v: NodeId) -> T {
        dyadic_level(self.level[v as usize])
    }

    /// Halves `p` if the effective degree is at least 2, else doubles it up
    /// to 1/2.
    pub fn next_level<T: Real>(level: u32, effective: T) -> u32 {
        if effective >= T::from_f64(2.0).unwrap() {
            (level + 1).min(MAX_LEVEL)
        } else {
            level.saturating_sub(1).max(1)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocalShatter {
    pub max_degree: u64,
    pub iterations: u64,
    pub joined: u64,
}

struct Node {
    base: u64,
    live: bool,
    level: u32,
    marked: bool,
    joined: bool,
    removed: bool,
}

impl NodeState for Node {
    fn resident_words(&self) -> u64 {
        self.base + 2
    }
}

/// Runs the desire-level algorithm on the live part of `g` for
/// `c_gh * ceil(log2 Delta') + c0` iterations of two rounds each: marks
/// with levels, then join announcements. A last round tells neighbors about
/// removals.
pub fn local_shatter(
    g: &Graph,
    status: &mut [NodeStatus],
    params: &ShatterParams,
    seed: u64,
    sys: &mut System,
) -> Result<LocalShatter> {
    let max_degree = max_live_degree(g, status, sys);
    let iterations = params.local_iterations(max_degree);
    let mut nodes: Vec<Node> = g
        .nodes()
        .map(|v| Node {
            base: 1 + g.degree(v) as u64,
            live: status[v as usize].is_live(),
            level: 1,
            marked: false,
            joined: false,
            removed: false,
        })
        .collect();
    for t in 0..iterations {
        sys.exec_round(
            &mut nodes,
            |v, s, out| {
                if !s.live {
                    return;
                }
                s.marked = dyadic(seed, Stream::Mark, v as u64, t, s.level);
                let word = s.level << 1 | s.marked as u32;
                out.multicast(g.neighbors(v).iter().copied(), (v, word));
            },
            |_, s, inbox| {
                if !s.live {
                    return;
                }
                let mut blocked = false;
                let levels = inbox.iter().map(|&(_, w)| {
                    blocked |= w & 1 == 1;
                    w >> 1
                });
                let effective: f64 = effective_degree(levels);
                s.joined = s.marked && !blocked;
                s.level = DesireState::next_level(s.level, effective);
            },
        )?;
        sys.exec_round(
            &mut nodes,
            |v, s, out| {
                if s.joined && s.live {
                    out.multicast(g.neighbors(v).iter().copied(), ());
                }
            },
            |_, s, inbox| {
                if !s.live {
                    return;
                }
                if s.joined {
                    s.live = false;
                } else if !inbox.is_empty() {
                    s.live = false;
                    s.removed = true;
                }
            },
        )?;
    }
    sys.exec_round(
        &mut nodes,
        |v, s, out| {
            if s.removed {
                out.multicast(g.neighbors(v).iter().copied(), ());
            }
        },
        |_, _, _| {},
    )?;
    let mut joined = 0;
    for (st, s) in status.iter_mut().zip(&nodes) {
        if s.joined {
            *st = NodeStatus::InMIS;
            joined += 1;
        } else if s.removed {
            *st = NodeStatus::Removed;
        }
    }
    Ok(LocalShatter {
        max_degree,
        iterations,
        joined,
    })
}

#[cfg(test)]
mod tests {
    use super::super::sample::statuses_consistent;
    use super::*;
    use crate::mpc::{GatherMode, MpcConfig};

    fn setup(g: &Graph) -> (ShatterParams, System) {
        let cfg = MpcConfig::new(g.n().max(2), 0.5, GatherMode::Naive, 0);
        let mut sys = System::new(1 << 16, 4);
        sys.place(g).unwrap();
        (ShatterParams::from_config(&cfg), sys)
    }

    #[test]
    fn level_rule() {
        assert_eq!(DesireState::next_level(1, 0.0f64), 1);
        assert_eq!(DesireState::next_level(3, 1.99f64), 2);
        assert_eq!(DesireState::next_level(3, 2.0f64), 4);
        assert_eq!(DesireState::next_level(MAX_LEVEL, 5.0f32), MAX_LEVEL);
        let d = DesireState::new(3);
        assert_eq!(d.p::<f64>(0), 0.5);
    }

    #[test]
    fn isolated_nodes_join() {
        let g = Graph::empty(50);
        let (params, mut sys) = setup(&g);
        let mut st = vec![NodeStatus::Undecided; 50];
        let out = local_shatter(&g, &mut st, &params, 9, &mut sys).unwrap();
        assert_eq!(out.iterations, 20);
        // each misses 20 fair marks with probability 2^-20
        assert!(st.iter().all(|&s| s == NodeStatus::InMIS));
    }

    #[test]
    fn k2_never_both() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        for seed in 0..100 {
            let (params, mut sys) = setup(&g);
            let mut st = vec![NodeStatus::Undecided; 2];
            local_shatter(&g, &mut st, &params, seed, &mut sys).unwrap();
            assert!(statuses_consistent(&g, &st));
            assert!(!(st[0] == NodeStatus::InMIS && st[1] == NodeStatus::InMIS));
        }
    }

    #[test]
    fn path_keeps_invariants() {
        let e: Vec<_> = (1..100u32).map(|v| (v - 1, v)).collect();
        let g = Graph::from_edges(100, &e).unwrap();
        let (params, mut sys) = setup(&g);
        let mut st = vec![NodeStatus::Undecided; 100];
        let out = local_shatter(&g, &mut st, &params, 4, &mut sys).unwrap();
        assert_eq!(out.iterations, 8 + 20);
        assert!(statuses_consistent(&g, &st));
        let rem = super::super::measure(&g, &super::super::live_mask(&st));
        assert!(rem.max_size <= 10, "{rem:?}");
    }
}
