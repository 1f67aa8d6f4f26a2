use crate::error::{Error, Result};
use crate::graph::NodeId;
use crate::mpc::{NodeState, Payload, System};
use crate::nodeset::NodeSet;

/// Marks nodes outside the rooted forest.
pub const NONE: NodeId = NodeId::MAX;

/// Parent pointers of a rooted forest (`parent[r] == r` for roots, [`NONE`]
/// for nodes outside it), each node's children, and the phase in which the
/// rooting algorithm fixed each pointer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParentMap {
    pub parent: Vec<NodeId>,
    pub children: Vec<Vec<NodeId>>,
    pub removal_phase: Vec<u32>,
}

impl ParentMap {
    /// Derives child lists from raw parent pointers.
    pub fn from_parents(parent: Vec<NodeId>) -> Self {
        let mut children = vec![Vec::new(); parent.len()];
        for (v, &p) in parent.iter().enumerate() {
            if p != NONE && p as usize != v {
                children[p as usize].push(v as NodeId);
            }
        }
        let removal_phase = vec![0; parent.len()];
        ParentMap {
            parent,
            children,
            removal_phase,
        }
    }

    pub fn is_root(&self, v: NodeId) -> bool {
        self.parent[v as usize] == v
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Msg {
    /// Sent by a node to the children it tracks.
    Pointer { parent: NodeId, done: bool },
    /// Sent by a node that is not done to its parent: these children now
    /// hang below the parent.
    Adopt(NodeSet),
}

impl Payload for Msg {
    fn words(&self) -> u64 {
        match self {
            Msg::Pointer { .. } => 2,
            Msg::Adopt(s) => s.words(),
        }
    }
}

struct State {
    base: u64,
    parent: NodeId,
    root: bool,
    done: bool,
    tracked: NodeSet,
}

impl NodeState for State {
    fn resident_words(&self) -> u64 {
        self.base + 2 + self.tracked.len() as u64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Forwarded {
    /// Root of every node's tree ([`NONE`] outside the forest).
    pub root: Vec<NodeId>,
    pub rounds: u64,
}

/// Pointer forwarding: every round each node hands its own parent to the
/// children it tracks, so that every node's pointer skips one ancestor per
/// round and reaches the root after `ceil(log2 depth) + 1` rounds.
pub fn point_to_root(pm: &ParentMap, base_words: &[u64], sys: &mut System) -> Result<Forwarded> {
    let n = pm.parent.len();
    for v in 0..n {
        let p = pm.parent[v];
        if p == NONE || p as usize == v {
            continue;
        }
        let pp = pm.parent[p as usize];
        if pp == NONE {
            return Err(Error::NotRooted(format!(
                "parent {p} of {v} is outside the forest"
            )));
        }
        if pp as usize == v {
            return Err(Error::NotRooted(format!(
                "nodes {v} and {p} point at each other"
            )));
        }
    }
    let mut states: Vec<State> = (0..n)
        .map(|v| {
            let p = pm.parent[v];
            let root = p as usize == v;
            State {
                base: base_words[v],
                parent: p,
                root,
                done: p == NONE || root,
                tracked: NodeSet::from_ids(pm.children[v].iter().copied()),
            }
        })
        .collect();
    let cap = (usize::BITS - n.leading_zeros()) as u64 + 2;
    let mut rounds = 0;
    while states.iter().any(|s| !s.done) {
        if rounds == cap {
            return Err(Error::NotRooted(format!(
                "pointers did not reach a root within {cap} rounds (cycle)"
            )));
        }
        sys.exec_round(
            &mut states,
            |_, s, out| {
                if s.tracked.is_empty() {
                    return;
                }
                let flag = s.root || s.done;
                out.multicast(
                    s.tracked.iter(),
                    Msg::Pointer {
                        parent: s.parent,
                        done: flag,
                    },
                );
                if !flag {
                    out.send(s.parent, Msg::Adopt(s.tracked.clone()));
                }
            },
            |_, s, inbox| {
                let mut adopted = Vec::new();
                for m in inbox.iter() {
                    match m {
                        Msg::Pointer { parent, done } => {
                            s.parent = *parent;
                            s.done |= *done;
                        }
                        Msg::Adopt(c) => adopted.push(c),
                    }
                }
                s.tracked = NodeSet::union_all(adopted);
            },
        )?;
        rounds += 1;
    }
    let root = states
        .iter()
        .map(|s| if s.parent == NONE { NONE } else { s.parent })
        .collect();
    Ok(Forwarded { root, rounds })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(parent: Vec<NodeId>) -> Result<Forwarded> {
        let n = parent.len();
        let mut sys = System::new(1 << 16, 2);
        sys.place_weights(&vec![1; n]).unwrap();
        point_to_root(&ParentMap::from_parents(parent), &vec![1; n], &mut sys)
    }

    #[test]
    fn single_root_needs_no_rounds() {
        let f = run(vec![0]).unwrap();
        assert_eq!((f.root, f.rounds), (vec![0], 0));
    }

    #[test]
    fn star_takes_one_round() {
        let f = run(vec![0, 0, 0, 0, 0]).unwrap();
        assert_eq!(f.rounds, 1);
        assert_eq!(f.root, vec![0; 5]);
    }

    #[test]
    fn path_of_length_sixteen() {
        // node v points to v + 1, node 16 is the root
        let parent: Vec<NodeId> = (0..17).map(|v| (v + 1).min(16)).collect();
        let f = run(parent).unwrap();
        assert!(f.rounds <= 5, "{}", f.rounds);
        assert_eq!(f.root, vec![16; 17]);
    }

    #[test]
    fn two_cycle_is_rejected() {
        assert!(matches!(run(vec![1, 0]), Err(Error::NotRooted(_))));
        assert!(matches!(run(vec![1, 2, 0]), Err(Error::NotRooted(_))));
    }

    #[test]
    fn forest_with_outsiders() {
        let f = run(vec![0, 0, NONE, 3, 3, 4]).unwrap();
        assert_eq!(f.root, vec![0, 0, NONE, 3, 3, 3]);
    }
}
