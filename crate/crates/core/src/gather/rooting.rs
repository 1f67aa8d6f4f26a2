//! Budgeted tree rooting.
//!
//! Phases of bounded graph exponentiation: every node may add at most its
//! budget of virtual edges per phase, after which each node that sees all
//! but one side of itself in the tree picks that side as its parent and
//! leaves. Budgets of the survivors grow so that `n_i * B_i` stays fixed.

use num_traits::Pow;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::mpc::{AggregateOp, NodeState, System};
use crate::nodeset::NodeSet;
use crate::scalar::{floor_words, Budget};

use super::forwarding::{ParentMap, NONE};

/// Budget bookkeeping of one phase.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseBudget {
    /// Nodes of the forest at the start of the phase.
    pub alive: u64,
    pub budget: Budget,
    /// Edges added in the phase, summed over the nodes that added them.
    pub added: u64,
    pub removed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetLedger {
    pub n: u64,
    pub d: u64,
    pub initial: Budget,
    pub phases: Vec<PhaseBudget>,
}

impl BudgetLedger {
    /// Checks conservation `n_i * B_i = n * B`, monotonicity, the per-phase
    /// edge total and, whenever `d^3 <= B_i`, growth `B_{i+1}^6 >= B_i^7`.
    /// Returns a description of every violation.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let total = Budget::from_integer(self.n.into()) * &self.initial;
        let d3 = Budget::from_integer(self.d.into()).pow(3u32);
        for (i, p) in self.phases.iter().enumerate() {
            if Budget::from_integer(p.alive.into()) * &p.budget != total {
                out.push(format!(
                    "phase {i}: n_i * B_i = {} * {} != {total}",
                    p.alive, p.budget
                ));
            }
            if Budget::from_integer(p.added.into()) > total {
                out.push(format!(
                    "phase {i}: {} edges added, more than {total}",
                    p.added
                ));
            }
            if let Some(next) = self.phases.get(i + 1) {
                if next.budget < p.budget {
                    out.push(format!("phase {i}: budget decreased to {}", next.budget));
                }
                if d3 <= p.budget && next.budget.clone().pow(6u32) < p.budget.clone().pow(7u32) {
                    out.push(format!(
                        "phase {i}: growth {} -> {} below exponent 7/6",
                        p.budget, next.budget
                    ));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Rooting {
    pub parents: ParentMap,
    pub ledger: BudgetLedger,
    /// Node-program rounds (exponentiation and special rounds).
    pub rounds: u64,
}

struct State {
    base: u64,
    alive: bool,
    /// Alive neighbors in the input forest.
    tree: Vec<NodeId>,
    /// Current virtual neighborhood, a superset of `tree`.
    virt: NodeSet,
    budget: u64,
    spent: u64,
    pending: Vec<(NodeId, NodeId)>,
    parent: NodeId,
    leaving: bool,
    children: Vec<NodeId>,
}

impl NodeState for State {
    fn resident_words(&self) -> u64 {
        self.base
            + self.virt.len() as u64
            + 2 * self.pending.len() as u64
            + self.children.len() as u64
            + 2
    }
}

fn bit_length(d: u64) -> u64 {
    (u64::BITS - d.leading_zeros()) as u64
}

/// Roots every tree of the forest induced by `live` using initial per-node
/// budget `b`. `d` bounds the diameter and fixes the number of
/// exponentiation rounds per phase at `bitlen(d)`.
pub fn root_trees_budgeted(
    g: &Graph,
    live: &[bool],
    b: u64,
    d: u64,
    sys: &mut System,
) -> Result<Rooting> {
    let n = g.n();
    let mut states: Vec<State> = g
        .nodes()
        .map(|v| {
            let alive = live[v as usize];
            let tree: Vec<NodeId> = if alive {
                g.neighbors(v)
                    .iter()
                    .copied()
                    .filter(|&u| live[u as usize])
                    .collect()
            } else {
                Vec::new()
            };
            State {
                base: 1 + g.degree(v) as u64,
                alive,
                virt: NodeSet::from_ids(tree.iter().copied()),
                tree,
                budget: 0,
                spent: 0,
                pending: Vec::new(),
                parent: NONE,
                leaving: false,
                children: Vec::new(),
            }
        })
        .collect();
    let mut removal_phase = vec![0u32; n];
    let n0 = live.iter().filter(|&&l| l).count() as u64;
    let mut ledger = BudgetLedger {
        n: n0,
        d,
        initial: Budget::from_integer(b.into()),
        phases: Vec::new(),
    };
    let exp_rounds = bit_length(d);
    let mut budget = ledger.initial.clone();
    let mut rounds = 0u64;
    let mut phase = 0u32;
    loop {
        let alive = sys.global_aggregate(
            states.iter().filter(|s| s.alive).map(|_| 1),
            AggregateOp::Count,
        );
        if alive == 0 {
            break;
        }
        if let Some(prev) = ledger.phases.last() {
            budget = budget * Budget::from_integer(prev.alive.into())
                / Budget::from_integer(alive.into());
        }
        if phase as u64 > n0 + 1 {
            return Err(Error::NotRooted(format!(
                "no progress after {phase} phases"
            )));
        }
        let bv = floor_words(&budget);
        for s in states.iter_mut().filter(|s| s.alive) {
            s.budget = bv;
            s.spent = 0;
        }

        for _ in 0..exp_rounds {
            exchange_round(&mut states, sys)?;
            add_round(&mut states, sys)?;
            rounds += 2;
        }
        choose_parents(&mut states, sys)?;
        resolve_round(&mut states, sys)?;
        rounds += 2;
        // the mutual-parent check is charged one more round
        sys.accounting(|sys| sys.idle_rounds(1));

        let mut added = 0;
        let mut removed = 0;
        for (v, s) in states.iter_mut().enumerate() {
            if !s.alive {
                continue;
            }
            added += s.spent;
            if !s.leaving && s.tree.is_empty() {
                s.parent = v as NodeId;
                s.leaving = true;
            }
            if s.leaving {
                s.alive = false;
                s.leaving = false;
                removal_phase[v] = phase;
                removed += 1;
            } else {
                s.virt = NodeSet::from_ids(s.tree.iter().copied());
            }
        }
        ledger.phases.push(PhaseBudget {
            alive,
            budget: budget.clone(),
            added,
            removed,
        });
        phase += 1;
    }
    let parent = states.iter().map(|s| s.parent).collect();
    let children = states.into_iter().map(|s| s.children).collect();
    Ok(Rooting {
        parents: ParentMap {
            parent,
            children,
            removal_phase,
        },
        ledger,
        rounds,
    })
}

/// Every alive node sends its virtual neighborhood to its virtual
/// neighbors and decides whether completing its own neighborhood to a
/// clique fits its remaining budget.
fn exchange_round(states: &mut [State], sys: &mut System) -> Result<()> {
    sys.exec_round(
        states,
        |v, s, out| {
            if s.alive && !s.virt.is_empty() {
                out.multicast(s.virt.iter(), (v, s.virt.clone()));
            }
        },
        |_, s, inbox| {
            if !s.alive {
                return;
            }
            let deg = s.virt.len() as u64;
            let mut present2 = 0u64;
            for (u, nu) in inbox.iter() {
                if s.virt.contains(*u) {
                    present2 += (nu.len() - nu.difference_len(&s.virt)) as u64;
                }
            }
            let missing = deg * deg.saturating_sub(1) / 2 - present2 / 2;
            if missing == 0 || missing > s.budget {
                return;
            }
            s.budget -= missing;
            s.spent += missing;
            for (u, nu) in inbox.iter() {
                for w in s.virt.iter() {
                    if *u < w && !nu.contains(w) {
                        s.pending.push((*u, w));
                    }
                }
            }
            debug_assert_eq!(s.pending.len() as u64, missing);
        },
    )?;
    Ok(())
}

/// Announces the added edges to both endpoints; copies of the same edge
/// added by several nodes collapse in the shuffle.
fn add_round(states: &mut [State], sys: &mut System) -> Result<()> {
    sys.exec_round(
        states,
        |_, s, out| {
            for &(a, b) in &s.pending {
                out.send(a, b);
                out.send(b, a);
            }
            s.pending = Vec::new();
        },
        |_, s, inbox| {
            if s.alive && !inbox.is_empty() {
                s.virt = NodeSet::union_all([&s.virt, &inbox.iter().copied().collect()]);
            }
        },
    )?;
    Ok(())
}

/// First special round. Each node learns the tree neighbors of its virtual
/// neighbors and so the parts of every side it can see. A side is
/// contained if it is closed under tree adjacency inside the virtual
/// neighborhood. Exactly one uncontained side: it becomes the parent. No
/// uncontained side: the node sees its whole tree and points along the
/// tree path to the tree's maximum ID; that node points to its largest
/// neighbor, a 2-cycle the resolve round breaks.
fn choose_parents(states: &mut [State], sys: &mut System) -> Result<()> {
    sys.exec_round(
        states,
        |v, s, out| {
            if s.alive && !s.virt.is_empty() {
                out.multicast(
                    s.virt.iter(),
                    (v, NodeSet::from_ids(s.tree.iter().copied())),
                );
            }
        },
        |v, s, inbox| {
            if !s.alive {
                return;
            }
            if s.tree.is_empty() {
                s.parent = v;
                s.leaving = true;
                return;
            }
            let known: std::collections::HashMap<NodeId, &NodeSet> =
                inbox.iter().map(|(u, t)| (*u, t)).collect();
            let mut uncontained = Vec::new();
            let mut max_seen = (v, None);
            for &u in &s.tree {
                let mut seen = vec![u];
                let mut stack = vec![u];
                let mut contained = true;
                while let Some(x) = stack.pop() {
                    let Some(tx) = known.get(&x) else {
                        contained = false;
                        continue;
                    };
                    for y in tx.iter() {
                        if y == v || seen.contains(&y) {
                            continue;
                        }
                        if s.virt.contains(y) {
                            seen.push(y);
                            stack.push(y);
                        } else {
                            contained = false;
                        }
                    }
                }
                if !contained {
                    uncontained.push(u);
                }
                if let Some(&m) = seen.iter().max() {
                    if m > max_seen.0 {
                        max_seen = (m, Some(u));
                    }
                }
            }
            match uncontained.len() {
                1 => {
                    s.parent = uncontained[0];
                    s.leaving = true;
                }
                0 => {
                    s.parent = match max_seen.1 {
                        Some(side) => side,
                        None => *s.tree.iter().max().unwrap(),
                    };
                    s.leaving = true;
                }
                _ => {}
            }
        },
    )?;
    Ok(())
}

/// Fifth special round: leaving nodes tell their tree neighbors whom they
/// chose. Parents learn their children; of a mutual pair the higher ID
/// becomes the root.
fn resolve_round(states: &mut [State], sys: &mut System) -> Result<()> {
    sys.exec_round(
        states,
        |v, s, out| {
            if s.alive && s.leaving {
                out.multicast(s.tree.iter().copied(), (v, s.parent));
            }
        },
        |v, s, inbox| {
            if !s.alive {
                return;
            }
            for &(c, p) in inbox.iter() {
                if let Ok(i) = s.tree.binary_search(&c) {
                    s.tree.remove(i);
                }
                if p != v {
                    continue;
                }
                if s.leaving && s.parent == c {
                    if v > c {
                        s.parent = v;
                        s.children.push(c);
                    }
                } else {
                    s.children.push(c);
                }
            }
        },
    )?;
    Ok(())
}
