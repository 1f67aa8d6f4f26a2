//! Gathering connected components onto single machines.
//!
//! Two variants: [`naive_gather`] completes neighborhoods to cliques and
//! needs up to `k^3` words for a component of size `k`; [`in_space_gather`]
//! roots every tree with [`root_trees_budgeted`], finds roots by
//! [`point_to_root`] and stays within `O(n * d^3)` words in total.

mod components;
mod forwarding;
mod naive;
mod rooting;

pub use components::{
    assign_components, components_from_labels, relocate, Component, ComponentMap,
};
pub use forwarding::{point_to_root, Forwarded, ParentMap, NONE};
pub use naive::{naive_gather, NaiveComponentStats, NaiveGather};
pub use rooting::{root_trees_budgeted, BudgetLedger, PhaseBudget, Rooting};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::mpc::{GatherMode, System};

#[derive(Debug, Clone)]
pub struct InSpaceGather {
    pub map: ComponentMap,
    pub rooting: Rooting,
    pub forwarding_rounds: u64,
    pub move_rounds: u64,
}

impl InSpaceGather {
    pub fn rounds(&self) -> u64 {
        self.rooting.rounds + self.forwarding_rounds
    }
}

/// Roots the forest induced by `live` with budget `d^3`, determines each
/// node's root and moves every tree onto one machine, keyed by its root.
pub fn in_space_gather(
    g: &Graph,
    live: &[bool],
    d: u64,
    sys: &mut System,
) -> Result<InSpaceGather> {
    let live_n = live.iter().filter(|&&l| l).count() as u128;
    let b = d.checked_pow(3).ok_or(Error::BudgetArithmeticOverflow)?;
    let needed = live_n * b as u128;
    let available = sys.memory() as u128 * sys.machines() as u128;
    if needed > available {
        return Err(Error::TotalMemoryInfeasible { needed, available });
    }
    let rooting = root_trees_budgeted(g, live, b, d, sys)?;
    let base: Vec<u64> = g.nodes().map(|v| 1 + g.degree(v) as u64).collect();
    let fwd = point_to_root(&rooting.parents, &base, sys)?;
    let comps = components_from_labels(g, live, &fwd.root);
    let map = assign_components(g.n(), comps, sys)?;
    let move_rounds = relocate(&map, sys)?;
    Ok(InSpaceGather {
        map,
        rooting,
        forwarding_rounds: fwd.rounds,
        move_rounds,
    })
}

/// Result of either gathering variant, reduced to what callers of the
/// pipeline need.
#[derive(Debug, Clone)]
pub struct Gathered {
    pub map: ComponentMap,
    /// Algorithm rounds of the gathering itself.
    pub rounds: u64,
    pub ledger: Option<BudgetLedger>,
}

/// Gathers with the configured variant. `d` bounds the diameter of every
/// component and is only used by the in-space variant.
pub fn gather(
    mode: GatherMode,
    g: &Graph,
    live: &[bool],
    d: u64,
    sys: &mut System,
) -> Result<Gathered> {
    Ok(match mode {
        GatherMode::Naive => {
            let out = naive_gather(g, live, sys)?;
            Gathered {
                map: out.map,
                rounds: out.rounds,
                ledger: None,
            }
        }
        GatherMode::InSpace => {
            let out = in_space_gather(g, live, d, sys)?;
            Gathered {
                rounds: out.rounds(),
                map: out.map,
                ledger: Some(out.rooting.ledger),
            }
        }
    })
}

/// Leader per node as a dense vector ([`NONE`] for nodes outside `live`).
pub fn leader_vector(map: &ComponentMap) -> Vec<NodeId> {
    map.leaders().iter().map(|l| l.unwrap_or(NONE)).collect()
}
