use std::io::Write;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::mpc::placement::first_fit_decreasing_into;
use crate::mpc::System;

/// A labeled component: its leader (minimum ID or elected root), members in
/// ascending order and its size in words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub leader: NodeId,
    pub members: Vec<NodeId>,
    pub words: u64,
}

/// Leader and hosting machine per node; nodes outside every component map
/// to `None`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ComponentMap {
    leader: Vec<Option<NodeId>>,
    machine: Vec<Option<u32>>,
    components: Vec<(Component, u32)>,
}

impl ComponentMap {
    pub fn leader_of(&self, v: NodeId) -> Option<NodeId> {
        self.leader[v as usize]
    }

    pub fn machine_of(&self, v: NodeId) -> Option<usize> {
        self.machine[v as usize].map(|m| m as usize)
    }

    pub fn leaders(&self) -> &[Option<NodeId>] {
        &self.leader
    }

    /// Components with the machine each was assigned to, by ascending leader.
    pub fn components(&self) -> impl Iterator<Item = (&Component, usize)> {
        self.components.iter().map(|(c, m)| (c, *m as usize))
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Writes lines `node root machine` in node order.
    pub fn dump(&self, mut w: impl Write) -> Result<()> {
        for (v, (l, m)) in self.leader.iter().zip(&self.machine).enumerate() {
            if let (Some(l), Some(m)) = (l, m) {
                writeln!(w, "{v} {l} {m}")?;
            }
        }
        Ok(())
    }
}

/// Groups live nodes by label. A component's size is its member count plus
/// twice its internal edge count.
pub fn components_from_labels(g: &Graph, live: &[bool], label: &[NodeId]) -> Vec<Component> {
    let mut members: Vec<(NodeId, NodeId)> = g
        .nodes()
        .filter(|&v| live[v as usize])
        .map(|v| (label[v as usize], v))
        .collect();
    members.sort_unstable();
    let mut out: Vec<Component> = Vec::new();
    for (l, v) in members {
        let deg = g.neighbors(v).iter().filter(|&&u| live[u as usize]).count() as u64;
        match out.last_mut() {
            Some(c) if c.leader == l => {
                c.members.push(v);
                c.words += 1 + deg;
            }
            _ => out.push(Component {
                leader: l,
                members: vec![v],
                words: 1 + deg,
            }),
        }
    }
    out
}

/// First-fit-decreasing assignment of whole components to machines, using
/// the room each machine has left besides the nodes that stay put.
pub fn assign_components(
    n: usize,
    components: Vec<Component>,
    sys: &System,
) -> Result<ComponentMap> {
    let s = sys.memory();
    if let Some(c) = components.iter().find(|c| c.words > s) {
        return Err(Error::ComponentTooLarge {
            leader: c.leader,
            words: c.words,
            cap: s,
        });
    }
    let held = |v: NodeId| sys.node_resident().get(v as usize).copied().unwrap_or(0);
    let mut free = vec![s; sys.machines()];
    let mut moving = vec![false; n];
    for c in &components {
        for &v in &c.members {
            moving[v as usize] = true;
        }
    }
    for (v, &w) in sys.node_resident().iter().enumerate() {
        if !moving[v] {
            let m = sys.machine_of(v as NodeId);
            free[m] = free[m].saturating_sub(w);
        }
    }
    let sizes: Vec<u64> = components
        .iter()
        .map(|c| c.members.iter().map(|&v| held(v).max(1)).sum())
        .collect();
    let machines = first_fit_decreasing_into(&sizes, &free).map_err(|i| {
        Error::PlacementInfeasible(format!(
            "component led by {} ({} words) does not fit on any machine",
            components[i].leader, components[i].words
        ))
    })?;
    let mut map = ComponentMap {
        leader: vec![None; n],
        machine: vec![None; n],
        components: Vec::with_capacity(components.len()),
    };
    for (c, m) in components.into_iter().zip(machines) {
        for &v in &c.members {
            map.leader[v as usize] = Some(c.leader);
            map.machine[v as usize] = Some(m as u32);
        }
        map.components.push((c, m as u32));
    }
    Ok(map)
}

/// Moves every component member to its assigned machine; returns the rounds
/// charged for the shuffle.
pub fn relocate(map: &ComponentMap, sys: &mut System) -> Result<u64> {
    let held = sys.node_resident();
    let moves: Vec<(NodeId, usize, u64)> = map
        .components()
        .flat_map(|(c, m)| c.members.iter().map(move |&v| (v, m)))
        .map(|(v, m)| (v, m, held.get(v as usize).copied().unwrap_or(1).max(1)))
        .collect();
    sys.accounting(|sys| sys.move_nodes(&moves))
}
