use std::collections::VecDeque;

use crate::error::{Error, GuardKind, Result};
use crate::gather::gather;
use crate::graph::Graph;
use crate::mpc::{GatherMode, System};
use crate::rng::{draw, unit, Stream};

use super::{
    commit_joins, max_live_degree, measure, ComponentSummary, NodeStatus, ShatterIteration,
    ShatterParams,
};

/// Samples every live node independently with probability `Delta^-delta`.
/// The decision for `v` depends only on `(seed, v, iteration)`.
pub fn subsample(
    live: &[bool],
    delta: f64,
    max_degree: u64,
    seed: u64,
    iteration: u64,
) -> Vec<bool> {
    let p = (max_degree.max(1) as f64).powf(-delta);
    live.iter()
        .enumerate()
        .map(|(v, &l)| l && unit(seed, Stream::Subsample, v as u64, iteration) < p)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConquerOutcome {
    pub components: u64,
    pub joined: u64,
    pub gather_rounds: u64,
    /// Budget ledgers checked (in-space gathering only) and their violations.
    pub ledgers: u64,
    pub budget_violations: u64,
}

/// Gathers the components of the sampled forest, 2-colors each from its
/// leader and lets a fair per-component coin pick the color class that
/// joins. One-node components always join. Neighbors of joined nodes are
/// removed.
#[allow(clippy::too_many_arguments)]
pub fn conquer(
    g: &Graph,
    sampled: &[bool],
    status: &mut [NodeStatus],
    d: u64,
    mode: GatherMode,
    seed: u64,
    iteration: u64,
    sys: &mut System,
) -> Result<ConquerOutcome> {
    let gathered = gather(mode, g, sampled, d, sys)?;
    let mut joined = vec![false; g.n()];
    let mut color = vec![u8::MAX; g.n()];
    let mut q = VecDeque::new();
    for (c, _) in gathered.map.components() {
        if c.members.len() == 1 {
            joined[c.leader as usize] = true;
            continue;
        }
        let coin = (draw(seed, Stream::Coin, c.leader as u64, iteration) & 1) as u8;
        color[c.leader as usize] = 0;
        q.push_back(c.leader);
        while let Some(u) = q.pop_front() {
            joined[u as usize] = color[u as usize] == coin;
            for &w in g.neighbors(u) {
                if sampled[w as usize] && color[w as usize] == u8::MAX {
                    color[w as usize] = color[u as usize] ^ 1;
                    q.push_back(w);
                }
            }
        }
    }
    let count = joined.iter().filter(|&&j| j).count() as u64;
    commit_joins(g, status, &joined, sys)?;
    Ok(ConquerOutcome {
        components: gathered.map.len() as u64,
        joined: count,
        gather_rounds: gathered.rounds,
        ledgers: gathered.ledger.is_some() as u64,
        budget_violations: gathered.ledger.map_or(0, |l| l.violations().len() as u64),
    })
}

/// One subsample-and-conquer step at current live maximum degree
/// `max_degree`. Samples violating the size or diameter guard are redrawn
/// with a fresh seed, at most `max_retries` times.
pub fn degree_reduce_step(
    g: &Graph,
    status: &mut [NodeStatus],
    params: &ShatterParams,
    iteration: u64,
    max_degree: u64,
    sys: &mut System,
) -> Result<ShatterIteration> {
    let live = super::live_mask(status);
    let diam_guard = params.diam_guard(max_degree);
    for attempt in 0..=params.max_retries {
        if attempt > 0 {
            sys.note_retry();
        }
        let seed = params.attempt_seed(0x5a3e, attempt);
        let sampled = subsample(&live, params.delta, max_degree, seed, iteration);
        let summary = measure(g, &sampled);
        sys.charge_aggregate();
        match check_guards(summary, params.size_guard, diam_guard) {
            Err(Error::GuardViolated { .. }) => continue,
            other => other?,
        }
        let won = conquer(
            g,
            &sampled,
            status,
            summary.max_diam,
            params.mode,
            seed,
            iteration,
            sys,
        )?;
        let after = max_live_degree(g, status, sys);
        return Ok(ShatterIteration {
            pass: 0,
            iteration,
            delta_before: max_degree,
            delta_after: after,
            sampled: sampled.iter().filter(|&&s| s).count() as u64,
            components: summary.count,
            max_comp_size: summary.max_size,
            max_comp_diam: summary.max_diam,
            retries: attempt,
            gather_rounds: won.gather_rounds,
            ledgers: won.ledgers,
            budget_violations: won.budget_violations,
        });
    }
    Err(Error::RetriesExhausted {
        phase: "degree reduction".into(),
        attempts: params.max_retries + 1,
    })
}

fn check_guards(s: ComponentSummary, size_guard: u64, diam_guard: u64) -> Result<()> {
    if s.max_size > size_guard {
        return Err(Error::GuardViolated {
            kind: GuardKind::Size,
            value: s.max_size,
            limit: size_guard,
        });
    }
    if s.max_diam > diam_guard {
        return Err(Error::GuardViolated {
            kind: GuardKind::Diameter,
            value: s.max_diam,
            limit: diam_guard,
        });
    }
    Ok(())
}

/// Independent set check restricted to one status vector.
#[cfg(test)]
pub(crate) fn statuses_consistent(g: &Graph, status: &[NodeStatus]) -> bool {
    let ok_edges = g.edges().all(|(u, v)| {
        !(status[u as usize] == NodeStatus::InMIS && status[v as usize] == NodeStatus::InMIS)
    });
    let ok_removed = g.nodes().all(|v| {
        status[v as usize] != NodeStatus::Removed
            || g.neighbors(v)
                .iter()
                .any(|&u| status[u as usize] == NodeStatus::InMIS)
    });
    ok_edges && ok_removed
}
