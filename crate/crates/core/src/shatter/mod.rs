//! Shattering: iterated subsample-and-conquer degree reduction followed by
//! low-degree local shattering with desire levels.

mod desire;
mod sample;

pub use desire::{local_shatter, DesireState, LocalShatter};
pub use sample::{conquer, degree_reduce_step, subsample, ConquerOutcome};

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::mpc::{AggregateOp, GatherMode, MpcConfig, NodeState, System};
use crate::rng::{mix, reseed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeStatus {
    Undecided,
    InMIS,
    Removed,
    Ignored,
}

impl NodeStatus {
    pub fn is_live(self) -> bool {
        self == NodeStatus::Undecided
    }
}

/// Tunables of the shattering phase. All fields are public so experiments
/// can override the defaults from [`ShatterParams::from_config`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShatterParams {
    /// Node count the polylog thresholds are computed from.
    pub n: usize,
    pub eps: f64,
    /// Sampling exponent: nodes are sampled with probability `Delta^-delta`.
    pub delta: f64,
    pub delta_prime: f64,
    /// Degree reduction stops once the live maximum degree drops below this.
    pub degree_floor: u64,
    /// Largest sampled component accepted without resampling.
    pub size_guard: u64,
    /// Target bound on undecided components after local shattering.
    pub k_post: u64,
    pub c_gh: u64,
    pub c0: u64,
    /// Slack on top of the iteration bound before degree reduction gives up.
    pub c_iter: u64,
    pub max_retries: u32,
    pub seed: u64,
    pub mode: GatherMode,
}

fn log2(x: f64) -> f64 {
    x.max(1.0).log2()
}

impl ShatterParams {
    pub fn from_config(cfg: &MpcConfig) -> Self {
        let n = cfg.n as f64;
        ShatterParams {
            n: cfg.n,
            eps: cfg.eps,
            delta: cfg.delta(),
            delta_prime: cfg.delta_prime,
            degree_floor: (log2(n).powf(cfg.stop_exponent).ceil() as u64).max(2),
            size_guard: (cfg.c_size * n.powf(cfg.eps / 3.0)).ceil() as u64,
            k_post: (log2(n).powi(4).ceil() as u64).max(1),
            c_gh: cfg.c_gh,
            c0: cfg.c0,
            c_iter: 4,
            max_retries: cfg.max_retries,
            seed: cfg.seed,
            mode: cfg.mode,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        if self.delta_prime <= 0.0
            || self.delta_prime.is_nan()
            || (1.0 + self.delta_prime) * self.delta >= 1.0
        {
            return Err(Error::Config(format!(
                "need delta' > 0 and (1 + delta') * delta < 1, got delta' = {}, delta = {}",
                self.delta_prime, self.delta
            )));
        }
        Ok(())
    }

    /// Sampling probability `Delta^-delta`.
    pub fn sample_probability(&self, max_degree: u64) -> f64 {
        (max_degree.max(1) as f64).powf(-self.delta)
    }

    /// `ceil(8 log n / (delta log Delta)) + 4`.
    pub fn diam_guard(&self, max_degree: u64) -> u64 {
        let ld = (max_degree.max(2) as f64).ln();
        (8.0 * (self.n.max(2) as f64).ln() / (self.delta * ld)).ceil() as u64 + 4
    }

    /// Degree bound `Delta^((1 + delta') delta)` promised after one step.
    pub fn degree_target(&self, max_degree: u64) -> f64 {
        (max_degree as f64).powf((1.0 + self.delta_prime) * self.delta)
    }

    /// Iteration budget `ceil(log_{1+eps} log Delta) + c_iter`.
    pub fn iteration_bound(&self, max_degree: u64) -> u64 {
        let ll = log2(log2(max_degree as f64));
        (ll / (1.0 + self.eps).log2()).ceil() as u64 + self.c_iter
    }

    /// Local shattering runs `c_gh * ceil(log2 Delta') + c0` iterations.
    pub fn local_iterations(&self, max_degree: u64) -> u64 {
        self.c_gh * log2(max_degree as f64).ceil() as u64 + self.c0
    }

    /// Largest remainder component accepted after local shattering: `k_post`,
    /// lowered to what one machine can gather (`2k^2 <= S`).
    pub fn post_guard(&self, s: u64) -> u64 {
        let mem = ((s / 2) as f64).sqrt().floor() as u64;
        self.k_post.min(mem.max(1))
    }

    /// Seed of a given retry attempt within stage `tag`.
    pub(crate) fn attempt_seed(&self, tag: u64, attempt: u32) -> u64 {
        reseed(mix(self.seed, tag), attempt as u64)
    }
}

/// One line of the shatter trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShatterIteration {
    pub pass: u32,
    pub iteration: u64,
    #[serde(rename = "Delta_before")]
    pub delta_before: u64,
    #[serde(rename = "Delta_after")]
    pub delta_after: u64,
    pub sampled: u64,
    pub components: u64,
    pub max_comp_size: u64,
    pub max_comp_diam: u64,
    pub retries: u32,
    pub gather_rounds: u64,
    pub ledgers: u64,
    pub budget_violations: u64,
}

/// Size and diameter extremes of the components of a masked subgraph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ComponentSummary {
    pub count: u64,
    pub max_size: u64,
    pub max_diam: u64,
}

/// Measures the forest induced by `live` by BFS. This is a monitor: its
/// verdict reaches the nodes through one charged aggregate.
pub fn measure(g: &Graph, live: &[bool]) -> ComponentSummary {
    let mut dist = vec![u32::MAX; g.n()];
    let mut done = vec![false; g.n()];
    let mut out = ComponentSummary::default();
    let mut q = VecDeque::new();
    let mut bfs = |s: NodeId, dist: &mut [u32]| -> (Vec<NodeId>, NodeId, u32) {
        let mut order = vec![s];
        dist[s as usize] = 0;
        q.push_back(s);
        while let Some(u) = q.pop_front() {
            for &w in g.neighbors(u) {
                if live[w as usize] && dist[w as usize] == u32::MAX {
                    dist[w as usize] = dist[u as usize] + 1;
                    order.push(w);
                    q.push_back(w);
                }
            }
        }
        let far = *order.iter().max_by_key(|&&x| dist[x as usize]).unwrap();
        let ecc = dist[far as usize];
        (order, far, ecc)
    };
    for s in g.nodes() {
        if !live[s as usize] || done[s as usize] {
            continue;
        }
        let (order, far, _) = bfs(s, &mut dist);
        for &x in &order {
            done[x as usize] = true;
            dist[x as usize] = u32::MAX;
        }
        let (again, _, diam) = bfs(far, &mut dist);
        for &x in &again {
            dist[x as usize] = u32::MAX;
        }
        out.count += 1;
        out.max_size = out.max_size.max(order.len() as u64);
        out.max_diam = out.max_diam.max(diam as u64);
    }
    out
}

pub fn live_mask(status: &[NodeStatus]) -> Vec<bool> {
    status.iter().map(|s| s.is_live()).collect()
}

pub fn live_degree(g: &Graph, status: &[NodeStatus], v: NodeId) -> u64 {
    g.neighbors(v)
        .iter()
        .filter(|&&u| status[u as usize].is_live())
        .count() as u64
}

/// Maximum live degree, obtained by a global aggregate.
pub fn max_live_degree(g: &Graph, status: &[NodeStatus], sys: &mut System) -> u64 {
    let degrees = g
        .nodes()
        .filter(|&v| status[v as usize].is_live())
        .map(|v| live_degree(g, status, v));
    sys.global_aggregate(degrees, AggregateOp::Max)
}

struct Cell {
    base: u64,
    status: NodeStatus,
    joined: bool,
    hit: bool,
}

impl NodeState for Cell {
    fn resident_words(&self) -> u64 {
        self.base + 1
    }
}

/// Commits `joined` nodes to the independent set: they tell their
/// neighbors, who drop out, and the dropped nodes tell theirs. Two rounds.
pub(crate) fn commit_joins(
    g: &Graph,
    status: &mut [NodeStatus],
    joined: &[bool],
    sys: &mut System,
) -> Result<u64> {
    let mut cells: Vec<Cell> = g
        .nodes()
        .map(|v| Cell {
            base: 1 + g.degree(v) as u64,
            status: status[v as usize],
            joined: joined[v as usize],
            hit: false,
        })
        .collect();
    sys.exec_round(
        &mut cells,
        |v, c, out| {
            if c.joined {
                out.multicast(g.neighbors(v).iter().copied(), ());
            }
        },
        |_, c, inbox| {
            if c.joined {
                c.status = NodeStatus::InMIS;
            } else if !inbox.is_empty() && c.status.is_live() {
                c.status = NodeStatus::Removed;
                c.hit = true;
            }
        },
    )?;
    sys.exec_round(
        &mut cells,
        |v, c, out| {
            if c.hit {
                out.multicast(g.neighbors(v).iter().copied(), ());
            }
        },
        |_, _, _| {},
    )?;
    for (s, c) in status.iter_mut().zip(cells) {
        *s = c.status;
    }
    Ok(2)
}

/// Outcome of [`iterated_degree_reduce`] and [`local_shatter`] together.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShatterOutcome {
    pub trace: Vec<ShatterIteration>,
    pub local: LocalShatter,
    /// Largest undecided component after the first local-shattering attempt.
    pub first_max_component: u64,
    /// Largest undecided component that was finally accepted.
    pub max_component: u64,
    pub local_retries: u32,
    pub guard: u64,
}

/// Repeats [`degree_reduce_step`] until the live maximum degree drops below
/// the floor.
pub fn iterated_degree_reduce(
    g: &Graph,
    status: &mut [NodeStatus],
    params: &ShatterParams,
    pass: u32,
    sys: &mut System,
) -> Result<Vec<ShatterIteration>> {
    let mut trace = Vec::new();
    let mut delta = max_live_degree(g, status, sys);
    let limit = 2 * params.iteration_bound(delta) + params.c_iter;
    while delta >= params.degree_floor {
        let it = trace.len() as u64;
        if it == limit {
            return Err(Error::ScheduleOverflow {
                phase: "degree reduction".into(),
                count: it + 1,
                limit,
            });
        }
        let mut rec = degree_reduce_step(g, status, params, it, delta, sys)?;
        rec.pass = pass;
        delta = rec.delta_after;
        trace.push(rec);
    }
    Ok(trace)
}

/// Degree reduction followed by local shattering. Local shattering is
/// retried from the same starting point with a fresh seed while the largest
/// undecided component exceeds [`ShatterParams::post_guard`].
pub fn shatter(
    g: &Graph,
    status: &mut [NodeStatus],
    params: &ShatterParams,
    pass: u32,
    sys: &mut System,
) -> Result<ShatterOutcome> {
    params.validate()?;
    sys.begin_phase(format!("pass{pass}/degree-reduction"));
    let trace = iterated_degree_reduce(g, status, params, pass, sys)?;
    sys.begin_phase(format!("pass{pass}/local-shatter"));
    let guard = params.post_guard(sys.memory());
    let start = status.to_vec();
    let mut first = None;
    for attempt in 0..=params.max_retries {
        if attempt > 0 {
            sys.note_retry();
            status.copy_from_slice(&start);
        }
        let seed = params.attempt_seed(0x10ca1 + pass as u64, attempt);
        let local = local_shatter(g, status, params, seed, sys)?;
        let summary = measure(g, &live_mask(status));
        sys.charge_aggregate();
        first.get_or_insert(summary.max_size);
        if summary.max_size <= guard {
            return Ok(ShatterOutcome {
                trace,
                local,
                first_max_component: first.unwrap_or(0),
                max_component: summary.max_size,
                local_retries: attempt,
                guard,
            });
        }
    }
    Err(Error::RetriesExhausted {
        phase: "local shattering".into(),
        attempts: params.max_retries + 1,
    })
}
