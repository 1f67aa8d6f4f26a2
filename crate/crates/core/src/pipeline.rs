//! The end-to-end MIS pipeline: high-degree cleanup passes, each running
//! shattering and post-shattering on the nodes of moderate degree.

use crate::error::{Error, Result};
use crate::gather::gather;
use crate::graph::Graph;
use crate::mpc::{AggregateOp, GatherMode, MpcConfig, System};
use crate::oracle;
use crate::report::{
    cleanup_threshold, pass_cap, phase_reports, round_totals, ConfigEcho, PassReport, RunReport,
    Verdicts,
};
use crate::rng::mix;
use crate::shatter::{live_degree, live_mask, measure, shatter, NodeStatus, ShatterParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PostShatter {
    pub components: u64,
    pub max_size: u64,
    pub gather_rounds: u64,
    pub ledgers: u64,
    pub budget_violations: u64,
}

/// Gathers every undecided component and solves it on its machine with the
/// ascending-ID greedy rule. Members end up on the same machine, so the
/// outcome needs no further messages inside the component.
pub fn post_shatter(
    g: &Graph,
    status: &mut [NodeStatus],
    mode: GatherMode,
    sys: &mut System,
) -> Result<PostShatter> {
    let live = live_mask(status);
    if !live.iter().any(|&l| l) {
        return Ok(PostShatter::default());
    }
    let summary = measure(g, &live);
    sys.charge_aggregate();
    let gathered = gather(mode, g, &live, summary.max_diam, sys)?;
    for (c, _) in gathered.map.components() {
        for &v in &c.members {
            let taken = g
                .neighbors(v)
                .iter()
                .any(|&u| live[u as usize] && status[u as usize] == NodeStatus::InMIS);
            status[v as usize] = if taken {
                NodeStatus::Removed
            } else {
                NodeStatus::InMIS
            };
        }
    }
    Ok(PostShatter {
        components: gathered.map.len() as u64,
        max_size: summary.max_size,
        gather_rounds: gathered.rounds,
        ledgers: gathered.ledger.is_some() as u64,
        budget_violations: gathered.ledger.map_or(0, |l| l.violations().len() as u64),
    })
}

/// A finished run: the independent set and its report.
#[derive(Debug, Clone)]
pub struct MisRun {
    pub mis: Vec<bool>,
    pub status: Vec<NodeStatus>,
    pub report: RunReport,
}

/// A run that stopped with an error. The report covers everything up to the
/// failure.
#[derive(Debug)]
pub struct Aborted {
    pub error: Error,
    pub report: Option<Box<RunReport>>,
}

impl std::fmt::Display for Aborted {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.error.fmt(f)
    }
}

impl std::error::Error for Aborted {}

struct Run<'a> {
    g: &'a Graph,
    cfg: &'a MpcConfig,
    params: ShatterParams,
    sys: System,
    status: Vec<NodeStatus>,
    passes: Vec<PassReport>,
    trace: Vec<crate::shatter::ShatterIteration>,
    gather_rounds: u64,
    ledgers: u64,
    budget_violations: u64,
}

/// Computes a maximal independent set of the forest `g` on the simulated
/// machines described by `cfg`. `cfg.n` must equal `g.n()`.
pub fn mis_tree(g: &Graph, cfg: &MpcConfig) -> Result<MisRun, Aborted> {
    let early = |error| Aborted {
        error,
        report: None,
    };
    if cfg.n != g.n() {
        return Err(early(Error::Config(format!(
            "configured n = {} but the graph has {} nodes",
            cfg.n,
            g.n()
        ))));
    }
    if !g.is_forest() {
        return Err(early(Error::NotAForest));
    }
    let params = ShatterParams::from_config(cfg);
    params.validate().map_err(early)?;
    cfg.validate().map_err(early)?;
    // The input starts out as an edge list spread over the machines; nodes
    // are placed with their adjacency once per pass, after cleanup.
    let words = 2 * g.m() as u64 + g.n() as u64;
    let sys = System::new(cfg.memory_per_machine(), cfg.machine_count(words));
    let mut run = Run {
        g,
        cfg,
        params,
        sys,
        status: vec![NodeStatus::Undecided; g.n()],
        passes: Vec::new(),
        trace: Vec::new(),
        gather_rounds: 0,
        ledgers: 0,
        budget_violations: 0,
    };
    let outcome = run.cleanup_passes();
    let report = run.report(outcome.as_ref().err());
    match outcome {
        Ok(()) => Ok(MisRun {
            mis: run.status.iter().map(|&s| s == NodeStatus::InMIS).collect(),
            status: run.status,
            report,
        }),
        Err(error) => Err(Aborted {
            error,
            report: Some(Box::new(report)),
        }),
    }
}

impl Run<'_> {
    fn cleanup_passes(&mut self) -> Result<()> {
        let g = self.g;
        let threshold = cleanup_threshold(self.cfg);
        let cap = pass_cap(self.cfg.eps);
        loop {
            let live = self.sys.global_aggregate(
                self.status.iter().filter(|s| s.is_live()).map(|_| 1),
                AggregateOp::Count,
            );
            if live == 0 {
                return Ok(());
            }
            let pass = self.passes.len() as u64 + 1;
            if pass > cap {
                return Err(Error::ScheduleOverflow {
                    phase: "high-degree cleanup".into(),
                    count: pass,
                    limit: cap,
                });
            }
            self.sys.begin_phase(format!("pass{pass}/cleanup"));
            let mut active = vec![false; g.n()];
            let mut ignored = 0;
            for v in g.nodes() {
                if !self.status[v as usize].is_live() {
                    continue;
                }
                if live_degree(g, &self.status, v) as f64 >= threshold {
                    self.status[v as usize] = NodeStatus::Ignored;
                    ignored += 1;
                } else {
                    active[v as usize] = true;
                }
            }
            let (h, old_of) = g.induced(&active);
            self.sys.place(&h)?;
            let mut params = self.params.clone();
            params.seed = mix(self.params.seed, pass);
            let mut sub = vec![NodeStatus::Undecided; h.n()];
            let shattered = shatter(&h, &mut sub, &params, pass as u32, &mut self.sys)?;
            self.sys.begin_phase(format!("pass{pass}/post-shatter"));
            let post = post_shatter(&h, &mut sub, self.cfg.mode, &mut self.sys)?;
            for (i, &s) in sub.iter().enumerate() {
                self.status[old_of[i] as usize] = s;
            }
            self.sys.begin_phase(format!("pass{pass}/notify"));
            self.notify_ignored();
            self.gather_rounds += post.gather_rounds;
            self.gather_rounds += shattered.trace.iter().map(|t| t.gather_rounds).sum::<u64>();
            self.ledgers += post.ledgers + shattered.trace.iter().map(|t| t.ledgers).sum::<u64>();
            self.budget_violations += post.budget_violations
                + shattered
                    .trace
                    .iter()
                    .map(|t| t.budget_violations)
                    .sum::<u64>();
            self.passes.push(PassReport {
                pass,
                live,
                ignored,
                degree_iterations: shattered.trace.len() as u64,
                local_iterations: shattered.local.iterations,
                local_retries: shattered.local_retries,
                first_remainder: shattered.first_max_component,
                remainder: shattered.max_component,
                remainder_guard: shattered.guard,
                post_components: post.components,
                post_gather_rounds: post.gather_rounds,
            });
            self.trace.extend(shattered.trace);
        }
    }

    /// Ignored nodes learn whether a neighbor joined; those that did not are
    /// live again. Charged as two accounting rounds (joins out, removals
    /// out) on the full graph.
    fn notify_ignored(&mut self) {
        let g = self.g;
        self.sys.accounting(|sys| sys.idle_rounds(2));
        for v in g.nodes() {
            if self.status[v as usize] != NodeStatus::Ignored {
                continue;
            }
            let hit = g
                .neighbors(v)
                .iter()
                .any(|&u| self.status[u as usize] == NodeStatus::InMIS);
            self.status[v as usize] = if hit {
                NodeStatus::Removed
            } else {
                NodeStatus::Undecided
            };
        }
    }

    fn report(&self, error: Option<&Error>) -> RunReport {
        let g = self.g;
        let mis: Vec<bool> = self
            .status
            .iter()
            .map(|&s| s == NodeStatus::InMIS)
            .collect();
        let independent = oracle::check_independent(g, &mis);
        let maximal = independent && oracle::check_maximal(g, &mis).unwrap_or(false);
        let complete = self
            .status
            .iter()
            .all(|&s| matches!(s, NodeStatus::InMIS | NodeStatus::Removed));
        let mut totals = round_totals(&self.sys);
        totals.gather_rounds = self.gather_rounds;
        totals.budget_ledgers = self.ledgers;
        totals.budget_violations = self.budget_violations;
        totals.shatter_iterations = self.trace.len() as u64;
        totals.local_iterations = self.passes.iter().map(|p| p.local_iterations).sum();
        totals.passes = self.passes.len() as u64;
        totals.mis_size = mis.iter().filter(|&&x| x).count() as u64;
        let verdicts = Verdicts {
            independent,
            maximal,
            memory: totals.memory_violations == 0,
            complete,
        };
        RunReport {
            config: ConfigEcho::new(
                self.cfg,
                &self.params,
                g.m(),
                g.max_degree(),
                self.sys.memory(),
                self.sys.machines(),
            ),
            phases: phase_reports(&self.sys),
            totals,
            verdicts,
            passes: self.passes.clone(),
            shatter: self.trace.clone(),
            error: error.map(|e| e.to_string()),
        }
    }
}
