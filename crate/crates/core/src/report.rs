//! Run reports: a deterministic JSON record of configuration, per-phase
//! round counts and memory peaks, the shatter trace and the verdicts.

use serde::Serialize;

use crate::mpc::{MpcConfig, RoundKind, System};
use crate::shatter::{ShatterIteration, ShatterParams};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub n: usize,
    pub m: usize,
    pub max_degree: usize,
    pub eps: f64,
    pub mode: String,
    pub seed: u64,
    pub c_s: f64,
    pub c_m: f64,
    pub c_size: f64,
    pub c_delta: f64,
    pub delta_prime: f64,
    pub stop_exponent: f64,
    pub c_gh: u64,
    pub c0: u64,
    pub max_retries: u32,
    #[serde(rename = "S")]
    pub s: u64,
    #[serde(rename = "M")]
    pub machines: usize,
    pub delta: f64,
    pub degree_floor: u64,
    pub size_guard: u64,
    pub k_post: u64,
    pub cleanup_threshold: f64,
    pub pass_cap: u64,
}

impl ConfigEcho {
    pub fn new(
        cfg: &MpcConfig,
        params: &ShatterParams,
        m: usize,
        max_degree: usize,
        s: u64,
        machines: usize,
    ) -> Self {
        ConfigEcho {
            n: cfg.n,
            m,
            max_degree,
            eps: cfg.eps,
            mode: cfg.mode.to_string(),
            seed: cfg.seed,
            c_s: cfg.c_s,
            c_m: cfg.c_m,
            c_size: cfg.c_size,
            c_delta: cfg.c_delta,
            delta_prime: cfg.delta_prime,
            stop_exponent: cfg.stop_exponent,
            c_gh: cfg.c_gh,
            c0: cfg.c0,
            max_retries: cfg.max_retries,
            s,
            machines,
            delta: params.delta,
            degree_floor: params.degree_floor,
            size_guard: params.size_guard,
            k_post: params.k_post,
            cleanup_threshold: cleanup_threshold(cfg),
            pass_cap: pass_cap(cfg.eps),
        }
    }
}

/// Nodes of live degree at least `n^(eps/2)` sit out a cleanup pass.
pub fn cleanup_threshold(cfg: &MpcConfig) -> f64 {
    (cfg.n as f64).powf(cfg.eps / 2.0)
}

/// `ceil(2/eps) + 2` cleanup passes at most.
pub fn pass_cap(eps: f64) -> u64 {
    (2.0 / eps).ceil() as u64 + 2
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhaseReport {
    pub name: String,
    pub rounds: u64,
    pub algorithm_rounds: u64,
    pub accounting_rounds: u64,
    pub max_sent: u64,
    pub max_recv: u64,
    pub max_traffic: u64,
    pub max_resident: u64,
    pub retries: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Totals {
    pub total_rounds: u64,
    pub algorithm_rounds: u64,
    pub accounting_rounds: u64,
    pub gather_rounds: u64,
    pub shatter_iterations: u64,
    pub local_iterations: u64,
    pub passes: u64,
    pub retries: u64,
    pub peak_sent: u64,
    pub peak_recv: u64,
    pub peak_traffic: u64,
    pub peak_resident: u64,
    pub memory_violations: u64,
    pub rebalanced_rounds: u64,
    /// In-space gatherings whose budget ledger was checked.
    pub budget_ledgers: u64,
    pub budget_violations: u64,
    pub mis_size: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Verdicts {
    pub independent: bool,
    pub maximal: bool,
    pub memory: bool,
    /// Every node ended InMIS or Removed.
    pub complete: bool,
}

impl Verdicts {
    pub fn pass(&self) -> bool {
        self.independent && self.maximal && self.memory && self.complete
    }
}

/// What happened in one cleanup pass.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PassReport {
    pub pass: u64,
    pub live: u64,
    pub ignored: u64,
    pub degree_iterations: u64,
    pub local_iterations: u64,
    pub local_retries: u32,
    pub first_remainder: u64,
    pub remainder: u64,
    pub remainder_guard: u64,
    pub post_components: u64,
    pub post_gather_rounds: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub config: ConfigEcho,
    pub phases: Vec<PhaseReport>,
    pub totals: Totals,
    pub verdicts: Verdicts,
    pub passes: Vec<PassReport>,
    pub shatter: Vec<ShatterIteration>,
    pub error: Option<String>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Per-phase summaries of the round log.
pub fn phase_reports(sys: &System) -> Vec<PhaseReport> {
    let mut out: Vec<PhaseReport> = sys
        .phases()
        .iter()
        .map(|p| PhaseReport {
            name: p.name.clone(),
            rounds: 0,
            algorithm_rounds: 0,
            accounting_rounds: 0,
            max_sent: 0,
            max_recv: 0,
            max_traffic: 0,
            max_resident: 0,
            retries: p.retries,
        })
        .collect();
    for st in sys.stats() {
        let p = &mut out[st.phase];
        p.rounds += 1;
        match st.kind {
            RoundKind::Algorithm => p.algorithm_rounds += 1,
            RoundKind::Accounting => p.accounting_rounds += 1,
        }
        p.max_sent = p.max_sent.max(st.max_sent);
        p.max_recv = p.max_recv.max(st.max_recv);
        p.max_traffic = p.max_traffic.max(st.max_traffic);
        p.max_resident = p.max_resident.max(st.max_resident);
    }
    out
}

/// Round and memory totals; `memory_violations` counts rounds over `S`.
pub fn round_totals(sys: &System) -> Totals {
    let s = sys.memory();
    let mut t = Totals::default();
    for st in sys.stats() {
        t.total_rounds += 1;
        match st.kind {
            RoundKind::Algorithm => t.algorithm_rounds += 1,
            RoundKind::Accounting => t.accounting_rounds += 1,
        }
        t.peak_sent = t.peak_sent.max(st.max_sent);
        t.peak_recv = t.peak_recv.max(st.max_recv);
        t.peak_traffic = t.peak_traffic.max(st.max_traffic);
        t.peak_resident = t.peak_resident.max(st.max_resident);
        t.memory_violations += (st.max_traffic > s || st.max_resident > s) as u64;
        t.rebalanced_rounds += st.rebalanced as u64;
    }
    t.retries = sys.phases().iter().map(|p| p.retries as u64).sum();
    t
}
