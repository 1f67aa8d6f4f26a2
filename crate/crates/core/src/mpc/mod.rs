//! Round-based simulation of the low-memory MPC model.
//!
//! Node programs run inside [`System::exec_round`]: every node emits
//! messages, the shuffle delivers them (collapsing identical copies per
//! destination), and every node consumes its inbox. Words sent, received and
//! resident are charged to the machine hosting each node and checked
//! against the per-machine cap `S` at every round boundary.

mod aggregate;
pub(crate) mod placement;

use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, MemoryKind, Result};
use crate::graph::{Graph, NodeId};
use crate::nodeset::NodeSet;
use placement::{first_fit_decreasing, FirstFit2};

pub use aggregate::AggregateOp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GatherMode {
    Naive,
    InSpace,
}

impl FromStr for GatherMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "naive" => Ok(GatherMode::Naive),
            "inspace" | "in-space" | "in_space" => Ok(GatherMode::InSpace),
            _ => Err(Error::Config(format!(
                "unknown mode '{s}' (expected naive or inspace)"
            ))),
        }
    }
}

impl std::fmt::Display for GatherMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GatherMode::Naive => "naive",
            GatherMode::InSpace => "inspace",
        })
    }
}

/// Model and algorithm parameters of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MpcConfig {
    pub n: usize,
    /// Memory exponent, in `(0, 1]`.
    pub eps: f64,
    pub c_s: f64,
    pub c_m: f64,
    /// Factor in front of the sampled-component size guard `n^(eps/3)`.
    pub c_size: f64,
    /// Sampling exponent is `c_delta / (1 + eps)`.
    pub c_delta: f64,
    pub mode: GatherMode,
    pub seed: u64,
    pub max_retries: u32,
    pub delta_prime: f64,
    /// Exponent `c` of the degree floor `log^c n`.
    pub stop_exponent: f64,
    /// Local shattering runs `c_gh * ceil(log2 Delta') + c0` iterations.
    pub c_gh: u64,
    pub c0: u64,
}

/// Total memory is provisioned at this multiple of the input size so that
/// balanced placements leave room for per-round traffic.
pub const HEADROOM: u64 = 4;

impl MpcConfig {
    pub fn new(n: usize, eps: f64, mode: GatherMode, seed: u64) -> Self {
        MpcConfig {
            n,
            eps,
            c_s: 8.0,
            c_m: 1.0,
            c_size: 4.0,
            c_delta: 0.9,
            mode,
            seed,
            max_retries: 10,
            delta_prime: eps / 2.0,
            stop_exponent: 3.0,
            c_gh: 8,
            c0: 20,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n == 0 {
            return bad("n must be at least 1".into());
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return bad(format!("eps must lie in (0, 1], got {}", self.eps));
        }
        if [self.c_s, self.c_m, self.c_size]
            .iter()
            .any(|c| !(c.is_finite() && *c > 0.0))
        {
            return bad("c_S, c_M and the size-guard factor must be positive".into());
        }
        if !(self.delta_prime.is_finite() && self.delta_prime > 0.0) {
            return bad(format!("delta' must be positive, got {}", self.delta_prime));
        }
        let delta = self.delta();
        if !(delta > 0.0 && delta < 1.0) {
            return bad(format!("sampling exponent must lie in (0, 1), got {delta}"));
        }
        if (1.0 + self.delta_prime) * delta >= 1.0 {
            return bad(format!(
                "delta' = {} too large: (1 + delta') * delta must stay below 1 (delta = {delta})",
                self.delta_prime
            ));
        }
        if !(self.stop_exponent.is_finite() && self.stop_exponent > 0.0) {
            return bad("stop exponent must be positive".into());
        }
        Ok(())
    }

    /// Sampling exponent of degree reduction.
    pub fn delta(&self) -> f64 {
        self.c_delta / (1.0 + self.eps)
    }

    /// `S = ceil(c_S * n^eps)` words, at least 2.
    pub fn memory_per_machine(&self) -> u64 {
        ((self.c_s * (self.n as f64).powf(self.eps)).ceil() as u64).max(2)
    }

    /// Machine count for the configured mode, raised if needed so that
    /// `M * S >= HEADROOM * input_words`.
    pub fn machine_count(&self, input_words: u64) -> usize {
        let n = self.n as f64;
        let exponent = match self.mode {
            GatherMode::Naive => 1.0 - self.eps / 3.0,
            GatherMode::InSpace => 1.0 - self.eps,
        };
        let base = (self.c_m * n.powf(exponent)).ceil() as u64;
        let s = self.memory_per_machine();
        let floor = (HEADROOM * input_words).div_ceil(s);
        base.max(floor).max(1) as usize
    }
}

/// A message body. `words` is its size in the memory accounting.
pub trait Payload: Ord + Send + Sync {
    fn words(&self) -> u64;
}

impl Payload for () {
    fn words(&self) -> u64 {
        1
    }
}

impl Payload for u32 {
    fn words(&self) -> u64 {
        1
    }
}

impl Payload for u64 {
    fn words(&self) -> u64 {
        1
    }
}

impl Payload for (u32, u32, u32) {
    fn words(&self) -> u64 {
        3
    }
}

impl Payload for NodeSet {
    fn words(&self) -> u64 {
        self.len().max(1) as u64
    }
}

impl<A: Payload, B: Payload> Payload for (A, B) {
    fn words(&self) -> u64 {
        self.0.words() + self.1.words()
    }
}

/// Per-node state whose size counts against its machine's memory.
pub trait NodeState: Send {
    fn resident_words(&self) -> u64;
}

/// Message buffer handed to a node during the emit step.
pub struct Outbox<'a, P> {
    payloads: &'a mut Vec<P>,
    sends: &'a mut Vec<(NodeId, u32)>,
    words: u64,
}

impl<P: Payload> Outbox<'_, P> {
    pub fn send(&mut self, dst: NodeId, payload: P) {
        self.words += payload.words();
        self.sends.push((dst, self.payloads.len() as u32));
        self.payloads.push(payload);
    }

    /// Sends one payload to several destinations; each copy is charged.
    pub fn multicast(&mut self, dsts: impl IntoIterator<Item = NodeId>, payload: P) {
        let idx = self.payloads.len() as u32;
        let w = payload.words();
        let before = self.sends.len();
        self.sends.extend(dsts.into_iter().map(|d| (d, idx)));
        let copies = (self.sends.len() - before) as u64;
        if copies > 0 {
            self.words += w * copies;
            self.payloads.push(payload);
        }
    }
}

/// Deduplicated messages delivered to one node, in sender order.
pub struct Inbox<'a, P> {
    idx: &'a [u32],
    all: &'a [P],
}

impl<'a, P> Inbox<'a, P> {
    pub fn len(&self) -> usize {
        self.idx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idx.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &'a P> + 'a {
        let all = self.all;
        self.idx.iter().map(move |&i| &all[i as usize])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RoundKind {
    /// A round of the algorithm proper.
    Algorithm,
    /// Bookkeeping: global aggregates, notifications, component moves.
    Accounting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RoundStats {
    pub round_index: u64,
    pub phase: usize,
    pub kind: RoundKind,
    pub max_sent: u64,
    pub max_recv: u64,
    /// Largest `sent + recv` over machines; this is what is capped by `S`.
    pub max_traffic: u64,
    pub max_resident: u64,
    pub messages: u64,
    /// The placement was repacked to absorb an overflow.
    pub rebalanced: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Phase {
    pub name: String,
    pub retries: u32,
}

/// Machines, placement and the round log.
#[derive(Debug, Clone)]
pub struct System {
    s: u64,
    m: usize,
    placement: Vec<u32>,
    resident: Vec<u64>,
    node_resident: Vec<u64>,
    stats: Vec<RoundStats>,
    phases: Vec<Phase>,
    kind: RoundKind,
}

const SERIAL_BELOW: usize = 4096;
const CHUNK: usize = 2048;

struct Emitted<P> {
    payloads: Vec<P>,
    sends: Vec<(NodeId, u32)>,
    sent: Vec<u64>,
}

/// Builds machines for `config` and places `graph` on them.
pub fn build_system(config: &MpcConfig, graph: &Graph) -> Result<System> {
    config.validate()?;
    let words = 2 * graph.m() as u64 + graph.n() as u64;
    let mut sys = System::new(config.memory_per_machine(), config.machine_count(words));
    sys.place(graph)?;
    Ok(sys)
}

impl System {
    pub fn new(s: u64, m: usize) -> Self {
        System {
            s,
            m: m.max(1),
            placement: Vec::new(),
            resident: vec![0; m.max(1)],
            node_resident: Vec::new(),
            stats: Vec::new(),
            phases: vec![Phase {
                name: "setup".into(),
                retries: 0,
            }],
            kind: RoundKind::Algorithm,
        }
    }

    pub fn memory(&self) -> u64 {
        self.s
    }

    pub fn machines(&self) -> usize {
        self.m
    }

    pub fn machine_of(&self, v: NodeId) -> usize {
        self.placement[v as usize] as usize
    }

    /// Words held by each node as of the last round.
    pub fn node_resident(&self) -> &[u64] {
        &self.node_resident
    }

    pub fn resident(&self) -> &[u64] {
        &self.resident
    }

    pub fn stats(&self) -> &[RoundStats] {
        &self.stats
    }

    pub fn round_index(&self) -> u64 {
        self.stats.len() as u64
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    pub fn current_phase(&self) -> usize {
        self.phases.len() - 1
    }

    pub fn begin_phase(&mut self, name: impl Into<String>) {
        self.phases.push(Phase {
            name: name.into(),
            retries: 0,
        });
    }

    pub fn note_retry(&mut self) {
        self.phases.last_mut().unwrap().retries += 1;
    }

    /// Runs `f` with rounds recorded as accounting rounds.
    pub fn accounting<T>(&mut self, f: impl FnOnce(&mut Self) -> T) -> T {
        let prev = std::mem::replace(&mut self.kind, RoundKind::Accounting);
        let out = f(self);
        self.kind = prev;
        out
    }

    /// Places every node together with its adjacency list (`1 + deg` words).
    pub fn place(&mut self, graph: &Graph) -> Result<()> {
        let w: Vec<u64> = graph.nodes().map(|v| 1 + graph.degree(v) as u64).collect();
        self.place_weights(&w)
    }

    /// Contiguous balanced packing of per-node footprints; falls back to
    /// first-fit decreasing when contiguity cannot be kept within `S`.
    pub fn place_weights(&mut self, w: &[u64]) -> Result<()> {
        let (s, m) = (self.s, self.m);
        if let Some((v, &big)) = w.iter().enumerate().find(|(_, &x)| x > s) {
            return Err(Error::PlacementInfeasible(format!(
                "node {v} needs {big} words, more than S = {s}"
            )));
        }
        let total: u64 = w.iter().sum();
        if total > s * m as u64 {
            return Err(Error::PlacementInfeasible(format!(
                "{total} words exceed M*S = {m}*{s}"
            )));
        }
        let max_w = w.iter().copied().max().unwrap_or(0);
        let even = total.div_ceil(m as u64);
        let placed = [even, (even + max_w).min(s)]
            .into_iter()
            .find_map(|cap| contiguous(w, m, cap))
            .or_else(|| {
                first_fit_decreasing(w, m, s)
                    .ok()
                    .map(|p| p.into_iter().map(|x| x as u32).collect())
            });
        let Some(placement) = placed else {
            return Err(Error::PlacementInfeasible(format!(
                "{} nodes do not pack into {m} machines of {s} words",
                w.len()
            )));
        };
        self.resident = vec![0; m];
        for (v, &p) in placement.iter().enumerate() {
            self.resident[p as usize] += w[v];
        }
        self.placement = placement;
        self.node_resident = w.to_vec();
        Ok(())
    }

    /// One synchronous round: every node emits, the shuffle delivers with
    /// duplicate `(destination, payload)` pairs collapsed, every node
    /// receives. `receive` is called for every node, with a possibly empty
    /// inbox.
    pub fn exec_round<S, P, E, R>(
        &mut self,
        states: &mut [S],
        emit: E,
        receive: R,
    ) -> Result<RoundStats>
    where
        S: NodeState,
        P: Payload,
        E: Fn(NodeId, &mut S, &mut Outbox<P>) + Sync,
        R: Fn(NodeId, &mut S, Inbox<'_, P>) + Sync,
    {
        let n = states.len();
        assert_eq!(
            n,
            self.placement.len(),
            "state vector does not match placement"
        );
        let emit_chunk = |base: usize, chunk: &mut [S]| {
            let mut e = Emitted {
                payloads: Vec::new(),
                sends: Vec::new(),
                sent: Vec::with_capacity(chunk.len()),
            };
            for (i, st) in chunk.iter_mut().enumerate() {
                let mut out = Outbox {
                    payloads: &mut e.payloads,
                    sends: &mut e.sends,
                    words: 0,
                };
                emit((base + i) as NodeId, st, &mut out);
                let w = out.words;
                e.sent.push(w);
            }
            e
        };
        let parts: Vec<Emitted<P>> = if n < SERIAL_BELOW {
            vec![emit_chunk(0, states)]
        } else {
            states
                .par_chunks_mut(CHUNK)
                .enumerate()
                .map(|(c, ch)| emit_chunk(c * CHUNK, ch))
                .collect()
        };

        // counting sort of sends by destination
        let mut start = vec![0usize; n + 1];
        for p in &parts {
            for &(d, _) in &p.sends {
                assert!((d as usize) < n, "message to unknown node {d}");
                start[d as usize + 1] += 1;
            }
        }
        for v in 0..n {
            start[v + 1] += start[v];
        }
        let mut fill = start[..n].to_vec();
        let mut order = vec![0u32; start[n]];
        let mut all = Vec::with_capacity(parts.iter().map(|p| p.payloads.len()).sum());
        let mut sent = Vec::with_capacity(n);
        for p in parts {
            let base = all.len() as u32;
            for (d, i) in p.sends {
                order[fill[d as usize]] = base + i;
                fill[d as usize] += 1;
            }
            all.extend(p.payloads);
            sent.extend(p.sent);
        }
        drop(fill);

        // per-destination duplicate removal
        let mut kept = vec![0usize; n];
        let mut recv = vec![0u64; n];
        let dedup_node = |slice: &mut [u32], all: &[P]| -> (usize, u64) {
            if slice.len() > 1 {
                slice.sort_unstable_by(|&a, &b| {
                    all[a as usize].cmp(&all[b as usize]).then(a.cmp(&b))
                });
                let mut w = 1;
                for r in 1..slice.len() {
                    if all[slice[r] as usize] != all[slice[w - 1] as usize] {
                        slice[w] = slice[r];
                        w += 1;
                    }
                }
                slice[..w].sort_unstable();
                let words = slice[..w].iter().map(|&i| all[i as usize].words()).sum();
                (w, words)
            } else {
                (
                    slice.len(),
                    slice.iter().map(|&i| all[i as usize].words()).sum(),
                )
            }
        };
        if n < SERIAL_BELOW {
            for v in 0..n {
                let (k, w) = dedup_node(&mut order[start[v]..start[v + 1]], &all);
                kept[v] = k;
                recv[v] = w;
            }
        } else {
            let mut pieces = Vec::with_capacity(n.div_ceil(CHUNK));
            let mut rest: &mut [u32] = &mut order;
            for c in (0..n).step_by(CHUNK) {
                let hi = (c + CHUNK).min(n);
                let (head, tail) = rest.split_at_mut(start[hi] - start[c]);
                pieces.push(head);
                rest = tail;
            }
            pieces
                .into_par_iter()
                .zip(kept.par_chunks_mut(CHUNK))
                .zip(recv.par_chunks_mut(CHUNK))
                .enumerate()
                .for_each(|(c, ((piece, kept), recv))| {
                    let lo = c * CHUNK;
                    for i in 0..kept.len() {
                        let v = lo + i;
                        let (a, b) = (start[v] - start[lo], start[v + 1] - start[lo]);
                        let (k, w) = dedup_node(&mut piece[a..b], &all);
                        kept[i] = k;
                        recv[i] = w;
                    }
                });
        }

        // receive
        let mut res = vec![0u64; n];
        let recv_chunk = |base: usize, chunk: &mut [S], res: &mut [u64]| {
            for (i, st) in chunk.iter_mut().enumerate() {
                let v = base + i;
                let inbox = Inbox {
                    idx: &order[start[v]..start[v] + kept[v]],
                    all: &all,
                };
                receive(v as NodeId, st, inbox);
                res[i] = st.resident_words();
            }
        };
        if n < SERIAL_BELOW {
            recv_chunk(0, states, &mut res);
        } else {
            states
                .par_chunks_mut(CHUNK)
                .zip(res.par_chunks_mut(CHUNK))
                .enumerate()
                .for_each(|(c, (ch, r))| recv_chunk(c * CHUNK, ch, r));
        }

        let messages = kept.iter().sum::<usize>() as u64;
        self.account(&sent, &recv, &res, messages)
    }

    /// Charges a node-level round and repacks the placement if a machine
    /// would overflow.
    fn account(
        &mut self,
        sent: &[u64],
        recv: &[u64],
        res: &[u64],
        messages: u64,
    ) -> Result<RoundStats> {
        let m = self.m;
        let sums = |placement: &[u32]| {
            let mut ms = vec![(0u64, 0u64, 0u64); m];
            for (v, &p) in placement.iter().enumerate() {
                let e = &mut ms[p as usize];
                e.0 += sent[v];
                e.1 += recv[v];
                e.2 += res[v];
            }
            ms
        };
        let mut ms = sums(&self.placement);
        let over = |ms: &[(u64, u64, u64)], s: u64| {
            ms.iter()
                .enumerate()
                .find(|(_, e)| e.0 + e.1 > s || e.2 > s)
                .map(|(i, e)| {
                    if e.0 + e.1 > s {
                        (i, MemoryKind::Traffic, e.0 + e.1)
                    } else {
                        (i, MemoryKind::Resident, e.2)
                    }
                })
        };
        let mut rebalanced = false;
        if let Some((machine, kind, words)) = over(&ms, self.s) {
            let err = Error::MemoryExceeded {
                machine,
                kind,
                words,
                cap: self.s,
            };
            let placement = self.repack(sent, recv, res).ok_or(err)?;
            self.placement = placement;
            ms = sums(&self.placement);
            rebalanced = true;
        }
        self.resident = ms.iter().map(|e| e.2).collect();
        self.node_resident.copy_from_slice(res);
        let st = RoundStats {
            round_index: self.round_index(),
            phase: self.current_phase(),
            kind: self.kind,
            max_sent: ms.iter().map(|e| e.0).max().unwrap_or(0),
            max_recv: ms.iter().map(|e| e.1).max().unwrap_or(0),
            max_traffic: ms.iter().map(|e| e.0 + e.1).max().unwrap_or(0),
            max_resident: ms.iter().map(|e| e.2).max().unwrap_or(0),
            messages,
            rebalanced,
        };
        self.stats.push(st);
        Ok(st)
    }

    /// Greedy two-dimensional first-fit of nodes by decreasing load.
    fn repack(&self, sent: &[u64], recv: &[u64], res: &[u64]) -> Option<Vec<u32>> {
        let n = sent.len();
        let mut order: Vec<usize> = (0..n).collect();
        let load = |v: usize| sent[v] + recv[v] + res[v];
        order.sort_by(|&a, &b| load(b).cmp(&load(a)).then(a.cmp(&b)));
        let mut ff = FirstFit2::new(self.m, self.s);
        let mut out = vec![0u32; n];
        for v in order {
            out[v] = ff.place(sent[v] + recv[v], res[v])? as u32;
        }
        Some(out)
    }

    /// Charges `count` rounds without node traffic.
    pub fn idle_rounds(&mut self, count: u64) {
        for _ in 0..count {
            let resident = self.resident.iter().copied().max().unwrap_or(0);
            self.push_machine_round(0, 0, resident, 0);
        }
    }

    fn push_machine_round(
        &mut self,
        max_sent: u64,
        max_recv: u64,
        max_resident: u64,
        messages: u64,
    ) {
        let st = RoundStats {
            round_index: self.round_index(),
            phase: self.current_phase(),
            kind: self.kind,
            max_sent,
            max_recv,
            max_traffic: max_sent + max_recv,
            max_resident,
            messages,
            rebalanced: false,
        };
        self.stats.push(st);
    }

    /// Moves nodes (with `words` of state each) to new machines. Moves are
    /// batched first-fit into as few rounds as keep every machine's
    /// `sent + recv` within `S`; returns the number of rounds used.
    pub fn move_nodes(&mut self, moves: &[(NodeId, usize, u64)]) -> Result<u64> {
        let s = self.s;
        // per batch: sent and received words per machine, message count
        let mut batches: Vec<(Vec<u64>, Vec<u64>, u64)> = Vec::new();
        for &(v, to, w) in moves {
            let from = self.placement[v as usize] as usize;
            if from == to {
                continue;
            }
            if w > s {
                return Err(Error::MemoryExceeded {
                    machine: to,
                    kind: MemoryKind::Traffic,
                    words: w,
                    cap: s,
                });
            }
            let fits = |(sent, recv, _): &(Vec<u64>, Vec<u64>, u64)| {
                sent[from] + recv[from] + w <= s && sent[to] + recv[to] + w <= s
            };
            let b = match batches.iter().position(fits) {
                Some(b) => b,
                None => {
                    batches.push((vec![0; self.m], vec![0; self.m], 0));
                    batches.len() - 1
                }
            };
            let batch = &mut batches[b];
            batch.0[from] += w;
            batch.1[to] += w;
            batch.2 += 1;
            self.resident[from] -= w.min(self.resident[from]);
            self.resident[to] += w;
            self.placement[v as usize] = to as u32;
        }
        let rounds = batches.len() as u64;
        let resident = self.resident.iter().copied().max().unwrap_or(0);
        for (sent, recv, count) in batches {
            let traffic = sent
                .iter()
                .zip(&recv)
                .map(|(a, b)| a + b)
                .max()
                .unwrap_or(0);
            self.push_machine_round(
                sent.iter().copied().max().unwrap_or(0),
                recv.iter().copied().max().unwrap_or(0),
                resident,
                count,
            );
            self.stats.last_mut().unwrap().max_traffic = traffic;
        }
        Ok(rounds)
    }
}

fn contiguous(w: &[u64], m: usize, cap: u64) -> Option<Vec<u32>> {
    let mut out = Vec::with_capacity(w.len());
    let (mut machine, mut load) = (0usize, 0u64);
    for &x in w {
        if load + x > cap && load > 0 {
            machine += 1;
            load = 0;
        }
        if machine >= m || x > cap {
            return None;
        }
        load += x;
        out.push(machine as u32);
    }
    Some(out)
}
