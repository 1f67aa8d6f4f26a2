use thiserror::Error;

use crate::graph::NodeId;

/// Which per-machine quantity overflowed in a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MemoryKind {
    Traffic,
    Resident,
}

impl std::fmt::Display for MemoryKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MemoryKind::Traffic => f.write_str("sent+recv"),
            MemoryKind::Resident => f.write_str("resident"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GuardKind {
    Size,
    Diameter,
}

impl std::fmt::Display for GuardKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GuardKind::Size => f.write_str("size"),
            GuardKind::Diameter => f.write_str("diameter"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("bad generator spec: {0}")]
    BadSpec(String),
    #[error("graph is not a forest")]
    NotAForest,
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("graph invariant violated: {0}")]
    InvariantViolation(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("placement infeasible: {0}")]
    PlacementInfeasible(String),
    #[error("memory exceeded on machine {machine} ({kind}): {words} words > S = {cap}")]
    MemoryExceeded {
        machine: usize,
        kind: MemoryKind,
        words: u64,
        cap: u64,
    },
    #[error("component led by {leader} needs {words} words, more than S = {cap}")]
    ComponentTooLarge {
        leader: NodeId,
        words: u64,
        cap: u64,
    },

    #[error("parent pointers do not form a rooted forest: {0}")]
    NotRooted(String),
    #[error("budget arithmetic overflow")]
    BudgetArithmeticOverflow,
    #[error("total memory infeasible: {needed} words needed, M*S = {available}")]
    TotalMemoryInfeasible { needed: u128, available: u128 },

    #[error("sampled component guard violated ({kind}): {value} > {limit}")]
    GuardViolated {
        kind: GuardKind,
        value: u64,
        limit: u64,
    },
    #[error("retries exhausted in {phase} after {attempts} attempts")]
    RetriesExhausted { phase: String, attempts: u32 },
    #[error("schedule overflow in {phase}: {count} > {limit}")]
    ScheduleOverflow {
        phase: String,
        count: u64,
        limit: u64,
    },

    #[error("set is not independent: edge {0}-{1}")]
    NotIndependent(NodeId, NodeId),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
