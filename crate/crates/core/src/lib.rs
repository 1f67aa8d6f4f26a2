//! Simulator of the low-memory MPC model and a maximal-independent-set
//! pipeline for trees built on it: high-degree cleanup, shattering by
//! subsample-and-conquer and desire levels, component gathering in two
//! variants, and local post-shattering.

pub mod error;
pub mod experiment;
pub mod gather;
pub mod graph;
pub mod mpc;
pub mod nodeset;
pub mod oracle;
pub mod pipeline;
pub mod report;
pub mod rng;
pub mod scalar;
pub mod shatter;

pub use error::{Error, Result};
pub use graph::{generate, GenKind, GenSpec, Graph, NodeId};
pub use mpc::{GatherMode, MpcConfig, System};
pub use pipeline::{mis_tree, Aborted, MisRun};
pub use report::RunReport;
pub use shatter::{NodeStatus, ShatterParams};

/// Exact rational budgets of the in-space gathering.
pub type Budget = scalar::Budget;
/// Scalar used for desire levels and effective degrees.
pub type Desire = f64;
