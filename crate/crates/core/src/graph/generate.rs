use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{prufer, Graph, NodeId};
use crate::error::{Error, Result};
use crate::rng::mix;

/// Shape of a generated instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GenKind {
    /// Uniform over all `n^(n-2)` labeled trees.
    UniformRandomTree,
    Path,
    /// Star centered at node 0.
    Star,
    /// Complete `b`-ary tree in BFS order, truncated to `n` nodes.
    BalancedBAry(usize),
    /// Path of `handle` nodes whose last node carries `bristles` leaves.
    Broom {
        handle: usize,
        bristles: usize,
    },
    /// Node 0 joined to `fanout` hubs; the remaining nodes are leaves spread
    /// round-robin over the hubs.
    StarOfStars(usize),
    /// `trees` disjoint copies of `kind`, sizes as equal as possible.
    ForestOf {
        trees: usize,
        kind: Box<GenKind>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GenSpec {
    pub kind: GenKind,
    pub n: usize,
    pub seed: u64,
}

impl GenSpec {
    pub fn new(kind: GenKind, n: usize, seed: u64) -> Self {
        GenSpec { kind, n, seed }
    }
}

/// Builds the instance described by `spec`; deterministic in the seed.
pub fn generate(spec: &GenSpec) -> Result<Graph> {
    if spec.n == 0 {
        return Err(Error::BadSpec("n must be at least 1".into()));
    }
    let edges = tree_edges(&spec.kind, spec.n, spec.seed)?;
    Graph::forest_from_edges(spec.n, &edges)
}

fn tree_edges(kind: &GenKind, n: usize, seed: u64) -> Result<Vec<(NodeId, NodeId)>> {
    let n32 = n as NodeId;
    Ok(match kind {
        GenKind::UniformRandomTree => {
            if n <= 2 {
                return Ok((1..n32).map(|v| (0, v)).collect());
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let seq: Vec<NodeId> = (0..n - 2).map(|_| rng.gen_range(0..n32)).collect();
            prufer::decode(&seq, n)?.edges().collect()
        }
        GenKind::Path => (1..n32).map(|v| (v - 1, v)).collect(),
        GenKind::Star => (1..n32).map(|v| (0, v)).collect(),
        GenKind::BalancedBAry(b) => {
            if *b == 0 {
                return Err(Error::BadSpec("arity must be positive".into()));
            }
            (1..n32).map(|v| ((v - 1) / *b as NodeId, v)).collect()
        }
        GenKind::Broom { handle, bristles } => {
            if handle + bristles != n || *handle == 0 {
                return Err(Error::BadSpec(format!(
                    "broom needs handle >= 1 and handle + bristles = n ({handle} + {bristles} != {n})"
                )));
            }
            let h = *handle as NodeId;
            let mut e: Vec<_> = (1..h).map(|v| (v - 1, v)).collect();
            e.extend((h..n32).map(|v| (h - 1, v)));
            e
        }
        GenKind::StarOfStars(fanout) => {
            let f = *fanout;
            if n > 1 && (f == 0 || f >= n) {
                return Err(Error::BadSpec(format!(
                    "star-of-stars fanout must be in 1..n, got {f} for n = {n}"
                )));
            }
            let mut e: Vec<_> = (1..=f as NodeId)
                .filter(|&h| h < n32)
                .map(|h| (0, h))
                .collect();
            for (i, leaf) in (f as NodeId + 1..n32).enumerate() {
                e.push((1 + (i % f) as NodeId, leaf));
            }
            e
        }
        GenKind::ForestOf { trees, kind } => {
            if *trees == 0 || *trees > n {
                return Err(Error::BadSpec(format!(
                    "forest of {trees} trees does not fit n = {n}"
                )));
            }
            let mut e = Vec::with_capacity(n);
            let mut base = 0 as NodeId;
            for t in 0..*trees {
                let size = n / trees + usize::from(t < n % trees);
                let inner = sized_kind(kind, size);
                for (u, v) in tree_edges(&inner, size, mix(seed, t as u64))? {
                    e.push((base + u, base + v));
                }
                base += size as NodeId;
            }
            e
        }
    })
}

/// Re-parameterizes size-dependent kinds for a sub-tree of `size` nodes in a
/// forest.
fn sized_kind(kind: &GenKind, size: usize) -> GenKind {
    match kind {
        GenKind::Broom { handle, .. } => {
            let h = (*handle).clamp(1, size);
            GenKind::Broom {
                handle: h,
                bristles: size - h,
            }
        }
        GenKind::StarOfStars(f) => {
            GenKind::StarOfStars((*f).clamp(1, size.saturating_sub(1).max(1)))
        }
        other => other.clone(),
    }
}

impl FromStr for GenKind {
    type Err = Error;

    /// Parses `random`, `path`, `star`, `balanced[:b]`, `broom:handle`,
    /// `star-of-stars:fanout` and `forest:t:<kind>`. For `broom` the bristle
    /// count is filled in from `n` by [`GenKind::fit`].
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::BadSpec(format!("unrecognized generator '{s}'"));
        let (head, rest) = match s.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (s, None),
        };
        let num = |r: Option<&str>| -> Result<usize> {
            r.ok_or_else(bad)?.parse::<usize>().map_err(|_| bad())
        };
        Ok(match head {
            "random" | "uniform" => GenKind::UniformRandomTree,
            "path" => GenKind::Path,
            "star" => GenKind::Star,
            "balanced" => GenKind::BalancedBAry(rest.map_or(Ok(2), |r| num(Some(r)))?),
            "broom" => GenKind::Broom {
                handle: num(rest)?,
                bristles: 0,
            },
            "star-of-stars" => GenKind::StarOfStars(num(rest)?),
            "forest" => {
                let (t, inner) = rest.and_then(|r| r.split_once(':')).ok_or_else(bad)?;
                GenKind::ForestOf {
                    trees: t.parse().map_err(|_| bad())?,
                    kind: Box::new(inner.parse()?),
                }
            }
            _ => return Err(bad()),
        })
    }
}

impl GenKind {
    /// Fills size-derived parameters (broom bristles) for an `n`-node instance.
    pub fn fit(self, n: usize) -> Self {
        match self {
            GenKind::Broom { handle, .. } => GenKind::Broom {
                handle,
                bristles: n.saturating_sub(handle),
            },
            GenKind::ForestOf { trees, kind } => GenKind::ForestOf {
                trees,
                kind: Box::new(kind.fit(n / trees.max(1))),
            },
            other => other,
        }
    }
}
