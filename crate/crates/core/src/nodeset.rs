//! Compact sets of node IDs used as neighborhood payloads.

use std::cmp::Ordering;
use std::hash::{Hash, Hasher};

use crate::graph::NodeId;
use crate::rng::mix;

/// Sparse bitset: sorted 64-bit blocks, only non-empty ones stored.
///
/// Ordering compares a cached content hash first so that sorting large
/// batches of sets for duplicate removal is cheap; it is a total order
/// consistent with equality but otherwise meaningless.
#[derive(Clone, Default)]
pub struct NodeSet {
    blocks: Vec<(u32, u64)>,
    len: u32,
    hash: u64,
}

impl NodeSet {
    pub fn new() -> Self {
        Self::from_blocks(Vec::new())
    }

    pub fn singleton(v: NodeId) -> Self {
        Self::from_blocks(vec![(v >> 6, 1 << (v & 63))])
    }

    pub fn from_ids(ids: impl IntoIterator<Item = NodeId>) -> Self {
        let mut blocks: Vec<(u32, u64)> = ids
            .into_iter()
            .map(|v| (v >> 6, 1u64 << (v & 63)))
            .collect();
        normalize(&mut blocks);
        Self::from_blocks(blocks)
    }

    fn from_blocks(blocks: Vec<(u32, u64)>) -> Self {
        let mut len = 0u32;
        let mut hash = 0x5EED;
        for &(b, bits) in &blocks {
            len += bits.count_ones();
            hash = mix(hash ^ b as u64, bits);
        }
        NodeSet { blocks, len, hash }
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, v: NodeId) -> bool {
        match self.blocks.binary_search_by_key(&(v >> 6), |&(b, _)| b) {
            Ok(i) => self.blocks[i].1 >> (v & 63) & 1 == 1,
            Err(_) => false,
        }
    }

    pub fn first(&self) -> Option<NodeId> {
        self.blocks
            .first()
            .map(|&(b, bits)| (b << 6) | bits.trailing_zeros())
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.blocks.iter().flat_map(|&(b, mut bits)| {
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let t = bits.trailing_zeros();
                bits &= bits - 1;
                Some((b << 6) | t)
            })
        })
    }

    pub fn with(&self, v: NodeId) -> Self {
        Self::union_all([self, &Self::singleton(v)])
    }

    pub fn without(&self, v: NodeId) -> Self {
        let mut blocks = self.blocks.clone();
        if let Ok(i) = blocks.binary_search_by_key(&(v >> 6), |&(b, _)| b) {
            blocks[i].1 &= !(1 << (v & 63));
            if blocks[i].1 == 0 {
                blocks.remove(i);
            }
        }
        Self::from_blocks(blocks)
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        if self.len > other.len {
            return false;
        }
        let mut j = 0;
        for &(b, bits) in &self.blocks {
            while j < other.blocks.len() && other.blocks[j].0 < b {
                j += 1;
            }
            if j == other.blocks.len() || other.blocks[j].0 != b || bits & !other.blocks[j].1 != 0 {
                return false;
            }
        }
        true
    }

    /// Number of elements in `self` but not in `other`.
    pub fn difference_len(&self, other: &NodeSet) -> usize {
        let mut j = 0;
        let mut count = 0;
        for &(b, bits) in &self.blocks {
            while j < other.blocks.len() && other.blocks[j].0 < b {
                j += 1;
            }
            let o = match other.blocks.get(j) {
                Some(&(ob, obits)) if ob == b => obits,
                _ => 0,
            };
            count += (bits & !o).count_ones() as usize;
        }
        count
    }

    pub fn union_all<'a>(sets: impl IntoIterator<Item = &'a NodeSet>) -> Self {
        let mut blocks = Vec::new();
        for s in sets {
            blocks.extend_from_slice(&s.blocks);
        }
        normalize(&mut blocks);
        Self::from_blocks(blocks)
    }
}

fn normalize(blocks: &mut Vec<(u32, u64)>) {
    blocks.sort_unstable_by_key(|&(b, _)| b);
    let mut w = 0;
    for r in 0..blocks.len() {
        if w > 0 && blocks[w - 1].0 == blocks[r].0 {
            blocks[w - 1].1 |= blocks[r].1;
        } else {
            blocks[w] = blocks[r];
            w += 1;
        }
    }
    blocks.truncate(w);
}

impl PartialEq for NodeSet {
    fn eq(&self, other: &Self) -> bool {
        self.hash == other.hash && self.len == other.len && self.blocks == other.blocks
    }
}

impl Eq for NodeSet {}

impl Ord for NodeSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.hash
            .cmp(&other.hash)
            .then(self.len.cmp(&other.len))
            .then_with(|| self.blocks.cmp(&other.blocks))
    }
}

impl PartialOrd for NodeSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Hash for NodeSet {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.hash);
    }
}

impl std::fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl FromIterator<NodeId> for NodeSet {
    fn from_iter<I: IntoIterator<Item = NodeId>>(iter: I) -> Self {
        Self::from_ids(iter)
    }
}
