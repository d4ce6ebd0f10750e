//! Borůvka-style entropy-rate merging and constant-cost extraction.
//!
//! Each round every current tree picks its outgoing edge with the largest
//! gain, all gains read against the masses frozen at the start of the round.
//! Picks are deduplicated, sorted by gain (descending, ties by edge index)
//! and applied in that order; a pick whose endpoints an earlier pick of the
//! same round already joined is skipped. The applied order is the hierarchy:
//! cutting it after `N - k` merges yields `k` superpixels.

use std::fs;
use std::path::Path;

use crate::disjoint_set::DisjointSet;
use crate::exec::{self, Execution};
use crate::graph::PixelGraph;
use crate::image_io::LabelMap;
use crate::{Error, Result};

const HRS1_MAGIC: &[u8; 4] = b"HRS1";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Merge {
    pub u: u32,
    pub v: u32,
    pub gain: f32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MergeHierarchy {
    node_count: usize,
    merges: Vec<Merge>,
    round_boundaries: Vec<u32>,
}

/// Counters collected while building a hierarchy.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BuildStats {
    pub rounds: usize,
    pub gain_evaluations: u64,
}

pub fn build_hierarchy(graph: &PixelGraph) -> Result<MergeHierarchy> {
    build_hierarchy_with(graph, Execution::default()).map(|(h, _)| h)
}

/// Runs Borůvka rounds from the graph's current masses until one tree is left.
///
/// Gains within a round are evaluated once per cross-tree edge, in parallel
/// when `exec` allows; the result does not depend on `exec`.
pub fn build_hierarchy_with(
    graph: &PixelGraph,
    exec: Execution,
) -> Result<(MergeHierarchy, BuildStats)> {
    let n = graph.node_count();
    let mut state = graph.clone();
    let mut forest = DisjointSet::new(n);
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    let mut round_boundaries = Vec::new();
    let mut stats = BuildStats::default();

    let mut active: Vec<u32> = (0..graph.edge_count() as u32).collect();
    let mut root = vec![0u32; n];
    let mut best = vec![u32::MAX; n];

    while forest.components() > 1 {
        for (i, r) in root.iter_mut().enumerate() {
            *r = forest.find(i) as u32;
        }
        active.retain(|&e| {
            let edge = state.edge(e as usize);
            root[edge.u as usize] != root[edge.v as usize]
        });
        if active.is_empty() {
            return Err(Error::Disconnected {
                components: forest.components(),
            });
        }

        let gains: Vec<f64> = {
            let state = &state;
            let active = &active;
            exec::map_range(exec, active.len(), |i| state.edge_gain(active[i] as usize).gain)
        };
        stats.gain_evaluations += active.len() as u64;

        // `active` is ascending, so keeping the first maximum breaks ties by
        // smallest edge index.
        let mut touched = Vec::new();
        for (slot, &e) in active.iter().enumerate() {
            let edge = state.edge(e as usize);
            for tree in [root[edge.u as usize], root[edge.v as usize]] {
                let current = &mut best[tree as usize];
                if *current == u32::MAX {
                    touched.push(tree);
                    *current = slot as u32;
                } else if gains[slot] > gains[*current as usize] {
                    *current = slot as u32;
                }
            }
        }

        let mut picks: Vec<u32> = touched
            .iter()
            .map(|&t| std::mem::replace(&mut best[t as usize], u32::MAX))
            .collect();
        picks.sort_unstable();
        picks.dedup();
        picks.sort_by(|&a, &b| {
            gains[b as usize]
                .total_cmp(&gains[a as usize])
                .then(active[a as usize].cmp(&active[b as usize]))
        });

        for slot in picks {
            let e = active[slot as usize] as usize;
            let edge = state.edge(e);
            if forest.union(edge.u as usize, edge.v as usize) {
                state.commit_edge(e)?;
                merges.push(Merge {
                    u: edge.u,
                    v: edge.v,
                    gain: gains[slot as usize] as f32,
                });
            }
        }
        round_boundaries.push(merges.len() as u32);
        stats.rounds += 1;
    }

    Ok((
        MergeHierarchy {
            node_count: n,
            merges,
            round_boundaries,
        },
        stats,
    ))
}

impl MergeHierarchy {
    /// Validates that replaying `merges` never closes a cycle and that the
    /// round boundaries are non-decreasing and end at the last merge.
    pub fn new(node_count: usize, merges: Vec<Merge>, round_boundaries: Vec<u32>) -> Result<Self> {
        if node_count == 0 || node_count > u32::MAX as usize {
            return Err(Error::format(format!("invalid node count {node_count}")));
        }
        let mut forest = DisjointSet::new(node_count);
        for (i, m) in merges.iter().enumerate() {
            let (u, v) = (m.u as usize, m.v as usize);
            if u >= node_count || v >= node_count {
                return Err(Error::format(format!("merge {i} references a node out of range")));
            }
            if !forest.union(u, v) {
                return Err(Error::format(format!("merge {i} joins an existing tree")));
            }
        }
        let sorted = round_boundaries.windows(2).all(|w| w[0] <= w[1]);
        let last_ok = round_boundaries
            .last()
            .map_or(merges.is_empty(), |&b| b as usize == merges.len());
        if !sorted || !last_ok {
            return Err(Error::format("round boundaries are inconsistent with merges"));
        }
        Ok(Self {
            node_count,
            merges,
            round_boundaries,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    /// Merge counts at the end of each round.
    pub fn round_boundaries(&self) -> &[u32] {
        &self.round_boundaries
    }

    pub fn round_count(&self) -> usize {
        self.round_boundaries.len()
    }

    /// Smallest superpixel count reachable from this hierarchy.
    pub fn min_k(&self) -> usize {
        self.node_count - self.merges.len()
    }

    fn check_k(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.node_count {
            return Err(Error::KOutOfRange {
                k,
                max: self.node_count,
            });
        }
        if k < self.min_k() {
            return Err(Error::InvalidArgument(format!(
                "k = {k} is below the {} trees this hierarchy ends with",
                self.min_k()
            )));
        }
        Ok(())
    }

    fn check_frame(&self, height: usize, width: usize) -> Result<()> {
        if height.checked_mul(width) != Some(self.node_count) {
            return Err(Error::InvalidArgument(format!(
                "frame {height}x{width} does not hold {} nodes",
                self.node_count
            )));
        }
        Ok(())
    }

    /// Dense per-node labels after the first `N - k` merges.
    pub fn labels(&self, k: usize) -> Result<Vec<u32>> {
        self.check_k(k)?;
        let mut forest = DisjointSet::new(self.node_count);
        for m in &self.merges[..self.node_count - k] {
            forest.union(m.u as usize, m.v as usize);
        }
        Ok(forest.dense_labels())
    }

    /// The `k`-superpixel segmentation of a `height × width` frame.
    pub fn extract(&self, k: usize, height: usize, width: usize) -> Result<LabelMap> {
        self.check_frame(height, width)?;
        let labels = self.labels(k)?;
        Ok(LabelMap::from_dense(height, width, labels, k))
    }

    /// Same as mapping [`extract`](Self::extract) over `ks`, sharing one
    /// replay of the merges. `ks` must be ascending.
    pub fn extract_many(&self, ks: &[usize], height: usize, width: usize) -> Result<Vec<LabelMap>> {
        self.check_frame(height, width)?;
        if ks.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidArgument(format!(
                "k values must be ascending, got {ks:?}"
            )));
        }
        for &k in ks {
            self.check_k(k)?;
        }
        let mut forest = DisjointSet::new(self.node_count);
        let mut applied = 0;
        let mut out = Vec::with_capacity(ks.len());
        for &k in ks.iter().rev() {
            let target = self.node_count - k;
            for m in &self.merges[applied..target] {
                forest.union(m.u as usize, m.v as usize);
            }
            applied = target;
            out.push(LabelMap::from_dense(height, width, forest.dense_labels(), k));
        }
        out.reverse();
        Ok(out)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + 12 * self.merges.len() + 4 * self.round_count());
        out.extend_from_slice(HRS1_MAGIC);
        out.extend_from_slice(&(self.node_count as u32).to_le_bytes());
        out.extend_from_slice(&(self.merges.len() as u32).to_le_bytes());
        out.extend_from_slice(&(self.round_count() as u32).to_le_bytes());
        for m in &self.merges {
            out.extend_from_slice(&m.u.to_le_bytes());
            out.extend_from_slice(&m.v.to_le_bytes());
            out.extend_from_slice(&m.gain.to_le_bytes());
        }
        for b in &self.round_boundaries {
            out.extend_from_slice(&b.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 4 || &bytes[..4] != HRS1_MAGIC {
            return Err(Error::format("bad magic, expected HRS1"));
        }
        let mut words = bytes[4..]
            .chunks_exact(4)
            .map(|b| [b[0], b[1], b[2], b[3]]);
        let mut next = |what: &str| {
            words
                .next()
                .ok_or_else(|| Error::format(format!("HRS1 truncated at {what}")))
        };
        let node_count = u32::from_le_bytes(next("header")?) as usize;
        let merge_count = u32::from_le_bytes(next("header")?) as usize;
        let round_count = u32::from_le_bytes(next("header")?) as usize;
        let expected = 16u64 + 12 * merge_count as u64 + 4 * round_count as u64;
        if (bytes.len() as u64) < expected {
            return Err(Error::format(format!(
                "HRS1 payload is {} bytes, header requires {expected}",
                bytes.len()
            )));
        }
        let mut merges = Vec::with_capacity(merge_count);
        for _ in 0..merge_count {
            merges.push(Merge {
                u: u32::from_le_bytes(next("merge")?),
                v: u32::from_le_bytes(next("merge")?),
                gain: f32::from_le_bytes(next("merge")?),
            });
        }
        let round_boundaries = (0..round_count)
            .map(|_| next("round boundary").map(u32::from_le_bytes))
            .collect::<Result<_>>()?;
        Self::new(node_count, merges, round_boundaries)
    }
}

pub fn write_hierarchy(hierarchy: &MergeHierarchy, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, hierarchy.to_bytes()).map_err(|e| Error::io(path, e))
}

pub fn read_hierarchy(path: impl AsRef<Path>) -> Result<MergeHierarchy> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    MergeHierarchy::from_bytes(&bytes)
}
