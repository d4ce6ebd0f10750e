//! Lazy-greedy entropy-rate edge selection, the sequential baseline HERS is
//! compared against.
//!
//! Edges sit in a max-heap keyed by cached gain. A popped entry whose
//! endpoint masses changed since it was cached is re-evaluated and pushed
//! back; a popped entry whose endpoints already share a tree is dropped;
//! otherwise the edge is selected. Selecting an edge raises both endpoint
//! masses, and a larger mass can only raise the gain of an incident edge, so
//! cached values are lower bounds rather than upper bounds. Incident edges are
//! therefore re-queued with fresh gains on every selection, which keeps the
//! popped maximum exact.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::disjoint_set::DisjointSet;
use crate::graph::PixelGraph;
use crate::image_io::LabelMap;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug)]
struct Candidate {
    gain: f64,
    edge: u32,
    stamp: u64,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    // larger gain first, then smaller edge index
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain
            .total_cmp(&other.gain)
            .then_with(|| other.edge.cmp(&self.edge))
            .then_with(|| self.stamp.cmp(&other.stamp))
    }
}

/// Result of a greedy run, with the bookkeeping the comparisons need.
#[derive(Clone, Debug)]
pub struct GreedyOutcome {
    pub labels: LabelMap,
    /// Selected edge indices, in selection order.
    pub selected: Vec<usize>,
    pub gain_evaluations: u64,
}

/// Working state of the lazy greedy solver.
pub struct GreedyState {
    graph: PixelGraph,
    heap: BinaryHeap<Candidate>,
    forest: DisjointSet,
    // bumped whenever a node's mass changes
    version: Vec<u64>,
    incident_start: Vec<usize>,
    incident: Vec<u32>,
    selected: Vec<usize>,
    gain_evaluations: u64,
}

impl GreedyState {
    pub fn new(graph: &PixelGraph) -> Self {
        let n = graph.node_count();
        let mut degree = vec![0usize; n + 1];
        for e in graph.edges() {
            degree[e.u as usize + 1] += 1;
            degree[e.v as usize + 1] += 1;
        }
        for i in 0..n {
            degree[i + 1] += degree[i];
        }
        let mut fill = degree.clone();
        let mut incident = vec![0u32; degree[n]];
        for (i, e) in graph.edges().iter().enumerate() {
            for node in [e.u as usize, e.v as usize] {
                incident[fill[node]] = i as u32;
                fill[node] += 1;
            }
        }
        let mut state = Self {
            graph: graph.clone(),
            heap: BinaryHeap::with_capacity(graph.edge_count()),
            forest: DisjointSet::new(n),
            version: vec![0; n],
            incident_start: degree,
            incident,
            selected: Vec::new(),
            gain_evaluations: 0,
        };
        for e in 0..graph.edge_count() {
            state.push(e);
        }
        state
    }

    fn stamp(&self, e: usize) -> u64 {
        let edge = self.graph.edge(e);
        self.version[edge.u as usize] + self.version[edge.v as usize]
    }

    fn push(&mut self, e: usize) {
        self.gain_evaluations += 1;
        self.heap.push(Candidate {
            gain: self.graph.edge_gain(e).gain,
            edge: e as u32,
            stamp: self.stamp(e),
        });
    }

    pub fn components(&self) -> usize {
        self.forest.components()
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    /// Selects the next edge. Returns `None` once no cross-tree edge remains.
    pub fn step(&mut self) -> Option<usize> {
        while let Some(top) = self.heap.pop() {
            let e = top.edge as usize;
            let edge = self.graph.edge(e);
            if self.forest.same(edge.u as usize, edge.v as usize) {
                continue;
            }
            if top.stamp != self.stamp(e) {
                self.push(e);
                continue;
            }
            self.forest.union(edge.u as usize, edge.v as usize);
            self.graph
                .commit_edge(e)
                .expect("cross-tree edges are never committed");
            self.version[edge.u as usize] += 1;
            self.version[edge.v as usize] += 1;
            self.selected.push(e);
            for node in [edge.u as usize, edge.v as usize] {
                for slot in self.incident_start[node]..self.incident_start[node + 1] {
                    let other = self.incident[slot] as usize;
                    let oe = self.graph.edge(other);
                    if !self.forest.same(oe.u as usize, oe.v as usize) {
                        self.push(other);
                    }
                }
            }
            return Some(e);
        }
        None
    }

    fn finish(mut self) -> GreedyOutcome {
        let labels = self.forest.dense_labels();
        let k = self.forest.components();
        GreedyOutcome {
            labels: LabelMap::from_dense(self.graph.height(), self.graph.width(), labels, k),
            selected: self.selected,
            gain_evaluations: self.gain_evaluations,
        }
    }
}

/// Greedily selects edges until `k` trees remain.
pub fn lazy_greedy(graph: &PixelGraph, k: usize) -> Result<GreedyOutcome> {
    let n = graph.node_count();
    if k == 0 || k > n {
        return Err(Error::KOutOfRange { k, max: n });
    }
    let mut state = GreedyState::new(graph);
    while state.components() > k {
        if state.step().is_none() {
            return Err(Error::Disconnected {
                components: state.components(),
            });
        }
    }
    Ok(state.finish())
}

pub fn lazy_greedy_segment(graph: &PixelGraph, k: usize) -> Result<LabelMap> {
    lazy_greedy(graph, k).map(|o| o.labels)
}
