//! The undirected 8-connected pixel graph and its entropy-rate bookkeeping.
//!
//! Edge weights are normalized once by the total node weight `w_T`, so the
//! initial node masses (the stationary distribution of the random walk,
//! `μ_u = w_u / w_T`) sum to one. Selecting an edge adds its normalized
//! weight to both endpoint masses; [`edge_gain`] always reads the current
//! masses, so gains stay incremental across selections.

use crate::image_io::{neighbor, AffinityMap, Direction};
use crate::{Error, Result};

/// `x ln x` with `0 ln 0 = 0`.
#[inline]
pub fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// Entropy-rate gain of joining two nodes of masses `mass_u` and `mass_v` by
/// an edge of normalized weight `w`, in nats.
#[inline]
pub fn gain_formula(w: f64, mass_u: f64, mass_v: f64) -> f64 {
    (xlogx(w + mass_u) - xlogx(mass_u)) + (xlogx(w + mass_v) - xlogx(mass_v)) - 2.0 * xlogx(w)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub u: u32,
    pub v: u32,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeGain {
    pub edge: usize,
    pub gain: f64,
}

#[derive(Clone, Debug)]
pub struct PixelGraph {
    height: usize,
    width: usize,
    edges: Vec<Edge>,
    weights: Vec<f64>,
    normalized: Vec<f64>,
    w_total: f64,
    stationary: Vec<f64>,
    masses: Vec<f64>,
    committed: Vec<bool>,
}

impl PixelGraph {
    /// Builds the lattice graph with `w_pq = (a_pq + a_qp) / 2`.
    ///
    /// Edges are numbered in row-major pixel order, each pixel emitting its
    /// `E`, `SE`, `S`, `SW` neighbors. Zero-weight edges are kept so the
    /// lattice stays connected.
    pub fn from_affinity(map: &AffinityMap) -> Result<Self> {
        let (h, w) = (map.height(), map.width());
        let n = h * w;
        let mut edges = Vec::with_capacity(4 * n);
        let mut weights = Vec::with_capacity(4 * n);
        for r in 0..h {
            for c in 0..w {
                for dir in Direction::FORWARD {
                    if let Some((nr, nc)) = neighbor(h, w, r, c, dir) {
                        let forward = map.get(r, c, dir) as f64;
                        let back = map.get(nr, nc, dir.mirror()) as f64;
                        edges.push(Edge {
                            u: (r * w + c) as u32,
                            v: (nr * w + nc) as u32,
                        });
                        weights.push((forward + back) / 2.0);
                    }
                }
            }
        }
        Self::from_parts(h, w, edges, weights)
    }

    fn from_parts(height: usize, width: usize, edges: Vec<Edge>, weights: Vec<f64>) -> Result<Self> {
        let n = height * width;
        let mut incident = vec![0.0f64; n];
        for (e, &wt) in edges.iter().zip(&weights) {
            incident[e.u as usize] += wt;
            incident[e.v as usize] += wt;
        }
        let w_total: f64 = incident.iter().sum();
        if w_total <= 0.0 {
            return Err(Error::ZeroWeight);
        }
        let normalized: Vec<f64> = weights.iter().map(|wt| wt / w_total).collect();
        let stationary: Vec<f64> = incident.iter().map(|wi| wi / w_total).collect();
        Ok(Self {
            height,
            width,
            committed: vec![false; edges.len()],
            masses: stationary.clone(),
            edges,
            weights,
            normalized,
            w_total,
            stationary,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn node_count(&self) -> usize {
        self.height * self.width
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> Edge {
        self.edges[e]
    }

    /// Raw (unnormalized) weight.
    pub fn weight(&self, e: usize) -> f64 {
        self.weights[e]
    }

    /// Weight divided by `w_T`.
    pub fn normalized_weight(&self, e: usize) -> f64 {
        self.normalized[e]
    }

    /// Sum over nodes of incident weight, i.e. twice the total edge weight.
    pub fn w_total(&self) -> f64 {
        self.w_total
    }

    /// Initial node masses `μ`.
    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn is_committed(&self, e: usize) -> bool {
        self.committed[e]
    }

    /// Gain of edge `e` under the current masses.
    pub fn edge_gain(&self, e: usize) -> EdgeGain {
        let Edge { u, v } = self.edges[e];
        EdgeGain {
            edge: e,
            gain: gain_formula(
                self.normalized[e],
                self.masses[u as usize],
                self.masses[v as usize],
            ),
        }
    }

    /// Marks `e` selected and adds its normalized weight to both endpoint masses.
    pub fn commit_edge(&mut self, e: usize) -> Result<()> {
        if std::mem::replace(&mut self.committed[e], true) {
            return Err(Error::DoubleCommit(e));
        }
        let Edge { u, v } = self.edges[e];
        let w = self.normalized[e];
        self.masses[u as usize] += w;
        self.masses[v as usize] += w;
        Ok(())
    }

    /// Restores the initial masses and clears all commitments.
    pub fn reset(&mut self) {
        self.masses.copy_from_slice(&self.stationary);
        self.committed.iter_mut().for_each(|c| *c = false);
    }

    /// Entropy rate of the random walk that follows `selected` edges and
    /// keeps every unselected incident weight as a self-loop:
    /// `-Σ_i μ_i Σ_j p_ij ln p_ij` with `p_ij = w_ij / w_i`.
    ///
    /// Evaluated from scratch; independent of the committed state.
    pub fn entropy_rate(&self, selected: &[usize]) -> f64 {
        let n = self.node_count();
        let mut incident = vec![0.0f64; n];
        for (e, &wt) in self.edges.iter().zip(&self.weights) {
            incident[e.u as usize] += wt;
            incident[e.v as usize] += wt;
        }
        let mut chosen = vec![false; self.edges.len()];
        for &e in selected {
            chosen[e] = true;
        }
        let mut out_mass = vec![0.0f64; n];
        let mut terms = vec![0.0f64; n];
        for (e, edge) in self.edges.iter().enumerate().filter(|(e, _)| chosen[*e]) {
            let wt = self.weights[e];
            for node in [edge.u as usize, edge.v as usize] {
                let wi = incident[node];
                if wi > 0.0 {
                    let p = wt / wi;
                    out_mass[node] += p;
                    terms[node] -= xlogx(p);
                }
            }
        }
        (0..n)
            .filter(|&i| incident[i] > 0.0)
            .map(|i| {
                let self_loop = (1.0 - out_mass[i]).max(0.0);
                (incident[i] / self.w_total) * (terms[i] - xlogx(self_loop))
            })
            .sum()
    }
}
