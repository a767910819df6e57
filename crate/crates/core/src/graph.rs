//! Undirected coupling graph induced by a symmetric weight matrix.
//!
//! An ordered pair `(i, j)` with `i != j` is an edge exactly when
//! `a[i][j] > 0`. Non-edges are counted over ordered off-diagonal pairs, so
//! `|W| + |W^c| = n (n - 1)`, and hop distances count edges, not vertices.
//! With these conventions the single-edge graph on two vertices has
//! `l_star = 1`.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};

/// Symmetric, nonnegative coupling matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    weights: Vec<f64>,
    /// Unordered edges `(i, j, a_ij)` with `i < j`.
    edges: Vec<(usize, usize, f64)>,
}

/// Connectivity summary of a [`WeightedGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GraphConstants {
    pub connected: bool,
    /// Hop diameter; `None` for a disconnected graph.
    pub diameter: Option<usize>,
    /// Ordered edge count `|W|`.
    pub w_card: usize,
    /// Ordered off-diagonal non-edge count `|W^c|`.
    pub wc_card: usize,
    /// `1 / (1 + diameter * wc_card)`; `None` for a disconnected graph.
    pub l_star: Option<f64>,
}

impl WeightedGraph {
    /// Builds a graph from a square row-major matrix, rejecting asymmetric,
    /// negative, non-finite or nonzero-diagonal input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::invalid("coupling", "matrix is empty"));
        }
        let mut weights = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid(
                    "coupling",
                    format!("row {i} has {} entries, expected {n}", row.len()),
                ));
            }
            weights.extend_from_slice(row);
        }
        Self::from_flat(n, weights)
    }

    pub fn from_flat(n: usize, weights: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("coupling", "matrix is empty"));
        }
        if weights.len() != n * n {
            return Err(Error::invalid(
                "coupling",
                format!("expected {} entries, got {}", n * n, weights.len()),
            ));
        }
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let w = weights[i * n + j];
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::invalid(
                        "coupling",
                        format!("entry [{i}][{j}] = {w} must be finite and >= 0"),
                    ));
                }
                if i == j && w != 0.0 {
                    return Err(Error::invalid(
                        "coupling",
                        format!("diagonal entry [{i}][{i}] = {w} must be 0"),
                    ));
                }
                if w != weights[j * n + i] {
                    return Err(Error::invalid(
                        "coupling",
                        format!("matrix is not symmetric at [{i}][{j}]"),
                    ));
                }
                if i < j && w > 0.0 {
                    edges.push((i, j, w));
                }
            }
        }
        Ok(Self { n, weights, edges })
    }

    /// Two vertices joined by one edge of weight `a`.
    pub fn pair(a: f64) -> Result<Self> {
        Self::from_flat(2, vec![0.0, a, a, 0.0])
    }

    /// Complete graph on `n` vertices with uniform weight `a`.
    pub fn complete(n: usize, a: f64) -> Result<Self> {
        let mut w = vec![a; n * n];
        for i in 0..n {
            w[i * n + i] = 0.0;
        }
        Self::from_flat(n, w)
    }

    /// Path `0 - 1 - ... - (n-1)` with uniform weight `a`.
    pub fn path(n: usize, a: f64) -> Result<Self> {
        let mut w = vec![0.0; n * n];
        for i in 1..n {
            w[(i - 1) * n + i] = a;
            w[i * n + i - 1] = a;
        }
        Self::from_flat(n, w)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    /// Unordered edges `(i, j, a_ij)` with `i < j`.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i != j && self.weight(i, j) > 0.0
    }

    /// Ordered edge count `|W|`.
    pub fn w_card(&self) -> usize {
        2 * self.edges.len()
    }

    /// Ordered off-diagonal non-edge count `|W^c|`.
    pub fn wc_card(&self) -> usize {
        self.n * (self.n - 1) - self.w_card()
    }

    fn hop_distances_from(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap_or(0);
            for (v, slot) in dist.iter_mut().enumerate() {
                if slot.is_none() && self.has_edge(u, v) {
                    *slot = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.hop_distances_from(0).iter().all(Option::is_some)
    }

    /// Largest shortest-path length in hops over all vertex pairs.
    pub fn hop_diameter(&self) -> Result<usize> {
        let mut diameter = 0;
        for s in 0..self.n {
            for d in self.hop_distances_from(s) {
                diameter = diameter.max(d.ok_or(Error::GraphNotConnected)?);
            }
        }
        Ok(diameter)
    }

    /// `L* = 1 / (1 + diameter * |W^c|)`.
    pub fn l_star(&self) -> Result<f64> {
        let diameter = self.hop_diameter()?;
        Ok(1.0 / (1.0 + (diameter * self.wc_card()) as f64))
    }

    pub fn constants(&self) -> GraphConstants {
        let diameter = self.hop_diameter().ok();
        GraphConstants {
            connected: diameter.is_some(),
            diameter,
            w_card: self.w_card(),
            wc_card: self.wc_card(),
            l_star: diameter.map(|d| 1.0 / (1.0 + (d * self.wc_card()) as f64)),
        }
    }
}
