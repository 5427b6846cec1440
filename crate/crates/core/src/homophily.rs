//! Preference-aware homophily: Jaccard overlap of users' training item sets,
//! per social edge and averaged over the graph.

use std::fmt::Write as _;

use crate::graph::{InteractionGraph, SocialGraph};
use crate::par;

pub const DEFAULT_BINS: usize = 50;

/// Jaccard similarity of two sorted, duplicate-free item lists. Zero when
/// either list is empty.
pub fn jaccard(a: &[usize], b: &[usize]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let (mut i, mut j, mut common) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    common as f64 / (a.len() + b.len() - common) as f64
}

/// Edge-wise homophily ratio of users `i` and `j` over training items.
pub fn edge_homophily(i: usize, j: usize, interactions: &InteractionGraph) -> f64 {
    jaccard(interactions.train_items(i), interactions.train_items(j))
}

#[derive(Clone, Debug, PartialEq)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HomophilyTable {
    /// `(i, j, h)` per undirected edge, `i < j`, in the social graph's order.
    pub edges: Vec<(usize, usize, f64)>,
    pub graph_ratio: f64,
    pub histogram: Vec<HistogramBin>,
    pub h_min: f64,
    pub h_max: f64,
}

impl HomophilyTable {
    /// Builds the summary from precomputed per-edge ratios.
    pub fn from_ratios(edges: Vec<(usize, usize, f64)>, bins: usize) -> Self {
        let n = edges.len();
        let graph_ratio = if n == 0 {
            0.0
        } else {
            edges.iter().map(|e| e.2).sum::<f64>() / n as f64
        };
        let h_min = edges.iter().map(|e| e.2).fold(f64::INFINITY, f64::min);
        let h_max = edges.iter().map(|e| e.2).fold(f64::NEG_INFINITY, f64::max);
        let (h_min, h_max) = if n == 0 { (0.0, 0.0) } else { (h_min, h_max) };

        let bins = bins.max(1);
        let width = 1.0 / bins as f64;
        let mut histogram: Vec<HistogramBin> = (0..bins)
            .map(|b| HistogramBin {
                lower: b as f64 * width,
                upper: if b + 1 == bins { 1.0 } else { (b + 1) as f64 * width },
                count: 0,
            })
            .collect();
        for e in &edges {
            let b = ((e.2 * bins as f64) as usize).min(bins - 1);
            histogram[b].count += 1;
        }
        HomophilyTable {
            edges,
            graph_ratio,
            histogram,
            h_min,
            h_max,
        }
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Ratio stored for the edge `{i, j}`, if it is an edge.
    pub fn ratio(&self, i: usize, j: usize) -> Option<f64> {
        let key = (i.min(j), i.max(j));
        self.edges
            .binary_search_by(|e| (e.0, e.1).cmp(&key))
            .ok()
            .map(|k| self.edges[k].2)
    }

    /// Histogram as `bin_lower,bin_upper,count` rows with a header.
    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("bin_lower,bin_upper,count\n");
        for b in &self.histogram {
            let _ = writeln!(out, "{},{},{}", b.lower, b.upper, b.count);
        }
        out
    }
}

/// Per-edge ratios and the graph-wise mean over undirected edges.
pub fn graph_homophily(social: &SocialGraph, interactions: &InteractionGraph, bins: usize) -> HomophilyTable {
    let edges = social.edges();
    let ratios = par::map_indices(edges.len(), |k| {
        let (i, j, _) = edges[k];
        (i, j, edge_homophily(i, j, interactions))
    });
    HomophilyTable::from_ratios(ratios, bins)
}
