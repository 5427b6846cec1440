use std::cmp::Ordering;
use std::fmt::Write as _;

use crate::graph::SocialGraph;
use crate::par;
use crate::Real;

use super::{pairwise_cosine, CosineSimilarity, UserCodes};

#[derive(Clone, Debug, PartialEq)]
pub struct CutResult {
    pub cut: Vec<(usize, usize)>,
    pub remain: Vec<(usize, usize)>,
}

impl CutResult {
    /// Number of cut edges.
    pub fn count(&self) -> usize {
        self.cut.len()
    }
}

/// Splits the social edges by similarity: `c <= 0` is cut, the rest remain.
pub fn cut_edges(social: &SocialGraph, sim: &CosineSimilarity) -> CutResult {
    let (cut, remain) = social.pairs().partition(|&(i, j)| sim.get(i, j) <= 0.0);
    CutResult { cut, remain }
}

/// Similarity-descending order with lexicographic tie-break.
fn by_similarity(a: &(usize, usize, Real), b: &(usize, usize, Real)) -> Ordering {
    b.2.total_cmp(&a.2).then((a.0, a.1).cmp(&(b.0, b.1)))
}

fn keep_top(mut v: Vec<(usize, usize, Real)>, k: usize) -> Vec<(usize, usize, Real)> {
    if v.len() > k {
        if k == 0 {
            return Vec::new();
        }
        v.select_nth_unstable_by(k - 1, by_similarity);
        v.truncate(k);
    }
    v
}

/// The `count` highest-similarity user pairs that are not social edges and
/// have `c > 0`, ties broken by ascending `(i, j)`.
///
/// With `candidate_cap = Some(k)` only each user's `k` most similar
/// non-neighbors are candidates, which bounds memory for large user sets.
pub fn add_edges(social: &SocialGraph, sim: &CosineSimilarity, count: usize, candidate_cap: Option<usize>) -> Vec<(usize, usize)> {
    if count == 0 {
        return Vec::new();
    }
    let m = sim.num_users();
    let adjacency = social.adjacency();
    let is_edge = |i: usize, j: usize| adjacency[i].binary_search_by_key(&j, |e| e.0).is_ok();

    let per_row: Vec<Vec<(usize, usize, Real)>> = par::map_indices(m, |i| {
        let (start, keep) = match candidate_cap {
            None => (i + 1, count),
            Some(k) => (0, k),
        };
        let row: Vec<(usize, usize, Real)> = (start..m)
            .filter(|&j| j != i && !is_edge(i, j))
            .filter_map(|j| {
                let c = sim.get(i, j);
                (c > 0.0).then(|| (i.min(j), i.max(j), c))
            })
            .collect();
        keep_top(row, keep)
    });

    let mut all: Vec<(usize, usize, Real)> = per_row.into_iter().flatten().collect();
    all.sort_by(by_similarity);
    if candidate_cap.is_some() {
        all.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);
    }
    all.truncate(count);
    all.into_iter().map(|(i, j, _)| (i, j)).collect()
}

/// Rewired graph over `remain ∪ add` with min-max normalized similarities
/// as weights. A degenerate similarity range gives every edge weight 1.
pub fn build_rewired(num_users: usize, remain: &[(usize, usize)], add: &[(usize, usize)], sim: &CosineSimilarity) -> SocialGraph {
    let scored: Vec<(usize, usize, f64)> = remain
        .iter()
        .chain(add)
        .map(|&(i, j)| (i, j, sim.get(i, j) as f64))
        .collect();
    if scored.is_empty() {
        return SocialGraph::empty(num_users);
    }
    let lo = scored.iter().map(|e| e.2).fold(f64::INFINITY, f64::min);
    let hi = scored.iter().map(|e| e.2).fold(f64::NEG_INFINITY, f64::max);
    let weighted: Vec<(usize, usize, f64)> = scored
        .into_iter()
        .map(|(i, j, c)| {
            let w = if hi > lo { (c - lo) / (hi - lo) } else { 1.0 };
            (i, j, w)
        })
        .collect();
    SocialGraph::from_weighted(num_users, &weighted)
}

/// Which parts of the rewiring pipeline run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RewireOptions {
    /// Remove edges with non-positive similarity. When off, the number of
    /// edges that would have been cut still sets how many are added.
    pub cut: bool,
    pub add: bool,
    /// Overwrite all rewired weights with 1.
    pub unit_weights: bool,
    pub candidate_cap: Option<usize>,
}

impl Default for RewireOptions {
    fn default() -> Self {
        RewireOptions {
            cut: true,
            add: true,
            unit_weights: false,
            candidate_cap: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RewireReport {
    pub epoch: Option<usize>,
    pub cut_edges: Vec<(usize, usize)>,
    pub added_edges: Vec<(usize, usize)>,
    /// Edges with non-positive similarity (cut or, for add-only, would-be cut).
    pub m: usize,
    pub weight_min: f64,
    pub weight_max: f64,
    pub weight_mean: f64,
}

impl RewireReport {
    pub fn csv_header() -> &'static str {
        "epoch,cut_count,add_count"
    }

    pub fn csv_row(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "{},{},{}",
            self.epoch.map_or(String::new(), |e| e.to_string()),
            self.cut_edges.len(),
            self.added_edges.len()
        );
        s
    }
}

/// Cut, add and re-weight against the original graph using similarities of
/// the given encoder outputs.
pub fn rewire(social: &SocialGraph, codes: &UserCodes, options: &RewireOptions) -> (SocialGraph, RewireReport) {
    rewire_with(social, &pairwise_cosine(codes), options)
}

pub fn rewire_with(social: &SocialGraph, sim: &CosineSimilarity, options: &RewireOptions) -> (SocialGraph, RewireReport) {
    let split = cut_edges(social, sim);
    let m = split.count();
    let (cut, remain) = if options.cut {
        (split.cut, split.remain)
    } else {
        (Vec::new(), social.pairs().collect())
    };
    let added = if options.add {
        add_edges(social, sim, m, options.candidate_cap)
    } else {
        Vec::new()
    };
    let mut rewired = build_rewired(social.num_users(), &remain, &added, sim);
    if options.unit_weights {
        rewired = rewired.with_unit_weights();
    }
    let (weight_min, weight_max, weight_mean) = rewired.weight_stats().unwrap_or((0.0, 0.0, 0.0));
    let report = RewireReport {
        epoch: None,
        cut_edges: cut,
        added_edges: added,
        m,
        weight_min,
        weight_max,
        weight_mean,
    };
    (rewired, report)
}
