//! Full-ranking top-K evaluation.

use std::cmp::Ordering;
use std::fmt::Write as _;

use crate::matrix::{dot, Matrix};
use crate::par;
use crate::Real;

pub const DEFAULT_K: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct UserMetrics {
    pub user: usize,
    pub recall: f64,
    pub precision: f64,
    pub ndcg: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub k: usize,
    pub recall: f64,
    pub precision: f64,
    pub ndcg: f64,
    /// Users with at least one relevant item.
    pub users: usize,
    pub per_user: Option<Vec<UserMetrics>>,
}

impl MetricsReport {
    /// `metric=value` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "recall@{}={}", self.k, self.recall);
        let _ = writeln!(s, "precision@{}={}", self.k, self.precision);
        let _ = writeln!(s, "ndcg@{}={}", self.k, self.ndcg);
        let _ = writeln!(s, "users={}", self.users);
        s
    }

    pub fn to_csv(&self) -> String {
        format!(
            "k,recall,precision,ndcg,users\n{},{},{},{},{}\n",
            self.k, self.recall, self.precision, self.ndcg, self.users
        )
    }
}

#[inline]
fn by_score(scores: &[Real]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    move |&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b))
}

/// All items outside `exclude` (sorted), by descending score then ascending
/// index.
pub fn rank_items(u: usize, users: &Matrix, items: &Matrix, exclude: &[usize]) -> Vec<usize> {
    let scores = user_scores(u, users, items);
    let mut order: Vec<usize> = (0..items.rows())
        .filter(|v| exclude.binary_search(v).is_err())
        .collect();
    order.sort_by(by_score(&scores));
    order
}

/// First `k` entries of [`rank_items`] without sorting the whole catalogue.
pub fn top_k(scores: &[Real], exclude: &[usize], k: usize) -> Vec<usize> {
    let mut cand: Vec<usize> = (0..scores.len())
        .filter(|v| exclude.binary_search(v).is_err())
        .collect();
    let cmp = by_score(scores);
    if cand.len() > k && k > 0 {
        cand.select_nth_unstable_by(k - 1, &cmp);
        cand.truncate(k);
    }
    cand.truncate(k);
    cand.sort_by(cmp);
    cand
}

fn user_scores(u: usize, users: &Matrix, items: &Matrix) -> Vec<Real> {
    let p = users.row(u);
    (0..items.rows()).map(|v| dot(p, items.row(v))).collect()
}

/// Recall, precision and NDCG of one ranked list against a sorted relevant
/// set. `None` when the relevant set is empty.
pub fn user_metrics(ranking: &[usize], relevant: &[usize], k: usize) -> Option<(f64, f64, f64)> {
    if relevant.is_empty() {
        return None;
    }
    let mut hits = 0usize;
    let mut dcg = 0.0;
    for (pos, v) in ranking.iter().take(k).enumerate() {
        if relevant.binary_search(v).is_ok() {
            hits += 1;
            dcg += 1.0 / ((pos + 2) as f64).log2();
        }
    }
    let ideal: f64 = (0..relevant.len().min(k))
        .map(|pos| 1.0 / ((pos + 2) as f64).log2())
        .sum();
    Some((hits as f64 / relevant.len() as f64, hits as f64 / k as f64, dcg / ideal))
}

/// Means over users with a non-empty relevant set.
pub fn metrics_at_k(rankings: &[Vec<usize>], relevant: &[Vec<usize>], k: usize, keep_per_user: bool) -> MetricsReport {
    assert!(k >= 1, "K must be at least 1");
    let mut per_user = Vec::new();
    let (mut r, mut p, mut n) = (0.0, 0.0, 0.0);
    for (u, (ranking, rel)) in rankings.iter().zip(relevant).enumerate() {
        if let Some((ru, pu, nu)) = user_metrics(ranking, rel, k) {
            r += ru;
            p += pu;
            n += nu;
            per_user.push(UserMetrics {
                user: u,
                recall: ru,
                precision: pu,
                ndcg: nu,
            });
        }
    }
    let users = per_user.len();
    let denom = users.max(1) as f64;
    MetricsReport {
        k,
        recall: r / denom,
        precision: p / denom,
        ndcg: n / denom,
        users,
        per_user: keep_per_user.then_some(per_user),
    }
}

/// Scores every item for every user with a relevant item, excludes
/// `exclude[u]`, and reports metrics at `k`.
pub fn evaluate(users: &Matrix, items: &Matrix, exclude: &[Vec<usize>], relevant: &[Vec<usize>], k: usize) -> MetricsReport {
    let rankings = par::map_indices(users.rows(), |u| {
        if relevant[u].is_empty() {
            return Vec::new();
        }
        top_k(&user_scores(u, users, items), &exclude[u], k)
    });
    metrics_at_k(&rankings, relevant, k, false)
}
