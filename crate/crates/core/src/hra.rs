//! Homophilic relation augmentation: positives are original social
//! neighbors whose homophily clears a normalized threshold, and an InfoNCE
//! objective over cosine similarities of the encoder outputs pulls them
//! together.

use crate::graph::SocialGraph;
use crate::homophily::HomophilyTable;
use crate::matrix::{dot, norm, Matrix};
use crate::par;
use crate::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct PositiveSampleSets {
    /// Sorted positive users per user.
    pub per_user: Vec<Vec<usize>>,
    pub threshold: f64,
    pub zeta: f64,
}

impl PositiveSampleSets {
    pub fn of(&self, u: usize) -> &[usize] {
        &self.per_user[u]
    }

    pub fn total(&self) -> usize {
        self.per_user.iter().map(Vec::len).sum()
    }
}

/// Threshold `h_min + zeta * (h_max - h_min)`.
pub fn positive_threshold(table: &HomophilyTable, zeta: f64) -> f64 {
    table.h_min + zeta * (table.h_max - table.h_min)
}

/// Keeps neighbors in the original social graph whose edge homophily is
/// strictly above the normalized threshold.
pub fn select_positives(table: &HomophilyTable, original: &SocialGraph, zeta: f64) -> PositiveSampleSets {
    assert!((0.0..=1.0).contains(&zeta), "zeta must lie in [0, 1]");
    let threshold = positive_threshold(table, zeta);
    let mut per_user = vec![Vec::new(); original.num_users()];
    for (i, j) in original.pairs() {
        let h = table
            .ratio(i, j)
            .expect("homophily table must cover the original social graph");
        if h > threshold {
            per_user[i].push(j);
            per_user[j].push(i);
        }
    }
    for p in &mut per_user {
        p.sort_unstable();
    }
    PositiveSampleSets {
        per_user,
        threshold,
        zeta,
    }
}

fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// InfoNCE summed over `anchors`, with its gradient w.r.t. `z`.
///
/// For anchor `u` the negatives are the users of `negative_pool` (all users
/// when `None`) that are neither `u` nor positives of `u`. Anchors without
/// positives contribute nothing.
pub fn infonce_loss(
    z: &Matrix,
    positives: &PositiveSampleSets,
    anchors: &[usize],
    negative_pool: Option<&[usize]>,
    tau: f64,
) -> (f64, Matrix) {
    assert!(tau > 0.0, "temperature must be positive");
    let m = z.rows();
    let d = z.cols();
    let norms: Vec<Real> = (0..m).map(|i| norm(z.row(i))).collect();
    let mut unit = z.clone();
    for (i, &n) in norms.iter().enumerate() {
        if n > 0.0 {
            unit.row_mut(i).iter_mut().for_each(|x| *x /= n);
        }
    }
    let all_users: Vec<usize>;
    let pool: &[usize] = match negative_pool {
        Some(p) => p,
        None => {
            all_users = (0..m).collect();
            &all_users
        }
    };

    // per anchor: loss and dL/dc for each partner
    let per_anchor: Vec<(f64, Vec<(usize, f64)>)> = par::map_indices(anchors.len(), |k| {
        let u = anchors[k];
        let pos = positives.of(u);
        if pos.is_empty() {
            return (0.0, Vec::new());
        }
        let negs: Vec<usize> = pool
            .iter()
            .copied()
            .filter(|&j| j != u && pos.binary_search(&j).is_err())
            .collect();
        let logit = |j: usize| dot(unit.row(u), unit.row(j)) as f64 / tau;
        let pos_logits: Vec<f64> = pos.iter().map(|&p| logit(p)).collect();
        let neg_logits: Vec<f64> = negs.iter().map(|&j| logit(j)).collect();
        let lse_pos = log_sum_exp(pos_logits.iter().copied());
        let lse_all = log_sum_exp(pos_logits.iter().chain(&neg_logits).copied());
        let loss = lse_all - lse_pos;

        let mut coeffs = Vec::with_capacity(pos.len() + negs.len());
        for (&p, &s) in pos.iter().zip(&pos_logits) {
            coeffs.push((p, ((s - lse_all).exp() - (s - lse_pos).exp()) / tau));
        }
        for (&j, &s) in negs.iter().zip(&neg_logits) {
            coeffs.push((j, (s - lse_all).exp() / tau));
        }
        (loss, coeffs)
    });

    let mut loss = 0.0;
    let mut grad_unit = Matrix::zeros(m, d);
    for (&u, (l, coeffs)) in anchors.iter().zip(&per_anchor) {
        loss += l;
        for &(j, a) in coeffs {
            let a = a as Real;
            for k in 0..d {
                grad_unit[(u, k)] += a * unit[(j, k)];
                grad_unit[(j, k)] += a * unit[(u, k)];
            }
        }
    }

    // through the row normalization: (I - u u^T) g / |z|
    let mut grad_z = grad_unit;
    par::for_each_row(grad_z.as_mut_slice(), d, |i, g| {
        let n = norms[i];
        if n == 0.0 {
            g.iter_mut().for_each(|x| *x = 0.0);
            return;
        }
        let u = unit.row(i);
        let proj = dot(g, u);
        for (gk, &uk) in g.iter_mut().zip(u) {
            *gk = (*gk - proj * uk) / n;
        }
    });
    (loss, grad_z)
}
