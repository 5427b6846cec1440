//! Graph-based social recommendation backbone.
//!
//! Propagation is linear, so the backward pass is the same recurrence run
//! with transposed operators:
//!
//! ```text
//! P(l+1) = A_ui Q(l) + A_uu P(l)        Q(l+1) = A_iu P(l)
//! P = mean(P(0..=L))                    Q = mean(Q(0..=L))
//! ```
//!
//! The generic variant row-normalizes every operator; the LightGCN+social
//! variant uses `1/sqrt(|N_u||N_v|)` for the interaction operators and keeps
//! the row-normalized social operator.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::diff::{EmbeddingState, Gradients};
use crate::error::{Error, Result};
use crate::graph::{normalized_views, InteractionGraph, SocialGraph};
use crate::matrix::{dot, Matrix};
use crate::sparse::Csr;
use crate::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BackboneKind {
    /// Row-normalized interaction and social operators.
    Generic,
    /// Symmetric interaction normalization plus a row-normalized social term.
    LightGcnSocial,
}

impl fmt::Display for BackboneKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackboneKind::Generic => "generic",
            BackboneKind::LightGcnSocial => "lightgcn-social",
        })
    }
}

impl FromStr for BackboneKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "generic" | "generic-eq3" => Ok(BackboneKind::Generic),
            "lightgcn-social" | "lightgcn" => Ok(BackboneKind::LightGcnSocial),
            other => Err(format!("unknown backbone {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropagatedEmbeddings {
    pub users: Matrix,
    pub items: Matrix,
    pub layers: usize,
}

/// Linear operators of one backbone, with transposes cached for backward.
#[derive(Clone, Debug)]
pub struct Propagator {
    kind: BackboneKind,
    layers: usize,
    user_user: Csr,
    user_item: Csr,
    item_user: Csr,
    user_user_t: Csr,
    user_item_t: Csr,
    item_user_t: Csr,
}

impl Propagator {
    pub fn new(kind: BackboneKind, interactions: &InteractionGraph, social: &SocialGraph, layers: usize) -> Self {
        assert!(layers >= 1, "propagation needs at least one layer");
        let (user_item, item_user) = match kind {
            BackboneKind::Generic => {
                let v = normalized_views(interactions, &SocialGraph::empty(interactions.num_users()));
                (v.user_item, v.item_user)
            }
            BackboneKind::LightGcnSocial => {
                let sym = interactions.train_matrix().sym_normalized();
                let t = sym.transpose();
                (sym, t)
            }
        };
        let user_user = social.to_csr().row_normalized();
        Propagator {
            kind,
            layers,
            user_user_t: user_user.transpose(),
            user_item_t: user_item.transpose(),
            item_user_t: item_user.transpose(),
            user_user,
            user_item,
            item_user,
        }
    }

    /// Swaps in a new social graph, keeping the interaction operators.
    pub fn set_social(&mut self, social: &SocialGraph) {
        self.user_user = social.to_csr().row_normalized();
        self.user_user_t = self.user_user.transpose();
    }

    pub fn kind(&self) -> BackboneKind {
        self.kind
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn social_operator(&self) -> &Csr {
        &self.user_user
    }

    pub fn forward(&self, users0: &Matrix, items0: &Matrix) -> PropagatedEmbeddings {
        let scale = 1.0 / (self.layers + 1) as Real;
        let mut p = users0.clone();
        let mut q = items0.clone();
        let mut p_sum = p.clone();
        let mut q_sum = q.clone();
        for _ in 0..self.layers {
            let mut p_next = self.user_item.mul_dense(&q);
            self.user_user.mul_dense_add(&p, &mut p_next);
            let q_next = self.item_user.mul_dense(&p);
            p_sum.add_scaled(&p_next, 1.0);
            q_sum.add_scaled(&q_next, 1.0);
            p = p_next;
            q = q_next;
        }
        p_sum.scale(scale);
        q_sum.scale(scale);
        PropagatedEmbeddings {
            users: p_sum,
            items: q_sum,
            layers: self.layers,
        }
    }

    /// Pulls gradients w.r.t. the propagated outputs back to the layer-0
    /// tables.
    pub fn backward(&self, grad_users: &Matrix, grad_items: &Matrix) -> (Matrix, Matrix) {
        let scale = 1.0 / (self.layers + 1) as Real;
        let gp = grad_users.scaled(scale);
        let gq = grad_items.scaled(scale);
        let mut adj_p = gp.clone();
        let mut adj_q = gq.clone();
        for _ in 0..self.layers {
            let mut next_p = gp.clone();
            self.user_user_t.mul_dense_add(&adj_p, &mut next_p);
            self.item_user_t.mul_dense_add(&adj_q, &mut next_p);
            let mut next_q = gq.clone();
            self.user_item_t.mul_dense_add(&adj_p, &mut next_q);
            adj_p = next_p;
            adj_q = next_q;
        }
        (adj_p, adj_q)
    }
}

/// Generic backbone forward pass on base embeddings.
pub fn propagate(social: &SocialGraph, interactions: &InteractionGraph, state: &EmbeddingState, layers: usize) -> PropagatedEmbeddings {
    Propagator::new(BackboneKind::Generic, interactions, social, layers).forward(state.users(), state.items())
}

/// LightGCN+social forward pass on base embeddings.
pub fn propagate_lightgcn_social(
    social: &SocialGraph,
    interactions: &InteractionGraph,
    state: &EmbeddingState,
    layers: usize,
) -> PropagatedEmbeddings {
    Propagator::new(BackboneKind::LightGcnSocial, interactions, social, layers).forward(state.users(), state.items())
}

#[inline]
pub fn score(users: &Matrix, items: &Matrix, u: usize, v: usize) -> Real {
    dot(users.row(u), items.row(v))
}

/// `-log(sigmoid(x))`, stable for large `|x|`.
#[inline]
pub fn neg_log_sigmoid(x: f64) -> f64 {
    if x > 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// A `(user, positive item, negative item)` training triple.
pub type Triple = (usize, usize, usize);

/// BPR loss summed over the batch, with gradients w.r.t. the propagated
/// user and item embeddings.
pub fn bpr_loss(batch: &[Triple], users: &Matrix, items: &Matrix) -> (f64, Matrix, Matrix) {
    let d = users.cols();
    let mut grad_u = Matrix::zeros(users.rows(), d);
    let mut grad_i = Matrix::zeros(items.rows(), d);
    let mut loss = 0.0;
    for &(u, v, w) in batch {
        let x = (score(users, items, u, v) - score(users, items, u, w)) as f64;
        loss += neg_log_sigmoid(x);
        let g = -sigmoid(-x) as Real;
        let pu = users.row(u);
        for k in 0..d {
            let diff = items[(v, k)] - items[(w, k)];
            grad_u[(u, k)] += g * diff;
            grad_i[(v, k)] += g * pu[k];
            grad_i[(w, k)] -= g * pu[k];
        }
    }
    (loss, grad_u, grad_i)
}

/// Propagates the base tables, evaluates BPR, and back-propagates to the
/// base tables. Returns the loss and gradients for the backbone slots only.
pub fn bpr_with_grads(propagator: &Propagator, state: &EmbeddingState, batch: &[Triple]) -> (f64, Gradients) {
    let out = propagator.forward(state.users(), state.items());
    let (loss, gp, gq) = bpr_loss(batch, &out.users, &out.items);
    let (gu0, gi0) = propagator.backward(&gp, &gq);
    let mut grads = Gradients::zeros_like(state);
    grads.user = gu0;
    grads.item = gi0;
    (loss, grads)
}

/// Draws one item uniformly from those `user` has not interacted with in
/// training. `train_items` must be sorted.
pub fn sample_negative<R: Rng>(user: usize, train_items: &[usize], num_items: usize, rng: &mut R) -> Result<usize> {
    let free = num_items.saturating_sub(train_items.len());
    if free == 0 {
        return Err(Error::NoNegativeItem(user));
    }
    if train_items.len() * 2 < num_items {
        loop {
            let v = rng.gen_range(0..num_items);
            if train_items.binary_search(&v).is_err() {
                return Ok(v);
            }
        }
    }
    // dense users: pick the k-th free item directly
    let mut k = rng.gen_range(0..free);
    let mut next_taken = train_items.iter().peekable();
    for v in 0..num_items {
        if next_taken.peek() == Some(&&v) {
            next_taken.next();
            continue;
        }
        if k == 0 {
            return Ok(v);
        }
        k -= 1;
    }
    unreachable!("free item count was positive")
}

/// One negative per user in `users`, drawn in order from `rng`.
pub fn sample_negatives<R: Rng>(users: &[usize], interactions: &InteractionGraph, rng: &mut R) -> Result<Vec<usize>> {
    users
        .iter()
        .map(|&u| sample_negative(u, interactions.train_items(u), interactions.num_items(), rng))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{self, Stream};

    fn state(users: Matrix, items: Matrix) -> EmbeddingState {
        let mut s = EmbeddingState::init(users.rows(), items.rows(), users.cols(), false, 0).unwrap();
        s.user.value = users;
        s.item.value = items;
        s
    }

    #[test]
    fn single_pair_swaps_embeddings() {
        let r = InteractionGraph::from_edges(1, 1, &[(0, 0, 1.0)]).unwrap();
        let s = SocialGraph::empty(1);
        let st = state(Matrix::from_rows(&[vec![1.0, 2.0]]), Matrix::from_rows(&[vec![5.0, -1.0]]));
        let prop = Propagator::new(BackboneKind::Generic, &r, &s, 1);
        // layer 1 is (q, p); outputs are the layer means
        let out = prop.forward(st.users(), st.items());
        assert_eq!(out.users.row(0), &[3.0, 0.5]);
        assert_eq!(out.items.row(0), &[3.0, 0.5]);
        let lg = propagate_lightgcn_social(&s, &r, &st, 1);
        assert_eq!(lg.users, out.users);
        assert_eq!(lg.items, out.items);
    }

    #[test]
    fn social_pair_exchanges_user_embeddings() {
        let r = InteractionGraph::from_edges(2, 1, &[]).unwrap_or_else(|_| unreachable!());
        let s = SocialGraph::from_pairs(2, &[(0, 1)]);
        let prop = Propagator::new(BackboneKind::Generic, &r, &s, 1);
        let p0 = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 4.0]]);
        let q0 = Matrix::from_rows(&[vec![7.0, 7.0]]);
        let out = prop.forward(&p0, &q0);
        // mean of layer 0 and layer 1 where layer 1 swaps the rows
        assert_eq!(out.users.row(0), &[0.5, 2.0]);
        assert_eq!(out.users.row(1), &[0.5, 2.0]);
    }

    #[test]
    fn score_is_dot_product() {
        let p = Matrix::from_rows(&[vec![1.0, 2.0]]);
        let q = Matrix::from_rows(&[vec![3.0, 4.0], vec![0.0, 0.0], vec![-2.0, 1.0]]);
        assert_eq!(score(&p, &q, 0, 0), 11.0);
        assert_eq!(score(&p, &q, 0, 1), 0.0);
        assert_eq!(score(&p, &q, 0, 2), 0.0);
    }

    #[test]
    fn equal_scores_cost_ln2() {
        let p = Matrix::from_rows(&[vec![1.0, 1.0]]);
        let q = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let (loss, _, _) = bpr_loss(&[(0, 0, 1)], &p, &q);
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn wide_margin_costs_nothing() {
        let p = Matrix::from_rows(&[vec![1.0]]);
        let q = Matrix::from_rows(&[vec![800.0], vec![-800.0]]);
        let (loss, gp, _) = bpr_loss(&[(0, 0, 1)], &p, &q);
        assert!((0.0..1e-300).contains(&loss));
        assert_eq!(gp[(0, 0)], -0.0);
        let (loss, _, _) = bpr_loss(&[(0, 1, 0)], &p, &q);
        assert!((loss - 1600.0).abs() < 1e-9);
    }

    #[test]
    fn negative_is_the_only_free_item() {
        let mut rng = rng::stream(1, Stream::Negatives);
        let taken: Vec<usize> = (0..10).filter(|&v| v != 6).collect();
        for _ in 0..100 {
            assert_eq!(sample_negative(0, &taken, 10, &mut rng).unwrap(), 6);
        }
    }

    #[test]
    fn negatives_avoid_training_items() {
        let mut rng = rng::stream(2, Stream::Negatives);
        let taken = vec![1, 3, 4, 8, 9];
        for _ in 0..10_000 {
            let v = sample_negative(0, &taken, 12, &mut rng).unwrap();
            assert!(v < 12 && !taken.contains(&v));
        }
    }

    #[test]
    fn negatives_are_seeded() {
        let r = InteractionGraph::from_edges(2, 50, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let users = vec![0, 1, 0, 1, 1];
        let a = sample_negatives(&users, &r, &mut rng::stream(5, Stream::Negatives)).unwrap();
        let b = sample_negatives(&users, &r, &mut rng::stream(5, Stream::Negatives)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn saturated_user_is_an_error() {
        let mut rng = rng::stream(0, Stream::Negatives);
        assert!(matches!(
            sample_negative(3, &[0, 1, 2], 3, &mut rng),
            Err(Error::NoNegativeItem(3))
        ));
    }
}
