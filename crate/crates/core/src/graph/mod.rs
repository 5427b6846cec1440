//! Interaction and social graph storage, I/O, splitting and normalized views.

mod interactions;
mod social;

pub use interactions::{Interaction, InteractionGraph, LoadOptions, Split};
pub use social::SocialGraph;

use crate::sparse::Csr;

/// Row-normalized propagation operators for the generic backbone:
/// `D_S^-1 S`, `D_R^-1 R` and `D_Rt^-1 R^T`.
#[derive(Clone, Debug)]
pub struct NormalizedViews {
    pub social: Csr,
    pub user_item: Csr,
    pub item_user: Csr,
}

/// Builds the row-normalized views of the training interactions and of a
/// (possibly weighted) social graph. Zero-degree rows stay zero.
pub fn normalized_views(interactions: &InteractionGraph, social: &SocialGraph) -> NormalizedViews {
    let r = interactions.train_matrix();
    NormalizedViews {
        social: social.to_csr().row_normalized(),
        item_user: r.transpose().row_normalized(),
        user_item: r.row_normalized(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_row_splits_evenly() {
        let r = InteractionGraph::from_edges(3, 1, &[(0, 0, 1.0)]).unwrap();
        let s = SocialGraph::from_pairs(3, &[(0, 1), (0, 2)]);
        let v = normalized_views(&r, &s);
        assert_eq!(v.social.row(0).1, &[0.5, 0.5]);
        assert_eq!(v.social.row(1).1, &[1.0]);
    }

    #[test]
    fn isolated_user_row_is_zero() {
        let r = InteractionGraph::from_edges(3, 2, &[(0, 0, 1.0), (0, 1, 1.0)]).unwrap();
        let s = SocialGraph::from_pairs(3, &[(0, 1)]);
        let v = normalized_views(&r, &s);
        assert_eq!(v.social.row_nnz(2), 0);
        assert_eq!(v.user_item.row_nnz(1), 0);
        assert_eq!(v.user_item.row_sums(), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn weighted_row_uses_weight_sum() {
        let r = InteractionGraph::from_edges(3, 1, &[(0, 0, 1.0)]).unwrap();
        let s = SocialGraph::from_weighted(3, &[(0, 1, 0.2), (0, 2, 0.6)]);
        let v = normalized_views(&r, &s);
        let (_, vals) = v.social.row(0);
        assert!((vals[0] - 0.25).abs() < 1e-15);
        assert!((vals[1] - 0.75).abs() < 1e-15);
    }
}
