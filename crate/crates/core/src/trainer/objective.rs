use crate::backbone::{bpr_loss, Propagator, Triple};
use crate::diff::{EmbeddingState, Gradients};
use crate::hra::{infonce_loss, PositiveSampleSets};
use crate::rewire::{Encoder, UserCodes};
use crate::Real;

use super::NegativeMode;

/// Loss values of one batch.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BatchLoss {
    pub total: f64,
    pub rec: f64,
    pub cl: f64,
}

/// `L_rec + lambda * L_cl` on one batch, where `L_rec` is the mean BPR over
/// the triples and `L_cl` the mean InfoNCE over the batch's distinct users.
pub struct JointObjective<'a> {
    pub propagator: &'a Propagator,
    pub encoder: &'a Encoder,
    pub positives: &'a PositiveSampleSets,
    pub lambda: f64,
    pub tau: f64,
    pub negatives: NegativeMode,
}

/// Distinct users of a batch, ascending.
pub fn batch_users(batch: &[Triple]) -> Vec<usize> {
    let mut users: Vec<usize> = batch.iter().map(|t| t.0).collect();
    users.sort_unstable();
    users.dedup();
    users
}

impl JointObjective<'_> {
    /// Loss and gradients w.r.t. every table of `state`. `codes` may carry a
    /// precomputed encoder output for the current state.
    pub fn evaluate(&self, state: &EmbeddingState, batch: &[Triple], codes: Option<&UserCodes>) -> (BatchLoss, Gradients) {
        let mut grads = Gradients::zeros_like(state);
        if batch.is_empty() {
            return (BatchLoss::default(), grads);
        }
        let out = self.propagator.forward(state.users(), state.items());
        let (sum, mut gp, mut gq) = bpr_loss(batch, &out.users, &out.items);
        let inv = 1.0 / batch.len() as Real;
        gp.scale(inv);
        gq.scale(inv);
        let (gu, gi) = self.propagator.backward(&gp, &gq);
        grads.user = gu;
        grads.item = gi;
        let rec = sum / batch.len() as f64;

        let mut cl = 0.0;
        if self.lambda > 0.0 {
            let owned;
            let codes = match codes {
                Some(c) => c,
                None => {
                    owned = self.encoder.encode(state.encoder_items());
                    &owned
                }
            };
            let anchors = batch_users(batch);
            let pool = match self.negatives {
                NegativeMode::Batch => Some(anchors.as_slice()),
                NegativeMode::Exact => None,
            };
            let (cl_sum, mut gz) = infonce_loss(&codes.z, self.positives, &anchors, pool, self.tau);
            cl = cl_sum / anchors.len() as f64;
            gz.scale((self.lambda / anchors.len() as f64) as Real);
            let g_items = self.encoder.backward(&gz);
            grads.encoder_items_mut().add_scaled(&g_items, 1.0);
        }
        let loss = BatchLoss {
            total: rec + self.lambda * cl,
            rec,
            cl,
        };
        (loss, grads)
    }

    /// Loss only, for finite-difference probes.
    pub fn loss(&self, state: &EmbeddingState, batch: &[Triple]) -> f64 {
        self.evaluate(state, batch, None).0.total
    }
}
