//! Joint training: BPR on the (possibly rewired) social backbone plus a
//! weighted contrastive term, with rewiring gated by strategy.

mod config;
mod history;
mod objective;

use std::time::Instant;

use log::{debug, info};
use rand::seq::SliceRandom;

pub use config::{apply_ablations, Ablations, NegativeMode, Pipeline, Strategy, TrainConfig};
pub use history::{early_stop, stalled_epochs, EpochRecord, TrainHistory};
pub use objective::{batch_users, BatchLoss, JointObjective};

use crate::backbone::{sample_negatives, Propagator, Triple};
use crate::diff::{AdamConfig, EmbeddingState};
use crate::error::{Error, Result};
use crate::eval::{evaluate, MetricsReport};
use crate::graph::{InteractionGraph, SocialGraph, Split};
use crate::homophily::{graph_homophily, DEFAULT_BINS};
use crate::hra::{select_positives, PositiveSampleSets};
use crate::rewire::{pairwise_cosine, rewire_with, Encoder};
use crate::rng::{self, Stream};

/// Result of a training run.
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    /// Tables at the best validation epoch.
    pub best: EmbeddingState,
    pub best_epoch: usize,
    /// Social graph in force at the best validation epoch.
    pub best_social: SocialGraph,
    /// Social graph in force when training ended.
    pub final_social: SocialGraph,
    pub history: TrainHistory,
    pub stopped_early: bool,
}

/// `ceil(train edges / batch size)`.
pub fn batches_per_epoch(train_edges: usize, batch_size: usize) -> usize {
    train_edges.div_ceil(batch_size.max(1))
}

/// Positive sets drawn from the original graph's homophily.
pub fn positives_for(interactions: &InteractionGraph, social: &SocialGraph, zeta: f64) -> PositiveSampleSets {
    let table = graph_homophily(social, interactions, DEFAULT_BINS);
    select_positives(&table, social, zeta)
}

/// Metrics of `state` on `split`, propagating over `social`. Validation
/// excludes training items; test excludes training and validation items.
pub fn evaluate_split(
    config: &TrainConfig,
    interactions: &InteractionGraph,
    social: &SocialGraph,
    state: &EmbeddingState,
    split: Split,
) -> MetricsReport {
    let prop = Propagator::new(config.backbone, interactions, social, config.layers);
    let out = prop.forward(state.users(), state.items());
    let mut exclude = interactions.items_by_user(Split::Train);
    if split == Split::Test {
        for (ex, val) in exclude.iter_mut().zip(interactions.items_by_user(Split::Val)) {
            ex.extend(val);
            ex.sort_unstable();
            ex.dedup();
        }
    }
    let relevant = interactions.items_by_user(split);
    evaluate(&out.users, &out.items, &exclude, &relevant, config.eval_k)
}

fn better(a: &MetricsReport, b: &MetricsReport) -> bool {
    (a.ndcg, a.recall) > (b.ndcg, b.recall)
}

pub fn train(config: &TrainConfig, interactions: &InteractionGraph, social: &SocialGraph) -> Result<TrainOutcome> {
    let pipeline = apply_ablations(config)?;
    if social.num_users() != interactions.num_users() {
        return Err(Error::ShapeMismatch {
            what: "social users",
            expected: (interactions.num_users(), 0),
            got: (social.num_users(), 0),
        });
    }
    let train_edges = interactions.train_edges();
    if train_edges.is_empty() {
        return Err(Error::EmptyGraph("no training interactions".into()));
    }

    let mut state = EmbeddingState::init(
        interactions.num_users(),
        interactions.num_items(),
        config.dim,
        config.separate_encoder,
        config.seed,
    )?;
    state.adam = AdamConfig {
        learning_rate: config.learning_rate,
        l2: config.l2,
        ..AdamConfig::default()
    };

    let encoder = Encoder::new(interactions, config.encoder_layers);
    let positives = if pipeline.lambda > 0.0 {
        positives_for(interactions, social, config.zeta)
    } else {
        PositiveSampleSets {
            per_user: vec![Vec::new(); interactions.num_users()],
            threshold: 0.0,
            zeta: config.zeta,
        }
    };
    debug!("{} positive pairs (threshold {:.4})", positives.total(), positives.threshold);

    let mut propagator = Propagator::new(config.backbone, interactions, social, config.layers);
    let mut current = social.clone();
    let mut shuffle_rng = rng::stream(config.seed, Stream::Shuffle);
    let mut negative_rng = rng::stream(config.seed, Stream::Negatives);
    let n_batches = batches_per_epoch(train_edges.len(), config.batch_size);

    let mut history = TrainHistory {
        batches_per_epoch: n_batches,
        ..TrainHistory::default()
    };
    let mut best: Option<(MetricsReport, EmbeddingState, usize, SocialGraph)> = None;
    let mut order = train_edges;
    let mut stopped_early = false;

    for epoch in 1..=config.epochs {
        let started = Instant::now();
        order.shuffle(&mut shuffle_rng);
        let (mut rec_sum, mut cl_sum) = (0.0, 0.0);
        let (mut cut, mut add, mut events) = (0, 0, 0);

        for (n, chunk) in order.chunks(config.batch_size).enumerate() {
            let batch_no = n + 1;
            let users: Vec<usize> = chunk.iter().map(|e| e.0).collect();
            let negs = sample_negatives(&users, interactions, &mut negative_rng)?;
            let batch: Vec<Triple> = chunk.iter().zip(negs).map(|(&(u, v), w)| (u, v, w)).collect();

            let rewire_now = pipeline.rewire.is_some() && config.strategy.rewires_at(epoch, batch_no, config.warmup_epoch);
            let codes = (rewire_now || pipeline.lambda > 0.0).then(|| encoder.encode(state.encoder_items()));
            if let (true, Some(opts), Some(z)) = (rewire_now, pipeline.rewire, codes.as_ref()) {
                let (rewired, mut report) = rewire_with(social, &pairwise_cosine(z), &opts);
                report.epoch = Some(epoch);
                cut = report.cut_edges.len();
                add = report.added_edges.len();
                events += 1;
                debug!("epoch {epoch} batch {batch_no}: cut {cut} add {add}");
                propagator.set_social(&rewired);
                current = rewired;
                history.rewires.push(report);
            }

            let objective = JointObjective {
                propagator: &propagator,
                encoder: &encoder,
                positives: &positives,
                lambda: pipeline.lambda,
                tau: config.tau,
                negatives: config.negatives,
            };
            let (loss, grads) = objective.evaluate(&state, &batch, codes.as_ref());
            if !loss.total.is_finite() {
                return Err(Error::NonFinite(format!(
                    "epoch {epoch} batch {batch_no}: l_rec={} l_cl={} step={} tables_finite={}",
                    loss.rec,
                    loss.cl,
                    state.step,
                    state.all_finite()
                )));
            }
            rec_sum += loss.rec;
            cl_sum += loss.cl;
            state.adam_step(&grads).map_err(|e| match e {
                Error::NonFinite(what) => Error::NonFinite(format!("epoch {epoch} batch {batch_no}: {what}")),
                other => other,
            })?;
        }

        let val = evaluate_split(config, interactions, &current, &state, Split::Val);
        let record = EpochRecord {
            epoch,
            l_rec: rec_sum / n_batches as f64,
            l_cl: cl_sum / n_batches as f64,
            val_recall: val.recall,
            val_precision: val.precision,
            val_ndcg: val.ndcg,
            cut,
            add,
            rewire_events: events,
            wall_seconds: started.elapsed().as_secs_f64(),
        };
        info!(
            "epoch {epoch}: l_rec={:.5} l_cl={:.5} val ndcg@{}={:.5}",
            record.l_rec, record.l_cl, config.eval_k, record.val_ndcg
        );
        history.epochs.push(record);

        if best.as_ref().is_none_or(|b| better(&val, &b.0)) {
            best = Some((val, state.clone(), epoch, current.clone()));
        }
        if early_stop(&history, config.patience) && epoch < config.epochs {
            info!("early stop after epoch {epoch}");
            stopped_early = true;
            break;
        }
    }

    let (_, best_state, best_epoch, best_social) = best.expect("at least one epoch ran");
    Ok(TrainOutcome {
        best: best_state,
        best_epoch,
        best_social,
        final_social: current,
        history,
        stopped_early,
    })
}
