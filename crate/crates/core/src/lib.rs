//! Heterophily-aware social recommendation.
//!
//! The crate measures how well a social graph agrees with users' item
//! preferences (Jaccard homophily over training items), rewires the social
//! graph using encoder similarities, and trains a graph-based social
//! recommender jointly with a homophily-driven contrastive objective.
//!
//! Module map:
//!
//! - [`graph`]: interaction/social graph loading, splitting and normalized views
//! - [`homophily`]: edge- and graph-wise homophily, histograms
//! - [`synthetic`]: homophily-controlled sub-graphs and a community data generator
//! - [`diff`]: embedding tables, Adam, finite-difference checks, checkpoints
//! - [`rewire`]: interaction encoder, cosine similarities, cut/add/re-weight
//! - [`backbone`]: propagation, scoring, BPR and negative sampling
//! - [`hra`]: positive selection and the InfoNCE objective
//! - [`trainer`]: the joint training loop with rewiring strategies and ablations
//! - [`eval`]: full-ranking Recall/Precision/NDCG
// `Real` may be f32, so casts to f64 are not no-ops in every build
#![allow(clippy::unnecessary_cast)]


pub mod backbone;
pub mod diff;
pub mod error;
pub mod eval;
pub mod graph;
pub mod homophily;
pub mod hra;
pub mod matrix;
pub mod par;
pub mod rewire;
pub mod rng;
pub mod sparse;
pub mod synthetic;
pub mod trainer;

pub use error::{Error, Result};

/// Scalar type of embeddings, gradients and optimizer state.
#[cfg(not(feature = "single-precision"))]
pub type Real = f64;
#[cfg(feature = "single-precision")]
pub type Real = f32;

/// Tolerance for results that are exact up to rounding in `Real`.
#[cfg(test)]
pub(crate) const ROUNDING: f64 = if cfg!(feature = "single-precision") { 1e-6 } else { 1e-12 };
