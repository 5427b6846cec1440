//! Trainable embedding tables, the Adam optimizer, gradient verification and
//! checkpoints.
//!
//! All losses in the crate have hand-derived gradients; [`finite_diff_check`]
//! is the harness that keeps them honest.

mod checkpoint;
mod embedding;
mod gradcheck;

pub use checkpoint::{read_checkpoint, write_checkpoint};
pub use embedding::{AdamConfig, EmbeddingState, Gradients, Param};
pub use gradcheck::finite_diff_check;
