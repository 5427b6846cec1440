//! Experiment commands around `share-core`: analysis, synthesis, training,
//! evaluation, ablations and sweeps.

pub mod commands;
pub mod manifest;
pub mod settings;

pub use commands::*;
pub use settings::Settings;
