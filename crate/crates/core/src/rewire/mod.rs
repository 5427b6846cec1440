//! Social graph rewiring driven by interaction-only user encodings.

mod encoder;
mod sgr;
mod similarity;

pub use encoder::{encode_users, Encoder, UserCodes};
pub use sgr::{add_edges, build_rewired, cut_edges, rewire, rewire_with, CutResult, RewireOptions, RewireReport};
pub use similarity::{pairwise_cosine, CosineSimilarity};
