//! Corpus preprocessing, event extraction and evaluation metrics for
//! event-conditioned story generation.

pub mod corpus;
pub mod events;
pub mod text;
pub mod metrics;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
