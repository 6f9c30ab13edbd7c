//! Review-augmented neural collaborative filtering with a full evaluation
//! protocol for comparing human-written and generated review corpora.

pub mod corpus;
pub mod digest;
pub mod embeddings;
pub mod experiment;
pub mod metrics;
pub mod model;
pub mod prompts;
pub mod protocol;
pub mod synth;
pub mod text;
pub mod textstats;
