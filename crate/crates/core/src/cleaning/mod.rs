//! Parallel-data cleaning: rule-based heuristics, language identification
//! and cross-lingual similarity, with per-reason accounting.

mod heuristics;
mod langid;
mod pipeline;
mod similarity;

pub use heuristics::{
    dedup_key, heuristic_filter, CleanConfig, DedupState, FilterDecision, FilterReason,
};
pub use langid::{identify_language, train_langid, LangProfile, MIN_PROFILE_SIZE};
pub use pipeline::{run_pipeline, CleanStats, Outcome, Pipeline, PipelineOutput, QuarantineRecord};
pub use similarity::{
    content_id, cosine, similarity_filter, EmbeddingProvider, HashingNgramEmbedder,
    SubprocessEmbedder, VectorFileEmbedder,
};
