//! Evaluation: few-shot prompts, BLEU, external score ingestion and
//! direction-group aggregation.

pub mod aggregate;
pub mod bleu;
pub mod icl;
pub mod scores;

pub use aggregate::{aggregate, AggregateCell, AggregateTable, DirectionGroup, GroupName};
pub use bleu::{corpus_bleu, spbleu, BleuScore, Smoothing};
pub use icl::{
    build_icl_prompt, parse_icl_prompt, sample_exemplar_indices, IclPrompt, DEFAULT_SHOTS,
};
pub use scores::{
    ingest_reader, ingest_scores, wmt_ingest, MissingFlag, ScoreFormat, ScoreKey, ScoreMatrix,
    ScoreRow, WmtFilterConfig, WmtFilterReport,
};
