//! Instruction-tuning set construction: best-of-N selection under
//! reference-free scores, threshold filtering and prompt formatting.

mod build;
mod select;
mod template;

pub use build::{
    build_sft, published_sft_counts, sample_sft, sft_setup, zhs_non_english_counts,
    DistributionReport, SftOutput, SftRecord,
};
pub use select::{
    select_best, threshold_filter, Candidate, CandidateSet, Metric, SelectionPolicy, TieBreak,
};
pub use template::{
    default_display_names, format_instruction, parse_instruction, split_completion,
};
