//! Pluggable tokenizers and the tokenizer-efficiency length ratio.

mod efficiency;
mod vocab;

pub use efficiency::{
    corpus_efficiency, efficiency_table, length_ratio, EfficiencyRow, EfficiencyTable,
    LengthRatioReport,
};
pub use vocab::{Token, VocabTokenizer, DEFAULT_MARKER};
