pub mod cleaning;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod pfms;
pub mod seeded;
pub mod sft;
pub mod tokenization;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/languages.md")]
    mod languages {}
    #[doc = include_str!("../../../book/src/tokenizers.md")]
    mod tokenizers {}
    #[doc = include_str!("../../../book/src/cleaning.md")]
    mod cleaning {}
    #[doc = include_str!("../../../book/src/mixing.md")]
    mod mixing {}
    #[doc = include_str!("../../../book/src/sft.md")]
    mod sft {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
