//! Corpus data model: the language registry, record types and streaming
//! ingestion.

mod ingest;
mod records;
mod registry;

pub use ingest::{
    collect, merge_side_channels, parse_monolingual_stream, parse_parallel_stream,
    read_sidecar_language, MonoFormat, MonolingualStream, ParallelFormat, ParallelStream, Parsed,
    RejectReason, Rejection,
};
pub use records::{Direction, MonolingualRecord, SentencePair};
pub use registry::{
    load_registry, parse_registry, LanguageEntry, LanguageTag, ResourceClass, ALIASES,
    REGISTRY_SIZE,
};
