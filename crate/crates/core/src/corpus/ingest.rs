//! Streaming ingestion of parallel and monolingual corpus files.
//!
//! Readers yield [`Parsed`] items in input order. Malformed records do not
//! stop the stream: they come out as [`Parsed::Rejected`] carrying the
//! 1-based line number and a reason. Only I/O failures end a stream with an
//! `Err`.

use std::collections::BTreeMap;
use std::fmt;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::records::{MonolingualRecord, SentencePair};
use super::registry::LanguageTag;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParallelFormat {
    Jsonl,
    Tsv,
}

impl ParallelFormat {
    /// Picks the format from a file extension (`.tsv` or anything else).
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("tsv") => ParallelFormat::Tsv,
            _ => ParallelFormat::Jsonl,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    Encoding,
    Json,
    Arity,
    MissingField,
    UnknownLanguage,
    SelfDirection,
    Empty,
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RejectReason::Encoding => "encoding",
            RejectReason::Json => "json",
            RejectReason::Arity => "arity",
            RejectReason::MissingField => "missing-field",
            RejectReason::UnknownLanguage => "unknown language",
            RejectReason::SelfDirection => "self-direction",
            RejectReason::Empty => "empty",
        };
        f.write_str(s)
    }
}

/// A record that failed ingestion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub line: usize,
    pub reason: RejectReason,
    pub detail: String,
}

impl Rejection {
    fn new(line: usize, reason: RejectReason, detail: impl Into<String>) -> Self {
        Rejection {
            line,
            reason,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Parsed<T> {
    Record(T),
    Rejected(Rejection),
}

/// Reads one line as raw bytes. Returns `None` at end of stream.
fn next_line<R: BufRead>(reader: &mut R, buf: &mut Vec<u8>) -> std::io::Result<Option<()>> {
    buf.clear();
    if reader.read_until(b'\n', buf)? == 0 {
        return Ok(None);
    }
    if buf.last() == Some(&b'\n') {
        buf.pop();
        if buf.last() == Some(&b'\r') {
            buf.pop();
        }
    }
    Ok(Some(()))
}

fn lang_field(line: usize, code: &str) -> std::result::Result<LanguageTag, Rejection> {
    LanguageTag::parse(code)
        .map_err(|_| Rejection::new(line, RejectReason::UnknownLanguage, code.to_string()))
}

#[derive(Deserialize)]
struct RawPair {
    src_lang: Option<String>,
    tgt_lang: Option<String>,
    src_text: Option<String>,
    tgt_text: Option<String>,
    #[serde(default)]
    scores: Option<BTreeMap<String, f64>>,
    #[serde(default)]
    provenance: Option<String>,
}

fn parse_pair_line(
    line_no: usize,
    line: &str,
    format: ParallelFormat,
) -> std::result::Result<SentencePair, Rejection> {
    let (src_lang, tgt_lang, src_text, tgt_text, scores, provenance) = match format {
        ParallelFormat::Jsonl => {
            let raw: RawPair = serde_json::from_str(line)
                .map_err(|e| Rejection::new(line_no, RejectReason::Json, e.to_string()))?;
            let missing = |name: &str| Rejection::new(line_no, RejectReason::MissingField, name);
            (
                raw.src_lang.ok_or_else(|| missing("src_lang"))?,
                raw.tgt_lang.ok_or_else(|| missing("tgt_lang"))?,
                raw.src_text.ok_or_else(|| missing("src_text"))?,
                raw.tgt_text.ok_or_else(|| missing("tgt_text"))?,
                raw.scores,
                raw.provenance,
            )
        }
        ParallelFormat::Tsv => {
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 4 {
                return Err(Rejection::new(
                    line_no,
                    RejectReason::Arity,
                    format!("expected 4 columns, found {}", cols.len()),
                ));
            }
            (
                cols[0].to_string(),
                cols[1].to_string(),
                cols[2].to_string(),
                cols[3].to_string(),
                None,
                None,
            )
        }
    };
    let src = lang_field(line_no, &src_lang)?;
    let tgt = lang_field(line_no, &tgt_lang)?;
    if src == tgt {
        return Err(Rejection::new(
            line_no,
            RejectReason::SelfDirection,
            format!("{src}->{tgt}"),
        ));
    }
    Ok(SentencePair {
        src_lang: src,
        tgt_lang: tgt,
        src_text,
        tgt_text,
        scores,
        provenance,
    })
}

/// Iterator over the records of a parallel corpus.
pub struct ParallelStream<R> {
    reader: R,
    format: ParallelFormat,
    line: usize,
    buf: Vec<u8>,
}

impl<R: BufRead> Iterator for ParallelStream<R> {
    type Item = Result<Parsed<SentencePair>>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            match next_line(&mut self.reader, &mut self.buf) {
                Err(e) => return Some(Err(Error::io("<parallel stream>", e))),
                Ok(None) => return None,
                Ok(Some(())) => {}
            }
            self.line += 1;
            let Ok(text) = std::str::from_utf8(&self.buf) else {
                return Some(Ok(Parsed::Rejected(Rejection::new(
                    self.line,
                    RejectReason::Encoding,
                    "invalid UTF-8",
                ))));
            };
            if text.trim().is_empty() {
                continue;
            }
            return Some(Ok(match parse_pair_line(self.line, text, self.format) {
                Ok(p) => Parsed::Record(p),
                Err(r) => Parsed::Rejected(r),
            }));
        }
    }
}

/// Streams sentence pairs from JSONL or 4-column TSV.
///
/// Blank lines are skipped but still counted for line numbers. Empty texts are
/// accepted here; dropping them is the cleaning stage's job.
pub fn parse_parallel_stream<R: BufRead>(reader: R, format: ParallelFormat) -> ParallelStream<R> {
    ParallelStream {
        reader,
        format,
        line: 0,
        buf: Vec::new(),
    }
}

/// How monolingual lines are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonoFormat {
    /// `{"lang": .., "text": ..}` objects.
    Jsonl,
    /// Plain text, one record per line, language declared out of band.
    Plain(LanguageTag),
}

#[derive(Deserialize)]
struct RawMono {
    lang: Option<String>,
    text: Option<String>,
    #[serde(default)]
    token_count: Option<u64>,
    #[serde(default)]
    tokenizer: Option<String>,
}

fn parse_mono_line(
    line_no: usize,
    line: &str,
    format: MonoFormat,
) -> std::result::Result<MonolingualRecord, Rejection> {
    let record = match format {
        MonoFormat::Plain(lang) => MonolingualRecord {
            lang,
            text: line.to_string(),
            token_count: None,
            tokenizer: None,
        },
        MonoFormat::Jsonl => {
            let raw: RawMono = serde_json::from_str(line)
                .map_err(|e| Rejection::new(line_no, RejectReason::Json, e.to_string()))?;
            let lang = raw
                .lang
                .ok_or_else(|| Rejection::new(line_no, RejectReason::MissingField, "lang"))?;
            let text = raw
                .text
                .ok_or_else(|| Rejection::new(line_no, RejectReason::MissingField, "text"))?;
            MonolingualRecord {
                lang: lang_field(line_no, &lang)?,
                text,
                token_count: raw.token_count,
                tokenizer: raw.tokenizer,
            }
        }
    };
    if record.text.trim().is_empty() {
        return Err(Rejection::new(line_no, RejectReason::Empty, ""));
    }
    Ok(record)
}

pub struct MonolingualStream<R> {
    reader: R,
    format: MonoFormat,
    line: usize,
    buf: Vec<u8>,
}

impl<R: BufRead> Iterator for MonolingualStream<R> {
    type Item = Result<Parsed<MonolingualRecord>>;

    fn next(&mut self) -> Option<Self::Item> {
        match next_line(&mut self.reader, &mut self.buf) {
            Err(e) => return Some(Err(Error::io("<monolingual stream>", e))),
            Ok(None) => return None,
            Ok(Some(())) => {}
        }
        self.line += 1;
        let Ok(text) = std::str::from_utf8(&self.buf) else {
            return Some(Ok(Parsed::Rejected(Rejection::new(
                self.line,
                RejectReason::Encoding,
                "invalid UTF-8",
            ))));
        };
        Some(Ok(match parse_mono_line(self.line, text, self.format) {
            Ok(r) => Parsed::Record(r),
            Err(r) => Parsed::Rejected(r),
        }))
    }
}

/// Streams monolingual records. Empty-after-trim lines are rejected as `empty`.
pub fn parse_monolingual_stream<R: BufRead>(reader: R, format: MonoFormat) -> MonolingualStream<R> {
    MonolingualStream {
        reader,
        format,
        line: 0,
        buf: Vec::new(),
    }
}

/// Reads the language declared in `<file>.lang` next to a plain-text corpus.
pub fn read_sidecar_language(path: &Path) -> Result<LanguageTag> {
    let mut sidecar = path.as_os_str().to_owned();
    sidecar.push(".lang");
    let text = std::fs::read_to_string(&sidecar).map_err(|e| Error::io(&sidecar, e))?;
    LanguageTag::parse(text.trim())
}

/// Drains a stream into valid records and the side channel.
pub fn collect<T, I>(stream: I) -> Result<(Vec<T>, Vec<Rejection>)>
where
    I: Iterator<Item = Result<Parsed<T>>>,
{
    let mut records = Vec::new();
    let mut rejected = Vec::new();
    for item in stream {
        match item? {
            Parsed::Record(r) => records.push(r),
            Parsed::Rejected(r) => rejected.push(r),
        }
    }
    Ok((records, rejected))
}

/// Merges per-shard side channels ordered by (shard, line).
pub fn merge_side_channels(shards: Vec<Vec<Rejection>>) -> Vec<(usize, Rejection)> {
    let mut merged: Vec<(usize, Rejection)> = shards
        .into_iter()
        .enumerate()
        .flat_map(|(shard, rs)| rs.into_iter().map(move |r| (shard, r)))
        .collect();
    merged.sort_by_key(|(shard, r)| (*shard, r.line));
    merged
}
