use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::registry::LanguageTag;
use crate::error::{Error, Result};

/// A translation direction, written `src->tgt`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Direction {
    src: LanguageTag,
    tgt: LanguageTag,
}

impl Direction {
    pub fn new(src: LanguageTag, tgt: LanguageTag) -> Result<Self> {
        if src == tgt {
            return Err(Error::InvalidDirection(format!("{src}->{tgt}")));
        }
        Ok(Direction { src, tgt })
    }

    pub fn src(self) -> LanguageTag {
        self.src
    }

    pub fn tgt(self) -> LanguageTag {
        self.tgt
    }

    pub fn involves(self, lang: LanguageTag) -> bool {
        self.src == lang || self.tgt == lang
    }

    pub fn reversed(self) -> Self {
        Direction {
            src: self.tgt,
            tgt: self.src,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.src, self.tgt)
    }
}

impl fmt::Debug for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Direction({self})")
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (src, tgt) = s
            .split_once("->")
            .ok_or_else(|| Error::InvalidDirection(s.to_string()))?;
        Direction::new(
            LanguageTag::parse(src.trim())?,
            LanguageTag::parse(tgt.trim())?,
        )
    }
}

impl Serialize for Direction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Direction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A directed bitext record.
///
/// Texts are stored verbatim; no Unicode normalization is applied at
/// ingestion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentencePair {
    pub src_lang: LanguageTag,
    pub tgt_lang: LanguageTag,
    pub src_text: String,
    pub tgt_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

impl SentencePair {
    pub fn new(
        src_lang: LanguageTag,
        tgt_lang: LanguageTag,
        src_text: impl Into<String>,
        tgt_text: impl Into<String>,
    ) -> Result<Self> {
        Direction::new(src_lang, tgt_lang)?;
        Ok(SentencePair {
            src_lang,
            tgt_lang,
            src_text: src_text.into(),
            tgt_text: tgt_text.into(),
            scores: None,
            provenance: None,
        })
    }

    pub fn direction(&self) -> Direction {
        Direction {
            src: self.src_lang,
            tgt: self.tgt_lang,
        }
    }

    /// Either side is empty after trimming Unicode whitespace.
    pub fn has_empty_side(&self) -> bool {
        self.src_text.trim().is_empty() || self.tgt_text.trim().is_empty()
    }

    pub fn to_jsonl(&self) -> String {
        serde_json::to_string(self).expect("SentencePair serializes")
    }
}

/// A line of monolingual text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonolingualRecord {
    pub lang: LanguageTag,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token_count: Option<u64>,
    /// Name of the tokenizer `token_count` was computed with.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokenizer: Option<String>,
}

impl MonolingualRecord {
    /// Checks a stored token count against a fresh tokenization.
    ///
    /// Returns `Ok(true)` when there is no stored count.
    pub fn verify_token_count(&self, tok: &crate::tokenization::VocabTokenizer) -> Result<bool> {
        match self.token_count {
            None => Ok(true),
            Some(n) => {
                if let Some(name) = &self.tokenizer {
                    if name != tok.name() {
                        return Err(Error::Data(format!(
                            "token count was computed with `{name}`, not `{}`",
                            tok.name()
                        )));
                    }
                }
                Ok(tok.count(&self.text)? as u64 == n)
            }
        }
    }
}
