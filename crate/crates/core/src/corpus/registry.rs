//! The 46-language registry.
//!
//! The registry is a bundled table (`data/languages.tsv`) parsed once on first
//! use. Languages are referred to by [`LanguageTag`], a copyable handle whose
//! ordering follows the table (alphabetical by code).

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

const BUNDLED_TABLE: &str = include_str!("../../data/languages.tsv");

/// Number of languages in the registry.
pub const REGISTRY_SIZE: usize = 46;

/// Resource class of a language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ResourceClass {
    High,
    Mid,
    Low,
}

impl FromStr for ResourceClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "High" => Ok(ResourceClass::High),
            "Mid" => Ok(ResourceClass::Mid),
            "Low" => Ok(ResourceClass::Low),
            other => Err(Error::Config(format!("unknown resource class `{other}`"))),
        }
    }
}

/// One row of the registry table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LanguageEntry {
    pub code: String,
    pub name: String,
    pub script: String,
    pub family: String,
    pub subgrouping: Option<String>,
    pub resource_class: ResourceClass,
}

/// Common codes that normalize onto registry codes.
pub const ALIASES: &[(&str, &str)] = &[
    ("zh", "zhs"),
    ("zh-cn", "zhs"),
    ("zh-hans", "zhs"),
    ("zho_hans", "zhs"),
    ("zh-tw", "zht"),
    ("zh-hant", "zht"),
    ("zho_hant", "zht"),
    ("no", "nb"),
    ("nob", "nb"),
    ("fil", "tl"),
];

/// Parses a registry table in the bundled TSV layout.
///
/// Exactly [`REGISTRY_SIZE`] unique codes are required.
pub fn parse_registry(text: &str) -> Result<Vec<LanguageEntry>> {
    let mut entries: Vec<LanguageEntry> = Vec::with_capacity(REGISTRY_SIZE);
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        if cols.len() != 6 {
            return Err(Error::Config(format!(
                "language table line {}: expected 6 columns, found {}",
                lineno + 1,
                cols.len()
            )));
        }
        if entries.iter().any(|e| e.code == cols[0]) {
            return Err(Error::Config(format!(
                "language table: duplicate code `{}`",
                cols[0]
            )));
        }
        entries.push(LanguageEntry {
            code: cols[0].to_string(),
            name: cols[1].to_string(),
            script: cols[2].to_string(),
            family: cols[3].to_string(),
            subgrouping: (cols[4] != "-").then(|| cols[4].to_string()),
            resource_class: cols[5].parse()?,
        });
    }
    if entries.len() != REGISTRY_SIZE {
        return Err(Error::Config(format!(
            "language table holds {} entries, expected {REGISTRY_SIZE}",
            entries.len()
        )));
    }
    Ok(entries)
}

/// Loads the bundled registry.
pub fn load_registry() -> Result<Vec<LanguageEntry>> {
    parse_registry(BUNDLED_TABLE)
}

fn registry() -> &'static [LanguageEntry] {
    static REGISTRY: OnceLock<Vec<LanguageEntry>> = OnceLock::new();
    REGISTRY.get_or_init(|| load_registry().expect("bundled language table is corrupted"))
}

/// A language from the registry.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LanguageTag(u8);

impl LanguageTag {
    /// Looks up an exact registry code.
    pub fn from_code(code: &str) -> Result<Self> {
        registry()
            .iter()
            .position(|e| e.code == code)
            .map(|i| LanguageTag(i as u8))
            .ok_or_else(|| Error::UnknownLanguage(code.to_string()))
    }

    /// Looks up a code, accepting the aliases in [`ALIASES`] (case-insensitive).
    pub fn parse(code: &str) -> Result<Self> {
        if let Ok(tag) = Self::from_code(code) {
            return Ok(tag);
        }
        let lower = code.to_ascii_lowercase();
        let canonical = ALIASES
            .iter()
            .find(|(alias, _)| *alias == lower)
            .map(|(_, c)| *c)
            .unwrap_or(lower.as_str());
        Self::from_code(canonical).map_err(|_| Error::UnknownLanguage(code.to_string()))
    }

    /// All registry languages in table order.
    pub fn all() -> impl Iterator<Item = LanguageTag> {
        (0..registry().len()).map(|i| LanguageTag(i as u8))
    }

    pub fn entry(self) -> &'static LanguageEntry {
        &registry()[self.0 as usize]
    }

    pub fn code(self) -> &'static str {
        &self.entry().code
    }

    /// Display name, e.g. "Chinese (Simplified)".
    pub fn name(self) -> &'static str {
        &self.entry().name
    }

    pub fn script(self) -> &'static str {
        &self.entry().script
    }

    pub fn family(self) -> &'static str {
        &self.entry().family
    }

    pub fn resource_class(self) -> ResourceClass {
        self.entry().resource_class
    }

    pub fn english() -> Self {
        Self::from_code("en").expect("registry has en")
    }

    pub fn chinese_simplified() -> Self {
        Self::from_code("zhs").expect("registry has zhs")
    }

    /// English and Simplified Chinese are the two pivots of the parallel pools.
    pub fn is_pivot(self) -> bool {
        self == Self::english() || self == Self::chinese_simplified()
    }
}

impl fmt::Debug for LanguageTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LanguageTag({})", self.code())
    }
}

impl fmt::Display for LanguageTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for LanguageTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LanguageTag::parse(s)
    }
}

impl Serialize for LanguageTag {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.code())
    }
}

impl<'de> Deserialize<'de> for LanguageTag {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let code = String::deserialize(d)?;
        LanguageTag::parse(&code).map_err(serde::de::Error::custom)
    }
}
