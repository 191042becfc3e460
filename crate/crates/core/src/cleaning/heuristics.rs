use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use unicode_general_category::{get_general_category, GeneralCategory};
use unicode_normalization::UnicodeNormalization;

use crate::corpus::SentencePair;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FilterReason {
    Ok,
    Empty,
    ControlChars,
    TooLong,
    DigitPunctRatio,
    LengthRatio,
    Duplicate,
    LangidSrc,
    LangidTgt,
    LowSimilarity,
}

impl fmt::Display for FilterReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("reason serializes");
        f.write_str(s.as_str().unwrap_or_default())
    }
}

/// Verdict of one filter stage. `kept()` holds exactly when the reason is
/// [`FilterReason::Ok`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterDecision {
    kept: bool,
    reason: FilterReason,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    detail: Option<String>,
}

impl FilterDecision {
    pub fn ok() -> Self {
        FilterDecision {
            kept: true,
            reason: FilterReason::Ok,
            detail: None,
        }
    }

    pub fn drop(reason: FilterReason, detail: Option<String>) -> Self {
        debug_assert_ne!(reason, FilterReason::Ok);
        FilterDecision {
            kept: false,
            reason,
            detail,
        }
    }

    pub fn kept(&self) -> bool {
        self.kept
    }

    pub fn reason(&self) -> FilterReason {
        self.reason
    }

    pub fn detail(&self) -> Option<&str> {
        self.detail.as_deref()
    }
}

/// Cleaning thresholds. Every value is recorded in run snapshots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CleanConfig {
    pub max_chars: usize,
    pub max_len_ratio: f64,
    pub min_chars: usize,
    pub langid_min_margin: f64,
    pub sim_threshold: f64,
    pub dedup: bool,
}

impl Default for CleanConfig {
    fn default() -> Self {
        CleanConfig {
            max_chars: 2000,
            max_len_ratio: 3.0,
            min_chars: 1,
            langid_min_margin: 0.05,
            sim_threshold: 0.75,
            dedup: true,
        }
    }
}

impl CleanConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.max_len_ratio >= 1.0) {
            return Err(Error::Config(format!(
                "max_len_ratio must be >= 1, got {}",
                self.max_len_ratio
            )));
        }
        if !(0.0..=1.0).contains(&self.sim_threshold) {
            return Err(Error::Config(format!(
                "sim_threshold must lie in [0, 1], got {}",
                self.sim_threshold
            )));
        }
        if !(0.0..=1.0).contains(&self.langid_min_margin) {
            return Err(Error::Config(format!(
                "langid_min_margin must lie in [0, 1], got {}",
                self.langid_min_margin
            )));
        }
        Ok(())
    }
}

/// 64-bit key of a pair: NFC-normalized, whitespace-collapsed, case kept.
pub fn dedup_key(src: &str, tgt: &str) -> u64 {
    let norm = |s: &str| {
        s.nfc()
            .collect::<String>()
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut h = Sha256::new();
    h.update(norm(src).as_bytes());
    h.update(b"\t");
    h.update(norm(tgt).as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("sha256 has 32 bytes"))
}

/// Pair keys seen so far; the first occurrence in input order wins.
#[derive(Debug, Clone, Default)]
pub struct DedupState {
    seen: HashSet<u64>,
}

impl DedupState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, key: u64) -> bool {
        self.seen.contains(&key)
    }

    /// Returns false when the key was already present.
    pub fn insert(&mut self, key: u64) -> bool {
        self.seen.insert(key)
    }

    pub fn len(&self) -> usize {
        self.seen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seen.is_empty()
    }
}

fn has_control_chars(s: &str) -> bool {
    s.chars().any(|c| c <= '\u{1F}' && c != '\t')
}

fn is_digit_or_punct(c: char) -> bool {
    use GeneralCategory::*;
    matches!(
        get_general_category(c),
        DecimalNumber
            | LetterNumber
            | OtherNumber
            | ConnectorPunctuation
            | DashPunctuation
            | OpenPunctuation
            | ClosePunctuation
            | InitialPunctuation
            | FinalPunctuation
            | OtherPunctuation
    )
}

/// Share of digit and punctuation characters among non-whitespace characters.
fn digit_punct_share(s: &str) -> f64 {
    let (mut hits, mut total) = (0usize, 0usize);
    for c in s.chars().filter(|c| !c.is_whitespace()) {
        total += 1;
        if is_digit_or_punct(c) {
            hits += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        hits as f64 / total as f64
    }
}

/// Rule-based checks, applied in order; the first failing rule decides.
///
/// Order: EMPTY, CONTROL_CHARS, TOO_LONG, DIGIT_PUNCT_RATIO, LENGTH_RATIO,
/// DUPLICATE. A pair passing every rule has its key inserted into `seen`.
pub fn heuristic_filter(
    p: &SentencePair,
    cfg: &CleanConfig,
    seen: &mut DedupState,
) -> FilterDecision {
    let src = p.src_text.trim();
    let tgt = p.tgt_text.trim();
    let src_len = src.chars().count();
    let tgt_len = tgt.chars().count();

    if src_len == 0 || tgt_len == 0 || src_len < cfg.min_chars || tgt_len < cfg.min_chars {
        let side = if src_len == 0 || src_len < cfg.min_chars {
            "src"
        } else {
            "tgt"
        };
        return FilterDecision::drop(FilterReason::Empty, Some(side.into()));
    }
    if has_control_chars(&p.src_text) || has_control_chars(&p.tgt_text) {
        return FilterDecision::drop(FilterReason::ControlChars, None);
    }
    if src_len > cfg.max_chars || tgt_len > cfg.max_chars {
        return FilterDecision::drop(
            FilterReason::TooLong,
            Some(format!("{}", src_len.max(tgt_len))),
        );
    }
    for share in [digit_punct_share(src), digit_punct_share(tgt)] {
        if share > 0.5 {
            return FilterDecision::drop(
                FilterReason::DigitPunctRatio,
                Some(format!("{share:.3}")),
            );
        }
    }
    let ratio = src_len.max(tgt_len) as f64 / src_len.min(tgt_len) as f64;
    if ratio > cfg.max_len_ratio {
        return FilterDecision::drop(FilterReason::LengthRatio, Some(format!("{ratio:.3}")));
    }
    if cfg.dedup {
        let key = dedup_key(&p.src_text, &p.tgt_text);
        if !seen.insert(key) {
            return FilterDecision::drop(FilterReason::Duplicate, Some(format!("{key:016x}")));
        }
    }
    FilterDecision::ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::LanguageTag;

    fn pair(src: &str, tgt: &str) -> SentencePair {
        SentencePair::new(
            LanguageTag::from_code("en").unwrap(),
            LanguageTag::from_code("de").unwrap(),
            src,
            tgt,
        )
        .unwrap()
    }

    fn check(src: &str, tgt: &str) -> FilterReason {
        heuristic_filter(
            &pair(src, tgt),
            &CleanConfig::default(),
            &mut DedupState::new(),
        )
        .reason()
    }

    #[test]
    fn empty_side() {
        assert_eq!(check("hello", ""), FilterReason::Empty);
        assert_eq!(check(" \u{3000} ", "hallo"), FilterReason::Empty);
        let d = heuristic_filter(
            &pair("hello", ""),
            &CleanConfig::default(),
            &mut DedupState::new(),
        );
        assert!(!d.kept());
    }

    #[test]
    fn min_chars_counts_as_empty() {
        let cfg = CleanConfig {
            min_chars: 3,
            ..Default::default()
        };
        let d = heuristic_filter(&pair("hi", "hallo"), &cfg, &mut DedupState::new());
        assert_eq!(d.reason(), FilterReason::Empty);
    }

    #[test]
    fn control_chars_except_tab() {
        assert_eq!(check("a\u{7}b", "hallo"), FilterReason::ControlChars);
        assert_eq!(
            check("line\nbreak", "hallo welt"),
            FilterReason::ControlChars
        );
        assert_eq!(check("tab\there", "tab\thier"), FilterReason::Ok);
    }

    #[test]
    fn too_long() {
        let long = "a".repeat(2001);
        assert_eq!(check(&long, &long), FilterReason::TooLong);
        let edge = "a".repeat(2000);
        assert_eq!(check(&edge, &edge), FilterReason::Ok);
    }

    #[test]
    fn digit_punct_share_over_half() {
        assert_eq!(
            check("1, 2, 3!", "eins zwei drei"),
            FilterReason::DigitPunctRatio
        );
        assert_eq!(check("１２３。", "abc"), FilterReason::DigitPunctRatio);
        assert_eq!(check("Room 12", "Zimmer 12"), FilterReason::Ok);
    }

    #[test]
    fn length_ratio() {
        let d = heuristic_filter(
            &pair(&"a".repeat(10), &"b".repeat(40)),
            &CleanConfig::default(),
            &mut DedupState::new(),
        );
        assert_eq!(d.reason(), FilterReason::LengthRatio);
        assert_eq!(d.detail(), Some("4.000"));
        assert_eq!(check(&"a".repeat(10), &"b".repeat(30)), FilterReason::Ok);
    }

    #[test]
    fn duplicates_after_normalization() {
        let cfg = CleanConfig::default();
        let mut seen = DedupState::new();
        assert!(heuristic_filter(&pair("hello world", "hallo welt"), &cfg, &mut seen).kept());
        let again = heuristic_filter(&pair("hello  world ", "hallo welt"), &cfg, &mut seen);
        assert_eq!(again.reason(), FilterReason::Duplicate);
        // NFC: precomposed vs combining sequence
        assert!(heuristic_filter(&pair("café", "Café"), &cfg, &mut seen).kept());
        let decomposed = heuristic_filter(&pair("cafe\u{301}", "Cafe\u{301}"), &cfg, &mut seen);
        assert_eq!(decomposed.reason(), FilterReason::Duplicate);
        // case is preserved
        assert!(heuristic_filter(&pair("Hello world", "hallo welt"), &cfg, &mut seen).kept());

        let no_dedup = CleanConfig {
            dedup: false,
            ..Default::default()
        };
        assert!(heuristic_filter(&pair("hello world", "hallo welt"), &no_dedup, &mut seen).kept());
    }

    #[test]
    fn rule_order_first_failure_wins() {
        // Both too long and control characters: control comes first.
        let long = format!("{}\u{1}", "a".repeat(2500));
        assert_eq!(check(&long, "b"), FilterReason::ControlChars);
    }

    #[test]
    fn config_validation() {
        assert!(CleanConfig::default().validate().is_ok());
        assert!(CleanConfig {
            max_len_ratio: 0.5,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(CleanConfig {
            sim_threshold: 1.5,
            ..Default::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn reason_names() {
        assert_eq!(
            FilterReason::DigitPunctRatio.to_string(),
            "DIGIT_PUNCT_RATIO"
        );
        assert_eq!(FilterReason::Ok.to_string(), "OK");
    }
}
