//! Greedy longest-match tokenizer over a fixed piece inventory.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};

/// Default word-boundary marker used by sentencepiece-style inventories.
pub const DEFAULT_MARKER: char = '\u{2581}';

/// Byte-level trie over the piece inventory.
#[derive(Debug, Clone, Default)]
struct Trie {
    edges: HashMap<(u32, u8), u32>,
    terminal: Vec<Option<u32>>,
}

impl Trie {
    fn build<'a>(pieces: impl Iterator<Item = &'a str>) -> Self {
        let mut trie = Trie {
            edges: HashMap::new(),
            terminal: vec![None],
        };
        for (id, piece) in pieces.enumerate() {
            let mut node = 0u32;
            for &b in piece.as_bytes() {
                let next = trie.terminal.len() as u32;
                node = *trie.edges.entry((node, b)).or_insert_with(|| next);
                if node == next {
                    trie.terminal.push(None);
                }
            }
            trie.terminal[node as usize] = Some(id as u32);
        }
        trie
    }

    /// Longest piece that is a prefix of `bytes`: (piece id, byte length).
    fn longest_prefix(&self, bytes: &[u8]) -> Option<(u32, usize)> {
        let mut node = 0u32;
        let mut best = None;
        for (i, &b) in bytes.iter().enumerate() {
            match self.edges.get(&(node, b)) {
                Some(&n) => node = n,
                None => break,
            }
            if let Some(id) = self.terminal[node as usize] {
                best = Some((id, i + 1));
            }
        }
        best
    }
}

/// A tokenizer defined by its piece inventory.
///
/// Token ids `0..pieces.len()` are pieces; with byte fallback enabled the next
/// 256 ids are the raw bytes `0x00..=0xFF`.
#[derive(Debug, Clone)]
pub struct VocabTokenizer {
    name: String,
    pieces: Vec<String>,
    byte_fallback: bool,
    marker: Option<char>,
    dummy_prefix: bool,
    trie: Trie,
}

/// A decoded token.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Token<'a> {
    Piece(&'a str),
    Byte(u8),
}

impl VocabTokenizer {
    pub fn new(name: impl Into<String>, pieces: Vec<String>, byte_fallback: bool) -> Result<Self> {
        Self::with_options(name, pieces, byte_fallback, None, false)
    }

    /// Builds a tokenizer with an explicit whitespace marker. When a marker is
    /// set, spaces in the input are replaced by it before matching, and
    /// `dummy_prefix` additionally prepends one marker to the text.
    pub fn with_options(
        name: impl Into<String>,
        pieces: Vec<String>,
        byte_fallback: bool,
        marker: Option<char>,
        dummy_prefix: bool,
    ) -> Result<Self> {
        let name = name.into();
        let mut seen = std::collections::HashSet::with_capacity(pieces.len());
        for p in &pieces {
            if p.is_empty() {
                return Err(Error::Config(format!("vocab `{name}`: empty piece")));
            }
            if !seen.insert(p.as_str()) {
                return Err(Error::Config(format!(
                    "vocab `{name}`: duplicate piece `{p}`"
                )));
            }
        }
        let trie = Trie::build(pieces.iter().map(String::as_str));
        Ok(VocabTokenizer {
            name,
            pieces,
            byte_fallback,
            marker,
            dummy_prefix: dummy_prefix && marker.is_some(),
            trie,
        })
    }

    /// Parses a vocab asset: one piece per line.
    ///
    /// Leading `#key=value` lines configure the tokenizer: `byte_fallback`,
    /// `marker` (a single character or `none`) and `dummy_prefix`. Without a
    /// `marker` header, [`DEFAULT_MARKER`] is used when any piece contains it.
    /// A tab ends the piece (score columns of exported inventories are
    /// ignored), and `<0xHH>` lines declare byte tokens; a full set of 256
    /// enables byte fallback.
    pub fn from_vocab_str(name: impl Into<String>, text: &str) -> Result<Self> {
        let name = name.into();
        let mut byte_fallback = false;
        let mut marker: Option<Option<char>> = None;
        let mut dummy_prefix = false;
        let mut pieces = Vec::new();
        let mut byte_pieces = [false; 256];
        let mut in_header = true;
        for raw in text.split('\n') {
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if in_header {
                if let Some((key, value)) = line.strip_prefix('#').and_then(|h| h.split_once('=')) {
                    let flag = || match value.trim() {
                        "true" => Ok(true),
                        "false" => Ok(false),
                        v => Err(Error::Config(format!("vocab `{name}`: bad boolean `{v}`"))),
                    };
                    match key.trim() {
                        "byte_fallback" => byte_fallback = flag()?,
                        "dummy_prefix" => dummy_prefix = flag()?,
                        "marker" => {
                            let v = value.trim();
                            let mut chars = v.chars();
                            marker = Some(match (chars.next(), chars.next()) {
                                _ if v == "none" => None,
                                (Some(c), None) => Some(c),
                                _ => {
                                    return Err(Error::Config(format!(
                                        "vocab `{name}`: marker must be one character"
                                    )))
                                }
                            });
                        }
                        _ => in_header = false,
                    }
                    if in_header {
                        continue;
                    }
                } else {
                    in_header = false;
                }
            }
            let piece = line.split('\t').next().unwrap_or_default();
            if piece.is_empty() {
                continue;
            }
            if let Some(b) = parse_byte_piece(piece) {
                byte_pieces[b as usize] = true;
                continue;
            }
            pieces.push(piece.to_string());
        }
        if byte_pieces.iter().all(|&b| b) {
            byte_fallback = true;
        }
        let marker = marker.unwrap_or_else(|| {
            pieces
                .iter()
                .any(|p| p.contains(DEFAULT_MARKER))
                .then_some(DEFAULT_MARKER)
        });
        Self::with_options(name, pieces, byte_fallback, marker, dummy_prefix)
    }

    /// Loads a vocab asset; the tokenizer is named after the file stem.
    pub fn from_vocab_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "vocab".to_string());
        Self::from_vocab_str(name, &text)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn pieces(&self) -> &[String] {
        &self.pieces
    }

    pub fn byte_fallback(&self) -> bool {
        self.byte_fallback
    }

    pub fn marker(&self) -> Option<char> {
        self.marker
    }

    pub fn vocab_size(&self) -> usize {
        self.pieces.len() + if self.byte_fallback { 256 } else { 0 }
    }

    fn prepare<'t>(&self, text: &'t str) -> std::borrow::Cow<'t, str> {
        match self.marker {
            None => text.into(),
            Some(m) => {
                let mut out = String::with_capacity(text.len() + 3);
                if self.dummy_prefix && !text.is_empty() {
                    out.push(m);
                }
                for c in text.chars() {
                    out.push(if c == ' ' { m } else { c });
                }
                out.into()
            }
        }
    }

    /// Tokenizes `text` left to right, always taking the longest matching
    /// piece. A character with no matching piece becomes one byte token per
    /// UTF-8 byte when byte fallback is on, and an error otherwise.
    pub fn tokenize(&self, text: &str) -> Result<Vec<u32>> {
        let prepared = self.prepare(text);
        let bytes = prepared.as_bytes();
        let mut ids = Vec::with_capacity(bytes.len() / 3 + 1);
        let mut pos = 0;
        while pos < bytes.len() {
            if let Some((id, len)) = self.trie.longest_prefix(&bytes[pos..]) {
                ids.push(id);
                pos += len;
                continue;
            }
            if !self.byte_fallback {
                return Err(Error::Tokenization { offset: pos });
            }
            let width = utf8_width(bytes[pos]);
            for &b in &bytes[pos..pos + width] {
                ids.push(self.pieces.len() as u32 + b as u32);
            }
            pos += width;
        }
        Ok(ids)
    }

    /// Number of tokens `text` splits into.
    pub fn count(&self, text: &str) -> Result<usize> {
        self.tokenize(text).map(|ids| ids.len())
    }

    pub fn token(&self, id: u32) -> Option<Token<'_>> {
        let id = id as usize;
        if id < self.pieces.len() {
            Some(Token::Piece(&self.pieces[id]))
        } else if self.byte_fallback && id < self.pieces.len() + 256 {
            Some(Token::Byte((id - self.pieces.len()) as u8))
        } else {
            None
        }
    }

    /// Reassembles the bytes of the original text.
    ///
    /// With a marker configured, marker characters decode to spaces, so texts
    /// that themselves contain the marker do not round-trip exactly.
    pub fn decode(&self, ids: &[u32]) -> Vec<u8> {
        let mut raw = Vec::new();
        for &id in ids {
            match self.token(id) {
                Some(Token::Piece(p)) => raw.extend_from_slice(p.as_bytes()),
                Some(Token::Byte(b)) => raw.push(b),
                None => {}
            }
        }
        let Some(m) = self.marker else {
            return raw;
        };
        let mut buf = [0u8; 4];
        let marker = m.encode_utf8(&mut buf).as_bytes();
        let mut out = Vec::with_capacity(raw.len());
        let mut i = 0;
        if self.dummy_prefix && raw.starts_with(marker) {
            i = marker.len();
        }
        while i < raw.len() {
            if raw[i..].starts_with(marker) {
                out.push(b' ');
                i += marker.len();
            } else {
                out.push(raw[i]);
                i += 1;
            }
        }
        out
    }
}

fn utf8_width(lead: u8) -> usize {
    match lead {
        0x00..=0x7F => 1,
        0xC0..=0xDF => 2,
        0xE0..=0xEF => 3,
        0xF0..=0xF7 => 4,
        _ => 1,
    }
}

fn parse_byte_piece(piece: &str) -> Option<u8> {
    let hex = piece.strip_prefix("<0x")?.strip_suffix('>')?;
    if hex.len() != 2 {
        return None;
    }
    u8::from_str_radix(hex, 16).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tok(pieces: &[&str], byte_fallback: bool) -> VocabTokenizer {
        VocabTokenizer::new(
            "t",
            pieces.iter().map(|s| s.to_string()).collect(),
            byte_fallback,
        )
        .unwrap()
    }

    fn tokens(t: &VocabTokenizer, text: &str) -> Vec<String> {
        t.tokenize(text)
            .unwrap()
            .into_iter()
            .map(|id| match t.token(id).unwrap() {
                Token::Piece(p) => p.to_string(),
                Token::Byte(b) => format!("<0x{b:02X}>"),
            })
            .collect()
    }

    #[test]
    fn longest_match_wins() {
        let t = tok(&["ab", "a", "b"], false);
        assert_eq!(tokens(&t, "abab"), ["ab", "ab"]);
        assert_eq!(tokens(&t, "aab"), ["a", "ab"]);
    }

    #[test]
    fn byte_fallback_emits_utf8_bytes() {
        let t = tok(&["a"], true);
        assert_eq!(tokens(&t, "aé"), ["a", "<0xC3>", "<0xA9>"]);
        assert_eq!(t.decode(&t.tokenize("aé").unwrap()), "aé".as_bytes());
    }

    #[test]
    fn empty_text_is_empty_sequence() {
        assert!(tok(&["a"], false).tokenize("").unwrap().is_empty());
    }

    #[test]
    fn unmatched_without_fallback_names_offset() {
        let err = tok(&["a"], false).tokenize("aab").unwrap_err();
        assert!(matches!(err, Error::Tokenization { offset: 2 }));
    }

    #[test]
    fn duplicate_pieces_rejected() {
        assert!(VocabTokenizer::new("t", vec!["a".into(), "a".into()], false).is_err());
    }

    #[test]
    fn vocab_file_headers_and_markers() {
        let t = VocabTokenizer::from_vocab_str(
            "spm",
            "#byte_fallback=true\n▁hello\t-1.5\n▁world\n▁\nhe\n",
        )
        .unwrap();
        assert!(t.byte_fallback());
        assert_eq!(t.marker(), Some(DEFAULT_MARKER));
        assert_eq!(tokens(&t, "he world"), ["he", "▁world"]);
        assert_eq!(t.decode(&t.tokenize("he world!").unwrap()), b"he world!");

        let no_marker = VocabTokenizer::from_vocab_str("w", "#marker=none\na\n").unwrap();
        assert_eq!(no_marker.marker(), None);
        assert!(!no_marker.byte_fallback());
    }

    #[test]
    fn dummy_prefix_marks_first_word() {
        let t =
            VocabTokenizer::from_vocab_str("spm", "#dummy_prefix=true\n▁hello\n▁world\n").unwrap();
        assert_eq!(tokens(&t, "hello world"), ["▁hello", "▁world"]);
        assert_eq!(
            t.decode(&t.tokenize("hello world").unwrap()),
            b"hello world"
        );
    }

    #[test]
    fn byte_pieces_enable_fallback() {
        let mut text = String::from("abc\n");
        for b in 0..=255u8 {
            text.push_str(&format!("<0x{b:02X}>\n"));
        }
        let t = VocabTokenizer::from_vocab_str("bytes", &text).unwrap();
        assert!(t.byte_fallback());
        assert_eq!(t.pieces(), ["abc"]);
        assert_eq!(t.count("abcé").unwrap(), 3);
    }

    proptest! {
        #[test]
        fn fallback_tokenization_is_total_and_lossless(s in "\\PC*", pieces in proptest::collection::hash_set("[a-zé ]{1,3}", 0..20)) {
            let t = VocabTokenizer::new("p", pieces.into_iter().collect(), true).unwrap();
            let ids = t.tokenize(&s).unwrap();
            prop_assert_eq!(t.decode(&ids), s.as_bytes());
            prop_assert_eq!(t.tokenize(&s).unwrap(), ids);
        }

        #[test]
        fn separator_piece_splits_counts(a in "[ab]{0,8}", b in "[ab]{0,8}") {
            // `|` overlaps no other piece, so matching never crosses it.
            let t = tok(&["ab", "a", "b", "ba", "|"], false);
            let joined = format!("{a}|{b}");
            prop_assert_eq!(
                t.count(&joined).unwrap(),
                t.count(&a).unwrap() + t.count("|").unwrap() + t.count(&b).unwrap()
            );
        }
    }
}
