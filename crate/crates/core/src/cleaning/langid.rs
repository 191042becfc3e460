//! Character n-gram language identification with out-of-place rank distance.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::LanguageTag;
use crate::error::{Error, Result};

/// Smallest profile size accepted by [`train_langid`].
pub const MIN_PROFILE_SIZE: usize = 50;

/// Ranked character 1-3-grams of one language.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "StoredProfile", into = "StoredProfile")]
pub struct LangProfile {
    lang: LanguageTag,
    k: usize,
    ngrams: Vec<String>,
    ranks: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct StoredProfile {
    lang: LanguageTag,
    k: usize,
    ngrams: Vec<String>,
}

impl From<StoredProfile> for LangProfile {
    fn from(s: StoredProfile) -> Self {
        LangProfile::from_ranked(s.lang, s.k, s.ngrams)
    }
}

impl From<LangProfile> for StoredProfile {
    fn from(p: LangProfile) -> Self {
        StoredProfile {
            lang: p.lang,
            k: p.k,
            ngrams: p.ngrams,
        }
    }
}

impl LangProfile {
    fn from_ranked(lang: LanguageTag, k: usize, ngrams: Vec<String>) -> Self {
        let ranks = ngrams
            .iter()
            .enumerate()
            .map(|(i, g)| (g.clone(), i + 1))
            .collect();
        LangProfile {
            lang,
            k,
            ngrams,
            ranks,
        }
    }

    pub fn lang(&self) -> LanguageTag {
        self.lang
    }

    /// Configured profile size. The profile may hold fewer n-grams.
    pub fn k(&self) -> usize {
        self.k
    }

    /// N-grams in rank order; rank of `ngrams()[i]` is `i + 1`.
    pub fn ngrams(&self) -> &[String] {
        &self.ngrams
    }

    pub fn rank(&self, ngram: &str) -> Option<usize> {
        self.ranks.get(ngram).copied()
    }
}

/// Counts character 1-, 2- and 3-grams of lowercased words, each padded by
/// one space on both sides. The lone-space unigram is not counted.
fn count_ngrams(text: &str, counts: &mut HashMap<String, u64>) {
    let lower = text.to_lowercase();
    for word in lower.split_whitespace() {
        let chars: Vec<char> = std::iter::once(' ')
            .chain(word.chars())
            .chain(std::iter::once(' '))
            .collect();
        for n in 1..=3 {
            for window in chars.windows(n) {
                if n == 1 && window[0] == ' ' {
                    continue;
                }
                *counts.entry(window.iter().collect()).or_default() += 1;
            }
        }
    }
}

/// Top-`k` n-grams by frequency; ties go to the lexicographically smaller
/// n-gram.
fn ranked_ngrams<'a>(texts: impl IntoIterator<Item = &'a str>, k: usize) -> Vec<String> {
    let mut counts = HashMap::new();
    for t in texts {
        count_ngrams(t, &mut counts);
    }
    let mut entries: Vec<(String, u64)> = counts.into_iter().collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    entries.truncate(k);
    entries.into_iter().map(|(g, _)| g).collect()
}

/// Builds one profile per language from sample texts.
pub fn train_langid(
    samples: &BTreeMap<LanguageTag, Vec<String>>,
    k: usize,
) -> Result<Vec<LangProfile>> {
    if k < MIN_PROFILE_SIZE {
        return Err(Error::Config(format!(
            "profile size must be at least {MIN_PROFILE_SIZE}, got {k}"
        )));
    }
    if samples.is_empty() {
        return Err(Error::Config(
            "language identification needs samples".into(),
        ));
    }
    samples
        .iter()
        .map(|(&lang, texts)| {
            if !texts.iter().any(|t| !t.trim().is_empty()) {
                return Err(Error::Config(format!("no non-empty samples for {lang}")));
            }
            let ngrams = ranked_ngrams(texts.iter().map(String::as_str), k);
            Ok(LangProfile::from_ranked(lang, k, ngrams))
        })
        .collect()
}

/// Out-of-place distance between a ranked text profile and a language
/// profile. N-grams absent from the language profile cost `k + 1`.
fn distance(text_ngrams: &[String], profile: &LangProfile) -> usize {
    text_ngrams
        .iter()
        .enumerate()
        .map(|(i, g)| match profile.rank(g) {
            Some(r) => r.abs_diff(i + 1),
            None => profile.k + 1,
        })
        .sum()
}

/// Returns the closest language and its margin
/// `(second_best - best) / second_best`; with one profile the margin is 1.
pub fn identify_language(text: &str, profiles: &[LangProfile]) -> Result<(LanguageTag, f64)> {
    if profiles.is_empty() {
        return Err(Error::Config("no language profiles".into()));
    }
    if text.trim().is_empty() {
        return Err(Error::Data(
            "cannot identify the language of empty text".into(),
        ));
    }
    let k = profiles
        .iter()
        .map(|p| p.k)
        .max()
        .unwrap_or(MIN_PROFILE_SIZE);
    let text_ngrams = ranked_ngrams([text], k);
    let mut scored: Vec<(usize, LanguageTag)> = profiles
        .iter()
        .map(|p| (distance(&text_ngrams, p), p.lang))
        .collect();
    scored.sort();
    let (best, lang) = scored[0];
    let margin = match scored.get(1) {
        None => 1.0,
        Some(&(0, _)) => 0.0,
        Some(&(second, _)) => (second - best) as f64 / second as f64,
    };
    Ok((lang, margin))
}
