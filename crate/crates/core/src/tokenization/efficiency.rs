//! Tokenizer efficiency: how many tokens a language needs relative to the
//! English sentence it translates.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::vocab::VocabTokenizer;
use crate::corpus::LanguageTag;
use crate::error::{Error, Result};

/// Token length of `y` over token length of its English counterpart `x`.
pub fn length_ratio(tok: &VocabTokenizer, x: &str, y: &str) -> Result<f64> {
    let english = tok.count(x)?;
    if english == 0 {
        return Err(Error::ZeroLength { index: 0 });
    }
    Ok(tok.count(y)? as f64 / english as f64)
}

/// Per-language length ratios of one tokenizer over an aligned corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthRatioReport {
    pub tokenizer_name: String,
    /// Mean token count of the English sentences.
    pub english_mean_len: f64,
    /// Mean of per-sentence ratios, per language.
    pub per_lang_ratio: BTreeMap<LanguageTag, f64>,
    /// Mean of `per_lang_ratio` values.
    pub average_ratio: f64,
    /// Summed non-English tokens over summed English tokens, per language.
    /// Reported alongside the per-sentence mean for comparison.
    pub per_lang_pooled_ratio: BTreeMap<LanguageTag, f64>,
}

/// Computes a [`LengthRatioReport`].
///
/// `aligned[lang][i]` must translate `english[i]`; every list must have the
/// same length as `english`.
pub fn corpus_efficiency(
    tok: &VocabTokenizer,
    aligned: &BTreeMap<LanguageTag, Vec<String>>,
    english: &[String],
) -> Result<LengthRatioReport> {
    if english.is_empty() {
        return Err(Error::Alignment("English corpus is empty".into()));
    }
    if aligned.is_empty() {
        return Err(Error::Alignment("no non-English languages supplied".into()));
    }
    if aligned.contains_key(&LanguageTag::english()) {
        return Err(Error::Alignment(
            "English is the reference side and cannot be an aligned language".into(),
        ));
    }
    for (lang, sents) in aligned {
        if sents.len() != english.len() {
            return Err(Error::Alignment(format!(
                "{lang} has {} sentences, English has {}",
                sents.len(),
                english.len()
            )));
        }
    }

    let english_lens: Vec<usize> = english
        .par_iter()
        .map(|s| tok.count(s))
        .collect::<Result<_>>()?;
    if let Some(index) = english_lens.iter().position(|&n| n == 0) {
        return Err(Error::ZeroLength { index });
    }
    let english_total: usize = english_lens.iter().sum();

    let rows: Vec<(LanguageTag, f64, f64)> = aligned
        .par_iter()
        .map(|(&lang, sents)| {
            let mut ratio_sum = 0.0;
            let mut total = 0usize;
            for (y, &x_len) in sents.iter().zip(&english_lens) {
                let y_len = tok.count(y)?;
                total += y_len;
                ratio_sum += y_len as f64 / x_len as f64;
            }
            Ok((
                lang,
                ratio_sum / sents.len() as f64,
                total as f64 / english_total as f64,
            ))
        })
        .collect::<Result<_>>()?;

    let per_lang_ratio: BTreeMap<_, _> = rows.iter().map(|&(l, r, _)| (l, r)).collect();
    let per_lang_pooled_ratio = rows.iter().map(|&(l, _, p)| (l, p)).collect();
    let average_ratio = per_lang_ratio.values().sum::<f64>() / per_lang_ratio.len() as f64;
    Ok(LengthRatioReport {
        tokenizer_name: tok.name().to_string(),
        english_mean_len: english_total as f64 / english.len() as f64,
        per_lang_ratio,
        average_ratio,
        per_lang_pooled_ratio,
    })
}

/// Tokenizers side by side: English mean length, one row per language and
/// the average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyTable {
    pub tokenizers: Vec<String>,
    pub english_mean_len: Vec<f64>,
    pub rows: Vec<EfficiencyRow>,
    pub average: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyRow {
    pub lang: LanguageTag,
    pub ratios: Vec<f64>,
}

pub fn efficiency_table(reports: &[LengthRatioReport]) -> Result<EfficiencyTable> {
    let first = reports
        .first()
        .ok_or_else(|| Error::Alignment("no reports to tabulate".into()))?;
    for r in &reports[1..] {
        if !r.per_lang_ratio.keys().eq(first.per_lang_ratio.keys()) {
            return Err(Error::Alignment(format!(
                "`{}` and `{}` were evaluated on different language sets",
                first.tokenizer_name, r.tokenizer_name
            )));
        }
    }
    Ok(EfficiencyTable {
        tokenizers: reports.iter().map(|r| r.tokenizer_name.clone()).collect(),
        english_mean_len: reports.iter().map(|r| r.english_mean_len).collect(),
        rows: first
            .per_lang_ratio
            .keys()
            .map(|&lang| EfficiencyRow {
                lang,
                ratios: reports.iter().map(|r| r.per_lang_ratio[&lang]).collect(),
            })
            .collect(),
        average: reports.iter().map(|r| r.average_ratio).collect(),
    })
}

impl EfficiencyTable {
    /// Aligned-column text, values rounded to two decimals.
    pub fn render_text(&self) -> String {
        let label_width = self
            .rows
            .iter()
            .map(|r| r.lang.name().chars().count())
            .chain(["Language".len(), "English".len()])
            .max()
            .unwrap_or(8);
        let col_width = |i: usize| self.tokenizers[i].chars().count().max(6);
        let mut out = String::new();
        let line = |out: &mut String, label: &str, values: &[String]| {
            let _ = write!(out, "{label:<label_width$}");
            for (i, v) in values.iter().enumerate() {
                let _ = write!(out, " | {v:>w$}", w = col_width(i));
            }
            out.push('\n');
        };
        let fmt = |vals: &[f64]| vals.iter().map(|v| format!("{v:.2}")).collect::<Vec<_>>();
        line(&mut out, "Language", &self.tokenizers);
        line(&mut out, "English", &fmt(&self.english_mean_len));
        for row in &self.rows {
            line(&mut out, row.lang.name(), &fmt(&row.ratios));
        }
        line(&mut out, "Average", &fmt(&self.average));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn whitespace_tok() -> VocabTokenizer {
        // Every lowercase letter and space is a piece; one word letter == one token.
        let pieces = ('a'..='z').map(String::from).collect();
        VocabTokenizer::with_options("ws", pieces, false, Some(' '), false).unwrap()
    }

    fn lang(code: &str) -> LanguageTag {
        LanguageTag::from_code(code).unwrap()
    }

    fn strs(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn ratio_of_counts() {
        let t = VocabTokenizer::new("w", strs(&["a ", "b ", "c", "p ", "q ", "r ", "s"]), false)
            .unwrap();
        assert!((length_ratio(&t, "a b c", "p q r s").unwrap() - 4.0 / 3.0).abs() < 1e-12);
        assert_eq!(length_ratio(&t, "a b c", "a b c").unwrap(), 1.0);
        let t2 = VocabTokenizer::new("w", strs(&["xx", "y"]), false).unwrap();
        assert!((length_ratio(&t2, "yyy", "xxxx").unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_length_english_is_guarded() {
        let t = whitespace_tok();
        assert!(matches!(
            length_ratio(&t, "", "abc"),
            Err(Error::ZeroLength { .. })
        ));
    }

    #[test]
    fn single_pair_report() {
        let t = VocabTokenizer::new("c", strs(&["a", "b"]), false).unwrap();
        let aligned = BTreeMap::from([(lang("fi"), strs(&["aaaaaa"]))]);
        let r = corpus_efficiency(&t, &aligned, &strs(&["bbb"])).unwrap();
        assert_eq!(r.per_lang_ratio[&lang("fi")], 2.0);
        assert_eq!(r.average_ratio, 2.0);
        assert_eq!(r.english_mean_len, 3.0);
    }

    #[test]
    fn average_is_mean_over_languages() {
        let t = VocabTokenizer::new("c", strs(&["a"]), false).unwrap();
        let english = strs(&["aa", "aaa"]);
        let aligned = BTreeMap::from([
            (lang("de"), strs(&["aa", "aaa"])),
            (lang("fr"), strs(&["aaaa", "aaaaaa"])),
        ]);
        let r = corpus_efficiency(&t, &aligned, &english).unwrap();
        assert_eq!(r.per_lang_ratio[&lang("de")], 1.0);
        assert_eq!(r.per_lang_ratio[&lang("fr")], 2.0);
        assert!((r.average_ratio - 1.5).abs() < 1e-12);
        assert_eq!(r.english_mean_len, 2.5);
    }

    #[test]
    fn per_sentence_mean_differs_from_pooled_ratio() {
        let t = VocabTokenizer::new("c", strs(&["a"]), false).unwrap();
        let english = strs(&["a", "aaa"]);
        let aligned = BTreeMap::from([(lang("de"), strs(&["aa", "aaa"]))]);
        let r = corpus_efficiency(&t, &aligned, &english).unwrap();
        assert!((r.per_lang_ratio[&lang("de")] - 1.5).abs() < 1e-12);
        assert!((r.per_lang_pooled_ratio[&lang("de")] - 1.25).abs() < 1e-12);
    }

    #[test]
    fn misaligned_lengths_are_fatal() {
        let t = whitespace_tok();
        let aligned = BTreeMap::from([(lang("de"), strs(&["a"]))]);
        assert!(matches!(
            corpus_efficiency(&t, &aligned, &strs(&["a", "b"])),
            Err(Error::Alignment(_))
        ));
    }

    #[test]
    fn table_layout_and_language_set_check() {
        let t = VocabTokenizer::new("c", strs(&["a"]), false).unwrap();
        let english = strs(&["aa"]);
        let aligned = BTreeMap::from([(lang("de"), strs(&["aaa"])), (lang("ja"), strs(&["a"]))]);
        let r = corpus_efficiency(&t, &aligned, &english).unwrap();
        let table = efficiency_table(&[r.clone(), r.clone()]).unwrap();
        assert_eq!(table.average, vec![r.average_ratio; 2]);
        assert_eq!(table.rows[0].ratios[0], table.rows[0].ratios[1]);
        let text = table.render_text();
        assert!(text.contains("German"));
        assert!(text.lines().last().unwrap().starts_with("Average"));
        assert!(text.contains("1.50"));

        let other =
            corpus_efficiency(&t, &BTreeMap::from([(lang("de"), strs(&["a"]))]), &english).unwrap();
        assert!(efficiency_table(&[r, other]).is_err());
    }
}
