//! Corpus-level BLEU over arbitrary token sequences.

use std::collections::HashMap;
use std::hash::Hash;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tokenization::VocabTokenizer;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Smoothing {
    /// Each order with no match gets `1 / (s * total)`, `s` doubling per
    /// such order.
    #[default]
    Exp,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BleuScore {
    pub score: f64,
    /// Smoothed modified precisions, as fractions; 0 past `order`.
    pub precisions: Vec<f64>,
    pub bp: f64,
    /// Orders that entered the geometric mean.
    pub order: usize,
    pub sys_len: usize,
    pub ref_len: usize,
    /// Clipped matches per order.
    pub matches: Vec<u64>,
    /// Hypothesis n-grams per order.
    pub totals: Vec<u64>,
    pub smoothing: Smoothing,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokenizer: Option<String>,
}

fn ngram_counts<T: Eq + Hash>(tokens: &[T], n: usize) -> HashMap<&[T], u64> {
    let mut m = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *m.entry(w).or_default() += 1;
        }
    }
    m
}

#[derive(Clone)]
struct Stats {
    matches: Vec<u64>,
    totals: Vec<u64>,
    sys_len: usize,
    ref_len: usize,
}

impl Stats {
    fn zero(max_order: usize) -> Self {
        Stats {
            matches: vec![0; max_order],
            totals: vec![0; max_order],
            sys_len: 0,
            ref_len: 0,
        }
    }

    fn merge(mut self, o: Stats) -> Self {
        for (a, b) in self.matches.iter_mut().zip(&o.matches) {
            *a += b;
        }
        for (a, b) in self.totals.iter_mut().zip(&o.totals) {
            *a += b;
        }
        self.sys_len += o.sys_len;
        self.ref_len += o.ref_len;
        self
    }
}

fn segment_stats<T: Eq + Hash>(hyp: &[T], reference: &[T], max_order: usize) -> Stats {
    let mut s = Stats::zero(max_order);
    s.sys_len = hyp.len();
    s.ref_len = reference.len();
    for n in 1..=max_order {
        let r = ngram_counts(reference, n);
        for (g, c) in ngram_counts(hyp, n) {
            s.totals[n - 1] += c;
            s.matches[n - 1] += c.min(r.get(g).copied().unwrap_or(0));
        }
    }
    s
}

/// BLEU with n-gram statistics summed over the corpus, one reference per
/// segment.
///
/// Orders for which the hypotheses hold no n-grams at all (every segment
/// shorter than `n`) are left out of the geometric mean, so any nonempty
/// corpus scored against itself gets 100. An empty hypothesis corpus scores
/// 0 (its brevity penalty is 0).
pub fn corpus_bleu<T: Eq + Hash + Sync>(
    hyps: &[Vec<T>],
    refs: &[Vec<T>],
    max_order: usize,
    smoothing: Smoothing,
) -> Result<BleuScore> {
    if hyps.is_empty() {
        return Err(Error::Data("BLEU needs at least one hypothesis".into()));
    }
    if hyps.len() != refs.len() {
        return Err(Error::Alignment(format!(
            "{} hypotheses but {} references",
            hyps.len(),
            refs.len()
        )));
    }
    if max_order == 0 {
        return Err(Error::Config("max_order must be at least 1".into()));
    }
    let st = hyps
        .par_iter()
        .zip(refs)
        .map(|(h, r)| segment_stats(h, r, max_order))
        .reduce(|| Stats::zero(max_order), Stats::merge);

    let mut precisions = vec![0.0; max_order];
    let mut s = 1.0;
    let mut order = 0;
    for n in 0..max_order {
        let (m, t) = (st.matches[n], st.totals[n]);
        if t == 0 {
            break;
        }
        order = n + 1;
        precisions[n] = if m > 0 {
            m as f64 / t as f64
        } else {
            match smoothing {
                Smoothing::Exp => {
                    s *= 2.0;
                    1.0 / (s * t as f64)
                }
                Smoothing::None => 0.0,
            }
        };
    }
    let bp = if st.sys_len == 0 {
        0.0
    } else if st.sys_len < st.ref_len {
        (1.0 - st.ref_len as f64 / st.sys_len as f64).exp()
    } else {
        1.0
    };
    let used = &precisions[..order];
    let score = if bp == 0.0 || order == 0 || used.contains(&0.0) {
        0.0
    } else {
        let mean_log = used.iter().map(|p| p.ln()).sum::<f64>() / order as f64;
        100.0 * bp * mean_log.exp()
    };
    Ok(BleuScore {
        score,
        precisions,
        bp,
        order,
        sys_len: st.sys_len,
        ref_len: st.ref_len,
        matches: st.matches,
        totals: st.totals,
        smoothing,
        tokenizer: None,
    })
}

/// BLEU over subword pieces: both sides tokenized with `tok`, whose name is
/// recorded in the result.
pub fn spbleu(hyps: &[String], refs: &[String], tok: &VocabTokenizer) -> Result<BleuScore> {
    let toks = |texts: &[String]| -> Result<Vec<Vec<u32>>> {
        texts.par_iter().map(|t| tok.tokenize(t)).collect()
    };
    let mut s = corpus_bleu(&toks(hyps)?, &toks(refs)?, 4, Smoothing::Exp)?;
    s.tokenizer = Some(tok.name().to_string());
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn identity_is_100() {
        let c = vec![words("a b c d e"), words("x y")];
        let s = corpus_bleu(&c, &c, 4, Smoothing::Exp).unwrap();
        assert_eq!(s.score, 100.0);
        assert_eq!(s.bp, 1.0);
        // the two-token segment has no 3- or 4-grams; totals still positive
        assert!(s.precisions.iter().all(|&p| p == 1.0));
    }

    #[test]
    fn repeated_word_is_clipped() {
        let s = corpus_bleu(
            &[words("the the the the")],
            &[words("the cat")],
            4,
            Smoothing::Exp,
        )
        .unwrap();
        assert_eq!(s.matches, vec![1, 0, 0, 0]);
        assert_eq!(s.totals, vec![4, 3, 2, 1]);
        assert_eq!(s.precisions, vec![0.25, 1.0 / 6.0, 1.0 / 8.0, 1.0 / 8.0]);
        assert_eq!(s.bp, 1.0);
        let expected = 100.0 * (0.25f64 * (1.0 / 6.0) * 0.125 * 0.125).powf(0.25);
        assert!((s.score - expected).abs() < 1e-12);
    }

    #[test]
    fn brevity_penalty() {
        let s = corpus_bleu(&[words("a b")], &[words("a b c d")], 2, Smoothing::Exp).unwrap();
        assert!((s.bp - (1.0f64 - 2.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn empty_hypotheses() {
        assert!(corpus_bleu::<&str>(&[], &[], 4, Smoothing::Exp).is_err());
        let s = corpus_bleu(&[vec![]], &[words("a b")], 4, Smoothing::Exp).unwrap();
        assert_eq!((s.score, s.bp), (0.0, 0.0));
    }

    #[test]
    fn short_segments_use_fewer_orders() {
        let c = vec![words("a b"), words("c")];
        let s = corpus_bleu(&c, &c, 4, Smoothing::Exp).unwrap();
        assert_eq!((s.score, s.order), (100.0, 2));
        let h = vec![words("a b")];
        let s = corpus_bleu(&h, &[words("a c")], 4, Smoothing::None).unwrap();
        assert_eq!(s.order, 2);
        assert_eq!(s.score, 0.0);
        let s = corpus_bleu(&h, &[words("a c")], 4, Smoothing::Exp).unwrap();
        assert!((s.score - 100.0 * (0.5f64 * 0.5).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn corpus_is_not_mean_of_segments() {
        let hyps = vec![words("a b c d"), words("x y z")];
        let refs = vec![words("a b c d"), words("x q z")];
        let corpus = corpus_bleu(&hyps, &refs, 2, Smoothing::None).unwrap();
        // unigrams 6/7, bigrams 3/5
        let expected = 100.0 * ((6.0f64 / 7.0) * (3.0 / 5.0)).sqrt();
        assert!((corpus.score - expected).abs() < 1e-12);
        let seg0 = corpus_bleu(&hyps[..1], &refs[..1], 2, Smoothing::None)
            .unwrap()
            .score;
        let seg1 = corpus_bleu(&hyps[1..], &refs[1..], 2, Smoothing::None)
            .unwrap()
            .score;
        assert!((corpus.score - (seg0 + seg1) / 2.0).abs() > 1.0);
    }

    #[test]
    fn spbleu_composes_with_tokenizer() {
        let tok = VocabTokenizer::new(
            "chars",
            ('a'..='z').map(String::from).chain([" ".into()]).collect(),
            false,
        )
        .unwrap();
        let hyps = vec!["the cat sat".to_string()];
        let refs = vec!["the cat sit".to_string()];
        let s = spbleu(&hyps, &refs, &tok).unwrap();
        let direct = corpus_bleu(
            &[tok.tokenize(&hyps[0]).unwrap()],
            &[tok.tokenize(&refs[0]).unwrap()],
            4,
            Smoothing::Exp,
        )
        .unwrap();
        assert_eq!(s.score, direct.score);
        assert_eq!(s.tokenizer.as_deref(), Some("chars"));
        assert_eq!(spbleu(&hyps, &hyps, &tok).unwrap().score, 100.0);
    }

    #[test]
    fn relabeling_tokens_changes_nothing() {
        let hyps = vec![vec![1, 2, 3, 2], vec![5, 5]];
        let refs = vec![vec![1, 2, 2, 3], vec![5, 6]];
        let relabel = |v: &Vec<Vec<i32>>| {
            v.iter()
                .map(|s| s.iter().map(|t| t * 7 + 100).collect())
                .collect::<Vec<Vec<i32>>>()
        };
        let a = corpus_bleu(&hyps, &refs, 4, Smoothing::Exp).unwrap();
        let b = corpus_bleu(&relabel(&hyps), &relabel(&refs), 4, Smoothing::Exp).unwrap();
        assert_eq!(a, b);
    }
}
