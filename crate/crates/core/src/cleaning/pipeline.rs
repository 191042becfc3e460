use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::heuristics::{heuristic_filter, CleanConfig, DedupState, FilterDecision, FilterReason};
use super::langid::{identify_language, LangProfile};
use super::similarity::{similarity_filter, EmbeddingProvider};
use crate::corpus::{LanguageTag, SentencePair};
use crate::error::Result;

/// Per-reason drop counts. Every input lands in exactly one bucket.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanStats {
    pub counts: BTreeMap<FilterReason, u64>,
    pub errored: u64,
    pub total: u64,
}

impl CleanStats {
    pub fn kept(&self) -> u64 {
        self.counts.get(&FilterReason::Ok).copied().unwrap_or(0)
    }

    pub fn dropped(&self) -> u64 {
        self.counts
            .iter()
            .filter(|(r, _)| **r != FilterReason::Ok)
            .map(|(_, n)| n)
            .sum()
    }

    fn record(&mut self, outcome: &Outcome) {
        self.total += 1;
        match outcome {
            Outcome::Kept(_) => *self.counts.entry(FilterReason::Ok).or_default() += 1,
            Outcome::Dropped(_, d) => *self.counts.entry(d.reason()).or_default() += 1,
            Outcome::Errored(..) => self.errored += 1,
        }
    }
}

/// What happened to one input pair.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Kept(SentencePair),
    Dropped(SentencePair, FilterDecision),
    /// The similarity provider failed; the pair is neither kept nor filtered.
    Errored(SentencePair, String),
}

/// A dropped pair as written to the quarantine file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuarantineRecord {
    #[serde(flatten)]
    pub pair: SentencePair,
    pub reason: FilterReason,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// Streaming cleaner: heuristics, then language ID, then similarity.
///
/// Language ID runs only for sides whose declared language has a profile;
/// similarity runs only when a provider is supplied.
pub struct Pipeline<'a> {
    cfg: CleanConfig,
    profiles: &'a [LangProfile],
    embed: Option<&'a dyn EmbeddingProvider>,
    seen: DedupState,
    stats: CleanStats,
}

impl<'a> Pipeline<'a> {
    pub fn new(
        cfg: CleanConfig,
        profiles: &'a [LangProfile],
        embed: Option<&'a dyn EmbeddingProvider>,
    ) -> Result<Self> {
        cfg.validate()?;
        Ok(Pipeline {
            cfg,
            profiles,
            embed,
            seen: DedupState::new(),
            stats: CleanStats::default(),
        })
    }

    fn langid_ok(&self, text: &str, declared: LanguageTag) -> bool {
        if !self.profiles.iter().any(|p| p.lang() == declared) {
            return true;
        }
        match identify_language(text, self.profiles) {
            Ok((lang, margin)) => lang == declared && margin >= self.cfg.langid_min_margin,
            Err(_) => false,
        }
    }

    fn decide(&mut self, pair: &SentencePair) -> std::result::Result<FilterDecision, String> {
        let d = heuristic_filter(pair, &self.cfg, &mut self.seen);
        if !d.kept() {
            return Ok(d);
        }
        if !self.langid_ok(&pair.src_text, pair.src_lang) {
            return Ok(FilterDecision::drop(FilterReason::LangidSrc, None));
        }
        if !self.langid_ok(&pair.tgt_text, pair.tgt_lang) {
            return Ok(FilterDecision::drop(FilterReason::LangidTgt, None));
        }
        match self.embed {
            None => Ok(d),
            Some(e) => {
                similarity_filter(pair, e, self.cfg.sim_threshold).map_err(|e| e.to_string())
            }
        }
    }

    pub fn process(&mut self, pair: SentencePair) -> Outcome {
        let outcome = match self.decide(&pair) {
            Ok(d) if d.kept() => Outcome::Kept(pair),
            Ok(d) => Outcome::Dropped(pair, d),
            Err(msg) => Outcome::Errored(pair, msg),
        };
        self.stats.record(&outcome);
        outcome
    }

    pub fn stats(&self) -> &CleanStats {
        &self.stats
    }

    pub fn into_stats(self) -> CleanStats {
        self.stats
    }
}

#[derive(Debug, Clone, Default)]
pub struct PipelineOutput {
    pub kept: Vec<SentencePair>,
    pub quarantine: Vec<QuarantineRecord>,
    pub errored: Vec<(SentencePair, String)>,
    pub stats: CleanStats,
}

/// Runs the whole pipeline over `pairs`, keeping input order.
pub fn run_pipeline(
    pairs: impl IntoIterator<Item = SentencePair>,
    cfg: &CleanConfig,
    profiles: &[LangProfile],
    embed: Option<&dyn EmbeddingProvider>,
) -> Result<PipelineOutput> {
    let mut pipeline = Pipeline::new(cfg.clone(), profiles, embed)?;
    let mut out = PipelineOutput::default();
    for pair in pairs {
        match pipeline.process(pair) {
            Outcome::Kept(p) => out.kept.push(p),
            Outcome::Dropped(pair, d) => out.quarantine.push(QuarantineRecord {
                pair,
                reason: d.reason(),
                detail: d.detail().map(str::to_string),
            }),
            Outcome::Errored(p, msg) => out.errored.push((p, msg)),
        }
    }
    out.stats = pipeline.into_stats();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cleaning::langid::train_langid;
    use crate::error::Error;

    fn lang(code: &str) -> LanguageTag {
        LanguageTag::from_code(code).unwrap()
    }

    fn pair(src: &str, tgt: &str) -> SentencePair {
        SentencePair::new(lang("en"), lang("de"), src, tgt).unwrap()
    }

    fn fixture() -> Vec<SentencePair> {
        (0..10)
            .map(|i| pair(&format!("sentence number {i}"), &format!("Satz Nummer {i}")))
            .collect()
    }

    #[test]
    fn all_valid_pairs_are_kept() {
        let out = run_pipeline(fixture(), &CleanConfig::default(), &[], None).unwrap();
        assert_eq!(out.kept.len(), 10);
        assert_eq!(out.stats.counts, BTreeMap::from([(FilterReason::Ok, 10)]));
    }

    #[test]
    fn empty_and_duplicate_are_dropped() {
        let mut pairs = fixture();
        pairs[3].tgt_text = String::new();
        pairs[7] = pairs[1].clone();
        let out = run_pipeline(pairs, &CleanConfig::default(), &[], None).unwrap();
        assert_eq!(out.kept.len(), 8);
        assert_eq!(out.stats.counts[&FilterReason::Empty], 1);
        assert_eq!(out.stats.counts[&FilterReason::Duplicate], 1);
        assert_eq!(out.quarantine.len(), 2);
        assert_eq!(out.stats.total, 10);
    }

    #[test]
    fn language_id_checks_declared_tags() {
        let samples = BTreeMap::from([
            (
                lang("en"),
                vec!["the cat sat on the mat with the hat".to_string()],
            ),
            (
                lang("de"),
                vec!["die katze sitzt auf der matte mit dem hut".to_string()],
            ),
        ]);
        let profiles = train_langid(&samples, 200).unwrap();
        let swapped = pair("die katze sitzt", "the cat sat");
        let good = pair("the cat sat on the mat", "die katze sitzt auf der matte");
        let out = run_pipeline(
            vec![swapped, good],
            &CleanConfig::default(),
            &profiles,
            None,
        )
        .unwrap();
        assert_eq!(out.kept.len(), 1);
        assert_eq!(out.quarantine[0].reason, FilterReason::LangidSrc);
    }

    struct Failing;

    impl EmbeddingProvider for Failing {
        fn name(&self) -> &str {
            "failing"
        }
        fn embed(&self, _: &str) -> Result<Vec<f32>> {
            Err(Error::Provider("down".into()))
        }
    }

    #[test]
    fn provider_errors_are_counted_separately() {
        let out = run_pipeline(fixture(), &CleanConfig::default(), &[], Some(&Failing)).unwrap();
        assert!(out.kept.is_empty());
        assert_eq!(out.stats.errored, 10);
        assert_eq!(out.stats.dropped(), 0);
        assert_eq!(out.stats.total, 10);
    }

    #[test]
    fn quarantine_record_flattens_pair() {
        let q = QuarantineRecord {
            pair: pair("a", ""),
            reason: FilterReason::Empty,
            detail: Some("tgt".into()),
        };
        let json = serde_json::to_string(&q).unwrap();
        assert!(json.contains(r#""reason":"EMPTY""#));
        assert!(json.contains(r#""src_lang":"en""#));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = CleanConfig {
            max_len_ratio: 0.0,
            ..Default::default()
        };
        assert!(run_pipeline(fixture(), &cfg, &[], None).is_err());
    }
}
