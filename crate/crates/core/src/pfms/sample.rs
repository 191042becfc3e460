//! Turns a [`MixPlan`] into concrete record selections.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::plan::{MixPlan, Pool};
use crate::corpus::{
    parse_monolingual_stream, parse_parallel_stream, LanguageTag, MonoFormat, ParallelFormat,
    Parsed,
};
use crate::error::{Error, Result};
use crate::seeded::stream_rng;
use crate::tokenization::VocabTokenizer;

/// Generator for one (language, pool) stream, independent of every other.
pub fn pool_rng(seed: u64, lang: LanguageTag, pool: Pool) -> ChaCha8Rng {
    stream_rng(seed, &["pfms", lang.code(), pool.as_str()])
}

/// Token counts of the records of one file feeding one pool.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolSource {
    pub lang: LanguageTag,
    pub pool: Pool,
    pub file: PathBuf,
    /// Tokens of the i-th valid record of `file`.
    pub token_counts: Vec<u64>,
}

impl PoolSource {
    pub fn from_counts(
        lang: LanguageTag,
        pool: Pool,
        file: impl Into<PathBuf>,
        token_counts: Vec<u64>,
    ) -> Self {
        PoolSource {
            lang,
            pool,
            file: file.into(),
            token_counts,
        }
    }

    /// Counts the valid records of a monolingual file. Stored counts are
    /// trusted when they were made with the same tokenizer.
    pub fn from_monolingual_file(
        path: &Path,
        format: MonoFormat,
        tok: &VocabTokenizer,
    ) -> Result<Self> {
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lang = None;
        let mut counts = Vec::new();
        for item in parse_monolingual_stream(BufReader::new(f), format) {
            let Parsed::Record(r) = item? else { continue };
            if *lang.get_or_insert(r.lang) != r.lang {
                return Err(Error::Data(format!(
                    "{}: mixes languages {} and {}",
                    path.display(),
                    lang.unwrap(),
                    r.lang
                )));
            }
            let n = match (r.token_count, r.tokenizer.as_deref()) {
                (Some(n), Some(name)) if name == tok.name() => n,
                _ => tok.count(&r.text)? as u64,
            };
            counts.push(n);
        }
        let lang = match (lang, format) {
            (Some(l), _) | (None, MonoFormat::Plain(l)) => l,
            (None, MonoFormat::Jsonl) => {
                return Err(Error::Data(format!("{}: no valid records", path.display())))
            }
        };
        Ok(PoolSource::from_counts(lang, Pool::Mono, path, counts))
    }

    /// Counts a parallel file; a pair costs the tokens of both sides.
    /// `lang` is the non-pivot side the pool belongs to.
    pub fn from_parallel_file(
        path: &Path,
        lang: LanguageTag,
        pool: Pool,
        tok: &VocabTokenizer,
    ) -> Result<Self> {
        if pool == Pool::Mono {
            return Err(Error::Config(
                "parallel files feed parallel pools only".into(),
            ));
        }
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut counts = Vec::new();
        for item in parse_parallel_stream(BufReader::new(f), ParallelFormat::from_path(path)) {
            let Parsed::Record(p) = item? else { continue };
            counts.push((tok.count(&p.src_text)? + tok.count(&p.tgt_text)?) as u64);
        }
        Ok(PoolSource::from_counts(lang, pool, path, counts))
    }
}

/// One selected record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub lang: LanguageTag,
    pub pool: Pool,
    pub file: PathBuf,
    pub index: usize,
    pub tokens: u64,
}

/// Outcome for one (language, pool).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolSummary {
    pub lang: LanguageTag,
    pub pool: Pool,
    pub allocation: u64,
    pub achieved: u64,
    /// Tokens past the allocation taken to finish the last record.
    pub overshoot: u64,
    /// The sources ran out before the allocation was reached.
    pub exhausted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingManifest {
    pub seed: u64,
    pub budget_n: u64,
    pub entries: Vec<ManifestEntry>,
    pub summaries: Vec<PoolSummary>,
}

impl SamplingManifest {
    pub fn write_jsonl(&self, mut w: impl Write) -> Result<()> {
        for e in &self.entries {
            serde_json::to_writer(&mut w, e)?;
            w.write_all(b"\n").map_err(|e| Error::io("<manifest>", e))?;
        }
        Ok(())
    }
}

/// Walks each pool's records in a seeded shuffle order, taking records until
/// the running token count first reaches the allocation.
pub fn materialize(plan: &MixPlan, sources: &[PoolSource], seed: u64) -> Result<SamplingManifest> {
    let mut grouped: BTreeMap<(LanguageTag, Pool), Vec<&PoolSource>> = BTreeMap::new();
    for s in sources {
        if !s.pool.exists_for(s.lang) {
            return Err(Error::Config(format!(
                "`{}` has no {} pool",
                s.lang, s.pool
            )));
        }
        grouped.entry((s.lang, s.pool)).or_default().push(s);
    }
    let jobs: Vec<(LanguageTag, Pool, u64)> = plan
        .allocations
        .values()
        .flat_map(|a| {
            Pool::ALL
                .into_iter()
                .filter_map(move |p| a.get(p).map(|v| (a.lang, p, v)))
        })
        .collect();

    let results: Vec<(Vec<ManifestEntry>, PoolSummary)> = jobs
        .par_iter()
        .map(|&(lang, pool, allocation)| {
            let srcs = grouped.get(&(lang, pool)).map(Vec::as_slice).unwrap_or(&[]);
            let mut order: Vec<(usize, usize)> = srcs
                .iter()
                .enumerate()
                .flat_map(|(si, s)| (0..s.token_counts.len()).map(move |i| (si, i)))
                .collect();
            order.shuffle(&mut pool_rng(seed, lang, pool));
            let mut entries = Vec::new();
            let mut achieved = 0u64;
            for (si, i) in order {
                if achieved >= allocation {
                    break;
                }
                let tokens = srcs[si].token_counts[i];
                achieved += tokens;
                entries.push(ManifestEntry {
                    lang,
                    pool,
                    file: srcs[si].file.clone(),
                    index: i,
                    tokens,
                });
            }
            let exhausted = achieved < allocation;
            (
                entries,
                PoolSummary {
                    lang,
                    pool,
                    allocation,
                    achieved,
                    overshoot: achieved.saturating_sub(allocation),
                    exhausted,
                },
            )
        })
        .collect();

    let mut manifest = SamplingManifest {
        seed,
        budget_n: plan.budget_n,
        entries: Vec::new(),
        summaries: Vec::new(),
    };
    for (entries, summary) in results {
        if summary.exhausted {
            log::warn!(
                "{} {}: pool exhausted at {} of {} tokens",
                summary.lang,
                summary.pool,
                summary.achieved,
                summary.allocation
            );
        }
        manifest.entries.extend(entries);
        manifest.summaries.push(summary);
    }
    Ok(manifest)
}
