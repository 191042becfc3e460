use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::select::{select_best, threshold_filter, CandidateSet, SelectionPolicy};
use super::template::format_instruction;
use crate::corpus::{Direction, LanguageTag};
use crate::error::{Error, Result};
use crate::seeded::permutation;

const SFT_DIRECTIONS: &str = include_str!("../../data/sft_directions.tsv");
const SFT_SETUP: &str = include_str!("../../data/sft_setup.tsv");

/// One instruction-tuning example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SftRecord {
    pub direction: Direction,
    pub prompt: String,
    pub completion: String,
    pub score: f64,
    pub generator: String,
}

/// Per-direction example counts and the shares of the two pivot languages.
///
/// A direction is English-centric when either side is `en`, and
/// Chinese-centric when either side is `zhs`; `en<->zhs` counts toward both.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DistributionReport {
    pub counts: BTreeMap<Direction, u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<SelectionPolicy>,
}

impl DistributionReport {
    pub fn from_counts(counts: impl IntoIterator<Item = (Direction, u64)>) -> Self {
        let mut r = DistributionReport::default();
        for (d, n) in counts {
            *r.counts.entry(d).or_default() += n;
        }
        r
    }

    pub fn add(&mut self, d: Direction) {
        *self.counts.entry(d).or_default() += 1;
    }

    /// Sums two reports over disjoint shards.
    pub fn merge(mut self, other: DistributionReport) -> Self {
        for (d, n) in other.counts {
            *self.counts.entry(d).or_default() += n;
        }
        if self.policy.is_none() {
            self.policy = other.policy;
        }
        self
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn directions(&self) -> usize {
        self.counts.values().filter(|&&n| n > 0).count()
    }

    fn count_where(&self, pred: impl Fn(Direction) -> bool) -> u64 {
        self.counts
            .iter()
            .filter(|(d, _)| pred(**d))
            .map(|(_, n)| n)
            .sum()
    }

    pub fn en_centric(&self) -> u64 {
        self.count_where(|d| d.involves(LanguageTag::english()))
    }

    pub fn zhs_centric(&self) -> u64 {
        self.count_where(|d| d.involves(LanguageTag::chinese_simplified()))
    }

    /// Examples counted in both shares: `en->zhs` plus `zhs->en`.
    pub fn overlap(&self) -> u64 {
        self.count_where(|d| {
            d.involves(LanguageTag::english()) && d.involves(LanguageTag::chinese_simplified())
        })
    }

    /// Chinese-centric examples whose other side is not English.
    pub fn zhs_non_english(&self) -> u64 {
        self.count_where(|d| {
            d.involves(LanguageTag::chinese_simplified()) && !d.involves(LanguageTag::english())
        })
    }

    fn share(&self, n: u64) -> f64 {
        match self.total() {
            0 => 0.0,
            t => 100.0 * n as f64 / t as f64,
        }
    }

    /// Percentage of examples in English-centric directions.
    pub fn en_centric_share(&self) -> f64 {
        self.share(self.en_centric())
    }

    /// Percentage of examples in Chinese-centric directions.
    pub fn zhs_centric_share(&self) -> f64 {
        self.share(self.zhs_centric())
    }

    /// Directions by descending count (ties by direction), laid out
    /// column-major in three "Translation Direction | Count" column pairs.
    pub fn render_text(&self) -> String {
        let mut sorted: Vec<(Direction, u64)> = self
            .counts
            .iter()
            .filter(|(_, &n)| n > 0)
            .map(|(&d, &n)| (d, n))
            .collect();
        sorted.sort_by(|a, b| {
            b.1.cmp(&a.1)
                .then_with(|| a.0.to_string().cmp(&b.0.to_string()))
        });
        let rows: Vec<(String, String)> = sorted
            .iter()
            .map(|(d, n)| (d.to_string(), n.to_string()))
            .collect();
        let height = rows.len().div_ceil(3);
        let dw = rows
            .iter()
            .map(|r| r.0.len())
            .max()
            .unwrap_or(0)
            .max("Translation Direction".len());
        let cw = rows
            .iter()
            .map(|r| r.1.len())
            .max()
            .unwrap_or(0)
            .max("Count".len());
        let mut out = String::new();
        let header = format!("{:<dw$} | {:>cw$}", "Translation Direction", "Count");
        let _ = writeln!(out, "{}", [header.as_str(); 3].join(" | "));
        for i in 0..height {
            let cells: Vec<String> = (0..3)
                .filter_map(|c| rows.get(c * height + i))
                .map(|(d, n)| format!("{d:<dw$} | {n:>cw$}"))
                .collect();
            let _ = writeln!(out, "{}", cells.join(" | ").trim_end());
        }
        out
    }
}

/// The published per-direction counts of the finetuning set.
pub fn published_sft_counts() -> Vec<(Direction, u64)> {
    SFT_DIRECTIONS
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| {
            let cols: Vec<&str> = l.split('\t').collect();
            let src = LanguageTag::parse(cols[0]).expect("bundled direction table");
            let tgt = LanguageTag::parse(cols[1]).expect("bundled direction table");
            let n = cols[2].parse().expect("bundled direction table");
            (
                Direction::new(src, tgt).expect("bundled direction table"),
                n,
            )
        })
        .collect()
}

/// Bundled finetuning hyperparameters, values verbatim.
pub fn sft_setup() -> BTreeMap<String, String> {
    SFT_SETUP
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .filter_map(|l| l.split_once('\t'))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct SftOutput {
    pub records: Vec<SftRecord>,
    /// Sets whose best candidate scored below the threshold.
    pub below_threshold: u64,
    /// Input index and message of sets that could not be processed.
    pub errored: Vec<(usize, String)>,
    pub report: DistributionReport,
}

impl SftOutput {
    /// records + below threshold + errored.
    pub fn total(&self) -> u64 {
        self.records.len() as u64 + self.below_threshold + self.errored.len() as u64
    }
}

enum SetOutcome {
    Kept(SftRecord),
    Below,
    Errored(String),
}

fn process(
    cs: &CandidateSet,
    policy: &SelectionPolicy,
    names: &BTreeMap<LanguageTag, String>,
) -> SetOutcome {
    let (i, score) = match select_best(cs, policy) {
        Ok(v) => v,
        Err(e) => return SetOutcome::Errored(e.to_string()),
    };
    if !threshold_filter(score, policy.threshold) {
        return SetOutcome::Below;
    }
    let chosen = &cs.candidates[i];
    if chosen.text.trim().is_empty() {
        return SetOutcome::Errored(format!("candidate {i} is empty"));
    }
    match format_instruction(cs.direction, &cs.src_text, None, names) {
        Ok(prompt) => SetOutcome::Kept(SftRecord {
            direction: cs.direction,
            prompt,
            completion: chosen.text.clone(),
            score,
            generator: chosen.generator.clone(),
        }),
        Err(e) => SetOutcome::Errored(e.to_string()),
    }
}

/// Selects, filters and formats every candidate set; output keeps input
/// order.
pub fn build_sft(
    sets: &[CandidateSet],
    policy: &SelectionPolicy,
    names: &BTreeMap<LanguageTag, String>,
) -> Result<SftOutput> {
    policy.validate()?;
    let outcomes: Vec<SetOutcome> = sets
        .par_iter()
        .map(|cs| process(cs, policy, names))
        .collect();
    let mut out = SftOutput {
        report: DistributionReport {
            policy: Some(policy.clone()),
            ..Default::default()
        },
        ..Default::default()
    };
    for (i, o) in outcomes.into_iter().enumerate() {
        match o {
            SetOutcome::Kept(r) => {
                out.report.add(r.direction);
                out.records.push(r);
            }
            SetOutcome::Below => out.below_threshold += 1,
            SetOutcome::Errored(msg) => out.errored.push((i, msg)),
        }
    }
    Ok(out)
}

/// Nested seeded subsets: one shuffle of the indices, each size taking a
/// prefix, so smaller subsets are contained in larger ones.
pub fn sample_sft<T: Clone>(records: &[T], sizes: &[usize], seed: u64) -> Result<Vec<Vec<T>>> {
    if let Some(&too_big) = sizes.iter().find(|&&s| s > records.len()) {
        return Err(Error::Config(format!(
            "cannot sample {too_big} of {} records",
            records.len()
        )));
    }
    let order = permutation(records.len(), seed, &["sft-sample"]);
    Ok(sizes
        .iter()
        .map(|&s| order[..s].iter().map(|&i| records[i].clone()).collect())
        .collect())
}

/// Chinese-centric non-English examples in each sample, as reported against
/// scaling experiments.
pub fn zhs_non_english_counts(samples: &[Vec<Direction>]) -> Vec<u64> {
    samples
        .iter()
        .map(|s| DistributionReport::from_counts(s.iter().map(|&d| (d, 1))).zhs_non_english())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sft::select::{Candidate, Metric};
    use crate::sft::template::default_display_names;

    fn d(s: &str) -> Direction {
        s.parse().unwrap()
    }

    fn cs(dir: &str, scores: &[f64]) -> CandidateSet {
        CandidateSet {
            direction: d(dir),
            src_text: "src".into(),
            candidates: scores
                .iter()
                .enumerate()
                .map(|(i, &s)| Candidate {
                    text: format!("t{i}"),
                    generator: format!("g{i}"),
                    scores: BTreeMap::from([("q".to_string(), s)]),
                })
                .collect(),
        }
    }

    fn policy(tau: f64) -> SelectionPolicy {
        SelectionPolicy {
            metric: Metric::Single("q".into()),
            threshold: tau,
            ..Default::default()
        }
    }

    #[test]
    fn published_table_replay() {
        let r = DistributionReport::from_counts(published_sft_counts());
        assert_eq!(r.directions(), 192);
        assert_eq!(r.total(), 264_005);
        assert_eq!(r.counts[&d("en->de")], 27_249);
        assert_eq!(
            r.overlap(),
            r.counts[&d("en->zhs")] + r.counts[&d("zhs->en")]
        );
        assert!((r.en_centric_share() - 94.5).abs() < 0.1);
        assert!((r.zhs_centric_share() - 7.4).abs() < 0.1);
    }

    #[test]
    fn empty_report() {
        let r = DistributionReport::default();
        assert_eq!(
            (r.directions(), r.total(), r.en_centric_share()),
            (0, 0, 0.0)
        );
    }

    #[test]
    fn build_accounts_for_every_set() {
        let mut missing = cs("de->fr", &[0.9]);
        missing.candidates[0].scores.clear();
        let sets = vec![
            cs("en->de", &[0.8, 0.95]),
            cs("en->de", &[0.5]),
            missing,
            cs("zhs->en", &[0.85]),
        ];
        let out = build_sft(&sets, &policy(0.85), &default_display_names()).unwrap();
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.below_threshold, 1);
        assert_eq!(out.errored.len(), 1);
        assert_eq!(out.errored[0].0, 2);
        assert_eq!(out.total(), 4);
        assert_eq!(out.report.total(), 2);
        assert_eq!(out.records[0].completion, "t1");
        assert_eq!(out.records[0].generator, "g1");
        assert_eq!(
            out.records[0].prompt,
            "Translate this from English to German:\nEnglish: src\nGerman:"
        );
        assert_eq!(out.report.overlap(), 1);
    }

    #[test]
    fn merge_is_additive() {
        let a = DistributionReport::from_counts([(d("en->de"), 2), (d("de->en"), 1)]);
        let b = DistributionReport::from_counts([(d("en->de"), 3)]);
        let m = a.clone().merge(b.clone());
        assert_eq!(m.counts[&d("en->de")], 5);
        assert_eq!(m, b.merge(a));
    }

    #[test]
    fn nested_samples() {
        let records: Vec<u32> = (0..10).collect();
        let s = sample_sft(&records, &[2, 4], 11).unwrap();
        assert_eq!(s[0], s[1][..2]);
        assert_eq!(s, sample_sft(&records, &[2, 4], 11).unwrap());
        assert!(sample_sft(&records, &[11], 11).is_err());
    }

    #[test]
    fn three_column_layout() {
        let r = DistributionReport::from_counts([
            (d("en->de"), 5),
            (d("de->en"), 7),
            (d("en->fr"), 1),
            (d("fr->en"), 2),
        ]);
        let text = r.render_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        // height ceil(4 / 3) = 2, filled column by column
        assert!(lines[1].starts_with("de->en"));
        assert!(lines[1].contains("fr->en"));
        assert!(lines[2].starts_with("en->de"));
        assert!(lines[2].contains("en->fr"));
    }

    #[test]
    fn setup_values_are_verbatim() {
        assert_eq!(sft_setup()["LR Scheduler"], "inverse sqrt");
    }
}
