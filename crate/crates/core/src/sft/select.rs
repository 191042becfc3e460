use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::corpus::Direction;
use crate::error::{Error, Result};

/// One candidate translation with its quality-estimation scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub text: String,
    #[serde(default)]
    pub generator: String,
    #[serde(default)]
    pub scores: BTreeMap<String, f64>,
}

/// A source segment and the candidates competing to translate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub direction: Direction,
    pub src_text: String,
    pub candidates: Vec<Candidate>,
}

/// A score name, or `mean(a,b)` of two score names.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Metric {
    Single(String),
    Mean(String, String),
}

impl Metric {
    pub fn resolve(&self, scores: &BTreeMap<String, f64>) -> Option<f64> {
        match self {
            Metric::Single(m) => scores.get(m).copied(),
            Metric::Mean(a, b) => Some((scores.get(a)? + scores.get(b)?) / 2.0),
        }
    }

    /// Name of the first score `scores` lacks, if any.
    fn first_missing<'a>(&'a self, scores: &BTreeMap<String, f64>) -> Option<&'a str> {
        let names: &[&String] = match self {
            Metric::Single(m) => &[m],
            Metric::Mean(a, b) => &[a, b],
        };
        names
            .iter()
            .find(|n| !scores.contains_key(n.as_str()))
            .map(|n| n.as_str())
    }

    /// Score range the metric is reported on, when known.
    pub fn range(&self) -> Option<(f64, f64)> {
        fn single(m: &str) -> Option<(f64, f64)> {
            match m {
                "xcomet" | "cometkiwi" | "comet" => Some((0.0, 1.0)),
                "spbleu" | "bleu" => Some((0.0, 100.0)),
                _ => None,
            }
        }
        match self {
            Metric::Single(m) => single(m),
            Metric::Mean(a, b) => match (single(a), single(b)) {
                (Some(x), Some(y)) if x == y => Some(x),
                _ => None,
            },
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Single(m) => f.write_str(m),
            Metric::Mean(a, b) => write!(f, "mean({a},{b})"),
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let valid = |n: &str| {
            !n.is_empty()
                && n.chars()
                    .all(|c| c.is_alphanumeric() || c == '_' || c == '-')
        };
        if let Some(inner) = s.strip_prefix("mean(").and_then(|r| r.strip_suffix(')')) {
            if let Some((a, b)) = inner.split_once(',') {
                let (a, b) = (a.trim(), b.trim());
                if valid(a) && valid(b) {
                    return Ok(Metric::Mean(a.into(), b.into()));
                }
            }
        } else if valid(s) {
            return Ok(Metric::Single(s.into()));
        }
        Err(Error::Config(format!("cannot parse metric `{s}`")))
    }
}

impl Serialize for Metric {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Metric {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum TieBreak {
    /// The lowest-index candidate wins a tie.
    #[default]
    FirstIndex,
}

/// How a candidate is chosen and when it is kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionPolicy {
    pub metric: Metric,
    pub threshold: f64,
    pub tie_break: TieBreak,
}

impl Default for SelectionPolicy {
    fn default() -> Self {
        SelectionPolicy {
            metric: Metric::Mean("xcomet".into(), "cometkiwi".into()),
            threshold: 0.85,
            tie_break: TieBreak::FirstIndex,
        }
    }
}

impl SelectionPolicy {
    pub fn validate(&self) -> Result<()> {
        if !self.threshold.is_finite() {
            return Err(Error::Config("threshold must be finite".into()));
        }
        if let Some((lo, hi)) = self.metric.range() {
            if !(lo..=hi).contains(&self.threshold) {
                return Err(Error::Config(format!(
                    "threshold {} lies outside the [{lo}, {hi}] range of {}",
                    self.threshold, self.metric
                )));
            }
        }
        Ok(())
    }
}

/// Index and score of the best candidate under `policy.metric`.
pub fn select_best(cs: &CandidateSet, policy: &SelectionPolicy) -> Result<(usize, f64)> {
    if cs.candidates.is_empty() {
        return Err(Error::Data(format!(
            "no candidates for `{}` ({})",
            cs.src_text, cs.direction
        )));
    }
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in cs.candidates.iter().enumerate() {
        if let Some(m) = policy.metric.first_missing(&c.scores) {
            return Err(Error::MissingScore {
                candidate: i,
                metric: m.to_string(),
            });
        }
        let score = policy
            .metric
            .resolve(&c.scores)
            .expect("scores checked above");
        match best {
            Some((_, s)) if score <= s => {}
            _ => best = Some((i, score)),
        }
    }
    Ok(best.expect("candidates is nonempty"))
}

/// Keeps scores at or above `tau`.
pub fn threshold_filter(score: f64, tau: f64) -> bool {
    score >= tau
}
