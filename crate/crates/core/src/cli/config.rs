//! Run configuration. Every command writes the resolved configuration next
//! to its outputs; passing that snapshot back as `--config` repeats the run.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cleaning::{CleanConfig, MIN_PROFILE_SIZE};
use crate::corpus::Direction;
use crate::error::{Error, Result};
use crate::eval::{DirectionGroup, DEFAULT_SHOTS};
use crate::sft::SelectionPolicy;

pub const SNAPSHOT_FILE: &str = "config.snapshot.json";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub workers: Option<usize>,
    pub tokstats: TokstatsConfig,
    pub clean: CleanSection,
    pub pfms: PfmsConfig,
    pub sft: SftConfig,
    pub score: ScoreConfig,
    pub eval: EvalConfig,
    pub prompt: PromptConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TokstatsConfig {
    pub vocabs: Vec<PathBuf>,
    /// Directory of line-aligned `<code>.txt` files, `en.txt` included.
    pub corpus: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CleanSection {
    pub input: Option<PathBuf>,
    #[serde(flatten)]
    pub thresholds: CleanConfig,
    /// Directory of `<code>.txt` sample files for language ID profiles.
    pub langid_samples: Option<PathBuf>,
    pub langid_profile_size: usize,
    /// JSONL `{"id", "vector"}` file; without it similarity is skipped.
    pub embeddings: Option<PathBuf>,
}

impl Default for CleanSection {
    fn default() -> Self {
        CleanSection {
            input: None,
            thresholds: CleanConfig::default(),
            langid_samples: None,
            langid_profile_size: 300,
            embeddings: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PfmsConfig {
    pub budget_billions: Option<f64>,
    /// JSON list of per-language availabilities; inferred from the bundled
    /// tables when absent.
    pub availability: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SftConfig {
    pub input: Option<PathBuf>,
    pub policy: SelectionPolicy,
    pub sample_sizes: Vec<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoreConfig {
    pub hyp: Option<PathBuf>,
    #[serde(rename = "ref")]
    pub reference: Option<PathBuf>,
    pub vocab: Option<PathBuf>,
    pub system: Option<String>,
    pub direction: Option<Direction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub inputs: Vec<PathBuf>,
    /// All systems in the matrix when empty.
    pub systems: Vec<String>,
    pub metrics: Vec<String>,
    pub groups: Option<Vec<DirectionGroup>>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            inputs: Vec::new(),
            systems: Vec::new(),
            metrics: vec!["spbleu".into(), "comet".into()],
            groups: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PromptStyle {
    #[default]
    Icl,
    Instruction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PromptConfig {
    /// Exemplar pool, a parallel file.
    pub dev: Option<PathBuf>,
    /// Queries, a parallel file; only the source side is used.
    pub input: Option<PathBuf>,
    pub shots: usize,
    pub style: PromptStyle,
}

impl Default for PromptConfig {
    fn default() -> Self {
        PromptConfig {
            dev: None,
            input: None,
            shots: DEFAULT_SHOTS,
            style: PromptStyle::Icl,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        self.clean.thresholds.validate()?;
        if self.clean.langid_samples.is_some() && self.clean.langid_profile_size < MIN_PROFILE_SIZE
        {
            return Err(Error::Config(format!(
                "langid_profile_size must be at least {MIN_PROFILE_SIZE}"
            )));
        }
        self.sft.policy.validate()?;
        if self.eval.metrics.is_empty() {
            return Err(Error::Config("eval.metrics is empty".into()));
        }
        if let Some(groups) = &self.eval.groups {
            for g in groups {
                g.validate()?;
            }
        }
        if self.prompt.shots == 0 {
            return Err(Error::Config("prompt.shots must be at least 1".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}

/// Fails with a configuration error naming `what` when no path was given,
/// and canonicalizes the path otherwise so snapshots are cwd-independent.
pub fn require_path(p: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
    let p = p
        .as_ref()
        .ok_or_else(|| Error::Config(format!("no {what} given")))?;
    canonical(p)
}

pub fn canonical(p: &Path) -> Result<PathBuf> {
    std::fs::canonicalize(p).map_err(|e| Error::io(p, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let c = RunConfig::default();
        let back: RunConfig = serde_json::from_str(&c.to_json()).unwrap();
        assert_eq!(back, c);
        c.validate().unwrap();
    }

    #[test]
    fn partial_config_fills_defaults() {
        let c: RunConfig =
            serde_json::from_str(r#"{"seed": 7, "clean": {"max_len_ratio": 2.5}}"#).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.clean.thresholds.max_len_ratio, 2.5);
        assert_eq!(
            c.clean.thresholds.max_chars,
            CleanConfig::default().max_chars
        );
        assert_eq!(c.prompt.shots, 8);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"sede": 7}"#).is_err());
    }

    #[test]
    fn invalid_values() {
        let mut c = RunConfig::default();
        c.sft.policy.threshold = 2.0;
        assert!(c.validate().unwrap_err().is_config());
        let c = RunConfig {
            workers: Some(0),
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }
}
