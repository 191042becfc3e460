//! The published allocation tables and the availability they imply.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::plan::{budget_from_billions, Allocation, Availability, MixPlan, Pool};
use crate::corpus::{LanguageTag, REGISTRY_SIZE};
use crate::error::{Error, Result};

const CPT_ALLOCATIONS: &str = include_str!("../../data/cpt_allocations.tsv");
const PRETRAIN_SETUP: &str = include_str!("../../data/pretrain_setup.tsv");

/// Budgets of the published tables, in billions of tokens.
pub const PUBLISHED_BUDGETS: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 3.0];

fn parse_cell(s: &str, line: usize) -> Result<Option<u64>> {
    if s == "-" {
        return Ok(None);
    }
    s.replace(',', "").parse().map(Some).map_err(|_| {
        Error::Data(format!(
            "allocation table line {line}: bad token count `{s}`"
        ))
    })
}

/// Parses allocation tables from TSV rows of
/// `budget_billions, lang, mono, en_centric, zh_centric`; "-" marks an absent
/// pool. Returns one plan per budget, in increasing budget order.
pub fn parse_allocation_tables(text: &str) -> Result<Vec<MixPlan>> {
    let mut by_budget: BTreeMap<u64, BTreeMap<LanguageTag, Allocation>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 5 {
            return Err(Error::Data(format!(
                "allocation table line {line_no}: expected 5 columns, got {}",
                cols.len()
            )));
        }
        let billions: f64 = cols[0].parse().map_err(|_| {
            Error::Data(format!(
                "allocation table line {line_no}: bad budget `{}`",
                cols[0]
            ))
        })?;
        let n = budget_from_billions(billions)?;
        let lang = LanguageTag::parse(cols[1])?;
        let mono = parse_cell(cols[2], line_no)?
            .ok_or_else(|| Error::Data(format!("allocation table line {line_no}: missing mono")))?;
        let en = parse_cell(cols[3], line_no)?;
        let zh = parse_cell(cols[4], line_no)?;
        if en.is_some() != Pool::EnCentric.exists_for(lang)
            || zh.is_some() != Pool::ZhCentric.exists_for(lang)
        {
            return Err(Error::Data(format!(
                "allocation table line {line_no}: pool layout does not fit `{lang}`"
            )));
        }
        let alloc = Allocation {
            lang,
            budget_n: n,
            mono_alloc: mono,
            en_par_alloc: en,
            zh_par_alloc: zh,
        };
        if by_budget
            .entry(n)
            .or_default()
            .insert(lang, alloc)
            .is_some()
        {
            return Err(Error::Data(format!(
                "allocation table line {line_no}: `{lang}` repeated for budget {billions}"
            )));
        }
    }
    by_budget
        .into_iter()
        .map(|(n, allocations)| {
            if allocations.len() != REGISTRY_SIZE {
                return Err(Error::Data(format!(
                    "allocation table for budget {n} covers {} languages, expected {REGISTRY_SIZE}",
                    allocations.len()
                )));
            }
            Ok(MixPlan {
                budget_n: n,
                allocations,
                training_meta: None,
            })
        })
        .collect()
}

/// The five bundled allocation tables.
pub fn published_tables() -> Vec<MixPlan> {
    parse_allocation_tables(CPT_ALLOCATIONS).expect("bundled allocation tables parse")
}

/// Bundled pretraining hyperparameters, values verbatim.
pub fn pretrain_setup() -> BTreeMap<String, String> {
    PRETRAIN_SETUP
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .filter_map(|l| l.split_once('\t'))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

/// Slack allowed between observations that should be equal: document
/// boundaries make published allocations miss their targets by a few
/// hundred to a few thousand tokens.
pub fn jitter(v: u64) -> u64 {
    (v / 1000).max(5000)
}

/// Availability inferred from allocation tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferredAvailability {
    pub availability: BTreeMap<LanguageTag, Availability>,
    /// Pools whose allocation was still growing at the largest budget; their
    /// availability is only a lower bound.
    pub unbounded: Vec<(LanguageTag, Pool)>,
    /// Pools whose allocation shrank with a larger budget beyond jitter.
    pub warnings: Vec<String>,
}

impl InferredAvailability {
    pub fn is_saturated(&self, lang: LanguageTag, pool: Pool) -> bool {
        !self.unbounded.contains(&(lang, pool))
    }
}

/// Per pool, availability is the largest allocation observed at any budget.
///
/// A pool counts as saturated when its allocation at the largest budget did
/// not grow beyond jitter over the second largest; otherwise it is flagged
/// unbounded for the tested budgets.
pub fn infer_availability(tables: &[MixPlan]) -> Result<InferredAvailability> {
    if tables.len() < 2 {
        return Err(Error::Config(
            "availability inference needs at least two tables".into(),
        ));
    }
    let mut tables: Vec<&MixPlan> = tables.iter().collect();
    tables.sort_by_key(|t| t.budget_n);
    let mut availability = BTreeMap::new();
    let mut unbounded = Vec::new();
    let mut warnings = Vec::new();
    for lang in LanguageTag::all() {
        let mut caps = [None::<u64>; 3];
        for (p, pool) in Pool::ALL.into_iter().enumerate() {
            if !pool.exists_for(lang) {
                continue;
            }
            let obs: Vec<(u64, u64)> = tables
                .iter()
                .map(|t| {
                    t.allocations
                        .get(&lang)
                        .and_then(|a| a.get(pool))
                        .map(|v| (t.budget_n, v))
                        .ok_or_else(|| {
                            Error::Data(format!(
                                "table for budget {} lacks {lang} {pool}",
                                t.budget_n
                            ))
                        })
                })
                .collect::<Result<_>>()?;
            for w in obs.windows(2) {
                let ((n0, a), (n1, b)) = (w[0], w[1]);
                if b + jitter(a) < a {
                    warnings.push(format!(
                        "{lang} {pool}: allocation drops from {a} at n={n0} to {b} at n={n1}"
                    ));
                }
            }
            let max = obs.iter().map(|&(_, v)| v).max().unwrap_or(0);
            let (last, prev) = (obs[obs.len() - 1].1, obs[obs.len() - 2].1);
            if last > prev + jitter(prev) {
                unbounded.push((lang, pool));
            }
            caps[p] = Some(max);
        }
        availability.insert(
            lang,
            Availability {
                lang,
                mono_tokens: caps[0].unwrap_or(0),
                en_par_tokens: caps[1],
                zh_par_tokens: caps[2],
            },
        );
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(InferredAvailability {
        availability,
        unbounded,
        warnings,
    })
}

/// One published cell next to its planned value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellComparison {
    pub budget_n: u64,
    pub lang: LanguageTag,
    pub pool: Pool,
    pub published: u64,
    pub planned: u64,
}

impl CellComparison {
    pub fn abs_diff(&self) -> u64 {
        self.published.abs_diff(self.planned)
    }

    pub fn rel_diff(&self) -> f64 {
        if self.published == 0 {
            if self.planned == 0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.abs_diff() as f64 / self.published as f64
        }
    }
}

/// Pairs every cell of `published` with the same cell of `planned`.
pub fn compare_plans(published: &MixPlan, planned: &MixPlan) -> Result<Vec<CellComparison>> {
    if published.budget_n != planned.budget_n {
        return Err(Error::Data(format!(
            "budgets differ: {} vs {}",
            published.budget_n, planned.budget_n
        )));
    }
    let mut out = Vec::new();
    for (lang, p) in &published.allocations {
        let q = planned
            .allocations
            .get(lang)
            .ok_or_else(|| Error::Data(format!("planned mix lacks `{lang}`")))?;
        for pool in Pool::ALL {
            if let (Some(a), Some(b)) = (p.get(pool), q.get(pool)) {
                out.push(CellComparison {
                    budget_n: published.budget_n,
                    lang: *lang,
                    pool,
                    published: a,
                    planned: b,
                });
            }
        }
    }
    Ok(out)
}
