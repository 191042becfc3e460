//! Direction-group means, laid out as `A / B` cells.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Direction, LanguageTag};
use crate::error::{Error, Result};
use crate::eval::scores::{ScoreKey, ScoreMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GroupName {
    EN2XX,
    XX2EN,
    ZH2XX,
    XX2ZH,
}

impl GroupName {
    pub const ALL: [GroupName; 4] = [
        GroupName::EN2XX,
        GroupName::XX2EN,
        GroupName::ZH2XX,
        GroupName::XX2ZH,
    ];

    pub fn label(self) -> &'static str {
        match self {
            GroupName::EN2XX => "en->xx",
            GroupName::XX2EN => "xx->en",
            GroupName::ZH2XX => "zh->xx",
            GroupName::XX2ZH => "xx->zh",
        }
    }
}

impl fmt::Display for GroupName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for GroupName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        GroupName::ALL
            .into_iter()
            .find(|g| g.label() == s || format!("{g:?}") == s)
            .ok_or_else(|| Error::Config(format!("unknown direction group `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectionGroup {
    pub name: GroupName,
    pub members: Vec<Direction>,
}

impl DirectionGroup {
    pub fn new(name: GroupName, members: Vec<Direction>) -> Result<Self> {
        let g = DirectionGroup { name, members };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.members.is_empty() {
            return Err(Error::Config(format!("group {} has no members", self.name)));
        }
        let mut seen = BTreeSet::new();
        for d in &self.members {
            if !seen.insert(d) {
                return Err(Error::Config(format!(
                    "group {} lists {d} twice",
                    self.name
                )));
            }
        }
        Ok(())
    }

    /// Every direction out of (or into) the group's pivot, over the whole
    /// registry. The Chinese groups therefore include `zhs<->en`, `zht` and
    /// `yue`, as the published Chinese-centric result tables do.
    pub fn default_for(name: GroupName) -> Self {
        let (pivot, outward) = match name {
            GroupName::EN2XX => (LanguageTag::english(), true),
            GroupName::XX2EN => (LanguageTag::english(), false),
            GroupName::ZH2XX => (LanguageTag::chinese_simplified(), true),
            GroupName::XX2ZH => (LanguageTag::chinese_simplified(), false),
        };
        let members = LanguageTag::all()
            .filter(|&l| l != pivot)
            .map(|l| {
                let d = if outward {
                    Direction::new(pivot, l)
                } else {
                    Direction::new(l, pivot)
                };
                d.expect("distinct languages")
            })
            .collect();
        DirectionGroup { name, members }
    }

    pub fn defaults() -> Vec<Self> {
        GroupName::ALL.into_iter().map(Self::default_for).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateCell {
    pub system: String,
    pub group: GroupName,
    /// One mean per requested metric; `None` when any member lacks a score.
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateTable {
    pub systems: Vec<String>,
    pub groups: Vec<GroupName>,
    pub metrics: Vec<String>,
    /// Row-major: system, then group.
    pub cells: Vec<AggregateCell>,
    pub missing: Vec<ScoreKey>,
}

impl AggregateTable {
    pub fn cell(&self, system: &str, group: GroupName) -> Option<&AggregateCell> {
        self.cells
            .iter()
            .find(|c| c.system == system && c.group == group)
    }

    pub fn is_complete(&self) -> bool {
        self.missing.is_empty()
    }

    pub fn render_text(&self) -> String {
        let fmt_cell = |c: &AggregateCell| {
            c.values
                .iter()
                .map(|v| v.map_or("-".to_string(), |v| format!("{v:.2}")))
                .collect::<Vec<_>>()
                .join(" / ")
        };
        let mut rows: Vec<Vec<String>> = Vec::new();
        let mut header = vec!["System".to_string()];
        header.extend(self.groups.iter().map(|g| g.to_string()));
        rows.push(header);
        for s in &self.systems {
            let mut row = vec![s.clone()];
            for &g in &self.groups {
                row.push(self.cell(s, g).map_or("-".into(), fmt_cell));
            }
            rows.push(row);
        }
        let ncol = rows[0].len();
        let widths: Vec<usize> = (0..ncol)
            .map(|i| rows.iter().map(|r| r[i].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = format!("metrics: {}\n", self.metrics.join(" / "));
        for r in &rows {
            let line: Vec<String> = r
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    if i == 0 {
                        format!("{c:<w$}", w = widths[i])
                    } else {
                        format!("{c:>w$}", w = widths[i])
                    }
                })
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}

/// Unweighted mean over each group's members, per system and metric.
/// Missing scores blank the affected cell and are listed in `missing`.
pub fn aggregate(
    matrix: &ScoreMatrix,
    groups: &[DirectionGroup],
    systems: &[String],
    metrics: &[String],
) -> Result<AggregateTable> {
    if metrics.is_empty() {
        return Err(Error::Config("no metrics requested".into()));
    }
    for g in groups {
        g.validate()?;
    }
    let mut cells = Vec::new();
    let mut missing = Vec::new();
    for system in systems {
        for g in groups {
            let mut values = Vec::with_capacity(metrics.len());
            for metric in metrics {
                let mut sum = 0.0;
                let mut complete = true;
                for &d in &g.members {
                    match matrix.get(system, d, metric) {
                        Some(v) => sum += v,
                        None => {
                            complete = false;
                            missing.push(ScoreKey {
                                system: system.clone(),
                                direction: d,
                                metric: metric.clone(),
                            });
                        }
                    }
                }
                values.push(complete.then(|| sum / g.members.len() as f64));
            }
            cells.push(AggregateCell {
                system: system.clone(),
                group: g.name,
                values,
            });
        }
    }
    missing.sort();
    missing.dedup();
    if !missing.is_empty() {
        log::warn!(
            "{} scores missing; affected cells left blank",
            missing.len()
        );
    }
    Ok(AggregateTable {
        systems: systems.to_vec(),
        groups: groups.iter().map(|g| g.name).collect(),
        metrics: metrics.to_vec(),
        cells,
        missing,
    })
}
