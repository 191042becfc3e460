//! Externally computed scores: ingestion, conflict checks and the
//! low-quality exclusion of benchmark records.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::corpus::Direction;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ScoreKey {
    pub system: String,
    pub direction: Direction,
    pub metric: String,
}

/// One row of a JSONL score file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub system: String,
    pub direction: Direction,
    pub metric: String,
    pub value: f64,
}

/// At most one value per (system, direction, metric).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreMatrix {
    entries: BTreeMap<ScoreKey, f64>,
}

impl ScoreMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a value; re-adding an equal value is a no-op, a different one an
    /// error.
    pub fn insert(
        &mut self,
        system: &str,
        direction: Direction,
        metric: &str,
        value: f64,
    ) -> Result<()> {
        let key = ScoreKey {
            system: system.to_string(),
            direction,
            metric: metric.to_string(),
        };
        match self.entries.get(&key) {
            Some(&old) if old != value => Err(Error::ScoreConflict {
                key: format!("{system} {direction} {metric}"),
                first: old,
                second: value,
            }),
            Some(_) => Ok(()),
            None => {
                self.entries.insert(key, value);
                Ok(())
            }
        }
    }

    pub fn get(&self, system: &str, direction: Direction, metric: &str) -> Option<f64> {
        self.entries
            .get(&ScoreKey {
                system: system.to_string(),
                direction,
                metric: metric.to_string(),
            })
            .copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn merge(&mut self, other: ScoreMatrix) -> Result<()> {
        for (k, v) in other.entries {
            self.insert(&k.system, k.direction, &k.metric, v)?;
        }
        Ok(())
    }

    pub fn systems(&self) -> Vec<String> {
        let mut s: Vec<String> = self.entries.keys().map(|k| k.system.clone()).collect();
        s.sort();
        s.dedup();
        s
    }

    pub fn rows(&self) -> impl Iterator<Item = ScoreRow> + '_ {
        self.entries.iter().map(|(k, &value)| ScoreRow {
            system: k.system.clone(),
            direction: k.direction,
            metric: k.metric.clone(),
            value,
        })
    }
}

impl Serialize for ScoreMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.rows())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreFormat {
    Jsonl,
    /// Transcribed result table: a `#metrics=a,b` line, a
    /// `direction,System1,...` header, then rows of `src->tgt,A / B,...`.
    Csv,
}

impl ScoreFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => ScoreFormat::Csv,
            _ => ScoreFormat::Jsonl,
        }
    }
}

fn read_jsonl<R: BufRead>(reader: R, source: &str, m: &mut ScoreMatrix) -> Result<()> {
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row: ScoreRow = serde_json::from_str(&line)
            .map_err(|e| Error::Data(format!("{source} line {}: {e}", i + 1)))?;
        m.insert(&row.system, row.direction, &row.metric, row.value)?;
    }
    Ok(())
}

fn read_csv<R: BufRead>(reader: R, source: &str, m: &mut ScoreMatrix) -> Result<()> {
    let bad = |line: usize, msg: String| Error::Data(format!("{source} line {line}: {msg}"));
    let mut metrics: Option<Vec<String>> = None;
    let mut systems: Option<Vec<String>> = None;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(source, e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(list) = line.strip_prefix("#metrics=") {
            metrics = Some(list.split(',').map(|s| s.trim().to_string()).collect());
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let Some(systems) = &systems else {
            if cols[0] != "direction" {
                return Err(bad(line_no, "expected a `direction,...` header".into()));
            }
            systems = Some(cols[1..].iter().map(|s| s.to_string()).collect());
            continue;
        };
        let metrics = metrics
            .as_ref()
            .ok_or_else(|| bad(line_no, "no `#metrics=` line before data".into()))?;
        if cols.len() != systems.len() + 1 {
            return Err(bad(
                line_no,
                format!("expected {} columns, got {}", systems.len() + 1, cols.len()),
            ));
        }
        let direction: Direction = cols[0].parse().map_err(|e| bad(line_no, format!("{e}")))?;
        for (system, cell) in systems.iter().zip(&cols[1..]) {
            if *cell == "-" || cell.is_empty() {
                continue;
            }
            let values: Vec<&str> = cell.split('/').map(str::trim).collect();
            if values.len() != metrics.len() {
                return Err(bad(
                    line_no,
                    format!("cell `{cell}` does not have {} values", metrics.len()),
                ));
            }
            for (metric, v) in metrics.iter().zip(values) {
                let v: f64 = v
                    .parse()
                    .map_err(|_| bad(line_no, format!("bad number `{v}`")))?;
                m.insert(system, direction, metric, v)?;
            }
        }
    }
    Ok(())
}

pub fn ingest_reader<R: BufRead>(
    reader: R,
    format: ScoreFormat,
    source: &str,
) -> Result<ScoreMatrix> {
    let mut m = ScoreMatrix::new();
    match format {
        ScoreFormat::Jsonl => read_jsonl(reader, source, &mut m)?,
        ScoreFormat::Csv => read_csv(reader, source, &mut m)?,
    }
    Ok(m)
}

/// Merges score files; the format follows the extension (`.csv` or JSONL).
pub fn ingest_scores(files: &[impl AsRef<Path>]) -> Result<ScoreMatrix> {
    let mut m = ScoreMatrix::new();
    for path in files {
        let path = path.as_ref();
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        let part = ingest_reader(
            BufReader::new(f),
            ScoreFormat::from_path(path),
            &path.display().to_string(),
        )?;
        m.merge(part)?;
    }
    Ok(m)
}

/// What to do with a record that carries no quality flag.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MissingFlag {
    #[default]
    Keep,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WmtFilterConfig {
    pub flag_field: String,
    pub missing: MissingFlag,
}

impl Default for WmtFilterConfig {
    fn default() -> Self {
        WmtFilterConfig {
            flag_field: "low_quality".into(),
            missing: MissingFlag::Keep,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WmtFilterReport {
    pub total: u64,
    pub kept: u64,
    pub dropped: u64,
    pub missing_flag: u64,
}

/// Drops records flagged low quality.
pub fn wmt_ingest(
    records: impl IntoIterator<Item = Value>,
    cfg: &WmtFilterConfig,
) -> Result<(Vec<Value>, WmtFilterReport)> {
    let mut kept = Vec::new();
    let mut report = WmtFilterReport::default();
    for (i, r) in records.into_iter().enumerate() {
        report.total += 1;
        let flagged = match r.get(&cfg.flag_field) {
            Some(Value::Bool(b)) => *b,
            None | Some(Value::Null) => {
                report.missing_flag += 1;
                if cfg.missing == MissingFlag::Error {
                    return Err(Error::Data(format!(
                        "record {} has no `{}` flag",
                        i + 1,
                        cfg.flag_field
                    )));
                }
                false
            }
            Some(other) => {
                return Err(Error::Data(format!(
                    "record {}: `{}` must be a boolean, got {other}",
                    i + 1,
                    cfg.flag_field
                )))
            }
        };
        if flagged {
            report.dropped += 1;
        } else {
            kept.push(r);
        }
    }
    report.kept = kept.len() as u64;
    if report.total > 0 && kept.is_empty() {
        log::warn!(
            "every one of {} records is flagged low quality",
            report.total
        );
    }
    Ok((kept, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn d(s: &str) -> Direction {
        s.parse().unwrap()
    }

    #[test]
    fn one_jsonl_row() {
        let line = r#"{"system":"G3-12B","direction":"en->de","metric":"xcomet","value":93.09}"#;
        let m = ingest_reader(line.as_bytes(), ScoreFormat::Jsonl, "t").unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.get("G3-12B", d("en->de"), "xcomet"), Some(93.09));
    }

    #[test]
    fn conflicts_are_errors_repeats_are_not() {
        let mut m = ScoreMatrix::new();
        m.insert("s", d("en->de"), "comet", 80.0).unwrap();
        m.insert("s", d("en->de"), "comet", 80.0).unwrap();
        let err = m.insert("s", d("en->de"), "comet", 81.0).unwrap_err();
        assert!(
            matches!(err, Error::ScoreConflict { first, second, .. } if first == 80.0 && second == 81.0)
        );
    }

    #[test]
    fn empty_file_is_empty_matrix() {
        assert!(ingest_reader("".as_bytes(), ScoreFormat::Jsonl, "t")
            .unwrap()
            .is_empty());
        assert!(ingest_reader("".as_bytes(), ScoreFormat::Csv, "t")
            .unwrap()
            .is_empty());
    }

    #[test]
    fn transcription_csv() {
        let text = "#metrics=spbleu,comet\ndirection,A,B\nen->ar,20.54 / 79.12,35.6 / 86\nen->de,-,1 / 2\n";
        let m = ingest_reader(text.as_bytes(), ScoreFormat::Csv, "t").unwrap();
        assert_eq!(m.len(), 6);
        assert_eq!(m.get("B", d("en->ar"), "comet"), Some(86.0));
        assert_eq!(m.get("A", d("en->de"), "spbleu"), None);
        assert_eq!(m.systems(), vec!["A", "B"]);
        assert!(ingest_reader(
            "direction,A\nen->ar,1 / 2\n".as_bytes(),
            ScoreFormat::Csv,
            "t"
        )
        .is_err());
        assert!(ingest_reader(
            "#metrics=a\ndirection,A\nen->ar,1 / 2\n".as_bytes(),
            ScoreFormat::Csv,
            "t"
        )
        .is_err());
    }

    #[test]
    fn low_quality_exclusion() {
        let recs = vec![
            json!({"id": 1, "low_quality": false}),
            json!({"id": 2, "low_quality": true}),
            json!({"id": 3, "low_quality": false}),
        ];
        let (kept, r) = wmt_ingest(recs.clone(), &WmtFilterConfig::default()).unwrap();
        assert_eq!(kept.len(), 2);
        assert_eq!(r.dropped, 1);

        let clean: Vec<Value> = vec![json!({"id": 1}), json!({"id": 2, "low_quality": false})];
        let (kept, r) = wmt_ingest(clean.clone(), &WmtFilterConfig::default()).unwrap();
        assert_eq!(kept, clean);
        assert_eq!(r.missing_flag, 1);
        let strict = WmtFilterConfig {
            missing: MissingFlag::Error,
            ..Default::default()
        };
        assert!(wmt_ingest(clean, &strict).is_err());

        let all = vec![json!({"low_quality": true})];
        let (kept, r) = wmt_ingest(all, &WmtFilterConfig::default()).unwrap();
        assert!(kept.is_empty());
        assert_eq!(r.dropped, 1);
    }
}
