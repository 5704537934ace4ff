//! Tab-separated score files: `metric<TAB>example_id<TAB>condition<TAB>score`.

use std::path::Path;

use crate::dataset::check_unique;
use crate::error::{Error, Result};
use crate::model::{Condition, ScoreRecord};

/// Reads scores produced by an external metric. Every row must name
/// `registry_name` as its metric.
pub fn score_external_file(path: &Path, registry_name: &str) -> Result<Vec<ScoreRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_score_lines(&text, path, registry_name)
}

pub fn parse_score_lines(text: &str, origin: &Path, registry_name: &str) -> Result<Vec<ScoreRecord>> {
    let mut records = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fail = |message: String| Error::Parse {
            path: origin.to_owned(),
            line: idx + 1,
            message,
        };
        let cols: Vec<&str> = line.split('\t').collect();
        let [metric, example_id, condition, score] = cols.as_slice() else {
            return Err(fail(format!("expected 4 tab-separated columns, found {}", cols.len())));
        };
        if *metric != registry_name {
            return Err(fail(format!("row names metric {metric:?}, expected {registry_name:?}")));
        }
        if example_id.is_empty() {
            return Err(fail("empty example id".into()));
        }
        let condition: Condition = condition.parse().map_err(|e: Error| fail(e.to_string()))?;
        let score: f64 = score
            .trim()
            .parse()
            .map_err(|_| fail(format!("non-numeric score {score:?}")))?;
        if !score.is_finite() {
            return Err(fail(format!("non-finite score {score}")));
        }
        records.push(ScoreRecord::new(metric, example_id, condition, score)?);
    }
    check_unique(&records)?;
    Ok(records)
}

/// Writes records in the same 4-column layout.
pub fn write_score_file(path: &Path, records: &[ScoreRecord]) -> Result<()> {
    let mut out = String::new();
    for r in records {
        out.push_str(&format!("{}\t{}\t{}\t{}\n", r.metric, r.example_id, r.condition, r.score));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
