use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ConditionKind, DialectTag, ScoreRecord};

/// A score for a candidate written in one dialect, computed with some input tag.
#[derive(Debug, Clone, PartialEq)]
pub struct AwarenessRecord {
    pub candidate_dialect: DialectTag,
    pub input_tag: DialectTag,
    pub score: f64,
}

impl AwarenessRecord {
    /// Reads the `dialect:<candidate>@<input_tag>` condition spelling.
    pub fn from_score_record(r: &ScoreRecord) -> Result<Self> {
        let bad = || Error::InvalidCondition(r.condition.to_string());
        if r.condition.kind() != ConditionKind::Dialect {
            return Err(bad());
        }
        let (cand, input) = r.condition.detail().and_then(|d| d.split_once('@')).ok_or_else(bad)?;
        Ok(Self {
            candidate_dialect: cand.parse()?,
            input_tag: input.parse()?,
            score: r.score,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AwarenessRow {
    pub candidate_dialect: DialectTag,
    pub scores_by_input_tag: BTreeMap<DialectTag, f64>,
    /// Matched-tag mean strictly above every mismatched-tag mean.
    pub aware: bool,
}

/// Mean score per (candidate dialect, input tag), and whether the matching
/// tag wins for each candidate dialect.
pub fn awareness_eval(records: &[AwarenessRecord]) -> Result<Vec<AwarenessRow>> {
    let mut groups: BTreeMap<&DialectTag, BTreeMap<&DialectTag, Vec<f64>>> = BTreeMap::new();
    for r in records {
        groups
            .entry(&r.candidate_dialect)
            .or_default()
            .entry(&r.input_tag)
            .or_default()
            .push(r.score);
    }
    groups
        .into_iter()
        .map(|(cand, by_tag)| {
            let means: BTreeMap<DialectTag, f64> = by_tag
                .into_iter()
                .map(|(tag, mut scores)| {
                    // sorted so the mean does not depend on record order
                    scores.sort_by(f64::total_cmp);
                    (tag.clone(), scores.iter().sum::<f64>() / scores.len() as f64)
                })
                .collect();
            let matched = *means
                .get(cand)
                .ok_or_else(|| Error::Stats(format!("no scores for {cand} with its own tag")))?;
            let mut mismatched = means.iter().filter(|(t, _)| *t != cand).peekable();
            if mismatched.peek().is_none() {
                return Err(Error::Stats(format!(
                    "no mismatched input tag for {cand}; nothing to compare"
                )));
            }
            let aware = mismatched.all(|(_, m)| matched > *m);
            Ok(AwarenessRow {
                candidate_dialect: cand.clone(),
                scores_by_input_tag: means,
                aware,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Condition;

    fn rec(cand: &str, input: &str, score: f64) -> AwarenessRecord {
        AwarenessRecord {
            candidate_dialect: cand.parse().unwrap(),
            input_tag: input.parse().unwrap(),
            score,
        }
    }

    #[test]
    fn matched_tag_higher_is_aware() {
        let rows = awareness_eval(&[rec("zh-TW", "zh-TW", 0.71), rec("zh-TW", "zh-CN", 0.68)]).unwrap();
        assert!(rows[0].aware);
    }

    #[test]
    fn matched_tag_lower_is_not_aware() {
        let rows = awareness_eval(&[rec("zh-TW", "zh-TW", 0.75), rec("zh-TW", "zh-CN", 0.78)]).unwrap();
        assert!(!rows[0].aware);
    }

    #[test]
    fn tie_is_not_aware() {
        let rows = awareness_eval(&[rec("zh-TW", "zh-TW", 0.70), rec("zh-TW", "zh-CN", 0.70)]).unwrap();
        assert!(!rows[0].aware);
    }

    #[test]
    fn only_matched_tag_errors() {
        assert!(awareness_eval(&[rec("zh-TW", "zh-TW", 0.7)]).is_err());
        assert!(awareness_eval(&[rec("zh-TW", "zh-CN", 0.7)]).is_err());
    }

    #[test]
    fn parses_condition_spelling() {
        let r = ScoreRecord::new("m", "e", "dialect:zh-TW@zh-CN".parse::<Condition>().unwrap(), 0.5).unwrap();
        let a = AwarenessRecord::from_score_record(&r).unwrap();
        assert_eq!(a.candidate_dialect.to_string(), "zh-TW");
        assert_eq!(a.input_tag.to_string(), "zh-CN");
        let plain = ScoreRecord::new("m", "e", Condition::dialect(), 0.5).unwrap();
        assert!(AwarenessRecord::from_score_record(&plain).is_err());
    }
}
