use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::read_jsonl_file;
use crate::error::{Error, Result};

/// One human relative-ranking judgement: `better` was preferred over `worse`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HumanPair {
    pub better: String,
    pub worse: String,
}

pub fn load_human_pairs(path: &Path) -> Result<Vec<HumanPair>> {
    read_jsonl_file(path)
}

/// DaRR agreement `(Conc - Disc) / (Conc + Disc)`.
///
/// A pair is concordant when the metric scores the preferred segment strictly
/// higher. Metric ties count as discordant.
pub fn darr(metric_scores: &HashMap<String, f64>, human_pairs: &[HumanPair]) -> Result<f64> {
    if human_pairs.is_empty() {
        return Err(Error::Stats("DaRR needs at least one human pair".into()));
    }
    let score = |id: &str| {
        metric_scores
            .get(id)
            .copied()
            .ok_or_else(|| Error::Stats(format!("no metric score for segment {id:?}")))
    };
    let mut concordant = 0u64;
    let mut discordant = 0u64;
    for pair in human_pairs {
        if score(&pair.better)? > score(&pair.worse)? {
            concordant += 1;
        } else {
            discordant += 1;
        }
    }
    Ok((concordant as f64 - discordant as f64) / (concordant + discordant) as f64)
}
