use std::collections::BTreeMap;

use serde::Serialize;

use super::binomial_one_tailed;
use crate::error::{Error, Result};
use crate::model::{Condition, ScoreRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct WinLoss {
    pub wins: u64,
    pub losses: u64,
    pub ties: u64,
}

impl WinLoss {
    /// Ties are not trials.
    pub fn trials(&self) -> u64 {
        self.wins + self.losses
    }
}

/// Per example: a win when `j` strictly outscores `k`, a tie when equal.
pub fn win_loss(records: &[ScoreRecord], j: &Condition, k: &Condition) -> Result<WinLoss> {
    let mut pairs: BTreeMap<&[u8], (Option<f64>, Option<f64>)> = BTreeMap::new();
    for r in records {
        if r.condition == *j {
            pairs.entry(r.example_id.as_bytes()).or_default().0 = Some(r.score);
        }
        if r.condition == *k {
            pairs.entry(r.example_id.as_bytes()).or_default().1 = Some(r.score);
        }
    }
    let mut out = WinLoss::default();
    for (id, pair) in pairs {
        match pair {
            (Some(a), Some(b)) if a > b => out.wins += 1,
            (Some(a), Some(b)) if a < b => out.losses += 1,
            (Some(_), Some(_)) => out.ties += 1,
            _ => {
                return Err(Error::Stats(format!(
                    "example {} lacks a {j}/{k} pair",
                    String::from_utf8_lossy(id)
                )))
            }
        }
    }
    Ok(out)
}

/// Win/loss counts with the one-tailed sign test and its Bonferroni decision.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WinLossResult {
    pub wins: u64,
    pub losses: u64,
    pub ties: u64,
    pub trials: u64,
    /// wins / trials; `None` when every pair tied.
    pub success_rate: Option<f64>,
    pub p_value: f64,
    pub family_size: usize,
    pub alpha: f64,
    pub significant_after_bonferroni: bool,
}

impl WinLossResult {
    pub fn new(counts: WinLoss, alpha: f64, family_size: usize) -> Result<Self> {
        check_alpha(alpha)?;
        if family_size == 0 {
            return Err(Error::Stats("family size must be positive".into()));
        }
        let trials = counts.trials();
        let p_value = binomial_one_tailed(counts.wins, trials)?;
        Ok(Self {
            wins: counts.wins,
            losses: counts.losses,
            ties: counts.ties,
            trials,
            success_rate: (trials > 0).then(|| counts.wins as f64 / trials as f64),
            p_value,
            family_size,
            alpha,
            significant_after_bonferroni: p_value < alpha / family_size as f64,
        })
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Stats(format!("alpha {alpha} outside (0, 1)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BonferroniDecision {
    pub test_id: String,
    pub p_value: f64,
    pub significant: bool,
    pub family_size: usize,
    pub threshold: f64,
}

/// Marks each test significant iff `p < alpha / K`. `K` defaults to the
/// number of tests supplied.
pub fn bonferroni(
    p_values: &[(String, f64)],
    alpha: f64,
    family_size: Option<usize>,
) -> Result<Vec<BonferroniDecision>> {
    check_alpha(alpha)?;
    let k = family_size.unwrap_or(p_values.len());
    if k == 0 {
        return Err(Error::Stats("family size must be positive".into()));
    }
    let threshold = alpha / k as f64;
    p_values
        .iter()
        .map(|(id, p)| {
            if !(*p > 0.0 && *p <= 1.0) {
                return Err(Error::Stats(format!("p-value {p} for {id} outside (0, 1]")));
            }
            Ok(BonferroniDecision {
                test_id: id.clone(),
                p_value: *p,
                significant: *p < threshold,
                family_size: k,
                threshold,
            })
        })
        .collect()
}
