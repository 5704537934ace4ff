use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::text::nfc;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChrfConfig {
    pub max_order: usize,
    pub beta: f64,
}

impl Default for ChrfConfig {
    fn default() -> Self {
        Self { max_order: 6, beta: 2.0 }
    }
}

/// chrF with the default parameters (orders 1..6, beta 2).
pub fn chrf_sentence(candidate: &str, reference: &str) -> Result<f64> {
    chrf_sentence_with(candidate, reference, &ChrfConfig::default())
}

/// Character n-gram F-score over whitespace-stripped text.
///
/// Precision and recall are averaged over the orders the reference is long
/// enough to contain, then combined as F-beta.
pub fn chrf_sentence_with(candidate: &str, reference: &str, config: &ChrfConfig) -> Result<f64> {
    let cand = strip(candidate);
    let refs = strip(reference);
    if cand.is_empty() && refs.is_empty() {
        return Err(Error::Metric("empty pair".into()));
    }

    let mut p_sum = 0.0;
    let mut r_sum = 0.0;
    let mut orders = 0usize;
    for n in 1..=config.max_order {
        if refs.len() < n {
            break;
        }
        let ref_counts = char_ngrams(&refs, n);
        let cand_counts = char_ngrams(&cand, n);
        let ref_total = refs.len() + 1 - n;
        let cand_total = (cand.len() + 1).saturating_sub(n);
        let matched: usize = cand_counts
            .iter()
            .map(|(g, &c)| c.min(ref_counts.get(g).copied().unwrap_or(0)))
            .sum();
        if cand_total > 0 {
            p_sum += matched as f64 / cand_total as f64;
        }
        r_sum += matched as f64 / ref_total as f64;
        orders += 1;
    }
    if orders == 0 {
        return Ok(0.0);
    }
    let p = p_sum / orders as f64;
    let r = r_sum / orders as f64;
    let b2 = config.beta * config.beta;
    let denom = b2 * p + r;
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok(((1.0 + b2) * p * r / denom).clamp(0.0, 1.0))
}

fn strip(text: &str) -> Vec<char> {
    nfc(text).chars().filter(|c| !c.is_whitespace()).collect()
}

fn char_ngrams(chars: &[char], n: usize) -> HashMap<&[char], usize> {
    let mut counts = HashMap::new();
    if chars.len() >= n {
        for w in chars.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}
