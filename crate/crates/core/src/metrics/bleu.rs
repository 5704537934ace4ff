use std::collections::HashMap;

use crate::model::DialectTag;
use crate::text::nfc;

pub const BLEU_MAX_ORDER: usize = 4;

/// How BLEU splits text into tokens.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tokenization {
    /// Unicode whitespace.
    Whitespace,
    /// One token per non-whitespace code point.
    Codepoint,
    /// Codepoints for Mandarin (`zh*` tags), whitespace otherwise.
    Auto,
}

impl Tokenization {
    pub fn resolve(self, tag: Option<&DialectTag>) -> Tokenization {
        match self {
            Tokenization::Auto => match tag {
                Some(t) if t.primary_language() == "zh" => Tokenization::Codepoint,
                _ => Tokenization::Whitespace,
            },
            other => other,
        }
    }

    fn tokens(self, text: &str) -> Vec<String> {
        match self {
            Tokenization::Codepoint => text
                .chars()
                .filter(|c| !c.is_whitespace())
                .map(String::from)
                .collect(),
            _ => text.split_whitespace().map(str::to_owned).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BleuConfig {
    pub tokenization: Tokenization,
}

impl Default for BleuConfig {
    fn default() -> Self {
        Self { tokenization: Tokenization::Auto }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BleuScore {
    pub value: f64,
    /// Set when either side had no tokens; `value` is then 0.
    pub empty_input: bool,
}

/// Sentence BLEU with whitespace tokenization.
pub fn bleu_sentence(candidate: &str, reference: &str) -> BleuScore {
    bleu_sentence_with(candidate, reference, Tokenization::Whitespace)
}

/// Sentence BLEU: geometric mean of clipped n-gram precisions (n = 1..4),
/// add-one smoothed for n >= 2, times the brevity penalty.
pub fn bleu_sentence_with(candidate: &str, reference: &str, tokenization: Tokenization) -> BleuScore {
    let tokenization = match tokenization {
        Tokenization::Auto => Tokenization::Whitespace,
        t => t,
    };
    let cand = tokenization.tokens(&nfc(candidate));
    let refs = tokenization.tokens(&nfc(reference));
    if cand.is_empty() || refs.is_empty() {
        return BleuScore { value: 0.0, empty_input: true };
    }

    let mut log_sum = 0.0;
    for n in 1..=BLEU_MAX_ORDER {
        let cand_counts = ngram_counts(&cand, n);
        let ref_counts = ngram_counts(&refs, n);
        let total: usize = cand_counts.values().sum();
        let matched: usize = cand_counts
            .iter()
            .map(|(g, &c)| c.min(ref_counts.get(g).copied().unwrap_or(0)))
            .sum();
        let precision = if n == 1 {
            matched as f64 / total as f64
        } else {
            (matched as f64 + 1.0) / (total as f64 + 1.0)
        };
        if precision == 0.0 {
            return BleuScore { value: 0.0, empty_input: false };
        }
        log_sum += precision.ln();
    }

    let c = cand.len() as f64;
    let r = refs.len() as f64;
    let bp = if c >= r { 1.0 } else { (1.0 - r / c).exp() };
    let value = (bp * (log_sum / BLEU_MAX_ORDER as f64).exp()).clamp(0.0, 1.0);
    BleuScore { value, empty_input: false }
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}
