use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DialectTag;

static DEFAULT_UNIVERSE: &str = include_str!("../../data/tag_universe.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TagKind {
    Dialect,
    Language,
}

impl TagKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TagKind::Dialect => "dialect",
            TagKind::Language => "language",
        }
    }
}

impl fmt::Display for TagKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn target(self) -> &'static str {
        match self {
            Polarity::Positive => "1",
            Polarity::Negative => "0",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampledTag {
    pub tag: DialectTag,
    pub kind: TagKind,
    pub polarity: Polarity,
}

impl SampledTag {
    /// Polarity recomputed from the tag alone.
    pub fn implied_polarity(tag: &DialectTag, gold: &DialectTag) -> Polarity {
        if tag == gold || *tag == gold.to_language_any() {
            Polarity::Positive
        } else {
            Polarity::Negative
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    /// Dialect tags are chosen with probability `lambda / (1 + lambda)`.
    pub lambda: f64,
    /// Positives are drawn with probability `r / (1 + r)`.
    pub pos_neg_ratio: f64,
    pub tag_universe: Vec<DialectTag>,
    pub seed: u64,
    /// Relative weights for negatives; tags not listed weigh 1.
    pub negative_weights: Option<HashMap<DialectTag, f64>>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            pos_neg_ratio: 1.0,
            tag_universe: default_tag_universe(),
            seed: 0,
            negative_weights: None,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::Config(format!("lambda must be finite and >= 0, got {}", self.lambda)));
        }
        if !(self.pos_neg_ratio.is_finite() && self.pos_neg_ratio > 0.0) {
            return Err(Error::Config(format!("pos:neg ratio must be finite and > 0, got {}", self.pos_neg_ratio)));
        }
        if self.tag_universe.is_empty() {
            return Err(Error::Config("tag universe is empty".into()));
        }
        if let Some(w) = &self.negative_weights {
            if let Some((t, v)) = w.iter().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
                return Err(Error::Config(format!("bad negative weight {v} for {t}")));
            }
        }
        Ok(())
    }

    pub fn dialect_probability(&self) -> f64 {
        self.lambda / (1.0 + self.lambda)
    }

    pub fn positive_probability(&self) -> f64 {
        self.pos_neg_ratio / (1.0 + self.pos_neg_ratio)
    }
}

/// The bundled default inventory of 95 dialect tags across 10 languages.
pub fn default_tag_universe() -> Vec<DialectTag> {
    parse_tag_list(DEFAULT_UNIVERSE).expect("bundled tag universe parses")
}

pub fn load_tag_universe(path: &Path) -> Result<Vec<DialectTag>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let tags = parse_tag_list(&text)?;
    if tags.is_empty() {
        return Err(Error::Config(format!("{}: tag universe is empty", path.display())));
    }
    Ok(tags)
}

fn parse_tag_list(text: &str) -> Result<Vec<DialectTag>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let tag: DialectTag = line.parse()?;
        if seen.insert(tag.clone()) {
            out.push(tag);
        }
    }
    Ok(out)
}

/// Negative pools derived once from a [`SamplerConfig`].
#[derive(Debug, Clone)]
pub struct TagSampler {
    config: SamplerConfig,
    dialects: Vec<DialectTag>,
    dialect_weights: Vec<f64>,
    languages: Vec<DialectTag>,
    language_weights: Vec<f64>,
}

impl TagSampler {
    pub fn new(config: SamplerConfig) -> Result<Self> {
        config.validate()?;
        let weight = |t: &DialectTag| {
            config
                .negative_weights
                .as_ref()
                .and_then(|w| w.get(t).copied())
                .unwrap_or(1.0)
        };
        let dialects: Vec<DialectTag> = config.tag_universe.iter().filter(|t| t.is_dialect()).cloned().collect();
        let languages: Vec<DialectTag> = config
            .tag_universe
            .iter()
            .map(DialectTag::to_language_any)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        Ok(Self {
            dialect_weights: dialects.iter().map(weight).collect(),
            language_weights: languages.iter().map(weight).collect(),
            dialects,
            languages,
            config,
        })
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.config
    }

    pub fn sample<R: Rng + ?Sized>(&self, gold: &DialectTag, rng: &mut R) -> Result<SampledTag> {
        let positive = rng.gen_bool(self.config.positive_probability());
        let kind = if rng.gen_bool(self.config.dialect_probability()) {
            TagKind::Dialect
        } else {
            TagKind::Language
        };
        if positive {
            let tag = match kind {
                TagKind::Dialect => gold.clone(),
                TagKind::Language => gold.to_language_any(),
            };
            return Ok(SampledTag { tag, kind, polarity: Polarity::Positive });
        }
        let tag = match kind {
            TagKind::Dialect => draw(&self.dialects, &self.dialect_weights, |t| t != gold, rng),
            TagKind::Language => draw(&self.languages, &self.language_weights, |t| !t.same_language(gold), rng),
        }
        .ok_or_else(|| Error::Sampling(format!("no admissible {kind} negative for {gold} in the tag universe")))?;
        Ok(SampledTag { tag, kind, polarity: Polarity::Negative })
    }
}

/// Weighted draw restricted to admissible tags.
fn draw<R: Rng + ?Sized>(
    pool: &[DialectTag],
    weights: &[f64],
    admissible: impl Fn(&DialectTag) -> bool,
    rng: &mut R,
) -> Option<DialectTag> {
    let masked: Vec<f64> = pool
        .iter()
        .zip(weights)
        .map(|(t, w)| if admissible(t) { *w } else { 0.0 })
        .collect();
    let dist = WeightedIndex::new(&masked).ok()?;
    Some(pool[dist.sample(rng)].clone())
}

/// One-shot convenience over [`TagSampler`].
pub fn sample_tag<R: Rng + ?Sized>(gold: &DialectTag, config: &SamplerConfig, rng: &mut R) -> Result<SampledTag> {
    TagSampler::new(config.clone())?.sample(gold, rng)
}
