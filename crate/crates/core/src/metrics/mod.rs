//! Native lexical metrics and adapters for external learned metrics.
//!
//! Every metric is driven through [`Scorer`], which scores a batch of
//! [`MetricRequest`]s and returns one score per request in order.

mod bleu;
mod chrf;
mod external;
mod subprocess;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DialectTag;

pub use bleu::{bleu_sentence, bleu_sentence_with, BleuConfig, BleuScore, Tokenization, BLEU_MAX_ORDER};
pub use chrf::{chrf_sentence, chrf_sentence_with, ChrfConfig};
pub use external::{parse_score_lines, score_external_file, write_score_file};
pub use subprocess::{run_line_protocol, score_subprocess, SubprocessConfig, SubprocessScorer};

/// One candidate to score, with whatever context the metric needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRequest {
    pub id: String,
    pub candidate: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language_tag: Option<DialectTag>,
}

impl MetricRequest {
    pub fn new(id: impl Into<String>, candidate: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            candidate: candidate.into(),
            reference: None,
            source: None,
            language_tag: None,
        }
    }

    pub fn with_reference(mut self, reference: impl Into<String>) -> Self {
        self.reference = Some(reference.into());
        self
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = Some(source.into());
        self
    }

    pub fn with_tag(mut self, tag: Option<DialectTag>) -> Self {
        self.language_tag = tag;
        self
    }

    /// Checks the request carries what `metric` requires.
    pub fn check(&self, metric: &MetricDescriptor) -> Result<()> {
        let fail = |message: String| Error::RequestFailed {
            request_id: self.id.clone(),
            message,
        };
        if self.candidate.trim().is_empty() {
            return Err(fail("empty candidate".into()));
        }
        if metric.needs_reference && self.reference.is_none() {
            return Err(fail(format!("metric {} needs a reference", metric.name)));
        }
        if metric.needs_source && self.source.is_none() {
            return Err(fail(format!("metric {} needs a source", metric.name)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricDescriptor {
    pub name: String,
    pub needs_reference: bool,
    pub needs_source: bool,
    pub accepts_tag: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range_hint: Option<(f64, f64)>,
}

/// Anything that can score a batch of requests.
///
/// Implementations must be safe to call from several worker threads.
pub trait Scorer: Send + Sync {
    fn descriptor(&self) -> &MetricDescriptor;

    fn score_batch(&self, requests: &[MetricRequest]) -> Result<Vec<f64>>;
}

/// Sentence-level BLEU as a [`Scorer`].
#[derive(Debug, Clone)]
pub struct BleuScorer {
    descriptor: MetricDescriptor,
    config: BleuConfig,
}

impl BleuScorer {
    pub fn new(config: BleuConfig) -> Self {
        Self {
            descriptor: MetricDescriptor {
                name: "bleu".into(),
                needs_reference: true,
                needs_source: false,
                accepts_tag: true,
                range_hint: Some((0.0, 1.0)),
            },
            config,
        }
    }
}

impl Default for BleuScorer {
    fn default() -> Self {
        Self::new(BleuConfig::default())
    }
}

impl Scorer for BleuScorer {
    fn descriptor(&self) -> &MetricDescriptor {
        &self.descriptor
    }

    fn score_batch(&self, requests: &[MetricRequest]) -> Result<Vec<f64>> {
        requests
            .par_iter()
            .map(|req| {
                req.check(&self.descriptor)?;
                let reference = req.reference.as_deref().unwrap_or_default();
                let tokenization = self.config.tokenization.resolve(req.language_tag.as_ref());
                Ok(bleu_sentence_with(&req.candidate, reference, tokenization).value)
            })
            .collect()
    }
}

/// Sentence-level chrF as a [`Scorer`].
#[derive(Debug, Clone)]
pub struct ChrfScorer {
    descriptor: MetricDescriptor,
    config: ChrfConfig,
}

impl ChrfScorer {
    pub fn new(config: ChrfConfig) -> Self {
        Self {
            descriptor: MetricDescriptor {
                name: "chrf".into(),
                needs_reference: true,
                needs_source: false,
                accepts_tag: false,
                range_hint: Some((0.0, 1.0)),
            },
            config,
        }
    }
}

impl Default for ChrfScorer {
    fn default() -> Self {
        Self::new(ChrfConfig::default())
    }
}

impl Scorer for ChrfScorer {
    fn descriptor(&self) -> &MetricDescriptor {
        &self.descriptor
    }

    fn score_batch(&self, requests: &[MetricRequest]) -> Result<Vec<f64>> {
        requests
            .par_iter()
            .map(|req| {
                req.check(&self.descriptor)?;
                let reference = req.reference.as_deref().unwrap_or_default();
                chrf_sentence_with(&req.candidate, reference, &self.config)
                    .map_err(|e| Error::RequestFailed {
                        request_id: req.id.clone(),
                        message: e.to_string(),
                    })
            })
            .collect()
    }
}

/// Named scorers; names are unique.
#[derive(Default)]
pub struct MetricRegistry {
    scorers: BTreeMap<String, Box<dyn Scorer>>,
}

impl MetricRegistry {
    /// A registry holding the native `bleu` and `chrf` metrics.
    pub fn with_native() -> Self {
        let mut reg = Self::default();
        reg.register(Box::new(BleuScorer::default())).expect("fresh registry");
        reg.register(Box::new(ChrfScorer::default())).expect("fresh registry");
        reg
    }

    pub fn register(&mut self, scorer: Box<dyn Scorer>) -> Result<()> {
        let name = scorer.descriptor().name.clone();
        if self.scorers.contains_key(&name) {
            return Err(Error::Config(format!("metric {name:?} registered twice")));
        }
        self.scorers.insert(name, scorer);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&dyn Scorer> {
        self.scorers.get(name).map(|b| b.as_ref())
    }

    /// Removes and returns the scorer registered under `name`.
    pub fn take(&mut self, name: &str) -> Option<Box<dyn Scorer>> {
        self.scorers.remove(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.scorers.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_checks_follow_descriptor() {
        let bleu = BleuScorer::default();
        let ok = MetricRequest::new("a", "x y").with_reference("x y");
        assert!(ok.check(bleu.descriptor()).is_ok());
        assert!(MetricRequest::new("a", "x y").check(bleu.descriptor()).is_err());
        assert!(MetricRequest::new("a", " ").with_reference("x").check(bleu.descriptor()).is_err());
    }

    #[test]
    fn native_scorers_batch_in_order() {
        let reqs = vec![
            MetricRequest::new("1", "abc def").with_reference("abc def"),
            MetricRequest::new("2", "xy").with_reference("ab"),
        ];
        let chrf = ChrfScorer::default().score_batch(&reqs).unwrap();
        assert_eq!(chrf, vec![1.0, 0.0]);
        let bleu = BleuScorer::default().score_batch(&reqs).unwrap();
        assert_eq!(bleu[0], 1.0);
        assert_eq!(bleu[1], 0.0);
    }

    #[test]
    fn registry_rejects_duplicate_names() {
        let mut reg = MetricRegistry::with_native();
        assert_eq!(reg.names().collect::<Vec<_>>(), vec!["bleu", "chrf"]);
        assert!(reg.register(Box::new(ChrfScorer::default())).is_err());
    }
}
