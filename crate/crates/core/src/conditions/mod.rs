//! Builds the dialect / perturb / MT score conditions for each dataset mode.
//!
//! Sentence-mode orientation: the candidate is always the non-reference
//! dialect `j`; the reference is dialect `k`, the MT output, or the perturbed
//! MT output. Examples that lack a required text are dropped with a reason,
//! never scored partially.

mod perturb;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{MetricDescriptor, MetricRequest, Scorer};
use crate::model::{canonical_sort, Condition, DialectTag, MicroExample, ScoreRecord, SentenceExample};

pub use perturb::{
    perturb_builtin, select_from, select_perturbation, InsertAnchor, InsertRule, PerturbLexicon,
    PerturbationChoice,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanMode {
    Micro,
    Sentence,
    Qe,
    QeWithRef,
}

impl fmt::Display for PlanMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlanMode::Micro => "micro",
            PlanMode::Sentence => "sentence",
            PlanMode::Qe => "qe",
            PlanMode::QeWithRef => "qe_with_ref",
        })
    }
}

/// How one metric is applied to one dataset.
#[derive(Debug, Clone)]
pub struct ConditionPlan {
    pub mode: PlanMode,
    pub metric: MetricDescriptor,
    /// Dialect `k` used as the reference (sentence and QE-with-reference modes).
    pub reference_dialect: Option<DialectTag>,
    /// Locale the MT system targets.
    pub mt_locale: Option<DialectTag>,
    /// Tag passed through to metrics on every request.
    pub language_tag: Option<DialectTag>,
}

impl ConditionPlan {
    pub fn new(mode: PlanMode, metric: MetricDescriptor) -> Result<Self> {
        match mode {
            PlanMode::Qe | PlanMode::QeWithRef if !metric.needs_source => {
                return Err(Error::Config(format!(
                    "metric {} does not take a source and cannot run in {mode} mode",
                    metric.name
                )))
            }
            PlanMode::Micro | PlanMode::Sentence if !metric.needs_reference => {
                return Err(Error::Config(format!(
                    "metric {} does not take a reference and cannot run in {mode} mode",
                    metric.name
                )))
            }
            _ => {}
        }
        Ok(Self {
            mode,
            metric,
            reference_dialect: None,
            mt_locale: None,
            language_tag: None,
        })
    }

    pub fn with_reference_dialect(mut self, tag: DialectTag) -> Self {
        self.reference_dialect = Some(tag);
        self
    }

    pub fn with_mt_locale(mut self, tag: DialectTag) -> Self {
        self.mt_locale = Some(tag);
        self
    }

    pub fn with_language_tag(mut self, tag: DialectTag) -> Self {
        self.language_tag = Some(tag);
        self
    }

    fn expect_mode(&self, allowed: &[PlanMode]) -> Result<()> {
        if allowed.contains(&self.mode) {
            Ok(())
        } else {
            Err(Error::Config(format!("plan mode {} not valid here", self.mode)))
        }
    }

    fn reference(&self) -> Result<&DialectTag> {
        self.reference_dialect
            .as_ref()
            .ok_or_else(|| Error::Config(format!("{} mode needs a reference dialect", self.mode)))
    }
}

/// An example left out of the analysis, with the reason.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroppedExample {
    pub id: String,
    pub reason: String,
}

impl DroppedExample {
    fn new(id: &str, reason: &str) -> Self {
        Self { id: id.to_owned(), reason: reason.to_owned() }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ConditionScores {
    pub records: Vec<ScoreRecord>,
    pub dropped: Vec<DroppedExample>,
    /// Perturbation kept per example (micro mode only).
    pub choices: Vec<PerturbationChoice>,
}

/// Request id for one (example, condition) cell: `<example_id>|<condition>`.
pub fn request_id(example_id: &str, condition: &Condition) -> String {
    format!("{example_id}|{condition}")
}

/// Inverse of [`request_id`]. Splits at the last `|`.
pub fn split_request_id(id: &str) -> Result<(&str, Condition)> {
    let (example, cond) = id
        .rsplit_once('|')
        .ok_or_else(|| Error::Subprocess(format!("request id {id:?} lacks a condition")))?;
    Ok((example, cond.parse()?))
}

/// Derived id for the `k`-th (1-based) of several rewrites of one base.
pub fn rewrite_id(base_id: &str, k: usize, total: usize) -> String {
    if total == 1 {
        base_id.to_owned()
    } else {
        format!("{base_id}#{k}")
    }
}

struct Cell {
    example_id: String,
    condition: Condition,
    request: MetricRequest,
}

impl Cell {
    fn new(example_id: &str, condition: Condition, candidate: &str) -> Self {
        let request = MetricRequest::new(request_id(example_id, &condition), candidate);
        Self { example_id: example_id.to_owned(), condition, request }
    }

    fn reference(mut self, text: &str) -> Self {
        self.request.reference = Some(text.to_owned());
        self
    }

    fn source(mut self, text: &str) -> Self {
        self.request.source = Some(text.to_owned());
        self
    }
}

fn score_cells(cells: Vec<Cell>, scorer: &dyn Scorer, tag: Option<&DialectTag>) -> Result<Vec<ScoreRecord>> {
    let requests: Vec<MetricRequest> = cells
        .iter()
        .map(|c| c.request.clone().with_tag(tag.cloned()))
        .collect();
    let scores = scorer.score_batch(&requests).map_err(|e| match e {
        Error::RequestFailed { request_id, message } => {
            let example_id = request_id
                .rsplit_once('|')
                .map_or(request_id.clone(), |(ex, _)| ex.to_owned());
            Error::MetricOnExample { example_id, message }
        }
        other => other,
    })?;
    if scores.len() != cells.len() {
        return Err(Error::Metric(format!(
            "metric {} returned {} scores for {} requests",
            scorer.descriptor().name,
            scores.len(),
            cells.len()
        )));
    }
    let name = &scorer.descriptor().name;
    let mut records = cells
        .into_iter()
        .zip(scores)
        .map(|(cell, score)| {
            ScoreRecord::new(name, &cell.example_id, cell.condition, score).map_err(|e| {
                Error::MetricOnExample { example_id: cell.example_id.clone(), message: e.to_string() }
            })
        })
        .collect::<Result<Vec<_>>>()?;
    canonical_sort(&mut records);
    Ok(records)
}

/// Dialect and perturb scores against the base sentence.
///
/// Each rewrite of a base becomes its own data point; examples without any
/// perturbation are dropped.
pub fn micro_condition_scores(
    examples: &[MicroExample],
    scorer: &dyn Scorer,
    language_tag: Option<&DialectTag>,
) -> Result<ConditionScores> {
    let mut out = ConditionScores::default();
    let mut cells = Vec::new();
    for ex in examples {
        let Some(choice) = select_perturbation(ex) else {
            out.dropped.push(DroppedExample::new(&ex.id, "no_perturbation"));
            continue;
        };
        let total = ex.dialect_rewrites.len();
        for (k, rewrite) in ex.dialect_rewrites.iter().enumerate() {
            let id = rewrite_id(&ex.id, k + 1, total);
            cells.push(Cell::new(&id, Condition::dialect(), &rewrite.text).reference(&ex.base));
            cells.push(Cell::new(&id, Condition::perturb(), &choice.text).reference(&ex.base));
        }
        out.choices.push(choice);
    }
    out.records = score_cells(cells, scorer, language_tag)?;
    Ok(out)
}

struct SentenceParts<'a> {
    reference: &'a str,
    candidate_tag: &'a DialectTag,
    candidate: &'a str,
    mt: &'a str,
    perturbed_mt: &'a str,
}

fn sentence_parts<'a>(ex: &'a SentenceExample, reference: &DialectTag) -> std::result::Result<SentenceParts<'a>, &'static str> {
    let reference_text = ex.translations.get(reference).ok_or("missing_reference_dialect")?;
    let mut others = ex.translations.iter().filter(|(t, _)| *t != reference);
    let (candidate_tag, candidate) = others.next().ok_or("missing_candidate_dialect")?;
    if others.next().is_some() {
        return Err("ambiguous_candidate_dialect");
    }
    let mt = ex.mt.as_ref().ok_or("missing_mt")?;
    let perturbed_mt = ex.perturbed_mt.as_deref().ok_or("missing_perturbed_mt")?;
    Ok(SentenceParts {
        reference: reference_text,
        candidate_tag,
        candidate,
        mt: &mt.text,
        perturbed_mt,
    })
}

/// Sentence-level rewrite scores:
/// dialect = m(y_j, y_k), mt = m(y_j, MT), perturb = m(y_j, perturbed MT).
pub fn sentence_condition_scores(
    examples: &[SentenceExample],
    plan: &ConditionPlan,
    scorer: &dyn Scorer,
) -> Result<ConditionScores> {
    plan.expect_mode(&[PlanMode::Sentence])?;
    let reference = plan.reference()?;
    let mut out = ConditionScores::default();
    let mut cells = Vec::new();
    for ex in examples {
        let parts = match sentence_parts(ex, reference) {
            Ok(p) => p,
            Err(reason) => {
                out.dropped.push(DroppedExample::new(&ex.id, reason));
                continue;
            }
        };
        let y = parts.candidate;
        cells.push(Cell::new(&ex.id, Condition::dialect(), y).reference(parts.reference));
        cells.push(Cell::new(&ex.id, Condition::mt(), y).reference(parts.mt));
        cells.push(Cell::new(&ex.id, Condition::perturb(), y).reference(parts.perturbed_mt));
    }
    out.records = score_cells(cells, scorer, plan.language_tag.as_ref())?;
    Ok(out)
}

/// Quality-estimation scores with the English sentence as source.
///
/// `qe`: every dialect, the MT output and the perturbed MT output are scored
/// against the source. `qe_with_ref`: the other dialect, MT, and perturbed MT
/// are scored against the source plus the reference dialect.
pub fn qe_condition_scores(
    examples: &[SentenceExample],
    plan: &ConditionPlan,
    scorer: &dyn Scorer,
) -> Result<ConditionScores> {
    plan.expect_mode(&[PlanMode::Qe, PlanMode::QeWithRef])?;
    if !scorer.descriptor().needs_source {
        return Err(Error::Config(format!(
            "metric {} does not take a source",
            scorer.descriptor().name
        )));
    }
    let mut out = ConditionScores::default();
    let mut cells = Vec::new();
    for ex in examples {
        let (Some(mt), Some(perturbed)) = (ex.mt.as_ref(), ex.perturbed_mt.as_deref()) else {
            let reason = if ex.mt.is_none() { "missing_mt" } else { "missing_perturbed_mt" };
            out.dropped.push(DroppedExample::new(&ex.id, reason));
            continue;
        };
        let en = ex.english.as_str();
        match plan.mode {
            PlanMode::Qe => {
                for (tag, text) in &ex.translations {
                    cells.push(Cell::new(&ex.id, Condition::dialect_tag(tag), text).source(en));
                }
                cells.push(Cell::new(&ex.id, Condition::mt(), &mt.text).source(en));
                cells.push(Cell::new(&ex.id, Condition::perturb(), perturbed).source(en));
            }
            _ => {
                let parts = match sentence_parts(ex, plan.reference()?) {
                    Ok(p) => p,
                    Err(reason) => {
                        out.dropped.push(DroppedExample::new(&ex.id, reason));
                        continue;
                    }
                };
                let k = parts.reference;
                cells.push(
                    Cell::new(&ex.id, Condition::dialect_tag(parts.candidate_tag), parts.candidate)
                        .source(en)
                        .reference(k),
                );
                cells.push(Cell::new(&ex.id, Condition::mt(), parts.mt).source(en).reference(k));
                cells.push(Cell::new(&ex.id, Condition::perturb(), parts.perturbed_mt).source(en).reference(k));
            }
        }
    }
    out.records = score_cells(cells, scorer, plan.language_tag.as_ref())?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::metrics::{chrf_sentence, ChrfScorer};
    use crate::model::{DialectRewrite, MtOutput, PerturbationKind};

    fn micro(id: &str, base: &str, rewrites: &[&str], perturb: Option<&str>) -> MicroExample {
        MicroExample {
            id: id.into(),
            base: base.into(),
            dialect_rewrites: rewrites
                .iter()
                .map(|t| DialectRewrite { feature: "f".into(), text: (*t).into() })
                .collect(),
            perturbations: perturb
                .map(|p| (PerturbationKind::Replace, p.to_owned()))
                .into_iter()
                .collect(),
        }
    }

    #[test]
    fn micro_emits_dialect_and_perturb() {
        let b = "we have two tailors";
        let d = "we are having two tailors";
        let p = "we have three tailors";
        let out = micro_condition_scores(&[micro("e1", b, &[d], Some(p))], &ChrfScorer::default(), None).unwrap();
        assert_eq!(out.records.len(), 2);
        let dialect = &out.records[0];
        assert_eq!(dialect.condition, Condition::dialect());
        assert_eq!(dialect.score, chrf_sentence(d, b).unwrap());
        assert_eq!(out.records[1].condition, Condition::perturb());
        assert_eq!(out.records[1].score, chrf_sentence(p, b).unwrap());
    }

    #[test]
    fn degenerate_rewrite_scores_identity() {
        let out = micro_condition_scores(&[micro("e", "a b c", &["a b c"], Some("a x c"))], &ChrfScorer::default(), None).unwrap();
        assert_eq!(out.records[0].score, 1.0);
    }

    #[test]
    fn no_examples_no_records() {
        let out = micro_condition_scores(&[], &ChrfScorer::default(), None).unwrap();
        assert!(out.records.is_empty() && out.dropped.is_empty());
    }

    #[test]
    fn multiple_rewrites_become_separate_points_and_failures_drop() {
        let exs = [
            micro("m", "a b c", &["a b c d", "a b"], Some("a b x")),
            micro("z", "a b c", &["a c"], None),
        ];
        let out = micro_condition_scores(&exs, &ChrfScorer::default(), None).unwrap();
        let ids: Vec<&str> = out.records.iter().map(|r| r.example_id.as_str()).collect();
        assert_eq!(ids, vec!["m#1", "m#1", "m#2", "m#2"]);
        assert_eq!(out.dropped, vec![DroppedExample::new("z", "no_perturbation")]);
    }

    fn tag(s: &str) -> DialectTag {
        s.parse().unwrap()
    }

    fn sentence(id: &str, br: &str, pt: &str, mt: Option<&str>, pmt: Option<&str>) -> SentenceExample {
        let translations: BTreeMap<DialectTag, String> =
            [(tag("pt-BR"), br.to_owned()), (tag("pt-PT"), pt.to_owned())].into_iter().collect();
        SentenceExample {
            id: id.into(),
            english: "I like coffee".into(),
            translations,
            mt: mt.map(|t| MtOutput { locale: tag("pt-BR"), text: t.into() }),
            perturbed_english: None,
            perturbed_mt: pmt.map(Into::into),
        }
    }

    fn sentence_plan() -> ConditionPlan {
        ConditionPlan::new(PlanMode::Sentence, ChrfScorer::default().descriptor().clone())
            .unwrap()
            .with_reference_dialect(tag("pt-BR"))
    }

    #[test]
    fn sentence_mode_orientation() {
        let ex = sentence("s", "eu gosto de café", "eu gosto do café", Some("gosto de café"), Some("odeio café"));
        let out = sentence_condition_scores(&[ex], &sentence_plan(), &ChrfScorer::default()).unwrap();
        let y = "eu gosto do café";
        let by: BTreeMap<String, f64> = out.records.iter().map(|r| (r.condition.to_string(), r.score)).collect();
        assert_eq!(by["dialect"], chrf_sentence(y, "eu gosto de café").unwrap());
        assert_eq!(by["mt"], chrf_sentence(y, "gosto de café").unwrap());
        assert_eq!(by["perturb"], chrf_sentence(y, "odeio café").unwrap());
    }

    #[test]
    fn identical_translations_score_identity() {
        let ex = sentence("s", "igual", "igual", Some("x"), Some("y"));
        let out = sentence_condition_scores(&[ex], &sentence_plan(), &ChrfScorer::default()).unwrap();
        let dialect = out.records.iter().find(|r| r.condition == Condition::dialect()).unwrap();
        assert_eq!(dialect.score, 1.0);
    }

    #[test]
    fn missing_perturbed_mt_is_dropped_not_partial() {
        let ex = sentence("s", "a", "b", Some("c"), None);
        let out = sentence_condition_scores(&[ex], &sentence_plan(), &ChrfScorer::default()).unwrap();
        assert!(out.records.is_empty());
        assert_eq!(out.dropped, vec![DroppedExample::new("s", "missing_perturbed_mt")]);
    }

    /// A source-aware stand-in: scores the character overlap with the source length.
    struct LengthQe(MetricDescriptor);

    impl Scorer for LengthQe {
        fn descriptor(&self) -> &MetricDescriptor {
            &self.0
        }
        fn score_batch(&self, requests: &[MetricRequest]) -> Result<Vec<f64>> {
            Ok(requests.iter().map(|r| r.candidate.len() as f64).collect())
        }
    }

    fn qe_metric() -> LengthQe {
        LengthQe(MetricDescriptor {
            name: "lenqe".into(),
            needs_reference: false,
            needs_source: true,
            accepts_tag: true,
            range_hint: None,
        })
    }

    #[test]
    fn qe_mode_four_records_per_example() {
        let m = qe_metric();
        let plan = ConditionPlan::new(PlanMode::Qe, m.descriptor().clone()).unwrap();
        let ex = sentence("s", "a", "bb", Some("ccc"), Some("dddd"));
        let out = qe_condition_scores(&[ex], &plan, &m).unwrap();
        let conds: Vec<String> = out.records.iter().map(|r| r.condition.to_string()).collect();
        assert_eq!(conds, vec!["dialect:pt-BR", "dialect:pt-PT", "perturb", "mt"]);
    }

    #[test]
    fn qe_with_ref_candidate_set() {
        let m = qe_metric();
        let plan = ConditionPlan::new(PlanMode::QeWithRef, m.descriptor().clone())
            .unwrap()
            .with_reference_dialect(tag("pt-BR"));
        let ex = sentence("s", "a", "bb", Some("ccc"), Some("dddd"));
        let out = qe_condition_scores(&[ex], &plan, &m).unwrap();
        let conds: Vec<String> = out.records.iter().map(|r| r.condition.to_string()).collect();
        assert_eq!(conds, vec!["dialect:pt-PT", "perturb", "mt"]);
        assert!(qe_condition_scores(&[], &plan, &m).unwrap().records.is_empty());
    }

    #[test]
    fn qe_requires_source_aware_metric() {
        let err = ConditionPlan::new(PlanMode::Qe, ChrfScorer::default().descriptor().clone()).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn request_ids_round_trip() {
        let id = request_id("a|b", &Condition::dialect_tag(&tag("pt-PT")));
        let (ex, cond) = split_request_id(&id).unwrap();
        assert_eq!(ex, "a|b");
        assert_eq!(cond.to_string(), "dialect:pt-PT");
    }
}
