//! Robustness analysis per (metric, language) group and the report renderers:
//! machine CSV, markdown, plot data, attrition table, and metadata JSON.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::conditions::DroppedExample;
use crate::dataset::complete_case_filter;
use crate::error::{Error, Result};
use crate::model::{Condition, ScoreRecord};
use crate::stats::{contrast_with_ci, fit_mixed_effects, win_loss, RegressionFit, WinLossResult};

/// Conditions a group must have, the regression baseline, and the `(j, k)`
/// pairs to compare.
#[derive(Debug, Clone)]
pub struct AnalysisSpec {
    pub conditions: BTreeSet<Condition>,
    pub reference: Condition,
    pub comparisons: Vec<(Condition, Condition)>,
}

impl AnalysisSpec {
    /// dialect vs perturb only.
    pub fn micro() -> Self {
        Self {
            conditions: [Condition::dialect(), Condition::perturb()].into(),
            reference: Condition::perturb(),
            comparisons: vec![(Condition::dialect(), Condition::perturb())],
        }
    }

    /// dialect vs perturb, MT vs perturb, dialect vs MT.
    pub fn sentence() -> Self {
        Self {
            conditions: [Condition::dialect(), Condition::perturb(), Condition::mt()].into(),
            reference: Condition::perturb(),
            comparisons: vec![
                (Condition::dialect(), Condition::perturb()),
                (Condition::mt(), Condition::perturb()),
                (Condition::dialect(), Condition::mt()),
            ],
        }
    }

    /// Every condition present in `records`, each non-perturb condition
    /// compared against perturb.
    pub fn against_perturb(records: &[ScoreRecord]) -> Self {
        let conditions: BTreeSet<Condition> = records.iter().map(|r| r.condition.clone()).collect();
        let comparisons = conditions
            .iter()
            .filter(|c| **c != Condition::perturb())
            .map(|c| (c.clone(), Condition::perturb()))
            .collect();
        Self { conditions, reference: Condition::perturb(), comparisons }
    }
}

/// Where examples went between ingestion and analysis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Attrition {
    pub metric: String,
    pub language: String,
    pub examples_in: usize,
    pub dropped: BTreeMap<String, usize>,
    /// Scored units missing at least one required condition.
    pub incomplete: usize,
    pub analyzed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub metric: String,
    pub language: String,
    pub comparison: String,
    pub estimate: f64,
    pub standard_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub win_loss: WinLossResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupResult {
    pub metric: String,
    pub language: String,
    pub fit: RegressionFit,
    pub rows: Vec<ComparisonRow>,
    pub attrition: Attrition,
    /// Ids removed by the complete-case filter.
    pub incomplete_ids: Vec<String>,
}

/// An example left out of one group's analysis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DroppedRow {
    pub metric: String,
    pub language: String,
    pub id: String,
    pub reason: String,
}

pub fn comparison_label(j: &Condition, k: &Condition) -> String {
    format!("{j} vs {k}")
}

/// Complete-case filter, regression fit, intervals and sign tests for one group.
///
/// Bonferroni flags are provisional (family of one) until
/// [`apply_bonferroni`] runs over all groups.
#[allow(clippy::too_many_arguments)]
pub fn analyze_group(
    metric: &str,
    language: &str,
    records: &[ScoreRecord],
    spec: &AnalysisSpec,
    upstream_dropped: &[DroppedExample],
    examples_in: usize,
    alpha: f64,
    confidence: f64,
) -> Result<GroupResult> {
    let (kept, incomplete) = complete_case_filter(records, &spec.conditions);
    let kept: Vec<ScoreRecord> = kept.into_iter().filter(|r| spec.conditions.contains(&r.condition)).collect();
    if kept.is_empty() {
        return Err(Error::Stats(format!(
            "{metric}/{language}: no example has scores for all of {}",
            spec.conditions.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
        )));
    }
    let fit = fit_mixed_effects(&kept, &spec.reference)?;
    let rows = spec
        .comparisons
        .iter()
        .map(|(j, k)| {
            let ci = contrast_with_ci(&fit, j, k, confidence)?;
            let counts = win_loss(&kept, j, k)?;
            Ok(ComparisonRow {
                metric: metric.to_owned(),
                language: language.to_owned(),
                comparison: comparison_label(j, k),
                estimate: ci.estimate,
                standard_error: ci.standard_error,
                ci_low: ci.lower,
                ci_high: ci.upper,
                win_loss: WinLossResult::new(counts, alpha, 1)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut dropped = BTreeMap::new();
    for d in upstream_dropped {
        *dropped.entry(d.reason.clone()).or_default() += 1;
    }
    Ok(GroupResult {
        metric: metric.to_owned(),
        language: language.to_owned(),
        attrition: Attrition {
            metric: metric.to_owned(),
            language: language.to_owned(),
            examples_in,
            dropped,
            incomplete: incomplete.len(),
            analyzed: fit.n_examples,
        },
        incomplete_ids: incomplete,
        fit,
        rows,
    })
}

/// Recomputes significance with one family per metric covering all of that
/// metric's comparisons across languages, or `family_size` when given.
pub fn apply_bonferroni(groups: &mut [GroupResult], alpha: f64, family_size: Option<usize>) -> Result<()> {
    let mut per_metric: BTreeMap<String, usize> = BTreeMap::new();
    for g in groups.iter() {
        *per_metric.entry(g.metric.clone()).or_default() += g.rows.len();
    }
    for g in groups.iter_mut() {
        let k = family_size.unwrap_or(per_metric[&g.metric]);
        for row in &mut g.rows {
            let wl = &row.win_loss;
            let counts = crate::stats::WinLoss { wins: wl.wins, losses: wl.losses, ties: wl.ties };
            row.win_loss = WinLossResult::new(counts, alpha, k)?;
        }
    }
    Ok(())
}

/// Header shared by every report form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportMetadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub alpha: f64,
    pub confidence: f64,
    pub family_size: Option<usize>,
    pub metrics: Vec<String>,
    /// Tokenization, smoothing, tie rule, interval quantile, ...
    pub settings: BTreeMap<String, String>,
    /// Input path to SHA-256 of its bytes.
    pub dataset_hashes: BTreeMap<String, String>,
}

impl ReportMetadata {
    pub fn new(command: &str) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            command: command.to_owned(),
            seed: 0,
            alpha: 0.05,
            confidence: 0.99,
            family_size: None,
            metrics: Vec::new(),
            settings: default_settings(),
            dataset_hashes: BTreeMap::new(),
        }
    }
}

pub fn default_settings() -> BTreeMap<String, String> {
    [
        ("bleu.tokenization", "whitespace; unicode codepoints for zh tags"),
        ("bleu.smoothing", "add-one on orders 2-4; brevity penalty min(1, exp(1 - r/c))"),
        ("chrf", "char orders 1-6, whitespace removed, beta 2"),
        ("normalization", "NFC"),
        ("ties", "excluded from sign-test trials; success rate = wins / (wins + losses)"),
        ("sign_test", "exact one-tailed binomial, p = 1/2"),
        ("regression", "random intercept per example, balanced closed form (= REML)"),
        ("ci", "two-sided Student t, df = (I-1)(J-1)"),
        ("bonferroni", "significant iff p < alpha / K, K = comparisons per metric unless overridden"),
        ("missing_conditions", "complete cases only"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_owned(), v.to_owned()))
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub metadata: ReportMetadata,
    pub groups: Vec<GroupResult>,
    pub dropped: Vec<DroppedRow>,
}

/// Shortest round-trip form, switching to exponent notation for tiny values.
fn num(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-4 {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, num)
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Config(format!("csv: {e}"));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 fields"))
}

impl Report {
    /// Collects upstream drops plus each group's incomplete ids.
    pub fn new(metadata: ReportMetadata, groups: Vec<GroupResult>, mut upstream: Vec<DroppedRow>) -> Self {
        for g in &groups {
            upstream.extend(g.incomplete_ids.iter().map(|id| DroppedRow {
                metric: g.metric.clone(),
                language: g.language.clone(),
                id: id.clone(),
                reason: "incomplete_conditions".into(),
            }));
        }
        Self { metadata, groups, dropped: upstream }
    }

    pub fn rows(&self) -> impl Iterator<Item = &ComparisonRow> {
        self.groups.iter().flat_map(|g| &g.rows)
    }

    pub fn to_csv(&self) -> Result<String> {
        csv_string(
            &[
                "metric", "language", "comparison", "estimate", "SE", "CI_low", "CI_high", "success_rate", "wins",
                "losses", "ties", "p", "K", "significant",
            ],
            self.rows().map(|r| {
                let wl = &r.win_loss;
                vec![
                    r.metric.clone(),
                    r.language.clone(),
                    r.comparison.clone(),
                    num(r.estimate),
                    num(r.standard_error),
                    num(r.ci_low),
                    num(r.ci_high),
                    fmt_opt(wl.success_rate),
                    wl.wins.to_string(),
                    wl.losses.to_string(),
                    wl.ties.to_string(),
                    num(wl.p_value),
                    wl.family_size.to_string(),
                    wl.significant_after_bonferroni.to_string(),
                ]
            }),
        )
    }

    /// One line per fixed effect relative to the baseline condition.
    pub fn plot_data_csv(&self) -> Result<String> {
        let row = |g: &GroupResult, c: &Condition| {
            let ci = contrast_with_ci(&g.fit, c, &g.fit.reference_condition, self.metadata.confidence)?;
            Ok::<_, Error>(vec![
                g.metric.clone(),
                g.language.clone(),
                c.to_string(),
                num(ci.estimate),
                num(ci.lower),
                num(ci.upper),
            ])
        };
        let rows = self
            .groups
            .iter()
            .flat_map(|g| g.fit.conditions.iter().filter(move |c| **c != g.fit.reference_condition).map(move |c| (g, c)))
            .map(|(g, c)| row(g, c))
            .collect::<Result<Vec<_>>>()?;
        csv_string(&["metric", "language", "condition", "estimate", "ci_low", "ci_high"], rows)
    }

    pub fn attrition_csv(&self) -> Result<String> {
        let reasons: BTreeSet<&String> = self.groups.iter().flat_map(|g| g.attrition.dropped.keys()).collect();
        let mut header = vec!["metric", "language", "examples_in"];
        header.extend(reasons.iter().map(|r| r.as_str()));
        header.extend(["incomplete", "analyzed"]);
        let rows = self.groups.iter().map(|g| {
            let a = &g.attrition;
            let mut row = vec![a.metric.clone(), a.language.clone(), a.examples_in.to_string()];
            row.extend(reasons.iter().map(|r| a.dropped.get(*r).copied().unwrap_or(0).to_string()));
            row.push(a.incomplete.to_string());
            row.push(a.analyzed.to_string());
            row
        });
        csv_string(&header, rows)
    }

    pub fn to_markdown(&self) -> String {
        let m = &self.metadata;
        let mut s = String::new();
        s.push_str(&format!("# Dialect robustness report ({})\n\n", m.command));
        s.push_str(&format!("- tool: {} {}\n", m.tool, m.version));
        s.push_str(&format!("- seed: {}\n", m.seed));
        s.push_str(&format!("- alpha: {}, confidence: {}\n", m.alpha, m.confidence));
        match m.family_size {
            Some(k) => s.push_str(&format!("- Bonferroni family size: {k} (override)\n")),
            None => s.push_str("- Bonferroni family size: comparisons per metric\n"),
        }
        for (k, v) in &m.settings {
            s.push_str(&format!("- {k}: {v}\n"));
        }
        for (path, hash) in &m.dataset_hashes {
            s.push_str(&format!("- dataset `{path}` sha256 {hash}\n"));
        }
        s.push_str("\n## Comparisons\n\n");
        s.push_str("| metric | language | comparison | estimate (SE) | CI | success rate | W/L/T | p | K | sig |\n");
        s.push_str("|---|---|---|---|---|---|---|---|---|---|\n");
        for r in self.rows() {
            let wl = &r.win_loss;
            s.push_str(&format!(
                "| {} | {} | {} | {:.4} ({:.4}) | [{:.4}, {:.4}] | {} | {}/{}/{} | {:.3e} | {} | {} |\n",
                r.metric,
                r.language,
                r.comparison,
                r.estimate,
                r.standard_error,
                r.ci_low,
                r.ci_high,
                wl.success_rate.map_or_else(|| "n/a".to_owned(), |x| format!("{x:.3}")),
                wl.wins,
                wl.losses,
                wl.ties,
                wl.p_value,
                wl.family_size,
                if wl.significant_after_bonferroni { "yes" } else { "no" },
            ));
        }
        s.push_str("\n## Variance components\n\n| metric | language | I | J | tau^2 | sigma^2 |\n|---|---|---|---|---|---|\n");
        for g in &self.groups {
            s.push_str(&format!(
                "| {} | {} | {} | {} | {:.6} | {:.6} |\n",
                g.metric, g.language, g.fit.n_examples, g.fit.n_conditions, g.fit.random_intercept_variance,
                g.fit.residual_variance
            ));
        }
        s.push_str("\n## Attrition\n\n| metric | language | in | dropped | incomplete | analyzed |\n|---|---|---|---|---|---|\n");
        for g in &self.groups {
            let a = &g.attrition;
            let dropped = if a.dropped.is_empty() {
                "0".to_owned()
            } else {
                a.dropped.iter().map(|(r, n)| format!("{r}: {n}")).collect::<Vec<_>>().join(", ")
            };
            s.push_str(&format!(
                "| {} | {} | {} | {} | {} | {} |\n",
                a.metric, a.language, a.examples_in, dropped, a.incomplete, a.analyzed
            ));
        }
        s
    }
}
