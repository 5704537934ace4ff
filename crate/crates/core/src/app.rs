//! End-to-end runs behind the command line: robustness, awareness and QE
//! reports, NANO builds, and fixture generation.
//!
//! Every run writes into a staging directory first. On success the files move
//! to the output directory; on failure the staging directory becomes
//! `<out>/quarantine` with an `error.txt` next to whatever was written.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::conditions::{
    micro_condition_scores, qe_condition_scores, rewrite_id, select_perturbation, sentence_condition_scores,
    ConditionPlan, ConditionScores, DroppedExample, PlanMode,
};
use crate::dataset::{content_hash, load_dataset, validate_bundle, Dataset, DatasetKind};
use crate::error::{Error, Result};
use crate::fixtures::write_fixtures;
use crate::metrics::{
    score_external_file, write_score_file, MetricDescriptor, MetricRegistry, MetricRequest, Scorer, SubprocessConfig,
    SubprocessScorer,
};
use crate::model::{canonical_sort, Condition, DialectTag, MicroExample, ScoreRecord, SentenceExample};
use crate::nano::{build_examples, load_tag_universe, write_training_file, Document, NanoConfig, SamplerConfig};
use crate::report::{analyze_group, apply_bonferroni, AnalysisSpec, DroppedRow, Report, ReportMetadata};
use crate::stats::{awareness_eval, AwarenessRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Robustness,
    Awareness,
    Qe,
    NanoBuild,
    Fixtures,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Robustness => "robustness",
            Command::Awareness => "awareness",
            Command::Qe => "qe",
            Command::NanoBuild => "nano-build",
            Command::Fixtures => "fixtures",
        })
    }
}

/// Where a metric's scores come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetricSpec {
    /// `native:bleu` or `native:chrf`.
    Native(String),
    /// `file:<path>`: precomputed tab-separated scores.
    File(PathBuf),
    /// `cmd:<program>`: a line-protocol subprocess.
    Command(String),
}

impl FromStr for MetricSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("metric spec {s:?}: expected native:<name>, file:<path> or cmd:<program>"));
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        let rest = rest.trim();
        if rest.is_empty() {
            return Err(bad());
        }
        match kind {
            "native" => Ok(MetricSpec::Native(rest.to_owned())),
            "file" => Ok(MetricSpec::File(rest.into())),
            "cmd" => Ok(MetricSpec::Command(rest.trim_matches('"').to_owned())),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricSpec::Native(n) => write!(f, "native:{n}"),
            MetricSpec::File(p) => write!(f, "file:{}", p.display()),
            MetricSpec::Command(c) => write!(f, "cmd:{c}"),
        }
    }
}

/// Every setting as optional values; command line and config file both
/// produce one, and [`Settings::or`] lets the command line win.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Settings {
    pub dataset: Option<PathBuf>,
    pub dataset_kind: Option<String>,
    #[serde(default)]
    pub metric: Vec<String>,
    #[serde(default)]
    pub language: Vec<String>,
    #[serde(default)]
    pub reference_dialect: Vec<String>,
    pub alpha: Option<f64>,
    pub confidence: Option<f64>,
    pub family_size: Option<usize>,
    pub lambda: Option<f64>,
    pub pos_neg_ratio: Option<f64>,
    pub tag_universe: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub with_reference: Option<bool>,
    pub langid_cmd: Option<String>,
    pub timeout_secs: Option<u64>,
    pub shard_size: Option<usize>,
}

impl Settings {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Field-wise `self` if set, else `other`.
    pub fn or(self, other: Settings) -> Settings {
        fn list(a: Vec<String>, b: Vec<String>) -> Vec<String> {
            if a.is_empty() {
                b
            } else {
                a
            }
        }
        Settings {
            dataset: self.dataset.or(other.dataset),
            dataset_kind: self.dataset_kind.or(other.dataset_kind),
            metric: list(self.metric, other.metric),
            language: list(self.language, other.language),
            reference_dialect: list(self.reference_dialect, other.reference_dialect),
            alpha: self.alpha.or(other.alpha),
            confidence: self.confidence.or(other.confidence),
            family_size: self.family_size.or(other.family_size),
            lambda: self.lambda.or(other.lambda),
            pos_neg_ratio: self.pos_neg_ratio.or(other.pos_neg_ratio),
            tag_universe: self.tag_universe.or(other.tag_universe),
            seed: self.seed.or(other.seed),
            jobs: self.jobs.or(other.jobs),
            out: self.out.or(other.out),
            with_reference: self.with_reference.or(other.with_reference),
            langid_cmd: self.langid_cmd.or(other.langid_cmd),
            timeout_secs: self.timeout_secs.or(other.timeout_secs),
            shard_size: self.shard_size.or(other.shard_size),
        }
    }
}

/// A fully resolved run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub dataset: Option<PathBuf>,
    pub dataset_kind: Option<DatasetKind>,
    pub metrics: Vec<MetricSpec>,
    pub languages: Vec<String>,
    pub reference_dialects: Vec<DialectTag>,
    pub alpha: f64,
    pub confidence: f64,
    pub family_size: Option<usize>,
    pub lambda: f64,
    pub pos_neg_ratio: f64,
    pub tag_universe: Option<PathBuf>,
    pub seed: u64,
    pub jobs: Option<usize>,
    pub out: PathBuf,
    pub with_reference: bool,
    pub langid_cmd: Option<String>,
    pub timeout: Duration,
    pub shard_size: usize,
}

impl RunConfig {
    /// Applies defaults and checks the settings `command` needs. Does no I/O.
    pub fn resolve(command: Command, s: Settings) -> Result<Self> {
        let metrics = s.metric.iter().map(|m| m.parse()).collect::<Result<Vec<MetricSpec>>>()?;
        let needs_metrics = matches!(command, Command::Robustness | Command::Awareness | Command::Qe);
        if needs_metrics && metrics.is_empty() {
            return Err(Error::Config(format!("{command} needs at least one --metric")));
        }
        let needs_dataset = command != Command::Fixtures;
        if needs_dataset && s.dataset.is_none() {
            return Err(Error::Config(format!("{command} needs --dataset")));
        }
        let dataset_kind = match (command, s.dataset_kind.as_deref()) {
            (Command::Robustness, Some(k)) => Some(k.parse()?),
            (Command::Robustness, None) => return Err(Error::Config("robustness needs --dataset-kind".into())),
            (Command::Awareness | Command::Qe, Some(k)) if k != "sentence" => {
                return Err(Error::Config(format!("{command} works on sentence datasets, not {k}")))
            }
            (Command::Awareness | Command::Qe, _) => Some(DatasetKind::Sentence),
            _ => None,
        };
        let reference_dialects = s
            .reference_dialect
            .iter()
            .map(|t| t.parse())
            .collect::<Result<Vec<DialectTag>>>()?;
        let alpha = s.alpha.unwrap_or(0.05);
        let confidence = s.confidence.unwrap_or(0.99);
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Config(format!("alpha {alpha} outside (0, 1)")));
        }
        if !(confidence > 0.0 && confidence < 1.0) {
            return Err(Error::Config(format!("confidence {confidence} outside (0, 1)")));
        }
        if s.family_size == Some(0) {
            return Err(Error::Config("family size must be positive".into()));
        }
        Ok(Self {
            command,
            dataset: s.dataset,
            dataset_kind,
            metrics,
            languages: s.language,
            reference_dialects,
            alpha,
            confidence,
            family_size: s.family_size,
            lambda: s.lambda.unwrap_or(1.0),
            pos_neg_ratio: s.pos_neg_ratio.unwrap_or(1.0),
            tag_universe: s.tag_universe,
            seed: s.seed.unwrap_or(0),
            jobs: s.jobs,
            out: s.out.unwrap_or_else(|| PathBuf::from("out")),
            with_reference: s.with_reference.unwrap_or(false),
            langid_cmd: s.langid_cmd,
            timeout: Duration::from_secs(s.timeout_secs.unwrap_or(600)),
            shard_size: s.shard_size.unwrap_or(256),
        })
    }

    fn dataset_path(&self) -> Result<&Path> {
        self.dataset.as_deref().ok_or_else(|| Error::Config(format!("{} needs --dataset", self.command)))
    }

    fn metadata(&self) -> Result<ReportMetadata> {
        let mut m = ReportMetadata::new(&self.command.to_string());
        m.seed = self.seed;
        m.alpha = self.alpha;
        m.confidence = self.confidence;
        m.family_size = self.family_size;
        m.metrics = self.metrics.iter().map(ToString::to_string).collect();
        if let Some(p) = &self.dataset {
            m.dataset_hashes.insert(p.display().to_string(), content_hash(p)?);
        }
        for spec in &self.metrics {
            if let MetricSpec::File(p) = spec {
                m.dataset_hashes.insert(p.display().to_string(), content_hash(p)?);
            }
        }
        Ok(m)
    }

    fn subprocess(&self, command: &str) -> SubprocessConfig {
        let mut c = SubprocessConfig::new(command);
        c.timeout = self.timeout;
        c.shards = self.jobs.unwrap_or(1).max(1);
        c
    }
}

/// Files produced by a successful run.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunOutput {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

/// Dispatches on `config.command`.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    match config.command {
        Command::Robustness => run_robustness_report(config),
        Command::Awareness => run_awareness(config),
        Command::Qe => run_qe(config),
        Command::NanoBuild => run_nano_build(config),
        Command::Fixtures => run_fixtures(config),
    }
}

/// Runs `body` against a fresh staging directory and publishes or quarantines
/// its contents.
fn staged(out: &Path, body: impl FnOnce(&Path) -> Result<String>) -> Result<RunOutput> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let staging = out.join(".staging");
    if staging.exists() {
        std::fs::remove_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
    }
    std::fs::create_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
    match body(&staging) {
        Ok(summary) => {
            let mut files = Vec::new();
            let mut entries: Vec<_> = std::fs::read_dir(&staging)
                .map_err(|e| Error::io(&staging, e))?
                .collect::<std::io::Result<Vec<_>>>()
                .map_err(|e| Error::io(&staging, e))?;
            entries.sort_by_key(|e| e.file_name());
            for entry in entries {
                let dest = out.join(entry.file_name());
                if dest.is_dir() {
                    std::fs::remove_dir_all(&dest).map_err(|e| Error::io(&dest, e))?;
                }
                std::fs::rename(entry.path(), &dest).map_err(|e| Error::io(&dest, e))?;
                files.push(dest);
            }
            std::fs::remove_dir(&staging).map_err(|e| Error::io(&staging, e))?;
            Ok(RunOutput { files, summary })
        }
        Err(err) => {
            let quarantine = out.join("quarantine");
            if quarantine.exists() {
                let _ = std::fs::remove_dir_all(&quarantine);
            }
            if std::fs::rename(&staging, &quarantine).is_ok() {
                let _ = std::fs::write(quarantine.join("error.txt"), format!("{err}\n"));
            }
            Err(err)
        }
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write(path, &(serde_json::to_string_pretty(value)? + "\n"))
}

fn write_jsonl_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut s = String::new();
    for r in rows {
        s.push_str(&serde_json::to_string(r)?);
        s.push('\n');
    }
    write(path, &s)
}

/// A metric ready to produce records: an in-process or subprocess scorer, or
/// records already read from a file.
enum MetricSource {
    Scorer(Box<dyn Scorer>),
    Records { name: String, records: Vec<ScoreRecord> },
}

impl MetricSource {
    fn name(&self) -> &str {
        match self {
            MetricSource::Scorer(s) => &s.descriptor().name,
            MetricSource::Records { name, .. } => name,
        }
    }
}

fn open_metric(spec: &MetricSpec, config: &RunConfig, mode: PlanMode) -> Result<MetricSource> {
    match spec {
        MetricSpec::Native(name) => {
            let mut registry = MetricRegistry::with_native();
            let names: Vec<String> = registry.names().map(str::to_owned).collect();
            let scorer = registry
                .take(name)
                .ok_or_else(|| Error::Config(format!("unknown native metric {name:?}; known: {}", names.join(", "))))?;
            Ok(MetricSource::Scorer(scorer))
        }
        MetricSpec::Command(cmd) => {
            let qe = matches!(mode, PlanMode::Qe | PlanMode::QeWithRef);
            let descriptor = MetricDescriptor {
                name: cmd.clone(),
                needs_reference: !matches!(mode, PlanMode::Qe),
                needs_source: qe,
                accepts_tag: true,
                range_hint: None,
            };
            Ok(MetricSource::Scorer(Box::new(SubprocessScorer::new(descriptor, config.subprocess(cmd)))))
        }
        MetricSpec::File(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let name = text
                .lines()
                .find(|l| !l.trim().is_empty())
                .and_then(|l| l.split('\t').next())
                .ok_or_else(|| Error::Config(format!("{}: empty score file", path.display())))?
                .to_owned();
            let records = score_external_file(path, &name)?;
            Ok(MetricSource::Records { name, records })
        }
    }
}

fn check_known_ids(records: &[ScoreRecord], known: &BTreeSet<String>, metric: &str) -> Result<()> {
    match records.iter().find(|r| !known.contains(&r.example_id)) {
        Some(r) => Err(Error::Config(format!(
            "scores for {metric} reference unknown example id {:?}",
            r.example_id
        ))),
        None => Ok(()),
    }
}

fn load_checked(config: &RunConfig, kind: DatasetKind) -> Result<Dataset> {
    let dataset = load_dataset(config.dataset_path()?, kind)?;
    validate_bundle(&dataset).into_result()?;
    Ok(dataset)
}

fn micro_ids(examples: &[MicroExample]) -> BTreeSet<String> {
    examples
        .iter()
        .flat_map(|ex| {
            let total = ex.dialect_rewrites.len();
            (1..=total).map(move |k| rewrite_id(&ex.id, k, total))
        })
        .collect()
}

/// Sentence examples grouped by language, restricted to `--language` when given.
fn sentence_groups(
    examples: &[SentenceExample],
    languages: &[String],
) -> Result<BTreeMap<String, Vec<SentenceExample>>> {
    let mut groups: BTreeMap<String, Vec<SentenceExample>> = BTreeMap::new();
    for ex in examples {
        let lang = ex.language().ok_or_else(|| Error::Config(format!("example {} mixes languages", ex.id)))?;
        if languages.is_empty() || languages.iter().any(|l| l == lang) {
            groups.entry(lang.to_owned()).or_default().push(ex.clone());
        }
    }
    if groups.is_empty() {
        return Err(Error::Config("no examples match the requested languages".into()));
    }
    Ok(groups)
}

fn reference_for(config: &RunConfig, language: &str) -> Result<DialectTag> {
    config
        .reference_dialects
        .iter()
        .find(|t| t.language() == language)
        .cloned()
        .ok_or_else(|| Error::Config(format!("no --reference-dialect given for language {language}")))
}

fn dropped_rows(metric: &str, language: &str, dropped: &[DroppedExample]) -> Vec<DroppedRow> {
    dropped
        .iter()
        .map(|d| DroppedRow {
            metric: metric.to_owned(),
            language: language.to_owned(),
            id: d.id.clone(),
            reason: d.reason.clone(),
        })
        .collect()
}

fn write_report(dir: &Path, report: &Report, records: &[ScoreRecord]) -> Result<()> {
    write(&dir.join("report.csv"), &report.to_csv()?)?;
    write(&dir.join("report.md"), &report.to_markdown())?;
    write(&dir.join("plot_data.csv"), &report.plot_data_csv()?)?;
    write(&dir.join("attrition.csv"), &report.attrition_csv()?)?;
    write_json(&dir.join("metadata.json"), &report.metadata)?;
    write_jsonl_rows(&dir.join("dropped.jsonl"), &report.dropped)?;
    write_score_file(&dir.join("scores.tsv"), records)
}

/// Dialect-vs-perturb (and MT) contrasts, success rates and sign tests for
/// every metric and language.
pub fn run_robustness_report(config: &RunConfig) -> Result<RunOutput> {
    let kind = config.dataset_kind.ok_or_else(|| Error::Config("robustness needs --dataset-kind".into()))?;
    if config.metrics.is_empty() {
        return Err(Error::Config("robustness needs at least one --metric".into()));
    }
    let metadata = config.metadata()?;
    let dataset = load_checked(config, kind)?;
    staged(&config.out, |dir| {
        let mut groups = Vec::new();
        let mut dropped = Vec::new();
        let mut all_records = Vec::new();
        for spec in &config.metrics {
            let mode = match kind {
                DatasetKind::Micro => PlanMode::Micro,
                DatasetKind::Sentence => PlanMode::Sentence,
            };
            let source = open_metric(spec, config, mode)?;
            let metric = source.name().to_owned();
            match &dataset {
                Dataset::Micro(examples) => {
                    let language = config.languages.first().map_or("en", String::as_str);
                    let scores = match &source {
                        MetricSource::Scorer(s) => micro_condition_scores(examples, s.as_ref(), None)?,
                        MetricSource::Records { records, .. } => {
                            check_known_ids(records, &micro_ids(examples), &metric)?;
                            let dropped = examples
                                .iter()
                                .filter(|ex| select_perturbation(ex).is_none())
                                .map(|ex| DroppedExample { id: ex.id.clone(), reason: "no_perturbation".into() })
                                .collect();
                            ConditionScores { records: records.clone(), dropped, choices: vec![] }
                        }
                    };
                    groups.push(analyze_group(
                        &metric,
                        language,
                        &scores.records,
                        &AnalysisSpec::micro(),
                        &scores.dropped,
                        examples.len(),
                        config.alpha,
                        config.confidence,
                    )?);
                    dropped.extend(dropped_rows(&metric, language, &scores.dropped));
                    all_records.extend(scores.records);
                }
                Dataset::Sentence(examples) => {
                    let by_language = sentence_groups(examples, &config.languages)?;
                    if let MetricSource::Records { records, .. } = &source {
                        let known = examples.iter().map(|e| e.id.clone()).collect();
                        check_known_ids(records, &known, &metric)?;
                    }
                    for (language, group) in &by_language {
                        let reference = reference_for(config, language)?;
                        let scores = match &source {
                            MetricSource::Scorer(s) => {
                                let plan = ConditionPlan::new(PlanMode::Sentence, s.descriptor().clone())?
                                    .with_reference_dialect(reference.clone())
                                    .with_language_tag(reference.clone());
                                sentence_condition_scores(group, &plan, s.as_ref())?
                            }
                            MetricSource::Records { records, .. } => records_for(records, group),
                        };
                        groups.push(analyze_group(
                            &metric,
                            language,
                            &scores.records,
                            &AnalysisSpec::sentence(),
                            &scores.dropped,
                            group.len(),
                            config.alpha,
                            config.confidence,
                        )?);
                        dropped.extend(dropped_rows(&metric, language, &scores.dropped));
                        all_records.extend(scores.records);
                    }
                }
            }
        }
        apply_bonferroni(&mut groups, config.alpha, config.family_size)?;
        canonical_sort(&mut all_records);
        let report = Report::new(metadata, groups, dropped);
        write_report(dir, &report, &all_records)?;
        Ok(summarize_report(&report))
    })
}

fn records_for(records: &[ScoreRecord], group: &[SentenceExample]) -> ConditionScores {
    let ids: BTreeSet<&str> = group.iter().map(|e| e.id.as_str()).collect();
    ConditionScores {
        records: records.iter().filter(|r| ids.contains(r.example_id.as_str())).cloned().collect(),
        ..Default::default()
    }
}

fn summarize_report(report: &Report) -> String {
    report
        .rows()
        .map(|r| {
            format!(
                "{} [{}] {}: estimate {:.4} (SE {:.4}), success rate {}, p {:.3e}{}",
                r.metric,
                r.language,
                r.comparison,
                r.estimate,
                r.standard_error,
                r.win_loss.success_rate.map_or_else(|| "n/a".to_owned(), |x| format!("{x:.3}")),
                r.win_loss.p_value,
                if r.win_loss.significant_after_bonferroni { " *" } else { "" }
            )
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Scores of every candidate dialect under every input tag of its language.
///
/// Requests pair candidate `y_j` with the MT output as reference and the
/// English sentence as source; the condition is `dialect:<j>@<input tag>`.
pub fn awareness_requests(examples: &[SentenceExample]) -> (Vec<MetricRequest>, Vec<DroppedExample>) {
    let tags: BTreeSet<&DialectTag> = examples.iter().flat_map(|e| e.translations.keys()).collect();
    let mut requests = Vec::new();
    let mut dropped = Vec::new();
    for ex in examples {
        let Some(mt) = &ex.mt else {
            dropped.push(DroppedExample { id: ex.id.clone(), reason: "missing_mt".into() });
            continue;
        };
        for (candidate, text) in &ex.translations {
            for input in tags.iter().filter(|t| t.same_language(candidate)) {
                let condition = Condition::new(
                    crate::model::ConditionKind::Dialect,
                    Some(format!("{candidate}@{input}")),
                )
                .expect("dialect detail is free-form");
                requests.push(
                    MetricRequest::new(crate::conditions::request_id(&ex.id, &condition), text.clone())
                        .with_reference(mt.text.clone())
                        .with_source(ex.english.clone())
                        .with_tag(Some((*input).clone())),
                );
            }
        }
    }
    (requests, dropped)
}

#[derive(Debug, Clone, Serialize)]
struct AwarenessOutputRow {
    metric: String,
    language: String,
    candidate_dialect: String,
    input_tag: String,
    mean_score: f64,
    matched: bool,
    aware: bool,
}

/// Whether each metric scores text highest under its own dialect tag.
pub fn run_awareness(config: &RunConfig) -> Result<RunOutput> {
    let metadata = config.metadata()?;
    let Dataset::Sentence(examples) = load_checked(config, DatasetKind::Sentence)? else {
        unreachable!("sentence kind requested")
    };
    let by_language = sentence_groups(&examples, &config.languages)?;
    staged(&config.out, |dir| {
        let mut rows = Vec::new();
        let mut dropped = Vec::new();
        let mut all_records = Vec::new();
        for spec in &config.metrics {
            let source = open_metric(spec, config, PlanMode::Sentence)?;
            let metric = source.name().to_owned();
            for (language, group) in &by_language {
                let (requests, drops) = awareness_requests(group);
                let records: Vec<ScoreRecord> = match &source {
                    MetricSource::Scorer(s) => {
                        let scores = s.score_batch(&requests)?;
                        requests
                            .iter()
                            .zip(scores)
                            .map(|(r, score)| {
                                let (id, condition) = crate::conditions::split_request_id(&r.id)?;
                                ScoreRecord::new(&metric, id, condition, score)
                            })
                            .collect::<Result<_>>()?
                    }
                    MetricSource::Records { records, .. } => records_for(records, group).records,
                };
                let parsed = records.iter().map(AwarenessRecord::from_score_record).collect::<Result<Vec<_>>>()?;
                for row in awareness_eval(&parsed)? {
                    for (tag, mean) in &row.scores_by_input_tag {
                        rows.push(AwarenessOutputRow {
                            metric: metric.clone(),
                            language: language.clone(),
                            candidate_dialect: row.candidate_dialect.to_string(),
                            input_tag: tag.to_string(),
                            mean_score: *mean,
                            matched: *tag == row.candidate_dialect,
                            aware: row.aware,
                        });
                    }
                }
                dropped.extend(dropped_rows(&metric, language, &drops));
                all_records.extend(records);
            }
        }
        canonical_sort(&mut all_records);
        let mut csv = csv::Writer::from_writer(Vec::new());
        for r in &rows {
            csv.serialize(r).map_err(|e| Error::Config(format!("csv: {e}")))?;
        }
        let csv = String::from_utf8(csv.into_inner().map_err(|e| Error::Config(format!("csv: {e}")))?)
            .expect("utf-8 csv");
        write(&dir.join("awareness.csv"), &csv)?;
        let mut md = format!("# Dialect awareness report\n\n- tool: {} {}\n\n", metadata.tool, metadata.version);
        md.push_str("| metric | language | candidate | input tag | mean | matched | aware |\n|---|---|---|---|---|---|---|\n");
        for r in &rows {
            md.push_str(&format!(
                "| {} | {} | {} | {} | {:.4} | {} | {} |\n",
                r.metric,
                r.language,
                r.candidate_dialect,
                r.input_tag,
                r.mean_score,
                if r.matched { "yes" } else { "" },
                if r.aware { "✓" } else { "✗" }
            ));
        }
        write(&dir.join("awareness.md"), &md)?;
        write_json(&dir.join("metadata.json"), &metadata)?;
        write_jsonl_rows(&dir.join("dropped.jsonl"), &dropped)?;
        write_score_file(&dir.join("scores.tsv"), &all_records)?;
        let aware: BTreeSet<(String, String, bool)> =
            rows.iter().map(|r| (r.metric.clone(), r.candidate_dialect.clone(), r.aware)).collect();
        Ok(aware
            .into_iter()
            .map(|(m, c, a)| format!("{m} {c}: {}", if a { "aware" } else { "not aware" }))
            .collect::<Vec<_>>()
            .join("\n"))
    })
}

/// Quality-estimation scoring: each dialect (and MT) against the perturbed MT
/// output, judged from the English source with or without a reference.
pub fn run_qe(config: &RunConfig) -> Result<RunOutput> {
    let metadata = config.metadata()?;
    let Dataset::Sentence(examples) = load_checked(config, DatasetKind::Sentence)? else {
        unreachable!("sentence kind requested")
    };
    let by_language = sentence_groups(&examples, &config.languages)?;
    let mode = if config.with_reference { PlanMode::QeWithRef } else { PlanMode::Qe };
    staged(&config.out, |dir| {
        let mut groups = Vec::new();
        let mut dropped = Vec::new();
        let mut all_records = Vec::new();
        for spec in &config.metrics {
            let source = open_metric(spec, config, mode)?;
            let metric = source.name().to_owned();
            for (language, group) in &by_language {
                let scores = match &source {
                    MetricSource::Scorer(s) => {
                        let mut plan = ConditionPlan::new(mode, s.descriptor().clone())?;
                        if mode == PlanMode::QeWithRef {
                            plan = plan.with_reference_dialect(reference_for(config, language)?);
                        }
                        qe_condition_scores(group, &plan, s.as_ref())?
                    }
                    MetricSource::Records { records, .. } => records_for(records, group),
                };
                let spec = AnalysisSpec::against_perturb(&scores.records);
                groups.push(analyze_group(
                    &metric,
                    language,
                    &scores.records,
                    &spec,
                    &scores.dropped,
                    group.len(),
                    config.alpha,
                    config.confidence,
                )?);
                dropped.extend(dropped_rows(&metric, language, &scores.dropped));
                all_records.extend(scores.records);
            }
        }
        apply_bonferroni(&mut groups, config.alpha, config.family_size)?;
        canonical_sort(&mut all_records);
        let mut report = Report::new(metadata, groups, dropped);
        report.metadata.settings.insert("qe.mode".into(), mode.to_string());
        write_report(dir, &report, &all_records)?;
        Ok(summarize_report(&report))
    })
}

#[derive(Debug, Clone, Serialize)]
struct NanoRunSummary<'a> {
    tool: &'static str,
    version: &'static str,
    input: String,
    input_sha256: String,
    output_sha256: String,
    tag_universe: String,
    #[serde(flatten)]
    stats: &'a crate::nano::NanoSummary,
}

/// Builds the dialect-tagged training file and its summary.
pub fn run_nano_build(config: &RunConfig) -> Result<RunOutput> {
    let input = config.dataset_path()?;
    let tag_universe = match &config.tag_universe {
        Some(p) => load_tag_universe(p)?,
        None => crate::nano::default_tag_universe(),
    };
    let nano = NanoConfig {
        sampler: SamplerConfig {
            lambda: config.lambda,
            pos_neg_ratio: config.pos_neg_ratio,
            tag_universe,
            seed: config.seed,
            negative_weights: None,
        },
        shard_size: config.shard_size,
        jobs: config.jobs,
        langid: config.langid_cmd.as_deref().map(|c| config.subprocess(c)),
    };
    nano.sampler.validate()?;
    let documents: Vec<Document> = crate::dataset::read_jsonl_file(input)?;
    let input_sha256 = content_hash(input)?;
    staged(&config.out, |dir| {
        let build = build_examples(&documents, &nano)?;
        let output_sha256 = write_training_file(&dir.join("train.jsonl"), &build.examples)?;
        let summary = NanoRunSummary {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            input: input.display().to_string(),
            input_sha256,
            output_sha256,
            tag_universe: config
                .tag_universe
                .as_ref()
                .map_or_else(|| "bundled".to_owned(), |p| p.display().to_string()),
            stats: &build.summary,
        };
        write_json(&dir.join("summary.json"), &summary)?;
        let s = &build.summary;
        let dropped = s.dropped.iter().map(|(r, n)| format!("{r}={n}")).collect::<Vec<_>>().join(", ");
        Ok(format!(
            "{} examples from {} sentences; positive fraction {:.4}, dialect-tag fraction {:.4}; dropped: {}",
            s.examples,
            s.sentences,
            s.positive_fraction,
            s.dialect_tag_fraction,
            if dropped.is_empty() { "none".to_owned() } else { dropped }
        ))
    })
}

/// Writes the deterministic desk-scale fixtures.
pub fn run_fixtures(config: &RunConfig) -> Result<RunOutput> {
    staged(&config.out, |dir| {
        write_fixtures(dir, config.seed)?;
        Ok(format!("fixtures written with seed {}", config.seed))
    })
}
