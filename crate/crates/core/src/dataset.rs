//! Dataset ingestion, validation, and complete-case filtering.
//!
//! Datasets are JSON Lines: one record per line, blank lines ignored. All text
//! fields are NFC-normalized on the way in.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::BufRead;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{DialectTag, MicroExample, PerturbationKind, ScoreRecord, SentenceExample, Condition};
use crate::text::nfc;

/// A parsed dataset of either kind.
#[derive(Debug, Clone)]
pub enum Dataset {
    Micro(Vec<MicroExample>),
    Sentence(Vec<SentenceExample>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    Micro,
    Sentence,
}

impl std::str::FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "micro" => Ok(DatasetKind::Micro),
            "sentence" => Ok(DatasetKind::Sentence),
            other => Err(Error::Config(format!("unknown dataset kind {other:?}"))),
        }
    }
}

/// Parses JSON Lines from `reader`; `origin` is used in error messages.
pub fn read_jsonl<T: DeserializeOwned>(reader: impl BufRead, origin: &Path) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: origin.to_owned(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        out.push(value);
    }
    Ok(out)
}

pub fn read_jsonl_file<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_jsonl(std::io::BufReader::new(file), path)
}

/// Writes one JSON object per line.
pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let mut buf = String::new();
    for item in items {
        buf.push_str(&serde_json::to_string(item)?);
        buf.push('\n');
    }
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn load_micro(path: &Path) -> Result<Vec<MicroExample>> {
    Ok(read_jsonl_file::<MicroExample>(path)?
        .into_iter()
        .map(normalize_micro)
        .collect())
}

pub fn load_sentence(path: &Path) -> Result<Vec<SentenceExample>> {
    Ok(read_jsonl_file::<SentenceExample>(path)?
        .into_iter()
        .map(normalize_sentence)
        .collect())
}

pub fn load_dataset(path: &Path, kind: DatasetKind) -> Result<Dataset> {
    match kind {
        DatasetKind::Micro => load_micro(path).map(Dataset::Micro),
        DatasetKind::Sentence => load_sentence(path).map(Dataset::Sentence),
    }
}

pub fn normalize_micro(mut ex: MicroExample) -> MicroExample {
    ex.base = nfc(&ex.base);
    for r in &mut ex.dialect_rewrites {
        r.text = nfc(&r.text);
    }
    for text in ex.perturbations.values_mut() {
        *text = nfc(text);
    }
    ex
}

pub fn normalize_sentence(mut ex: SentenceExample) -> SentenceExample {
    ex.english = nfc(&ex.english);
    for text in ex.translations.values_mut() {
        *text = nfc(text);
    }
    if let Some(mt) = &mut ex.mt {
        mt.text = nfc(&mt.text);
    }
    ex.perturbed_english = ex.perturbed_english.as_deref().map(nfc);
    ex.perturbed_mt = ex.perturbed_mt.as_deref().map(nfc);
    ex
}

/// Hex SHA-256 of a file's bytes, embedded in report headers.
pub fn content_hash(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    DuplicateId,
    EmptyText { field: String },
    NoDialectRewrite,
    PerturbationEqualsBase(PerturbationKind),
    TooFewDialects,
    CrossLanguage { tags: Vec<String> },
    MtLocaleMismatch { locale: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub example_id: String,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let id = &self.example_id;
        match &self.kind {
            ViolationKind::DuplicateId => write!(f, "{id}: duplicate id"),
            ViolationKind::EmptyText { field } => write!(f, "{id}: empty text in {field}"),
            ViolationKind::NoDialectRewrite => write!(f, "{id}: no dialect rewrite"),
            ViolationKind::PerturbationEqualsBase(k) => {
                write!(f, "{id}: {k} perturbation identical to base")
            }
            ViolationKind::TooFewDialects => write!(f, "{id}: fewer than two dialect translations"),
            ViolationKind::CrossLanguage { tags } => {
                write!(f, "{id}: translations span languages ({})", tags.join(", "))
            }
            ViolationKind::MtLocaleMismatch { locale } => {
                write!(f, "{id}: mt locale {locale} does not match translation language")
            }
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_empty() {
            return Ok(());
        }
        let lines: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        Err(Error::Config(format!("dataset validation failed: {}", lines.join("; "))))
    }

    fn push(&mut self, id: &str, kind: ViolationKind) {
        self.violations.push(Violation { example_id: id.to_owned(), kind });
    }
}

fn check_duplicates<'a>(ids: impl Iterator<Item = &'a str>, report: &mut ValidationReport) {
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for id in ids {
        let n = seen.entry(id).or_default();
        *n += 1;
        if *n == 2 {
            report.push(id, ViolationKind::DuplicateId);
        }
    }
}

fn check_text(id: &str, field: &str, text: &str, report: &mut ValidationReport) {
    if text.trim().is_empty() {
        report.push(id, ViolationKind::EmptyText { field: field.to_owned() });
    }
}

pub fn validate_micro(examples: &[MicroExample]) -> ValidationReport {
    let mut report = ValidationReport::default();
    check_duplicates(examples.iter().map(|e| e.id.as_str()), &mut report);
    for ex in examples {
        check_text(&ex.id, "base", &ex.base, &mut report);
        if ex.dialect_rewrites.is_empty() {
            report.push(&ex.id, ViolationKind::NoDialectRewrite);
        }
        for (k, r) in ex.dialect_rewrites.iter().enumerate() {
            check_text(&ex.id, &format!("dialect_rewrites[{k}]"), &r.text, &mut report);
        }
        for (kind, text) in &ex.perturbations {
            if *text == ex.base {
                report.push(&ex.id, ViolationKind::PerturbationEqualsBase(*kind));
            }
        }
    }
    report
}

pub fn validate_sentence(examples: &[SentenceExample]) -> ValidationReport {
    let mut report = ValidationReport::default();
    check_duplicates(examples.iter().map(|e| e.id.as_str()), &mut report);
    for ex in examples {
        check_text(&ex.id, "english", &ex.english, &mut report);
        for (tag, text) in &ex.translations {
            check_text(&ex.id, &format!("translations[{tag}]"), text, &mut report);
        }
        if ex.translations.len() < 2 {
            report.push(&ex.id, ViolationKind::TooFewDialects);
        }
        let languages: BTreeSet<&str> = ex.translations.keys().map(DialectTag::language).collect();
        if languages.len() > 1 {
            let tags = ex.translations.keys().map(ToString::to_string).collect();
            report.push(&ex.id, ViolationKind::CrossLanguage { tags });
        }
        if let Some(mt) = &ex.mt {
            check_text(&ex.id, "mt.text", &mt.text, &mut report);
            if languages.len() == 1 && !languages.contains(mt.locale.language()) {
                report.push(&ex.id, ViolationKind::MtLocaleMismatch { locale: mt.locale.to_string() });
            }
        }
        if let Some(t) = &ex.perturbed_mt {
            check_text(&ex.id, "perturbed_mt", t, &mut report);
        }
        if let Some(t) = &ex.perturbed_english {
            check_text(&ex.id, "perturbed_english", t, &mut report);
        }
    }
    report
}

/// Lists every invariant violation in the dataset. The dataset is not modified.
pub fn validate_bundle(dataset: &Dataset) -> ValidationReport {
    match dataset {
        Dataset::Micro(m) => validate_micro(m),
        Dataset::Sentence(s) => validate_sentence(s),
    }
}

/// Keeps only examples that have a score for every `required` condition.
///
/// Kept records come back sorted by (example id, condition); dropped ids are
/// ascending. Example ids compare bytewise.
pub fn complete_case_filter(
    records: &[ScoreRecord],
    required: &BTreeSet<Condition>,
) -> (Vec<ScoreRecord>, Vec<String>) {
    let mut present: BTreeMap<&[u8], BTreeSet<&Condition>> = BTreeMap::new();
    for r in records {
        present.entry(r.example_id.as_bytes()).or_default().insert(&r.condition);
    }
    let complete: BTreeSet<&[u8]> = present
        .iter()
        .filter(|(_, conds)| required.iter().all(|c| conds.contains(c)))
        .map(|(id, _)| *id)
        .collect();
    let dropped = present
        .keys()
        .filter(|id| !complete.contains(*id))
        .map(|id| String::from_utf8_lossy(id).into_owned())
        .collect();
    let mut kept: Vec<ScoreRecord> = records
        .iter()
        .filter(|r| complete.contains(r.example_id.as_bytes()))
        .cloned()
        .collect();
    kept.sort_by(|a, b| {
        a.example_id
            .as_bytes()
            .cmp(b.example_id.as_bytes())
            .then_with(|| a.condition.cmp(&b.condition))
    });
    (kept, dropped)
}

/// Rejects a second score for the same (metric, example, condition).
pub fn check_unique(records: &[ScoreRecord]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for r in records {
        if !seen.insert((&r.metric, &r.example_id, &r.condition)) {
            return Err(Error::DuplicateScore {
                metric: r.metric.clone(),
                example_id: r.example_id.clone(),
                condition: r.condition.to_string(),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn micro_line(id: &str) -> String {
        format!(
            r#"{{"id":"{id}","base":"we have two tailors","dialect_rewrites":[{{"feature":"focus-only","text":"we have two tailors only"}}],"perturbations":{{"replace":"we have three tailors"}}}}"#
        )
    }

    fn parse_micro(text: &str) -> Result<Vec<MicroExample>> {
        read_jsonl(Cursor::new(text), Path::new("fixture.jsonl"))
    }

    #[test]
    fn duplicate_id_is_reported() {
        let text = format!("{}\n{}\n", micro_line("x1"), micro_line("x1"));
        let data = Dataset::Micro(parse_micro(&text).unwrap());
        let report = validate_bundle(&data);
        assert_eq!(
            report.violations,
            vec![Violation { example_id: "x1".into(), kind: ViolationKind::DuplicateId }]
        );
    }

    #[test]
    fn well_formed_fixture_is_clean() {
        let text = ["a", "b", "c"].map(micro_line).join("\n");
        let data = Dataset::Micro(parse_micro(&text).unwrap());
        assert!(validate_bundle(&data).is_empty());
    }

    #[test]
    fn cross_language_translations_are_reported() {
        let line = r#"{"id":"s1","english":"hello","translations":{"pt-BR":"olá","zh-CN":"你好"}}"#;
        let ex: Vec<SentenceExample> = read_jsonl(Cursor::new(line), Path::new("s.jsonl")).unwrap();
        let report = validate_bundle(&Dataset::Sentence(ex));
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v.kind, ViolationKind::CrossLanguage { .. })));
    }

    #[test]
    fn unparseable_line_carries_line_number() {
        let text = format!("{}\n\n{{not json\n", micro_line("a"));
        match parse_micro(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn empty_and_identical_perturbation_flagged() {
        let line = r#"{"id":"e","base":"same","dialect_rewrites":[{"feature":"f","text":" "}],"perturbations":{"delete":"same"}}"#;
        let data = Dataset::Micro(parse_micro(line).unwrap());
        let kinds: Vec<_> = validate_bundle(&data).violations.into_iter().map(|v| v.kind).collect();
        assert!(kinds.contains(&ViolationKind::EmptyText { field: "dialect_rewrites[0]".into() }));
        assert!(kinds.contains(&ViolationKind::PerturbationEqualsBase(PerturbationKind::Delete)));
    }

    #[test]
    fn mt_locale_must_match_language() {
        let line = r#"{"id":"s1","english":"hi","translations":{"pt-BR":"oi","pt-PT":"olá"},"mt":{"locale":"zh-CN","text":"你好"}}"#;
        let ex: Vec<SentenceExample> = read_jsonl(Cursor::new(line), Path::new("s.jsonl")).unwrap();
        let report = validate_sentence(&ex);
        assert!(matches!(report.violations[0].kind, ViolationKind::MtLocaleMismatch { .. }));
    }

    fn rec(id: &str, cond: Condition, score: f64) -> ScoreRecord {
        ScoreRecord::new("chrf", id, cond, score).unwrap()
    }

    fn required_all() -> BTreeSet<Condition> {
        [Condition::dialect(), Condition::perturb(), Condition::mt()].into_iter().collect()
    }

    #[test]
    fn incomplete_example_is_dropped() {
        let mut records = Vec::new();
        for id in ["e1", "e2", "e3"] {
            records.push(rec(id, Condition::dialect(), 0.5));
            records.push(rec(id, Condition::perturb(), 0.4));
            if id != "e2" {
                records.push(rec(id, Condition::mt(), 0.6));
            }
        }
        let (kept, dropped) = complete_case_filter(&records, &required_all());
        assert_eq!(dropped, vec!["e2".to_string()]);
        let ids: BTreeSet<_> = kept.iter().map(|r| r.example_id.as_str()).collect();
        assert_eq!(ids, ["e1", "e3"].into_iter().collect());
        assert_eq!(kept.len(), 6);
    }

    #[test]
    fn empty_requirement_keeps_everything() {
        let records = vec![rec("b", Condition::mt(), 0.1), rec("a", Condition::dialect(), 0.2)];
        let (kept, dropped) = complete_case_filter(&records, &BTreeSet::new());
        assert_eq!(kept.len(), 2);
        assert_eq!(kept[0].example_id, "a");
        assert!(dropped.is_empty());
    }

    #[test]
    fn complete_input_drops_nothing() {
        let records: Vec<_> = ["x", "y"]
            .iter()
            .flat_map(|id| required_all().into_iter().map(move |c| rec(id, c, 0.3)))
            .collect();
        let (kept, dropped) = complete_case_filter(&records, &required_all());
        assert!(dropped.is_empty());
        assert_eq!(kept.len(), 6);
        assert!(complete_case_filter(&[], &required_all()).0.is_empty());
    }

    #[test]
    fn duplicates_rejected() {
        let records = vec![rec("a", Condition::mt(), 0.1), rec("a", Condition::mt(), 0.2)];
        assert!(matches!(check_unique(&records), Err(Error::DuplicateScore { .. })));
    }
}
