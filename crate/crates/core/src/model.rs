//! Domain types: dialect tags, score conditions, dataset records, and score records.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Region part of a [`DialectTag`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    /// The `any` wildcard: the general language rather than one dialect.
    Any,
    /// An uppercase two-letter region code such as `BR`.
    Code(String),
}

impl Region {
    pub fn code(code: &str) -> Result<Self> {
        if is_region_code(code) {
            Ok(Region::Code(code.to_owned()))
        } else {
            Err(Error::InvalidTag(code.to_owned()))
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Any => f.write_str("any"),
            Region::Code(c) => f.write_str(c),
        }
    }
}

fn is_region_code(s: &str) -> bool {
    s.len() == 2 && s.bytes().all(|b| b.is_ascii_uppercase())
}

/// A language plus optional region, rendered `pt-BR`, `pt-any`, or just `en`.
///
/// The language part may carry extra BCP-47 subtags (`zh-cmn-Hans`); its first
/// subtag is always a lowercase 2–3 letter code, later subtags 3–8 alphanumerics.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct DialectTag {
    language: String,
    region: Option<Region>,
}

impl DialectTag {
    pub fn new(language: &str, region: Option<Region>) -> Result<Self> {
        validate_language(language)?;
        Ok(Self {
            language: language.to_owned(),
            region,
        })
    }

    /// `<language>-any`.
    pub fn any(language: &str) -> Result<Self> {
        Self::new(language, Some(Region::Any))
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    /// First subtag of the language (`zh` for `zh-cmn-Hans`).
    pub fn primary_language(&self) -> &str {
        self.language.split('-').next().unwrap_or(&self.language)
    }

    pub fn region(&self) -> Option<&Region> {
        self.region.as_ref()
    }

    pub fn region_code(&self) -> Option<&str> {
        match &self.region {
            Some(Region::Code(c)) => Some(c),
            _ => None,
        }
    }

    /// True when the tag names a concrete region (a dialect, not `-any`).
    pub fn is_dialect(&self) -> bool {
        matches!(self.region, Some(Region::Code(_)))
    }

    pub fn is_language_wildcard(&self) -> bool {
        matches!(self.region, Some(Region::Any))
    }

    /// The general-language form of this tag.
    pub fn to_language_any(&self) -> DialectTag {
        DialectTag {
            language: self.language.clone(),
            region: Some(Region::Any),
        }
    }

    pub fn same_language(&self, other: &DialectTag) -> bool {
        self.language == other.language
    }
}

fn validate_language(language: &str) -> Result<()> {
    let mut parts = language.split('-');
    let primary = parts.next().unwrap_or_default();
    let primary_ok = (2..=3).contains(&primary.len())
        && primary.bytes().all(|b| b.is_ascii_lowercase());
    let rest_ok = parts.all(|p| (3..=8).contains(&p.len()) && p.bytes().all(|b| b.is_ascii_alphanumeric()));
    if primary_ok && rest_ok {
        Ok(())
    } else {
        Err(Error::InvalidTag(language.to_owned()))
    }
}

impl FromStr for DialectTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidTag(s.to_owned());
        if s.is_empty() {
            return Err(bad());
        }
        let (head, last) = match s.rsplit_once('-') {
            Some((head, last)) => (head, last),
            None => return DialectTag::new(s, None).map_err(|_| bad()),
        };
        let region = if last == "any" {
            Some(Region::Any)
        } else if is_region_code(last) {
            Some(Region::Code(last.to_owned()))
        } else {
            None
        };
        let language = if region.is_some() { head } else { s };
        DialectTag::new(language, region).map_err(|_| bad())
    }
}

impl TryFrom<String> for DialectTag {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<DialectTag> for String {
    fn from(t: DialectTag) -> Self {
        t.to_string()
    }
}

impl fmt::Display for DialectTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.region {
            Some(r) => write!(f, "{}-{}", self.language, r),
            None => f.write_str(&self.language),
        }
    }
}

/// The three semantic perturbation types, declared in selection-preference order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerturbationKind {
    Replace,
    Insert,
    Delete,
}

impl PerturbationKind {
    pub const PREFERENCE: [PerturbationKind; 3] = [
        PerturbationKind::Replace,
        PerturbationKind::Insert,
        PerturbationKind::Delete,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PerturbationKind::Replace => "replace",
            PerturbationKind::Insert => "insert",
            PerturbationKind::Delete => "delete",
        }
    }
}

impl FromStr for PerturbationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "replace" => Ok(PerturbationKind::Replace),
            "insert" => Ok(PerturbationKind::Insert),
            "delete" => Ok(PerturbationKind::Delete),
            other => Err(Error::InvalidCondition(format!("perturb:{other}"))),
        }
    }
}

impl fmt::Display for PerturbationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConditionKind {
    Dialect,
    Perturb,
    Mt,
    Base,
}

impl ConditionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ConditionKind::Dialect => "dialect",
            ConditionKind::Perturb => "perturb",
            ConditionKind::Mt => "mt",
            ConditionKind::Base => "base",
        }
    }
}

/// The role a scored text pair plays in the statistical design.
///
/// Spelled `dialect`, `perturb`, `mt`, `base`, optionally followed by
/// `:<detail>` (`dialect:pt-PT`, `perturb:replace`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Condition {
    kind: ConditionKind,
    detail: Option<String>,
}

impl Condition {
    pub fn new(kind: ConditionKind, detail: Option<String>) -> Result<Self> {
        if let Some(d) = &detail {
            if d.is_empty() || d.contains(char::is_whitespace) {
                return Err(Error::InvalidCondition(format!("{}:{d}", kind.as_str())));
            }
            if kind == ConditionKind::Perturb {
                d.parse::<PerturbationKind>()?;
            }
        }
        Ok(Self { kind, detail })
    }

    pub fn dialect() -> Self {
        Self { kind: ConditionKind::Dialect, detail: None }
    }

    pub fn dialect_tag(tag: &DialectTag) -> Self {
        Self { kind: ConditionKind::Dialect, detail: Some(tag.to_string()) }
    }

    pub fn perturb() -> Self {
        Self { kind: ConditionKind::Perturb, detail: None }
    }

    pub fn mt() -> Self {
        Self { kind: ConditionKind::Mt, detail: None }
    }

    pub fn base() -> Self {
        Self { kind: ConditionKind::Base, detail: None }
    }

    pub fn kind(&self) -> ConditionKind {
        self.kind
    }

    pub fn detail(&self) -> Option<&str> {
        self.detail.as_deref()
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, detail) = match s.split_once(':') {
            Some((k, d)) => (k, Some(d.to_owned())),
            None => (s, None),
        };
        let kind = match kind {
            "dialect" => ConditionKind::Dialect,
            "perturb" => ConditionKind::Perturb,
            "mt" => ConditionKind::Mt,
            "base" => ConditionKind::Base,
            _ => return Err(Error::InvalidCondition(s.to_owned())),
        };
        Condition::new(kind, detail).map_err(|_| Error::InvalidCondition(s.to_owned()))
    }
}

impl TryFrom<String> for Condition {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Condition> for String {
    fn from(c: Condition) -> Self {
        c.to_string()
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.detail {
            Some(d) => write!(f, "{}:{d}", self.kind.as_str()),
            None => f.write_str(self.kind.as_str()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DialectRewrite {
    pub feature: String,
    pub text: String,
}

/// A base sentence with its dialect-feature rewrites and semantic perturbations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MicroExample {
    pub id: String,
    pub base: String,
    pub dialect_rewrites: Vec<DialectRewrite>,
    /// Perturbations that succeeded. Failed ones are simply absent.
    #[serde(default, deserialize_with = "de_perturbations")]
    pub perturbations: BTreeMap<PerturbationKind, String>,
}

fn de_perturbations<'de, D>(d: D) -> std::result::Result<BTreeMap<PerturbationKind, String>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    let raw: BTreeMap<PerturbationKind, Option<String>> = BTreeMap::deserialize(d)?;
    Ok(raw
        .into_iter()
        .filter_map(|(k, v)| v.filter(|t| !t.trim().is_empty()).map(|t| (k, t)))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MtOutput {
    /// The locale the MT system most strongly targets.
    pub locale: DialectTag,
    pub text: String,
}

/// An English source with parallel human translations into two or more dialects.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceExample {
    pub id: String,
    pub english: String,
    pub translations: BTreeMap<DialectTag, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mt: Option<MtOutput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbed_english: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbed_mt: Option<String>,
}

impl SentenceExample {
    /// Language shared by the translation tags, if they agree.
    pub fn language(&self) -> Option<&str> {
        let mut langs = self.translations.keys().map(DialectTag::language);
        let first = langs.next()?;
        langs.all(|l| l == first).then_some(first)
    }
}

/// One metric score: the atom every statistic is computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub metric: String,
    pub example_id: String,
    pub condition: Condition,
    pub score: f64,
}

impl ScoreRecord {
    pub fn new(metric: &str, example_id: &str, condition: Condition, score: f64) -> Result<Self> {
        if !score.is_finite() {
            return Err(Error::Metric(format!(
                "non-finite score {score} for ({metric}, {example_id}, {condition})"
            )));
        }
        Ok(Self {
            metric: metric.to_owned(),
            example_id: example_id.to_owned(),
            condition,
            score,
        })
    }
}

/// Sorts records by (example id, condition), the canonical output order.
pub fn canonical_sort(records: &mut [ScoreRecord]) {
    records.sort_by(|a, b| {
        a.metric
            .cmp(&b.metric)
            .then_with(|| a.example_id.as_bytes().cmp(b.example_id.as_bytes()))
            .then_with(|| a.condition.cmp(&b.condition))
    });
}
