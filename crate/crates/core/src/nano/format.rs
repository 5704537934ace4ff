use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::sampler::{Polarity, SampledTag, TagKind};
use crate::error::{Error, Result};
use crate::model::DialectTag;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormatMode {
    Pretrain,
    Within,
    Qe,
    QeWithRef,
}

impl FormatMode {
    pub fn as_str(self) -> &'static str {
        match self {
            FormatMode::Pretrain => "pretrain",
            FormatMode::Within => "within",
            FormatMode::Qe => "qe",
            FormatMode::QeWithRef => "qe_with_ref",
        }
    }
}

impl fmt::Display for FormatMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FormatMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pretrain" => Ok(FormatMode::Pretrain),
            "within" => Ok(FormatMode::Within),
            "qe" => Ok(FormatMode::Qe),
            "qe_with_ref" => Ok(FormatMode::QeWithRef),
            other => Err(Error::Config(format!("unknown format mode {other:?}"))),
        }
    }
}

/// Builds the model input string for one candidate sentence and tag.
pub fn format_input(
    mode: FormatMode,
    sentence: &str,
    tag: &DialectTag,
    reference: Option<&str>,
    source: Option<&str>,
) -> Result<String> {
    let need = |field: &'static str, value: Option<&str>| {
        value.map(str::to_owned).ok_or(Error::MissingField { mode: mode.as_str().into(), field: field.into() })
    };
    Ok(match mode {
        FormatMode::Pretrain => format!("candidate: {sentence} language: {tag}"),
        FormatMode::Within => {
            let r = need("reference", reference)?;
            format!("candidate: {sentence} reference: {r} language: {tag}")
        }
        FormatMode::Qe => {
            let s = need("source", source)?;
            format!("candidate: {sentence} source: {s} language: {tag}")
        }
        FormatMode::QeWithRef => {
            let r = need("reference", reference)?;
            let s = need("source", source)?;
            format!("candidate: {sentence} reference: {r} source: {s} language: {tag}")
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleMeta {
    pub gold_tag: DialectTag,
    pub sampled_tag: DialectTag,
    pub tag_kind: TagKind,
}

/// One line of the training file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedTrainingExample {
    pub input: String,
    pub target: String,
    pub meta: ExampleMeta,
}

impl TaggedTrainingExample {
    pub fn polarity(&self) -> Polarity {
        if self.target == "1" {
            Polarity::Positive
        } else {
            Polarity::Negative
        }
    }
}

/// Pretraining example for a sentence with a resolved gold tag.
pub fn format_training_example(sentence: &str, gold: &DialectTag, sampled: &SampledTag) -> TaggedTrainingExample {
    TaggedTrainingExample {
        input: format!("candidate: {sentence} language: {}", sampled.tag),
        target: sampled.polarity.target().to_owned(),
        meta: ExampleMeta {
            gold_tag: gold.clone(),
            sampled_tag: sampled.tag.clone(),
            tag_kind: sampled.kind,
        },
    }
}
