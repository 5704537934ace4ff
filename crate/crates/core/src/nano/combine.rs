use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{DialectTag, Region};

/// Languages whose identifier already predicts a locale.
pub const LOCALE_BEARING: [&str; 2] = ["zh", "pt"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSentence {
    pub text: String,
    pub langid_tag: DialectTag,
    pub url_region: Option<String>,
    pub gold_tag: DialectTag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    /// Identifier locale and URL region both present but different.
    LocaleDisagreement,
    /// No region could be read off the URL (generic TLD or unparseable).
    MissingRegion,
    /// Locale-bearing language predicted without a locale.
    MissingLocale,
    /// No identifier label supplied for the sentence.
    MissingLangid,
}

impl DropReason {
    pub fn as_str(self) -> &'static str {
        match self {
            DropReason::LocaleDisagreement => "locale_disagreement",
            DropReason::MissingRegion => "missing_region",
            DropReason::MissingLocale => "missing_locale",
            DropReason::MissingLangid => "missing_langid",
        }
    }
}

impl fmt::Display for DropReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Resolves the gold dialect of a sentence from its identifier label and URL region.
pub fn combine_langid_region(
    sentence: &str,
    langid_tag: &DialectTag,
    url_region: Option<&str>,
) -> Result<LabeledSentence, DropReason> {
    let region = url_region.ok_or(DropReason::MissingRegion)?;
    let gold = if LOCALE_BEARING.contains(&langid_tag.primary_language()) {
        let predicted = langid_tag.region_code().ok_or(DropReason::MissingLocale)?;
        if predicted != region {
            return Err(DropReason::LocaleDisagreement);
        }
        langid_tag.clone()
    } else {
        DialectTag::new(langid_tag.language(), Some(Region::Code(region.to_owned())))
            .map_err(|_| DropReason::MissingRegion)?
    };
    Ok(LabeledSentence {
        text: sentence.to_owned(),
        langid_tag: langid_tag.clone(),
        url_region: Some(region.to_owned()),
        gold_tag: gold,
    })
}
