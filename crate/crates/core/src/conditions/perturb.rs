//! Perturbation selection and a small rule-based perturbation provider.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{MicroExample, PerturbationKind};

const BUNDLED_LEXICON: &str = include_str!("../../data/lexicon.json");

/// The perturbation kept for one example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerturbationChoice {
    pub example_id: String,
    pub chosen_type: PerturbationKind,
    pub text: String,
}

/// Picks replace, then insert, then delete. `None` means the example has no
/// usable perturbation and must be excluded.
pub fn select_perturbation(example: &MicroExample) -> Option<PerturbationChoice> {
    select_from(&example.id, &example.perturbations)
}

pub fn select_from(
    example_id: &str,
    perturbations: &BTreeMap<PerturbationKind, String>,
) -> Option<PerturbationChoice> {
    PerturbationKind::PREFERENCE.iter().find_map(|kind| {
        perturbations
            .get(kind)
            .filter(|t| !t.trim().is_empty())
            .map(|text| PerturbationChoice {
                example_id: example_id.to_owned(),
                chosen_type: *kind,
                text: text.clone(),
            })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InsertAnchor {
    /// Modifier goes directly before a content word ("is simple" -> "is not simple").
    #[serde(rename = "content")]
    BeforeContent,
    /// Modifier goes directly after a content word.
    #[serde(rename = "after_content")]
    AfterContent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InsertRule {
    pub modifiers: Vec<String>,
    pub after_pos: InsertAnchor,
}

/// Word lists driving [`perturb_builtin`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerturbLexicon {
    #[serde(default)]
    pub replace: BTreeMap<String, String>,
    #[serde(default = "default_insert")]
    pub insert: InsertRule,
    #[serde(default)]
    pub stopwords: BTreeMap<String, Vec<String>>,
    /// Which stopword list applies.
    #[serde(default = "default_language")]
    pub language: String,
}

fn default_insert() -> InsertRule {
    InsertRule { modifiers: Vec::new(), after_pos: InsertAnchor::BeforeContent }
}

fn default_language() -> String {
    "en".into()
}

impl Default for PerturbLexicon {
    fn default() -> Self {
        serde_json::from_str(BUNDLED_LEXICON).expect("bundled lexicon parses")
    }
}

impl PerturbLexicon {
    /// Loads a lexicon file. Stopword lists it omits fall back to the bundled ones.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lex: PerturbLexicon = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_owned(),
            line: e.line(),
            message: e.to_string(),
        })?;
        for (lang, words) in PerturbLexicon::default().stopwords {
            lex.stopwords.entry(lang).or_insert(words);
        }
        Ok(lex)
    }

    pub fn with_language(mut self, language: &str) -> Self {
        self.language = language.to_owned();
        self
    }

    fn stopword_set(&self) -> HashSet<&str> {
        self.stopwords
            .get(&self.language)
            .map(|v| v.iter().map(String::as_str).collect())
            .unwrap_or_default()
    }
}

/// A token split into its word core and trailing punctuation.
struct Token<'a> {
    core: &'a str,
    tail: &'a str,
}

fn split_token(tok: &str) -> Token<'_> {
    let cut = tok
        .char_indices()
        .rev()
        .take_while(|(_, c)| c.is_ascii_punctuation())
        .last()
        .map_or(tok.len(), |(i, _)| i);
    Token { core: &tok[..cut], tail: &tok[cut..] }
}

fn match_case(template: &str, word: &str) -> String {
    let mut chars = word.chars();
    match (template.chars().next(), chars.next()) {
        (Some(t), Some(first)) if t.is_uppercase() => first.to_uppercase().chain(chars).collect(),
        _ => word.to_owned(),
    }
}

/// Applies one perturbation of `kind` to `sentence`.
///
/// Returns `None` when the perturbation does not apply. Otherwise the output
/// differs from the input, and the same seed gives the same output.
pub fn perturb_builtin(
    sentence: &str,
    kind: PerturbationKind,
    lexicon: &PerturbLexicon,
    seed: u64,
) -> Option<String> {
    let tokens: Vec<&str> = sentence.split_whitespace().collect();
    if tokens.is_empty() {
        return None;
    }
    let stop = lexicon.stopword_set();
    let is_content = |tok: &str| {
        let core = split_token(tok).core;
        !core.is_empty()
            && core.chars().any(char::is_alphanumeric)
            && !stop.contains(core.to_lowercase().as_str())
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let out: Vec<String> = match kind {
        PerturbationKind::Delete => {
            if tokens.len() < 3 {
                return None;
            }
            let candidates: Vec<usize> = (0..tokens.len()).filter(|&i| is_content(tokens[i])).collect();
            if candidates.is_empty() {
                return None;
            }
            let drop = candidates[rng.gen_range(0..candidates.len())];
            tokens
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != drop)
                .map(|(_, t)| (*t).to_owned())
                .collect()
        }
        PerturbationKind::Replace => {
            let candidates: Vec<(usize, &String)> = tokens
                .iter()
                .enumerate()
                .filter_map(|(i, t)| {
                    let core = split_token(t).core.to_lowercase();
                    lexicon.replace.get(&core).map(|sub| (i, sub))
                })
                .filter(|(i, sub)| split_token(tokens[*i]).core.to_lowercase() != sub.to_lowercase())
                .collect();
            if candidates.is_empty() {
                return None;
            }
            let (at, sub) = candidates[rng.gen_range(0..candidates.len())];
            let tok = split_token(tokens[at]);
            let replacement = format!("{}{}", match_case(tok.core, sub), tok.tail);
            let mut out: Vec<String> = tokens.iter().map(|t| (*t).to_owned()).collect();
            out[at] = replacement;
            out
        }
        PerturbationKind::Insert => {
            if lexicon.insert.modifiers.is_empty() {
                return None;
            }
            let candidates: Vec<usize> = (0..tokens.len()).filter(|&i| is_content(tokens[i])).collect();
            if candidates.is_empty() {
                return None;
            }
            let anchor = candidates[rng.gen_range(0..candidates.len())];
            let modifier = &lexicon.insert.modifiers[rng.gen_range(0..lexicon.insert.modifiers.len())];
            let at = match lexicon.insert.after_pos {
                InsertAnchor::BeforeContent => anchor,
                InsertAnchor::AfterContent => anchor + 1,
            };
            let mut out: Vec<String> = tokens.iter().map(|t| (*t).to_owned()).collect();
            out.insert(at, modifier.clone());
            out
        }
    };

    let joined = out.join(" ");
    (out.iter().map(String::as_str).ne(tokens.iter().copied()) && joined != sentence).then_some(joined)
}
