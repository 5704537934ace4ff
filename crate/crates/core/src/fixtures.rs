//! Deterministic desk-scale datasets: an adversarial micro set where dialect
//! edits touch more characters than the perturbations, a semantic-oracle
//! score file for it, a small pt/zh sentence set, and NANO input documents.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::conditions::{perturb_builtin, rewrite_id, PerturbLexicon};
use crate::dataset::write_jsonl;
use crate::error::{Error, Result};
use crate::metrics::write_score_file;
use crate::model::{
    Condition, DialectRewrite, DialectTag, MicroExample, MtOutput, PerturbationKind, ScoreRecord, SentenceExample,
};
use crate::nano::Document;

pub const ORACLE_METRIC: &str = "oracle";

fn rewrite(feature: &str, text: String) -> DialectRewrite {
    DialectRewrite { feature: feature.to_owned(), text }
}

/// Base sentence plus Indian-English style rewrites for every slot filling.
fn micro_candidates() -> Vec<(String, Vec<DialectRewrite>)> {
    let mut out = Vec::new();
    for s in ["we", "they"] {
        for num in ["two", "three", "four", "five"] {
            for noun in ["tailors", "doctors", "teachers", "shops"] {
                for place in ["village", "town", "market"] {
                    out.push((
                        format!("{s} have {num} {noun} in the {place}"),
                        vec![
                            rewrite("topicalization+progressive+focus only", format!("in {place} {s} are having {num} {noun} only")),
                            rewrite("progressive+itself", format!("{s} are having {num} {noun} in {place} itself")),
                        ],
                    ));
                }
            }
        }
    }
    for place in ["library", "clinic", "bank", "post office"] {
        for day in ["monday", "friday"] {
            for part in ["morning", "evening"] {
                out.push((
                    format!("the {place} is open on {day} {part}"),
                    vec![rewrite("passive+itself", format!("{place} will be opened on {day} {part} itself"))],
                ));
            }
        }
    }
    for name in ["Ravi", "Priya", "Arjun", "Meena", "Sunil"] {
        for event in ["match", "race", "quiz", "election"] {
            out.push((
                format!("{name} won the {event} last year"),
                vec![rewrite("perfect for past+itself", format!("{name} has won {event} in last year itself"))],
            ));
        }
        for org in ["school", "office"] {
            out.push((
                format!("{name} always comes early to the {org}"),
                vec![rewrite("habitual progressive+itself", format!("{name} is always coming early to {org} itself"))],
            ));
        }
    }
    for exam in ["test", "exam", "paper"] {
        for who in ["students", "children"] {
            out.push((
                format!("the {exam} was easy for most {who}"),
                vec![rewrite("quantifier+intensifier+only", format!("for most of {who} {exam} was very much easy only"))],
            ));
        }
    }
    out
}

/// `n` micro examples, perturbations produced by the built-in provider.
pub fn adversarial_micro(n: usize, seed: u64) -> Result<Vec<MicroExample>> {
    let lexicon = PerturbLexicon::default();
    let mut pool = micro_candidates();
    if n > pool.len() {
        return Err(Error::Config(format!("at most {} adversarial examples available", pool.len())));
    }
    pool.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut examples: Vec<MicroExample> = pool
        .into_iter()
        .take(n)
        .enumerate()
        .map(|(i, (base, dialect_rewrites))| {
            let perturbations = PerturbationKind::PREFERENCE
                .iter()
                .filter_map(|k| perturb_builtin(&base, *k, &lexicon, seed ^ i as u64).map(|t| (*k, t)))
                .collect();
            MicroExample { id: format!("adv{i:03}"), base, dialect_rewrites, perturbations }
        })
        .collect();
    examples.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(examples)
}

/// Scores a semantics-aware judge would give: meaning-preserving rewrites
/// near 0.85, meaning-changing perturbations near 0.35.
pub fn oracle_scores(examples: &[MicroExample], seed: u64) -> Result<Vec<ScoreRecord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for ex in examples {
        if ex.perturbations.is_empty() {
            continue;
        }
        let total = ex.dialect_rewrites.len();
        for k in 1..=total {
            let id = rewrite_id(&ex.id, k, total);
            out.push(ScoreRecord::new(ORACLE_METRIC, &id, Condition::dialect(), 0.85 + rng.gen_range(-0.1..0.1))?);
            out.push(ScoreRecord::new(ORACLE_METRIC, &id, Condition::perturb(), 0.35 + rng.gen_range(-0.1..0.1))?);
        }
    }
    Ok(out)
}

const PT: [[&str; 6]; 8] = [
    ["The bus is late today.", "The bus is early today.", "O ônibus está atrasado hoje.", "O autocarro está atrasado hoje.", "O ônibus está atrasado hoje.", "O ônibus está adiantado hoje."],
    ["I am drinking coffee.", "I am not drinking coffee.", "Estou tomando café.", "Estou a beber café.", "Estou bebendo café.", "Não estou bebendo café."],
    ["Turn on the screen.", "Turn off the screen.", "Ligue a tela.", "Ligue o ecrã.", "Ligue a tela.", "Desligue a tela."],
    ["The train leaves at seven.", "The train leaves at eight.", "O trem sai às sete.", "O comboio parte às sete.", "O trem sai às sete.", "O trem sai às oito."],
    ["My cell phone is broken.", "My cell phone is fixed.", "Meu celular está quebrado.", "O meu telemóvel está avariado.", "Meu celular está quebrado.", "Meu celular está consertado."],
    ["We need a new refrigerator.", "We need an old refrigerator.", "Precisamos de uma geladeira nova.", "Precisamos de um frigorífico novo.", "Precisamos de uma nova geladeira.", "Precisamos de uma geladeira velha."],
    ["She is studying at the university.", "She is teaching at the university.", "Ela está estudando na universidade.", "Ela está a estudar na universidade.", "Ela está estudando na universidade.", "Ela está ensinando na universidade."],
    ["The breakfast was good.", "The breakfast was bad.", "O café da manhã estava bom.", "O pequeno-almoço estava bom.", "O café da manhã foi bom.", "O café da manhã foi ruim."],
];

const ZH: [[&str; 6]; 6] = [
    ["I like this software.", "I do not like this software.", "我喜欢这个软件。", "我喜歡這個軟體。", "我喜欢这个软件。", "我不喜欢这个软件。"],
    ["The network is very fast.", "The network is very slow.", "网络很快。", "網路很快。", "网络非常快。", "网络非常慢。"],
    ["Please print the file.", "Please delete the file.", "请打印文件。", "請列印檔案。", "请打印该文件。", "请删除该文件。"],
    ["The taxi arrived at eight.", "The taxi arrived at nine.", "出租车八点到了。", "計程車八點到了。", "出租车八点到达。", "出租车九点到达。"],
    ["Save the video to the hard disk.", "Delete the video from the hard disk.", "把视频保存到硬盘。", "把影片儲存到硬碟。", "将视频保存到硬盘。", "将视频从硬盘删除。"],
    ["This information is important.", "This information is not important.", "这个信息很重要。", "這個資訊很重要。", "这些信息很重要。", "这些信息不重要。"],
];

/// pt-BR/pt-PT and zh-CN/zh-TW parallel translations with MT targeting the
/// first dialect of each pair.
pub fn sentence_fixture() -> Vec<SentenceExample> {
    let make = |prefix: &str, rows: &[[&str; 6]], a: &str, b: &str| -> Vec<SentenceExample> {
        let (a, b): (DialectTag, DialectTag) = (a.parse().expect("tag"), b.parse().expect("tag"));
        rows.iter()
            .enumerate()
            .map(|(i, [en, pen, ya, yb, mt, pmt])| SentenceExample {
                id: format!("{prefix}{i:02}"),
                english: (*en).to_owned(),
                translations: [(a.clone(), (*ya).to_owned()), (b.clone(), (*yb).to_owned())].into(),
                mt: Some(MtOutput { locale: a.clone(), text: (*mt).to_owned() }),
                perturbed_english: Some((*pen).to_owned()),
                perturbed_mt: Some((*pmt).to_owned()),
            })
            .collect()
    };
    let mut out = make("pt", &PT, "pt-BR", "pt-PT");
    out.extend(make("zh", &ZH, "zh-CN", "zh-TW"));
    out
}

struct Source {
    url: &'static str,
    langid: Option<&'static str>,
    words: &'static [&'static str],
    cjk: bool,
}

const EN: &[&str] = &["the", "market", "opens", "early", "people", "buy", "fresh", "bread", "and", "tea", "every", "day", "our", "team", "won", "again"];
const PTW: &[&str] = &["o", "mercado", "abre", "cedo", "as", "pessoas", "compram", "pão", "fresco", "e", "café", "todo", "dia"];
const DE: &[&str] = &["der", "markt", "öffnet", "früh", "die", "leute", "kaufen", "frisches", "brot", "und", "tee", "jeden", "tag"];
const ZHW: &[&str] = &["市场", "很早", "开门", "人们", "买", "新鲜", "面包", "和", "茶", "每天"];

const SOURCES: &[Source] = &[
    Source { url: "https://news.example.in/a", langid: Some("en"), words: EN, cjk: false },
    Source { url: "https://www.example.co.uk/b", langid: Some("en"), words: EN, cjk: false },
    Source { url: "https://example.com.au/c", langid: Some("en"), words: EN, cjk: false },
    Source { url: "https://example.ie/d", langid: Some("en"), words: EN, cjk: false },
    Source { url: "https://example.com.br/e", langid: Some("pt-BR"), words: PTW, cjk: false },
    Source { url: "https://example.pt/f", langid: Some("pt-PT"), words: PTW, cjk: false },
    Source { url: "https://example.cn/g", langid: Some("zh-CN"), words: ZHW, cjk: true },
    Source { url: "https://example.tw/h", langid: Some("zh-TW"), words: ZHW, cjk: true },
    Source { url: "https://example.de/i", langid: Some("de"), words: DE, cjk: false },
    Source { url: "https://example.at/j", langid: Some("de"), words: DE, cjk: false },
    // dropped: locale disagreement, generic TLD, no identifier label
    Source { url: "https://example.pt/k", langid: Some("pt-BR"), words: PTW, cjk: false },
    Source { url: "https://example.com/l", langid: Some("en"), words: EN, cjk: false },
    Source { url: "https://example.ch/m", langid: None, words: DE, cjk: false },
];

/// Documents holding `sentences` sentences in total, four per document.
pub fn nano_documents(sentences: usize, seed: u64) -> Vec<Document> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut docs = Vec::new();
    let mut remaining = sentences;
    while remaining > 0 {
        let per_doc = remaining.min(4);
        remaining -= per_doc;
        // weight the kept sources ten to one over the dropped ones
        let src = loop {
            let s = &SOURCES[rng.gen_range(0..SOURCES.len())];
            if s.url.ends_with(['k', 'l', 'm']) && rng.gen_range(0..10) > 0 {
                continue;
            }
            break s;
        };
        let text = (0..per_doc)
            .map(|_| {
                let len = rng.gen_range(4..9);
                let words: Vec<&str> = (0..len).map(|_| *src.words.choose(&mut rng).expect("nonempty")).collect();
                if src.cjk {
                    format!("{}。", words.concat())
                } else {
                    let s = words.join(" ");
                    let mut chars = s.chars();
                    let first = chars.next().expect("nonempty").to_uppercase();
                    format!("{first}{}.", chars.as_str())
                }
            })
            .collect::<Vec<_>>()
            .join(if src.cjk { "" } else { " " });
        docs.push(Document {
            url: src.url.to_owned(),
            text,
            langid_tag: src.langid.map(|t| t.parse().expect("tag")),
        });
    }
    docs
}

#[derive(Debug, Clone, Serialize)]
pub struct FixturePaths {
    pub micro: PathBuf,
    pub oracle_scores: PathBuf,
    pub sentence: PathBuf,
    pub nano_documents: PathBuf,
    pub lexicon: PathBuf,
}

/// Writes every fixture under `dir`.
pub fn write_fixtures(dir: &Path, seed: u64) -> Result<FixturePaths> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths = FixturePaths {
        micro: dir.join("micro_adversarial.jsonl"),
        oracle_scores: dir.join("oracle_scores.tsv"),
        sentence: dir.join("sentence.jsonl"),
        nano_documents: dir.join("nano_documents.jsonl"),
        lexicon: dir.join("lexicon.json"),
    };
    let micro = adversarial_micro(100, seed)?;
    write_jsonl(&paths.micro, &micro)?;
    write_score_file(&paths.oracle_scores, &oracle_scores(&micro, seed)?)?;
    write_jsonl(&paths.sentence, &sentence_fixture())?;
    write_jsonl(&paths.nano_documents, &nano_documents(10_000, seed))?;
    let lexicon = serde_json::to_string_pretty(&PerturbLexicon::default())?;
    std::fs::write(&paths.lexicon, lexicon + "\n").map_err(|e| Error::io(&paths.lexicon, e))?;
    Ok(paths)
}
