use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::combine::{combine_langid_region, DropReason};
use super::format::{format_training_example, TaggedTrainingExample};
use super::region::extract_region_from_url;
use super::sampler::{Polarity, SamplerConfig, TagKind, TagSampler};
use super::split::split_sentences;
use crate::error::{Error, Result};
use crate::metrics::{run_line_protocol, SubprocessConfig};
use crate::model::DialectTag;
use crate::text::nfc;

/// One input document line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub url: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub langid_tag: Option<DialectTag>,
}

#[derive(Debug, Clone)]
pub struct NanoConfig {
    pub sampler: SamplerConfig,
    /// Documents per shard. Shard boundaries, and therefore output, do not
    /// depend on the number of worker threads.
    pub shard_size: usize,
    pub jobs: Option<usize>,
    /// Labels sentences whose document carries no `langid_tag`.
    pub langid: Option<SubprocessConfig>,
}

impl Default for NanoConfig {
    fn default() -> Self {
        Self {
            sampler: SamplerConfig::default(),
            shard_size: 256,
            jobs: None,
            langid: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NanoSummary {
    pub documents: usize,
    pub sentences: usize,
    pub kept: usize,
    pub dropped: BTreeMap<DropReason, usize>,
    pub examples: usize,
    pub positive_fraction: f64,
    pub dialect_tag_fraction: f64,
    pub gold_tag_histogram: BTreeMap<String, usize>,
    pub sampled_tag_histogram: BTreeMap<String, usize>,
    pub seed: u64,
    pub lambda: f64,
    pub pos_neg_ratio: f64,
    pub shard_size: usize,
}

#[derive(Debug, Clone)]
pub struct NanoBuild {
    pub examples: Vec<TaggedTrainingExample>,
    pub summary: NanoSummary,
}

struct Sentence {
    text: String,
    langid: Option<DialectTag>,
    url_region: Option<String>,
}

#[derive(Serialize)]
struct LangidRequest<'a> {
    id: String,
    text: &'a str,
}

#[derive(Deserialize)]
struct LangidResponse {
    id: String,
    tag: DialectTag,
}

/// Runs split, label, combine, sample and format over `documents`.
pub fn build_examples(documents: &[Document], config: &NanoConfig) -> Result<NanoBuild> {
    if config.shard_size == 0 {
        return Err(Error::Config("shard size must be positive".into()));
    }
    let sampler = TagSampler::new(config.sampler.clone())?;
    let mut shards: Vec<Vec<Sentence>> = documents
        .chunks(config.shard_size)
        .map(|docs| {
            docs.iter()
                .flat_map(|d| {
                    let region = extract_region_from_url(&d.url);
                    split_sentences(&nfc(&d.text)).into_iter().map(move |text| Sentence {
                        text,
                        langid: d.langid_tag.clone(),
                        url_region: region.clone(),
                    })
                })
                .collect()
        })
        .collect();
    if let Some(adapter) = &config.langid {
        label_with_adapter(&mut shards, adapter)?;
    }

    let run = || {
        shards
            .par_iter()
            .enumerate()
            .map(|(k, sentences)| process_shard(k as u64, sentences, &sampler))
            .collect::<Result<Vec<_>>>()
    };
    let outputs = match config.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(run)?,
        None => run()?,
    };

    let mut examples = Vec::new();
    let mut dropped: BTreeMap<DropReason, usize> = BTreeMap::new();
    for (shard_examples, shard_drops) in outputs {
        examples.extend(shard_examples);
        for (r, n) in shard_drops {
            *dropped.entry(r).or_default() += n;
        }
    }
    let sentences = shards.iter().map(Vec::len).sum::<usize>();
    if examples.is_empty() {
        let breakdown = dropped
            .iter()
            .map(|(r, n)| format!("{r}={n}"))
            .collect::<Vec<_>>()
            .join(", ");
        return Err(Error::NoSurvivors(format!(
            "{sentences} sentences from {} documents, dropped: {breakdown}",
            documents.len()
        )));
    }
    let summary = summarize(&examples, documents.len(), sentences, dropped, config);
    Ok(NanoBuild { examples, summary })
}

fn label_with_adapter(shards: &mut [Vec<Sentence>], adapter: &SubprocessConfig) -> Result<()> {
    let requests: Vec<LangidRequest> = shards
        .iter()
        .enumerate()
        .flat_map(|(k, s)| s.iter().enumerate().map(move |(i, s)| (k, i, s)))
        .filter(|(_, _, s)| s.langid.is_none())
        .map(|(k, i, s)| LangidRequest { id: format!("{k}:{i}"), text: &s.text })
        .collect();
    let mut labels = run_line_protocol::<_, LangidResponse>(adapter, &requests, |r| &r.id, |r| &r.id)?;
    let keys: Vec<String> = requests.into_iter().map(|r| r.id).collect();
    for key in keys {
        let (k, i) = key.split_once(':').expect("ids built above");
        let (k, i): (usize, usize) = (k.parse().expect("shard index"), i.parse().expect("sentence index"));
        shards[k][i].langid = labels.remove(&key).map(|r| r.tag);
    }
    Ok(())
}

type ShardOutput = (Vec<TaggedTrainingExample>, BTreeMap<DropReason, usize>);

fn process_shard(index: u64, sentences: &[Sentence], sampler: &TagSampler) -> Result<ShardOutput> {
    let mut rng = ChaCha8Rng::seed_from_u64(sampler.config().seed);
    rng.set_stream(index);
    let mut examples = Vec::new();
    let mut dropped = BTreeMap::new();
    for s in sentences {
        let labeled = s
            .langid
            .as_ref()
            .ok_or(DropReason::MissingLangid)
            .and_then(|tag| combine_langid_region(&s.text, tag, s.url_region.as_deref()));
        match labeled {
            Ok(l) => {
                let sampled = sampler.sample(&l.gold_tag, &mut rng)?;
                examples.push(format_training_example(&l.text, &l.gold_tag, &sampled));
            }
            Err(reason) => *dropped.entry(reason).or_default() += 1,
        }
    }
    Ok((examples, dropped))
}

fn summarize(
    examples: &[TaggedTrainingExample],
    documents: usize,
    sentences: usize,
    dropped: BTreeMap<DropReason, usize>,
    config: &NanoConfig,
) -> NanoSummary {
    let n = examples.len();
    let positives = examples.iter().filter(|e| e.polarity() == Polarity::Positive).count();
    let dialect = examples.iter().filter(|e| e.meta.tag_kind == TagKind::Dialect).count();
    let mut gold = BTreeMap::new();
    let mut sampled = BTreeMap::new();
    for e in examples {
        *gold.entry(e.meta.gold_tag.to_string()).or_default() += 1;
        *sampled.entry(e.meta.sampled_tag.to_string()).or_default() += 1;
    }
    NanoSummary {
        documents,
        sentences,
        kept: n,
        dropped,
        examples: n,
        positive_fraction: positives as f64 / n as f64,
        dialect_tag_fraction: dialect as f64 / n as f64,
        gold_tag_histogram: gold,
        sampled_tag_histogram: sampled,
        seed: config.sampler.seed,
        lambda: config.sampler.lambda,
        pos_neg_ratio: config.sampler.pos_neg_ratio,
        shard_size: config.shard_size,
    }
}

/// Writes one JSON object per line and returns the file's SHA-256.
pub fn write_training_file(path: &Path, examples: &[TaggedTrainingExample]) -> Result<String> {
    let mut buf = Vec::new();
    for e in examples {
        serde_json::to_writer(&mut buf, e)?;
        buf.push(b'\n');
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&buf).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&buf)))
}
