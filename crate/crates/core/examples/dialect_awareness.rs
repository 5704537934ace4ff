//! Does a metric prefer the input tag that matches the candidate's dialect?
//!
//! A toy tag-aware scorer that knows a few Brazilian and European Portuguese
//! words is compared with tag-blind chrF.

use dialectkit::metrics::{chrf_sentence, MetricDescriptor, MetricRequest, Scorer};
use dialectkit::stats::{awareness_eval, AwarenessRecord};
use dialectkit::DialectTag;

struct LexiconScorer {
    descriptor: MetricDescriptor,
}

impl LexiconScorer {
    fn new() -> Self {
        Self {
            descriptor: MetricDescriptor {
                name: "lexicon".into(),
                needs_reference: false,
                needs_source: false,
                accepts_tag: true,
                range_hint: Some((0.0, 1.0)),
            },
        }
    }
}

impl Scorer for LexiconScorer {
    fn descriptor(&self) -> &MetricDescriptor {
        &self.descriptor
    }

    fn score_batch(&self, requests: &[MetricRequest]) -> dialectkit::Result<Vec<f64>> {
        Ok(requests
            .iter()
            .map(|r| {
                let words: &[&str] = match r.language_tag.as_ref().and_then(DialectTag::region_code) {
                    Some("BR") => &["ônibus", "trem", "celular"],
                    Some("PT") => &["autocarro", "comboio", "telemóvel"],
                    _ => &[],
                };
                let hits = words.iter().filter(|w| r.candidate.contains(*w)).count();
                0.5 + 0.5 * hits as f64 / words.len().max(1) as f64
            })
            .collect())
    }
}

pub fn run_example() -> dialectkit::Result<()> {
    let br: DialectTag = "pt-BR".parse()?;
    let pt: DialectTag = "pt-PT".parse()?;
    let candidates = [
        (&br, "Perdi o ônibus e o trem hoje.", "Perdi o autocarro e o comboio hoje."),
        (&pt, "Deixei o telemóvel no comboio.", "Deixei o celular no trem."),
    ];

    let scorer = LexiconScorer::new();
    let mut lexicon_records = Vec::new();
    let mut chrf_records = Vec::new();
    for (i, (dialect, text, other)) in candidates.iter().enumerate() {
        for tag in [&br, &pt] {
            let req = MetricRequest::new(format!("c{i}"), *text).with_tag(Some(tag.clone()));
            let score = scorer.score_batch(std::slice::from_ref(&req))?[0];
            lexicon_records.push(AwarenessRecord { candidate_dialect: (*dialect).clone(), input_tag: tag.clone(), score });
            // chrF never sees the tag, so its score cannot depend on it
            let blind = chrf_sentence(text, other)?;
            chrf_records.push(AwarenessRecord { candidate_dialect: (*dialect).clone(), input_tag: tag.clone(), score: blind });
        }
    }

    for (name, records) in [("lexicon", &lexicon_records), ("chrf", &chrf_records)] {
        for row in awareness_eval(records)? {
            let means: Vec<String> = row.scores_by_input_tag.iter().map(|(t, s)| format!("{t}={s:.3}")).collect();
            println!("{name} {}: {} aware={}", row.candidate_dialect, means.join(" "), row.aware);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> dialectkit::Result<()> {
    run_example()
}
