//! Quality-estimation conditions: a source-based toy metric scores every
//! dialect, the MT output and the perturbed MT output against the English source.

use dialectkit::conditions::{qe_condition_scores, ConditionPlan, PlanMode};
use dialectkit::fixtures::sentence_fixture;
use dialectkit::metrics::{MetricDescriptor, MetricRequest, Scorer};
use dialectkit::report::{analyze_group, AnalysisSpec};

/// Rewards candidates whose length tracks the source length.
struct LengthRatio {
    descriptor: MetricDescriptor,
}

impl Scorer for LengthRatio {
    fn descriptor(&self) -> &MetricDescriptor {
        &self.descriptor
    }

    fn score_batch(&self, requests: &[MetricRequest]) -> dialectkit::Result<Vec<f64>> {
        Ok(requests
            .iter()
            .map(|r| {
                let src = r.source.as_deref().unwrap_or_default().split_whitespace().count() as f64;
                let cand = r.candidate.split_whitespace().count() as f64;
                src.min(cand) / src.max(cand).max(1.0)
            })
            .collect())
    }
}

pub fn run_example() -> dialectkit::Result<()> {
    let scorer = LengthRatio {
        descriptor: MetricDescriptor {
            name: "length_ratio".into(),
            needs_reference: false,
            needs_source: true,
            accepts_tag: false,
            range_hint: Some((0.0, 1.0)),
        },
    };
    let portuguese: Vec<_> = sentence_fixture().into_iter().filter(|e| e.language() == Some("pt")).collect();
    let plan = ConditionPlan::new(PlanMode::Qe, scorer.descriptor.clone())?;
    let scored = qe_condition_scores(&portuguese, &plan, &scorer)?;

    let spec = AnalysisSpec::against_perturb(&scored.records);
    let group = analyze_group("length_ratio", "pt", &scored.records, &spec, &scored.dropped, portuguese.len(), 0.05, 0.99)?;
    for row in &group.rows {
        println!(
            "{}: {:+.4} (SE {:.4}), wins {} losses {} ties {}",
            row.comparison, row.estimate, row.standard_error, row.win_loss.wins, row.win_loss.losses, row.win_loss.ties
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> dialectkit::Result<()> {
    run_example()
}
