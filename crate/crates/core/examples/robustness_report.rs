//! The full robustness report for one metric on a micro dataset, built from
//! library calls rather than the command line.

use dialectkit::conditions::micro_condition_scores;
use dialectkit::fixtures::adversarial_micro;
use dialectkit::metrics::{ChrfConfig, ChrfScorer};
use dialectkit::report::{analyze_group, apply_bonferroni, AnalysisSpec, Report, ReportMetadata};

pub fn run_example() -> dialectkit::Result<()> {
    let examples = adversarial_micro(40, 7)?;
    let scored = micro_condition_scores(&examples, &ChrfScorer::new(ChrfConfig::default()), None)?;
    println!("{} records, {} examples dropped upstream", scored.records.len(), scored.dropped.len());

    let mut metadata = ReportMetadata::new("robustness");
    metadata.seed = 7;
    metadata.metrics = vec!["chrf".into()];
    let mut groups = vec![analyze_group(
        "chrf",
        "en",
        &scored.records,
        &AnalysisSpec::micro(),
        &scored.dropped,
        examples.len(),
        metadata.alpha,
        metadata.confidence,
    )?];
    apply_bonferroni(&mut groups, metadata.alpha, None)?;

    let report = Report::new(metadata, groups, Vec::new());
    print!("{}", report.to_markdown());
    print!("{}", report.to_csv()?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> dialectkit::Result<()> {
    run_example()
}
