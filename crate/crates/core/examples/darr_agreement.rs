//! Agreement between metric scores and human relative-ranking judgements.

use std::collections::HashMap;

use dialectkit::metrics::chrf_sentence;
use dialectkit::stats::{darr, HumanPair};

pub fn run_example() -> dialectkit::Result<()> {
    let reference = "The committee approved the new budget on Friday.";
    let outputs = [
        ("sys_a", "The committee approved the new budget on Friday."),
        ("sys_b", "On Friday the committee approved the new budget."),
        ("sys_c", "The committee rejected the budget on Friday."),
        ("sys_d", "A budget was Friday."),
    ];
    let mut scores = HashMap::new();
    for (id, text) in outputs {
        scores.insert(id.to_owned(), chrf_sentence(text, reference)?);
    }
    // annotators preferred the first of each pair
    let pairs: Vec<HumanPair> = [("sys_a", "sys_c"), ("sys_b", "sys_c"), ("sys_b", "sys_d"), ("sys_c", "sys_d")]
        .into_iter()
        .map(|(better, worse)| HumanPair { better: better.into(), worse: worse.into() })
        .collect();
    println!("chrF DaRR = {:.3}", darr(&scores, &pairs)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> dialectkit::Result<()> {
    run_example()
}
