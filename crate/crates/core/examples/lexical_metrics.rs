//! Sentence BLEU and chrF on a dialect rewrite versus a meaning change.

use dialectkit::metrics::{bleu_sentence, bleu_sentence_with, chrf_sentence, Tokenization};

pub fn run_example() -> dialectkit::Result<()> {
    let base = "I am going to the market tomorrow.";
    let dialect = "I will be going to the market tomorrow itself.";
    let perturbed = "I am going to the hospital tomorrow.";
    // lexical overlap favours the meaning change over the dialect rewrite
    for (name, candidate) in [("dialect", dialect), ("perturbed", perturbed)] {
        println!(
            "{name:>9}: BLEU {:.4}  chrF {:.4}",
            bleu_sentence(candidate, base).value,
            chrf_sentence(candidate, base)?
        );
    }

    // unsegmented scripts are tokenized per code point
    let zh = bleu_sentence_with("我们明天去市场", "我们明天去超市", Tokenization::Codepoint);
    println!("zh character BLEU: {:.4}", zh.value);
    Ok(())
}

#[allow(dead_code)]
fn main() -> dialectkit::Result<()> {
    run_example()
}
