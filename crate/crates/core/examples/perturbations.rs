//! The built-in meaning-changing perturbations and the preference order used
//! to pick one per example.

use dialectkit::conditions::{perturb_builtin, select_perturbation, PerturbLexicon};
use dialectkit::{MicroExample, PerturbationKind};

pub fn run_example() -> dialectkit::Result<()> {
    let lexicon = PerturbLexicon::default();
    let sentence = "The old bridge was closed for repairs last week.";
    let mut example = MicroExample {
        id: "bridge".into(),
        base: sentence.into(),
        dialect_rewrites: Vec::new(),
        perturbations: Default::default(),
    };
    for kind in PerturbationKind::PREFERENCE {
        match perturb_builtin(sentence, kind, &lexicon, 1) {
            Some(text) => {
                println!("{:>7}: {text}", kind.as_str());
                example.perturbations.insert(kind, text);
            }
            None => println!("{:>7}: not applicable", kind.as_str()),
        }
    }
    if let Some(choice) = select_perturbation(&example) {
        println!("chosen: {} -> {}", choice.chosen_type.as_str(), choice.text);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> dialectkit::Result<()> {
    run_example()
}
