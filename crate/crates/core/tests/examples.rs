//! Runs every example's `run_example` so the examples stay in working order.

#[path = "../examples/lexical_metrics.rs"]
mod lexical_metrics;

#[path = "../examples/robustness_report.rs"]
mod robustness_report;

#[path = "../examples/regression_and_sign_test.rs"]
mod regression_and_sign_test;

#[path = "../examples/dialect_awareness.rs"]
mod dialect_awareness;

#[path = "../examples/qe_conditions.rs"]
mod qe_conditions;

#[path = "../examples/nano_build.rs"]
mod nano_build;

#[path = "../examples/subprocess_scorer.rs"]
mod subprocess_scorer;

#[path = "../examples/darr_agreement.rs"]
mod darr_agreement;

#[path = "../examples/perturbations.rs"]
mod perturbations;

macro_rules! run {
    ($($name:ident),*) => {$(
        #[test]
        fn $name() {
            $name::run_example().unwrap();
        }
    )*};
}

run!(
    lexical_metrics,
    robustness_report,
    regression_and_sign_test,
    dialect_awareness,
    qe_conditions,
    nano_build,
    subprocess_scorer,
    darr_agreement,
    perturbations
);
