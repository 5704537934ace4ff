//! Statistics battery: mixed-effects contrasts, win/loss sign tests with
//! Bonferroni correction, dialect-awareness comparison, and DaRR.

mod awareness;
mod binomial;
mod darr;
mod regression;
mod winloss;

pub use awareness::{awareness_eval, AwarenessRecord, AwarenessRow};
pub use binomial::{binomial_one_tailed, binomial_one_tailed_ln};
pub use darr::{darr, load_human_pairs, HumanPair};
pub use regression::{contrast_with_ci, fit_mixed_effects, ConfidenceInterval, Contrast, RegressionFit};
pub use winloss::{bonferroni, win_loss, BonferroniDecision, WinLoss, WinLossResult};
