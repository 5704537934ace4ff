use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};

/// Exact `P(X >= wins)` for `X ~ Binomial(trials, 1/2)`.
///
/// Terms are evaluated in log space so `trials` can run into the millions.
/// Results too small for an `f64` are reported as the smallest positive
/// value; use [`binomial_one_tailed_ln`] when the magnitude matters.
pub fn binomial_one_tailed(wins: u64, trials: u64) -> Result<f64> {
    check(wins, trials)?;
    if wins == 0 {
        return Ok(1.0);
    }
    let p = if 2 * wins > trials {
        upper_tail(wins, trials)
    } else {
        // P(X >= w) = 1 - P(X <= w - 1) = 1 - P(X >= n - w + 1) by symmetry.
        1.0 - upper_tail(trials - wins + 1, trials)
    };
    Ok(p.clamp(f64::MIN_POSITIVE, 1.0))
}

/// Natural log of [`binomial_one_tailed`], accurate deep into the tail.
pub fn binomial_one_tailed_ln(wins: u64, trials: u64) -> Result<f64> {
    check(wins, trials)?;
    if wins == 0 {
        return Ok(0.0);
    }
    if 2 * wins <= trials {
        return Ok(binomial_one_tailed(wins, trials)?.ln());
    }
    let ln_half = -(trials as f64) * std::f64::consts::LN_2;
    let lead = ln_binomial(trials, wins);
    // Sum of C(n,k)/C(n,w) for k >= w, accumulated smallest first.
    let sum: f64 = (wins..=trials)
        .rev()
        .map(|k| (ln_binomial(trials, k) - lead).exp())
        .sum();
    Ok(lead + sum.ln() + ln_half)
}

fn check(wins: u64, trials: u64) -> Result<()> {
    if wins > trials {
        Err(Error::Stats(format!("wins ({wins}) exceed trials ({trials})")))
    } else {
        Ok(())
    }
}

/// Tail sum for `from > trials / 2`, where terms shrink as k grows.
/// Summing from k = trials downward adds the largest terms last, so the
/// result is monotone in `from`.
fn upper_tail(from: u64, trials: u64) -> f64 {
    let ln_half = -(trials as f64) * std::f64::consts::LN_2;
    (from..=trials)
        .rev()
        .map(|k| (ln_binomial(trials, k) + ln_half).exp())
        .sum()
}
