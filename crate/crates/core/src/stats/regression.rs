//! Random-intercept regression `score(i, j) = theta_i + phi_j + eps_ij` for a
//! complete design: every example scored under every condition exactly once.
//!
//! For balanced data the closed-form two-way ANOVA estimates coincide with
//! REML, so no iterative fitting is needed:
//!
//! * contrast(j) = mean_i y_ij - mean_i y_i,ref
//! * residual variance = sum (y_ij - ybar_i. - ybar_.j + ybar_..)^2 / ((I-1)(J-1))
//! * intercept variance = max(0, (MS_example - residual variance) / J)
//! * SE(contrast) = sqrt(2 * residual variance / I)

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::model::{Condition, ScoreRecord};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Contrast {
    /// phi_j - phi_ref.
    pub estimate: f64,
    pub standard_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionFit {
    pub conditions: Vec<Condition>,
    pub reference_condition: Condition,
    pub contrasts: BTreeMap<Condition, Contrast>,
    pub condition_means: BTreeMap<Condition, f64>,
    pub grand_mean: f64,
    /// tau^2, clamped at zero.
    pub random_intercept_variance: f64,
    /// tau^2 before clamping; negative when between-example spread is below noise.
    pub raw_random_intercept_variance: f64,
    /// sigma^2.
    pub residual_variance: f64,
    pub n_examples: usize,
    pub n_conditions: usize,
}

impl RegressionFit {
    /// Residual degrees of freedom, (I-1)(J-1).
    pub fn residual_df(&self) -> usize {
        (self.n_examples - 1) * (self.n_conditions - 1)
    }

    /// Standard error of any difference between two condition effects.
    pub fn pairwise_se(&self) -> f64 {
        (2.0 * self.residual_variance / self.n_examples as f64).sqrt()
    }

    pub fn contrast(&self, condition: &Condition) -> Option<&Contrast> {
        self.contrasts.get(condition)
    }
}

/// Fits the model to one metric's records.
///
/// Run [`crate::dataset::complete_case_filter`] first; unbalanced input is
/// rejected with the offending example ids.
pub fn fit_mixed_effects(records: &[ScoreRecord], reference_condition: &Condition) -> Result<RegressionFit> {
    let metrics: BTreeSet<&str> = records.iter().map(|r| r.metric.as_str()).collect();
    if metrics.len() > 1 {
        return Err(Error::Stats(format!(
            "records mix metrics: {}",
            metrics.into_iter().collect::<Vec<_>>().join(", ")
        )));
    }

    let mut table: BTreeMap<&[u8], BTreeMap<&Condition, f64>> = BTreeMap::new();
    let mut duplicated: BTreeSet<&[u8]> = BTreeSet::new();
    for r in records {
        if table
            .entry(r.example_id.as_bytes())
            .or_default()
            .insert(&r.condition, r.score)
            .is_some()
        {
            duplicated.insert(r.example_id.as_bytes());
        }
    }
    let conditions: BTreeSet<&Condition> = table.values().flat_map(|m| m.keys().copied()).collect();
    let offending: Vec<String> = table
        .iter()
        .filter(|(id, row)| duplicated.contains(*id) || row.len() != conditions.len())
        .map(|(id, _)| String::from_utf8_lossy(id).into_owned())
        .collect();
    if !offending.is_empty() {
        return Err(Error::Unbalanced(offending));
    }

    let n_examples = table.len();
    let n_conditions = conditions.len();
    if n_conditions < 2 {
        return Err(Error::Stats(format!("need at least 2 conditions, found {n_conditions}")));
    }
    if n_examples < 2 {
        return Err(Error::Stats(format!("need at least 2 examples, found {n_examples}")));
    }
    if !conditions.contains(reference_condition) {
        return Err(Error::Stats(format!("reference condition {reference_condition} not present")));
    }

    let conds: Vec<&Condition> = conditions.into_iter().collect();
    // rows[i][j] in condition order
    let rows: Vec<Vec<f64>> = table
        .values()
        .map(|row| conds.iter().map(|c| row[c]).collect())
        .collect();

    let i_f = n_examples as f64;
    let j_f = n_conditions as f64;
    let row_means: Vec<f64> = rows.iter().map(|r| r.iter().sum::<f64>() / j_f).collect();
    let col_means: Vec<f64> = (0..n_conditions)
        .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / i_f)
        .collect();
    let grand_mean = row_means.iter().sum::<f64>() / i_f;

    let mut ss_resid = 0.0;
    for (row, rm) in rows.iter().zip(&row_means) {
        for (y, cm) in row.iter().zip(&col_means) {
            let e = y - rm - cm + grand_mean;
            ss_resid += e * e;
        }
    }
    let residual_variance = ss_resid / ((i_f - 1.0) * (j_f - 1.0));
    let ms_example = j_f * row_means.iter().map(|m| (m - grand_mean).powi(2)).sum::<f64>() / (i_f - 1.0);
    let raw_tau2 = (ms_example - residual_variance) / j_f;

    let ref_idx = conds.iter().position(|c| *c == reference_condition).expect("checked");
    let se = (2.0 * residual_variance / i_f).sqrt();
    let contrasts = conds
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let contrast = if j == ref_idx {
                Contrast { estimate: 0.0, standard_error: 0.0 }
            } else {
                // mean of per-example differences
                let diff = rows.iter().map(|r| r[j] - r[ref_idx]).sum::<f64>() / i_f;
                Contrast { estimate: diff, standard_error: se }
            };
            ((*c).clone(), contrast)
        })
        .collect();
    let condition_means = conds.iter().zip(&col_means).map(|(c, m)| ((*c).clone(), *m)).collect();

    Ok(RegressionFit {
        conditions: conds.into_iter().cloned().collect(),
        reference_condition: reference_condition.clone(),
        contrasts,
        condition_means,
        grand_mean,
        random_intercept_variance: raw_tau2.max(0.0),
        raw_random_intercept_variance: raw_tau2,
        residual_variance,
        n_examples,
        n_conditions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConfidenceInterval {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub half_width: f64,
    pub standard_error: f64,
}

/// `phi_j - phi_k` with a two-sided t interval on (I-1)(J-1) degrees of freedom.
pub fn contrast_with_ci(
    fit: &RegressionFit,
    j: &Condition,
    k: &Condition,
    confidence: f64,
) -> Result<ConfidenceInterval> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::Stats(format!("confidence {confidence} outside (0, 1)")));
    }
    let lookup = |c: &Condition| {
        fit.contrasts
            .get(c)
            .ok_or_else(|| Error::Stats(format!("condition {c} not in fit")))
    };
    let estimate = lookup(j)?.estimate - lookup(k)?.estimate;
    let se = fit.pairwise_se();
    let t = StudentsT::new(0.0, 1.0, fit.residual_df() as f64)
        .map_err(|e| Error::Stats(e.to_string()))?
        .inverse_cdf((1.0 + confidence) / 2.0);
    let half_width = t * se;
    Ok(ConfidenceInterval {
        estimate,
        lower: estimate - half_width,
        upper: estimate + half_width,
        half_width,
        standard_error: se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn records(rows: &[(&str, &[(Condition, f64)])]) -> Vec<ScoreRecord> {
        rows.iter()
            .flat_map(|(id, cells)| {
                cells
                    .iter()
                    .map(move |(c, s)| ScoreRecord::new("m", id, c.clone(), *s).unwrap())
            })
            .collect()
    }

    #[test]
    fn constant_scores_give_zero_everything() {
        let cells = [(Condition::dialect(), 0.7), (Condition::perturb(), 0.7), (Condition::mt(), 0.7)];
        let recs = records(&[("a", &cells), ("b", &cells), ("c", &cells)]);
        let fit = fit_mixed_effects(&recs, &Condition::perturb()).unwrap();
        for c in fit.contrasts.values() {
            assert_eq!(c.estimate, 0.0);
        }
        assert_eq!(fit.random_intercept_variance, 0.0);
        assert!(fit.residual_variance < 1e-25);
        let ci = contrast_with_ci(&fit, &Condition::dialect(), &Condition::perturb(), 0.99).unwrap();
        assert!(ci.half_width < 1e-10);
    }

    #[test]
    fn reference_contrast_is_exact_zero() {
        let recs = records(&[
            ("a", &[(Condition::dialect(), 0.9), (Condition::perturb(), 0.2)]),
            ("b", &[(Condition::dialect(), 0.4), (Condition::perturb(), 0.5)]),
        ]);
        let fit = fit_mixed_effects(&recs, &Condition::perturb()).unwrap();
        assert_eq!(fit.contrasts[&Condition::perturb()], Contrast { estimate: 0.0, standard_error: 0.0 });
        assert!((fit.contrasts[&Condition::dialect()].estimate - 0.3).abs() < 1e-15);
    }

    #[test]
    fn self_contrast_is_centred() {
        let recs = records(&[
            ("a", &[(Condition::dialect(), 0.9), (Condition::perturb(), 0.2)]),
            ("b", &[(Condition::dialect(), 0.4), (Condition::perturb(), 0.5)]),
            ("c", &[(Condition::dialect(), 0.6), (Condition::perturb(), 0.1)]),
        ]);
        let fit = fit_mixed_effects(&recs, &Condition::perturb()).unwrap();
        let ci = contrast_with_ci(&fit, &Condition::dialect(), &Condition::dialect(), 0.99).unwrap();
        assert_eq!(ci.estimate, 0.0);
        assert!(ci.half_width > 0.0);
        assert_eq!(ci.lower, -ci.upper);
    }

    #[test]
    fn unbalanced_lists_offenders() {
        let recs = records(&[
            ("a", &[(Condition::dialect(), 0.9), (Condition::perturb(), 0.2)]),
            ("b", &[(Condition::dialect(), 0.4)]),
        ]);
        match fit_mixed_effects(&recs, &Condition::perturb()) {
            Err(Error::Unbalanced(ids)) => assert_eq!(ids, vec!["b".to_string()]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_condition_rejected() {
        let recs = records(&[("a", &[(Condition::dialect(), 0.9)]), ("b", &[(Condition::dialect(), 0.4)])]);
        assert!(fit_mixed_effects(&recs, &Condition::dialect()).is_err());
    }

    #[test]
    fn missing_condition_in_ci() {
        let recs = records(&[
            ("a", &[(Condition::dialect(), 0.9), (Condition::perturb(), 0.2)]),
            ("b", &[(Condition::dialect(), 0.4), (Condition::perturb(), 0.5)]),
        ]);
        let fit = fit_mixed_effects(&recs, &Condition::perturb()).unwrap();
        assert!(contrast_with_ci(&fit, &Condition::mt(), &Condition::perturb(), 0.99).is_err());
    }
}
