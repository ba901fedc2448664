//! Fit → hypothesis → criteria → p-values, as one call.

use serde::Serialize;

use crate::dist::{all_pvalues, f_quantile, DistError, FMethod, FStat, PValues};
use crate::hypothesis::{build, HypothesisMatrices, HypothesisSpec};
use crate::model::ModelSet;
use crate::teststats::{compute, CriteriaValues};
use crate::Error;

/// One value per criterion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PerCriterion<T> {
    pub wilks: T,
    pub roy: T,
    pub pillai: T,
    pub lawley_hotelling: T,
}

impl<T: Copy> PerCriterion<T> {
    pub fn map<U>(self, f: impl Fn(T) -> U) -> PerCriterion<U> {
        PerCriterion {
            wilks: f(self.wilks),
            roy: f(self.roy),
            pillai: f(self.pillai),
            lawley_hotelling: f(self.lawley_hotelling),
        }
    }

    pub fn to_array(self) -> [T; 4] {
        [self.wilks, self.roy, self.pillai, self.lawley_hotelling]
    }
}

/// Reject / fail-to-reject at level `alpha`, by p-value.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Decisions {
    pub alpha: f64,
    pub reject: PerCriterion<bool>,
}

impl Decisions {
    pub fn rejects(&self) -> PerCriterion<bool> {
        self.reject
    }
}

#[derive(Debug, Clone)]
pub struct TestOutcome {
    pub hypothesis: HypothesisSpec,
    pub matrices: HypothesisMatrices,
    pub criteria: CriteriaValues,
    pub pvalues: PValues,
    pub decisions: Decisions,
}

impl TestOutcome {
    pub fn fstats(&self) -> PerCriterion<&FStat> {
        PerCriterion {
            wilks: &self.pvalues.wilks,
            roy: &self.pvalues.roy,
            pillai: &self.pvalues.pillai,
            lawley_hotelling: &self.pvalues.lawley_hotelling,
        }
    }

    /// Upper-α points of each criterion's reference F distribution.
    pub fn f_critical(&self) -> Result<PerCriterion<f64>, DistError> {
        let alpha = self.decisions.alpha;
        let f = self.fstats();
        Ok(PerCriterion {
            wilks: f.wilks.critical_value(alpha)?,
            roy: f.roy.critical_value(alpha)?,
            pillai: f.pillai.critical_value(alpha)?,
            lawley_hotelling: f.lawley_hotelling.critical_value(alpha)?,
        })
    }

    /// `(Λ_crit, Λ_crit with q set to 1)` when the Wilks F transform is exact.
    pub fn wilks_lambda_critical(&self) -> Option<(f64, f64)> {
        let f = &self.pvalues.wilks;
        let alpha = self.decisions.alpha;
        let base = |df1: f64, df2: f64| -> Option<f64> {
            let crit = f_quantile(1.0 - alpha, df1, df2).ok()?;
            Some(df2 / (df2 + df1 * crit))
        };
        let exact = match f.method {
            FMethod::WilksExactNuH1 | FMethod::WilksExactQ1 => base(f.df1, f.df2)?,
            FMethod::WilksExactQ2 | FMethod::WilksExactNuH2 => base(f.df1, f.df2)?.powi(2),
            _ => return None,
        };
        let cv = &self.criteria;
        let q_one = base(cv.nu_h as f64, cv.nu_e as f64)?;
        Some((exact, q_one))
    }

    /// Caveats and branch information for reports.
    pub fn notes(&self) -> Vec<String> {
        let cv = &self.criteria;
        let mut notes = vec![
            "Roy's largest root is referred to an upper-bound F; its p-value is a lower bound on the exact p-value".to_owned(),
            format!(
                "s, m, h use s = min(nuH, q), m = (|nuH - q| - 1)/2, h = (nuE - q - 1)/2 = ({}, {}, {}); \
                 writing 1 in place of q would give ({}, {}, {})",
                cv.s,
                cv.m,
                cv.h,
                cv.nu_h.min(1),
                ((1.0 - cv.nu_h as f64).abs() - 1.0) / 2.0,
                (cv.nu_e as f64 - 2.0) / 2.0
            ),
            format!("Wilks F transform: {}", describe_method(self.pvalues.wilks.method)),
        ];
        if let Some((exact, q_one)) = self.wilks_lambda_critical() {
            notes.push(format!(
                "Wilks critical value on the Lambda scale at alpha = {}: {exact:.6} (reject if Lambda <= it); \
                 the same threshold computed with 1 in place of q would be {q_one:.6}",
                self.decisions.alpha
            ));
        }
        if cv.s == 1 {
            notes.push(
                "s = 1: all four criteria are monotone in the single nonzero root and give the same test".to_owned(),
            );
        }
        notes
    }
}

fn describe_method(m: FMethod) -> &'static str {
    match m {
        FMethod::WilksExactNuH1 => "exact (nuH = 1)",
        FMethod::WilksExactQ1 => "exact (q = 1)",
        FMethod::WilksExactQ2 => "exact square-root transform (q = 2)",
        FMethod::WilksExactNuH2 => "exact square-root transform (nuH = 2)",
        FMethod::WilksRao => "Rao's F approximation",
        FMethod::PillaiApprox => "Pillai F approximation",
        FMethod::LawleyHotellingApprox => "Lawley-Hotelling F approximation",
        FMethod::RoyUpperBound => "Roy upper-bound F",
    }
}

pub fn run_test(models: &ModelSet, spec: &HypothesisSpec, alpha: f64) -> Result<TestOutcome, Error> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Alpha(alpha));
    }
    let matrices = build(models, spec)?;
    let criteria = compute(&matrices.s_h, &models.pooled_se, matrices.nu_h, models.nu_e)?;
    let pvalues = all_pvalues(&criteria)?;
    let reject = PerCriterion {
        wilks: pvalues.wilks.p_value <= alpha,
        roy: pvalues.roy.p_value <= alpha,
        pillai: pvalues.pillai.p_value <= alpha,
        lawley_hotelling: pvalues.lawley_hotelling.p_value <= alpha,
    };
    let decisions = Decisions { alpha, reject };
    Ok(TestOutcome {
        hypothesis: *spec,
        matrices,
        criteria,
        pvalues,
        decisions,
    })
}
