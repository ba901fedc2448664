//! Wilks, Roy, Pillai and Lawley–Hotelling criteria from the roots of `S_H S_E⁻¹`.

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{gen_eigvals, spd_logdet, LinalgError, Mat};

/// Roots below `ZERO_ROOT_TOL * (1 + Σλ)` count as zero.
pub const ZERO_ROOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CriteriaError {
    #[error("hypothesis degrees of freedom must be >= 1")]
    NoHypothesisDf,
    #[error("error degrees of freedom {nu_e} must exceed q = {q}")]
    InsufficientErrorDf { nu_e: usize, q: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// The four criteria and the `(s, m, h)` parameters for one test.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CriteriaValues {
    /// The `s` largest roots λ of `S_H S_E⁻¹`, descending.
    pub lambdas: Vec<f64>,
    /// θ_i = λ_i / (1 + λ_i).
    pub thetas: Vec<f64>,
    pub wilks: f64,
    /// Wilks recomputed as `|S_E| / |S_E + S_H|`.
    pub wilks_det: f64,
    pub roy: f64,
    pub pillai: f64,
    pub lawley_hotelling: f64,
    pub s: usize,
    pub m: f64,
    pub h: f64,
    pub nu_h: usize,
    pub nu_e: usize,
    pub q: usize,
}

pub fn compute(
    s_h: &Mat,
    s_e: &Mat,
    nu_h: usize,
    nu_e: usize,
) -> Result<CriteriaValues, CriteriaError> {
    let q = s_e.rows();
    if nu_h == 0 {
        return Err(CriteriaError::NoHypothesisDf);
    }
    if nu_e <= q {
        return Err(CriteriaError::InsufficientErrorDf { nu_e, q });
    }
    let all = gen_eigvals(s_h, s_e)?;
    let s = nu_h.min(q);
    let cutoff = ZERO_ROOT_TOL * (1.0 + all.iter().sum::<f64>());
    let lambdas: Vec<f64> = all
        .iter()
        .take(s)
        .map(|&l| if l < cutoff { 0.0 } else { l })
        .collect();
    Ok(from_roots(lambdas, s_h, s_e, nu_h, nu_e)?)
}

fn from_roots(
    lambdas: Vec<f64>,
    s_h: &Mat,
    s_e: &Mat,
    nu_h: usize,
    nu_e: usize,
) -> Result<CriteriaValues, LinalgError> {
    let q = s_e.rows();
    let s = lambdas.len();
    let thetas: Vec<f64> = lambdas.iter().map(|l| l / (1.0 + l)).collect();

    let wilks = lambdas.iter().map(|l| 1.0 / (1.0 + l)).product();
    let total = s_e.add(s_h)?;
    let wilks_det = (spd_logdet(s_e)? - spd_logdet(&total)?).exp();

    let roy = thetas.first().copied().unwrap_or(0.0);
    let pillai = thetas.iter().sum();
    let lawley_hotelling = lambdas.iter().sum();

    let m = ((nu_h as f64 - q as f64).abs() - 1.0) / 2.0;
    let h = (nu_e as f64 - q as f64 - 1.0) / 2.0;

    Ok(CriteriaValues {
        lambdas,
        thetas,
        wilks,
        wilks_det,
        roy,
        pillai,
        lawley_hotelling,
        s,
        m,
        h,
        nu_h,
        nu_e,
        q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn se() -> Mat {
        Mat::from_rows(&[&[4.0, 1.0, 0.2], &[1.0, 3.0, -0.5], &[0.2, -0.5, 2.0]]).unwrap()
    }

    #[test]
    fn zero_hypothesis_sscp() {
        let cv = compute(&Mat::zeros(3, 3), &se(), 2, 20).unwrap();
        assert_eq!(cv.wilks, 1.0);
        assert!((cv.wilks_det - 1.0).abs() < 1e-14);
        assert_eq!(cv.roy, 0.0);
        assert_eq!(cv.pillai, 0.0);
        assert_eq!(cv.lawley_hotelling, 0.0);
        assert_eq!(cv.s, 2);
    }

    #[test]
    fn parameters_use_q() {
        let v = [1.0, -2.0, 0.5];
        let sh = Mat::outer(&v, &v);
        let cv = compute(&sh, &se(), 1, 26).unwrap();
        assert_eq!(cv.s, 1);
        assert_eq!(cv.m, 0.5);
        assert_eq!(cv.h, 11.0);
        assert_eq!(cv.roy, cv.pillai);
        assert_eq!(cv.wilks, 1.0 / (1.0 + cv.lawley_hotelling));
    }

    #[test]
    fn df_errors() {
        assert_eq!(
            compute(&Mat::zeros(3, 3), &se(), 0, 20),
            Err(CriteriaError::NoHypothesisDf)
        );
        assert_eq!(
            compute(&Mat::zeros(3, 3), &se(), 1, 3),
            Err(CriteriaError::InsufficientErrorDf { nu_e: 3, q: 3 })
        );
    }

    #[test]
    fn two_routes_for_wilks_agree() {
        let a = [1.0, 0.5, -0.2];
        let b = [-0.3, 2.0, 0.7];
        let sh = Mat::outer(&a, &a).add(&Mat::outer(&b, &b)).unwrap();
        let cv = compute(&sh, &se(), 2, 30).unwrap();
        assert!((cv.wilks - cv.wilks_det).abs() <= 1e-9 * cv.wilks);
        for (l, t) in cv.lambdas.iter().zip(&cv.thetas) {
            assert!((l - t / (1.0 - t)).abs() <= 1e-12 * (1.0 + l));
        }
    }
}
