//! Cross-model hypotheses `a α_1 + b β_1 = … = a α_R + b β_R` and their SSCP matrix `S_H`.
//!
//! With `z_r = a α̂_r + b β̂_r` and `Cov(z_r) = Σ / d_rr`, the hypothesis SSCP is
//! the weighted between-groups matrix
//!
//! ```text
//! S_H = Σ_r d_rr (z_r - z̄)(z_r - z̄)',   z̄ = Σ_r d_rr z_r / Σ_r d_rr
//! ```
//!
//! which equals `(D^½ Z)' (I - D^½ 1 1' D^½ / 1'D1) (D^½ Z)`. The projection form
//! is available as [`centering_projection`] for checking; [`oracle_build`]
//! recomputes everything from the stacked block design as an independent path.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{matmul, spd_inverse, LinalgError, Mat};
use crate::model::{FittedGroup, GroupSample, ModelError, ModelSet};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HypothesisError {
    #[error("linear hypothesis needs (a, b) != (0, 0)")]
    ZeroContrast,
    #[error("non-finite hypothesis constant")]
    NonFinite,
    #[error("group '{label}': ‖a x - b 1‖² = 0, hypothesis is degenerate for this design")]
    DegenerateWeight { label: String },
    #[error("cannot parse hypothesis '{0}' (expected parallelism, intercept, concurrent:<x0> or linear:<a>,<b>)")]
    Parse(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Which cross-model hypothesis to test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HypothesisSpec {
    /// α_1 = … = α_R.
    CommonIntercept,
    /// β_1 = … = β_R.
    Parallelism,
    /// α_r + β_r x0 equal for all r.
    ConcurrentAt(f64),
    /// a α_r + b β_r equal for all r.
    Linear(f64, f64),
}

impl HypothesisSpec {
    /// The constants `(a, b)` this hypothesis reduces to.
    pub fn coefficients(&self) -> (f64, f64) {
        match *self {
            HypothesisSpec::CommonIntercept => (1.0, 0.0),
            HypothesisSpec::Parallelism => (0.0, 1.0),
            HypothesisSpec::ConcurrentAt(x0) => (1.0, x0),
            HypothesisSpec::Linear(a, b) => (a, b),
        }
    }

    pub fn validate(&self) -> Result<(), HypothesisError> {
        let (a, b) = self.coefficients();
        if !a.is_finite() || !b.is_finite() {
            return Err(HypothesisError::NonFinite);
        }
        if a == 0.0 && b == 0.0 {
            return Err(HypothesisError::ZeroContrast);
        }
        Ok(())
    }

    /// Short machine name: `parallelism`, `intercept`, `concurrent`, `linear`.
    pub fn kind(&self) -> &'static str {
        match self {
            HypothesisSpec::CommonIntercept => "intercept",
            HypothesisSpec::Parallelism => "parallelism",
            HypothesisSpec::ConcurrentAt(_) => "concurrent",
            HypothesisSpec::Linear(..) => "linear",
        }
    }

    /// Plain-language statement of H0.
    pub fn describe(&self) -> String {
        match *self {
            HypothesisSpec::CommonIntercept => {
                "all groups share the same vector intercept (alpha_1 = ... = alpha_R)".into()
            }
            HypothesisSpec::Parallelism => {
                "all regression lines are parallel (beta_1 = ... = beta_R)".into()
            }
            HypothesisSpec::ConcurrentAt(x0) => {
                format!("all regression lines meet at x = {x0} (alpha_r + beta_r * {x0} equal)")
            }
            HypothesisSpec::Linear(a, b) => {
                format!("{a} * alpha_r + {b} * beta_r is equal across groups")
            }
        }
    }
}

impl fmt::Display for HypothesisSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            HypothesisSpec::CommonIntercept => write!(f, "intercept"),
            HypothesisSpec::Parallelism => write!(f, "parallelism"),
            HypothesisSpec::ConcurrentAt(x0) => write!(f, "concurrent:{x0}"),
            HypothesisSpec::Linear(a, b) => write!(f, "linear:{a},{b}"),
        }
    }
}

impl FromStr for HypothesisSpec {
    type Err = HypothesisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || HypothesisError::Parse(s.to_owned());
        let t = s.trim();
        let (head, tail) = match t.split_once(':') {
            Some((h, rest)) => (h.trim(), Some(rest.trim())),
            None => (t, None),
        };
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| bad());
        let spec = match (head.to_ascii_lowercase().as_str(), tail) {
            ("parallelism" | "parallel" | "slopes", None) => HypothesisSpec::Parallelism,
            ("intercept" | "common-intercept", None) => HypothesisSpec::CommonIntercept,
            ("concurrent", Some(x0)) => HypothesisSpec::ConcurrentAt(num(x0)?),
            ("linear", Some(ab)) => {
                let (a, b) = ab.split_once(',').ok_or_else(bad)?;
                HypothesisSpec::Linear(num(a)?, num(b)?)
            }
            _ => return Err(bad()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Precision weight `d_rr = n ‖(I - 11'/n) x‖² / ‖a x - b 1‖²`, i.e. `1 / (a, b)(X'X)⁻¹(a, b)'`.
pub fn weight(fit: &FittedGroup, a: f64, b: f64) -> Result<f64, HypothesisError> {
    if a == 0.0 && b == 0.0 {
        return Err(HypothesisError::ZeroContrast);
    }
    let n = fit.n as f64;
    // ‖a x - b 1‖² = a² sxx + n (a x̄ - b)², free of the cancellation in a²‖x‖² - 2ab 1'x + b² n.
    let shift = a * fit.x_bar - b;
    let denom = a * a * fit.sxx + n * shift * shift;
    if !(denom > 0.0) {
        return Err(HypothesisError::DegenerateWeight {
            label: fit.label.clone(),
        });
    }
    if a == 0.0 {
        // (0, b): n sxx / (b² n) without the round trip through n.
        return Ok(fit.sxx / (b * b));
    }
    Ok(n * fit.sxx / denom)
}

/// `Z`, the weights `D`, and `S_H` for one hypothesis.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct HypothesisMatrices {
    /// `R × q`, row r is `a α̂_r' + b β̂_r'`.
    pub z: Mat,
    pub d_diag: Vec<f64>,
    pub s_h: Mat,
    pub nu_h: usize,
}

pub fn build(models: &ModelSet, spec: &HypothesisSpec) -> Result<HypothesisMatrices, HypothesisError> {
    spec.validate()?;
    let (a, b) = spec.coefficients();
    let q = models.q;
    let r = models.r();

    let d = models
        .groups
        .iter()
        .map(|g| weight(g, a, b))
        .collect::<Result<Vec<_>, _>>()?;

    let mut z = Mat::zeros(r, q);
    for (i, g) in models.groups.iter().enumerate() {
        for j in 0..q {
            z[(i, j)] = a * g.alpha_hat[j] + b * g.beta_hat[j];
        }
    }

    let d_total: f64 = d.iter().sum();
    let z_bar: Vec<f64> = (0..q)
        .map(|j| (0..r).map(|i| d[i] * z[(i, j)]).sum::<f64>() / d_total)
        .collect();

    let mut s_h = Mat::zeros(q, q);
    for (i, &di) in d.iter().enumerate() {
        let dev: Vec<f64> = (0..q).map(|j| z[(i, j)] - z_bar[j]).collect();
        for j in 0..q {
            for k in j..q {
                s_h[(j, k)] += di * dev[j] * dev[k];
            }
        }
    }
    for j in 0..q {
        for k in 0..j {
            s_h[(j, k)] = s_h[(k, j)];
        }
    }

    Ok(HypothesisMatrices {
        z,
        d_diag: d,
        s_h,
        nu_h: r - 1,
    })
}

/// `I_R - D^½ 1 1' D^½ / 1'D1`, the symmetric idempotent projection behind `S_H`.
pub fn centering_projection(d: &[f64]) -> Mat {
    let r = d.len();
    let total: f64 = d.iter().sum();
    let mut p = Mat::identity(r);
    for i in 0..r {
        for j in 0..r {
            p[(i, j)] -= (d[i] * d[j]).sqrt() / total;
        }
    }
    p
}

/// `(D^½ Z)' P (D^½ Z)` computed literally; the reference form of `S_H`.
pub fn projection_form(z: &Mat, d: &[f64]) -> Result<Mat, LinalgError> {
    let sqrt_d: Vec<f64> = d.iter().map(|v| v.sqrt()).collect();
    let dz = matmul(&Mat::diag(&sqrt_d), z)?;
    let p = centering_projection(d);
    matmul(&dz.transpose(), &matmul(&p, &dz)?)
}

/// `(S_H, S_E)` from the general linear model on the stacked block design.
///
/// Builds `𝕏` (N × 2R), inverts `𝕏'𝕏` block by block, forms `β̃ = (𝕏'𝕏)⁻¹𝕏'𝕐`,
/// the banded `(R-1) × 2R` contrast `C` with rows `(…, a, b, -a, -b, …)`, and
///
/// ```text
/// S_H = (C β̃)' (C (𝕏'𝕏)⁻¹ C')⁻¹ (C β̃)
/// S_E = 𝕐' (I - 𝕏 (𝕏'𝕏)⁻¹ 𝕏') 𝕐
/// ```
///
/// Shares no code with [`build`] or the per-group closed forms; it exists to check them.
pub fn oracle_build(
    samples: &[GroupSample],
    spec: &HypothesisSpec,
) -> Result<(Mat, Mat), HypothesisError> {
    spec.validate()?;
    let (a, b) = spec.coefficients();
    let r = samples.len();
    if r < 2 {
        return Err(ModelError::TooFewGroups(r).into());
    }
    let q = samples[0].q();
    let n_total: usize = samples.iter().map(|s| s.n()).sum();
    let p = 2 * r;

    let mut big_x = Mat::zeros(n_total, p);
    let mut big_y = Mat::zeros(n_total, q);
    let mut row = 0;
    for (g, s) in samples.iter().enumerate() {
        if s.q() != q {
            return Err(ModelError::ResponseCount {
                label: s.label().to_owned(),
                expected: q,
                got: s.q(),
            }
            .into());
        }
        for i in 0..s.n() {
            big_x[(row, 2 * g)] = 1.0;
            big_x[(row, 2 * g + 1)] = s.x()[i];
            for j in 0..q {
                big_y[(row, j)] = s.y()[(i, j)];
            }
            row += 1;
        }
    }

    let xtx = matmul(&big_x.transpose(), &big_x)?;
    // Block-diagonal inverse: each 2 × 2 block inverted by the adjugate.
    let mut xtx_inv = Mat::zeros(p, p);
    for g in 0..r {
        let (i, j) = (2 * g, 2 * g + 1);
        let det = xtx[(i, i)] * xtx[(j, j)] - xtx[(i, j)] * xtx[(j, i)];
        if det.abs() <= 1e-12 * xtx[(i, i)] * xtx[(j, j)] {
            return Err(ModelError::DegenerateDesign {
                label: samples[g].label().to_owned(),
            }
            .into());
        }
        xtx_inv[(i, i)] = xtx[(j, j)] / det;
        xtx_inv[(j, j)] = xtx[(i, i)] / det;
        xtx_inv[(i, j)] = -xtx[(i, j)] / det;
        xtx_inv[(j, i)] = -xtx[(j, i)] / det;
    }

    let beta = matmul(&xtx_inv, &matmul(&big_x.transpose(), &big_y)?)?;

    let mut c = Mat::zeros(r - 1, p);
    for k in 0..r - 1 {
        c[(k, 2 * k)] = a;
        c[(k, 2 * k + 1)] = b;
        c[(k, 2 * k + 2)] = -a;
        c[(k, 2 * k + 3)] = -b;
    }

    let cb = matmul(&c, &beta)?;
    let middle = matmul(&c, &matmul(&xtx_inv, &c.transpose())?)?;
    let middle_inv = spd_inverse(&middle.symmetrized())?;
    let s_h = matmul(&cb.transpose(), &matmul(&middle_inv, &cb)?)?.symmetrized();

    let hat = matmul(&big_x, &matmul(&xtx_inv, &big_x.transpose())?)?;
    let resid_maker = Mat::identity(n_total).sub(&hat)?;
    let s_e = matmul(&big_y.transpose(), &matmul(&resid_maker, &big_y)?)?.symmetrized();

    Ok((s_h, s_e))
}
