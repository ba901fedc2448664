//! Per-group fits of `Y_r = 1 α_r' + x_r β_r' + E_r` and the pooled error SSCP.

use thiserror::Error;

use crate::linalg::{cholesky_spd, LinalgError, Mat};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("group '{label}': x has {x_len} values but Y has {y_rows} rows")]
    LengthMismatch {
        label: String,
        x_len: usize,
        y_rows: usize,
    },
    #[error("group '{label}': n = {n} is too small for q = {q} (need n > q + 2 and n > 2)")]
    SampleSize { label: String, n: usize, q: usize },
    #[error("group '{label}': x is constant, slope is not estimable")]
    DegenerateDesign { label: String },
    #[error("group '{label}': non-finite x value at row {row}")]
    NonFiniteX { label: String, row: usize },
    #[error("need at least 2 groups, got {0}")]
    TooFewGroups(usize),
    #[error("group '{label}' has q = {got}, expected {expected}")]
    ResponseCount {
        label: String,
        expected: usize,
        got: usize,
    },
    #[error("duplicate group label '{0}'")]
    DuplicateLabel(String),
    #[error("error degrees of freedom N - 2R = {nu_e} are below q = {q}")]
    InsufficientDf { nu_e: usize, q: usize },
    #[error("pooled error SSCP is not positive definite: {0}")]
    SingularError(LinalgError),
}

/// Raw data of one group: predictor values and the `n × q` response matrix.
#[derive(Debug, Clone)]
pub struct GroupSample {
    label: String,
    x: Vec<f64>,
    y: Mat,
}

impl GroupSample {
    pub fn new(label: impl Into<String>, x: Vec<f64>, y: Mat) -> Result<Self, ModelError> {
        let label = label.into();
        let n = x.len();
        let q = y.cols();
        if n != y.rows() {
            return Err(ModelError::LengthMismatch {
                label,
                x_len: n,
                y_rows: y.rows(),
            });
        }
        if let Some(row) = x.iter().position(|v| !v.is_finite()) {
            return Err(ModelError::NonFiniteX { label, row });
        }
        if n <= 2 || n <= q + 2 {
            return Err(ModelError::SampleSize { label, n, q });
        }
        if x.iter().all(|&v| v == x[0]) {
            return Err(ModelError::DegenerateDesign { label });
        }
        Ok(Self { label, x, y })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &Mat {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn q(&self) -> usize {
        self.y.cols()
    }
}

/// Closed-form least-squares fit of one group.
#[derive(Debug, Clone)]
pub struct FittedGroup {
    pub label: String,
    /// Intercepts α̂_r, one per response.
    pub alpha_hat: Vec<f64>,
    /// Slopes β̂_r, one per response.
    pub beta_hat: Vec<f64>,
    /// Residual SSCP `Y'(I - X X⁻)Y`.
    pub resid_sscp: Mat,
    pub n: usize,
    pub x_bar: f64,
    /// Centered sum of squares `‖x - x̄1‖²`.
    pub sxx: f64,
    /// `‖x‖²`.
    pub x_norm_sq: f64,
    /// `1'x`.
    pub x_sum: f64,
}

impl FittedGroup {
    pub fn q(&self) -> usize {
        self.alpha_hat.len()
    }

    /// `α̂_j + β̂_j x` for response `j`.
    pub fn predict(&self, j: usize, x: f64) -> f64 {
        self.alpha_hat[j] + self.beta_hat[j] * x
    }
}

pub fn fit_group(sample: &GroupSample) -> Result<FittedGroup, ModelError> {
    let n = sample.n();
    let q = sample.q();
    let nf = n as f64;
    let x = sample.x();
    let y = sample.y();

    let x_sum: f64 = x.iter().sum();
    let x_bar = x_sum / nf;
    let x_norm_sq: f64 = x.iter().map(|v| v * v).sum();
    let xc: Vec<f64> = x.iter().map(|v| v - x_bar).collect();
    let sxx: f64 = xc.iter().map(|v| v * v).sum();
    if !(sxx > 1e-14 * x_norm_sq) {
        return Err(ModelError::DegenerateDesign {
            label: sample.label().to_owned(),
        });
    }

    let y_bar: Vec<f64> = (0..q)
        .map(|j| (0..n).map(|i| y[(i, j)]).sum::<f64>() / nf)
        .collect();

    // Centered cross products Y'(I - 11'/n)x and Y'(I - 11'/n)Y.
    let mut sxy = vec![0.0; q];
    let mut syy = Mat::zeros(q, q);
    for i in 0..n {
        let row = y.row(i);
        for j in 0..q {
            let dj = row[j] - y_bar[j];
            sxy[j] += xc[i] * dj;
            for k in j..q {
                syy[(j, k)] += dj * (row[k] - y_bar[k]);
            }
        }
    }

    let beta_hat: Vec<f64> = sxy.iter().map(|s| s / sxx).collect();
    let alpha_hat: Vec<f64> = (0..q).map(|j| y_bar[j] - beta_hat[j] * x_bar).collect();

    let mut resid = Mat::zeros(q, q);
    for j in 0..q {
        for k in j..q {
            let v = syy[(j, k)] - sxy[j] * sxy[k] / sxx;
            resid[(j, k)] = v;
            resid[(k, j)] = v;
        }
    }

    Ok(FittedGroup {
        label: sample.label().to_owned(),
        alpha_hat,
        beta_hat,
        resid_sscp: resid,
        n,
        x_bar,
        sxx,
        x_norm_sq,
        x_sum,
    })
}

/// The fitted groups together with the pooled error SSCP `S_E = Σ_r S_{E_r}`.
#[derive(Debug, Clone)]
pub struct ModelSet {
    pub groups: Vec<FittedGroup>,
    pub q: usize,
    /// Total sample size N.
    pub n_total: usize,
    /// Error degrees of freedom `N - 2R`.
    pub nu_e: usize,
    pub pooled_se: Mat,
}

impl ModelSet {
    pub fn r(&self) -> usize {
        self.groups.len()
    }

    pub fn group(&self, label: &str) -> Option<&FittedGroup> {
        self.groups.iter().find(|g| g.label == label)
    }
}

pub fn pool(groups: Vec<FittedGroup>) -> Result<ModelSet, ModelError> {
    if groups.len() < 2 {
        return Err(ModelError::TooFewGroups(groups.len()));
    }
    let q = groups[0].q();
    for (i, g) in groups.iter().enumerate() {
        if g.q() != q {
            return Err(ModelError::ResponseCount {
                label: g.label.clone(),
                expected: q,
                got: g.q(),
            });
        }
        if groups[..i].iter().any(|h| h.label == g.label) {
            return Err(ModelError::DuplicateLabel(g.label.clone()));
        }
    }
    let n_total: usize = groups.iter().map(|g| g.n).sum();
    let nu_e = n_total.saturating_sub(2 * groups.len());
    if nu_e < q {
        return Err(ModelError::InsufficientDf { nu_e, q });
    }

    let mut pooled = Mat::zeros(q, q);
    for g in &groups {
        pooled = pooled
            .add(&g.resid_sscp)
            .expect("all residual SSCPs are q x q");
    }
    cholesky_spd(&pooled).map_err(ModelError::SingularError)?;

    Ok(ModelSet {
        groups,
        q,
        n_total,
        nu_e,
        pooled_se: pooled,
    })
}

/// Fits every sample and pools them.
pub fn fit_all(samples: &[GroupSample]) -> Result<ModelSet, ModelError> {
    let fits = samples.iter().map(fit_group).collect::<Result<Vec<_>, _>>()?;
    pool(fits)
}
