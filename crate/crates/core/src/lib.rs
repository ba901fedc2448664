//! Tests of parallelism, common intercept and concurrence across R multivariate
//! simple linear models `Y_r = 1 α_r' + x_r β_r' + E_r`.
//!
//! The pipeline is
//!
//! 1. [`model::fit_group`] / [`model::pool`]: closed-form per-group fits and the
//!    pooled error SSCP `S_E` with `ν_E = N - 2R` degrees of freedom;
//! 2. [`hypothesis::build`]: the hypothesis SSCP `S_H` for
//!    `a α_1 + b β_1 = … = a α_R + b β_R` with `ν_H = R - 1`;
//! 3. [`teststats::compute`]: Wilks, Roy, Pillai and Lawley–Hotelling from the
//!    roots of `S_H S_E⁻¹`;
//! 4. [`dist`]: F transforms and p-values.
//!
//! [`analysis::run_test`] chains steps 2–4. [`montecarlo`] repeats the whole
//! pipeline on simulated matrix-elliptical errors.
//!
//! ```
//! use mslm_core::{analysis::run_test, hypothesis::HypothesisSpec, linalg::Mat, model};
//!
//! let x: Vec<f64> = (1..=8).map(f64::from).collect();
//! let mk = |slope: f64, wobble: f64| {
//!     let y: Vec<f64> = x.iter().map(|v| 1.0 + slope * v + wobble * (v * 1.3).sin()).collect();
//!     model::GroupSample::new(format!("s{slope}"), x.clone(), Mat::column(&y).unwrap()).unwrap()
//! };
//! let models = model::fit_all(&[mk(0.5, 0.2), mk(2.0, 0.3)]).unwrap();
//! let out = run_test(&models, &HypothesisSpec::Parallelism, 0.05).unwrap();
//! assert!(out.decisions.reject.wilks);
//! ```

pub mod analysis;
pub mod dataset;
pub mod dist;
pub mod hypothesis;
pub mod linalg;
pub mod model;
pub mod montecarlo;
pub mod report;
pub mod teststats;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
    #[error(transparent)]
    Model(#[from] model::ModelError),
    #[error(transparent)]
    Hypothesis(#[from] hypothesis::HypothesisError),
    #[error(transparent)]
    Criteria(#[from] teststats::CriteriaError),
    #[error(transparent)]
    Dist(#[from] dist::DistError),
    #[error(transparent)]
    Sim(#[from] montecarlo::SimError),
    #[error(transparent)]
    Data(#[from] dataset::DataError),
    #[error("alpha = {0} must lie in (0, 1)")]
    Alpha(f64),
}

impl Error {
    /// Stable machine-readable error code.
    pub fn code(&self) -> &'static str {
        use dataset::DataError as D;
        use model::ModelError as M;
        match self {
            Error::Linalg(_) => "E_NUMERIC",
            Error::Model(m) | Error::Data(D::Model(m)) => match m {
                M::SampleSize { .. } => "E_SAMPLE_SIZE",
                M::DegenerateDesign { .. } => "E_DEGENERATE_DESIGN",
                M::InsufficientDf { .. } => "E_DF",
                M::SingularError(_) => "E_SINGULAR",
                _ => "E_SHAPE",
            },
            Error::Hypothesis(hypothesis::HypothesisError::Parse(_)) => "E_HYPOTHESIS_PARSE",
            Error::Hypothesis(_) => "E_HYPOTHESIS",
            Error::Criteria(_) => "E_DF",
            Error::Dist(_) => "E_DISTRIBUTION",
            Error::Sim(_) => "E_SIM_CONFIG",
            Error::Data(D::Io { .. }) => "E_IO",
            Error::Data(D::Header(_)) => "E_HEADER",
            Error::Data(D::Parse { .. }) => "E_PARSE",
            Error::Data(D::TooFewGroups(_)) => "E_GROUPS",
            Error::Alpha(_) => "E_ALPHA",
        }
    }
}
