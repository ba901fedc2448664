//! Monte Carlo size/power experiments under matrix-elliptical errors.
//!
//! Each replicate draws one `N × q` error matrix for the stacked model. The
//! Gaussian core is `Z L'` with `Σ = L L'`; heavy-tailed families multiply the
//! *whole* matrix by one random scalar, which keeps the stacked errors
//! matrix-elliptical (rows are uncorrelated but not independent).
//!
//! Randomness: ChaCha8 seeded from the 64-bit seed, with the replicate index as
//! the stream id. Every family of a replicate starts from the same stream, so
//! the Gaussian core is shared across families (common random numbers) and a
//! contaminated family with `eps = 0` reproduces the Gaussian run exactly.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{run_test, PerCriterion};
use crate::hypothesis::HypothesisSpec;
use crate::linalg::{cholesky_spd, LinalgError, Mat};
use crate::model::{fit_all, GroupSample};

/// Name of the generator, recorded in every result.
pub const RNG_NAME: &str = "ChaCha8Rng(seed_from_u64(seed), stream = replicate index)";

/// Smallest replication count accepted by [`SimConfig::validate`].
pub const MIN_REPLICATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid error family: {0}")]
    Family(String),
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error("sigma is not positive definite: {0}")]
    Sigma(LinalgError),
}

/// Shape of the error distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyKind {
    Gaussian,
    /// Matrix t: Gaussian core scaled by `sqrt(dof / χ²_dof)`.
    StudentT { dof: f64 },
    /// With probability `eps` the whole matrix has covariance inflated by `scale`.
    ContaminatedNormal { eps: f64, scale: f64 },
}

impl FamilyKind {
    pub fn validate(&self) -> Result<(), SimError> {
        match *self {
            FamilyKind::Gaussian => Ok(()),
            FamilyKind::StudentT { dof } if dof > 2.0 && dof.is_finite() => Ok(()),
            FamilyKind::StudentT { dof } => {
                Err(SimError::Family(format!("t degrees of freedom {dof} must exceed 2")))
            }
            FamilyKind::ContaminatedNormal { eps, scale }
                if (0.0..1.0).contains(&eps) && scale > 1.0 && scale.is_finite() =>
            {
                Ok(())
            }
            FamilyKind::ContaminatedNormal { eps, scale } => Err(SimError::Family(format!(
                "contaminated normal needs 0 <= eps < 1 and scale > 1, got eps = {eps}, scale = {scale}"
            ))),
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FamilyKind::Gaussian => write!(f, "gaussian"),
            FamilyKind::StudentT { dof } => write!(f, "t:{dof}"),
            FamilyKind::ContaminatedNormal { eps, scale } => write!(f, "contaminated:{eps},{scale}"),
        }
    }
}

impl FromStr for FamilyKind {
    type Err = SimError;

    /// `gaussian`, `t:<dof>`, or `contaminated:<eps>,<scale>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SimError::Family(format!("cannot parse family '{s}'"));
        let num = |v: &str| v.trim().parse::<f64>().map_err(|_| bad());
        let t = s.trim();
        let kind = match t.split_once(':') {
            None if t.eq_ignore_ascii_case("gaussian") || t.eq_ignore_ascii_case("normal") => {
                FamilyKind::Gaussian
            }
            Some((head, dof)) if head.eq_ignore_ascii_case("t") => {
                FamilyKind::StudentT { dof: num(dof)? }
            }
            Some((head, rest)) if head.eq_ignore_ascii_case("contaminated") => {
                let (eps, scale) = rest.split_once(',').ok_or_else(bad)?;
                FamilyKind::ContaminatedNormal {
                    eps: num(eps)?,
                    scale: num(scale)?,
                }
            }
            _ => return Err(bad()),
        };
        kind.validate()?;
        Ok(kind)
    }
}

/// A family together with the row covariance Σ.
#[derive(Debug, Clone)]
pub struct ErrorFamily {
    kind: FamilyKind,
    sigma: Mat,
    sigma_chol: Mat,
}

impl ErrorFamily {
    pub fn new(kind: FamilyKind, sigma: Mat) -> Result<Self, SimError> {
        kind.validate()?;
        let sigma_chol = cholesky_spd(&sigma).map_err(SimError::Sigma)?;
        Ok(Self {
            kind,
            sigma,
            sigma_chol,
        })
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn sigma(&self) -> &Mat {
        &self.sigma
    }

    pub fn q(&self) -> usize {
        self.sigma.rows()
    }
}

/// One `n × q` error matrix. Consumes `n q` standard normals, then (for the
/// non-Gaussian families) the draws for the single mixing scalar.
pub fn sample_errors<R: Rng + ?Sized>(family: &ErrorFamily, n: usize, rng: &mut R) -> Mat {
    let q = family.q();
    let l = &family.sigma_chol;
    let z: Vec<f64> = (0..n * q).map(|_| rng.sample(StandardNormal)).collect();

    let mix = match family.kind {
        FamilyKind::Gaussian => 1.0,
        FamilyKind::StudentT { dof } => {
            let chi2: f64 = ChiSquared::new(dof)
                .expect("dof validated at construction")
                .sample(rng);
            (dof / chi2).sqrt()
        }
        FamilyKind::ContaminatedNormal { eps, scale } => {
            let u: f64 = rng.random();
            if u < eps {
                scale.sqrt()
            } else {
                1.0
            }
        }
    };

    let mut e = Mat::zeros(n, q);
    for i in 0..n {
        let zi = &z[i * q..(i + 1) * q];
        for j in 0..q {
            let mut v = 0.0;
            for k in 0..=j {
                v += l[(j, k)] * zi[k];
            }
            e[(i, j)] = mix * v;
        }
    }
    e
}

/// Generator for replicate `rep`.
pub fn replicate_rng(seed: u64, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep as u64);
    rng
}

/// Fixed design and true coefficients of one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupDesign {
    pub label: String,
    pub x: Vec<f64>,
    /// True intercepts α_r (length q).
    pub alpha: Vec<f64>,
    /// True slopes β_r (length q).
    pub beta: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub groups: Vec<GroupDesign>,
    pub sigma: Mat,
    pub families: Vec<FamilyKind>,
    pub hypothesis: HypothesisSpec,
    pub alpha: f64,
    pub replications: usize,
    pub seed: u64,
}

impl SimConfig {
    /// Two groups of 15 on x = 1..15 with identical lines, q = 2, parallelism test,
    /// three families, 5000 replicates at seed 42.
    pub fn null_two_groups() -> Self {
        let x: Vec<f64> = (1..=15).map(f64::from).collect();
        let design = |label: &str| GroupDesign {
            label: label.into(),
            x: x.clone(),
            alpha: vec![60.0, 4.8],
            beta: vec![1.4, 0.1],
        };
        Self {
            groups: vec![design("g1"), design("g2")],
            sigma: Mat::from_rows(&[&[2.5, 0.15], &[0.15, 0.0116]]).expect("finite"),
            families: vec![
                FamilyKind::Gaussian,
                FamilyKind::StudentT { dof: 5.0 },
                FamilyKind::ContaminatedNormal {
                    eps: 0.1,
                    scale: 3.0,
                },
            ],
            hypothesis: HypothesisSpec::Parallelism,
            alpha: 0.05,
            replications: 5000,
            seed: 42,
        }
    }

    pub fn q(&self) -> usize {
        self.sigma.rows()
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let cfg = |m: String| Err(SimError::Config(m));
        if self.groups.len() < 2 {
            return cfg(format!("need at least 2 groups, got {}", self.groups.len()));
        }
        if self.families.is_empty() {
            return cfg("no error families given".into());
        }
        if self.replications < MIN_REPLICATIONS {
            return cfg(format!(
                "replications = {} is below the minimum of {MIN_REPLICATIONS}",
                self.replications
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return cfg(format!("alpha = {} must lie in (0, 1)", self.alpha));
        }
        let q = self.q();
        for g in &self.groups {
            if g.alpha.len() != q || g.beta.len() != q {
                return cfg(format!("group '{}' coefficients must have length q = {q}", g.label));
            }
            if g.x.len() <= q + 2 {
                return cfg(format!("group '{}' needs more than q + 2 = {} points", g.label, q + 2));
            }
            if g.x.iter().chain(&g.alpha).chain(&g.beta).any(|v| !v.is_finite()) {
                return cfg(format!("group '{}' has non-finite values", g.label));
            }
        }
        self.hypothesis
            .validate()
            .map_err(|e| SimError::Config(e.to_string()))?;
        for f in &self.families {
            f.validate()?;
        }
        cholesky_spd(&self.sigma).map_err(SimError::Sigma)?;
        Ok(())
    }

    /// Parses the JSON form documented in the README.
    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let raw: RawSimConfig =
            serde_json::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        let rows: Vec<&[f64]> = raw.sigma.iter().map(|r| r.as_slice()).collect();
        let sigma = Mat::from_rows(&rows).map_err(|e| SimError::Config(format!("sigma: {e}")))?;
        let families = raw
            .families
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<_>, _>>()?;
        let hypothesis = raw
            .hypothesis
            .parse()
            .map_err(|e: crate::hypothesis::HypothesisError| SimError::Config(e.to_string()))?;
        let config = Self {
            groups: raw.groups,
            sigma,
            families,
            hypothesis,
            alpha: raw.alpha,
            replications: raw.replications,
            seed: raw.seed,
        };
        config.validate()?;
        Ok(config)
    }

    fn stacked_rows(&self) -> usize {
        self.groups.iter().map(|g| g.x.len()).sum()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSimConfig {
    groups: Vec<GroupDesign>,
    sigma: Vec<Vec<f64>>,
    families: Vec<String>,
    hypothesis: String,
    #[serde(default = "default_alpha")]
    alpha: f64,
    replications: usize,
    seed: u64,
}

fn default_alpha() -> f64 {
    0.05
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
}

/// Outcome for one error family.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SimResult {
    pub family: String,
    pub rejection_rates: PerCriterion<f64>,
    pub rejections: PerCriterion<usize>,
    pub statistics: PerCriterion<Summary>,
    pub replications: usize,
    /// Replicates whose pipeline ran to completion.
    pub completed: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
    pub seed: u64,
    pub rng: String,
}

/// All families of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SimReport {
    pub hypothesis: String,
    pub alpha: f64,
    pub replications: usize,
    pub seed: u64,
    pub rng: String,
    pub results: Vec<SimResult>,
}

type Outcome = Result<(PerCriterion<f64>, PerCriterion<bool>), String>;

fn one_replicate(config: &SimConfig, family: &ErrorFamily, rep: usize) -> Outcome {
    let mut rng = replicate_rng(config.seed, rep);
    let errors = sample_errors(family, config.stacked_rows(), &mut rng);
    let q = config.q();

    let mut offset = 0;
    let mut samples = Vec::with_capacity(config.groups.len());
    for g in &config.groups {
        let n = g.x.len();
        let mut y = Mat::zeros(n, q);
        for i in 0..n {
            for j in 0..q {
                y[(i, j)] = g.alpha[j] + g.beta[j] * g.x[i] + errors[(offset + i, j)];
            }
        }
        offset += n;
        samples.push(GroupSample::new(g.label.clone(), g.x.clone(), y).map_err(|e| e.to_string())?);
    }

    let models = fit_all(&samples).map_err(|e| e.to_string())?;
    let outcome = run_test(&models, &config.hypothesis, config.alpha).map_err(|e| e.to_string())?;
    let cv = &outcome.criteria;
    let stats = PerCriterion {
        wilks: cv.wilks,
        roy: cv.roy,
        pillai: cv.pillai,
        lawley_hotelling: cv.lawley_hotelling,
    };
    Ok((stats, outcome.decisions.rejects()))
}

fn summarize(mut values: Vec<f64>) -> Summary {
    if values.is_empty() {
        return Summary {
            mean: f64::NAN,
            q05: f64::NAN,
            q50: f64::NAN,
            q95: f64::NAN,
        };
    }
    values.sort_by(f64::total_cmp);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    // Linear interpolation between order statistics.
    let quantile = |p: f64| {
        let pos = p * (values.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        values[lo] + (pos - lo as f64) * (values[hi] - values[lo])
    };
    Summary {
        mean,
        q05: quantile(0.05),
        q50: quantile(0.5),
        q95: quantile(0.95),
    }
}

fn aggregate(config: &SimConfig, family: FamilyKind, outcomes: &[&Outcome]) -> SimResult {
    let mut rejections = PerCriterion {
        wilks: 0,
        roy: 0,
        pillai: 0,
        lawley_hotelling: 0,
    };
    let mut columns: [Vec<f64>; 4] = Default::default();
    let mut failures = 0;
    let mut first_failure = None;
    for outcome in outcomes {
        match outcome {
            Ok((stats, rejects)) => {
                rejections.wilks += usize::from(rejects.wilks);
                rejections.roy += usize::from(rejects.roy);
                rejections.pillai += usize::from(rejects.pillai);
                rejections.lawley_hotelling += usize::from(rejects.lawley_hotelling);
                columns[0].push(stats.wilks);
                columns[1].push(stats.roy);
                columns[2].push(stats.pillai);
                columns[3].push(stats.lawley_hotelling);
            }
            Err(msg) => {
                failures += 1;
                first_failure.get_or_insert_with(|| msg.clone());
            }
        }
    }
    let completed = outcomes.len() - failures;
    let denom = completed.max(1) as f64;
    let [w, r, p, l] = columns;
    SimResult {
        family: family.to_string(),
        rejection_rates: rejections.map(|c| c as f64 / denom),
        rejections,
        statistics: PerCriterion {
            wilks: summarize(w),
            roy: summarize(r),
            pillai: summarize(p),
            lawley_hotelling: summarize(l),
        },
        replications: config.replications,
        completed,
        failures,
        first_failure,
        seed: config.seed,
        rng: RNG_NAME.into(),
    }
}

/// Runs every family. Replicates execute in parallel; the result only depends on the config.
pub fn run(config: &SimConfig) -> Result<SimReport, SimError> {
    config.validate()?;
    let families = config
        .families
        .iter()
        .map(|&k| ErrorFamily::new(k, config.sigma.clone()))
        .collect::<Result<Vec<_>, _>>()?;

    let outcomes: Vec<Vec<Outcome>> = (0..config.replications)
        .into_par_iter()
        .map(|rep| {
            families
                .iter()
                .map(|f| one_replicate(config, f, rep))
                .collect()
        })
        .collect();

    let results = families
        .iter()
        .enumerate()
        .map(|(fi, f)| {
            let column: Vec<&Outcome> = outcomes.iter().map(|row| &row[fi]).collect();
            aggregate(config, f.kind(), &column)
        })
        .collect();

    Ok(SimReport {
        hypothesis: config.hypothesis.to_string(),
        alpha: config.alpha,
        replications: config.replications,
        seed: config.seed,
        rng: RNG_NAME.into(),
        results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_parsing() {
        assert_eq!("gaussian".parse::<FamilyKind>().unwrap(), FamilyKind::Gaussian);
        assert_eq!(
            "t:5".parse::<FamilyKind>().unwrap(),
            FamilyKind::StudentT { dof: 5.0 }
        );
        assert_eq!(
            "contaminated:0.1,3".parse::<FamilyKind>().unwrap(),
            FamilyKind::ContaminatedNormal {
                eps: 0.1,
                scale: 3.0
            }
        );
        assert!("t:2".parse::<FamilyKind>().is_err());
        assert!("contaminated:1.2,3".parse::<FamilyKind>().is_err());
        assert!("cauchy".parse::<FamilyKind>().is_err());
    }

    #[test]
    fn eps_zero_matches_gaussian_draws() {
        let sigma = Mat::from_rows(&[&[2.0, 0.3], &[0.3, 1.0]]).unwrap();
        let g = ErrorFamily::new(FamilyKind::Gaussian, sigma.clone()).unwrap();
        let c = ErrorFamily::new(
            FamilyKind::ContaminatedNormal {
                eps: 0.0,
                scale: 3.0,
            },
            sigma,
        )
        .unwrap();
        let a = sample_errors(&g, 20, &mut replicate_rng(7, 3));
        let b = sample_errors(&c, 20, &mut replicate_rng(7, 3));
        assert_eq!(a, b);
    }

    #[test]
    fn config_validation() {
        let mut cfg = SimConfig::null_two_groups();
        cfg.replications = 99;
        assert!(matches!(cfg.validate(), Err(SimError::Config(_))));
        let mut cfg = SimConfig::null_two_groups();
        cfg.alpha = 1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = SimConfig::null_two_groups();
        cfg.sigma = Mat::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]).unwrap();
        assert!(matches!(cfg.validate(), Err(SimError::Sigma(_))));
    }

    #[test]
    fn summary_quantiles() {
        let s = summarize((0..=100).map(f64::from).collect());
        assert_eq!(s.mean, 50.0);
        assert_eq!(s.q05, 5.0);
        assert_eq!(s.q50, 50.0);
        assert_eq!(s.q95, 95.0);
    }
}
