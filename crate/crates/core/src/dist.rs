//! F-distribution tail probabilities and the F transforms of the four criteria.

use serde::Serialize;
use thiserror::Error;

use crate::teststats::CriteriaValues;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistError {
    #[error("invalid argument to {func}: {detail}")]
    Domain { func: &'static str, detail: String },
    #[error("Pillai trace {v} reached its upper bound s = {s}; F transform undefined")]
    PillaiBoundary { v: f64, s: usize },
}

fn domain(func: &'static str, detail: impl Into<String>) -> DistError {
    DistError::Domain {
        func,
        detail: detail.into(),
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection: Γ(x) Γ(1 - x) = π / sin(πx).
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Continued fraction for the incomplete beta, modified Lentz.
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_ITER: usize = 100_000;
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn inc_beta(x: f64, a: f64, b: f64) -> Result<f64, DistError> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(domain("inc_beta", format!("a = {a}, b = {b}")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(domain("inc_beta", format!("x = {x} outside [0, 1]")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let ln_front = a * x.ln() + b * (1.0 - x).ln() - ln_beta(a, b);
    let front = ln_front.exp();
    let v = if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    };
    Ok(v.clamp(0.0, 1.0))
}

fn check_f_args(func: &'static str, x: f64, df1: f64, df2: f64) -> Result<(), DistError> {
    if !(x >= 0.0) {
        return Err(domain(func, format!("x = {x} must be >= 0")));
    }
    if !(df1 > 0.0 && df2 > 0.0) || !df1.is_finite() || !df2.is_finite() {
        return Err(domain(func, format!("df = ({df1}, {df2}) must be positive")));
    }
    Ok(())
}

/// `P(F ≤ x)` for `F ~ F(df1, df2)`.
pub fn f_cdf(x: f64, df1: f64, df2: f64) -> Result<f64, DistError> {
    check_f_args("f_cdf", x, df1, df2)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    inc_beta(df1 * x / (df1 * x + df2), df1 / 2.0, df2 / 2.0)
}

/// Upper tail `P(F > x)`, evaluated directly so small p-values keep their digits.
pub fn f_sf(x: f64, df1: f64, df2: f64) -> Result<f64, DistError> {
    check_f_args("f_sf", x, df1, df2)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    inc_beta(df2 / (df2 + df1 * x), df2 / 2.0, df1 / 2.0)
}

/// Quantile of `F(df1, df2)` by bracketing and bisection on [`f_cdf`].
pub fn f_quantile(p: f64, df1: f64, df2: f64) -> Result<f64, DistError> {
    check_f_args("f_quantile", 0.0, df1, df2)?;
    if !(0.0..1.0).contains(&p) {
        return Err(domain("f_quantile", format!("p = {p} outside [0, 1)")));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while f_cdf(hi, df1, df2)? < p {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(domain("f_quantile", "could not bracket quantile"));
        }
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if f_cdf(mid, df1, df2)? < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Which F transform produced an [`FStat`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FMethod {
    /// Wilks with one hypothesis df.
    WilksExactNuH1,
    /// Wilks with a single response.
    WilksExactQ1,
    /// Wilks with two responses (square-root transform).
    WilksExactQ2,
    /// Wilks with two hypothesis df (square-root transform).
    WilksExactNuH2,
    /// Rao's approximation.
    WilksRao,
    PillaiApprox,
    LawleyHotellingApprox,
    /// Upper bound on Roy's largest root; its p-value is a lower bound.
    RoyUpperBound,
}

/// An F statistic, its degrees of freedom and upper-tail p-value.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FStat {
    pub value: f64,
    pub df1: f64,
    pub df2: f64,
    pub p_value: f64,
    pub exact: bool,
    pub method: FMethod,
}

impl FStat {
    fn new(value: f64, df1: f64, df2: f64, exact: bool, method: FMethod) -> Result<Self, DistError> {
        Ok(Self {
            value,
            df1,
            df2,
            p_value: f_sf(value, df1, df2)?,
            exact,
            method,
        })
    }

    /// Upper-α critical point of the reference F distribution.
    pub fn critical_value(&self, alpha: f64) -> Result<f64, DistError> {
        f_quantile(1.0 - alpha, self.df1, self.df2)
    }
}

pub fn wilks_pvalue(cv: &CriteriaValues) -> Result<FStat, DistError> {
    let lambda = cv.wilks;
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(domain("wilks_pvalue", format!("Wilks lambda {lambda} outside (0, 1]")));
    }
    let q = cv.q as f64;
    let nu_h = cv.nu_h as f64;
    let nu_e = cv.nu_e as f64;

    if cv.nu_h == 1 {
        let df2 = nu_e - q + 1.0;
        let f = (1.0 - lambda) / lambda * (df2 / q);
        return FStat::new(f, q, df2, true, FMethod::WilksExactNuH1);
    }
    if cv.q == 1 {
        let f = (1.0 - lambda) / lambda * (nu_e / nu_h);
        return FStat::new(f, nu_h, nu_e, true, FMethod::WilksExactQ1);
    }
    let root = lambda.sqrt();
    if cv.q == 2 {
        let f = (1.0 - root) / root * ((nu_e - 1.0) / nu_h);
        return FStat::new(f, 2.0 * nu_h, 2.0 * (nu_e - 1.0), true, FMethod::WilksExactQ2);
    }
    if cv.nu_h == 2 {
        let df2 = nu_e - q + 1.0;
        let f = (1.0 - root) / root * (df2 / q);
        return FStat::new(f, 2.0 * q, 2.0 * df2, true, FMethod::WilksExactNuH2);
    }

    let t = ((q * q * nu_h * nu_h - 4.0) / (q * q + nu_h * nu_h - 5.0)).sqrt();
    let w = nu_e + nu_h - (q + nu_h + 1.0) / 2.0;
    let df1 = q * nu_h;
    let df2 = w * t - (q * nu_h - 2.0) / 2.0;
    let y = lambda.powf(1.0 / t);
    let f = (1.0 - y) / y * (df2 / df1);
    FStat::new(f, df1, df2, false, FMethod::WilksRao)
}

pub fn pillai_pvalue(cv: &CriteriaValues) -> Result<FStat, DistError> {
    let s = cv.s as f64;
    let v = cv.pillai;
    if s - v <= 0.0 {
        return Err(DistError::PillaiBoundary { v, s: cv.s });
    }
    let (m, h) = (cv.m, cv.h);
    let f = (2.0 * h + s + 1.0) / (2.0 * m + s + 1.0) * (v / (s - v));
    let df1 = s * (2.0 * m + s + 1.0);
    let df2 = s * (2.0 * h + s + 1.0);
    FStat::new(f, df1, df2, cv.s == 1, FMethod::PillaiApprox)
}

/// Lawley–Hotelling F transform for given `(s, m, h)`: returns `(F, df1, df2)`.
pub fn lh_transform(u: f64, s: f64, m: f64, h: f64) -> (f64, f64, f64) {
    let df1 = s * (2.0 * m + s + 1.0);
    let df2 = 2.0 * (s * h + 1.0);
    let f = u * df2 / (s * s * (2.0 * m + s + 1.0));
    (f, df1, df2)
}

pub fn lh_pvalue(cv: &CriteriaValues) -> Result<FStat, DistError> {
    let (f, df1, df2) = lh_transform(cv.lawley_hotelling, cv.s as f64, cv.m, cv.h);
    FStat::new(f, df1, df2, cv.s == 1, FMethod::LawleyHotellingApprox)
}

/// Upper-bound F for Roy's largest root. The p-value is a lower bound on the true one.
pub fn roy_bound(cv: &CriteriaValues) -> Result<FStat, DistError> {
    let d = cv.q.max(cv.nu_h) as f64;
    let df2 = cv.nu_e as f64 - d + cv.nu_h as f64;
    let lambda1 = cv.lambdas.first().copied().unwrap_or(0.0);
    let f = lambda1 * df2 / d;
    FStat::new(f, d, df2, false, FMethod::RoyUpperBound)
}

/// P-values of all four criteria.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PValues {
    pub wilks: FStat,
    pub roy: FStat,
    pub pillai: FStat,
    pub lawley_hotelling: FStat,
}

pub fn all_pvalues(cv: &CriteriaValues) -> Result<PValues, DistError> {
    Ok(PValues {
        wilks: wilks_pvalue(cv)?,
        roy: roy_bound(cv)?,
        pillai: pillai_pvalue(cv)?,
        lawley_hotelling: lh_pvalue(cv)?,
    })
}
