//! Report documents for the `fit`, `test` and `plot-data` commands.
//!
//! JSON documents round every floating-point number to 10 significant digits
//! (see [`round_sig10`]); integers and booleans pass through unchanged.
//!
//! Test report schema (top-level keys):
//!
//! | key          | content                                                          |
//! |--------------|------------------------------------------------------------------|
//! | `groups`     | per group: `label`, `n`, `alphaHat`, `betaHat`, `residSSCP`, `xBar`, `sxx` |
//! | `hypothesis` | `spec`, `kind`, `a`, `b`, `description`, `nuH`, `weights`, `z`   |
//! | `sE`         | pooled error SSCP (rows)                                         |
//! | `sH`         | hypothesis SSCP (rows)                                           |
//! | `criteria`   | roots, θ's, the four statistics, `s`, `m`, `h`, `nuH`, `nuE`, `q` |
//! | `pvalues`    | per criterion: `value`, `df1`, `df2`, `pValue`, `exact`, `method` |
//! | `decisions`  | `alpha`, `reject` per criterion, `fCritical` per criterion       |
//! | `notes`      | caveats and branch information                                   |
//! | `meta`       | `tool`, `version`, `responses`, `seed` (always null here)        |

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{PerCriterion, TestOutcome};
use crate::dataset::Dataset;
use crate::dist::DistError;
use crate::linalg::Mat;
use crate::model::{FittedGroup, ModelSet};

pub const TOOL_NAME: &str = "mslm";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Rounds to 10 significant digits.
pub fn round_sig10(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.9e}").parse().expect("formatted float parses")
}

/// Applies [`round_sig10`] to every non-integer number in a JSON tree.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            json!(round_sig10(x))
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_json).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GroupEntry {
    pub label: String,
    pub n: usize,
    pub alpha_hat: Vec<f64>,
    pub beta_hat: Vec<f64>,
    #[serde(rename = "residSSCP")]
    pub resid_sscp: Mat,
    pub x_bar: f64,
    pub sxx: f64,
}

impl From<&FittedGroup> for GroupEntry {
    fn from(g: &FittedGroup) -> Self {
        Self {
            label: g.label.clone(),
            n: g.n,
            alpha_hat: g.alpha_hat.clone(),
            beta_hat: g.beta_hat.clone(),
            resid_sscp: g.resid_sscp.clone(),
            x_bar: g.x_bar,
            sxx: g.sxx,
        }
    }
}

fn meta(responses: &[String]) -> Value {
    json!({
        "tool": TOOL_NAME,
        "version": VERSION,
        "responses": responses,
        "seed": Value::Null,
    })
}

pub fn fit_json(models: &ModelSet, responses: &[String]) -> Value {
    let groups: Vec<GroupEntry> = models.groups.iter().map(GroupEntry::from).collect();
    round_json(json!({
        "groups": groups,
        "sE": models.pooled_se,
        "nuE": models.nu_e,
        "meta": meta(responses),
    }))
}

pub fn test_json(
    models: &ModelSet,
    outcome: &TestOutcome,
    responses: &[String],
) -> Result<Value, DistError> {
    let groups: Vec<GroupEntry> = models.groups.iter().map(GroupEntry::from).collect();
    let (a, b) = outcome.hypothesis.coefficients();
    let m = &outcome.matrices;
    let f_critical = outcome.f_critical()?;
    Ok(round_json(json!({
        "groups": groups,
        "hypothesis": {
            "spec": outcome.hypothesis.to_string(),
            "kind": outcome.hypothesis.kind(),
            "a": a,
            "b": b,
            "description": outcome.hypothesis.describe(),
            "nuH": m.nu_h,
            "weights": m.d_diag,
            "z": m.z,
        },
        "sE": models.pooled_se,
        "sH": m.s_h,
        "criteria": outcome.criteria,
        "pvalues": outcome.pvalues,
        "decisions": {
            "alpha": outcome.decisions.alpha,
            "reject": outcome.decisions.reject,
            "fCritical": f_critical,
        },
        "notes": outcome.notes(),
        "meta": meta(responses),
    })))
}

fn write_matrix(out: &mut String, name: &str, m: &Mat) {
    let _ = writeln!(out, "{name}:");
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:>16.8}")).collect();
        let _ = writeln!(out, "  {}", row.join(" "));
    }
}

fn write_groups(out: &mut String, models: &ModelSet, responses: &[String]) {
    for g in &models.groups {
        let _ = writeln!(out, "group '{}' (n = {})", g.label, g.n);
        for (j, name) in responses.iter().enumerate() {
            let _ = writeln!(
                out,
                "  {name:<12} intercept {:>16.10}   slope {:>16.10}",
                g.alpha_hat[j], g.beta_hat[j]
            );
        }
    }
}

pub fn fit_text(models: &ModelSet, responses: &[String]) -> String {
    let mut out = String::new();
    write_groups(&mut out, models, responses);
    let _ = writeln!(out);
    write_matrix(&mut out, &format!("S_E (nuE = {})", models.nu_e), &models.pooled_se);
    out
}

pub fn test_text(
    models: &ModelSet,
    outcome: &TestOutcome,
    responses: &[String],
) -> Result<String, DistError> {
    let mut out = String::new();
    let cv = &outcome.criteria;
    let _ = writeln!(out, "H0: {}", outcome.hypothesis.describe());
    let _ = writeln!(out);
    write_groups(&mut out, models, responses);
    let _ = writeln!(out);
    write_matrix(&mut out, &format!("S_E (nuE = {})", cv.nu_e), &models.pooled_se);
    write_matrix(&mut out, &format!("S_H (nuH = {})", cv.nu_h), &outcome.matrices.s_h);
    let _ = writeln!(out);
    let _ = writeln!(out, "s = {}, m = {}, h = {}", cv.s, cv.m, cv.h);
    let _ = writeln!(out, "roots: {:?}", cv.lambdas);
    let _ = writeln!(out);

    let crit = outcome.f_critical()?;
    let stats = PerCriterion {
        wilks: cv.wilks,
        roy: cv.roy,
        pillai: cv.pillai,
        lawley_hotelling: cv.lawley_hotelling,
    };
    let names = ["Wilks", "Roy", "Pillai", "Lawley-Hotelling"];
    let fstats = outcome.fstats().to_array();
    let rejects = outcome.decisions.reject.to_array();
    let _ = writeln!(
        out,
        "{:<18}{:>14}{:>12}{:>8}{:>8}{:>14}{:>12}  decision (alpha = {})",
        "criterion", "statistic", "F", "df1", "df2", "p-value", "F crit", outcome.decisions.alpha
    );
    for (k, name) in names.iter().enumerate() {
        let f = fstats[k];
        let _ = writeln!(
            out,
            "{:<18}{:>14.8}{:>12.4}{:>8}{:>8}{:>14.4e}{:>12.4}  {}",
            name,
            stats.to_array()[k],
            f.value,
            f.df1,
            f.df2,
            f.p_value,
            crit.to_array()[k],
            if rejects[k] { "reject H0" } else { "fail to reject H0" }
        );
    }
    let _ = writeln!(out);
    for note in outcome.notes() {
        let _ = writeln!(out, "note: {note}");
    }
    Ok(out)
}

/// Observed points and fitted-line endpoints for one group and response.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PlotSeries {
    pub group: String,
    pub response: String,
    pub observed: Vec<[f64; 2]>,
    /// `[(min x, fitted), (max x, fitted)]`.
    pub fitted: [[f64; 2]; 2],
}

/// Needs only per-group fits, so data with zero residuals still plots.
pub fn plot_series(dataset: &Dataset, fits: &[FittedGroup]) -> Vec<PlotSeries> {
    let mut series = Vec::new();
    for (j, response) in dataset.response_names.iter().enumerate() {
        for (sample, fit) in dataset.groups.iter().zip(fits) {
            let x = sample.x();
            let observed = x
                .iter()
                .enumerate()
                .map(|(i, &xi)| [xi, sample.y()[(i, j)]])
                .collect();
            let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            series.push(PlotSeries {
                group: fit.label.clone(),
                response: response.clone(),
                observed,
                fitted: [[lo, fit.predict(j, lo)], [hi, fit.predict(j, hi)]],
            });
        }
    }
    series
}

pub fn plot_json(series: &[PlotSeries]) -> Value {
    round_json(json!({
        "series": series,
        "meta": { "tool": TOOL_NAME, "version": VERSION },
    }))
}

/// Long CSV: `group,response,kind,x,y` with `kind` in {observed, fitted}.
pub fn plot_csv(series: &[PlotSeries]) -> String {
    let mut out = String::from("group,response,kind,x,y\n");
    for s in series {
        let group = csv_field(&s.group);
        let response = csv_field(&s.response);
        for [x, y] in &s.observed {
            let _ = writeln!(out, "{group},{response},observed,{},{}", round_sig10(*x), round_sig10(*y));
        }
        for [x, y] in &s.fitted {
            let _ = writeln!(out, "{group},{response},fitted,{},{}", round_sig10(*x), round_sig10(*y));
        }
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}
