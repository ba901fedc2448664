mod common;

use mslm_core::analysis::run_test;
use mslm_core::dataset::from_reader;
use mslm_core::hypothesis::HypothesisSpec;
use mslm_core::model::{fit_all, fit_group};
use mslm_core::report::{plot_csv, plot_series, test_json};

use common::rosebush;

#[test]
fn wilks_threshold_note_on_rosebush() {
    let data = rosebush();
    let models = fit_all(&data.groups).unwrap();
    let out = run_test(&models, &HypothesisSpec::Parallelism, 0.05).unwrap();
    let (exact, q_one) = out.wilks_lambda_critical().unwrap();
    assert!((exact - 0.786903).abs() < 1e-5, "{exact}");
    assert!((q_one - 0.860199).abs() < 5e-5, "{q_one}");
    assert!(out.criteria.wilks < exact);
    let notes = out.notes();
    assert!(notes.iter().any(|n| n.contains("Lambda scale")));
    assert!(notes.iter().any(|n| n.contains("upper-bound")));
}

#[test]
fn test_report_has_documented_keys() {
    let data = rosebush();
    let models = fit_all(&data.groups).unwrap();
    let out = run_test(&models, &HypothesisSpec::ConcurrentAt(5.0), 0.01).unwrap();
    let doc = test_json(&models, &out, &data.response_names).unwrap();
    let keys: Vec<&String> = doc.as_object().unwrap().keys().collect();
    for k in ["groups", "hypothesis", "sE", "sH", "criteria", "pvalues", "decisions", "notes", "meta"] {
        assert!(keys.iter().any(|x| *x == k), "{k}");
    }
    assert_eq!(doc["hypothesis"]["spec"], "concurrent:5");
    assert_eq!(doc["decisions"]["alpha"], 0.01);
    assert_eq!(doc["meta"]["responses"][1], "y2");
}

#[test]
fn fitted_endpoints_hit_perfect_linear_data() {
    let mut text = String::from("group,x,y\n");
    for i in 0..6 {
        let x = i as f64 * 0.5;
        text.push_str(&format!("a,{x},{}\nb,{x},{}\n", 1.0 + 2.0 * x, -3.0 + 0.25 * x));
    }
    let data = from_reader(text.as_bytes()).unwrap();
    assert!(fit_all(&data.groups).is_err(), "zero residuals leave S_E singular");
    let fits: Vec<_> = data.groups.iter().map(|g| fit_group(g).unwrap()).collect();
    for s in plot_series(&data, &fits) {
        let first = s.observed.first().unwrap();
        let last = s.observed.last().unwrap();
        assert!((s.fitted[0][0] - first[0]).abs() < 1e-12);
        assert!((s.fitted[0][1] - first[1]).abs() < 1e-9);
        assert!((s.fitted[1][1] - last[1]).abs() < 1e-9);
    }
    assert!(plot_csv(&plot_series(&data, &fits)).starts_with("group,response,kind,x,y\n"));
}
