use mslm_core::dist::{
    all_pvalues, f_cdf, f_quantile, f_sf, inc_beta, lh_pvalue, lh_transform, ln_gamma,
};
use mslm_core::linalg::Mat;
use mslm_core::teststats::compute;
use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};
use statrs::function::{beta::beta_reg, gamma::ln_gamma as statrs_ln_gamma};

#[test]
fn ln_gamma_agrees_with_statrs() {
    for &x in &[0.1, 0.5, 1.0, 1.5, 2.0, 3.7, 10.0, 12.5, 57.25, 170.0] {
        let (ours, theirs) = (ln_gamma(x), statrs_ln_gamma(x));
        assert!((ours - theirs).abs() <= 1e-12 * theirs.abs().max(1.0), "x={x}: {ours} vs {theirs}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn inc_beta_agrees_with_statrs(x in 0.0..=1.0f64, a in 0.05..80.0f64, b in 0.05..80.0f64) {
        let ours = inc_beta(x, a, b).unwrap();
        let theirs = beta_reg(a, b, x);
        prop_assert!((ours - theirs).abs() <= 1e-10, "I_{x}({a},{b}) = {ours} vs {theirs}");
    }

    #[test]
    fn f_cdf_agrees_with_statrs(x in 0.0..50.0f64, d1 in 1u32..40, d2 in 1u32..200) {
        let (d1, d2) = (f64::from(d1), f64::from(d2));
        let theirs = FisherSnedecor::new(d1, d2).unwrap();
        prop_assert!((f_cdf(x, d1, d2).unwrap() - theirs.cdf(x)).abs() <= 1e-10);
        prop_assert!((f_sf(x, d1, d2).unwrap() - theirs.sf(x)).abs() <= 1e-10);
    }

    #[test]
    fn f_cdf_is_monotone(x in 0.0..30.0f64, dx in 0.0..5.0f64, d1 in 0.5..30.0f64, d2 in 0.5..100.0f64) {
        prop_assert!(f_cdf(x + dx, d1, d2).unwrap() >= f_cdf(x, d1, d2).unwrap());
    }

    #[test]
    fn quantile_round_trip(p in 0.001..0.999f64, d1 in 1.0..30.0f64, d2 in 2.0..100.0f64) {
        let x = f_quantile(p, d1, d2).unwrap();
        prop_assert!((f_cdf(x, d1, d2).unwrap() - p).abs() <= 1e-8);
    }
}

#[test]
fn cdf_reaches_one_in_the_far_tail() {
    for &(d1, d2) in &[(1.0, 1.0), (2.0, 25.0), (5.0, 12.0), (30.0, 200.0)] {
        let x = f_quantile(0.999999, d1, d2).unwrap();
        assert!((f_cdf(x, d1, d2).unwrap() - 0.999999).abs() <= 1e-8);
        let far = f_quantile(1.0 - 1e-9, d1, d2).unwrap();
        assert!(f_cdf(far, d1, d2).unwrap() >= 1.0 - 1e-8);
        assert!(f_sf(far, d1, d2).unwrap() <= 1e-8);
    }
}

#[test]
fn zero_hypothesis_gives_unit_pvalues() {
    let se = Mat::from_rows(&[&[3.0, 0.5, 0.1], &[0.5, 2.0, 0.2], &[0.1, 0.2, 1.0]]).unwrap();
    for nu_h in 1..=4 {
        let cv = compute(&Mat::zeros(3, 3), &se, nu_h, 30).unwrap();
        let p = all_pvalues(&cv).unwrap();
        for f in [p.wilks, p.roy, p.pillai, p.lawley_hotelling] {
            assert_eq!(f.p_value, 1.0, "nuH = {nu_h}: {f:?}");
        }
    }
}

#[test]
fn pvalue_is_sf_of_reported_f() {
    let se = Mat::from_rows(&[&[4.0, 1.0], &[1.0, 3.0]]).unwrap();
    let sh = Mat::from_rows(&[&[2.0, 0.7], &[0.7, 1.5]]).unwrap();
    for nu_h in 1..=4 {
        let cv = compute(&sh, &se, nu_h, 20).unwrap();
        let p = all_pvalues(&cv).unwrap();
        for f in [p.wilks, p.roy, p.pillai, p.lawley_hotelling] {
            let cdf = f_cdf(f.value, f.df1, f.df2).unwrap();
            assert!((f.p_value - (1.0 - cdf)).abs() <= 1e-10, "{f:?}");
        }
    }
}

#[test]
fn rosebush_lh_critical_value_needs_q_set_to_one() {
    // Standard (s, m, h) for nuH = 1, nuE = 26, q = 2: LH refers to F(2, 25).
    let (_, df1, df2) = lh_transform(1.0, 1.0, 0.0, 11.5);
    assert_eq!((df1, df2), (2.0, 25.0));
    assert!((f_quantile(0.95, df1, df2).unwrap() - 3.385190).abs() < 1e-5);

    // Writing 1 in place of q gives (1, -0.5, 12) and F(1, 26), whose 95% point is 4.225201.
    let (_, df1, df2) = lh_transform(1.0, 1.0, -0.5, 12.0);
    assert_eq!((df1, df2), (1.0, 26.0));
    let crit = f_quantile(0.95, df1, df2).unwrap();
    assert!((crit - 4.225201).abs() < 1e-3, "{crit}");
}

#[test]
fn rosebush_exact_wilks_threshold() {
    // Lambda_crit = (nuE - q + 1) / ((nuE - q + 1) + q F_{0.05; q, nuE - q + 1})
    let f = f_quantile(0.95, 2.0, 25.0).unwrap();
    let crit = 25.0 / (25.0 + 2.0 * f);
    assert!((crit - 0.78690).abs() < 1e-4, "{crit}");
}

#[test]
fn lh_pvalue_uses_lh_transform() {
    let se = Mat::from_rows(&[&[4.0, 1.0, 0.0], &[1.0, 3.0, 0.5], &[0.0, 0.5, 2.0]]).unwrap();
    let sh = Mat::from_rows(&[&[2.0, 0.7, 0.1], &[0.7, 1.5, 0.3], &[0.1, 0.3, 0.8]]).unwrap();
    let cv = compute(&sh, &se, 3, 40).unwrap();
    let f = lh_pvalue(&cv).unwrap();
    let (value, df1, df2) = lh_transform(cv.lawley_hotelling, cv.s as f64, cv.m, cv.h);
    assert_eq!((f.value, f.df1, f.df2), (value, df1, df2));
    let theirs = FisherSnedecor::new(df1, df2).unwrap().sf(value);
    assert!((f.p_value - theirs).abs() <= 1e-10);
}
