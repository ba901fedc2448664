#![allow(dead_code)]

use std::path::PathBuf;

use mslm_core::dataset::{ingest, Dataset};
use mslm_core::hypothesis::HypothesisSpec;
use mslm_core::linalg::Mat;
use mslm_core::model::GroupSample;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rosebush_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/rosebush.csv")
}

pub fn rosebush() -> Dataset {
    ingest(rosebush_path()).expect("rosebush.csv loads")
}

pub fn mat(rows: &[&[f64]]) -> Mat {
    Mat::from_rows(rows).unwrap()
}

pub fn rel_frob(got: &Mat, want: &Mat) -> f64 {
    got.sub(want).unwrap().frobenius_norm() / want.frobenius_norm().max(f64::MIN_POSITIVE)
}

pub fn max_abs_diff(got: &Mat, want: &Mat) -> f64 {
    got.sub(want).unwrap().max_abs()
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

pub fn random_mat<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Mat {
    let data = (0..rows * cols).map(|_| normal(rng)).collect();
    Mat::new(rows, cols, data).unwrap()
}

/// `M'M + eps I`.
pub fn random_spd<R: Rng + ?Sized>(rng: &mut R, n: usize, eps: f64) -> Mat {
    let m = random_mat(rng, n + 2, n);
    let mtm = mslm_core::linalg::matmul(&m.transpose(), &m).unwrap();
    mtm.add(&Mat::identity(n).scale(eps)).unwrap()
}

/// Random group: distinct-ish x values, random line plus N(0, 1) noise per response.
pub fn random_group<R: Rng + ?Sized>(rng: &mut R, label: &str, n: usize, q: usize) -> GroupSample {
    let x: Vec<f64> = (0..n)
        .map(|i| i as f64 + rng.random_range(-0.4..0.4) + rng.random_range(-3.0..3.0_f64).round())
        .collect();
    let alpha: Vec<f64> = (0..q).map(|_| rng.random_range(-5.0..5.0)).collect();
    let beta: Vec<f64> = (0..q).map(|_| rng.random_range(-2.0..2.0)).collect();
    let mut y = Mat::zeros(n, q);
    for i in 0..n {
        for j in 0..q {
            y[(i, j)] = alpha[j] + beta[j] * x[i] + normal(rng);
        }
    }
    GroupSample::new(label, x, y).unwrap()
}

/// R groups sharing q, each with n_r drawn from `n_min..=12` and at least q + 3.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, r: usize, q: usize, n_min: usize) -> Vec<GroupSample> {
    (0..r)
        .map(|g| {
            let n = rng.random_range(n_min.max(q + 3)..=12);
            random_group(rng, &format!("g{g}"), n, q)
        })
        .collect()
}

pub fn random_hypothesis<R: Rng + ?Sized>(rng: &mut R, k: usize) -> HypothesisSpec {
    match k % 4 {
        0 => HypothesisSpec::Parallelism,
        1 => HypothesisSpec::CommonIntercept,
        2 => HypothesisSpec::ConcurrentAt(rng.random_range(-5.0..15.0)),
        _ => loop {
            let a: f64 = rng.random_range(-2.0..2.0);
            let b: f64 = rng.random_range(-2.0..2.0);
            if a.abs() + b.abs() > 0.1 {
                break HypothesisSpec::Linear(a, b);
            }
        },
    }
}
