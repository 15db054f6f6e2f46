#![allow(dead_code)]

pub mod props;

use std::path::PathBuf;

use galoscope::pipeline::InputDocument;
use galoscope::Complex;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn document(name: &str) -> InputDocument {
    InputDocument::from_json(&fixture_text(name)).unwrap()
}

pub fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

/// Largest distance from a point of `got` to its nearest point in `want`, and vice versa.
pub fn set_distance(got: &[Complex], want: &[Complex]) -> f64 {
    let one = |a: &[Complex], b: &[Complex]| {
        a.iter()
            .map(|x| b.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one(got, want).max(one(want, got))
}

/// [`set_distance`] for sets of points in `C^n`, with the sup norm.
pub fn point_set_distance(got: &[Vec<Complex>], want: &[Vec<Complex>]) -> f64 {
    let dist = |x: &[Complex], y: &[Complex]| x.iter().zip(y).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let one = |a: &[Vec<Complex>], b: &[Vec<Complex>]| {
        a.iter()
            .map(|x| b.iter().map(|y| dist(x, y)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one(got, want).max(one(want, got))
}
