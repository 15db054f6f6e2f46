//! The single seeded random stream threaded through a run.
//!
//! Every random draw (charts, lines, gamma constants, base points, loop anchors) takes its
//! values from one [`RunRng`] in program order, so a seed fixes the whole report.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::Complex;

pub type RunRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> RunRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform sample from the closed unit disc.
pub fn unit_disc(rng: &mut RunRng) -> Complex {
    let r: f64 = rng.random::<f64>().sqrt();
    let theta: f64 = rng.random::<f64>() * std::f64::consts::TAU;
    Complex::from_polar(r, theta)
}

/// Uniform sample from the unit circle.
pub fn unit_circle(rng: &mut RunRng) -> Complex {
    let theta: f64 = rng.random::<f64>() * std::f64::consts::TAU;
    Complex::from_polar(1.0, theta)
}
