#![allow(dead_code)]

use congruence_core::series::{random_orthogonal, RigidTransform};
use congruence_core::TimeSeries;
use nalgebra::DVector;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn ts(states: &[&[f64]]) -> TimeSeries {
    TimeSeries::new(states).unwrap()
}

pub fn gaussian_series(rng: &mut ChaCha8Rng, n: usize, k: usize, scale: f64) -> TimeSeries {
    let data = (0..n * k)
        .map(|_| scale * Distribution::<f64>::sample(&StandardNormal, rng))
        .collect::<Vec<f64>>();
    TimeSeries::from_flat(k, data).unwrap()
}

pub fn random_rigid(rng: &mut ChaCha8Rng, k: usize, shift: f64) -> RigidTransform {
    let reflect = rng.random_bool(0.5);
    let m = random_orthogonal(k, rng, reflect);
    let v = DVector::from_fn(k, |_, _| rng.random_range(-shift..=shift));
    RigidTransform::new(m, v).unwrap()
}

pub fn right_angle_pair() -> (TimeSeries, TimeSeries) {
    (
        ts(&[&[-4.0, 0.0], &[0.0, 0.0], &[1.0, 0.0]]),
        ts(&[&[0.0, 3.0], &[0.0, 0.0], &[1.0, 0.0]]),
    )
}

/// Collinear triple against the same triple with its middle point lifted by
/// `eps`; structurally close, far from congruent for small `eps`.
pub fn unbounded_pair(eps: f64) -> (TimeSeries, TimeSeries) {
    let a = (1.0 - eps * eps).sqrt();
    (
        ts(&[&[-a, 0.0], &[0.0, 0.0], &[a, 0.0]]),
        ts(&[&[-a, 0.0], &[0.0, eps], &[a, 0.0]]),
    )
}
