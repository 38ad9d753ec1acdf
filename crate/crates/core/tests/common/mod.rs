#![allow(dead_code)]

use num_complex::Complex64 as C64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trapwave::galilean::{galilean_fn, GalileanParams};
use trapwave::{BasisSpec, CoeffState, GridSpec, GridState};

/// Random coefficients with geometric decay in the degree.
pub fn random_profile(spec: BasisSpec, seed: u64) -> CoeffState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = (0..spec.len())
        .map(|flat| {
            let amp = (-0.4 * spec.multi_index(flat).degree() as f64).exp();
            C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * amp
        })
        .collect();
    CoeffState::from_coeffs(spec, coeffs).unwrap()
}

/// Random profile with `|a|, |b| <= 1` boost, normalized to unit mass.
pub fn random_boosted(seed: u64, cutoff: usize) -> (CoeffState, Vec<f64>, Vec<f64>) {
    let c = random_profile(BasisSpec::new(1, 1.0, cutoff).unwrap(), seed);
    let c = c.scale(C64::new(1.0 / c.mass().sqrt(), 0.0));
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let a = vec![rng.random_range(-1.0..1.0)];
    let b = vec![rng.random_range(-1.0..1.0)];
    (c, a, b)
}

pub fn boosted_grid(c: &CoeffState, a: &[f64], b: &[f64], grid: &GridSpec) -> GridState {
    let g = GalileanParams::new(0.0, 1.0, a.to_vec(), b.to_vec());
    GridState::from_fn(*grid, galilean_fn(&g, |x| c.evaluate(x)))
}

pub fn max_abs_diff(u: &GridState, v: &GridState) -> f64 {
    u.values
        .iter()
        .zip(&v.values)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}
