//! Mass, center, momentum, second moment, energy and action.
//!
//! The quartic interaction is always reduced through moments:
//! `∬|x-y|²|u(x)|²|u(y)|² = 2 M m₂ - 2|X|²`.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::Result;
use crate::galilean::dot;
use crate::grid::GridState;
use crate::hermite::{apply_derivative, apply_position, CoeffState};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observables {
    pub mass: f64,
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub m2: f64,
    pub kinetic: f64,
    pub energy: f64,
}

/// `E = kinetic + (λ/2) m₂ + (η/2)(M m₂ - |X|²)`.
pub fn energy_from_moments(kinetic: f64, mass: f64, x: &[f64], m2: f64, lambda: f64, eta: f64) -> f64 {
    kinetic + 0.5 * lambda * m2 + 0.5 * eta * (mass * m2 - dot(x, x))
}

/// All functionals by grid quadrature; derivatives are spectral.
pub fn observables_grid(u: &GridState, lambda: f64, eta: f64) -> Observables {
    let spec = u.spec;
    let d = spec.d;
    let cell = spec.cell();
    let mut mass = 0.0;
    let mut x = vec![0.0; d];
    let mut m2 = 0.0;
    let mut pos = vec![0.0; d];
    for (flat, v) in u.values.iter().enumerate() {
        spec.coords(flat, &mut pos);
        let rho = v.norm_sqr();
        mass += rho;
        for (xi, p) in x.iter_mut().zip(&pos) {
            *xi += p * rho;
        }
        m2 += dot(&pos, &pos) * rho;
    }
    mass *= cell;
    m2 *= cell;
    x.iter_mut().for_each(|v| *v *= cell);

    let p: Vec<f64> = (0..d)
        .map(|axis| {
            let du = u.gradient(axis);
            u.values
                .iter()
                .zip(&du.values)
                .map(|(a, b)| (a.conj() * b).im)
                .sum::<f64>()
                * cell
        })
        .collect();

    // ½‖∇u‖² by Parseval on the spectrum.
    let k = spec.wavenumbers();
    let spectrum = u.fft();
    let mut idx = vec![0; d];
    let shape = spec.shape();
    let grad_sq: f64 = spectrum
        .iter()
        .enumerate()
        .map(|(flat, s)| {
            crate::tensor::unravel(flat, &shape, &mut idx);
            idx.iter().map(|&j| k[j] * k[j]).sum::<f64>() * s.norm_sqr()
        })
        .sum::<f64>()
        * cell
        / spec.len() as f64;
    let kinetic = 0.5 * grad_sq;
    let energy = energy_from_moments(kinetic, mass, &x, m2, lambda, eta);
    Observables {
        mass,
        x,
        p,
        m2,
        kinetic,
        energy,
    }
}

/// `X` and `P` from neighboring-coefficient sums in the κ-scaled basis:
/// with `s_i = Σ_n √(2(n_i+1)) a_n conj(a_{n+e_i})`,
/// `X_i = κ^{-1/4} Re s_i` and `P_i = -κ^{1/4} Im s_i`.
pub fn xp_from_coeffs(c: &CoeffState) -> (Vec<f64>, Vec<f64>) {
    let spec = c.spec;
    let d = spec.d;
    let modes = spec.modes_per_axis();
    let mut s = vec![C64::new(0.0, 0.0); d];
    for axis in 0..d {
        let stride = modes.pow((d - 1 - axis) as u32);
        for (flat, &a) in c.coeffs.iter().enumerate() {
            let k = (flat / stride) % modes;
            if k < spec.cutoff {
                s[axis] += (2.0 * (k + 1) as f64).sqrt() * a * c.coeffs[flat + stride].conj();
            }
        }
    }
    let q = spec.kappa.powf(0.25);
    let x = s.iter().map(|v| v.re / q).collect();
    let p = s.iter().map(|v| -v.im * q).collect();
    (x, p)
}

/// All functionals of a coefficient state, computed exactly by ladder algebra.
pub fn observables_coeffs(c: &CoeffState, lambda: f64, eta: f64) -> Result<Observables> {
    let d = c.spec.d;
    let mass = c.mass();
    let (x, p) = xp_from_coeffs(c);
    let mut m2 = 0.0;
    let mut grad_sq = 0.0;
    for axis in 0..d {
        m2 += apply_position(c, axis)?.mass();
        grad_sq += apply_derivative(c, axis)?.mass();
    }
    let kinetic = 0.5 * grad_sq;
    let energy = energy_from_moments(kinetic, mass, &x, m2, lambda, eta);
    Ok(Observables {
        mass,
        x,
        p,
        m2,
        kinetic,
        energy,
    })
}

/// `S_ω = E - ω M/2`.
pub fn action(obs: &Observables, omega: f64) -> f64 {
    obs.energy - 0.5 * omega * obs.mass
}

/// Energy of `u = G_κ(0,a,b) w₀` from the profile:
/// `Σ √κ(|n|+d/2)|a_n|² + (M/2)(|a|² + λ|b|²)`.
pub fn energy_via_w0(w0: &CoeffState, mass: f64, a: &[f64], b: &[f64], lambda: f64) -> f64 {
    w0.oscillator_energy() + 0.5 * mass * (dot(a, a) + lambda * dot(b, b))
}
