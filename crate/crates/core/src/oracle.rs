//! Independent split-step integrator for both models on a periodic grid.
//!
//! The nonlocal term is a quadratic potential built from moments,
//! `(|x|² ∗ |u|²)(x) = M|x|² - 2x·X + m₂`, so each potential sub-step is
//! an exact phase rotation. Strang splitting for `2iu_t = -Δu + V u`:
//! `e^{-iV dt/4}`, then `e^{-i|k|² dt/2}` in Fourier space, then
//! `e^{-iV' dt/4}` with `V'` from the updated moments.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::FftDirection;
use serde::Serialize;

use crate::diagnostics::{Diagnostic, Diagnostics};
use crate::error::{Error, Result};
use crate::grid::{fft_nd_in_place, GridSpec, GridState, BOUNDARY_TOLERANCE};
use crate::propagator::Model;
use crate::tensor::unravel;

/// `dt·max|V|/4` above which a potential half-step is considered coarse.
pub const POTENTIAL_STEP_TOLERANCE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mass: f64,
    pub x: [f64; 2],
    pub m2: f64,
}

pub fn moments(u: &GridState) -> Moments {
    moments_of(&u.spec, &u.values)
}

fn moments_at(positions: &[[f64; 2]], cell: f64, values: &[C64]) -> Moments {
    let mut m = Moments {
        mass: 0.0,
        x: [0.0; 2],
        m2: 0.0,
    };
    for (v, x) in values.iter().zip(positions) {
        let rho = v.norm_sqr();
        m.mass += rho;
        m.x[0] += x[0] * rho;
        m.x[1] += x[1] * rho;
        m.m2 += (x[0] * x[0] + x[1] * x[1]) * rho;
    }
    m.mass *= cell;
    m.x[0] *= cell;
    m.x[1] *= cell;
    m.m2 *= cell;
    m
}

/// `e^{i(a x² + b x + c)}` on a uniform axis by a second-order recurrence,
/// re-anchored with a direct evaluation every 4 points.
fn quadratic_phase(axis: &[f64], a: f64, b: f64, c: f64) -> Vec<C64> {
    let theta = |x: f64| (a * x + b) * x + c;
    let h = if axis.len() > 1 { axis[1] - axis[0] } else { 0.0 };
    let q = C64::from_polar(1.0, 2.0 * a * h * h);
    let mut out = Vec::with_capacity(axis.len());
    let (mut z, mut w) = (C64::new(1.0, 0.0), C64::new(1.0, 0.0));
    for (j, &x) in axis.iter().enumerate() {
        if j % 4 == 0 {
            z = C64::from_polar(1.0, theta(x));
            w = C64::from_polar(1.0, a * (2.0 * x * h + h * h) + b * h);
        }
        out.push(z);
        z *= w;
        w *= q;
    }
    out
}

fn moments_of(spec: &GridSpec, values: &[C64]) -> Moments {
    let mut m = Moments {
        mass: 0.0,
        x: [0.0; 2],
        m2: 0.0,
    };
    let mut x = [0.0; 2];
    for (flat, v) in values.iter().enumerate() {
        spec.coords(flat, &mut x[..spec.d]);
        let rho = v.norm_sqr();
        m.mass += rho;
        m.x[0] += x[0] * rho;
        m.x[1] += x[1] * rho;
        m.m2 += (x[0] * x[0] + x[1] * x[1]) * rho;
    }
    let cell = spec.cell();
    m.mass *= cell;
    m.x[0] *= cell;
    m.x[1] *= cell;
    m.m2 *= cell;
    m
}

fn potential_at(x: &[f64], mo: &Moments, lambda: f64, eta: f64, model: Model) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let xx: f64 = x.iter().zip(&mo.x).map(|(a, b)| a * b).sum();
    let nonlocal = mo.mass * r2 - 2.0 * xx
        + match model {
            Model::H => mo.m2,
            Model::HPrime => 0.0,
        };
    lambda * r2 + eta * nonlocal
}

/// Model H: `λ|x|² + η(M|x|² - 2x·X + m₂)`; model H′ drops `m₂`.
pub fn effective_potential(u: &GridState, lambda: f64, eta: f64, model: Model) -> Vec<f64> {
    let mo = moments(u);
    let mut x = [0.0; 2];
    (0..u.spec.len())
        .map(|flat| {
            u.spec.coords(flat, &mut x[..u.spec.d]);
            potential_at(&x[..u.spec.d], &mo, lambda, eta, model)
        })
        .collect()
}

/// Reusable Strang stepper for a fixed grid, model and time step.
#[derive(Debug, Clone)]
pub struct Stepper {
    pub spec: GridSpec,
    pub dt: f64,
    pub lambda: f64,
    pub eta: f64,
    pub model: Model,
    kinetic: Vec<C64>,
    positions: Vec<[f64; 2]>,
    axis: Vec<f64>,
}

impl Stepper {
    pub fn new(spec: GridSpec, dt: f64, lambda: f64, eta: f64, model: Model) -> Self {
        let k = spec.wavenumbers();
        let shape = spec.shape();
        let mut idx = vec![0; spec.d];
        let norm = 1.0 / spec.len() as f64;
        let kinetic = (0..spec.len())
            .map(|flat| {
                unravel(flat, &shape, &mut idx);
                let k2: f64 = idx.iter().map(|&j| k[j] * k[j]).sum();
                C64::from_polar(norm, -0.5 * k2 * dt)
            })
            .collect();
        Self {
            spec,
            dt,
            lambda,
            eta,
            model,
            kinetic,
            positions: spec.positions(),
            axis: spec.axis(),
        }
    }

    fn potential_phase(&self, values: &mut [C64]) -> f64 {
        let mo = moments_at(&self.positions, self.spec.cell(), values);
        let d = self.spec.d;
        // V = A|x|² + B·x + C is separable; build one phase table per axis.
        let quad = self.lambda + self.eta * mo.mass;
        let constant = match self.model {
            Model::H => self.eta * mo.m2,
            Model::HPrime => 0.0,
        };
        let scale = -0.25 * self.dt;
        let mut tables = [Vec::new(), Vec::new()];
        let (mut hi, mut lo) = (constant, constant);
        for ax in 0..d {
            let lin = -2.0 * self.eta * mo.x[ax];
            let pot = |x: f64| (quad * x + lin) * x;
            let (mut ah, mut al) = (f64::NEG_INFINITY, f64::INFINITY);
            for &x in &self.axis {
                let p = pot(x);
                ah = ah.max(p);
                al = al.min(p);
            }
            hi += ah;
            lo += al;
            let c = if ax == 0 { scale * constant } else { 0.0 };
            tables[ax] = quadratic_phase(&self.axis, scale * quad, scale * lin, c);
        }
        match d {
            1 => {
                for (v, z) in values.iter_mut().zip(&tables[0]) {
                    *v *= z;
                }
            }
            _ => {
                let n = self.axis.len();
                for (i, zi) in tables[0].iter().enumerate() {
                    for (v, zj) in values[i * n..(i + 1) * n].iter_mut().zip(&tables[1]) {
                        *v *= zi * zj;
                    }
                }
            }
        }
        hi.abs().max(lo.abs())
    }

    /// One Strang step in place. Returns `dt·max|V|/4`.
    pub fn step_in_place(&self, values: &mut Vec<C64>) -> f64 {
        let v1 = self.potential_phase(values);
        let shape = self.spec.shape();
        fft_nd_in_place(values, &shape, FftDirection::Forward);
        for (s, m) in values.iter_mut().zip(&self.kinetic) {
            *s *= m;
        }
        fft_nd_in_place(values, &shape, FftDirection::Inverse);
        let v2 = self.potential_phase(values);
        0.25 * self.dt * v1.max(v2)
    }
}

/// A single Strang step.
pub fn step(u: &GridState, dt: f64, lambda: f64, eta: f64, model: Model) -> GridState {
    let s = Stepper::new(u.spec, dt, lambda, eta, model);
    let mut values = u.values.clone();
    s.step_in_place(&mut values);
    GridState { spec: u.spec, values }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegrateOptions {
    /// Required agreement between the result and its dt-halved counterpart.
    pub tolerance: f64,
    /// Combine dt and dt/2 runs as `(4 fine - coarse)/3`.
    pub extrapolate: bool,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            extrapolate: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<GridState>,
    /// Largest relative change seen when halving dt.
    pub refinement_change: f64,
    pub diagnostics: Diagnostics,
}

/// Steps per snapshot interval so that no step exceeds `dt`.
fn step_counts(times: &[f64], dt: f64) -> Vec<usize> {
    let mut t_prev = 0.0;
    times
        .iter()
        .map(|&t| {
            let span = t - t_prev;
            t_prev = t;
            if span > 0.0 {
                (span / dt - 1e-9).ceil().max(1.0) as usize
            } else {
                0
            }
        })
        .collect()
}

/// Plain Strang run returning snapshots at `times` (increasing, from 0).
/// Each interval between snapshots is split into equal steps of at most `dt`.
/// Also returns the largest `dt·max|V|/4` encountered.
pub fn run(u0: &GridState, times: &[f64], dt: f64, lambda: f64, eta: f64, model: Model) -> (Vec<GridState>, f64) {
    run_with_counts(u0, times, &step_counts(times, dt), lambda, eta, model)
}

fn run_with_counts(
    u0: &GridState,
    times: &[f64],
    counts: &[usize],
    lambda: f64,
    eta: f64,
    model: Model,
) -> (Vec<GridState>, f64) {
    let mut values = u0.values.clone();
    let mut out = Vec::with_capacity(times.len());
    let mut t_prev = 0.0;
    let mut worst = 0.0f64;
    let mut cache: Option<Stepper> = None;
    for (&t, &n) in times.iter().zip(counts) {
        if n > 0 {
            let h = (t - t_prev) / n as f64;
            let stepper = match cache.take() {
                Some(s) if s.dt == h => s,
                _ => Stepper::new(u0.spec, h, lambda, eta, model),
            };
            for _ in 0..n {
                worst = worst.max(stepper.step_in_place(&mut values));
            }
            cache = Some(stepper);
        }
        out.push(GridState {
            spec: u0.spec,
            values: values.clone(),
        });
        t_prev = t;
    }
    (out, worst)
}

fn richardson(coarse: &[GridState], fine: &[GridState]) -> Vec<GridState> {
    coarse
        .iter()
        .zip(fine)
        .map(|(c, f)| GridState {
            spec: c.spec,
            values: c.values.iter().zip(&f.values).map(|(c, f)| (4.0 * f - c) / 3.0).collect(),
        })
        .collect()
}

fn max_change(a: &[GridState], b: &[GridState]) -> f64 {
    a.iter().zip(b).map(|(a, b)| a.rel_l2_distance(b)).fold(0.0, f64::max)
}

/// Snapshots at `samples` equally spaced times in `[0, t_end]` (only `u₀`
/// when `t_end = 0`), with step `u0.spec.dt` and a refinement check.
pub fn integrate(
    u0: &GridState,
    t_end: f64,
    samples: usize,
    lambda: f64,
    eta: f64,
    model: Model,
    opts: IntegrateOptions,
) -> Result<Trajectory> {
    let times: Vec<f64> = if t_end == 0.0 {
        vec![0.0]
    } else if samples <= 1 {
        vec![t_end]
    } else {
        (0..samples).map(|j| t_end * j as f64 / (samples - 1) as f64).collect()
    };
    integrate_at(u0, &times, lambda, eta, model, opts)
}

/// As [`integrate`] with explicit snapshot times.
pub fn integrate_at(
    u0: &GridState,
    times: &[f64],
    lambda: f64,
    eta: f64,
    model: Model,
    opts: IntegrateOptions,
) -> Result<Trajectory> {
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|t| *t < 0.0) {
        return Err(Error::InvalidArgument("snapshot times must be increasing and non-negative".into()));
    }
    let dt = u0.spec.dt;
    if times.iter().all(|t| *t == 0.0) {
        return Ok(Trajectory {
            times: times.to_vec(),
            states: vec![u0.clone(); times.len()],
            refinement_change: 0.0,
            diagnostics: Diagnostics::default(),
        });
    }
    let base = step_counts(times, dt);
    let levels: Vec<usize> = if opts.extrapolate { vec![1, 2, 4] } else { vec![1, 2] };
    let runs: Vec<(Vec<GridState>, f64)> = levels
        .par_iter()
        .map(|&r| {
            let counts: Vec<usize> = base.iter().map(|n| n * r).collect();
            run_with_counts(u0, times, &counts, lambda, eta, model)
        })
        .collect();
    let phase_step = runs[0].1;
    let (states, change, order) = if opts.extrapolate {
        let r1 = richardson(&runs[0].0, &runs[1].0);
        let r2 = richardson(&runs[1].0, &runs[2].0);
        let change = max_change(&r2, &r1);
        (r2, change, 4.0)
    } else {
        let change = max_change(&runs[1].0, &runs[0].0);
        (runs[1].0.clone(), change, 2.0)
    };
    if !(change <= opts.tolerance) {
        let required_dt = if change > 0.0 {
            0.9 * dt * (opts.tolerance / change).powf(1.0 / order)
        } else {
            dt
        };
        return Err(Error::ToleranceNotMet {
            achieved: change,
            tolerance: opts.tolerance,
            required_dt,
        });
    }
    let mut diagnostics = Diagnostics::default();
    diagnostics.push(Diagnostic::new("potential_phase_step", phase_step, POTENTIAL_STEP_TOLERANCE));
    let boundary = states.iter().map(|s| s.boundary_ratio()).fold(0.0, f64::max);
    diagnostics.push(Diagnostic::new("boundary_density", boundary, BOUNDARY_TOLERANCE));
    Ok(Trajectory {
        times: times.to_vec(),
        states,
        refinement_change: change,
        diagnostics,
    })
}

/// `max_j ‖2i∂ₜu + Δu - V(u)u‖₂ / ‖u‖₂` over the interior samples of a
/// uniformly sampled trajectory, with 4th-order central differences in time.
pub fn pde_residual(states: &[GridState], dt_sample: f64, lambda: f64, eta: f64, model: Model) -> Result<f64> {
    if states.len() < 5 {
        return Err(Error::InvalidArgument("residual needs at least 5 samples".into()));
    }
    let mut worst = 0.0f64;
    for j in 2..states.len() - 2 {
        let u = &states[j];
        let lap = u.laplacian();
        let pot = effective_potential(u, lambda, eta, model);
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..u.values.len() {
            let dudt = (-states[j + 2].values[i] + 8.0 * states[j + 1].values[i] - 8.0 * states[j - 1].values[i]
                + states[j - 2].values[i])
                / (12.0 * dt_sample);
            let r = C64::new(0.0, 2.0) * dudt + lap.values[i] - pot[i] * u.values[i];
            num += r.norm_sqr();
            den += u.values[i].norm_sqr();
        }
        worst = worst.max((num / den).sqrt());
    }
    Ok(worst)
}
