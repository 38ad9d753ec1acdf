//! Closed-form solution maps for the two trapped Hartree-type models.
//!
//! Model H:  `u(t) = e^{-iΨ(t)} G_λ(t,a,b) U_κ(t) G_κ(0,a,b)^{-1} u₀`
//! Model H′: `v(t) = e^{-iΦ(t)} G_λ(t,a,b) U_κ(t) G_κ(0,a,b)^{-1} v₀`
//!
//! with `M = ‖u₀‖²`, `a = P/M`, `b = X/M`, `κ = λ + ηM` and
//! `U_κ(t) Ω_{n,κ} = e^{-i√κ(|n|+d/2)t} Ω_{n,κ}`.

use std::sync::OnceLock;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{Diagnostic, Diagnostics};
use crate::error::{Error, Result};
use crate::galilean::{dot, galilean_fn, ClassicalPath, GalileanParams};
use crate::grid::{GridSpec, GridState};
use crate::hermite::{ladder_pair_exact, synthesize_shifted, Analyzer, BasisSpec, CoeffState};
use crate::observables::{observables_coeffs, observables_grid, Observables};
use crate::quadrature::CompositeGauss;

/// Agreement required between the closed-form and quadrature values of Ψ.
pub const PHASE_TOLERANCE: f64 = 1e-8;
/// Relative grid-mass deficit tolerated when sampling a propagated state.
pub const GRID_LOSS_TOLERANCE: f64 = 1e-10;

const PSI_PANEL: f64 = 0.1;
const PSI_ATOL: f64 = 1e-10;
const PSI_ORDER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Model {
    #[serde(rename = "H")]
    H,
    #[serde(rename = "Hprime")]
    HPrime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub d: usize,
    pub lambda: f64,
    pub eta: f64,
    pub mass: f64,
    /// `P[u₀]/M`.
    pub a: Vec<f64>,
    /// `X[u₀]/M`.
    pub b: Vec<f64>,
    pub kappa: f64,
}

impl ModelParams {
    pub fn new(lambda: f64, eta: f64, mass: f64, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if !(mass > 0.0) {
            return Err(Error::ZeroMass);
        }
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                got: b.len(),
            });
        }
        Ok(Self {
            d: a.len(),
            lambda,
            eta,
            mass,
            kappa: lambda + eta * mass,
            a,
            b,
        })
    }

    pub fn from_observables(obs: &Observables, lambda: f64, eta: f64) -> Result<Self> {
        if !(obs.mass > 0.0) {
            return Err(Error::ZeroMass);
        }
        let a = obs.p.iter().map(|p| p / obs.mass).collect();
        let b = obs.x.iter().map(|x| x / obs.mass).collect();
        Self::new(lambda, eta, obs.mass, a, b)
    }

    /// The κ-scaled basis used for the spectral step.
    pub fn spectral_basis(&self, cutoff: usize) -> Result<BasisSpec> {
        BasisSpec::new(self.d, self.kappa, cutoff)
    }

    /// Trap period `2π/√κ`.
    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.kappa.sqrt()
    }

    /// `g_λ(·, a, b)`, the center-of-mass trajectory.
    pub fn center_path(&self) -> ClassicalPath {
        ClassicalPath {
            kappa: self.lambda,
            a: self.a.clone(),
            b: self.b.clone(),
        }
    }

    /// `G_κ(0,a,b)^{-1} = G(0,-a,-b)`.
    pub fn recentering(&self) -> GalileanParams {
        GalileanParams::new(0.0, self.kappa, self.a.clone(), self.b.clone()).inverse()
    }

    /// `G_λ(t,a,b)`.
    pub fn transport(&self, t: f64) -> GalileanParams {
        GalileanParams::new(t, self.lambda, self.a.clone(), self.b.clone())
    }
}

/// Parameters from a grid state.
pub fn derive_params(u0: &GridState, lambda: f64, eta: f64) -> Result<ModelParams> {
    ModelParams::from_observables(&observables_grid(u0, lambda, eta), lambda, eta)
}

/// Parameters from a coefficient state (in any κ-scaled basis).
pub fn derive_params_coeffs(c: &CoeffState, lambda: f64, eta: f64) -> Result<ModelParams> {
    ModelParams::from_observables(&observables_coeffs(c, lambda, eta)?, lambda, eta)
}

/// `U_κ(t)` with `κ = c.spec.kappa`: `a_n ↦ e^{-i√κ(|n|+d/2)t} a_n`.
pub fn spectral_evolve(c: &CoeffState, t: f64) -> CoeffState {
    let spec = c.spec;
    let coeffs = c
        .coeffs
        .iter()
        .enumerate()
        .map(|(flat, a)| a * C64::from_polar(1.0, -spec.oscillator_eigenvalue(&spec.multi_index(flat)) * t))
        .collect();
    CoeffState { spec, coeffs }
}

/// `‖x U_κ(s) w‖²`, exactly from the ladder algebra.
pub fn position_norm_sq(w: &CoeffState, s: f64) -> Result<f64> {
    let ws = spectral_evolve(w, s);
    let f = 0.5 / w.spec.kappa.sqrt();
    let mut total = 0.0;
    for axis in 0..w.spec.d {
        let (lo, hi) = ladder_pair_exact(&ws, axis)?;
        total += f * lo.add(&hi).mass();
    }
    Ok(total)
}

/// `Ψ(t) = (η/2) ∫₀ᵗ ‖x U_κ(s) w₀‖² ds` by adaptive composite Gauss–Legendre
/// on panels of length `0.1/√κ`.
pub fn psi_quadrature(eta: f64, w0: &CoeffState, t: f64) -> Result<f64> {
    if eta == 0.0 {
        return Ok(0.0);
    }
    // Validate once so the integrand closure can unwrap.
    position_norm_sq(w0, 0.0)?;
    let q = CompositeGauss::new(PSI_ORDER, PSI_PANEL / w0.spec.kappa.sqrt(), PSI_ATOL / eta.abs())?;
    Ok(0.5 * eta * q.integrate(|s| position_norm_sq(w0, s).unwrap_or(f64::NAN), 0.0, t))
}

/// Ψ from the two ladder invariants of `w₀`:
/// `Ψ(t) = (η/(4√κ)) S t + (η/(2κ)) sin(√κ t) Re(e^{-i√κ t} C)` with
/// `S = Σ_i ‖A_i w₀‖² + ‖A_i† w₀‖²` and `C = Σ_i (A_i w₀, A_i† w₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsiClosedForm {
    pub eta: f64,
    pub kappa: f64,
    pub s: f64,
    pub c: C64,
}

impl PsiClosedForm {
    pub fn new(eta: f64, w0: &CoeffState) -> Result<Self> {
        let mut s = 0.0;
        let mut c = C64::new(0.0, 0.0);
        for axis in 0..w0.spec.d {
            let (lo, hi) = ladder_pair_exact(w0, axis)?;
            s += lo.mass() + hi.mass();
            c += lo.inner(&hi);
        }
        Ok(Self {
            eta,
            kappa: w0.spec.kappa,
            s,
            c,
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let w = self.kappa.sqrt();
        self.eta / (4.0 * w) * self.s * t
            + self.eta / (2.0 * self.kappa) * (w * t).sin() * (C64::from_polar(1.0, -w * t) * self.c).re
    }

    /// `Ψ'(t) = (η/2)‖x U_κ(t) w₀‖²`.
    pub fn rate(&self, t: f64) -> f64 {
        let w = self.kappa.sqrt();
        self.eta / (4.0 * w) * (self.s + 2.0 * (self.c * C64::from_polar(1.0, -2.0 * w * t)).re)
    }
}

pub fn psi_closed_form(eta: f64, w0: &CoeffState, t: f64) -> Result<f64> {
    Ok(PsiClosedForm::new(eta, w0)?.eval(t))
}

/// `∫₀ᵗ |g_κ(s,a,b)|² ds` in closed form.
pub fn path_norm_sq_integral(p: &ClassicalPath, t: f64) -> f64 {
    let aa = dot(&p.a, &p.a);
    let bb = dot(&p.b, &p.b);
    let ab = dot(&p.a, &p.b);
    let k = p.kappa;
    if k > 0.0 {
        let w = k.sqrt();
        let s2 = (2.0 * w * t).sin() / (4.0 * w);
        let sn = (w * t).sin();
        aa / k * (0.5 * t - s2) + bb * (0.5 * t + s2) + 2.0 * ab / w * sn * sn / (2.0 * w)
    } else if k < 0.0 {
        let w = (-k).sqrt();
        let s2 = (2.0 * w * t).sinh() / (4.0 * w);
        let sh = (w * t).sinh();
        aa / (-k) * (s2 - 0.5 * t) + bb * (s2 + 0.5 * t) + 2.0 * ab / w * sh * sh / (2.0 * w)
    } else {
        aa * t * t * t / 3.0 + ab * t * t + bb * t
    }
}

/// `Φ(t) = -(ηM/2) ∫₀ᵗ |g_λ(s,a,b)|² ds`.
pub fn phi_phase(params: &ModelParams, t: f64) -> f64 {
    -0.5 * params.eta * params.mass * path_norm_sq_integral(&params.center_path(), t)
}

/// `Φ'(t) = -(ηM/2)|g_λ(t)|²`.
pub fn phi_rate(params: &ModelParams, t: f64) -> f64 {
    let (g, _) = params.center_path().eval(t);
    -0.5 * params.eta * params.mass * dot(&g, &g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseMethod {
    Quadrature,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseLedger {
    pub psi: f64,
    pub phi: f64,
    pub method: PhaseMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Propagated {
    pub t: f64,
    pub state: GridState,
    pub phases: PhaseLedger,
    pub diagnostics: Diagnostics,
}

/// Precomputed solution map for one initial state.
///
/// Holds the recentered profile `w₀ = G_κ(0,a,b)^{-1} u₀` in the κ basis;
/// states at different times are independent evaluations and may be
/// requested concurrently.
#[derive(Debug)]
pub struct ExactPropagator {
    pub model: Model,
    pub params: ModelParams,
    pub w0: CoeffState,
    /// Diagnostics from building `w₀` (truncation of the projection).
    pub diagnostics: Diagnostics,
    psi: PsiClosedForm,
    method: PhaseMethod,
    calibration: OnceLock<std::result::Result<f64, f64>>,
}

impl ExactPropagator {
    /// From an already recentered profile in the κ basis.
    pub fn from_profile(model: Model, params: ModelParams, w0: CoeffState) -> Result<Self> {
        if !(params.kappa > 0.0) {
            return Err(Error::KappaNonPositive(params.kappa));
        }
        if (w0.spec.kappa - params.kappa).abs() > 1e-14 * params.kappa || w0.spec.d != params.d {
            return Err(Error::InvalidArgument(format!(
                "profile basis (d = {}, kappa = {}) does not match parameters (d = {}, kappa = {})",
                w0.spec.d, w0.spec.kappa, params.d, params.kappa
            )));
        }
        let psi = PsiClosedForm::new(params.eta, &w0)?;
        Ok(Self {
            model,
            params,
            w0,
            diagnostics: Diagnostics::default(),
            psi,
            method: PhaseMethod::ClosedForm,
            calibration: OnceLock::new(),
        })
    }

    pub fn from_grid(model: Model, u0: &GridState, lambda: f64, eta: f64, cutoff: usize) -> Result<Self> {
        let params = derive_params(u0, lambda, eta)?;
        let an = Analyzer::new(params.spectral_basis(cutoff)?)?;
        let inv = params.recentering();
        let (g, gp, phase) = inv.resolve();
        let analysis = an.analyze_grid_shifted(u0, &g, &gp, phase)?;
        let mut out = Self::from_profile(model, params, analysis.state)?;
        out.diagnostics = analysis.diagnostics;
        Ok(out)
    }

    /// From a coefficient state in any κ-scaled basis.
    pub fn from_coeffs(model: Model, c: &CoeffState, lambda: f64, eta: f64, cutoff: usize) -> Result<Self> {
        let params = derive_params_coeffs(c, lambda, eta)?;
        Self::from_fn_with_params(model, params, cutoff, |x| c.evaluate(x))
    }

    /// From a callable field with known parameters.
    pub fn from_fn_with_params<F>(model: Model, params: ModelParams, cutoff: usize, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> C64,
    {
        let an = Analyzer::new(params.spectral_basis(cutoff)?)?;
        let analysis = an.analyze_fn(galilean_fn(&params.recentering(), f))?;
        let mut out = Self::from_profile(model, params, analysis.state)?;
        out.diagnostics = analysis.diagnostics;
        Ok(out)
    }

    pub fn with_phase_method(mut self, method: PhaseMethod) -> Self {
        self.method = method;
        self
    }

    pub fn phase_method(&self) -> PhaseMethod {
        self.method
    }

    pub fn psi_closed_form(&self) -> &PsiClosedForm {
        &self.psi
    }

    /// Compares the closed-form Ψ with the defining integral at two
    /// incommensurate times; computed once per propagator.
    pub fn calibrate(&self) -> Result<f64> {
        let r = self.calibration.get_or_init(|| {
            let period = self.params.period();
            let mut worst = 0.0f64;
            for t in [0.27 * period, 0.81 * period] {
                let q = match psi_quadrature(self.params.eta, &self.w0, t) {
                    Ok(v) => v,
                    Err(_) => return Err(f64::NAN),
                };
                worst = worst.max((q - self.psi.eval(t)).abs() / (1.0 + q.abs()));
            }
            if worst <= PHASE_TOLERANCE {
                Ok(worst)
            } else {
                Err(worst)
            }
        });
        r.map_err(Error::PhaseCalibration)
    }

    pub fn phases(&self, t: f64) -> Result<PhaseLedger> {
        let psi = match self.method {
            PhaseMethod::ClosedForm => {
                self.calibrate()?;
                self.psi.eval(t)
            }
            PhaseMethod::Quadrature => psi_quadrature(self.params.eta, &self.w0, t)?,
        };
        Ok(PhaseLedger {
            psi,
            phi: phi_phase(&self.params, t),
            method: self.method,
        })
    }

    /// The phase actually applied: Ψ for model H, Φ for model H′.
    pub fn global_phase(&self, t: f64) -> Result<f64> {
        let p = self.phases(t)?;
        Ok(match self.model {
            Model::H => p.psi,
            Model::HPrime => p.phi,
        })
    }

    /// `U_κ(t) w₀`.
    pub fn profile_at(&self, t: f64) -> CoeffState {
        spectral_evolve(&self.w0, t)
    }

    /// `X[u(t)]/M = g_λ(t,a,b)`.
    pub fn center(&self, t: f64) -> Vec<f64> {
        self.params.center_path().eval(t).0
    }

    /// The solution at time `t` as a callable field.
    pub fn state_fn(&self, t: f64) -> Result<impl Fn(&[f64]) -> C64 + Send + Sync> {
        let gauge = C64::from_polar(1.0, -self.global_phase(t)?);
        let w = self.profile_at(t);
        let (g, gp, phase) = self.params.transport(t).resolve();
        Ok(move |x: &[f64]| {
            let y: Vec<f64> = x.iter().zip(&g).map(|(x, g)| x - g).collect();
            gauge * phase * C64::from_polar(1.0, dot(x, &gp)) * w.evaluate(&y)
        })
    }

    /// The solution at time `t` sampled on a grid. The profile is
    /// synthesized at the translated points directly, so nothing wraps.
    pub fn state_on_grid(&self, t: f64, grid: &GridSpec) -> Result<Propagated> {
        let phases = self.phases(t)?;
        let gauge = match self.model {
            Model::H => phases.psi,
            Model::HPrime => phases.phi,
        };
        let w = self.profile_at(t);
        let (g, gp, phase) = self.params.transport(t).resolve();
        let mut state = synthesize_shifted(&w, grid, &g)?;
        let z = phase * C64::from_polar(1.0, -gauge);
        let mut x = vec![0.0; grid.d];
        for (flat, v) in state.values.iter_mut().enumerate() {
            grid.coords(flat, &mut x);
            *v *= z * C64::from_polar(1.0, dot(&x, &gp));
        }
        let loss = (1.0 - state.mass() / w.mass()).abs();
        let mut diagnostics = self.diagnostics.clone();
        diagnostics.push(Diagnostic::new("grid_loss", loss, GRID_LOSS_TOLERANCE));
        Ok(Propagated {
            t,
            state,
            phases,
            diagnostics,
        })
    }

    pub fn states_on_grid(&self, times: &[f64], grid: &GridSpec) -> Result<Vec<Propagated>> {
        self.calibrate()?;
        times.par_iter().map(|&t| self.state_on_grid(t, grid)).collect()
    }
}
