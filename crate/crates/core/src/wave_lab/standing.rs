//! Single- and multi-peak standing waves with closed-form time dependence.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::galilean::{compose_phase, dot, galilean_fn, ClassicalPath, GalileanParams};
use crate::grid::{GridSpec, GridState};
use crate::hermite::{eval_basis, synthesize_shifted, BasisSpec, CoeffState, MultiIndex};
use crate::observables::observables_grid;
use crate::propagator::{phi_phase, ExactPropagator, Model, ModelParams};

/// Standing-wave frequency of `M^{1/2} G_λ(t,a₁,b₁) Ω_{n,κ}` under model H:
/// `ω = (2√κ + ηM/√κ)(|n| + d/2)`. The solution rotates as `e^{-iωt/2}`.
pub fn omega_h(kappa: f64, eta: f64, mass: f64, degree: usize, d: usize) -> f64 {
    (2.0 * kappa.sqrt() + eta * mass / kappa.sqrt()) * (degree as f64 + 0.5 * d as f64)
}

/// Model H′ frequency `2√κ(|n| + d/2) - ηM|b₁|²`.
pub fn omega_hprime(kappa: f64, eta: f64, mass: f64, degree: usize, d: usize, b1: &[f64]) -> f64 {
    2.0 * kappa.sqrt() * (degree as f64 + 0.5 * d as f64) - eta * mass * dot(b1, b1)
}

/// `ω_{I,n}(M) = 3√M(n+½)` (λ = 0, η = 1, d = 1).
pub fn omega_case_i(n: usize, mass: f64) -> f64 {
    3.0 * mass.sqrt() * (n as f64 + 0.5)
}

/// `ω_{II,n}(M) = 2(n+½)(√κ - ½Mκ^{-1/2})`, `κ = 2 - M` (λ = 2, η = -1, d = 1).
pub fn omega_case_ii(n: usize, mass: f64) -> f64 {
    let kappa = 2.0 - mass;
    2.0 * (n as f64 + 0.5) * (kappa.sqrt() - 0.5 * mass / kappa.sqrt())
}

fn check_kappa(lambda: f64, eta: f64, mass: f64) -> Result<f64> {
    let kappa = lambda + eta * mass;
    if !(kappa > 0.0) {
        return Err(Error::KappaNonPositive(kappa));
    }
    Ok(kappa)
}

/// `e^{-iωt/2} M^{1/2} G_λ(t,a₁,b₁) Ω_{n,κ}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SinglePeak {
    pub model: Model,
    pub lambda: f64,
    pub eta: f64,
    pub mass: f64,
    pub kappa: f64,
    pub n: MultiIndex,
    pub a1: Vec<f64>,
    pub b1: Vec<f64>,
    pub omega: f64,
}

pub fn single_peak(
    model: Model,
    lambda: f64,
    eta: f64,
    mass: f64,
    n: MultiIndex,
    a1: Vec<f64>,
    b1: Vec<f64>,
) -> Result<SinglePeak> {
    if !(mass > 0.0) {
        return Err(Error::ZeroMass);
    }
    let kappa = check_kappa(lambda, eta, mass)?;
    let d = n.dim();
    if a1.len() != d || b1.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: a1.len().max(b1.len()),
        });
    }
    let omega = match model {
        Model::H => omega_h(kappa, eta, mass, n.degree(), d),
        Model::HPrime => {
            let aa = dot(&a1, &a1);
            let bb = dot(&b1, &b1);
            if (aa - lambda * bb).abs() > 1e-12 * (1.0 + aa + lambda.abs() * bb) {
                return Err(Error::PrimeCondition("|a1|^2 = lambda |b1|^2"));
            }
            if dot(&a1, &b1).abs() > 1e-12 * (1.0 + (aa * bb).sqrt()) {
                return Err(Error::PrimeCondition("a1 . b1 = 0"));
            }
            omega_hprime(kappa, eta, mass, n.degree(), d, &b1)
        }
    };
    Ok(SinglePeak {
        model,
        lambda,
        eta,
        mass,
        kappa,
        n,
        a1,
        b1,
        omega,
    })
}

impl SinglePeak {
    pub fn basis(&self, cutoff: usize) -> Result<BasisSpec> {
        BasisSpec::new(self.n.dim(), self.kappa, cutoff.max(self.n.0.iter().copied().max().unwrap_or(0) + 1))
    }

    /// Transported profile `M^{1/2} Ω_{n,κ}` as coefficients.
    pub fn profile(&self) -> Result<CoeffState> {
        let spec = self.basis(1)?;
        Ok(CoeffState::unit(spec, &self.n)?.scale(C64::new(self.mass.sqrt(), 0.0)))
    }

    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.lambda, self.eta, self.mass, self.a1.clone(), self.b1.clone())
    }

    /// Predicted solution at time `t` on a grid.
    pub fn state_on_grid(&self, t: f64, grid: &GridSpec) -> Result<GridState> {
        let w = self.profile()?;
        let gp = GalileanParams::new(t, self.lambda, self.a1.clone(), self.b1.clone());
        let (g, gprime, phase) = gp.resolve();
        let mut s = synthesize_shifted(&w, grid, &g)?;
        let z = phase * C64::from_polar(1.0, -0.5 * self.omega * t);
        let mut x = vec![0.0; grid.d];
        for (flat, v) in s.values.iter_mut().enumerate() {
            grid.coords(flat, &mut x);
            *v *= z * C64::from_polar(1.0, dot(&x, &gprime));
        }
        Ok(s)
    }

    /// Same solution with a different frequency; used as a sensitivity probe.
    pub fn with_omega(&self, omega: f64) -> Self {
        Self { omega, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakSpec {
    pub alpha: C64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub n: MultiIndex,
}

/// `u₀ = μ Σ α_j G_κ(0,a_j,b_j) Ω_{n_j,κ}` and its closed-form evolution
/// `u(t) = μ Σ α̃_j e^{-iΨ_j(t)} G_λ(t,a,b) G_κ(t,a_j-a,b_j-b) Ω_{n_j,κ}`
/// with `α̃_j = α_j e^{i(a_j·b - b_j·a)/2}` and
/// `Ψ_j(t) = Ψ(t) + √κ(|n_j| + d/2) t` (Φ in place of Ψ for model H′).
#[derive(Debug)]
pub struct MultiPeak {
    pub model: Model,
    pub lambda: f64,
    pub eta: f64,
    pub mass: f64,
    pub kappa: f64,
    pub mu: f64,
    pub peaks: Vec<PeakSpec>,
    pub tilde_alpha: Vec<C64>,
    pub params: ModelParams,
    /// Multiplies every `Ψ_j` rate; 1 for the true solution.
    pub rate_scale: f64,
    propagator: ExactPropagator,
}

/// Builds the multi-peak state; `μ` normalizes the mass on `grid` to `M`.
pub fn multi_peak(
    model: Model,
    lambda: f64,
    eta: f64,
    mass: f64,
    peaks: Vec<PeakSpec>,
    grid: &GridSpec,
    cutoff: usize,
) -> Result<MultiPeak> {
    let kappa = check_kappa(lambda, eta, mass)?;
    if peaks.is_empty() {
        return Err(Error::ZeroMass);
    }
    for p in &peaks {
        if p.n.dim() != grid.d || p.a.len() != grid.d || p.b.len() != grid.d {
            return Err(Error::DimensionMismatch {
                expected: grid.d,
                got: p.n.dim(),
            });
        }
    }
    let raw_grid = GridState::from_fn(*grid, superposition(&peaks, kappa, 1.0));
    let raw_mass = raw_grid.mass();
    if !(raw_mass > 0.0) {
        return Err(Error::ZeroMass);
    }
    let mu = (mass / raw_mass).sqrt();
    let obs = observables_grid(&raw_grid.scale(C64::new(mu, 0.0)), lambda, eta);
    let a: Vec<f64> = obs.p.iter().map(|p| p / obs.mass).collect();
    let b: Vec<f64> = obs.x.iter().map(|x| x / obs.mass).collect();
    let params = ModelParams::new(lambda, eta, obs.mass, a.clone(), b.clone())?;
    let tilde_alpha = peaks
        .iter()
        .map(|p| p.alpha * C64::from_polar(1.0, 0.5 * (dot(&p.a, &b) - dot(&p.b, &a))))
        .collect();
    let u0 = superposition(&peaks, kappa, mu);
    let propagator = ExactPropagator::from_fn_with_params(model, params.clone(), cutoff, u0)?;
    Ok(MultiPeak {
        model,
        lambda,
        eta,
        mass,
        kappa,
        mu,
        peaks,
        tilde_alpha,
        params,
        rate_scale: 1.0,
        propagator,
    })
}

fn superposition(peaks: &[PeakSpec], kappa: f64, mu: f64) -> impl Fn(&[f64]) -> C64 + '_ {
    move |x: &[f64]| {
        peaks
            .iter()
            .map(|p| {
                let spec = BasisSpec {
                    d: x.len(),
                    kappa,
                    cutoff: p.n.0.iter().copied().max().unwrap_or(0).max(1),
                };
                let (g, gp, phase) = GalileanParams::new(0.0, kappa, p.a.clone(), p.b.clone()).resolve();
                let y: Vec<f64> = x.iter().zip(&g).map(|(x, g)| x - g).collect();
                p.alpha * phase * C64::from_polar(1.0, dot(x, &gp)) * eval_basis(&spec, &p.n, &y)
            })
            .sum::<C64>()
            * mu
    }
}

impl MultiPeak {
    /// The propagator built from `u₀`, used for Ψ and as an independent check.
    pub fn propagator(&self) -> &ExactPropagator {
        &self.propagator
    }

    pub fn initial_fn(&self) -> impl Fn(&[f64]) -> C64 + '_ {
        superposition(&self.peaks, self.kappa, self.mu)
    }

    /// Relative-motion period `2π/√κ` shared by all peaks.
    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.kappa.sqrt()
    }

    /// Center of peak `j` at time `t`: `g_λ(t,a,b) + g_κ(t,a_j-a,b_j-b)`.
    pub fn peak_center(&self, j: usize, t: f64) -> Vec<f64> {
        let p = &self.peaks[j];
        let (gc, _) = self.params.center_path().eval(t);
        let rel = ClassicalPath {
            kappa: self.kappa,
            a: p.a.iter().zip(&self.params.a).map(|(x, y)| x - y).collect(),
            b: p.b.iter().zip(&self.params.b).map(|(x, y)| x - y).collect(),
        };
        let (gr, _) = rel.eval(t);
        gc.iter().zip(&gr).map(|(a, b)| a + b).collect()
    }

    fn global_phase(&self, t: f64) -> Result<f64> {
        Ok(match self.model {
            Model::H => self.propagator.phases(t)?.psi,
            Model::HPrime => phi_phase(&self.params, t),
        })
    }

    /// Closed-form solution at time `t` as a callable field.
    pub fn state_fn(&self, t: f64) -> Result<impl Fn(&[f64]) -> C64 + '_> {
        let base = self.global_phase(t)?;
        let outer = self.params.transport(t);
        let d = self.params.d;
        let terms: Vec<(C64, GalileanParams, BasisSpec, &MultiIndex)> = self
            .peaks
            .iter()
            .zip(&self.tilde_alpha)
            .map(|(p, ta)| {
                let rate = self.kappa.sqrt() * (p.n.degree() as f64 + 0.5 * d as f64);
                let coef = self.mu * ta * C64::from_polar(1.0, -self.rate_scale * (base + rate * t));
                let rel = GalileanParams::new(
                    t,
                    self.kappa,
                    p.a.iter().zip(&self.params.a).map(|(x, y)| x - y).collect(),
                    p.b.iter().zip(&self.params.b).map(|(x, y)| x - y).collect(),
                );
                let spec = BasisSpec {
                    d,
                    kappa: self.kappa,
                    cutoff: p.n.0.iter().copied().max().unwrap_or(0).max(1),
                };
                (coef, rel, spec, &p.n)
            })
            .collect();
        let inner = move |x: &[f64]| {
            terms
                .iter()
                .map(|(coef, rel, spec, n)| {
                    let f = |y: &[f64]| C64::new(eval_basis(spec, n, y), 0.0);
                    coef * galilean_fn(rel, f)(x)
                })
                .sum::<C64>()
        };
        Ok(galilean_fn(&outer, inner))
    }

    pub fn state_on_grid(&self, t: f64, grid: &GridSpec) -> Result<GridState> {
        Ok(GridState::from_fn(*grid, self.state_fn(t)?))
    }
}

/// `compose_phase` specialization used by the multi-peak derivation:
/// `G(0,a,b)^{-1} G(0,a_j,b_j) = e^{i(a_j·b - a·b_j)/2} G(0,a_j-a,b_j-b)`.
pub fn recentering_phase(a: &[f64], b: &[f64], aj: &[f64], bj: &[f64]) -> C64 {
    let na: Vec<f64> = a.iter().map(|v| -v).collect();
    let nb: Vec<f64> = b.iter().map(|v| -v).collect();
    compose_phase(&na, &nb, aj, bj)
}
