//! Orbital-stability experiments for single-peak standing waves in d = 1.
//!
//! The distance to the orbit of `φ = M^{1/2}Ω_{n,κ}` is
//! `inf_{θ,y} ‖φ - e^{iθ}u(·-y)‖_{Σ^s}`, computed on κ = 1 coefficients.
//! Translations act on coefficients as `T_y = e^{-y∂} = S e^{-iyJ} S^{-1}`
//! with `S = diag(iᵐ)` and `J` the Hermite Jacobi matrix, so the θ
//! minimum is closed form and only `y` needs a search.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{Diagnostic, Diagnostics};
use crate::error::{Error, Result};
use crate::galilean::{galilean_fn, GalileanParams};
use crate::hermite::{Analyzer, BasisSpec, CoeffState, MultiIndex};
use crate::observables::xp_from_coeffs;
use crate::propagator::{ExactPropagator, Model, ModelParams};

/// Tolerance on golden-section refinement of the translation.
pub const TRANSLATION_TOLERANCE: f64 = 1e-8;

/// Coefficient-space translation on the first `len` κ = 1 modes.
#[derive(Debug, Clone)]
pub struct Translator {
    xi: Vec<f64>,
    /// `S V`, `len × len`, row-major.
    sv: Vec<C64>,
    /// `Vᵀ S^{-1}`, `len × len`, row-major.
    vs: Vec<C64>,
    len: usize,
}

impl Translator {
    pub fn new(len: usize) -> Self {
        let j = DMatrix::from_fn(len, len, |r, c| {
            if r + 1 == c {
                (c as f64 / 2.0).sqrt()
            } else if c + 1 == r {
                (r as f64 / 2.0).sqrt()
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(j);
        let ipow = |m: usize| match m % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
        let mut sv = vec![C64::new(0.0, 0.0); len * len];
        let mut vs = vec![C64::new(0.0, 0.0); len * len];
        for m in 0..len {
            for k in 0..len {
                let v = eig.eigenvectors[(m, k)];
                sv[m * len + k] = ipow(m) * v;
                vs[k * len + m] = ipow(m).conj() * v;
            }
        }
        Self {
            xi: eig.eigenvalues.as_slice().to_vec(),
            sv,
            vs,
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn spectral(&self, u: &[C64]) -> Vec<C64> {
        let n = self.len;
        (0..n)
            .map(|k| (0..u.len().min(n)).map(|m| self.vs[k * n + m] * u[m]).sum())
            .collect()
    }

    fn from_spectral(&self, uh: &[C64], y: f64, out: &mut [C64]) {
        let n = self.len;
        let rot: Vec<C64> = uh
            .iter()
            .zip(&self.xi)
            .map(|(u, xi)| u * C64::from_polar(1.0, -y * xi))
            .collect();
        for (m, o) in out.iter_mut().enumerate() {
            let row = &self.sv[m * n..(m + 1) * n];
            *o = row.iter().zip(&rot).map(|(a, b)| a * b).sum();
        }
    }

    /// Coefficients of `u(· - y)`.
    pub fn translate(&self, u: &[C64], y: f64) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.len];
        self.from_spectral(&self.spectral(u), y, &mut out);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModulatedDistance {
    pub distance: f64,
    pub y: f64,
    pub theta: f64,
}

fn sigma_weights(len: usize, s: f64) -> Vec<f64> {
    (0..len).map(|m| (m as f64 + 0.5).powf(s)).collect()
}

fn padded(c: &[C64], len: usize) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); len];
    for (o, x) in v.iter_mut().zip(c) {
        *o = *x;
    }
    v
}

/// First and second `y`-derivatives of `‖φ‖² + ‖v‖² - 2|⟨v, φ⟩|` at
/// `v = u(· - y)`, all norms weighted by `w`.
fn derivatives(translator: &Translator, uh: &[C64], phi: &[C64], w: &[f64], y: f64) -> (f64, f64) {
    let len = translator.len();
    let mut v = vec![C64::new(0.0, 0.0); len];
    let mut v1 = v.clone();
    let mut v2 = v.clone();
    let uh1: Vec<C64> = uh.iter().zip(&translator.xi).map(|(u, xi)| u * C64::new(0.0, -xi)).collect();
    let uh2: Vec<C64> = uh.iter().zip(&translator.xi).map(|(u, xi)| u * (-xi * xi)).collect();
    translator.from_spectral(uh, y, &mut v);
    translator.from_spectral(&uh1, y, &mut v1);
    translator.from_spectral(&uh2, y, &mut v2);
    let (mut n1, mut n2) = (0.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let (mut z, mut z1, mut z2) = (zero, zero, zero);
    for k in 0..len {
        let (p, q, q1, q2, wk) = (phi[k].conj(), v[k], v1[k], v2[k], w[k]);
        n1 += 2.0 * wk * (q.conj() * q1).re;
        n2 += 2.0 * wk * (q1.norm_sqr() + (q.conj() * q2).re);
        z += wk * q * p;
        z1 += wk * q1 * p;
        z2 += wk * q2 * p;
    }
    let a = z.norm();
    let r1 = (z.conj() * z1).re;
    let abs1 = r1 / a;
    let abs2 = (z1.norm_sqr() + (z.conj() * z2).re) / a - r1 * r1 / (a * a * a);
    (n1 - 2.0 * abs1, n2 - 2.0 * abs2)
}

/// `inf_{θ,|y|≤y_max} ‖φ - e^{iθ}u(·-y)‖_{Σ^s}` for κ = 1, d = 1 states.
///
/// Scans `y` at `step`, refines the best bracket by golden section, polishes
/// with Newton steps and evaluates the final distance directly.
pub fn modulated_distance(
    phi: &CoeffState,
    u: &CoeffState,
    s: f64,
    y_max: f64,
    step: f64,
    translator: &Translator,
) -> Result<ModulatedDistance> {
    for c in [phi, u] {
        if c.spec.d != 1 || c.spec.kappa != 1.0 {
            return Err(Error::InvalidArgument(
                "modulated distance needs d = 1 coefficients in the kappa = 1 basis".into(),
            ));
        }
        if c.coeffs.len() > translator.len() {
            return Err(Error::DimensionMismatch {
                expected: translator.len(),
                got: c.coeffs.len(),
            });
        }
    }
    let len = translator.len();
    let w = sigma_weights(len, s);
    let phi = padded(&phi.coeffs, len);
    let phi_norm: f64 = phi.iter().zip(&w).map(|(p, w)| w * p.norm_sqr()).sum();
    let uh = translator.spectral(&u.coeffs);
    let mut v = vec![C64::new(0.0, 0.0); len];
    let mut objective = |y: f64| {
        translator.from_spectral(&uh, y, &mut v);
        let mut vn = 0.0;
        let mut z = C64::new(0.0, 0.0);
        for ((p, q), w) in phi.iter().zip(&v).zip(&w) {
            vn += w * q.norm_sqr();
            z += w * q * p.conj();
        }
        (phi_norm + vn - 2.0 * z.norm(), z)
    };

    let count = (y_max / step).floor() as i64;
    let (mut best_y, mut best) = (0.0, f64::INFINITY);
    for j in -count..=count {
        let y = j as f64 * step;
        let (val, _) = objective(y);
        if val < best {
            best = val;
            best_y = y;
        }
    }
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = ((best_y - step).max(-y_max), (best_y + step).min(y_max));
    let mut c = hi - gr * (hi - lo);
    let mut d = lo + gr * (hi - lo);
    let (mut fc, mut fd) = (objective(c).0, objective(d).0);
    while hi - lo > TRANSLATION_TOLERANCE {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - gr * (hi - lo);
            fc = objective(c).0;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + gr * (hi - lo);
            fd = objective(d).0;
        }
    }
    let golden = 0.5 * (lo + hi);
    // The objective is the squared distance, so the golden section only
    // locates y to about sqrt(eps) when the minimum is near zero. Newton
    // steps on its derivative recover full precision.
    let mut y = golden;
    for _ in 0..3 {
        let (g, h) = derivatives(translator, &uh, &phi, &w, y);
        if !(h > 0.0) {
            break;
        }
        let next = y - g / h;
        if !((next - y).abs() <= step) || next.abs() > y_max {
            break;
        }
        y = next;
    }
    let mut direct = |y: f64| {
        let theta = -objective(y).1.arg();
        let moved = translator.translate(&u.coeffs, y);
        let rot = C64::from_polar(1.0, theta);
        let distance = phi
            .iter()
            .zip(&moved)
            .zip(&w)
            .map(|((p, q), w)| w * (p - rot * q).norm_sqr())
            .sum::<f64>()
            .sqrt();
        ModulatedDistance { distance, y, theta }
    };
    let polished = direct(y);
    let coarse = direct(golden);
    Ok(if coarse.distance < polished.distance { coarse } else { polished })
}

/// One ingredient of an initial perturbation; `delta` scales all of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Perturbation {
    /// Adds `δ · amplitude · Ω_{mode,κ}`.
    Mode { mode: usize, amplitude: C64 },
    /// Momentum kick `G(0, δ·direction, 0)`.
    Boost { direction: f64 },
    /// Position shift `G(0, 0, δ·direction)`.
    Shift { direction: f64 },
    /// Replaces `M` by `M(1+δ)` and moves to the neighboring standing wave.
    Mass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityConfig {
    pub model: Model,
    pub lambda: f64,
    pub eta: f64,
    pub mass: f64,
    pub n: usize,
    pub s: f64,
    /// Horizon in units of `2π/√κ`.
    pub periods: f64,
    pub samples: usize,
    /// Spectral cutoff of the propagated profile.
    pub cutoff: usize,
    /// Cutoff of the κ = 1 basis used for Σ^s.
    pub sigma_cutoff: usize,
    pub y_max: f64,
    pub scan_step: f64,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        Self {
            model: Model::H,
            lambda: 1.0,
            eta: 1.0,
            mass: 1.0,
            n: 2,
            s: 1.0,
            periods: 20.0,
            samples: 401,
            cutoff: 32,
            sigma_cutoff: 40,
            y_max: 5.0,
            scan_step: 16.0 / 256.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub s: f64,
    pub delta: f64,
    pub horizon: f64,
    pub sup_dist: f64,
    pub times: Vec<f64>,
    pub distances: Vec<f64>,
    pub diagnostics: Diagnostics,
}

impl StabilityConfig {
    pub fn kappa(&self) -> f64 {
        self.lambda + self.eta * self.mass
    }

    /// Checks the hypotheses of the stability statement for this model.
    pub fn check(&self) -> Result<()> {
        if !(self.lambda >= 0.0) {
            return Err(Error::Hypothesis("lambda >= 0"));
        }
        if !(self.kappa() > 0.0) {
            return Err(Error::Hypothesis("kappa > 0"));
        }
        if !(self.mass > 0.0) {
            return Err(Error::Hypothesis("M > 0"));
        }
        match self.model {
            Model::H if self.s < 1.0 => Err(Error::Hypothesis("s >= 1 for model H")),
            Model::HPrime if self.s < 0.5 => Err(Error::Hypothesis("s >= 1/2 for model H'")),
            _ => Ok(()),
        }
    }

    pub fn horizon(&self) -> f64 {
        self.periods * 2.0 * std::f64::consts::PI / self.kappa().sqrt()
    }

    fn translator_len(&self) -> usize {
        self.sigma_cutoff + 1 + 48
    }
}

/// Unperturbed profile `M^{1/2}Ω_{n,κ}` in the κ = 1 basis.
pub fn reference_profile(cfg: &StabilityConfig) -> Result<CoeffState> {
    cfg.check()?;
    let spec = BasisSpec::new(1, cfg.kappa(), cfg.cutoff.max(cfg.n + 1))?;
    let w = CoeffState::unit(spec, &MultiIndex(vec![cfg.n]))?.scale(C64::new(cfg.mass.sqrt(), 0.0));
    let an = Analyzer::new(BasisSpec::new(1, 1.0, cfg.sigma_cutoff)?)?;
    Ok(an.analyze_fn(|x| w.evaluate(x))?.state)
}

/// Evolves a perturbed standing wave exactly and records the modulated
/// Σ^s distance to the unperturbed orbit at `samples` equally spaced times.
pub fn stability_trial(cfg: &StabilityConfig, perturbation: &[Perturbation], delta: f64) -> Result<StabilityReport> {
    cfg.check()?;
    let mut mass = cfg.mass;
    let (mut a_kick, mut b_kick) = (0.0, 0.0);
    let mut modes = Vec::new();
    for p in perturbation {
        match p {
            Perturbation::Mode { mode, amplitude } => modes.push((*mode, delta * amplitude)),
            Perturbation::Boost { direction } => a_kick += delta * direction,
            Perturbation::Shift { direction } => b_kick += delta * direction,
            Perturbation::Mass => mass *= 1.0 + delta,
        }
    }
    let kappa = cfg.lambda + cfg.eta * mass;
    if !(kappa > 0.0) {
        return Err(Error::KappaNonPositive(kappa));
    }
    let top = modes.iter().map(|m| m.0).chain([cfg.n]).max().unwrap_or(0);
    let spec = BasisSpec::new(1, kappa, cfg.cutoff.max(top + 1))?;
    let mut c = CoeffState::unit(spec, &MultiIndex(vec![cfg.n]))?.scale(C64::new(mass.sqrt(), 0.0));
    for (m, z) in modes {
        c = c.add(&CoeffState::unit(spec, &MultiIndex(vec![m]))?.scale(z));
    }
    let total_mass = c.mass();
    let (x, p) = xp_from_coeffs(&c);
    let params = ModelParams::new(
        cfg.lambda,
        cfg.eta,
        total_mass,
        vec![p[0] / total_mass + a_kick],
        vec![x[0] / total_mass + b_kick],
    )?;
    let kick = GalileanParams::new(0.0, kappa, vec![a_kick], vec![b_kick]);
    let prop = ExactPropagator::from_fn_with_params(cfg.model, params, cfg.cutoff.max(top + 8), galilean_fn(&kick, |y| c.evaluate(y)))?;

    let mut diagnostics = prop.diagnostics.clone();
    let phi = reference_profile(cfg)?;
    let an = Analyzer::new(BasisSpec::new(1, 1.0, cfg.sigma_cutoff)?)?;
    let translator = Translator::new(cfg.translator_len());
    let horizon = cfg.horizon();
    let times: Vec<f64> = (0..cfg.samples)
        .map(|j| horizon * j as f64 / (cfg.samples.max(2) - 1) as f64)
        .collect();
    let mut distances = Vec::with_capacity(times.len());
    let mut worst_loss: f64 = 0.0;
    for &t in &times {
        let analysis = an.analyze_fn(prop.state_fn(t)?)?;
        worst_loss = worst_loss.max(analysis.truncation_loss.abs());
        let md = modulated_distance(&phi, &analysis.state, cfg.s, cfg.y_max, cfg.scan_step, &translator)?;
        distances.push(md.distance);
    }
    diagnostics.push(Diagnostic::new("sigma_truncation_loss", worst_loss, 1e-9));
    let sup_dist = distances.iter().cloned().fold(0.0, f64::max);
    Ok(StabilityReport {
        s: cfg.s,
        delta,
        horizon,
        sup_dist,
        times,
        distances,
        diagnostics,
    })
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}
