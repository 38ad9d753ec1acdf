//! Scaled Hermite functions and the truncated coefficient representation.
//!
//! `Ω_{n,κ}(x) = κ^{d/8} Π_i ψ_{n_i}(κ^{1/4} x_i)` where `ψ_n` is the
//! L²-normalized Hermite function. The family is orthonormal for every
//! `κ > 0` and diagonalizes `-½Δ + (κ/2)|x|²` with eigenvalue
//! `√κ (|n| + d/2)`.
//!
//! Ladder operators in the κ-scaled basis:
//! `A_κ = (κ^{1/4} x + κ^{-1/4} ∇)/√2` lowers, `A_κ†` raises, so that
//! `x = κ^{-1/4}(A + A†)/√2` and `∂ = κ^{1/4}(A - A†)/√2`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{Diagnostic, Diagnostics};
use crate::error::{Error, Result};
use crate::grid::{GridSpec, GridState};
use crate::quadrature::{gauss_hermite_rule, QuadratureRule};
use crate::tensor::{apply_along_axis, unravel};

/// Relative mass lost by a projection before it is reported.
pub const TRUNCATION_TOLERANCE: f64 = 1e-9;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// `ψ_n(x)` by the normalized three-term recurrence.
pub fn eval_hermite(n: usize, x: f64) -> f64 {
    hermite_all(n, x)[n]
}

/// `[ψ_0(x), …, ψ_nmax(x)]`.
pub fn hermite_all(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    hermite_fill(x, &mut out);
    out
}

/// Fills `out[k] = ψ_k(x)` for `k < out.len()`.
pub fn hermite_fill(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    if out.len() > 1 {
        out[1] = std::f64::consts::SQRT_2 * x * out[0];
    }
    for k in 1..out.len().saturating_sub(1) {
        let kf = k as f64;
        out[k + 1] = (2.0 / (kf + 1.0)).sqrt() * x * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn zero(d: usize) -> Self {
        Self(vec![0; d])
    }

    pub fn degree(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisSpec {
    pub d: usize,
    pub kappa: f64,
    /// Largest mode number kept per axis.
    pub cutoff: usize,
}

impl BasisSpec {
    pub fn new(d: usize, kappa: f64, cutoff: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::KappaNonPositive(kappa));
        }
        if cutoff == 0 {
            return Err(Error::InvalidArgument("cutoff must be at least 1".into()));
        }
        Ok(Self { d, kappa, cutoff })
    }

    /// Default cutoff per axis for the given dimension.
    pub fn default_cutoff(d: usize) -> usize {
        if d == 1 {
            64
        } else {
            32
        }
    }

    pub fn modes_per_axis(&self) -> usize {
        self.cutoff + 1
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.modes_per_axis(); self.d]
    }

    pub fn len(&self) -> usize {
        self.modes_per_axis().pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index_of(&self, n: &MultiIndex) -> Option<usize> {
        if n.dim() != self.d || n.0.iter().any(|&k| k > self.cutoff) {
            return None;
        }
        Some(n.0.iter().fold(0, |acc, &k| acc * self.modes_per_axis() + k))
    }

    pub fn multi_index(&self, flat: usize) -> MultiIndex {
        let mut idx = vec![0; self.d];
        unravel(flat, &self.shape(), &mut idx);
        MultiIndex(idx)
    }

    /// `√κ (|n| + d/2)`, the eigenvalue of `-½Δ + (κ/2)|x|²` on `Ω_{n,κ}`.
    pub fn oscillator_eigenvalue(&self, n: &MultiIndex) -> f64 {
        self.kappa.sqrt() * (n.degree() as f64 + 0.5 * self.d as f64)
    }

    fn with_cutoff(self, cutoff: usize) -> Self {
        Self { cutoff, ..self }
    }
}

/// `Ω_{n,κ}(x)`.
pub fn eval_basis(spec: &BasisSpec, n: &MultiIndex, x: &[f64]) -> f64 {
    let q = spec.kappa.powf(0.25);
    spec.kappa.powf(spec.d as f64 / 8.0)
        * n.0
            .iter()
            .zip(x)
            .map(|(&k, &xi)| eval_hermite(k, q * xi))
            .product::<f64>()
}

/// Hermite coefficients `a_n = (u, Ω_{n,κ})` of a wavefunction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoeffState {
    pub spec: BasisSpec,
    pub coeffs: Vec<C64>,
}

impl CoeffState {
    pub fn zeros(spec: BasisSpec) -> Self {
        Self {
            spec,
            coeffs: vec![ZERO; spec.len()],
        }
    }

    pub fn unit(spec: BasisSpec, n: &MultiIndex) -> Result<Self> {
        let mut s = Self::zeros(spec);
        let idx = spec.index_of(n).ok_or_else(|| {
            Error::InvalidArgument(format!("mode {:?} outside cutoff {}", n.0, spec.cutoff))
        })?;
        s.coeffs[idx] = C64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn from_coeffs(spec: BasisSpec, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != spec.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients, got {}",
                spec.len(),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coefficient".into()));
        }
        Ok(Self { spec, coeffs })
    }

    pub fn get(&self, n: &MultiIndex) -> C64 {
        self.spec.index_of(n).map_or(ZERO, |i| self.coeffs[i])
    }

    /// Parseval mass `Σ |a_n|²`.
    pub fn mass(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `Σ a_n conj(b_n)`; both states must share the basis.
    pub fn inner(&self, other: &CoeffState) -> C64 {
        debug_assert_eq!(self.spec, other.spec);
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    pub fn scale(&self, z: C64) -> Self {
        Self {
            spec: self.spec,
            coeffs: self.coeffs.iter().map(|c| c * z).collect(),
        }
    }

    pub fn add(&self, other: &CoeffState) -> Self {
        debug_assert_eq!(self.spec, other.spec);
        Self {
            spec: self.spec,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    /// Re-embeds the state with a different per-axis cutoff. Returns the
    /// state and the mass of any coefficients that no longer fit.
    pub fn with_cutoff(&self, cutoff: usize) -> (Self, f64) {
        let spec = self.spec.with_cutoff(cutoff);
        let mut out = Self::zeros(spec);
        let mut dropped = 0.0;
        for (flat, &c) in self.coeffs.iter().enumerate() {
            let n = self.spec.multi_index(flat);
            match spec.index_of(&n) {
                Some(j) => out.coeffs[j] = c,
                None => dropped += c.norm_sqr(),
            }
        }
        (out, dropped)
    }

    /// Pointwise value of the expansion `Σ a_n Ω_{n,κ}(x)`.
    pub fn evaluate(&self, x: &[f64]) -> C64 {
        let q = self.spec.kappa.powf(0.25);
        let per_axis: Vec<Vec<f64>> = x
            .iter()
            .map(|&xi| hermite_all(self.spec.cutoff, q * xi))
            .collect();
        let norm = self.spec.kappa.powf(self.spec.d as f64 / 8.0);
        let shape = self.spec.shape();
        let mut idx = vec![0; self.spec.d];
        let mut acc = ZERO;
        for (flat, &c) in self.coeffs.iter().enumerate() {
            if c == ZERO {
                continue;
            }
            unravel(flat, &shape, &mut idx);
            let w: f64 = idx.iter().enumerate().map(|(ax, &k)| per_axis[ax][k]).product();
            acc += c * w;
        }
        acc * norm
    }

    /// `((-½Δ + (κ/2)|x|²) u, u) = Σ √κ(|n| + d/2) |a_n|²`.
    pub fn oscillator_energy(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(flat, c)| self.spec.oscillator_eigenvalue(&self.spec.multi_index(flat)) * c.norm_sqr())
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ladder {
    Lower,
    Raise,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderResult {
    pub state: CoeffState,
    /// Mass of coefficients pushed past the cutoff by raising.
    pub dropped_mass: f64,
}

/// `A_κ` (lower) or `A_κ†` (raise) along `axis`, in the same truncated basis.
pub fn ladder(c: &CoeffState, which: Ladder, axis: usize) -> Result<LadderResult> {
    let spec = c.spec;
    if axis >= spec.d {
        return Err(Error::InvalidArgument(format!("axis {axis} out of range for d = {}", spec.d)));
    }
    let stride = spec.modes_per_axis().pow((spec.d - 1 - axis) as u32);
    let mut out = CoeffState::zeros(spec);
    let mut dropped = 0.0;
    for (flat, &a) in c.coeffs.iter().enumerate() {
        if a == ZERO {
            continue;
        }
        let k = spec.multi_index(flat).0[axis];
        match which {
            // A Ω_k = √k Ω_{k-1}
            Ladder::Lower => {
                if k > 0 {
                    out.coeffs[flat - stride] += a * (k as f64).sqrt();
                }
            }
            // A† Ω_k = √(k+1) Ω_{k+1}
            Ladder::Raise => {
                let v = a * ((k + 1) as f64).sqrt();
                if k < spec.cutoff {
                    out.coeffs[flat + stride] += v;
                } else {
                    dropped += v.norm_sqr();
                }
            }
        }
    }
    Ok(LadderResult {
        state: out,
        dropped_mass: dropped,
    })
}

/// Lowering and raising along one axis with the cutoff widened by one, so
/// nothing is dropped. Returns `(A u, A† u)` in the widened basis.
pub fn ladder_pair_exact(c: &CoeffState, axis: usize) -> Result<(CoeffState, CoeffState)> {
    let (wide, _) = c.with_cutoff(c.spec.cutoff + 1);
    let lower = ladder(&wide, Ladder::Lower, axis)?.state;
    let raise = ladder(&wide, Ladder::Raise, axis)?;
    debug_assert_eq!(raise.dropped_mass, 0.0);
    Ok((lower, raise.state))
}

/// `x_i u` in the basis widened by one mode.
pub fn apply_position(c: &CoeffState, axis: usize) -> Result<CoeffState> {
    let (lo, hi) = ladder_pair_exact(c, axis)?;
    let f = c.spec.kappa.powf(-0.25) * std::f64::consts::FRAC_1_SQRT_2;
    Ok(lo.add(&hi).scale(C64::new(f, 0.0)))
}

/// `∂_i u` in the basis widened by one mode.
pub fn apply_derivative(c: &CoeffState, axis: usize) -> Result<CoeffState> {
    let (lo, hi) = ladder_pair_exact(c, axis)?;
    let f = c.spec.kappa.powf(0.25) * std::f64::consts::FRAC_1_SQRT_2;
    Ok(lo.add(&hi.scale(C64::new(-1.0, 0.0))).scale(C64::new(f, 0.0)))
}

/// Σ^s norm with weight `(|n| + d/2)^s`; coefficients must be in the κ = 1 basis.
pub fn sigma_norm(c: &CoeffState, s: f64) -> Result<f64> {
    if c.spec.kappa != 1.0 {
        return Err(Error::InvalidArgument(format!(
            "Sigma^s norm needs the kappa = 1 basis, got kappa = {}",
            c.spec.kappa
        )));
    }
    let half_d = 0.5 * c.spec.d as f64;
    let total: f64 = c
        .coeffs
        .iter()
        .enumerate()
        .map(|(flat, a)| {
            let deg = c.spec.multi_index(flat).degree() as f64;
            (deg + half_d).powf(s) * a.norm_sqr()
        })
        .sum();
    Ok(total.sqrt())
}

/// Result of projecting a field onto a truncated basis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Analysis {
    pub state: CoeffState,
    pub input_mass: f64,
    /// `1 - Σ|a_n|² / mass(u)`.
    pub truncation_loss: f64,
    pub diagnostics: Diagnostics,
}

impl Analysis {
    fn new(state: CoeffState, input_mass: f64) -> Self {
        let truncation_loss = if input_mass > 0.0 {
            1.0 - state.mass() / input_mass
        } else {
            0.0
        };
        let mut diagnostics = Diagnostics::default();
        diagnostics.push(Diagnostic::new(
            "truncation_loss",
            truncation_loss.abs(),
            TRUNCATION_TOLERANCE,
        ));
        Self {
            state,
            input_mass,
            truncation_loss,
            diagnostics,
        }
    }
}

/// Tensorized Gauss–Hermite projection onto `{Ω_{n,κ}}` at a fixed basis.
///
/// Holds the node table so repeated projections only pay for sampling and
/// two small contractions.
#[derive(Debug, Clone)]
pub struct Analyzer {
    pub spec: BasisSpec,
    pub rule: QuadratureRule,
    /// Quadrature nodes in physical coordinates, `ξ_j κ^{-1/4}`.
    pub points: Vec<f64>,
    /// `(cutoff+1) × m`, entry `κ^{-1/8} W_j ψ_n(ξ_j)`.
    project: Vec<f64>,
    /// `m` weights for the mass of the sampled field, `κ^{-1/4} W_j`.
    mass_weights: Vec<f64>,
}

impl Analyzer {
    /// Uses the default node count `2·cutoff + 1`.
    pub fn new(spec: BasisSpec) -> Result<Self> {
        Self::with_nodes(spec, 2 * spec.cutoff + 1)
    }

    pub fn with_nodes(spec: BasisSpec, m: usize) -> Result<Self> {
        if m < spec.cutoff + 1 {
            return Err(Error::InvalidArgument(format!(
                "{m} quadrature nodes cannot resolve cutoff {}",
                spec.cutoff
            )));
        }
        let rule = gauss_hermite_rule(m)?;
        let q = spec.kappa.powf(0.25);
        let points = rule.nodes.iter().map(|&xi| xi / q).collect();
        let modes = spec.modes_per_axis();
        let mut project = vec![0.0; modes * m];
        let scale = spec.kappa.powf(-0.125);
        let mut psi = vec![0.0; modes];
        for (j, (&xi, &w)) in rule.nodes.iter().zip(&rule.scaled_weights).enumerate() {
            hermite_fill(xi, &mut psi);
            for n in 0..modes {
                project[n * m + j] = scale * w * psi[n];
            }
        }
        let mass_weights = rule.scaled_weights.iter().map(|w| w / q).collect();
        Ok(Self {
            spec,
            rule,
            points,
            project,
            mass_weights,
        })
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.points.len()
    }

    /// Projects samples taken on the tensor grid of `points` (row-major).
    pub fn analyze_samples(&self, samples: &[C64]) -> Result<Analysis> {
        let m = self.nodes_per_axis();
        let d = self.spec.d;
        if samples.len() != m.pow(d as u32) {
            return Err(Error::InvalidArgument(format!(
                "expected {} samples, got {}",
                m.pow(d as u32),
                samples.len()
            )));
        }
        let mut data = samples.to_vec();
        let mut shape = vec![m; d];
        for axis in 0..d {
            let (nd, ns) =
                apply_along_axis(&data, &shape, axis, &self.project, self.spec.modes_per_axis());
            data = nd;
            shape = ns;
        }
        let mut idx = vec![0; d];
        let input_mass: f64 = samples
            .iter()
            .enumerate()
            .map(|(flat, v)| {
                unravel(flat, &vec![m; d], &mut idx);
                let w: f64 = idx.iter().map(|&j| self.mass_weights[j]).product();
                w * v.norm_sqr()
            })
            .sum();
        let state = CoeffState::from_coeffs(self.spec, data)?;
        Ok(Analysis::new(state, input_mass))
    }

    /// Projects a callable field `f(x)`.
    pub fn analyze_fn<F: Fn(&[f64]) -> C64>(&self, f: F) -> Result<Analysis> {
        let m = self.nodes_per_axis();
        let d = self.spec.d;
        let mut idx = vec![0; d];
        let mut x = vec![0.0; d];
        let samples: Vec<C64> = (0..m.pow(d as u32))
            .map(|flat| {
                unravel(flat, &vec![m; d], &mut idx);
                for (xi, &j) in x.iter_mut().zip(&idx) {
                    *xi = self.points[j];
                }
                f(&x)
            })
            .collect();
        self.analyze_samples(&samples)
    }

    /// Projects a grid field, interpolating it onto the nodes with its
    /// band-limited (Fourier) interpolant. The truncation loss is measured
    /// against the grid mass.
    pub fn analyze_grid(&self, g: &GridState) -> Result<Analysis> {
        self.analyze_grid_shifted(g, &vec![0.0; self.spec.d], &vec![0.0; self.spec.d], C64::new(1.0, 0.0))
    }

    /// Projects `x ↦ phase · e^{i x·momentum} u(x - offset)` for a grid
    /// field `u`, which is how Galilean transforms enter the analysis.
    pub fn analyze_grid_shifted(
        &self,
        g: &GridState,
        offset: &[f64],
        momentum: &[f64],
        phase: C64,
    ) -> Result<Analysis> {
        if g.spec.d != self.spec.d {
            return Err(Error::DimensionMismatch {
                expected: self.spec.d,
                got: g.spec.d,
            });
        }
        let d = self.spec.d;
        let axes: Vec<Vec<f64>> = (0..d)
            .map(|ax| self.points.iter().map(|p| p - offset[ax]).collect())
            .collect();
        let mut samples = g.sample_tensor(&axes);
        let m = self.nodes_per_axis();
        let mut idx = vec![0; d];
        for (flat, v) in samples.iter_mut().enumerate() {
            unravel(flat, &vec![m; d], &mut idx);
            let xp: f64 = idx.iter().enumerate().map(|(ax, &j)| self.points[j] * momentum[ax]).sum();
            *v *= phase * C64::from_polar(1.0, xp);
        }
        let mut a = self.analyze_samples(&samples)?;
        let grid_mass = g.mass();
        a.input_mass = grid_mass;
        a.truncation_loss = if grid_mass > 0.0 {
            1.0 - a.state.mass() / grid_mass
        } else {
            0.0
        };
        a.diagnostics = Diagnostics::default();
        a.diagnostics.push(Diagnostic::new(
            "truncation_loss",
            a.truncation_loss.abs(),
            TRUNCATION_TOLERANCE,
        ));
        Ok(a)
    }
}

/// Per-axis table `Ω_{k,κ}(x_j)` (1-D factor including `κ^{1/8}`), `(cutoff+1) × len(xs)` transposed
/// to `len(xs) × (cutoff+1)` for contraction from modes to points.
fn point_table(spec: &BasisSpec, xs: &[f64]) -> Vec<f64> {
    let modes = spec.modes_per_axis();
    let q = spec.kappa.powf(0.25);
    let s = spec.kappa.powf(0.125);
    let mut table = vec![0.0; xs.len() * modes];
    let mut psi = vec![0.0; modes];
    for (j, &x) in xs.iter().enumerate() {
        hermite_fill(q * x, &mut psi);
        for k in 0..modes {
            table[j * modes + k] = s * psi[k];
        }
    }
    table
}

/// Samples `Σ a_n Ω_{n,κ}(x)` on a tensor product of per-axis points.
pub fn synthesize_points(c: &CoeffState, axes: &[Vec<f64>]) -> Vec<C64> {
    let mut data = c.coeffs.clone();
    let mut shape = c.spec.shape();
    for (axis, xs) in axes.iter().enumerate() {
        let table = point_table(&c.spec, xs);
        let (nd, ns) = apply_along_axis(&data, &shape, axis, &table, xs.len());
        data = nd;
        shape = ns;
    }
    data
}

/// Samples the expansion on a grid.
pub fn synthesize(c: &CoeffState, grid: &GridSpec) -> Result<GridState> {
    synthesize_shifted(c, grid, &vec![0.0; c.spec.d])
}

/// Samples `x ↦ Σ a_n Ω_{n,κ}(x - offset)` on a grid.
pub fn synthesize_shifted(c: &CoeffState, grid: &GridSpec, offset: &[f64]) -> Result<GridState> {
    if grid.d != c.spec.d {
        return Err(Error::DimensionMismatch {
            expected: c.spec.d,
            got: grid.d,
        });
    }
    let xs = grid.axis();
    let axes: Vec<Vec<f64>> = offset.iter().map(|o| xs.iter().map(|x| x - o).collect()).collect();
    GridState::new(*grid, synthesize_points(c, &axes))
}
