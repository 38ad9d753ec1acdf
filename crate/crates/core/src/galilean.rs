//! Classical paths `g'' = -κ g` and the Galilean transform
//!
//! `(G_κ(t,a,b) φ)(x) = e^{-i g·g'/2} e^{i x·g'} φ(x - g)`, `g = g_κ(t,a,b)`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{Diagnostic, Diagnostics};
use crate::error::{Error, Result};
use crate::grid::GridState;

/// Largest tolerated fraction of mass that a periodic translation wraps
/// around the box.
pub const BOUNDARY_LOSS_TOLERANCE: f64 = 1e-10;

/// Solution of `g'' = -κ g` with `g'(0) = a`, `g(0) = b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalPath {
    pub kappa: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl ClassicalPath {
    pub fn new(kappa: f64, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                got: b.len(),
            });
        }
        Ok(Self { kappa, a, b })
    }

    /// `(sin-like, cos-like)` factors and their derivatives:
    /// `g = s(t) a + c(t) b`, `g' = s'(t) a + c'(t) b`.
    fn factors(&self, t: f64) -> (f64, f64, f64, f64) {
        let k = self.kappa;
        if k > 0.0 {
            let w = k.sqrt();
            let (sn, cs) = (w * t).sin_cos();
            (sn / w, cs, cs, -w * sn)
        } else if k < 0.0 {
            let w = (-k).sqrt();
            let (sh, ch) = ((w * t).sinh(), (w * t).cosh());
            (sh / w, ch, ch, w * sh)
        } else {
            (t, 1.0, 1.0, 0.0)
        }
    }

    /// `(g(t), g'(t))`.
    pub fn eval(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        let (s, c, ds, dc) = self.factors(t);
        let g = self.a.iter().zip(&self.b).map(|(a, b)| s * a + c * b).collect();
        let gp = self.a.iter().zip(&self.b).map(|(a, b)| ds * a + dc * b).collect();
        (g, gp)
    }
}

/// `path_eval` as a free function.
pub fn path_eval(p: &ClassicalPath, t: f64) -> (Vec<f64>, Vec<f64>) {
    p.eval(t)
}

/// `g₁'·g₂ - g₁·g₂'` at time `t`.
pub fn wronskian(p1: &ClassicalPath, p2: &ClassicalPath, t: f64) -> f64 {
    let (g1, d1) = p1.eval(t);
    let (g2, d2) = p2.eval(t);
    dot(&d1, &g2) - dot(&g1, &d2)
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GalileanParams {
    pub t: f64,
    pub kappa: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl GalileanParams {
    pub fn new(t: f64, kappa: f64, a: Vec<f64>, b: Vec<f64>) -> Self {
        Self { t, kappa, a, b }
    }

    pub fn identity(d: usize) -> Self {
        Self::new(0.0, 0.0, vec![0.0; d], vec![0.0; d])
    }

    pub fn inverse(&self) -> Self {
        Self {
            a: self.a.iter().map(|v| -v).collect(),
            b: self.b.iter().map(|v| -v).collect(),
            ..self.clone()
        }
    }

    pub fn path(&self) -> ClassicalPath {
        ClassicalPath {
            kappa: self.kappa,
            a: self.a.clone(),
            b: self.b.clone(),
        }
    }

    /// `(g, g', e^{-i g·g'/2})`.
    pub fn resolve(&self) -> (Vec<f64>, Vec<f64>, C64) {
        let (g, gp) = self.path().eval(self.t);
        let phase = C64::from_polar(1.0, -0.5 * dot(&g, &gp));
        (g, gp, phase)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transformed {
    pub state: GridState,
    /// Fraction of mass carried across the box edge by the translation.
    pub boundary_loss: f64,
    pub diagnostics: Diagnostics,
}

/// Fraction of `u`'s mass at points `x` with `x + shift` outside the box.
pub fn wrapped_mass_fraction(u: &GridState, shift: &[f64]) -> f64 {
    let spec = u.spec;
    let l = spec.half_width;
    let mut x = vec![0.0; spec.d];
    let mut lost = 0.0;
    let mut total = 0.0;
    for (flat, v) in u.values.iter().enumerate() {
        spec.coords(flat, &mut x);
        let rho = v.norm_sqr();
        total += rho;
        if x.iter().zip(shift).any(|(xi, s)| !(xi + s >= -l && xi + s < l)) {
            lost += rho;
        }
    }
    if total > 0.0 {
        lost / total
    } else {
        0.0
    }
}

/// Applies `G_κ(t,a,b)` on the grid. The translation is periodic and
/// band-limited; mass carried across the box edge is reported.
pub fn apply_galilean(p: &GalileanParams, u: &GridState) -> Result<Transformed> {
    if p.a.len() != u.spec.d || p.b.len() != u.spec.d {
        return Err(Error::DimensionMismatch {
            expected: u.spec.d,
            got: p.a.len(),
        });
    }
    let (g, gp, phase) = p.resolve();
    let boundary_loss = wrapped_mass_fraction(u, &g);
    let mut state = if g.iter().all(|v| *v == 0.0) {
        u.clone()
    } else {
        u.translate(&g)
    };
    let mut x = vec![0.0; u.spec.d];
    for (flat, v) in state.values.iter_mut().enumerate() {
        u.spec.coords(flat, &mut x);
        *v *= phase * C64::from_polar(1.0, dot(&x, &gp));
    }
    let mut diagnostics = Diagnostics::default();
    diagnostics.push(Diagnostic::new("boundary_loss", boundary_loss, BOUNDARY_LOSS_TOLERANCE));
    Ok(Transformed {
        state,
        boundary_loss,
        diagnostics,
    })
}

/// `G_κ(t,a,b)` applied to a callable field.
pub fn galilean_fn<F>(p: &GalileanParams, f: F) -> impl Fn(&[f64]) -> C64
where
    F: Fn(&[f64]) -> C64,
{
    let (g, gp, phase) = p.resolve();
    move |x: &[f64]| {
        let y: Vec<f64> = x.iter().zip(&g).map(|(x, g)| x - g).collect();
        phase * C64::from_polar(1.0, dot(x, &gp)) * f(&y)
    }
}

/// `e^{i(a₁·b₂ - a₂·b₁)/2}`, the phase in
/// `G(t,a₁,b₁) G(t,a₂,b₂) = phase · G(t,a₁+a₂,b₁+b₂)`.
pub fn compose_phase(a1: &[f64], b1: &[f64], a2: &[f64], b2: &[f64]) -> C64 {
    C64::from_polar(1.0, 0.5 * (dot(a1, b2) - dot(a2, b1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    /// Classical RK4 on `g'' = -κ g`.
    fn rk4(kappa: f64, a: f64, b: f64, t: f64, steps: usize) -> (f64, f64) {
        let h = t / steps as f64;
        let (mut g, mut v) = (b, a);
        let f = |g: f64, v: f64| (v, -kappa * g);
        for _ in 0..steps {
            let k1 = f(g, v);
            let k2 = f(g + 0.5 * h * k1.0, v + 0.5 * h * k1.1);
            let k3 = f(g + 0.5 * h * k2.0, v + 0.5 * h * k2.1);
            let k4 = f(g + h * k3.0, v + h * k3.1);
            g += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            v += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        }
        (g, v)
    }

    fn gaussian_state(spec: GridSpec, c: f64, k: f64) -> GridState {
        GridState::from_fn(spec, |x| {
            C64::from_polar((-(x[0] - c).powi(2) / 2.0).exp() * PI.powf(-0.25), k * x[0])
        })
    }

    #[test]
    fn path_examples() {
        let p = ClassicalPath::new(0.0, vec![2.0], vec![1.0]).unwrap();
        let (g, gp) = p.eval(3.0);
        assert_eq!((g[0], gp[0]), (7.0, 2.0));
        for kappa in [-1.0, 0.0, 2.0] {
            let p = ClassicalPath::new(kappa, vec![0.3], vec![-0.4]).unwrap();
            assert_eq!(p.eval(0.0), (vec![-0.4], vec![0.3]));
        }
        let p = ClassicalPath::new(1.0, vec![0.0], vec![1.0]).unwrap();
        let (g, gp) = p.eval(PI);
        let (go, vo) = rk4(1.0, 0.0, 1.0, PI, 2000);
        assert!((g[0] - go).abs() < 1e-12 && (gp[0] - vo).abs() < 1e-12);
        assert!((g[0] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn paths_match_rk4_for_all_signs() {
        for kappa in [-0.7, 0.0, 1.3] {
            let p = ClassicalPath::new(kappa, vec![0.8], vec![-0.2]).unwrap();
            let (g, gp) = p.eval(2.0);
            let (go, vo) = rk4(kappa, 0.8, -0.2, 2.0, 4000);
            assert!((g[0] - go).abs() < 1e-12, "kappa {kappa}");
            assert!((gp[0] - vo).abs() < 1e-12);
        }
    }

    #[test]
    fn ode_residual() {
        for kappa in [-0.5, 0.0, 2.0] {
            let p = ClassicalPath::new(kappa, vec![0.4, -1.0], vec![1.1, 0.3]).unwrap();
            for t in [0.1, 0.9, 2.3] {
                // g'' from the derivative of g' by a 4th-order stencil
                let h = 1e-3;
                let d = |s: f64| p.eval(t + s).1;
                let (g, _) = p.eval(t);
                for i in 0..2 {
                    let gpp = (d(-2.0 * h)[i] - 8.0 * d(-h)[i] + 8.0 * d(h)[i] - d(2.0 * h)[i]) / (12.0 * h);
                    assert!((gpp + kappa * g[i]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn identity_params() {
        let spec = GridSpec::new(1, 12.0, 256, 1e-3).unwrap();
        let u = gaussian_state(spec, 0.4, 0.7);
        let out = apply_galilean(&GalileanParams::new(1.7, 1.0, vec![0.0], vec![0.0]), &u).unwrap();
        assert!(out.state.rel_l2_distance(&u) < 1e-15);
    }

    #[test]
    fn inverse_law_and_norm() {
        let spec = GridSpec::new(1, 16.0, 512, 1e-3).unwrap();
        let u = gaussian_state(spec, 0.3, -0.5);
        let p = GalileanParams::new(0.8, 1.4, vec![0.9], vec![-0.6]);
        let fwd = apply_galilean(&p, &u).unwrap();
        assert!((fwd.state.mass() - u.mass()).abs() < 1e-10);
        assert!(!fwd.diagnostics.any_flagged());
        let back = apply_galilean(&p.inverse(), &fwd.state).unwrap();
        assert!(back.state.rel_l2_distance(&u) < 1e-10);
    }

    #[test]
    fn translation_shifts_center() {
        let spec = GridSpec::new(1, 16.0, 512, 1e-3).unwrap();
        let u = gaussian_state(spec, 0.0, 0.0);
        let p = GalileanParams::new(1.1, 2.0, vec![0.5], vec![1.0]);
        let (g, _, _) = p.resolve();
        let out = apply_galilean(&p, &u).unwrap().state;
        let xs = spec.axis();
        let x_mean: f64 = spec.dx() * xs.iter().zip(&out.values).map(|(x, v)| x * v.norm_sqr()).sum::<f64>();
        assert!((x_mean - g[0] * u.mass()).abs() < 1e-10);
    }

    #[test]
    fn grid_and_callable_forms_agree() {
        let spec = GridSpec::new(2, 10.0, 128, 1e-3).unwrap();
        let f = |x: &[f64]| C64::from_polar((-(x[0] * x[0] + 2.0 * x[1] * x[1]) / 2.0).exp(), 0.2 * x[0]);
        let u = GridState::from_fn(spec, f);
        let p = GalileanParams::new(0.4, 1.0, vec![0.3, -0.2], vec![0.5, 0.1]);
        let grid = apply_galilean(&p, &u).unwrap().state;
        let fnv = GridState::from_fn(spec, galilean_fn(&p, f));
        assert!(grid.rel_l2_distance(&fnv) < 1e-12);
    }

    #[test]
    fn boundary_loss_is_flagged() {
        let spec = GridSpec::new(1, 8.0, 128, 1e-3).unwrap();
        let u = gaussian_state(spec, 0.0, 0.0);
        let p = GalileanParams::new(0.0, 1.0, vec![0.0], vec![7.5]);
        let out = apply_galilean(&p, &u).unwrap();
        assert!(out.boundary_loss > 1e-3);
        assert!(out.diagnostics.any_flagged());
    }

    #[test]
    fn compose_phase_examples() {
        let z = compose_phase(&[0.0], &[3.0], &[0.0], &[-1.0]);
        assert_eq!(z, C64::new(1.0, 0.0));
        let z = compose_phase(&[1.0], &[0.0], &[0.0], &[1.0]);
        assert_relative_eq!(z.arg(), 0.5, epsilon = 1e-15);
        let swapped = compose_phase(&[0.0], &[1.0], &[1.0], &[0.0]);
        assert!((swapped - z.conj()).norm() < 1e-15);
    }

    #[test]
    fn composition_law_on_callables() {
        let f = |x: &[f64]| C64::new((-x[0] * x[0] / 2.0).exp(), 0.0) * (1.0 + x[0]);
        let (a1, b1, a2, b2) = (vec![0.4], vec![-0.3], vec![-0.7], vec![0.9]);
        let t = 1.3;
        let k = 1.6;
        let p1 = GalileanParams::new(t, k, a1.clone(), b1.clone());
        let p2 = GalileanParams::new(t, k, a2.clone(), b2.clone());
        let p12 = GalileanParams::new(t, k, vec![a1[0] + a2[0]], vec![b1[0] + b2[0]]);
        let lhs = galilean_fn(&p1, galilean_fn(&p2, f));
        let rhs = galilean_fn(&p12, f);
        let z = compose_phase(&a1, &b1, &a2, &b2);
        for x in [-2.0, -0.3, 0.0, 0.8, 2.5] {
            assert!((lhs(&[x]) - z * rhs(&[x])).norm() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn wronskian_is_constant(
            kappa in -1.0f64..2.0,
            a1 in -1.0f64..1.0, b1 in -1.0f64..1.0,
            a2 in -1.0f64..1.0, b2 in -1.0f64..1.0,
            t in 0.0f64..3.0,
        ) {
            let p1 = ClassicalPath::new(kappa, vec![a1], vec![b1]).unwrap();
            let p2 = ClassicalPath::new(kappa, vec![a2], vec![b2]).unwrap();
            let w0 = wronskian(&p1, &p2, 0.0);
            let (g1, d1) = p1.eval(t);
            let (g2, d2) = p2.eval(t);
            let scale = 1.0 + (d1[0] * g2[0]).abs() + (g1[0] * d2[0]).abs();
            prop_assert!((wronskian(&p1, &p2, t) - w0).abs() < 1e-12 * scale);
        }

        #[test]
        fn compose_phase_is_unit_and_antisymmetric(
            a1 in -2.0f64..2.0, b1 in -2.0f64..2.0, a2 in -2.0f64..2.0, b2 in -2.0f64..2.0,
        ) {
            let z = compose_phase(&[a1], &[b1], &[a2], &[b2]);
            prop_assert!((z.norm() - 1.0).abs() < 1e-15);
            prop_assert!((z * compose_phase(&[a2], &[b2], &[a1], &[b1]) - 1.0).norm() < 1e-14);
        }
    }
}
