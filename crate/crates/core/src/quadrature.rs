//! Gauss quadrature rules from the symmetric Jacobi matrix, plus an
//! adaptive composite Gauss–Legendre integrator for smooth time integrals.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermite::hermite_all;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

/// Nodes and weights for `∫ f(x) e^{-x²} dx`.
///
/// `scaled_weights[j] = weights[j] * exp(nodes[j]²)` is kept separately so
/// integrands that already carry their own Gaussian decay can be summed
/// without under/overflow.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub scaled_weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫ f(x) e^{-x²} dx`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Eigen-decomposition of a symmetric tridiagonal matrix with zero diagonal
/// unless `diag` is given. Returns (eigenvalues ascending, first components
/// of the normalized eigenvectors).
pub(crate) fn jacobi_eigen(diag: &[f64], offdiag: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = diag.len();
    let mut jm = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        jm[(i, i)] = diag[i];
    }
    for (i, &b) in offdiag.iter().enumerate() {
        jm[(i, i + 1)] = b;
        jm[(i + 1, i)] = b;
    }
    let eig =
        SymmetricEigen::try_new(jm, EIGEN_EPS, EIGEN_MAX_ITER).ok_or(Error::EigenNoConvergence(m))?;
    let mut pairs: Vec<(f64, f64)> = (0..m)
        .map(|j| (eig.eigenvalues[j], eig.eigenvectors[(0, j)]))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(pairs.into_iter().unzip())
}

/// Gauss–Hermite rule with `m` nodes via the Golub–Welsch construction
/// (off-diagonals `√(k/2)`), polished by Newton steps on the normalized
/// Hermite function `ψ_m`.
pub fn gauss_hermite_rule(m: usize) -> Result<QuadratureRule> {
    if m == 0 {
        return Err(Error::InvalidArgument("quadrature needs at least one node".into()));
    }
    let offdiag: Vec<f64> = (1..m).map(|k| (k as f64 / 2.0).sqrt()).collect();
    let (mut nodes, _) = jacobi_eigen(&vec![0.0; m], &offdiag)?;

    // ψ_m'(x) = √(2m) ψ_{m-1}(x) - x ψ_m(x)
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let psi = hermite_all(m, *x);
            let f = psi[m];
            let df = (2.0 * m as f64).sqrt() * psi[m - 1] - *x * f;
            if df == 0.0 {
                break;
            }
            let step = f / df;
            *x -= step;
            if step.abs() < 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
    }
    // Exact symmetry about zero.
    for j in 0..m / 2 {
        let s = 0.5 * (nodes[m - 1 - j] - nodes[j]);
        nodes[j] = -s;
        nodes[m - 1 - j] = s;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }

    // Christoffel numbers: w_j e^{x_j²} = 1 / Σ_{k<m} ψ_k(x_j)².
    let scaled_weights: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            let psi = hermite_all(m - 1, x);
            1.0 / psi.iter().map(|p| p * p).sum::<f64>()
        })
        .collect();
    let weights = nodes
        .iter()
        .zip(&scaled_weights)
        .map(|(&x, &w)| w * (-x * x).exp())
        .collect();

    let rule = QuadratureRule {
        nodes,
        weights,
        scaled_weights,
    };
    check_hermite_moments(&rule)?;
    Ok(rule)
}

/// ∫ x^{2k} e^{-x²} dx = Γ(k + ½).
fn hermite_even_moment(k: usize) -> f64 {
    let mut g = std::f64::consts::PI.sqrt();
    for j in 0..k {
        g *= j as f64 + 0.5;
    }
    g
}

fn check_hermite_moments(rule: &QuadratureRule) -> Result<()> {
    let m = rule.len();
    // Relative check on even moments; odd ones vanish by the enforced symmetry.
    let kmax = (2 * m - 1).min(40) / 2;
    for k in 0..=kmax {
        let exact = hermite_even_moment(k);
        let got: f64 = rule.integrate(|x| x.powi(2 * k as i32));
        if ((got - exact) / exact).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "Gauss-Hermite rule of order {m} fails moment {}: {got} vs {exact}",
                2 * k
            )));
        }
    }
    Ok(())
}

/// Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre_rule(m: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if m == 0 {
        return Err(Error::InvalidArgument("quadrature needs at least one node".into()));
    }
    let offdiag: Vec<f64> = (1..m)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect();
    let (nodes, v0) = jacobi_eigen(&vec![0.0; m], &offdiag)?;
    let weights = v0.iter().map(|v| 2.0 * v * v).collect();
    Ok((nodes, weights))
}

/// Composite Gauss–Legendre on panels of at most `panel` length; each panel is
/// bisected until the one- and two-panel estimates agree to `atol` scaled by
/// the panel's share of the interval.
pub struct CompositeGauss {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    pub panel: f64,
    pub atol: f64,
}

impl CompositeGauss {
    pub fn new(order: usize, panel: f64, atol: f64) -> Result<Self> {
        let (nodes, weights) = gauss_legendre_rule(order)?;
        Ok(Self {
            nodes,
            weights,
            panel,
            atol,
        })
    }

    fn panel_sum<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
    }

    fn adapt<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let whole = self.panel_sum(f, a, b);
        let mid = 0.5 * (a + b);
        let split = self.panel_sum(f, a, mid) + self.panel_sum(f, mid, b);
        if (whole - split).abs() <= tol || depth >= 30 {
            split
        } else {
            self.adapt(f, a, mid, 0.5 * tol, depth + 1) + self.adapt(f, mid, b, 0.5 * tol, depth + 1)
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        if a == b {
            return 0.0;
        }
        let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
        let panels = ((hi - lo) / self.panel).ceil().max(1.0) as usize;
        let h = (hi - lo) / panels as f64;
        let tol = self.atol / panels as f64;
        let total: f64 = (0..panels)
            .map(|p| {
                let x0 = lo + p as f64 * h;
                self.adapt(&f, x0, x0 + h, tol, 0)
            })
            .sum();
        sign * total
    }
}
