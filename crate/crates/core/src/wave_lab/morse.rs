//! Morse index of `S_ω = E - ωM/2` at the excited states `Ω_n` (d = 1,
//! M = 1, κ = 1) for the two model cases.
//!
//! Case I: λ = 0, η = 1, ω = 3(n+½). Case II: λ = 2, η = -1, ω = n+½.
//! On real directions the Hessian is `L₁₁ = L₂₂ ± 2(|x|² ∗ (Ω_n h))Ω_n`
//! (plus for case I), on imaginary directions `L₂₂ = -Δ + |x|² - 2(n+½)`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wave_lab::standing::{omega_case_i, omega_case_ii};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Case {
    I,
    II,
}

impl Case {
    pub fn lambda(self) -> f64 {
        match self {
            Case::I => 0.0,
            Case::II => 2.0,
        }
    }

    pub fn eta(self) -> f64 {
        match self {
            Case::I => 1.0,
            Case::II => -1.0,
        }
    }

    pub fn omega(self, n: usize, mass: f64) -> f64 {
        match self {
            Case::I => omega_case_i(n, mass),
            Case::II => omega_case_ii(n, mass),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subspace {
    Even,
    Full,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Inertia {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

impl Inertia {
    pub fn total(&self) -> usize {
        self.negative + self.zero + self.positive
    }

    fn add(self, o: Inertia) -> Inertia {
        Inertia {
            negative: self.negative + o.negative,
            zero: self.zero + o.zero,
            positive: self.positive + o.positive,
        }
    }
}

/// Eigenvalues below `tol` in magnitude count as zero.
pub fn inertia(eigs: &[f64], tol: f64) -> Inertia {
    let mut out = Inertia::default();
    for &e in eigs {
        if e.abs() <= tol {
            out.zero += 1;
        } else if e < 0.0 {
            out.negative += 1;
        } else {
            out.positive += 1;
        }
    }
    out
}

/// `⟨ψ_m, x ψ_k⟩`.
pub fn x_element(m: usize, k: usize) -> f64 {
    if k == m + 1 {
        (k as f64 / 2.0).sqrt()
    } else if m == k + 1 {
        (m as f64 / 2.0).sqrt()
    } else {
        0.0
    }
}

/// `⟨ψ_m, x² ψ_k⟩`.
pub fn x2_element(m: usize, k: usize) -> f64 {
    let (lo, hi) = (m.min(k), m.max(k));
    match hi - lo {
        0 => lo as f64 + 0.5,
        2 => (((lo + 1) * (lo + 2)) as f64).sqrt() / 2.0,
        _ => 0.0,
    }
}

/// Matrix of `h ↦ 2(|x|² ∗ (Ω_n h))Ω_n` on the modes `modes`:
/// `K_jk = 2[x²_{nj}δ_{nk} + δ_{nj}x²_{nk} - 2x_{nj}x_{nk}]`.
pub fn convolution_matrix(n: usize, modes: &[usize]) -> DMatrix<f64> {
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    DMatrix::from_fn(modes.len(), modes.len(), |j, k| {
        let (mj, mk) = (modes[j], modes[k]);
        2.0 * (x2_element(n, mj) * delta(n, mk) + delta(n, mj) * x2_element(n, mk)
            - 2.0 * x_element(n, mj) * x_element(n, mk))
    })
}

/// `L₂₂` on the modes: `diag(2(m - n))`.
pub fn l22_diagonal(n: usize, modes: &[usize]) -> Vec<f64> {
    modes.iter().map(|&m| 2.0 * (m as f64 - n as f64)).collect()
}

/// Assembled real-direction block `L₁₁` on the modes.
pub fn l11_matrix(case: Case, n: usize, modes: &[usize]) -> DMatrix<f64> {
    let sign = match case {
        Case::I => 1.0,
        Case::II => -1.0,
    };
    let mut m = convolution_matrix(n, modes) * sign;
    for (j, v) in l22_diagonal(n, modes).into_iter().enumerate() {
        m[(j, j)] += v;
    }
    m
}

/// `[1, c₂, c₁, c₀]` with `det(λ - A) = λ³ + c₂λ² + c₁λ + c₀`.
pub fn charpoly3(a: &[[f64; 3]; 3]) -> [f64; 4] {
    let tr = a[0][0] + a[1][1] + a[2][2];
    let minors = a[0][0] * a[1][1] - a[0][1] * a[1][0] + a[0][0] * a[2][2] - a[0][2] * a[2][0] + a[1][1] * a[2][2]
        - a[1][2] * a[2][1];
    let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    [1.0, -tr, minors, -det]
}

pub fn eval_poly(c: &[f64; 4], x: f64) -> f64 {
    ((c[0] * x + c[1]) * x + c[2]) * x + c[3]
}

/// The frame block in the form it is usually quoted. It is not a multiple
/// of the assembled block (the ends carry ±2, the rest a factor 1/4) but
/// has the same inertia.
pub fn printed_frame_matrix(case: Case, n: usize) -> [[f64; 3]; 3] {
    let p = n as f64 + 0.5;
    let lo = ((n * n.saturating_sub(1)) as f64).sqrt() / 4.0;
    let hi = (((n + 1) * (n + 2)) as f64).sqrt() / 4.0;
    match case {
        Case::I => [[-2.0, lo, 0.0], [lo, p, hi], [0.0, hi, 2.0]],
        Case::II => [[-2.0, -lo, 0.0], [-lo, -p, -hi], [0.0, -hi, 2.0]],
    }
}

/// `F_I(λ) = λ³ - (n+½)λ² - (n²+n+33)λ/8 + 7(n+½)/2` and its quoted
/// case II partner `F_II(λ) = -F_I(-λ)`.
pub fn printed_charpoly(case: Case, n: usize) -> [f64; 4] {
    let p = n as f64 + 0.5;
    let q = ((n * n + n + 33) as f64) / 8.0;
    match case {
        Case::I => [1.0, -p, -q, 3.5 * p],
        Case::II => [1.0, p, -q, -3.5 * p],
    }
}

/// Sign of `d''(ω) = -½ dM/dω` together with `dω/dM` at `M = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DppReport {
    pub sign: i32,
    pub d_omega_dm: f64,
    pub d_omega_dm_exact: f64,
}

/// Four-point central difference of `M ↦ ω(M)` at `M = 1`, `h = 1e-3`.
/// Errors if `ω` is not strictly monotone on `[0.95, 1.05]`.
pub fn dpp_sign(case: Case, n: usize) -> Result<DppReport> {
    let h = 1e-3;
    let w = |m: f64| case.omega(n, m);
    let deriv = |m: f64| (w(m - 2.0 * h) - 8.0 * w(m - h) + 8.0 * w(m + h) - w(m + 2.0 * h)) / (12.0 * h);
    let d = deriv(1.0);
    for m in [0.95, 0.975, 1.025, 1.05] {
        let dm = deriv(m);
        if dm == 0.0 || dm.signum() != d.signum() {
            return Err(Error::NonMonotone(m));
        }
    }
    let p = n as f64 + 0.5;
    let exact = match case {
        Case::I => 1.5 * p,
        Case::II => -2.5 * p,
    };
    Ok(DppReport {
        sign: if d > 0.0 { -1 } else { 1 },
        d_omega_dm: d,
        d_omega_dm_exact: exact,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HessianReport {
    pub case: Case,
    pub n: usize,
    pub cutoff: usize,
    pub subspace: Subspace,
    pub modes: Vec<usize>,
    pub l11: Inertia,
    pub l22: Inertia,
    pub total: Inertia,
    /// `L₁₁` restricted to `{Ω_{n-2}, Ω_n, Ω_{n+2}}`, as assembled.
    pub frame_matrix: [[f64; 3]; 3],
    pub frame_charpoly: [f64; 4],
    pub frame_inertia: Inertia,
    pub printed_frame: [[f64; 3]; 3],
    pub printed_charpoly: [f64; 4],
    /// Charpoly of the quoted frame matrix; differs from the quoted
    /// polynomial in case II.
    pub printed_frame_charpoly: [f64; 4],
    /// Largest `|L₁₁ - L₂₂|` entry outside the frame block.
    pub off_frame_coupling: f64,
    pub dpp: DppReport,
}

/// Assembles both Hessian blocks at `Ω_n` on modes `0..=cutoff` (even
/// ones only for [`Subspace::Even`]) and counts their inertia.
pub fn assemble_hessian(case: Case, n: usize, cutoff: usize, subspace: Subspace) -> Result<HessianReport> {
    if n % 2 == 1 {
        return Err(Error::OddMode(n));
    }
    if n < 2 || n + 2 > cutoff {
        return Err(Error::InvalidArgument(format!(
            "need 2 <= n and n + 2 <= cutoff, got n = {n}, cutoff = {cutoff}"
        )));
    }
    let modes: Vec<usize> = match subspace {
        Subspace::Even => (0..=cutoff).step_by(2).collect(),
        Subspace::Full => (0..=cutoff).collect(),
    };
    let l11 = l11_matrix(case, n, &modes);
    let l22 = l22_diagonal(n, &modes);
    let tol = 1e-9 * (4.0 * cutoff as f64 + 8.0);
    let eig11 = SymmetricEigen::new(l11.clone()).eigenvalues;
    let in11 = inertia(eig11.as_slice(), tol);
    let in22 = inertia(&l22, tol);

    let pos = |m: usize| modes.iter().position(|&k| k == m).expect("frame mode in basis");
    let frame_idx = [pos(n - 2), pos(n), pos(n + 2)];
    let mut frame = [[0.0; 3]; 3];
    for (r, &i) in frame_idx.iter().enumerate() {
        for (c, &j) in frame_idx.iter().enumerate() {
            frame[r][c] = l11[(i, j)];
        }
    }
    let frame_eigs = SymmetricEigen::new(DMatrix::from_fn(3, 3, |i, j| frame[i][j])).eigenvalues;
    let mut off_frame_coupling: f64 = 0.0;
    for i in 0..modes.len() {
        for j in 0..modes.len() {
            if frame_idx.contains(&i) && frame_idx.contains(&j) {
                continue;
            }
            let diag = if i == j { l22[i] } else { 0.0 };
            off_frame_coupling = off_frame_coupling.max((l11[(i, j)] - diag).abs());
        }
    }
    let printed_frame = printed_frame_matrix(case, n);
    Ok(HessianReport {
        case,
        n,
        cutoff,
        subspace,
        modes,
        l11: in11,
        l22: in22,
        total: in11.add(in22),
        frame_matrix: frame,
        frame_charpoly: charpoly3(&frame),
        frame_inertia: inertia(frame_eigs.as_slice(), 1e-12),
        printed_frame,
        printed_charpoly: printed_charpoly(case, n),
        printed_frame_charpoly: charpoly3(&printed_frame),
        off_frame_coupling,
        dpp: dpp_sign(case, n)?,
    })
}
