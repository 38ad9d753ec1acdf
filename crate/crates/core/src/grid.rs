//! Uniform periodic box grids and complex fields sampled on them.
//!
//! Axis points are `x_j = -L + j·2L/N`, `j = 0..N`. Derivatives, translations
//! and off-grid sampling all use the band-limited (Fourier) interpolant of
//! the samples.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{apply_along_axis, unravel};

/// Boundary density (relative to peak density) above which a field is
/// considered to touch the box edge.
pub const BOUNDARY_TOLERANCE: f64 = 1e-10;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, dir: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(n, dir))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub d: usize,
    pub half_width: f64,
    pub points: usize,
    pub dt: f64,
}

impl GridSpec {
    pub fn new(d: usize, half_width: f64, points: usize, dt: f64) -> Result<Self> {
        if d == 0 || d > 2 {
            return Err(Error::InvalidArgument(format!("grids support d in {{1, 2}}, got {d}")));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::InvalidArgument(format!("half-width must be positive, got {half_width}")));
        }
        if points < 64 || !points.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "points per axis must be a power of two >= 64, got {points}"
            )));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        Ok(Self {
            d,
            half_width,
            points,
            dt,
        })
    }

    pub fn with_dt(self, dt: f64) -> Self {
        Self { dt, ..self }
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    /// Volume element `dx^d`.
    pub fn cell(&self) -> f64 {
        self.dx().powi(self.d as i32)
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.d as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn shape(&self) -> Vec<usize> {
        vec![self.points; self.d]
    }

    pub fn axis(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.points).map(|j| -self.half_width + j as f64 * dx).collect()
    }

    /// Discrete angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.points as i64;
        let dk = PI / self.half_width;
        (0..n)
            .map(|j| if j < n / 2 { j } else { j - n } as f64 * dk)
            .collect()
    }

    /// Physical coordinates of a flat index.
    pub fn coords(&self, flat: usize, out: &mut [f64]) {
        let mut idx = [0usize; 2];
        unravel(flat, &self.shape(), &mut idx[..self.d]);
        let dx = self.dx();
        for (o, &j) in out.iter_mut().zip(&idx[..self.d]) {
            *o = -self.half_width + j as f64 * dx;
        }
    }

    /// Coordinates of every grid point; entries past `d` are 0.
    pub fn positions(&self) -> Vec<[f64; 2]> {
        let mut x = [0.0; 2];
        (0..self.len())
            .map(|flat| {
                self.coords(flat, &mut x[..self.d]);
                x
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridState {
    pub spec: GridSpec,
    pub values: Vec<C64>,
}

impl GridState {
    pub fn new(spec: GridSpec, values: Vec<C64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::InvalidArgument(format!(
                "grid needs {} values, got {}",
                spec.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite grid value".into()));
        }
        Ok(Self { spec, values })
    }

    pub fn from_fn<F: Fn(&[f64]) -> C64>(spec: GridSpec, f: F) -> Self {
        let mut x = vec![0.0; spec.d];
        let values = (0..spec.len())
            .map(|flat| {
                spec.coords(flat, &mut x);
                f(&x)
            })
            .collect();
        Self { spec, values }
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Self {
            spec,
            values: vec![C64::new(0.0, 0.0); spec.len()],
        }
    }

    pub fn mass(&self) -> f64 {
        self.spec.cell() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    /// `∫ u conj(v)`.
    pub fn inner(&self, other: &GridState) -> C64 {
        self.spec.cell()
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b.conj())
                .sum::<C64>()
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        (self.spec.cell() * self.values.iter().map(|v| v.norm().powf(p)).sum::<f64>()).powf(1.0 / p)
    }

    /// `‖self - other‖₂ / ‖other‖₂`.
    pub fn rel_l2_distance(&self, other: &GridState) -> f64 {
        let num: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let den: f64 = other.values.iter().map(|v| v.norm_sqr()).sum();
        (num / den).sqrt()
    }

    pub fn scale(&self, z: C64) -> Self {
        Self {
            spec: self.spec,
            values: self.values.iter().map(|v| v * z).collect(),
        }
    }

    pub fn add(&self, other: &GridState) -> Self {
        Self {
            spec: self.spec,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        }
    }

    /// Peak density on the outermost grid layer relative to the global peak.
    pub fn boundary_ratio(&self) -> f64 {
        let n = self.spec.points;
        let shape = self.spec.shape();
        let mut idx = vec![0; self.spec.d];
        let mut peak = 0.0f64;
        let mut edge = 0.0f64;
        for (flat, v) in self.values.iter().enumerate() {
            let rho = v.norm_sqr();
            peak = peak.max(rho);
            unravel(flat, &shape, &mut idx);
            if idx.iter().any(|&j| j == 0 || j == n - 1) {
                edge = edge.max(rho);
            }
        }
        if peak > 0.0 {
            edge / peak
        } else {
            0.0
        }
    }

    pub fn fft(&self) -> Vec<C64> {
        fft_nd(&self.values, &self.spec.shape(), FftDirection::Forward)
    }

    /// Inverse of [`fft`](Self::fft) including the `1/N^d` normalization.
    pub fn from_spectrum(spec: GridSpec, spectrum: &[C64]) -> Self {
        let mut values = fft_nd(spectrum, &spec.shape(), FftDirection::Inverse);
        let norm = 1.0 / spec.len() as f64;
        values.iter_mut().for_each(|v| *v *= norm);
        Self { spec, values }
    }

    /// Applies a Fourier multiplier `m(k)` given per flat spectral index.
    pub fn fourier_multiply<F: Fn(&[f64]) -> C64>(&self, m: F) -> Self {
        let k = self.spec.wavenumbers();
        let shape = self.spec.shape();
        let mut idx = vec![0; self.spec.d];
        let mut kv = vec![0.0; self.spec.d];
        let mut spec_vals = self.fft();
        for (flat, v) in spec_vals.iter_mut().enumerate() {
            unravel(flat, &shape, &mut idx);
            for (kk, &j) in kv.iter_mut().zip(&idx) {
                *kk = k[j];
            }
            *v *= m(&kv);
        }
        Self::from_spectrum(self.spec, &spec_vals)
    }

    /// Spectral `∂_axis u`. The Nyquist mode is zeroed.
    pub fn gradient(&self, axis: usize) -> Self {
        let nyq = PI / self.spec.dx();
        self.fourier_multiply(|k| {
            if (k[axis].abs() - nyq).abs() < 1e-9 * nyq {
                C64::new(0.0, 0.0)
            } else {
                C64::new(0.0, k[axis])
            }
        })
    }

    /// Spectral `Δu`.
    pub fn laplacian(&self) -> Self {
        self.fourier_multiply(|k| C64::new(-k.iter().map(|v| v * v).sum::<f64>(), 0.0))
    }

    /// Periodic band-limited translation `x ↦ u(x - offset)`.
    pub fn translate(&self, offset: &[f64]) -> Self {
        let nyq = PI / self.spec.dx();
        self.fourier_multiply(|k| {
            k.iter()
                .zip(offset)
                .map(|(&kk, &o)| {
                    // Nyquist mode of the real-symmetrized interpolant.
                    if (kk.abs() - nyq).abs() < 1e-9 * nyq {
                        C64::new((kk * o).cos(), 0.0)
                    } else {
                        C64::from_polar(1.0, -kk * o)
                    }
                })
                .product()
        })
    }

    /// Values of the band-limited interpolant on the tensor product of the
    /// given per-axis points. Points outside the box are 0.
    pub fn sample_tensor(&self, axes: &[Vec<f64>]) -> Vec<C64> {
        let n = self.spec.points;
        let l = self.spec.half_width;
        let k = self.spec.wavenumbers();
        let nyq_idx = n / 2;
        let mut data = self.fft();
        let mut shape = self.spec.shape();
        for (axis, xs) in axes.iter().enumerate() {
            let mut mat = vec![C64::new(0.0, 0.0); xs.len() * n];
            for (r, &x) in xs.iter().enumerate() {
                if !(x >= -l && x <= l) {
                    continue;
                }
                let s = x + l;
                for (c, &kc) in k.iter().enumerate() {
                    mat[r * n + c] = if c == nyq_idx {
                        C64::new((kc * s).cos() / n as f64, 0.0)
                    } else {
                        C64::from_polar(1.0 / n as f64, kc * s)
                    };
                }
            }
            let (nd, ns) = apply_along_axis(&data, &shape, axis, &mat, xs.len());
            data = nd;
            shape = ns;
        }
        data
    }

    /// Interpolant value at one point.
    pub fn sample_at(&self, x: &[f64]) -> C64 {
        let axes: Vec<Vec<f64>> = x.iter().map(|&v| vec![v]).collect();
        self.sample_tensor(&axes)[0]
    }
}

pub(crate) fn fft_nd(data: &[C64], shape: &[usize], dir: FftDirection) -> Vec<C64> {
    let mut out = data.to_vec();
    fft_nd_in_place(&mut out, shape, dir);
    out
}

/// Unnormalized n-d FFT in place; the last axis is contiguous.
pub(crate) fn fft_nd_in_place(data: &mut [C64], shape: &[usize], dir: FftDirection) {
    let d = shape.len();
    for axis in 0..d {
        let n = shape[axis];
        let fft = plan(n, dir);
        let inner: usize = shape[axis + 1..].iter().product();
        if inner == 1 {
            fft.process(data);
            continue;
        }
        let outer: usize = shape[..axis].iter().product();
        let mut line = vec![C64::new(0.0, 0.0); n];
        for o in 0..outer {
            for i in 0..inner {
                let base = o * n * inner + i;
                for (j, l) in line.iter_mut().enumerate() {
                    *l = data[base + j * inner];
                }
                fft.process(&mut line);
                for (j, l) in line.iter().enumerate() {
                    data[base + j * inner] = *l;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gauss(x: &[f64], c: f64) -> C64 {
        C64::new((-(x.iter().map(|v| (v - c) * (v - c)).sum::<f64>()) / 2.0).exp(), 0.0)
    }

    #[test]
    fn spec_validation() {
        assert!(GridSpec::new(1, 8.0, 100, 1e-3).is_err());
        assert!(GridSpec::new(1, 8.0, 32, 1e-3).is_err());
        assert!(GridSpec::new(1, -1.0, 64, 1e-3).is_err());
        assert!(GridSpec::new(1, 8.0, 64, 0.0).is_err());
        assert!(GridSpec::new(3, 8.0, 64, 1e-3).is_err());
        let g = GridSpec::new(2, 8.0, 64, 1e-3).unwrap();
        assert_eq!(g.len(), 4096);
        assert_relative_eq!(g.dx(), 0.25);
    }

    #[test]
    fn gaussian_mass() {
        for d in [1, 2] {
            let spec = GridSpec::new(d, 10.0, 128, 1e-3).unwrap();
            let u = GridState::from_fn(spec, |x| gauss(x, 0.0));
            assert_relative_eq!(u.mass(), std::f64::consts::PI.powf(d as f64 / 2.0), max_relative = 1e-13);
        }
    }

    #[test]
    fn fft_round_trip() {
        let spec = GridSpec::new(2, 6.0, 64, 1e-3).unwrap();
        let u = GridState::from_fn(spec, |x| gauss(x, 0.7) * C64::from_polar(1.0, x[0]));
        let back = GridState::from_spectrum(spec, &u.fft());
        assert!(back.rel_l2_distance(&u) < 1e-14);
    }

    #[test]
    fn spectral_derivatives() {
        let spec = GridSpec::new(1, 10.0, 256, 1e-3).unwrap();
        let u = GridState::from_fn(spec, |x| gauss(x, 0.3));
        let du = u.gradient(0);
        let lap = u.laplacian();
        for (j, x) in spec.axis().iter().enumerate() {
            let y = x - 0.3;
            let g = (-y * y / 2.0).exp();
            assert!((du.values[j] - C64::new(-y * g, 0.0)).norm() < 1e-12);
            assert!((lap.values[j] - C64::new((y * y - 1.0) * g, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn fractional_translation() {
        let spec = GridSpec::new(2, 10.0, 128, 1e-3).unwrap();
        let u = GridState::from_fn(spec, |x| gauss(x, 0.0));
        let shifted = u.translate(&[0.37, -1.21]);
        let want = GridState::from_fn(spec, |x| gauss(&[x[0] - 0.37, x[1] + 1.21], 0.0));
        assert!(shifted.rel_l2_distance(&want) < 1e-12);
    }

    #[test]
    fn off_grid_sampling() {
        let spec = GridSpec::new(1, 10.0, 256, 1e-3).unwrap();
        let u = GridState::from_fn(spec, |x| gauss(x, 0.0) * C64::from_polar(1.0, 2.0 * x[0]));
        for x in [-3.3, 0.0123, 1.7, 4.49] {
            let want = gauss(&[x], 0.0) * C64::from_polar(1.0, 2.0 * x);
            assert!((u.sample_at(&[x]) - want).norm() < 1e-12);
        }
        assert_eq!(u.sample_at(&[11.0]), C64::new(0.0, 0.0));
    }

    #[test]
    fn boundary_ratio_detects_edge_mass() {
        let spec = GridSpec::new(1, 10.0, 128, 1e-3).unwrap();
        let inside = GridState::from_fn(spec, |x| gauss(x, 0.0));
        let edge = GridState::from_fn(spec, |x| gauss(x, 9.0));
        assert!(inside.boundary_ratio() < BOUNDARY_TOLERANCE);
        assert!(edge.boundary_ratio() > 1e-2);
    }

    #[test]
    fn lp_norms_of_gaussian() {
        let spec = GridSpec::new(1, 10.0, 256, 1e-3).unwrap();
        let u = GridState::from_fn(spec, |x| gauss(x, 0.0));
        // ∫ e^{-2x²} = √(π/2)
        assert_relative_eq!(u.lp_norm(4.0), (std::f64::consts::PI / 2.0).sqrt().powf(0.25), max_relative = 1e-12);
    }
}
