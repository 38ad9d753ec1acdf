//! Grid and initial-state construction shared by the commands.

use std::path::Path;

use num_complex::Complex64 as C64;
use trapwave::hermite::{BasisSpec, CoeffState, MultiIndex};
use trapwave::propagator::{ExactPropagator, ModelParams};
use trapwave::wave_lab::{multi_peak, MultiPeak};
use trapwave::{GridSpec, GridState};

use crate::config::{Initial, RunConfig};
use crate::report::{Entry, Failure};

pub fn grid_spec(cfg: &RunConfig) -> Result<GridSpec, Failure> {
    let g = &cfg.grid;
    Ok(GridSpec::new(cfg.dimension, g.half_width, g.points, g.dt)?)
}

/// Zero vector when `v` is empty.
pub fn or_zeros(v: &[f64], d: usize) -> Vec<f64> {
    if v.is_empty() {
        vec![0.0; d]
    } else {
        v.to_vec()
    }
}

pub enum Source {
    Direct(ExactPropagator),
    Multi(Box<MultiPeak>),
}

impl Source {
    pub fn get(&self) -> &ExactPropagator {
        match self {
            Source::Direct(p) => p,
            Source::Multi(m) => m.propagator(),
        }
    }
}

/// Exact propagator for the configured initial data, plus the raw grid
/// samples when the data came from a file.
pub fn propagator(cfg: &RunConfig, grid: &GridSpec) -> Result<(Source, Option<GridState>), Failure> {
    let d = cfg.dimension;
    let cutoff = cfg.basis.cutoff;
    match cfg.initial.as_ref().expect("validated") {
        Initial::HermiteMode { n, mass, a, b } => {
            let params = ModelParams::new(cfg.lambda, cfg.eta, *mass, or_zeros(a, d), or_zeros(b, d))?;
            let spec = BasisSpec::new(d, params.kappa, cutoff)?;
            let w0 = CoeffState::unit(spec, &MultiIndex(n.clone()))?.scale(C64::new(mass.sqrt(), 0.0));
            Ok((Source::Direct(ExactPropagator::from_profile(cfg.model, params, w0)?), None))
        }
        Initial::MultiPeak { mass, peaks } => {
            let mp = multi_peak(cfg.model, cfg.lambda, cfg.eta, *mass, peaks.clone(), grid, cutoff)?;
            Ok((Source::Multi(Box::new(mp)), None))
        }
        Initial::GridFile(path) => {
            let u0 = load_grid_file(path, grid)?;
            let prop = ExactPropagator::from_grid(cfg.model, &u0, cfg.lambda, cfg.eta, cutoff)?;
            Ok((Source::Direct(prop), Some(u0)))
        }
    }
}

/// Reads `x,re,im` (d = 1) or `x,y,re,im` (d = 2) rows in row-major order
/// and checks that the coordinates are those of `grid`.
pub fn load_grid_file(path: &Path, grid: &GridSpec) -> Result<GridState, Failure> {
    let mismatch = |msg: String| Failure::config(vec![Entry::error("grid_file_mismatch", msg)]);
    let malformed = |msg: String| Failure::config(vec![Entry::error("grid_file_malformed", msg)]);
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| Failure::io("grid_file_unreadable", format!("{}: {e}", path.display())))?;
    let want: &[&str] = if grid.d == 1 { &["x", "re", "im"] } else { &["x", "y", "re", "im"] };
    let header = reader.headers().map_err(|e| malformed(e.to_string()))?.clone();
    if header.iter().map(str::trim).ne(want.iter().copied()) {
        return Err(malformed(format!("header must be {}, got {}", want.join(","), header.iter().collect::<Vec<_>>().join(","))));
    }
    let tol = 1e-9 * grid.half_width;
    let mut values = Vec::with_capacity(grid.len());
    let mut expect = vec![0.0; grid.d];
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| malformed(e.to_string()))?;
        let nums: Vec<f64> = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| malformed(format!("row {}: {e}", row + 1)))?;
        if row >= grid.len() {
            return Err(mismatch(format!("more than {} rows", grid.len())));
        }
        grid.coords(row, &mut expect);
        if nums.iter().zip(&expect).any(|(x, e)| (x - e).abs() > tol) {
            return Err(mismatch(format!(
                "row {}: coordinates {:?} differ from grid point {expect:?}",
                row + 1,
                &nums[..grid.d]
            )));
        }
        values.push(C64::new(nums[grid.d], nums[grid.d + 1]));
    }
    if values.len() != grid.len() {
        return Err(mismatch(format!("expected {} rows, got {}", grid.len(), values.len())));
    }
    Ok(GridState::new(*grid, values)?)
}
