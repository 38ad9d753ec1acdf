//! Closed-form standing waves: predicted frequency, PDE residual and peak
//! trajectories.

use serde_json::{json, Value};
use trapwave::galilean::ClassicalPath;
use trapwave::hermite::MultiIndex;
use trapwave::observables::observables_grid;
use trapwave::oracle::pde_residual;
use trapwave::propagator::GRID_LOSS_TOLERANCE;
use trapwave::wave_lab::{multi_peak, single_peak};
use trapwave::{GridSpec, GridState};

use super::initial::{grid_spec, or_zeros};
use super::Outcome;
use crate::config::{Initial, RunConfig};
use crate::report::{Entry, Failure};

/// Largest accepted PDE residual of a closed-form solution.
pub const RESIDUAL_TOLERANCE: f64 = 1e-5;
/// Largest accepted gap between measured and predicted centers.
pub const CENTER_TOLERANCE: f64 = 1e-8;
/// Largest accepted gap between the closed form and the general propagator.
pub const AGREEMENT_TOLERANCE: f64 = 1e-6;
/// Time spacing of the 7-point stencil used for the residual.
const STENCIL_STEP: f64 = 1e-3;

/// Residual at `t` from samples `t + kh`, `|k| <= 3`.
fn residual_at<F>(cfg: &RunConfig, t: f64, state: F) -> Result<f64, Failure>
where
    F: Fn(f64) -> Result<GridState, trapwave::Error>,
{
    let samples = (-3..=3)
        .map(|k| state(t + k as f64 * STENCIL_STEP))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(pde_residual(&samples, STENCIL_STEP, cfg.lambda, cfg.eta, cfg.model)?)
}

fn center(u: &GridState, cfg: &RunConfig) -> Vec<f64> {
    let obs = observables_grid(u, cfg.lambda, cfg.eta);
    obs.x.iter().map(|x| x / obs.mass).collect()
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let grid = grid_spec(cfg)?;
    match cfg.initial.as_ref().expect("validated") {
        Initial::HermiteMode { n, mass, a, b } => {
            let d = cfg.dimension;
            single(cfg, &grid, MultiIndex(n.clone()), *mass, or_zeros(a, d), or_zeros(b, d))
        }
        Initial::MultiPeak { mass, peaks } => multi(cfg, &grid, *mass, peaks.clone()),
        Initial::GridFile(_) => unreachable!("rejected by validation"),
    }
}

fn single(cfg: &RunConfig, grid: &GridSpec, n: MultiIndex, mass: f64, a: Vec<f64>, b: Vec<f64>) -> Result<Outcome, Failure> {
    let sp = single_peak(cfg.model, cfg.lambda, cfg.eta, mass, n, a.clone(), b.clone())?;
    let path = ClassicalPath::new(cfg.lambda, a, b)?;
    let mut residual: f64 = 0.0;
    let mut center_gap: f64 = 0.0;
    let mut loss: f64 = 0.0;
    let mut trajectory = Vec::new();
    for t in cfg.time.times() {
        let u = sp.state_on_grid(t, grid)?;
        let r = residual_at(cfg, t, |s| sp.state_on_grid(s, grid))?;
        let measured = center(&u, cfg);
        let predicted = path.eval(t).0;
        residual = residual.max(r);
        center_gap = center_gap.max(max_gap(&measured, &predicted));
        loss = loss.max((1.0 - u.mass() / mass).abs());
        trajectory.push(json!({"t": t, "center": measured, "predicted_center": predicted, "residual": r}));
    }
    let period = 2.0 * std::f64::consts::PI / sp.kappa.sqrt();
    let results = json!({
        "kind": "single_peak",
        "kappa": sp.kappa,
        "frequency": sp.omega,
        "phase_rate": 0.5 * sp.omega,
        "period": period,
        "residual": residual,
        "trajectory": trajectory,
    });
    let diagnostics = vec![
        Entry::measured("pde_residual", residual, RESIDUAL_TOLERANCE),
        Entry::measured("center_deviation", center_gap, CENTER_TOLERANCE),
        Entry::measured("grid_loss", loss, GRID_LOSS_TOLERANCE),
    ];
    Ok(Outcome {
        results,
        diagnostics,
        table: None,
    })
}

fn multi(cfg: &RunConfig, grid: &GridSpec, mass: f64, peaks: Vec<trapwave::wave_lab::PeakSpec>) -> Result<Outcome, Failure> {
    let mp = multi_peak(cfg.model, cfg.lambda, cfg.eta, mass, peaks, grid, cfg.basis.cutoff)?;
    let times = cfg.time.times();
    let d = cfg.dimension as f64;
    let mut residual: f64 = 0.0;
    let mut agreement: f64 = 0.0;
    let mut rows = Vec::new();
    for &t in &times {
        let u = mp.state_on_grid(t, grid)?;
        let general = mp.propagator().state_on_grid(t, grid)?;
        let r = residual_at(cfg, t, |s| mp.state_on_grid(s, grid))?;
        residual = residual.max(r);
        agreement = agreement.max(u.rel_l2_distance(&general.state));
        rows.push(json!({"t": t, "center": center(&u, cfg), "residual": r}));
    }
    let period = mp.period();
    let per_peak: Vec<Value> = mp
        .peaks
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let path: Vec<Value> = times.iter().map(|&t| json!({"t": t, "center": mp.peak_center(j, t)})).collect();
            json!({
                "index": j,
                "n": p.n,
                "alpha_tilde": mp.tilde_alpha[j],
                "spectral_rate": mp.kappa.sqrt() * (p.n.degree() as f64 + 0.5 * d),
                "period": period,
                "trajectory": path,
            })
        })
        .collect();
    let results = json!({
        "kind": "multi_peak",
        "kappa": mp.kappa,
        "mu": mp.mu,
        "a": mp.params.a,
        "b": mp.params.b,
        "period": period,
        "residual": residual,
        "peaks": per_peak,
        "trajectory": rows,
    });
    let diagnostics = vec![
        Entry::measured("pde_residual", residual, RESIDUAL_TOLERANCE),
        Entry::measured("propagator_agreement", agreement, AGREEMENT_TOLERANCE),
    ];
    Ok(Outcome {
        results,
        diagnostics,
        table: None,
    })
}
