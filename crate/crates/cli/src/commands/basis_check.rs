//! Projection of the configured initial state onto the truncated basis:
//! quadrature orthonormality, truncation loss and reconstruction error.

use serde_json::json;
use trapwave::hermite::{hermite_fill, synthesize, Analyzer, BasisSpec};
use trapwave::propagator::derive_params;
use trapwave::GridState;

use super::initial::{grid_spec, propagator};
use super::Outcome;
use crate::config::RunConfig;
use crate::report::{entries, Entry, Failure};

/// Largest accepted deviation of the quadrature Gram matrix from the identity.
pub const ORTHONORMALITY_TOLERANCE: f64 = 1e-12;

/// `max_{m,n} |Σ_j W_j ψ_m(ξ_j) ψ_n(ξ_j) - δ_mn|` for the analyzer's rule.
fn orthonormality_error(an: &Analyzer) -> f64 {
    let modes = an.spec.modes_per_axis();
    let mut psi = vec![0.0; modes];
    let mut gram = vec![0.0; modes * modes];
    for (&x, &w) in an.rule.nodes.iter().zip(&an.rule.scaled_weights) {
        hermite_fill(x, &mut psi);
        for m in 0..modes {
            for n in 0..modes {
                gram[m * modes + n] += w * psi[m] * psi[n];
            }
        }
    }
    gram.iter()
        .enumerate()
        .map(|(k, g)| (g - if k / modes == k % modes { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max)
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let grid = grid_spec(cfg)?;
    let (source, raw) = propagator(cfg, &grid)?;
    let prop = source.get();
    let u0: GridState = match raw {
        Some(u) => u,
        None => prop.state_on_grid(0.0, &grid)?.state,
    };
    let params = derive_params(&u0, cfg.lambda, cfg.eta)?;
    let an = Analyzer::new(BasisSpec::new(cfg.dimension, params.kappa, cfg.basis.cutoff)?)?;
    let analysis = an.analyze_grid(&u0)?;
    let back = synthesize(&analysis.state, &grid)?;
    let reconstruction = back.rel_l2_distance(&u0);
    let ortho = orthonormality_error(&an);
    let profile = prop.profile_at(0.0);
    let top = profile
        .coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm_sqr() > 1e-30)
        .map(|(k, _)| profile.spec.multi_index(k).degree())
        .max()
        .unwrap_or(0);
    let results = json!({
        "kappa": params.kappa,
        "cutoff": cfg.basis.cutoff,
        "modes": an.spec.len(),
        "quadrature_nodes": an.nodes_per_axis(),
        "grid_mass": u0.mass(),
        "coefficient_mass": analysis.state.mass(),
        "truncation_loss": analysis.truncation_loss,
        "reconstruction_rel_l2": reconstruction,
        "orthonormality_error": ortho,
        "profile_mass": profile.mass(),
        "profile_top_degree": top,
        "center": params.b,
        "momentum": params.a,
    });
    let mut diagnostics = entries(&analysis.diagnostics);
    diagnostics.extend(entries(&prop.diagnostics).into_iter().map(|mut e| {
        e.name = format!("profile_{}", e.name);
        e
    }));
    diagnostics.push(Entry::measured("orthonormality", ortho, ORTHONORMALITY_TOLERANCE));
    diagnostics.push(Entry::info("reconstruction_rel_l2", reconstruction));
    Ok(Outcome {
        results,
        diagnostics,
        table: None,
    })
}
