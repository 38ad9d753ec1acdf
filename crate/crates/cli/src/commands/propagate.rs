//! Observable time series of the exact solution, optionally checked
//! against the split-step oracle.

use serde_json::json;
use trapwave::observables::observables_grid;
use trapwave::oracle::{integrate_at, IntegrateOptions};
use trapwave::propagator::Model;

use super::initial::{grid_spec, propagator};
use super::Outcome;
use crate::config::RunConfig;
use crate::report::{entries, merge_worst, Entry, Failure, Table};

pub const SCHEMA: &str = "trapwave.propagate/1";
/// Largest accepted relative L² gap between the exact and oracle states.
pub const ORACLE_TOLERANCE: f64 = 1e-6;

pub fn header(d: usize, compare_oracle: bool) -> Vec<String> {
    let mut h = vec!["t".to_string(), "mass".into(), "energy".into()];
    h.extend((1..=d).map(|i| format!("X{i}")));
    h.extend((1..=d).map(|i| format!("P{i}")));
    h.extend(["psi_or_phi".to_string(), "sigma1_norm".into()]);
    if compare_oracle {
        h.push("rel_l2_error".into());
    }
    h.push("status".into());
    h
}

/// Writes rows until the first flagged sample, which is kept and marked in
/// its `status` cell.
pub fn run(cfg: &RunConfig, compare_oracle: bool) -> Result<Outcome, Failure> {
    let grid = grid_spec(cfg)?;
    let (source, raw) = propagator(cfg, &grid)?;
    let prop = source.get();
    let times = cfg.time.times();
    let states = prop.states_on_grid(&times, &grid)?;
    let oracle = if compare_oracle {
        let u0 = raw.unwrap_or_else(|| states[0].state.clone());
        Some(integrate_at(&u0, &times, cfg.lambda, cfg.eta, cfg.model, IntegrateOptions::default())?)
    } else {
        None
    };

    let mut table = Table::new(header(cfg.dimension, compare_oracle));
    let mut diagnostics = Vec::new();
    let mut complete = true;
    let mut worst_oracle: f64 = 0.0;
    for (j, p) in states.iter().enumerate() {
        let obs = observables_grid(&p.state, cfg.lambda, cfg.eta);
        let gauge = match cfg.model {
            Model::H => p.phases.psi,
            Model::HPrime => p.phases.phi,
        };
        let mut nums = vec![p.t, obs.mass, obs.energy];
        nums.extend(&obs.x);
        nums.extend(&obs.p);
        nums.push(gauge);
        nums.push((obs.kinetic + 0.5 * obs.m2).sqrt());
        let mut row_diags = entries(&p.diagnostics);
        if let Some(traj) = &oracle {
            let err = p.state.rel_l2_distance(&traj.states[j]);
            worst_oracle = worst_oracle.max(err);
            nums.push(err);
            row_diags.push(Entry::measured("oracle_rel_l2", err, ORACLE_TOLERANCE));
        }
        if nums.iter().any(|v| !v.is_finite()) {
            row_diags.push(Entry::measured("nonfinite_cells", 1.0, 0.0));
        }
        let flagged: Vec<&str> = row_diags.iter().filter(|e| e.flagged).map(|e| e.name.as_str()).collect();
        let status = if flagged.is_empty() { "ok".to_string() } else { flagged.join(";") };
        table.push(&nums, &[&status]);
        let stop = !flagged.is_empty();
        merge_worst(&mut diagnostics, row_diags);
        if stop {
            complete = j + 1 == states.len();
            break;
        }
    }
    if let Some(traj) = &oracle {
        diagnostics.push(Entry::info("oracle_refinement_change", traj.refinement_change));
        merge_worst(&mut diagnostics, entries(&traj.diagnostics));
    }
    let params = &prop.params;
    let results = json!({
        "schema": SCHEMA,
        "columns": table.header,
        "rows": table.rows.len(),
        "complete": complete,
        "kappa": params.kappa,
        "mass": params.mass,
        "a": params.a,
        "b": params.b,
        "period": params.period(),
        "oracle_max_rel_l2": oracle.as_ref().map(|_| worst_oracle),
    });
    Ok(Outcome {
        results,
        diagnostics,
        table: Some(table),
    })
}
