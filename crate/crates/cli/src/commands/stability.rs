//! Orbital-stability trials: modulated distance to the standing-wave orbit
//! for each (trial, δ) pair.

use num_complex::Complex64 as C64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use trapwave::wave_lab::stability::log_slope;
use trapwave::wave_lab::{stability_trial, Perturbation, StabilityReport};

use super::Outcome;
use crate::config::{RunConfig, Trial};
use crate::report::{entries, merge_worst, Entry, Failure, Table};

pub const SCHEMA: &str = "trapwave.stability/1";
/// Bound on `sup_t dist / δ` expected from orbital stability.
pub const RATIO_BOUND: f64 = 10.0;

/// One mode injection plus a boost and a shift, all drawn from `seed`.
pub fn seeded_trial(seed: u64, n: usize) -> Trial {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<usize> = (0..=4).map(|k| 2 * k).filter(|&m| m != n).collect();
    let mode = modes[(rng.random::<f64>() * modes.len() as f64) as usize % modes.len()];
    let phase = 2.0 * std::f64::consts::PI * rng.random::<f64>();
    let boost = 2.0 * rng.random::<f64>() - 1.0;
    let shift = 2.0 * rng.random::<f64>() - 1.0;
    Trial {
        name: format!("seeded-{seed}"),
        perturbation: vec![
            Perturbation::Mode {
                mode,
                amplitude: C64::from_polar(1.0, phase),
            },
            Perturbation::Boost { direction: boost },
            Perturbation::Shift { direction: shift },
        ],
    }
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let sc = cfg.stability_config();
    let block = cfg.stability.clone().unwrap_or_default();
    let trials = block.trials.clone().unwrap_or_else(|| vec![seeded_trial(cfg.seed, sc.n)]);
    let jobs: Vec<(usize, f64)> = (0..trials.len())
        .flat_map(|i| block.deltas.iter().map(move |&d| (i, d)))
        .collect();
    let reports: Vec<StabilityReport> = jobs
        .par_iter()
        .map(|&(i, delta)| stability_trial(&sc, &trials[i].perturbation, delta))
        .collect::<Result<_, _>>()?;

    let mut table = Table::new(vec!["trial".into(), "delta".into(), "t".into(), "distance".into()]);
    let mut diagnostics = Vec::new();
    let mut worst_ratio: f64 = 0.0;
    let mut summary = Vec::new();
    for (i, trial) in trials.iter().enumerate() {
        let mine: Vec<&StabilityReport> = jobs
            .iter()
            .zip(&reports)
            .filter(|((j, _), _)| *j == i)
            .map(|(_, r)| r)
            .collect();
        let mut rows = Vec::new();
        for r in &mine {
            for (t, dist) in r.times.iter().zip(&r.distances) {
                let mut cells = vec![trial.name.clone()];
                cells.extend([r.delta, *t, *dist].map(crate::report::fmt_f64));
                table.nonfinite += [r.delta, *t, *dist].iter().filter(|v| !v.is_finite()).count();
                table.rows.push(cells);
            }
            merge_worst(&mut diagnostics, entries(&r.diagnostics));
            let ratio = (r.delta > 0.0).then(|| r.sup_dist / r.delta);
            if let Some(q) = ratio {
                worst_ratio = worst_ratio.max(q);
            }
            rows.push(json!({"delta": r.delta, "sup_dist": r.sup_dist, "sup_over_delta": ratio}));
        }
        let mut by_delta: Vec<(f64, f64)> = mine.iter().map(|r| (r.delta, r.sup_dist)).collect();
        by_delta.sort_by(|a, b| a.0.total_cmp(&b.0));
        let monotone = by_delta.windows(2).all(|w| w[0].1 <= w[1].1);
        let fit: Vec<(f64, f64)> = by_delta.iter().copied().filter(|(d, s)| *d > 0.0 && *s > 0.0).collect();
        let slope = (fit.len() >= 2).then(|| {
            let (x, y): (Vec<f64>, Vec<f64>) = fit.into_iter().unzip();
            log_slope(&x, &y)
        });
        summary.push(json!({
            "name": trial.name,
            "perturbation": trial.perturbation,
            "deltas": rows,
            "monotone": monotone,
            "log_log_slope": slope,
        }));
    }
    diagnostics.push(Entry::measured("sup_over_delta", worst_ratio, RATIO_BOUND));
    diagnostics.push(table.finiteness());
    let results: Value = json!({
        "schema": SCHEMA,
        "columns": table.header,
        "s": sc.s,
        "kappa": sc.kappa(),
        "horizon": sc.horizon(),
        "trials": summary,
    });
    Ok(Outcome {
        results,
        diagnostics,
        table: Some(table),
    })
}
