//! Inertia of the linearized operator at an excited state and the sign of
//! `d''(ω)`.

use serde_json::json;
use trapwave::wave_lab::assemble_hessian;

use super::Outcome;
use crate::config::RunConfig;
use crate::report::{Entry, Failure};

pub fn run(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let m = cfg.morse.as_ref().expect("validated");
    let r = assemble_hessian(m.case, m.n, m.cutoff, m.subspace)?;
    let results = json!({
        "case": r.case,
        "n": r.n,
        "cutoff": r.cutoff,
        "subspace": r.subspace,
        "n_minus_total": r.total.negative,
        "n_zero_total": r.total.zero,
        "n_minus_l11": r.l11.negative,
        "n_minus_l22": r.l22.negative,
        "dpp_sign": r.dpp.sign,
        "d_omega_dm": r.dpp.d_omega_dm,
        "d_omega_dm_exact": r.dpp.d_omega_dm_exact,
        "frame_matrix": r.frame_matrix,
        "frame_charpoly": r.frame_charpoly,
        "frame_inertia": r.frame_inertia,
        "printed_frame": r.printed_frame,
        "printed_frame_charpoly": r.printed_frame_charpoly,
        "off_frame_coupling": r.off_frame_coupling,
    });
    let diagnostics = vec![Entry::info(
        "dpp_difference_error",
        (r.dpp.d_omega_dm - r.dpp.d_omega_dm_exact).abs(),
    )];
    Ok(Outcome {
        results,
        diagnostics,
        table: None,
    })
}
