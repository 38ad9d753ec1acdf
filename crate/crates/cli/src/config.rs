//! Run configuration: JSON text parsed into [`RunConfig`], then validated
//! into a list of named issues.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use trapwave::propagator::Model;
use trapwave::wave_lab::stability::StabilityConfig;
use trapwave::wave_lab::{Case, PeakSpec, Perturbation, Subspace};

use crate::report::Entry;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Propagate,
    StandingWave,
    Stability,
    Morse,
    BasisCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_model")]
    pub model: Model,
    #[serde(default = "default_dimension")]
    pub dimension: usize,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Initial>,
    #[serde(default)]
    pub basis: BasisBlock,
    #[serde(default)]
    pub grid: GridBlock,
    #[serde(default)]
    pub time: TimeBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stability: Option<StabilityBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub morse: Option<MorseBlock>,
}

fn default_model() -> Model {
    Model::H
}

fn default_dimension() -> usize {
    1
}

fn default_eta() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Initial {
    /// `M^{1/2} G(0,a,b) Ω_{n,κ}`; empty `a`/`b` mean zero.
    HermiteMode {
        n: Vec<usize>,
        #[serde(rename = "M")]
        mass: f64,
        #[serde(default)]
        a: Vec<f64>,
        #[serde(default)]
        b: Vec<f64>,
    },
    MultiPeak {
        #[serde(rename = "M")]
        mass: f64,
        peaks: Vec<PeakSpec>,
    },
    /// CSV with header `x,re,im` (d = 1) or `x,y,re,im` (d = 2), row-major.
    GridFile(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisBlock {
    pub cutoff: usize,
}

impl Default for BasisBlock {
    fn default() -> Self {
        Self { cutoff: 32 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    /// Half-width: the grid covers `[-L, L)` per axis.
    #[serde(rename = "L")]
    pub half_width: f64,
    pub points: usize,
    pub dt: f64,
}

impl Default for GridBlock {
    fn default() -> Self {
        Self {
            half_width: 16.0,
            points: 512,
            dt: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeBlock {
    pub t_end: f64,
    pub samples: usize,
}

impl Default for TimeBlock {
    fn default() -> Self {
        Self {
            t_end: 2.0 * std::f64::consts::PI,
            samples: 11,
        }
    }
}

impl TimeBlock {
    /// `samples` equally spaced times in `[0, t_end]`; just `0` for one sample.
    pub fn times(&self) -> Vec<f64> {
        if self.samples <= 1 {
            return vec![0.0];
        }
        (0..self.samples)
            .map(|j| self.t_end * j as f64 / (self.samples - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trial {
    pub name: String,
    pub perturbation: Vec<Perturbation>,
}

/// Stability experiment; model, λ and η come from the top level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StabilityBlock {
    #[serde(rename = "M")]
    pub mass: f64,
    pub n: usize,
    pub s: f64,
    pub periods: f64,
    pub samples: usize,
    pub cutoff: usize,
    pub sigma_cutoff: usize,
    pub y_max: f64,
    pub scan_step: f64,
    pub deltas: Vec<f64>,
    /// Drawn from the seed when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<Vec<Trial>>,
}

impl Default for StabilityBlock {
    fn default() -> Self {
        let c = StabilityConfig::default();
        Self {
            mass: c.mass,
            n: c.n,
            s: c.s,
            periods: c.periods,
            samples: c.samples,
            cutoff: c.cutoff,
            sigma_cutoff: c.sigma_cutoff,
            y_max: c.y_max,
            scan_step: c.scan_step,
            deltas: vec![1e-2, 1e-3, 1e-4],
            trials: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorseBlock {
    pub case: Case,
    pub n: usize,
    #[serde(default = "default_morse_cutoff")]
    pub cutoff: usize,
    #[serde(default = "default_subspace")]
    pub subspace: Subspace,
}

fn default_morse_cutoff() -> usize {
    200
}

fn default_subspace() -> Subspace {
    Subspace::Even
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, Entry> {
        serde_json::from_str(text).map_err(|e| Entry::error("config_parse", e.to_string()))
    }

    /// Resolves a relative grid file path against the config's directory.
    pub fn resolve_paths(&mut self, base: &Path) {
        if let Some(Initial::GridFile(p)) = &mut self.initial {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    pub fn stability_config(&self) -> StabilityConfig {
        let b = self.stability.clone().unwrap_or_default();
        StabilityConfig {
            model: self.model,
            lambda: self.lambda,
            eta: self.eta,
            mass: b.mass,
            n: b.n,
            s: b.s,
            periods: b.periods,
            samples: b.samples,
            cutoff: b.cutoff,
            sigma_cutoff: b.sigma_cutoff,
            y_max: b.y_max,
            scan_step: b.scan_step,
        }
    }

    /// Every violated constraint for `cmd`, each under its own name.
    pub fn validate(&self, cmd: Command) -> Vec<Entry> {
        let mut issues = Vec::new();
        let mut bad = |name: &str, msg: String| issues.push(Entry::error(name, msg));
        let d = self.dimension;
        if !(1..=2).contains(&d) {
            bad("dimension_invalid", format!("dimension must be 1 or 2, got {d}"));
        }
        if !self.lambda.is_finite() {
            bad("lambda_nonfinite", format!("lambda = {}", self.lambda));
        }
        if !self.eta.is_finite() {
            bad("eta_nonfinite", format!("eta = {}", self.eta));
        }
        if self.basis.cutoff == 0 {
            bad("cutoff_invalid", "basis cutoff must be at least 1".into());
        }
        let g = &self.grid;
        if !(g.half_width > 0.0 && g.half_width.is_finite()) {
            bad("grid_half_width_invalid", format!("L must be positive, got {}", g.half_width));
        }
        if g.points < 64 || !g.points.is_power_of_two() {
            bad("grid_points_invalid", format!("points must be a power of two >= 64, got {}", g.points));
        }
        if !(g.dt > 0.0 && g.dt.is_finite()) {
            bad("dt_nonpositive", format!("dt must be positive, got {}", g.dt));
        }
        if !(self.time.t_end >= 0.0 && self.time.t_end.is_finite()) {
            bad("t_end_invalid", format!("t_end must be finite and >= 0, got {}", self.time.t_end));
        }
        if self.time.samples == 0 {
            bad("samples_invalid", "time samples must be at least 1".into());
        }

        let needs_initial = matches!(cmd, Command::Propagate | Command::StandingWave | Command::BasisCheck);
        match (&self.initial, needs_initial) {
            (None, true) => bad("initial_missing", "an `initial` block is required".into()),
            (Some(init), true) => self.validate_initial(init, cmd, &mut bad),
            _ => {}
        }
        match cmd {
            Command::Stability => self.validate_stability(&mut bad),
            Command::Morse => self.validate_morse(&mut bad),
            _ => {}
        }
        issues
    }

    fn validate_initial(&self, init: &Initial, cmd: Command, bad: &mut impl FnMut(&str, String)) {
        let d = self.dimension;
        let dim_ok = |v: &[f64]| v.is_empty() || v.len() == d;
        let check_mass = |mass: f64, bad: &mut dyn FnMut(&str, String)| {
            if !(mass > 0.0 && mass.is_finite()) {
                bad("mass_nonpositive", format!("M must be positive, got {mass}"));
            } else {
                let kappa = self.lambda + self.eta * mass;
                if !(kappa > 0.0) {
                    bad(
                        "kappa_nonpositive",
                        format!("kappa = lambda + eta M = {kappa} must be positive"),
                    );
                }
            }
        };
        match init {
            Initial::HermiteMode { n, mass, a, b } => {
                if n.len() != d || !dim_ok(a) || !dim_ok(b) {
                    bad(
                        "initial_dimension_mismatch",
                        format!("n, a, b need {d} components, got {}, {}, {}", n.len(), a.len(), b.len()),
                    );
                }
                if n.iter().any(|&k| k > self.basis.cutoff) {
                    bad(
                        "cutoff_too_small",
                        format!("mode {n:?} exceeds the basis cutoff {}", self.basis.cutoff),
                    );
                }
                check_mass(*mass, bad);
            }
            Initial::MultiPeak { mass, peaks } => {
                if peaks.is_empty() {
                    bad("peaks_empty", "multi_peak needs at least one peak".into());
                }
                if peaks.iter().any(|p| p.n.dim() != d || p.a.len() != d || p.b.len() != d) {
                    bad("initial_dimension_mismatch", format!("every peak needs n, a, b with {d} components"));
                }
                check_mass(*mass, bad);
            }
            Initial::GridFile(_) => {
                if cmd == Command::StandingWave {
                    bad(
                        "initial_unsupported",
                        "standing-wave needs hermite_mode or multi_peak initial data".into(),
                    );
                }
            }
        }
    }

    fn validate_stability(&self, bad: &mut impl FnMut(&str, String)) {
        if self.dimension != 1 {
            bad("stability_dimension", "stability experiments run in d = 1".into());
        }
        let c = self.stability_config();
        if let Err(e) = c.check() {
            let name = match e {
                trapwave::Error::KappaNonPositive(_) => "kappa_nonpositive",
                _ => "stability_hypothesis",
            };
            bad(name, e.to_string());
        }
        if c.samples < 2 {
            bad("samples_invalid", "stability needs at least 2 samples".into());
        }
        if !(c.periods > 0.0 && c.periods.is_finite()) {
            bad("periods_invalid", format!("periods must be positive, got {}", c.periods));
        }
        if c.sigma_cutoff <= c.n {
            bad(
                "cutoff_too_small",
                format!("sigma_cutoff {} must exceed n = {}", c.sigma_cutoff, c.n),
            );
        }
        if !(c.y_max > 0.0 && c.scan_step > 0.0) {
            bad("scan_invalid", "y_max and scan_step must be positive".into());
        }
        let b = self.stability.clone().unwrap_or_default();
        if b.deltas.is_empty() || b.deltas.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
            bad("delta_invalid", format!("deltas must be a non-empty list of values >= 0, got {:?}", b.deltas));
        }
        if let Some(trials) = &b.trials {
            if trials.is_empty() {
                bad("trials_empty", "trials, when given, must be non-empty".into());
            }
        }
    }

    fn validate_morse(&self, bad: &mut impl FnMut(&str, String)) {
        let Some(m) = &self.morse else {
            bad("morse_missing", "a `morse` block is required".into());
            return;
        };
        if m.n % 2 == 1 {
            bad("odd_mode", format!("mode index must be even, got {}", m.n));
        } else if m.n < 2 {
            bad("mode_too_small", format!("mode index must be at least 2, got {}", m.n));
        }
        if m.n + 2 > m.cutoff {
            bad(
                "cutoff_too_small",
                format!("cutoff {} must be at least n + 2 = {}", m.cutoff, m.n + 2),
            );
        }
    }
}
