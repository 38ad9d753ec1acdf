//! Standing waves, orbital-stability experiments and the Morse-index
//! analysis of excited states.

pub mod morse;
pub mod stability;
pub mod standing;

pub use morse::{assemble_hessian, dpp_sign, Case, HessianReport, Inertia, Subspace};
pub use stability::{modulated_distance, stability_trial, Perturbation, StabilityConfig, StabilityReport};
pub use standing::{multi_peak, single_peak, MultiPeak, PeakSpec, SinglePeak};
