//! Spectral laboratory for harmonically trapped Schrödinger equations with
//! the nonlocal nonlinearity `(|x|² ∗ |u|²) u`.
//!
//! Time convention throughout: `2i u_t = -Δu + V u`.

pub mod diagnostics;
pub mod error;
pub mod galilean;
pub mod grid;
pub mod hermite;
pub mod observables;
pub mod oracle;
pub mod propagator;
pub mod quadrature;
pub mod tensor;
pub mod wave_lab;

pub use diagnostics::{Diagnostic, Diagnostics};
pub use error::{Error, Result};
pub use grid::{GridSpec, GridState};
pub use hermite::{BasisSpec, CoeffState, MultiIndex};
