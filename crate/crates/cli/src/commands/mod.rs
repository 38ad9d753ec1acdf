//! One module per subcommand. Each returns an [`Outcome`] or a [`Failure`].

pub mod basis_check;
pub mod initial;
pub mod morse;
pub mod propagate;
pub mod stability;
pub mod standing;

use crate::report::{Entry, Table};

pub struct Outcome {
    pub results: serde_json::Value,
    pub diagnostics: Vec<Entry>,
    pub table: Option<Table>,
}
