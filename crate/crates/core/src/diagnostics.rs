//! Named numerical diagnostics attached to results.
//!
//! A diagnostic carries a measured value and the threshold it is held to.
//! Producers never fail on a diagnostic; callers decide whether a flagged
//! result is acceptable.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
}

impl Diagnostic {
    pub fn new(name: &'static str, value: f64, threshold: f64) -> Self {
        Self {
            name,
            value,
            threshold,
        }
    }

    pub fn flagged(&self) -> bool {
        !(self.value <= self.threshold)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics(pub Vec<Diagnostic>);

impl Diagnostics {
    pub fn push(&mut self, d: Diagnostic) {
        self.0.push(d);
    }

    pub fn extend(&mut self, other: Diagnostics) {
        self.0.extend(other.0);
    }

    pub fn flagged(&self) -> impl Iterator<Item = &Diagnostic> {
        self.0.iter().filter(|d| d.flagged())
    }

    pub fn any_flagged(&self) -> bool {
        self.flagged().next().is_some()
    }

    pub fn get(&self, name: &str) -> Option<&Diagnostic> {
        self.0.iter().find(|d| d.name == name)
    }
}
