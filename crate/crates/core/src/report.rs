//! Check outcomes and residual records shared by every verification layer.

use serde::{Deserialize, Serialize};

use crate::scalars::GaussianRational;

/// Residual lists are capped so a badly broken spec cannot produce
/// gigabyte reports; the dropped count is noted.
pub const MAX_RESIDUALS: usize = 64;

/// One nonzero coefficient left over by a check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Residual {
    pub location: String,
    pub z_order: u32,
    pub term: String,
    pub coefficient: GaussianRational,
}

impl Residual {
    pub fn new(
        location: impl Into<String>,
        z_order: u32,
        term: impl Into<String>,
        coefficient: GaussianRational,
    ) -> Self {
        Residual {
            location: location.into(),
            z_order,
            term: term.into(),
            coefficient,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub pass: bool,
    pub residuals: Vec<Residual>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl CheckOutcome {
    pub fn passed() -> Self {
        CheckOutcome {
            pass: true,
            ..Default::default()
        }
    }

    pub fn failed(note: impl Into<String>) -> Self {
        CheckOutcome {
            pass: false,
            residuals: Vec::new(),
            notes: vec![note.into()],
        }
    }

    /// Passes iff `residuals` is empty.
    pub fn from_residuals(mut residuals: Vec<Residual>) -> Self {
        let mut notes = Vec::new();
        if residuals.len() > MAX_RESIDUALS {
            notes.push(format!(
                "{} further residual terms omitted",
                residuals.len() - MAX_RESIDUALS
            ));
            residuals.truncate(MAX_RESIDUALS);
        }
        CheckOutcome {
            pass: residuals.is_empty(),
            residuals,
            notes,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    /// Conjunction; residuals and notes are concatenated.
    pub fn and(mut self, other: CheckOutcome) -> Self {
        self.pass &= other.pass;
        self.residuals.extend(other.residuals);
        self.notes.extend(other.notes);
        if self.residuals.len() > MAX_RESIDUALS {
            let extra = self.residuals.len() - MAX_RESIDUALS;
            self.residuals.truncate(MAX_RESIDUALS);
            self.notes.push(format!("{extra} further residual terms omitted"));
        }
        self
    }

    /// Distinct residual locations in first-seen order.
    pub fn locations(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in &self.residuals {
            if !out.contains(&r.location.as_str()) {
                out.push(&r.location);
            }
        }
        out
    }
}
