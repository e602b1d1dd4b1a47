use std::collections::BTreeMap;

use super::expr::{ExprError, ExprTree, Labeled};
use crate::scalars::ScalarExpr;

/// Deformed brackets and coproducts of one quantum algebra, as expression trees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeformationSpec {
    pub labels: Vec<String>,
    /// `[a,b]` with `a < b`.
    pub brackets: BTreeMap<(usize, usize), ExprTree>,
    /// Generators without an entry are primitive.
    pub coproducts: BTreeMap<usize, ExprTree>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpecError {
    #[error("bad bracket key '{0}' (expected [a,b] with distinct generators)")]
    BadKey(String),
    #[error("unknown generator '{0}'")]
    UnknownGenerator(String),
    #[error("{location}: {source}")]
    Expr { location: String, source: ExprError },
    #[error("{0} given twice")]
    Duplicate(String),
}

/// Parses `[a,b]` into generator indices.
pub fn parse_bracket_key(key: &str, labels: &[String]) -> Result<(usize, usize), SpecError> {
    let inner = key
        .trim()
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| SpecError::BadKey(key.to_string()))?;
    let (a, b) = inner
        .split_once(',')
        .ok_or_else(|| SpecError::BadKey(key.to_string()))?;
    let find = |s: &str| {
        labels
            .iter()
            .position(|l| l == s.trim())
            .ok_or_else(|| SpecError::UnknownGenerator(s.trim().to_string()))
    };
    let (a, b) = (find(a)?, find(b)?);
    if a == b {
        return Err(SpecError::BadKey(key.to_string()));
    }
    Ok((a, b))
}

impl DeformationSpec {
    pub fn new(labels: Vec<String>) -> Self {
        DeformationSpec {
            labels,
            brackets: BTreeMap::new(),
            coproducts: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn bracket_location(&self, a: usize, b: usize) -> String {
        format!("[{},{}]", self.labels[a], self.labels[b])
    }

    pub fn coproduct_location(&self, g: usize) -> String {
        format!("Δ({})", self.labels[g])
    }

    /// Adds `[a,b] = rhs`; a reversed key stores the negated tree.
    pub fn set_bracket(&mut self, key: &str, rhs: &str) -> Result<(), SpecError> {
        let (a, b) = parse_bracket_key(key, &self.labels)?;
        let tree = ExprTree::parse(rhs, &self.labels).map_err(|source| SpecError::Expr {
            location: key.to_string(),
            source,
        })?;
        let (k, tree) = if a < b {
            ((a, b), tree)
        } else {
            (
                (b, a),
                ExprTree::Product(vec![ExprTree::Scalar(ScalarExpr::int(-1)), tree]),
            )
        };
        if self.brackets.insert(k, tree).is_some() {
            return Err(SpecError::Duplicate(key.to_string()));
        }
        Ok(())
    }

    pub fn set_coproduct(&mut self, generator: &str, rhs: &str) -> Result<(), SpecError> {
        let g = self
            .labels
            .iter()
            .position(|l| l == generator.trim())
            .ok_or_else(|| SpecError::UnknownGenerator(generator.to_string()))?;
        let tree = ExprTree::parse(rhs, &self.labels).map_err(|source| SpecError::Expr {
            location: format!("Δ({generator})"),
            source,
        })?;
        if self.coproducts.insert(g, tree).is_some() {
            return Err(SpecError::Duplicate(format!("Δ({generator})")));
        }
        Ok(())
    }

    pub fn format_tree(&self, t: &ExprTree) -> String {
        Labeled(t, &self.labels).to_string()
    }
}
