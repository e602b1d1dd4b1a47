//! The classified doubles and their quantizations, loaded from versioned JSON
//! tables with printed and corrected variants.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::liealg::{
    build_double, default_labels, linear_form, BasisChange, BasisChangeError, BasisChangeReport, DoubleAlgebra,
    DoubleRejection, LieBialgebra, StructureTensor,
};
use crate::ncpoly::{parse_bracket_key, DeformationSpec, SpecError};
use crate::report::{CheckOutcome, Residual};
use crate::scalars::{GaussianRational as GR, Param, ParamBinding, ScalarError};

pub const CATALOG_ENV: &str = "DDQ_CATALOG_DIR";

const TABLE_FILES: [&str; 5] = [
    "table1.json",
    "table2.json",
    "table3.json",
    "table4.json",
    "table5.json",
];

const EMBEDDED: [&str; 5] = [
    include_str!("../catalog/table1.json"),
    include_str!("../catalog/table2.json"),
    include_str!("../catalog/table3.json"),
    include_str!("../catalog/table4.json"),
    include_str!("../catalog/table5.json"),
];

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("unknown catalog entry '{0}'")]
    UnknownEntry(String),
    #[error("{file}: {msg}")]
    Load { file: String, msg: String },
    #[error("{id}: {msg}")]
    Invalid { id: String, msg: String },
    #[error("{id}: parameter {param} must be bound")]
    Unbound { id: String, param: Param },
    #[error("{id}: parameter {param} must be nonzero")]
    ZeroParam { id: String, param: Param },
    #[error("{id}: {source}")]
    Binding { id: String, source: ScalarError },
    #[error("{id}: {source}")]
    Spec { id: String, source: Box<SpecError> },
    #[error("{id}: {source}")]
    Basis { id: String, source: BasisChangeError },
    #[error("{id}: {source}")]
    Double { id: String, source: Box<DoubleRejection> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Printed,
    Corrected,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Printed => "printed",
            Variant::Corrected => "corrected",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErratumKind {
    /// A classical table cell.
    Table,
    Bracket,
    Coproduct,
}

/// A place where the printed form is replaced in the corrected variant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Erratum {
    pub kind: ErratumKind,
    /// `[a,b]` for brackets and table cells, the generator label for coproducts.
    pub key: String,
    /// `None` when the formula is missing from the print.
    pub printed: Option<String>,
    pub corrected: String,
    /// Name of the check that fails on the printed form.
    pub check: String,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeformationData {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub brackets: BTreeMap<String, String>,
    pub coproducts: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CentralElement {
    pub element: String,
    pub primitive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymIdentity {
    pub bracket: String,
    pub expr: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisChangeData {
    pub name: String,
    pub labels: Vec<String>,
    pub rows: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelfDualClaim {
    /// Binding at which the bialgebra is isomorphic to its dual.
    pub binding: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractionData {
    pub source: String,
    pub binding: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogEntry {
    pub id: String,
    pub pair: String,
    pub double: String,
    pub classification: String,
    pub dim: usize,
    pub parameters: Vec<Param>,
    #[serde(default)]
    pub nonzero: Vec<Param>,
    /// Default bindings as assignment strings; the suite runs all of them.
    pub bindings: Vec<String>,
    /// The printed table column, `[a,b] -> linear form`.
    pub classical: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deformation: Option<DeformationData>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub centrals: Vec<CentralElement>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sym_identities: Vec<SymIdentity>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub basis_changes: Vec<BasisChangeData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub self_dual: Option<SelfDualClaim>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contraction: Option<ContractionData>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errata: Vec<Erratum>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogTable {
    pub table: String,
    pub title: String,
    pub version: u32,
    pub entries: Vec<CatalogEntry>,
}

/// Classical data of one entry at one binding.
#[derive(Debug, Clone)]
pub struct Classical {
    pub bialgebra: LieBialgebra,
    /// Every printed cell as a coefficient vector over x^0..X_{n-1}.
    pub column: Vec<((usize, usize), Vec<GR>)>,
}

/// A fully bound entry.
#[derive(Debug, Clone)]
pub struct Instance {
    pub id: String,
    pub binding: ParamBinding,
    pub variant: Variant,
    pub classical: Classical,
    pub deformation: Option<DeformationSpec>,
}

impl CatalogEntry {
    pub fn labels(&self) -> Vec<String> {
        default_labels(self.dim, "x", "X")
    }

    pub fn has_deformation(&self) -> bool {
        self.deformation.is_some()
    }

    pub fn table(&self) -> &str {
        self.id.split('.').next().unwrap_or("")
    }

    fn invalid(&self, msg: impl Into<String>) -> CatalogError {
        CatalogError::Invalid {
            id: self.id.clone(),
            msg: msg.into(),
        }
    }

    pub fn default_bindings(&self) -> Result<Vec<ParamBinding>, CatalogError> {
        self.bindings
            .iter()
            .map(|s| {
                ParamBinding::parse_assignments(s).map_err(|source| CatalogError::Binding {
                    id: self.id.clone(),
                    source,
                })
            })
            .collect()
    }

    /// Checks that every parameter is bound, nonzero where required, and that
    /// ω and declared radicals are consistent.
    pub fn check_binding(&self, binding: &ParamBinding) -> Result<(), CatalogError> {
        for p in &self.parameters {
            if binding.get(*p).is_none() {
                return Err(CatalogError::Unbound {
                    id: self.id.clone(),
                    param: *p,
                });
            }
        }
        for p in &self.nonzero {
            if binding.get(*p).is_some_and(Zero::is_zero) {
                return Err(CatalogError::ZeroParam {
                    id: self.id.clone(),
                    param: *p,
                });
            }
        }
        binding.validate().map_err(|source| CatalogError::Binding {
            id: self.id.clone(),
            source,
        })
    }

    /// Completes `overrides` from the first default binding.
    pub fn resolve_binding(&self, overrides: &ParamBinding) -> Result<ParamBinding, CatalogError> {
        let defaults = self.default_bindings()?;
        let base = defaults.first().cloned().unwrap_or_default();
        let b = overrides.completed_from(&base).restricted_to(&self.parameters);
        self.check_binding(&b)?;
        Ok(b)
    }

    pub fn erratum(&self, kind: ErratumKind, key: &str) -> Option<&Erratum> {
        self.errata.iter().find(|e| e.kind == kind && e.key == key)
    }

    /// The printed column with table errata applied for the corrected variant.
    pub fn column(&self, variant: Variant) -> BTreeMap<String, String> {
        let mut col = self.classical.clone();
        if variant == Variant::Corrected {
            for e in self.errata.iter().filter(|e| e.kind == ErratumKind::Table) {
                col.insert(e.key.clone(), e.corrected.clone());
            }
        }
        col
    }

    pub fn classical(&self, binding: &ParamBinding, variant: Variant) -> Result<Classical, CatalogError> {
        let n = self.dim;
        let labels = self.labels();
        let mut f = StructureTensor::zero(n);
        let mut c = StructureTensor::zero(n);
        let mut column = Vec::new();
        for (key, rhs) in self.column(variant) {
            let (a, b) = parse_bracket_key(&key, &labels).map_err(|source| CatalogError::Spec {
                id: self.id.clone(),
                source: Box::new(source),
            })?;
            let v = if rhs.trim() == "0" {
                vec![GR::zero(); 2 * n]
            } else {
                let row = linear_form(&rhs, &labels, binding).map_err(|source| CatalogError::Basis {
                    id: self.id.clone(),
                    source,
                })?;
                if row.radical != num_traits::One::one() {
                    return Err(self.invalid(format!("{key}: irrational coefficient")));
                }
                row.body
            };
            let (lo, hi, sign) = if a < b {
                (a, b, GR::from_int(1))
            } else {
                (b, a, GR::from_int(-1))
            };
            let v: Vec<GR> = v.iter().map(|x| x * &sign).collect();
            if hi < n {
                if v[n..].iter().any(|x| !x.is_zero()) {
                    return Err(self.invalid(format!("{key} leaves the x-sector")));
                }
                for (k, x) in v[..n].iter().enumerate() {
                    f.set_skew(lo, hi, k, x.clone());
                }
            } else if lo >= n {
                if v[..n].iter().any(|x| !x.is_zero()) {
                    return Err(self.invalid(format!("{key} leaves the X-sector")));
                }
                for (k, x) in v[n..].iter().enumerate() {
                    c.set_skew(lo - n, hi - n, k, x.clone());
                }
            }
            column.push(((lo, hi), v));
        }
        let expected = 2 * n * (2 * n - 1) / 2;
        if column.len() != expected {
            return Err(self.invalid(format!("column has {} cells, expected {expected}", column.len())));
        }
        Ok(Classical {
            bialgebra: LieBialgebra::new(f, c),
            column,
        })
    }

    pub fn deformation_labels(&self) -> Vec<String> {
        self.deformation
            .as_ref()
            .and_then(|d| d.labels.clone())
            .unwrap_or_else(|| self.labels())
    }

    pub fn deformation_spec(&self, variant: Variant) -> Result<Option<DeformationSpec>, CatalogError> {
        let Some(d) = &self.deformation else {
            return Ok(None);
        };
        let err = |source| CatalogError::Spec {
            id: self.id.clone(),
            source: Box::new(source),
        };
        let mut brackets = d.brackets.clone();
        let mut coproducts = d.coproducts.clone();
        if variant == Variant::Corrected {
            for e in &self.errata {
                match e.kind {
                    ErratumKind::Bracket => {
                        brackets.insert(e.key.clone(), e.corrected.clone());
                    }
                    ErratumKind::Coproduct => {
                        coproducts.insert(e.key.clone(), e.corrected.clone());
                    }
                    ErratumKind::Table => {}
                }
            }
        }
        let mut spec = DeformationSpec::new(self.deformation_labels());
        for (k, v) in &brackets {
            spec.set_bracket(k, v).map_err(err)?;
        }
        for (g, v) in &coproducts {
            spec.set_coproduct(g, v).map_err(err)?;
        }
        Ok(Some(spec))
    }

    pub fn basis_change(&self, name: &str) -> Option<&BasisChangeData> {
        self.basis_changes.iter().find(|b| b.name == name)
    }

    /// Applies a named basis change to the classical double.
    pub fn apply_basis_change(
        &self,
        name: &str,
        double: &DoubleAlgebra,
        binding: &ParamBinding,
    ) -> Result<BasisChangeReport, CatalogError> {
        let data = self
            .basis_change(name)
            .ok_or_else(|| self.invalid(format!("no basis change '{name}'")))?;
        let err = |source| CatalogError::Basis {
            id: self.id.clone(),
            source,
        };
        let bc = BasisChange::parse(&data.labels, &data.rows, double.algebra(), binding).map_err(err)?;
        bc.apply(double).map_err(err)
    }

    /// The classical double in the basis the deformation is written in.
    pub fn deformation_double(
        &self,
        double: &DoubleAlgebra,
        binding: &ParamBinding,
    ) -> Result<DoubleAlgebra, CatalogError> {
        match self.deformation.as_ref().and_then(|d| d.basis.as_deref()) {
            None => Ok(double.clone()),
            Some(name) => {
                let rep = self.apply_basis_change(name, double, binding)?;
                if !rep.pairing.pass {
                    return Err(self.invalid(format!("basis '{name}' does not preserve the pairing")));
                }
                rep.transformed.map_err(|source| CatalogError::Basis {
                    id: self.id.clone(),
                    source,
                })
            }
        }
    }

    /// Consistency of the stored data that does not depend on a binding.
    pub fn validate(&self) -> Result<(), CatalogError> {
        if !(self.dim == 2 || self.dim == 3) {
            return Err(self.invalid("dimension must be 2 or 3"));
        }
        if self.bindings.is_empty() {
            return Err(self.invalid("no default binding"));
        }
        for p in &self.nonzero {
            if !self.parameters.contains(p) {
                return Err(self.invalid(format!("nonzero constraint on undeclared {p}")));
            }
        }
        for b in self.default_bindings()? {
            self.check_binding(&b)?;
            for v in [Variant::Printed, Variant::Corrected] {
                self.classical(&b, v)?;
            }
        }
        let keys: BTreeSet<&str> = self.errata.iter().map(|e| e.key.as_str()).collect();
        if keys.len() != self.errata.len() {
            return Err(self.invalid("duplicate erratum key"));
        }
        for e in &self.errata {
            if e.printed.as_deref() == Some(e.corrected.as_str()) {
                return Err(self.invalid(format!("erratum {} does not change anything", e.key)));
            }
            if e.kind != ErratumKind::Table && self.deformation.is_none() {
                return Err(self.invalid("quantum erratum without a deformation"));
            }
        }
        for v in [Variant::Printed, Variant::Corrected] {
            self.deformation_spec(v)?;
        }
        Ok(())
    }

    pub fn instantiate(&self, binding: &ParamBinding, variant: Variant) -> Result<Instance, CatalogError> {
        self.check_binding(binding)?;
        Ok(Instance {
            id: self.id.clone(),
            binding: binding.clone(),
            variant,
            classical: self.classical(binding, variant)?,
            deformation: self.deformation_spec(variant)?,
        })
    }
}

impl Instance {
    pub fn double(&self) -> Result<DoubleAlgebra, CatalogError> {
        build_double(&self.classical.bialgebra).map_err(|source| CatalogError::Double {
            id: self.id.clone(),
            source: Box::new(source),
        })
    }
}

/// Every printed cell must agree with the crossed-bracket formula applied to
/// the two sector tensors.
pub fn check_table_column(classical: &Classical, double: &DoubleAlgebra) -> CheckOutcome {
    let mut residuals = Vec::new();
    for ((a, b), printed) in &classical.column {
        let got = double.algebra().bracket_dense(*a, *b);
        for (k, (p, g)) in printed.iter().zip(&got).enumerate() {
            if p != g {
                residuals.push(Residual::new(
                    format!("[{},{}]", double.label(*a), double.label(*b)),
                    0,
                    double.label(k).to_string(),
                    p - g,
                ));
            }
        }
    }
    CheckOutcome::from_residuals(residuals)
}

#[derive(Debug, Clone)]
pub struct Catalog {
    pub tables: Vec<CatalogTable>,
}

impl Catalog {
    pub fn embedded() -> Result<Self, CatalogError> {
        let sources: Vec<(String, String)> = TABLE_FILES
            .iter()
            .zip(EMBEDDED)
            .map(|(f, s)| (f.to_string(), s.to_string()))
            .collect();
        Self::from_sources(&sources)
    }

    /// Reads `table1.json` … `table5.json` from a directory.
    pub fn from_dir(dir: &Path) -> Result<Self, CatalogError> {
        let mut sources = Vec::new();
        for f in TABLE_FILES {
            let path = dir.join(f);
            let text = std::fs::read_to_string(&path).map_err(|e| CatalogError::Load {
                file: path.display().to_string(),
                msg: e.to_string(),
            })?;
            sources.push((path.display().to_string(), text));
        }
        Self::from_sources(&sources)
    }

    /// Embedded tables unless `DDQ_CATALOG_DIR` points elsewhere.
    pub fn load() -> Result<Self, CatalogError> {
        match std::env::var_os(CATALOG_ENV) {
            Some(dir) if !dir.is_empty() => Self::from_dir(Path::new(&dir)),
            _ => Self::embedded(),
        }
    }

    pub fn from_sources(sources: &[(String, String)]) -> Result<Self, CatalogError> {
        let mut tables = Vec::new();
        for (file, text) in sources {
            let t: CatalogTable = serde_json::from_str(text).map_err(|e| CatalogError::Load {
                file: file.clone(),
                msg: e.to_string(),
            })?;
            tables.push(t);
        }
        let cat = Catalog { tables };
        let mut seen = BTreeSet::new();
        for e in cat.entries() {
            if !seen.insert(e.id.clone()) {
                return Err(CatalogError::Invalid {
                    id: e.id.clone(),
                    msg: "duplicate id".into(),
                });
            }
            e.validate()?;
        }
        Ok(cat)
    }

    pub fn version(&self) -> String {
        self.tables
            .iter()
            .map(|t| format!("{}v{}", t.table, t.version))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn entries(&self) -> impl Iterator<Item = &CatalogEntry> {
        self.tables.iter().flat_map(|t| t.entries.iter())
    }

    pub fn get(&self, id: &str) -> Result<&CatalogEntry, CatalogError> {
        self.entries()
            .find(|e| e.id == id)
            .ok_or_else(|| CatalogError::UnknownEntry(id.to_string()))
    }

    pub fn instantiate(&self, id: &str, binding: &ParamBinding, variant: Variant) -> Result<Instance, CatalogError> {
        let e = self.get(id)?;
        let b = e.resolve_binding(binding)?;
        e.instantiate(&b, variant)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::check_pairing_invariance;

    fn cat() -> Catalog {
        Catalog::embedded().unwrap()
    }

    #[test]
    fn counts() {
        let c = cat();
        assert_eq!(c.entries().count(), 20);
        assert_eq!(c.entries().filter(|e| e.has_deformation()).count(), 17);
        let per: Vec<usize> = c.tables.iter().map(|t| t.entries.len()).collect();
        assert_eq!(per, vec![2, 6, 3, 5, 4]);
        let e = c.get("T1.std").unwrap();
        assert_eq!((e.dim, e.has_deformation()), (2, true));
    }

    #[test]
    fn t29_at_lambda_one() {
        let c = cat();
        let b = ParamBinding::parse_assignments("lambda=1").unwrap();
        let inst = c.instantiate("T2.9", &b, Variant::Printed).unwrap();
        let d = inst.double().unwrap();
        // [X0,X1] = X2 and [x1,X2] = x0
        assert_eq!(d.bracket(3, 4), &[(5, GR::from_int(1))]);
        assert_eq!(d.bracket(1, 5), &[(0, GR::from_int(1))]);
    }

    #[test]
    fn t517_heisenberg_sectors() {
        let c = cat();
        let b = ParamBinding::parse_assignments("omega=1").unwrap();
        let d = c.instantiate("T5.17", &b, Variant::Printed).unwrap().double().unwrap();
        assert_eq!(d.bracket(1, 2), &[(0, GR::from_int(1))]);
        assert_eq!(d.bracket(3, 4), &[(5, GR::from_int(1))]);
        assert!(check_pairing_invariance(&d).pass);
    }

    #[test]
    fn t210_variants_differ_only_in_delta_x1() {
        let e = cat().get("T2.10").unwrap().clone();
        let p = e.deformation_spec(Variant::Printed).unwrap().unwrap();
        let q = e.deformation_spec(Variant::Corrected).unwrap().unwrap();
        assert_eq!(p.brackets, q.brackets);
        let differ: Vec<usize> = (0..6).filter(|g| p.coproducts.get(g) != q.coproducts.get(g)).collect();
        assert_eq!(differ, vec![1]);
    }

    #[test]
    fn inadmissible_bindings() {
        let c = cat();
        let zero = ParamBinding::parse_assignments("lambda=0").unwrap();
        assert!(matches!(
            c.instantiate("T1.gl2", &zero, Variant::Printed),
            Err(CatalogError::ZeroParam { .. })
        ));
        let bad = ParamBinding::parse_assignments("omega=2").unwrap();
        assert!(matches!(
            c.instantiate("T5.17", &bad, Variant::Printed),
            Err(CatalogError::Binding { .. })
        ));
        assert!(matches!(c.get("T9.9"), Err(CatalogError::UnknownEntry(_))));
    }

    #[test]
    fn tables_round_trip() {
        for t in &cat().tables {
            let s = serde_json::to_string(t).unwrap();
            let back: CatalogTable = serde_json::from_str(&s).unwrap();
            assert_eq!(&back, t);
        }
    }
}
