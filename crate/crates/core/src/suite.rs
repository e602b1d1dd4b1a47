//! Runs the classical and quantum checks over catalog entries and assembles
//! the verification report.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{check_table_column, Catalog, CatalogEntry, CatalogError, Variant};
use crate::hopf::{
    check_casimir_z0, check_central, check_classical_limit, check_coassociativity, check_counit, check_first_order,
    check_generalized_cocommutativity, check_homomorphism, check_identity, check_limit_contraction, solve_antipode,
    HopfAlgebra,
};
use crate::liealg::{
    build_double, canonical_structures, check_ad_invariant, check_bialgebra_morphism, check_casimir,
    check_cocommutator, check_cocycle, check_double_jacobi, check_jacobi, check_omega_invariance,
    check_pairing_invariance, find_self_duality, schouten_bracket, DoubleAlgebra, LieBialgebra,
};
use crate::ncpoly::{admissibility_check, parse_bracket_key, ExprTree};
use crate::report::{CheckOutcome, Residual};
use crate::scalars::{GaussianRational as GR, ParamBinding};

pub const CLASSICAL_CHECKS: &[&str] = &[
    "table_column",
    "jacobi_g",
    "jacobi_dual",
    "cocycle",
    "build_double",
    "double_jacobi",
    "pairing_invariance",
    "casimir",
    "omega_invariance",
    "cybe",
    "modified_cybe",
    "cocommutator",
    "basis_change",
    "self_dual",
];

pub const QUANTUM_CHECKS: &[&str] = &[
    "admissibility",
    "coassociativity",
    "homomorphism",
    "classical_limit",
    "first_order",
    "generalized_cocommutativity",
    "counit",
    "antipode",
    "casimir_z0",
    "central",
    "sym_identity",
    "contraction",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantSelection {
    Printed,
    Corrected,
    Both,
}

impl VariantSelection {
    /// Variants to run for an entry; entries without errata run once.
    pub fn for_entry(self, e: &CatalogEntry) -> Vec<Variant> {
        match self {
            VariantSelection::Printed => vec![Variant::Printed],
            VariantSelection::Corrected => vec![Variant::Corrected],
            VariantSelection::Both if e.errata.is_empty() => vec![Variant::Printed],
            VariantSelection::Both => vec![Variant::Printed, Variant::Corrected],
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub order: u32,
    /// Overrides layered over the entry defaults; empty means the default set.
    pub bindings: Vec<ParamBinding>,
    pub variants: VariantSelection,
    /// Check names to run; `None` runs everything.
    pub checks: Option<BTreeSet<String>>,
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            order: 4,
            bindings: Vec::new(),
            variants: VariantSelection::Corrected,
            checks: None,
            jobs: 1,
        }
    }
}

impl RunConfig {
    fn wants(&self, check: &str) -> bool {
        self.checks.as_ref().is_none_or(|c| c.contains(check))
    }

    fn wants_quantum(&self) -> bool {
        QUANTUM_CHECKS.iter().any(|c| self.wants(c))
    }

    /// Bindings for one entry: the defaults, or each override completed from
    /// the defaults.
    pub fn bindings_for(&self, e: &CatalogEntry) -> Result<Vec<ParamBinding>, CatalogError> {
        let defaults = e.default_bindings()?;
        let mut out: Vec<ParamBinding> = Vec::new();
        if self.bindings.is_empty() {
            for b in defaults {
                let b = b.restricted_to(&e.parameters);
                e.check_binding(&b)?;
                out.push(b);
            }
        } else {
            for o in &self.bindings {
                for d in &defaults {
                    let b = o.completed_from(d).restricted_to(&e.parameters);
                    e.check_binding(&b)?;
                    if !out.contains(&b) {
                        out.push(b);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// One check at one (entry, variant, binding, N).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject: Option<String>,
    pub entry: String,
    pub variant: Variant,
    pub binding: String,
    #[serde(rename = "N")]
    pub order: Option<u32>,
    pub pass: bool,
    pub residuals: Vec<Residual>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_seconds: f64,
    pub per_entry_seconds: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub tool_version: String,
    pub catalog_version: String,
    pub order: u32,
    pub records: Vec<CheckRecord>,
    pub summary: Summary,
    pub timings: Timings,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| !r.pass)
    }

    pub fn records_for<'a>(&'a self, entry: &'a str) -> impl Iterator<Item = &'a CheckRecord> + 'a {
        self.records.iter().filter(move |r| r.entry == entry)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

fn summarize(records: &[CheckRecord]) -> Summary {
    let passed = records.iter().filter(|r| r.pass).count();
    Summary {
        total: records.len(),
        passed,
        failed: records.len() - passed,
    }
}

struct Recorder<'a> {
    cfg: &'a RunConfig,
    entry: String,
    variant: Variant,
    binding: String,
    records: Vec<CheckRecord>,
}

impl Recorder<'_> {
    fn push(&mut self, check: &str, subject: Option<String>, order: Option<u32>, outcome: CheckOutcome) {
        self.records.push(CheckRecord {
            check: check.to_string(),
            subject,
            entry: self.entry.clone(),
            variant: self.variant,
            binding: self.binding.clone(),
            order,
            pass: outcome.pass,
            residuals: outcome.residuals,
            notes: outcome.notes,
        });
    }

    fn classical(&mut self, check: &str, f: impl FnOnce() -> CheckOutcome) {
        if self.cfg.wants(check) {
            self.push(check, None, None, f());
        }
    }

    fn quantum(&mut self, check: &str, f: impl FnOnce() -> CheckOutcome) {
        if self.cfg.wants(check) {
            let n = self.cfg.order;
            self.push(check, None, Some(n), f());
        }
    }
}

struct Job<'a> {
    entry: &'a CatalogEntry,
    binding: ParamBinding,
    variant: Variant,
    first: bool,
}

/// Runs the selected checks on the given entries.
pub fn run(catalog: &Catalog, ids: &[String], cfg: &RunConfig) -> Result<VerificationReport, CatalogError> {
    let start = Instant::now();
    let mut jobs = Vec::new();
    for id in ids {
        let e = catalog.get(id)?;
        for v in cfg.variants.for_entry(e) {
            for (i, b) in cfg.bindings_for(e)?.into_iter().enumerate() {
                jobs.push(Job {
                    entry: e,
                    binding: b,
                    variant: v,
                    first: i == 0,
                });
            }
        }
    }
    let work = |job: &Job| {
        let t = Instant::now();
        let recs = run_job(catalog, job, cfg);
        (job.entry.id.clone(), recs, t.elapsed().as_secs_f64())
    };
    let results: Vec<(String, Vec<CheckRecord>, f64)> = if cfg.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| CatalogError::Load {
                file: "thread pool".into(),
                msg: e.to_string(),
            })?;
        pool.install(|| jobs.par_iter().map(work).collect())
    } else {
        jobs.iter().map(work).collect()
    };
    let mut records = Vec::new();
    let mut per_entry: BTreeMap<String, f64> = BTreeMap::new();
    for (id, recs, secs) in results {
        *per_entry.entry(id).or_default() += secs;
        records.extend(recs);
    }
    Ok(VerificationReport {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        catalog_version: catalog.version(),
        order: cfg.order,
        summary: summarize(&records),
        records,
        timings: Timings {
            total_seconds: start.elapsed().as_secs_f64(),
            per_entry_seconds: per_entry,
        },
    })
}

/// Candidate diagonal scalings for the self-duality search.
fn self_dual_scales(binding: &ParamBinding) -> Vec<GR> {
    let mut base = vec![GR::from_int(1), GR::from_int(2), GR::from_frac(1, 2)];
    for v in binding.values().values() {
        if *v != GR::from_int(0) {
            base.push(v.clone());
            if let Ok(inv) = v.inv() {
                base.push(inv);
            }
        }
    }
    let mut out: Vec<GR> = Vec::new();
    for b in base {
        for s in [b.clone(), -b] {
            if !out.contains(&s) {
                out.push(s);
            }
        }
    }
    out
}

fn self_dual_outcome(b: &LieBialgebra, binding: &ParamBinding) -> CheckOutcome {
    match find_self_duality(b, &self_dual_scales(binding)) {
        Some(m) => {
            let n = b.dim();
            let map: Vec<String> = (0..n)
                .map(|a| {
                    let image: Vec<String> = (0..n)
                        .filter(|&k| m[a][k] != GR::from_int(0))
                        .map(|k| format!("({})X{k}", m[a][k]))
                        .collect();
                    format!("x{a}↦{}", image.join("+"))
                })
                .collect();
            check_bialgebra_morphism(b, &b.dualize(), &m).with_note(format!("map: {}", map.join(", ")))
        }
        None => CheckOutcome::failed("no scaled signed permutation maps the bialgebra onto its dual"),
    }
}

fn run_job(catalog: &Catalog, job: &Job, cfg: &RunConfig) -> Vec<CheckRecord> {
    let e = job.entry;
    let mut rec = Recorder {
        cfg,
        entry: e.id.clone(),
        variant: job.variant,
        binding: job.binding.label(),
        records: Vec::new(),
    };
    let inst = match e.instantiate(&job.binding, job.variant) {
        Ok(i) => i,
        Err(err) => {
            rec.push("instantiate", None, None, CheckOutcome::failed(err.to_string()));
            return rec.records;
        }
    };
    let bialg = &inst.classical.bialgebra;
    let unchecked = DoubleAlgebra::from_bialgebra_unchecked(bialg);
    rec.classical("table_column", || check_table_column(&inst.classical, &unchecked));
    rec.classical("jacobi_g", || check_jacobi(&bialg.f, "x"));
    rec.classical("jacobi_dual", || check_jacobi(&bialg.c, "X"));
    rec.classical("cocycle", || check_cocycle(bialg));
    let double = match build_double(bialg) {
        Ok(d) => {
            rec.classical("build_double", CheckOutcome::passed);
            d
        }
        Err(err) => {
            rec.classical("build_double", || CheckOutcome::failed(err.to_string()));
            return rec.records;
        }
    };
    let cs = canonical_structures(&double);
    rec.classical("double_jacobi", || check_double_jacobi(double.algebra()));
    rec.classical("pairing_invariance", || check_pairing_invariance(&double));
    rec.classical("casimir", || check_casimir(&double));
    rec.classical("omega_invariance", || check_omega_invariance(&double));
    rec.classical("cybe", || {
        let s = schouten_bracket(double.algebra(), &cs.r);
        let residuals = s
            .terms()
            .map(|(idx, v)| {
                let term = idx.iter().map(|&i| double.label(i)).collect::<Vec<_>>().join("⊗");
                Residual::new("[[r,r]]", 0, term, v.clone())
            })
            .collect();
        CheckOutcome::from_residuals(residuals)
    });
    rec.classical("modified_cybe", || {
        check_ad_invariant(
            double.algebra(),
            &schouten_bracket(double.algebra(), &cs.r_skew),
            "[[r̃,r̃]]",
        )
    });
    rec.classical("cocommutator", || check_cocommutator(bialg, &double));
    if cfg.wants("basis_change") {
        for bc in &e.basis_changes {
            let outcome = match e.apply_basis_change(&bc.name, &double, &job.binding) {
                Ok(rep) => rep.pairing,
                Err(err) => CheckOutcome::failed(err.to_string()),
            };
            rec.push("basis_change", Some(bc.name.clone()), None, outcome);
        }
    }
    if job.first && cfg.wants("self_dual") {
        if let Some(claim) = &e.self_dual {
            let saved = std::mem::take(&mut rec.binding);
            let outcome = ParamBinding::parse_assignments(&claim.binding)
                .map_err(|err| err.to_string())
                .and_then(|b| {
                    let inst = e.instantiate(&b, job.variant).map_err(|err| err.to_string())?;
                    rec.binding = b.label();
                    Ok(self_dual_outcome(&inst.classical.bialgebra, &b))
                })
                .unwrap_or_else(CheckOutcome::failed);
            rec.push("self_dual", None, None, outcome);
            rec.binding = saved;
        }
    }

    let Some(spec) = &inst.deformation else {
        return rec.records;
    };
    if !cfg.wants_quantum() {
        return rec.records;
    }
    let n = cfg.order;
    let qdouble = match e.deformation_double(&double, &job.binding) {
        Ok(d) => d,
        Err(err) => {
            rec.push(
                "deformation_basis",
                None,
                Some(n),
                CheckOutcome::failed(err.to_string()),
            );
            return rec.records;
        }
    };
    rec.quantum("admissibility", || admissibility_check(spec, &job.binding, n));
    let h = match HopfAlgebra::new(spec, &job.binding, n) {
        Ok(h) => h,
        Err(err) => {
            rec.push("hopf_algebra", None, Some(n), CheckOutcome::failed(err.to_string()));
            return rec.records;
        }
    };
    rec.quantum("coassociativity", || check_coassociativity(&h));
    rec.quantum("homomorphism", || check_homomorphism(&h));
    rec.quantum("classical_limit", || check_classical_limit(&h, &qdouble));
    rec.quantum("first_order", || {
        let fo = check_first_order(&h, &qdouble);
        match fo.epsilon {
            Some(s) => fo.outcome.with_note(format!("ε = {s}")),
            None => fo.outcome,
        }
    });
    rec.quantum("generalized_cocommutativity", || check_generalized_cocommutativity(&h));
    rec.quantum("counit", || check_counit(&h));
    rec.quantum("antipode", || solve_antipode(&h).outcome);
    rec.quantum("casimir_z0", || check_casimir_z0(&h, &qdouble));
    if cfg.wants("central") {
        for c in &e.centrals {
            let outcome = match h.engine().parse_eval(&c.element) {
                Ok(p) => check_central(&h, &p, c.primitive),
                Err(err) => CheckOutcome::failed(err.to_string()),
            };
            rec.push("central", Some(c.element.clone()), Some(n), outcome);
        }
    }
    if cfg.wants("sym_identity") {
        for s in &e.sym_identities {
            let outcome = (|| -> Result<CheckOutcome, String> {
                let (a, b) = parse_bracket_key(&s.bracket, h.labels()).map_err(|err| err.to_string())?;
                let lhs = h.bracket(a, b).map_err(|err| err.to_string())?;
                let rhs = ExprTree::parse(&s.expr, h.labels()).map_err(|err| err.to_string())?;
                Ok(check_identity(&h, &lhs, &rhs, &s.bracket))
            })()
            .unwrap_or_else(CheckOutcome::failed);
            rec.push("sym_identity", Some(s.bracket.clone()), Some(n), outcome);
        }
    }
    if cfg.wants("contraction") {
        if let Some(c) = &e.contraction {
            let outcome = (|| -> Result<CheckOutcome, String> {
                let src = catalog.get(&c.source).map_err(|err| err.to_string())?;
                let spec_from = src
                    .deformation_spec(Variant::Corrected)
                    .map_err(|err| err.to_string())?
                    .ok_or("source entry has no deformation")?;
                let b = ParamBinding::parse_assignments(&c.binding).map_err(|err| err.to_string())?;
                b.validate().map_err(|err| err.to_string())?;
                Ok(check_limit_contraction(&spec_from, &b, &h))
            })()
            .unwrap_or_else(CheckOutcome::failed);
            rec.push(
                "contraction",
                Some(format!("{} at {}", c.source, c.binding)),
                Some(n),
                outcome,
            );
        }
    }
    rec.records
}

fn badge(pass: bool) -> &'static str {
    if pass {
        "✅"
    } else {
        "❌"
    }
}

/// Markdown rendering: one section per table, per-formula badges for every
/// quantized entry, and the errata with their forcing checks.
pub fn render_markdown(catalog: &Catalog, report: &VerificationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# ddq verification report\n");
    let _ = writeln!(
        s,
        "tool {} · catalog {} · N = {} · {} checks, {} passed, {} failed\n",
        report.tool_version,
        report.catalog_version,
        report.order,
        report.summary.total,
        report.summary.passed,
        report.summary.failed
    );
    for t in &catalog.tables {
        let _ = writeln!(s, "## {}: {}\n", t.table, t.title);
        for e in &t.entries {
            let recs: Vec<&CheckRecord> = report.records_for(&e.id).collect();
            if recs.is_empty() {
                continue;
            }
            let _ = writeln!(
                s,
                "### {} {} (class {}, double {})\n",
                e.id, e.pair, e.classification, e.double
            );
            let _ = writeln!(s, "| check | variant | binding | N | result |");
            let _ = writeln!(s, "|---|---|---|---|---|");
            for r in &recs {
                let name = match &r.subject {
                    Some(sub) => format!("{} ({sub})", r.check),
                    None => r.check.clone(),
                };
                let n = r.order.map_or("-".to_string(), |n| n.to_string());
                let binding = if r.binding.is_empty() { "-" } else { r.binding.as_str() };
                let _ = writeln!(s, "| {name} | {} | {binding} | {n} | {} |", r.variant, badge(r.pass));
            }
            s.push('\n');
            if let Some(d) = &e.deformation {
                let failing: BTreeSet<(Variant, &str)> = recs
                    .iter()
                    .filter(|r| r.order.is_some())
                    .flat_map(|r| r.residuals.iter().map(move |x| (r.variant, x.location.as_str())))
                    .collect();
                let variants: BTreeSet<Variant> = recs.iter().map(|r| r.variant).collect();
                let _ = writeln!(
                    s,
                    "| formula | {} |",
                    variants.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" | ")
                );
                let _ = writeln!(s, "|---|{}", "---|".repeat(variants.len()));
                let labels = e.deformation_labels();
                let mut formulas: Vec<String> = d.brackets.keys().cloned().collect();
                formulas.extend(labels.iter().map(|g| format!("Δ({g})")));
                for f in formulas {
                    let cells: Vec<&str> = variants
                        .iter()
                        .map(|v| badge(!failing.contains(&(*v, f.as_str()))))
                        .collect();
                    let _ = writeln!(s, "| `{f}` | {} |", cells.join(" | "));
                }
                s.push('\n');
            }
        }
    }
    let _ = writeln!(s, "## Errata\n");
    for e in catalog.entries() {
        for er in &e.errata {
            let forced = |v: Variant| {
                report
                    .records_for(&e.id)
                    .filter(|r| r.check == er.check && r.variant == v)
                    .map(|r| r.pass)
                    .reduce(|a, b| a && b)
            };
            let status = |x: Option<bool>| x.map_or("not run", |p| if p { "passes" } else { "fails" });
            let _ = writeln!(s, "### {} {}\n", e.id, er.key);
            let _ = writeln!(s, "- printed: `{}`", er.printed.as_deref().unwrap_or("(absent)"));
            let _ = writeln!(s, "- corrected: `{}`", er.corrected);
            let _ = writeln!(
                s,
                "- forcing check: `{}` (printed {}, corrected {})",
                er.check,
                status(forced(Variant::Printed)),
                status(forced(Variant::Corrected))
            );
            let _ = writeln!(s, "- {}\n", er.note);
        }
    }
    s
}
