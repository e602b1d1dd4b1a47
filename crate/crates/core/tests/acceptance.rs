//! End-to-end acceptance run over the embedded catalog.
//!
//! One test per criterion; each prints a `PASS`/`FAIL` line with details.

use std::collections::BTreeSet;
use std::time::Instant;

use ddq_core::catalog::{Catalog, CatalogEntry, Variant};
use ddq_core::ncpoly::{Engine, NCPoly};
use ddq_core::scalars::ParamBinding;
use ddq_core::suite::{self, CheckRecord, RunConfig, VariantSelection, VerificationReport};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

fn catalog() -> Catalog {
    Catalog::embedded().expect("embedded catalog loads")
}

fn config(order: u32, variants: VariantSelection, checks: &[&str]) -> RunConfig {
    RunConfig {
        order,
        variants,
        checks: Some(checks.iter().map(|c| c.to_string()).collect()),
        ..RunConfig::default()
    }
}

fn run(cat: &Catalog, ids: &[String], cfg: &RunConfig) -> Result<VerificationReport, String> {
    suite::run(cat, ids, cfg).map_err(|e| e.to_string())
}

fn all_ids(cat: &Catalog) -> Vec<String> {
    cat.entries().map(|e| e.id.clone()).collect()
}

fn quantized_ids(cat: &Catalog) -> Vec<String> {
    cat.entries()
        .filter(|e| e.has_deformation())
        .map(|e| e.id.clone())
        .collect()
}

fn describe(r: &CheckRecord) -> String {
    let locs: BTreeSet<&str> = r.residuals.iter().map(|x| x.location.as_str()).collect();
    format!(
        "{} {} [{}] {}: {:?} {:?}",
        r.entry, r.check, r.variant, r.binding, locs, r.notes
    )
}

fn require_clean(report: &VerificationReport) -> Result<(), String> {
    match report.failures().next() {
        None => Ok(()),
        Some(r) => Err(format!(
            "{} failing records, first: {}",
            report.summary.failed,
            describe(r)
        )),
    }
}

/// Every check ran for every id under two bindings, or under the single
/// binding of a parameter-free entry.
fn require_coverage(cat: &Catalog, report: &VerificationReport, ids: &[String], checks: &[&str]) -> Result<(), String> {
    for id in ids {
        let e = cat.get(id).map_err(|e| e.to_string())?;
        let wanted = if e.parameters.is_empty() { 1 } else { 2 };
        for c in checks {
            let bindings: BTreeSet<&str> = report
                .records_for(id)
                .filter(|r| r.check == *c)
                .map(|r| r.binding.as_str())
                .collect();
            if bindings.len() < wanted {
                return Err(format!("{id}: {c} ran under {} bindings", bindings.len()));
            }
        }
    }
    Ok(())
}

fn classical_suite(cat: &Catalog) -> Outcome {
    let checks = [
        "jacobi_g",
        "jacobi_dual",
        "cocycle",
        "build_double",
        "double_jacobi",
        "pairing_invariance",
        "casimir",
        "omega_invariance",
        "cybe",
    ];
    let ids = all_ids(cat);
    if ids.len() != 20 {
        return Err(format!("catalog has {} entries", ids.len()));
    }
    let t = Instant::now();
    let report = run(cat, &ids, &config(4, VariantSelection::Corrected, &checks))?;
    let secs = t.elapsed().as_secs_f64();
    require_clean(&report)?;
    require_coverage(cat, &report, &ids, &checks)?;
    if secs >= 5.0 {
        return Err(format!("classical suite took {secs:.2}s"));
    }
    Ok(format!(
        "{} records over 20 entries in {secs:.2}s",
        report.summary.total
    ))
}

fn cocommutator_from_r(cat: &Catalog) -> Outcome {
    let ids = all_ids(cat);
    let report = run(cat, &ids, &config(4, VariantSelection::Corrected, &["cocommutator"]))?;
    require_clean(&report)?;
    require_coverage(cat, &report, &ids, &["cocommutator"])?;
    Ok(format!("{} doubles", report.summary.total))
}

const QUANTUM: [&str; 8] = [
    "admissibility",
    "coassociativity",
    "homomorphism",
    "classical_limit",
    "first_order",
    "generalized_cocommutativity",
    "counit",
    "antipode",
];

fn quantum_suite(cat: &Catalog) -> Outcome {
    let ids = quantized_ids(cat);
    if ids.len() != 17 {
        return Err(format!("{} quantized entries", ids.len()));
    }
    let t = Instant::now();
    let report = run(cat, &ids, &config(4, VariantSelection::Corrected, &QUANTUM))?;
    require_clean(&report)?;
    require_coverage(cat, &report, &ids, &QUANTUM)?;
    for r in report.records.iter().filter(|r| r.check == "first_order") {
        if r.notes.iter().filter(|n| n.starts_with("ε =")).count() != 1 {
            return Err(format!("{}: no single global ε reported", describe(r)));
        }
    }
    let two_d: Vec<String> = cat.entries().filter(|e| e.dim == 2).map(|e| e.id.clone()).collect();
    let deep = run(cat, &two_d, &config(6, VariantSelection::Corrected, &QUANTUM))?;
    require_clean(&deep)?;
    require_coverage(cat, &deep, &two_d, &QUANTUM)?;
    let secs = t.elapsed().as_secs_f64();
    if secs > 600.0 {
        return Err(format!("quantum suite took {secs:.1}s"));
    }
    Ok(format!(
        "{} records at N=4, {} at N=6 for {:?}, {secs:.2}s",
        report.summary.total, deep.summary.total, two_d
    ))
}

fn central_elements(cat: &Catalog) -> Outcome {
    let ids = vec!["T1.std".to_string(), "T1.gl2".to_string()];
    let mut cfg = config(4, VariantSelection::Corrected, &["central"]);
    cfg.bindings = ["lambda=3/4", "lambda=2"]
        .iter()
        .map(|b| ParamBinding::parse_assignments(b).unwrap())
        .collect();
    let report = run(cat, &ids, &cfg)?;
    require_clean(&report)?;
    let subjects: BTreeSet<(String, String, String)> = report
        .records
        .iter()
        .map(|r| {
            (
                r.entry.clone(),
                r.subject.clone().unwrap_or_default(),
                r.binding.clone(),
            )
        })
        .collect();
    let want = [
        ("T1.std", "x1 - X0", ""),
        ("T1.gl2", "lambda*x0 + X0", "lambda=3/4"),
        ("T1.gl2", "lambda*x0 + X0", "lambda=2"),
    ];
    for (id, element, binding) in want {
        let hit = subjects
            .iter()
            .any(|(e, s, b)| e == id && s.contains(element) && b == binding);
        if !hit {
            return Err(format!("no central record for {element} in {id} at '{binding}'"));
        }
    }
    let gl2 = cat.get("T1.gl2").map_err(|e| e.to_string())?;
    if !gl2.centrals.iter().all(|c| c.primitive) {
        return Err("T1.gl2 central element is not marked primitive".into());
    }
    Ok(format!("{} records", report.summary.total))
}

fn symmetrized_identities(cat: &Catalog) -> Outcome {
    let ids = vec!["T2.11".to_string()];
    let mut cfg = config(4, VariantSelection::Corrected, &["sym_identity"]);
    cfg.bindings = ["omega=1", "omega=-1"]
        .iter()
        .map(|b| ParamBinding::parse_assignments(b).unwrap())
        .collect();
    let report = run(cat, &ids, &cfg)?;
    require_clean(&report)?;
    let bindings: BTreeSet<&str> = report.records.iter().map(|r| r.binding.as_str()).collect();
    if !bindings.contains("omega=1") || !bindings.contains("omega=-1") {
        return Err(format!("sym identity ran at {bindings:?}"));
    }
    Ok(format!("{} records", report.summary.total))
}

fn erratum_detection(cat: &Catalog) -> Outcome {
    let ids = vec!["T2.10".to_string()];
    let printed = run(cat, &ids, &config(4, VariantSelection::Printed, &["first_order"]))?;
    let rec = printed.records.first().ok_or("no first_order record")?;
    let locs: BTreeSet<&str> = rec.residuals.iter().map(|x| x.location.as_str()).collect();
    if rec.pass || locs != BTreeSet::from(["Δ(x1)"]) {
        return Err(format!("printed first_order: {}", describe(rec)));
    }
    let corrected = run(cat, &ids, &RunConfig::default())?;
    require_clean(&corrected)?;
    let contraction = corrected
        .records
        .iter()
        .find(|r| r.check == "contraction")
        .ok_or("no contraction record")?;
    if !contraction.pass {
        return Err(describe(contraction));
    }
    Ok(format!(
        "printed fails only at Δ(x1); corrected passes {} checks including {}",
        corrected.summary.total,
        contraction.subject.clone().unwrap_or_default()
    ))
}

fn random_word(rng: &mut StdRng, dim: usize) -> Vec<u8> {
    let len = rng.gen_range(2..=5);
    (0..len).map(|_| rng.gen_range(0..dim) as u8).collect()
}

fn engines(cat: &Catalog, order: u32) -> Vec<(String, Engine)> {
    let mut out = Vec::new();
    for e in cat.entries().filter(|e| e.has_deformation()) {
        for b in RunConfig::default().bindings_for(e).unwrap() {
            let inst = e.instantiate(&b, Variant::Corrected).unwrap();
            let spec = inst.deformation.expect("deformation");
            out.push((
                format!("{} {}", e.id, b.label()),
                Engine::new(&spec, &b, order).unwrap(),
            ));
        }
    }
    out
}

fn jacobi(e: &Engine, a: &NCPoly, b: &NCPoly, c: &NCPoly) -> NCPoly {
    let t1 = e.commutator(a, &e.commutator(b, c).unwrap()).unwrap();
    let t2 = e.commutator(b, &e.commutator(c, a).unwrap()).unwrap();
    let t3 = e.commutator(c, &e.commutator(a, b).unwrap()).unwrap();
    t1.add(&t2).add(&t3)
}

fn engine_properties(cat: &Catalog) -> Outcome {
    let order = 4;
    let engines = engines(cat, order);
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut words = 0;
    let mut triples = 0;
    let mut deepest = 0;
    while words < 1200 {
        for (name, e) in &engines {
            let w = random_word(&mut rng, e.dim());
            let normal = e
                .straighten_word(&w, order)
                .map_err(|err| format!("{name} {w:?}: {err}"))?;
            if e.straighten_random(&w, order, &mut rng) != normal {
                return Err(format!("{name}: normal forms of {w:?} differ"));
            }
            words += 1;
        }
    }
    for (name, e) in &engines {
        for _ in 0..4 {
            let pick = |rng: &mut StdRng| NCPoly::generator(rng.gen_range(0..e.dim()));
            let (a, b, c) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
            if !jacobi(e, &a, &b, &c).is_zero() {
                let l = e.labels();
                return Err(format!(
                    "{name}: Jacobi fails on {}, {}, {}",
                    a.format(l),
                    b.format(l),
                    c.format(l)
                ));
            }
            triples += 1;
        }
        deepest = deepest.max(e.max_depth());
        if e.max_depth() > 2 * order + 5 + 1 {
            return Err(format!("{name}: depth {} exceeds the step bound", e.max_depth()));
        }
    }
    Ok(format!(
        "{words} words over {} engines, {triples} Jacobi triples, deepest recursion {deepest}",
        engines.len()
    ))
}

fn basis_changes(cat: &Catalog) -> Outcome {
    let with_changes: Vec<&CatalogEntry> = cat.entries().filter(|e| !e.basis_changes.is_empty()).collect();
    let table2: Vec<String> = with_changes
        .iter()
        .filter(|e| e.table() == "T2")
        .map(|e| e.id.clone())
        .collect();
    if table2.is_empty() {
        return Err("no basis changes on two-parameter families".into());
    }
    let report = run(cat, &table2, &config(4, VariantSelection::Corrected, &["basis_change"]))?;
    require_clean(&report)?;
    let mut cfg = config(4, VariantSelection::Corrected, &["basis_change"]);
    cfg.bindings = vec![ParamBinding::parse_assignments("lambda=3/4").unwrap()];
    let y = run(cat, &["T4.14".to_string()], &cfg)?;
    require_clean(&y)?;
    if y.records.is_empty() || !y.records.iter().all(|r| r.binding.starts_with("lambda=3/4")) {
        return Err(format!(
            "T4.14 basis change ran at {:?}",
            y.records.iter().map(|r| &r.binding).collect::<Vec<_>>()
        ));
    }
    Ok(format!(
        "{} records on {table2:?}, {} on T4.14",
        report.summary.total, y.summary.total
    ))
}

fn check(number: usize, name: &str, criterion: fn(&Catalog) -> Outcome) {
    match criterion(&catalog()) {
        Ok(detail) => println!("criterion {number}: PASS {name}: {detail}"),
        Err(detail) => {
            println!("criterion {number}: FAIL {name}: {detail}");
            panic!("criterion {number} ({name}) failed: {detail}");
        }
    }
}

#[test]
fn criterion_1_classical_suite() {
    check(1, "classical suite", classical_suite);
}

#[test]
fn criterion_2_cocommutator_from_r() {
    check(2, "cocommutator from r", cocommutator_from_r);
}

#[test]
fn criterion_3_quantum_suite() {
    check(3, "quantum suite", quantum_suite);
}

#[test]
fn criterion_4_central_elements() {
    check(4, "central elements", central_elements);
}

#[test]
fn criterion_5_symmetrized_identities() {
    check(5, "symmetrized identities", symmetrized_identities);
}

#[test]
fn criterion_6_erratum_detection() {
    check(6, "erratum detection", erratum_detection);
}

#[test]
fn criterion_7_engine_properties() {
    check(7, "engine properties", engine_properties);
}

#[test]
fn criterion_8_basis_changes() {
    check(8, "basis changes", basis_changes);
}
