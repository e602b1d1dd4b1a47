use std::collections::BTreeSet;

use ddq_core::catalog::{Catalog, CatalogError, ErratumKind};
use ddq_core::suite::{CLASSICAL_CHECKS, QUANTUM_CHECKS};

fn write_tables(cat: &Catalog, dir: &std::path::Path) {
    for (i, t) in cat.tables.iter().enumerate() {
        let path = dir.join(format!("table{}.json", i + 1));
        std::fs::write(path, serde_json::to_string_pretty(t).unwrap()).unwrap();
    }
}

#[test]
fn directory_catalog_matches_embedded() {
    let cat = Catalog::embedded().unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_tables(&cat, dir.path());
    let loaded = Catalog::from_dir(dir.path()).unwrap();
    assert_eq!(loaded.version(), cat.version());
    let a: Vec<String> = cat.entries().map(|e| serde_json::to_string(e).unwrap()).collect();
    let b: Vec<String> = loaded.entries().map(|e| serde_json::to_string(e).unwrap()).collect();
    assert_eq!(a, b);
}

#[test]
fn missing_table_is_a_load_error() {
    let cat = Catalog::embedded().unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_tables(&cat, dir.path());
    std::fs::remove_file(dir.path().join("table3.json")).unwrap();
    assert!(matches!(Catalog::from_dir(dir.path()), Err(CatalogError::Load { .. })));
}

#[test]
fn malformed_bracket_is_rejected() {
    let mut cat = Catalog::embedded().unwrap();
    let e = &mut cat.tables[0].entries[0];
    e.classical.insert("[x0,x1]".into(), "x0 +* x1".into());
    let sources: Vec<(String, String)> = cat
        .tables
        .iter()
        .map(|t| (t.table.clone(), serde_json::to_string(t).unwrap()))
        .collect();
    assert!(Catalog::from_sources(&sources).is_err());
}

#[test]
fn errata_are_consistent_with_the_printed_data() {
    let cat = Catalog::embedded().unwrap();
    let known: BTreeSet<&str> = CLASSICAL_CHECKS.iter().chain(QUANTUM_CHECKS).copied().collect();
    let mut count = 0;
    for e in cat.entries() {
        for er in &e.errata {
            count += 1;
            assert!(
                known.contains(er.check.as_str()),
                "{}: unknown check {}",
                e.id,
                er.check
            );
            assert_ne!(er.printed.as_deref(), Some(er.corrected.as_str()));
            assert!(!er.note.is_empty());
            let printed = match er.kind {
                ErratumKind::Table => e.classical.get(&er.key),
                ErratumKind::Bracket => e.deformation.as_ref().unwrap().brackets.get(&er.key),
                ErratumKind::Coproduct => e.deformation.as_ref().unwrap().coproducts.get(&er.key),
            };
            assert_eq!(printed, er.printed.as_ref(), "{} {}", e.id, er.key);
        }
    }
    assert_eq!(count, 6);
}
