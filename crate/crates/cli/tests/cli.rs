use std::path::Path;
use std::process::{Command, Output};

fn ddq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ddq"))
        .args(args)
        .env_remove("DDQ_CATALOG_DIR")
        .output()
        .expect("ddq runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn without_timings(json: &str) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(json).unwrap();
    v.as_object_mut().unwrap().remove("timings");
    v
}

#[test]
fn list_counts() {
    let all = ddq(&["list"]);
    assert_eq!(code(&all), 0);
    assert_eq!(stdout(&all).lines().count(), 20);
    assert_eq!(stdout(&ddq(&["list", "--dim", "2"])).lines().count(), 2);
    assert_eq!(stdout(&ddq(&["list", "--quantized"])).lines().count(), 17);
    let json: serde_json::Value = serde_json::from_str(&stdout(&ddq(&["list", "--format", "json"]))).unwrap();
    let rows = json.as_array().unwrap();
    assert_eq!(rows.len(), 20);
    assert_eq!(rows.iter().filter(|r| r["has_deformation"] == true).count(), 17);
}

#[test]
fn standard_entry_passes() {
    let out = ddq(&["verify", "T1.std", "-N", "4"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
}

#[test]
fn printed_null_term_is_detected() {
    let out = ddq(&["verify", "T2.10", "--variant", "printed"]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    let first_order: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("FAIL T2.10 first_order"))
        .collect();
    assert_eq!(first_order.len(), 1, "{text}");
    assert!(first_order[0].contains("Δ(x1)"));
    assert!(!first_order[0].contains("Δ(x0)") && !first_order[0].contains("Δ(x2)"));
    let corrected = ddq(&["verify", "T2.10", "--variant", "corrected"]);
    assert_eq!(code(&corrected), 0, "{}", stdout(&corrected));
}

#[test]
fn full_corrected_suite_passes() {
    let out = ddq(&["verify", "--all", "--variant", "corrected", "-N", "4", "--jobs", "2"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("0 failed"));
}

#[test]
fn configuration_errors_exit_with_two() {
    for args in [
        vec!["verify", "T9.9"],
        vec!["verify", "T2.1", "--params", "lambda=="],
        vec!["verify", "T2.1", "--params", "lambda=0"],
        vec!["verify", "T2.1", "--checks", "nonsense"],
        vec!["verify"],
        vec!["verify", "T2.1", "--jobs", "0"],
        vec!["verify", "T2.1", "--no-such-flag"],
    ] {
        let out = ddq(&args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn parameter_overrides_are_honoured() {
    let out = ddq(&["verify", "T2.1", "--params", "lambda=5/3", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let records = v["records"].as_array().unwrap();
    assert!(!records.is_empty());
    assert!(records.iter().all(|r| r["binding"] == "lambda=5/3"));
}

#[test]
fn json_report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    let p = path.to_str().unwrap();
    let out = ddq(&["verify", "T2.9", "T5.17", "-N", "3", "--format", "json", "-o", p]);
    assert_eq!(code(&out), 0);
    let saved = std::fs::read_to_string(&path).unwrap();
    let again = ddq(&["report", "--input", p, "--format", "json"]);
    assert_eq!(code(&again), 0);
    let a: serde_json::Value = serde_json::from_str(&saved).unwrap();
    let b: serde_json::Value = serde_json::from_str(&stdout(&again)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a["order"], 3);
    assert!(a["records"].as_array().unwrap().iter().any(|r| r["N"] == 3));
    let summary = &a["summary"];
    assert_eq!(summary["total"], a["records"].as_array().unwrap().len());
}

#[test]
fn reports_are_deterministic() {
    let args = [
        "verify",
        "T2.11",
        "T3.7",
        "-N",
        "3",
        "--variant",
        "both",
        "--format",
        "json",
    ];
    let one = ddq(&args);
    let two = ddq(&args);
    let mut parallel = args.to_vec();
    parallel.extend(["--jobs", "3"]);
    let three = ddq(&parallel);
    assert_eq!(without_timings(&stdout(&one)), without_timings(&stdout(&two)));
    assert_eq!(without_timings(&stdout(&one)), without_timings(&stdout(&three)));
}

#[test]
fn markdown_has_table_and_erratum_sections() {
    let out = ddq(&["report", "-N", "2", "--variant", "both"]);
    assert_eq!(code(&out), 0);
    let md = stdout(&out);
    for t in ["## T1:", "## T2:", "## T3:", "## T4:", "## T5:", "## Errata"] {
        assert_eq!(md.matches(t).count(), 1, "{t}");
    }
    let errata = &md[md.find("## Errata").unwrap()..];
    for (head, check) in [
        ("### T2.10 x1", "`first_order`"),
        ("### T3.6 [x2,X2]", "`classical_limit`"),
        ("### T4.12 [x2,X1]", "`classical_limit`"),
        ("### T4.14 [y0,Y1]", "`homomorphism`"),
        ("### T4.14 [y0,Y2]", "`classical_limit`"),
        ("### T5.15 [x0,X2]", "`table_column`"),
    ] {
        let at = errata.find(head).unwrap_or_else(|| panic!("missing {head}"));
        let section = &errata[at..];
        let end = section[4..].find("### ").map_or(section.len(), |e| e + 4);
        let section = &section[..end];
        assert!(
            section.contains(&format!("forcing check: {check} (printed fails, corrected passes)")),
            "{section}"
        );
    }
    assert!(md.contains('✅') && md.contains('❌'));
}

fn copy_catalog(to: &Path) {
    let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/catalog");
    for i in 1..=5 {
        let f = format!("table{i}.json");
        std::fs::copy(src.join(&f), to.join(&f)).unwrap();
    }
}

#[test]
fn catalog_directory_override() {
    let dir = tempfile::tempdir().unwrap();
    copy_catalog(dir.path());
    let t1 = dir.path().join("table1.json");
    let text = std::fs::read_to_string(&t1)
        .unwrap()
        .replace("\"T1.std\"", "\"T1.renamed\"");
    std::fs::write(&t1, text).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_ddq"))
        .args(["list"])
        .env("DDQ_CATALOG_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("T1.renamed"));

    std::fs::remove_file(dir.path().join("table5.json")).unwrap();
    let broken = Command::new(env!("CARGO_BIN_EXE_ddq"))
        .args(["verify", "T2.1"])
        .env("DDQ_CATALOG_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&broken), 2);
}

#[test]
fn external_spec_file() {
    let catalog = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/catalog/table1.json");
    let table: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(catalog).unwrap()).unwrap();
    let mut entry = table["entries"][0].clone();
    entry["id"] = "U.heis".into();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("entry.json");
    std::fs::write(&path, entry.to_string()).unwrap();
    let p = path.to_str().unwrap();
    let out = ddq(&["verify", "--spec", p, "-N", "3"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).lines().all(|l| !l.starts_with("T")));
    assert!(stdout(&out).contains("U.heis"));

    entry["deformation"]["coproducts"]["x0"] = "x0 o x0".into();
    std::fs::write(&path, entry.to_string()).unwrap();
    let bad = ddq(&["verify", "--spec", p, "-N", "3"]);
    assert_eq!(code(&bad), 1, "{}", stdout(&bad));

    entry["id"] = "T1.std".into();
    std::fs::write(&path, entry.to_string()).unwrap();
    assert_eq!(code(&ddq(&["verify", "--spec", p])), 2);
}
