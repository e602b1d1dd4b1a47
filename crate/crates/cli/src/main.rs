use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ddq_core::catalog::{Catalog, CatalogEntry, CatalogTable};
use ddq_core::scalars::ParamBinding;
use ddq_core::suite::{self, RunConfig, VariantSelection, VerificationReport, CLASSICAL_CHECKS, QUANTUM_CHECKS};

#[derive(Parser)]
#[command(
    name = "ddq",
    version,
    about = "Exact verification of Drinfel'd doubles and their quantizations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List catalog entries.
    List(ListArgs),
    /// Run the classical and quantum checks.
    Verify(VerifyArgs),
    /// Emit a JSON or Markdown report, from a saved run or a fresh one.
    Report(ReportArgs),
}

#[derive(Args)]
struct ListArgs {
    /// Only entries of this dimension.
    #[arg(long)]
    dim: Option<usize>,
    /// Only entries with a quantization.
    #[arg(long)]
    quantized: bool,
    #[arg(long, value_enum, default_value_t = ListFormat::Text)]
    format: ListFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum ListFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Markdown,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Printed,
    Corrected,
    Both,
}

#[derive(Args)]
struct RunArgs {
    /// Truncation order in z.
    #[arg(short = 'N', long = "order", default_value_t = 4)]
    order: u32,
    /// Parameter binding, e.g. `lambda=3/4` or `omega=-1,sqrt(omega)=i`; repeatable.
    #[arg(long = "params")]
    params: Vec<String>,
    #[arg(long, value_enum, default_value_t = VariantArg::Corrected)]
    variant: VariantArg,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Comma-separated subset of checks.
    #[arg(long, value_delimiter = ',')]
    checks: Vec<String>,
    /// Extra entries in the catalog JSON schema (a table or a single entry).
    #[arg(long)]
    spec: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Entry ids, e.g. T2.10.
    ids: Vec<String>,
    /// Verify every entry.
    #[arg(long)]
    all: bool,
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// A JSON report from `ddq verify --format json`; without it the whole
    /// catalog is verified first.
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, value_enum, default_value_t = Format::Markdown)]
    format: Format,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

struct ConfigError(String);

impl<E: std::fmt::Display> From<E> for ConfigError {
    fn from(e: E) -> Self {
        ConfigError(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::List(a) => list(a),
        Command::Verify(a) => verify(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(code) => code,
        Err(ConfigError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load_catalog(spec: Option<&Path>) -> Result<(Catalog, Vec<String>), ConfigError> {
    let mut cat = Catalog::load()?;
    let mut extra = Vec::new();
    if let Some(path) = spec {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        let table: CatalogTable = match serde_json::from_str::<CatalogTable>(&text) {
            Ok(t) => t,
            Err(_) => {
                let entry: CatalogEntry =
                    serde_json::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
                CatalogTable {
                    table: "external".into(),
                    title: path.display().to_string(),
                    version: 1,
                    entries: vec![entry],
                }
            }
        };
        extra = table.entries.iter().map(|e| e.id.clone()).collect();
        let mut sources: Vec<(String, String)> = cat
            .tables
            .iter()
            .map(|t| (t.table.clone(), serde_json::to_string(t).expect("table serializes")))
            .collect();
        sources.push((path.display().to_string(), serde_json::to_string(&table)?));
        cat = Catalog::from_sources(&sources)?;
    }
    Ok((cat, extra))
}

fn list(a: ListArgs) -> Result<ExitCode, ConfigError> {
    let cat = Catalog::load()?;
    let rows: Vec<&CatalogEntry> = cat
        .entries()
        .filter(|e| a.dim.is_none_or(|d| e.dim == d))
        .filter(|e| !a.quantized || e.has_deformation())
        .collect();
    match a.format {
        ListFormat::Text => {
            for e in rows {
                println!(
                    "{:<8} {:<26} dim {}  {:<15} {}",
                    e.id,
                    e.pair,
                    e.dim,
                    e.double,
                    if e.has_deformation() {
                        "quantized"
                    } else {
                        "classical only"
                    }
                );
            }
        }
        ListFormat::Json => {
            let v: Vec<serde_json::Value> = rows
                .iter()
                .map(|e| {
                    serde_json::json!({
                        "id": e.id,
                        "pair": e.pair,
                        "double": e.double,
                        "classification": e.classification,
                        "dim": e.dim,
                        "has_deformation": e.has_deformation(),
                    })
                })
                .collect();
            println!("{}", serde_json::to_string_pretty(&v)?);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn config(r: &RunArgs) -> Result<RunConfig, ConfigError> {
    let known: BTreeSet<&str> = CLASSICAL_CHECKS.iter().chain(QUANTUM_CHECKS).copied().collect();
    for c in &r.checks {
        if !known.contains(c.as_str()) {
            return Err(ConfigError(format!("unknown check '{c}'")));
        }
    }
    let bindings = r
        .params
        .iter()
        .map(|p| ParamBinding::parse_assignments(p))
        .collect::<Result<Vec<_>, _>>()?;
    if r.jobs == 0 {
        return Err(ConfigError("--jobs must be at least 1".into()));
    }
    Ok(RunConfig {
        order: r.order,
        bindings,
        variants: match r.variant {
            VariantArg::Printed => VariantSelection::Printed,
            VariantArg::Corrected => VariantSelection::Corrected,
            VariantArg::Both => VariantSelection::Both,
        },
        checks: (!r.checks.is_empty()).then(|| r.checks.iter().cloned().collect()),
        jobs: r.jobs,
    })
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), ConfigError> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| ConfigError(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn text_summary(report: &VerificationReport) -> String {
    let mut groups: BTreeMap<(String, String, String), (usize, usize)> = BTreeMap::new();
    for r in &report.records {
        let g = groups
            .entry((r.entry.clone(), r.variant.to_string(), r.binding.clone()))
            .or_default();
        g.0 += 1;
        if r.pass {
            g.1 += 1;
        }
    }
    let mut s = String::new();
    for ((entry, variant, binding), (total, passed)) in &groups {
        let b = if binding.is_empty() { "-" } else { binding };
        s.push_str(&format!("{entry:<8} {variant:<9} {b:<40} {passed}/{total} passed\n"));
    }
    for r in report.failures() {
        let locs: BTreeSet<&str> = r.residuals.iter().map(|x| x.location.as_str()).collect();
        let mut detail: Vec<String> = locs.iter().map(|l| l.to_string()).collect();
        detail.extend(r.notes.iter().cloned());
        let subject = r.subject.as_deref().map(|s| format!(" ({s})")).unwrap_or_default();
        s.push_str(&format!(
            "FAIL {} {}{} [{}] {}: {}\n",
            r.entry,
            r.check,
            subject,
            r.variant,
            r.binding,
            detail.join("; ")
        ));
    }
    s.push_str(&format!(
        "{} checks, {} passed, {} failed\n",
        report.summary.total, report.summary.passed, report.summary.failed
    ));
    s
}

fn render(cat: &Catalog, report: &VerificationReport, format: Format) -> String {
    match format {
        Format::Text => text_summary(report),
        Format::Json => report.to_json() + "\n",
        Format::Markdown => suite::render_markdown(cat, report),
    }
}

fn verify(a: VerifyArgs) -> Result<ExitCode, ConfigError> {
    let cfg = config(&a.run)?;
    let (cat, extra) = load_catalog(a.run.spec.as_deref())?;
    let ids: Vec<String> = if a.all {
        cat.entries().map(|e| e.id.clone()).collect()
    } else if !a.ids.is_empty() {
        a.ids.clone()
    } else if !extra.is_empty() {
        extra
    } else {
        return Err(ConfigError("give entry ids or --all".into()));
    };
    let report = suite::run(&cat, &ids, &cfg)?;
    emit(&render(&cat, &report, a.format), a.output.as_deref())?;
    Ok(if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn report(a: ReportArgs) -> Result<ExitCode, ConfigError> {
    let (cat, _) = load_catalog(a.run.spec.as_deref())?;
    let report = match &a.input {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| ConfigError(format!("{}: {e}", p.display())))?;
            VerificationReport::from_json(&text)?
        }
        None => {
            let cfg = config(&a.run)?;
            let ids: Vec<String> = cat.entries().map(|e| e.id.clone()).collect();
            suite::run(&cat, &ids, &cfg)?
        }
    };
    emit(&render(&cat, &report, a.format), a.output.as_deref())?;
    Ok(ExitCode::SUCCESS)
}
