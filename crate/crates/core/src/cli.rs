//! Command-line front end: `wfm`, `models`, `check`, `compare`, `props`.
//!
//! Exit codes: 0 on success, 1 on domain rejection (e.g. the well-founded
//! fixpoint does not induce a model), 2 on usage or parse errors. Output is
//! byte-stable for a fixed input, flag set, and seed.

use std::ffi::OsString;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use crate::aft::{check_approximator, well_founded_fixpoint, CheckMode, PAIR_EXHAUSTIVE_CAP};
use crate::approximators::{precision_compare, MknfApproximator, Variant};
use crate::kb::{KbError, KnowledgeBase, Partition};
use crate::lattice::LatticeElement;
use crate::semantics::{
    check_partition, extract_models, wfm, ModelReport, SemanticsError, ENUM_CAP, ORACLE_CAP,
};
use crate::DEFAULT_SEED;

#[derive(Parser)]
#[command(
    name = "mknfaft",
    version,
    about = "Well-founded and stable model computation for hybrid MKNF knowledge bases"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OperatorArg {
    Phi,
    Psi,
}

impl OperatorArg {
    fn variant(self) -> Variant {
        match self {
            OperatorArg::Phi => Variant::Phi,
            OperatorArg::Psi => Variant::Psi,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputArg {
    Text,
    Json,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the knowledge-base file.
    input: PathBuf,
    /// Which approximator to use.
    #[arg(long, value_enum, default_value = "psi")]
    operator: OperatorArg,
    /// Output format.
    #[arg(long, value_enum, default_value = "text")]
    output: OutputArg,
}

#[derive(Subcommand)]
enum Command {
    /// Compute and classify the well-founded fixpoint.
    Wfm {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Enumerate and classify every stable fixpoint.
    Models {
        #[command(flatten)]
        common: CommonArgs,
        /// Cap on the number of K-atoms for enumeration.
        #[arg(long, default_value_t = ENUM_CAP)]
        enum_cap: usize,
    },
    /// Classify a hand-built partition given as "t1,t2;p1,p2".
    Check {
        #[command(flatten)]
        common: CommonArgs,
        /// Two comma-separated atom lists, T and P, joined by a semicolon.
        #[arg(long)]
        partition: String,
    },
    /// Compare the well-founded fixpoints of the two approximators.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run structural property checks on the KB's approximators.
    Props {
        #[command(flatten)]
        common: CommonArgs,
        /// Sample count for checks too large to run exhaustively.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// RNG seed for sampled checks.
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Cap on the number of K-atoms for the brute-force cross-check.
        #[arg(long, default_value_t = ORACLE_CAP)]
        oracle_cap: usize,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error("bad --partition value: expected \"t1,t2;p1,p2\"")]
    BadPartition,
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::BadPartition => 2,
            CliError::Kb(KbError::Syntax { .. }) | CliError::Kb(KbError::DlUnsafe(_)) => 2,
            _ => 1,
        }
    }
}

/// Parses `args` and runs the selected command, returning the process exit
/// code. Factored out of `main` so tests can drive the CLI in-process.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load(path: &PathBuf) -> Result<Arc<KnowledgeBase>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(Arc::new(KnowledgeBase::from_text(&text)?))
}

/// `{Ka,Kb,Kc}`: modal rendering of a lattice element, name-sorted.
fn modal_set(e: &LatticeElement) -> String {
    let names: Vec<String> = e.sorted_names().iter().map(|n| format!("K{n}")).collect();
    format!("{{{}}}", names.join(","))
}

fn partition_line(p: &Partition) -> String {
    format!("T={} P={}", modal_set(&p.first), modal_set(&p.second))
}

fn modal_list_json(e: &LatticeElement) -> Value {
    Value::Array(
        e.sorted_names()
            .iter()
            .map(|n| Value::String(format!("K{n}")))
            .collect(),
    )
}

fn report_json(r: &ModelReport) -> Value {
    json!({
        "t": modal_list_json(&r.partition.first),
        "p": modal_list_json(&r.partition.second),
        "kind": r.kind.as_str(),
        "reason": r.reason.map(|x| x.as_str()),
    })
}

fn status_line(r: &ModelReport) -> String {
    match r.reason {
        Some(reason) => format!("{} ({})", r.kind.as_str(), reason.as_str()),
        None => r.kind.as_str().to_string(),
    }
}

fn emit_reports(
    common: &CommonArgs,
    reports: &[ModelReport],
    well_founded: Option<&ModelReport>,
) {
    match common.output {
        OutputArg::Text => {
            for r in reports {
                println!("{} status: {}", partition_line(&r.partition), status_line(r));
            }
            match well_founded {
                Some(r) => println!("well-founded: {}", partition_line(&r.partition)),
                None => println!("well-founded: none"),
            }
        }
        OutputArg::Json => {
            let doc = json!({
                "kb": common.input.display().to_string(),
                "operator": common.operator.variant().name(),
                "partitions": reports.iter().map(report_json).collect::<Vec<_>>(),
                "well_founded": well_founded.map(report_json),
            });
            println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
        }
    }
}

fn execute(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Wfm { common } => {
            let kb = load(&common.input)?;
            let report = wfm(&kb, common.operator.variant())?;
            match common.output {
                OutputArg::Text => {
                    println!("{}", partition_line(&report.partition));
                    println!("status: {}", status_line(&report));
                }
                OutputArg::Json => {
                    let wf = report.accepted().then_some(&report);
                    emit_reports(&common, std::slice::from_ref(&report), wf);
                }
            }
            Ok(if report.accepted() { 0 } else { 1 })
        }
        Command::Models { common, enum_cap } => {
            let kb = load(&common.input)?;
            let reports = extract_models(&kb, common.operator.variant(), enum_cap)?;
            let wf = reports
                .iter()
                .find(|r| r.kind == crate::semantics::ModelKind::WellFounded);
            emit_reports(&common, &reports, wf);
            Ok(if reports.iter().any(|r| r.accepted()) { 0 } else { 1 })
        }
        Command::Check { common, partition } => {
            let kb = load(&common.input)?;
            let (t_part, p_part) = partition.split_once(';').ok_or(CliError::BadPartition)?;
            let names = |s: &str| -> Vec<String> {
                s.split(',')
                    .map(str::trim)
                    .filter(|a| !a.is_empty())
                    .map(str::to_string)
                    .collect()
            };
            let (t_names, p_names) = (names(t_part), names(p_part));
            let pair = kb.partition_from_names(
                t_names.iter().map(String::as_str),
                p_names.iter().map(String::as_str),
            )?;
            let report = check_partition(&kb, common.operator.variant(), &pair)?;
            match common.output {
                OutputArg::Text => {
                    println!("{}", partition_line(&report.partition));
                    println!("status: {}", status_line(&report));
                }
                OutputArg::Json => {
                    let wf = (report.kind == crate::semantics::ModelKind::WellFounded)
                        .then_some(&report);
                    emit_reports(&common, std::slice::from_ref(&report), wf);
                }
            }
            Ok(if report.accepted() { 0 } else { 1 })
        }
        Command::Compare { common } => {
            let kb = load(&common.input)?;
            let a_phi = MknfApproximator::new(kb.clone(), Variant::Phi);
            let a_psi = MknfApproximator::new(kb.clone(), Variant::Psi);
            let wf_phi = well_founded_fixpoint(&a_phi).map_err(SemanticsError::from)?;
            let wf_psi = well_founded_fixpoint(&a_psi).map_err(SemanticsError::from)?;
            let leq = wf_phi.leq_p(&wf_psi).expect("same universe");
            let relation = if wf_phi == wf_psi {
                "equal"
            } else if leq {
                "strict"
            } else {
                "incomparable"
            };
            match common.output {
                OutputArg::Text => {
                    println!("phi: {}", partition_line(&wf_phi));
                    println!("psi: {}", partition_line(&wf_psi));
                    println!("relation: {relation}");
                }
                OutputArg::Json => {
                    let pair_json = |p: &Partition| {
                        json!({"t": modal_list_json(&p.first), "p": modal_list_json(&p.second)})
                    };
                    let doc = json!({
                        "kb": common.input.display().to_string(),
                        "phi": pair_json(&wf_phi),
                        "psi": pair_json(&wf_psi),
                        "relation": relation,
                    });
                    println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
                }
            }
            Ok(0)
        }
        Command::Props { common, samples, seed, oracle_cap } => {
            let kb = load(&common.input)?;
            let n = kb.ka().len();
            let mode = if n <= PAIR_EXHAUSTIVE_CAP {
                CheckMode::Exhaustive
            } else {
                CheckMode::Sampled { samples, seed }
            };
            let mut all_ok = true;
            let mut lines = Vec::new();
            let mut results = serde_json::Map::new();
            for variant in [Variant::Phi, Variant::Psi] {
                let a = MknfApproximator::new(kb.clone(), variant);
                let diag = check_approximator(&a, mode).map_err(SemanticsError::from)?;
                all_ok &= diag.passed();
                lines.push(format!(
                    "approximator {}: {}",
                    variant.name(),
                    if diag.passed() { "pass" } else { "fail" }
                ));
                results.insert(format!("{}_ok", variant.name()), Value::Bool(diag.passed()));
            }
            let precision = precision_compare(&kb, samples, seed);
            all_ok &= precision.holds();
            lines.push(format!(
                "precision phi<=psi: {} ({} pairs checked)",
                if precision.holds() { "pass" } else { "fail" },
                precision.checked
            ));
            results.insert("precision_ok".into(), Value::Bool(precision.holds()));
            if n <= oracle_cap {
                let oracle = crate::semantics::oracle_models(&kb, oracle_cap)?;
                let mut agree = true;
                for variant in [Variant::Phi, Variant::Psi] {
                    let accepted: Vec<Partition> = extract_models(&kb, variant, ENUM_CAP)?
                        .into_iter()
                        .filter(|r| r.accepted())
                        .map(|r| r.partition)
                        .collect();
                    agree &= accepted == oracle;
                }
                all_ok &= agree;
                lines.push(format!(
                    "oracle agreement: {} ({} models)",
                    if agree { "pass" } else { "fail" },
                    oracle.len()
                ));
                results.insert("oracle_ok".into(), Value::Bool(agree));
            } else {
                lines.push("oracle agreement: skipped (above cap)".into());
                results.insert("oracle_ok".into(), Value::Null);
            }
            match common.output {
                OutputArg::Text => {
                    for l in &lines {
                        println!("{l}");
                    }
                }
                OutputArg::Json => {
                    let doc = json!({
                        "kb": common.input.display().to_string(),
                        "results": Value::Object(results),
                    });
                    println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
                }
            }
            Ok(if all_ok { 0 } else { 1 })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_rendering() {
        let kb = Arc::new(
            KnowledgeBase::from_text("rules:\n K a <- not b.\n K b <- not a.\n").unwrap(),
        );
        let p = kb.partition_from_names(["a"], ["a", "b"]).unwrap();
        assert_eq!(partition_line(&p), "T={Ka} P={Ka,Kb}");
        assert_eq!(modal_set(&LatticeElement::bottom(kb.ka())), "{}");
    }

    #[test]
    fn bad_partition_flag_is_usage_error() {
        assert!(matches!(
            execute(Command::Check {
                common: CommonArgs {
                    input: PathBuf::from("/nonexistent.kb"),
                    operator: OperatorArg::Psi,
                    output: OutputArg::Text,
                },
                partition: "a,b".into(),
            }),
            Err(CliError::Io { .. })
        ));
    }

    #[test]
    fn usage_error_exit_code() {
        assert_eq!(run(["mknfaft", "no-such-command"]), 2);
        assert_eq!(run(["mknfaft", "--help"]), 0);
    }
}
