//! Executes one parsed command.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use frankl_core::certify::{
    brute_force_classify, verify_document, CertificateDocument, CertifyError, OracleVerdict, SCHEMA_VERSION,
};
use frankl_core::driver::{
    certify_weights, classify, ClassificationCertificate, ClassifyOptions, DriverError, WeightsVerdict,
};
use frankl_core::family::{complement_column_to_mask, SetFamily};
use frankl_core::io::{matrix_dump, parse_family};
use frankl_core::lp::format_rational;
use frankl_core::separation::{SolveOptions, WeightVector};
use frankl_core::structure::{
    morris_z_nonempty, regularity_check, smaller_g_implication, vaughan_solve, StructureError, VaughanOutcome,
    ZOutcome,
};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::args::{Cli, Command, SolveArgs, StructureQuery};

pub const EXIT_POSITIVE: u8 = 0;
pub const EXIT_NEGATIVE: u8 = 1;
pub const EXIT_UNDECIDED: u8 = 2;
pub const EXIT_USAGE: u8 = 64;
pub const EXIT_IO: u8 = 74;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Undecided(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => EXIT_IO,
            CliError::Input(_) => EXIT_USAGE,
            CliError::Undecided(_) => EXIT_UNDECIDED,
        }
    }
}

impl From<DriverError> for CliError {
    fn from(e: DriverError) -> Self {
        if e.is_undecided() {
            CliError::Undecided(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

impl From<StructureError> for CliError {
    fn from(e: StructureError) -> Self {
        match e {
            StructureError::Driver(d) => d.into(),
            StructureError::Undecided(_) => CliError::Undecided(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<CertifyError> for CliError {
    fn from(e: CertifyError) -> Self {
        CliError::Input(e.to_string())
    }
}

/// A decided command: exit status, text for stdout, and the JSON artifact.
#[derive(Debug)]
pub struct Outcome {
    pub positive: bool,
    pub summary: String,
    pub artifact: String,
    pub artifact_path: PathBuf,
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        if self.positive {
            EXIT_POSITIVE
        } else {
            EXIT_NEGATIVE
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn load_family(path: &Path) -> Result<SetFamily, CliError> {
    parse_family(&read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// `dir/stem.<suffix>` where `stem` drops the last extension of `input`.
pub fn sibling(input: &Path, suffix: &str) -> PathBuf {
    let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    input.with_file_name(format!("{stem}.{suffix}"))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("artifact serializes")
}

fn solve_options(args: &SolveArgs, n: usize, complemented: bool) -> Result<SolveOptions, CliError> {
    let mut opts = SolveOptions { mode: args.mode.into(), ..SolveOptions::default() };
    if let Some(limit) = args.node_limit {
        opts.node_limit = limit;
    }
    let dim = 1u32 << n;
    opts.branch_first_on = args
        .branch_first_on
        .iter()
        .map(|&v| {
            if v >= dim {
                Err(CliError::Input(format!("branch variable {v} is outside 0..{dim}")))
            } else if complemented {
                Ok(complement_column_to_mask(v, n))
            } else {
                Ok(v)
            }
        })
        .collect::<Result<_, _>>()?;
    Ok(opts)
}

struct Printer {
    matrices: bool,
    complemented: bool,
}

impl Printer {
    fn matrix(&self, out: &mut String, title: &str, family: &SetFamily) {
        if self.matrices {
            let _ = writeln!(out, "{title} ({} sets):", family.len());
            out.push_str(&matrix_dump(family, self.complemented));
        }
    }
}

fn weights_text(c: &WeightVector) -> String {
    c.entries.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(",")
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let printer = Printer { matrices: cli.matrix || cli.complemented_columns, complemented: cli.complemented_columns };
    let (input, default_suffix) = match &cli.command {
        Command::Classify { file, .. } | Command::CertifyWeights { file, .. } => (file, "cert.json".to_string()),
        Command::Verify { file } => (file, "report.json".to_string()),
        Command::Structure { query, file, .. } => (file, format!("{}.json", query.suffix())),
        Command::Oracle { file } => (file, "oracle.json".to_string()),
    };
    let artifact_path = cli.output.clone().unwrap_or_else(|| sibling(input, &default_suffix));
    let mut summary = String::new();
    let (positive, artifact) = match &cli.command {
        Command::Classify { file, solve, master, max_iterations } => {
            let family = load_family(file)?;
            printer.matrix(&mut summary, "input", &family);
            let opts = ClassifyOptions {
                master: (*master).into(),
                max_iterations: *max_iterations,
                separation: solve_options(solve, family.n(), cli.complemented_columns)?,
            };
            let result = classify(&family, &opts)?;
            let positive = match &result.certificate {
                ClassificationCertificate::Fc { weights, proof } => {
                    let _ = writeln!(
                        summary,
                        "FC: weights {} ({} iterations, {} proof leaves)",
                        weights_text(weights),
                        result.history.len(),
                        proof.leaf_count()
                    );
                    true
                }
                ClassificationCertificate::NonFc { witnesses, .. } => {
                    let _ = writeln!(summary, "Non-FC: {} witness families", witnesses.len());
                    for (k, w) in witnesses.iter().enumerate() {
                        printer.matrix(&mut summary, &format!("witness {}", k + 1), w);
                    }
                    false
                }
            };
            let doc = CertificateDocument::Classification {
                schema_version: SCHEMA_VERSION,
                family,
                certificate: result.certificate,
                history: result.history,
            };
            (positive, doc.to_json())
        }
        Command::CertifyWeights { file, weights, solve } => {
            let family = load_family(file)?;
            printer.matrix(&mut summary, "input", &family);
            let c = WeightVector::new(weights.clone()).map_err(|e| CliError::Input(e.to_string()))?;
            let opts = solve_options(solve, family.n(), cli.complemented_columns)?;
            let verdict = certify_weights(&family, &c, &opts)?;
            let positive = match &verdict {
                WeightsVerdict::Certified { proof } => {
                    let _ = writeln!(summary, "certified: no family violates {} ({} proof leaves)", weights_text(&c), proof.leaf_count());
                    true
                }
                WeightsVerdict::Refuted { family: b, objective } => {
                    let _ = writeln!(summary, "refuted: a family of {} sets violates by {objective}", b.len());
                    printer.matrix(&mut summary, "violating family", b);
                    false
                }
            };
            let doc = CertificateDocument::Weights { schema_version: SCHEMA_VERSION, family, weights: c, verdict };
            (positive, doc.to_json())
        }
        Command::Verify { file } => {
            let doc = CertificateDocument::from_json(&read(file)?)?;
            let report = verify_document(&doc)?;
            let _ = writeln!(summary, "{report}");
            (report.passed(), to_json(&report))
        }
        Command::Structure { query, file, solve } => {
            let family = load_family(file)?;
            printer.matrix(&mut summary, "input", &family);
            structure(*query, family, solve, cli.complemented_columns, &mut summary)?
        }
        Command::Oracle { file } => {
            let family = load_family(file)?;
            printer.matrix(&mut summary, "input", &family);
            let verdict = brute_force_classify(&family)?;
            match &verdict {
                OracleVerdict::Fc { weights } => {
                    let _ = writeln!(summary, "FC: weights {}", weights_text(weights));
                }
                OracleVerdict::NonFc { system, .. } => {
                    let _ = writeln!(summary, "Non-FC: {} rows", system.constraints.len());
                }
            }
            let body = json!({ "schema_version": SCHEMA_VERSION, "family": family, "result": verdict });
            (verdict.is_fc(), to_json(&body))
        }
    };
    Ok(Outcome { positive, summary, artifact, artifact_path })
}

fn structure(
    query: StructureQuery,
    family: SetFamily,
    solve: &SolveArgs,
    complemented: bool,
    summary: &mut String,
) -> Result<(bool, String), CliError> {
    Ok(match query {
        StructureQuery::Regularity => {
            let generators = family.union_closure().and_then(|c| c.minimal_generator()).map_err(|e| CliError::Input(e.to_string()))?;
            let opts = ClassifyOptions {
                separation: solve_options(solve, family.n(), complemented)?,
                ..ClassifyOptions::default()
            };
            let report = regularity_check(&generators, &opts)?;
            if report.regular {
                let _ = writeln!(summary, "regular: all {} perturbations are Non-FC", report.perturbations.len());
            } else {
                let shown: Vec<String> = report.witnesses.iter().map(|(a, i)| format!("{a} + {i}")).collect();
                let _ = writeln!(summary, "not regular: FC after {}", shown.join(", "));
            }
            let body = json!({ "schema_version": SCHEMA_VERSION, "report": report });
            (!report.regular, to_json(&body))
        }
        StructureQuery::Morris => {
            let (system, outcome) = morris_z_nonempty(&family)?;
            let feasible = match &outcome {
                ZOutcome::Feasible { point } => {
                    let shown: Vec<String> = point.iter().map(|v| v.to_string()).collect();
                    let _ = writeln!(summary, "Z(A) nonempty: ({})", shown.join(", "));
                    true
                }
                ZOutcome::Empty { .. } => {
                    let _ = writeln!(summary, "Z(A) empty");
                    false
                }
            };
            let body = json!({ "schema_version": SCHEMA_VERSION, "system": system, "result": outcome });
            (feasible, to_json(&body))
        }
        StructureQuery::SmallerG => {
            let check = smaller_g_implication(&family)?;
            let _ = writeln!(
                summary,
                "{}",
                if check.z_point.is_empty() {
                    "Z(A) empty: implication holds vacuously"
                } else if check.g_rows_hold {
                    "the Z(A) point satisfies every G_j row"
                } else {
                    "the Z(A) point violates a G_j row"
                }
            );
            let body = json!({ "schema_version": SCHEMA_VERSION, "result": check });
            (check.g_rows_hold, to_json(&body))
        }
        StructureQuery::Vaughan => {
            let (system, outcome) = vaughan_solve(&family)?;
            let feasible = match &outcome {
                VaughanOutcome::Feasible { point, l1_sum, strictly_below_one } => {
                    let shown: Vec<String> = point.iter().map(format_rational).collect();
                    let _ = writeln!(
                        summary,
                        "feasible: ({}), sum {}{}",
                        shown.join(", "),
                        format_rational(l1_sum),
                        if *strictly_below_one { " < 1" } else { "" }
                    );
                    true
                }
                VaughanOutcome::Empty { .. } => {
                    let _ = writeln!(summary, "infeasible");
                    false
                }
            };
            let body = json!({ "schema_version": SCHEMA_VERSION, "system": system, "result": outcome });
            (feasible, to_json(&body))
        }
    })
}
