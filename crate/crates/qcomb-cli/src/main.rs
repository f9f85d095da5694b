//! `qcomb` — command-line front end for the Choi-operator network calculus.
//!
//! Exit codes: 0 success, 1 validation failure, 2 parse/IO error,
//! 3 numerical failure (non-convergence or rank trouble).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qcomb::combs::{probabilistic_feasibility, validate_deterministic, CombKind};
use qcomb::discrimination::{comb_distance, DiscriminationProblem, SeesawConfig};
use qcomb::io;
use qcomb::link::link;
use qcomb::multitime::history_distribution;
use qcomb::network::{compile, sequential_order, validate_graph};
use qcomb::realization::{complexity, realize_comb};
use qcomb::testers::{born_all, validate_tester};
use qcomb::QcombError;

#[derive(Parser)]
#[command(name = "qcomb", version, about = "Quantum-network calculus toolkit")]
struct Cli {
    /// Numerical tolerance for validation checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,

    /// Seed for randomized algorithms.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Write the result to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ArtifactKind {
    Comb,
    Tester,
    Graph,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a serialized comb, tester, or network graph.
    Validate {
        #[arg(value_enum)]
        kind: ArtifactKind,
        file: PathBuf,
    },
    /// Link two operator files into one operator.
    Link { left: PathBuf, right: PathBuf },
    /// Compile a network graph into a single comb.
    Compile { graph: PathBuf },
    /// Realize a comb as a sequence of isometries and report its complexity.
    Realize { comb: PathBuf },
    /// Apply a tester to a comb and print outcome probabilities.
    Born { tester: PathBuf, comb: PathBuf },
    /// Operational distance between two combs by seesaw optimization.
    Distance { left: PathBuf, right: PathBuf },
    /// Outcome distribution of a multiple-time measurement on a
    /// prepare/post-select state.
    Multitime { state: PathBuf, instrument: PathBuf },
}

enum CliError {
    Math(QcombError),
    Io(String),
}

impl From<QcombError> for CliError {
    fn from(e: QcombError) -> Self {
        CliError::Math(e)
    }
}

fn invariant_name(e: &QcombError) -> &'static str {
    use QcombError::*;
    match e {
        DimMismatch { .. } => "DimMismatch",
        DuplicateLabel(_) => "DuplicateLabel",
        UnknownLabel(_) => "UnknownLabel",
        NotAPermutation(_) => "NotAPermutation",
        ShapeMismatch { .. } => "ShapeMismatch",
        OverlappingLabels(_) => "OverlappingLabels",
        LabelUsedThrice(_) => "LabelUsedThrice",
        NotHermitian(_) => "NotHermitian",
        NotPsd(_) => "NotPsd",
        NotCp(_) => "NotCp",
        LevelViolation { .. } => "LevelViolation",
        NotDeterministicComb(_) => "NotDeterministicComb",
        FeasibilitySolverFailure { .. } => "FeasibilitySolverFailure",
        SumNotDeterministic(_) => "SumNotDeterministic",
        NumericalRankFailure(_) => "NumericalRankFailure",
        InvalidInterleaving(_) => "InvalidInterleaving",
        NonAdjacentMerge(_, _) => "NonAdjacentMerge",
        CycleFound(_) => "CycleFound",
        WireError(_) => "WireError",
        TesterViolation(_) => "TesterViolation",
        BaseNotComplete { .. } => "BaseNotComplete",
        ThetaSingular(_) => "ThetaSingular",
        ConvergenceFailure(_) => "ConvergenceFailure",
        PostSelectionImpossible(_) => "PostSelectionImpossible",
        Parse(_) => "Parse",
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 2,
            CliError::Math(e) => match e {
                QcombError::Parse(_) => 2,
                QcombError::NumericalRankFailure(_)
                | QcombError::FeasibilitySolverFailure { .. }
                | QcombError::ConvergenceFailure(_)
                | QcombError::ThetaSingular(_)
                | QcombError::PostSelectionImpossible(_) => 3,
                _ => 1,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Io(m) => format!("io error: {m}"),
            CliError::Math(e) => format!("{}: {e}", invariant_name(e)),
        }
    }
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Math(QcombError::Parse(format!("{}: {e}", path.display()))))
}

/// A finished command: machine output plus its human-readable rendering.
struct Report {
    json: Value,
    table: String,
}

fn emit(cli: &Cli, r: &Report) -> Result<(), CliError> {
    let text = match cli.format {
        Format::Json => serde_json::to_string_pretty(&r.json).unwrap() + "\n",
        Format::Table => r.table.clone(),
    };
    match &cli.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn kind_str(k: CombKind) -> &'static str {
    match k {
        CombKind::Deterministic => "deterministic",
        CombKind::Probabilistic => "probabilistic",
    }
}

fn cmd_validate(cli: &Cli, kind: ArtifactKind, file: &Path) -> Result<Report, CliError> {
    let v = read_json(file)?;
    match kind {
        ArtifactKind::Comb => {
            let comb = io::comb_from_json(&v)?;
            match comb.kind {
                CombKind::Deterministic => {
                    validate_deterministic(&comb, cli.tol.max(1e-12))?;
                }
                CombKind::Probabilistic => {
                    probabilistic_feasibility(&comb.op, &comb.teeth, cli.tol.max(1e-8), 5000)?;
                }
            }
            Ok(Report {
                json: json!({
                    "artifact": "comb",
                    "valid": true,
                    "kind": kind_str(comb.kind),
                    "teeth": comb.teeth.len(),
                }),
                table: format!(
                    "comb: valid ({} teeth, {})\n",
                    comb.teeth.len(),
                    kind_str(comb.kind)
                ),
            })
        }
        ArtifactKind::Tester => {
            let t = io::tester_from_json(&v)?;
            validate_tester(&t, cli.tol.max(1e-12))?;
            Ok(Report {
                json: json!({
                    "artifact": "tester",
                    "valid": true,
                    "elements": t.elements.len(),
                    "teeth": t.comb_teeth.len(),
                }),
                table: format!(
                    "tester: valid ({} elements, {} teeth)\n",
                    t.elements.len(),
                    t.comb_teeth.len()
                ),
            })
        }
        ArtifactKind::Graph => {
            let g = io::graph_from_json(&v)?;
            validate_graph(&g)?;
            let order = sequential_order(&g)?;
            Ok(Report {
                json: json!({
                    "artifact": "graph",
                    "valid": true,
                    "nodes": g.nodes.len(),
                    "wires": g.wires.len(),
                    "order": order,
                }),
                table: format!(
                    "graph: valid ({} nodes, {} wires)\norder: {}\n",
                    g.nodes.len(),
                    g.wires.len(),
                    order.join(" -> ")
                ),
            })
        }
    }
}

fn cmd_link(left: &Path, right: &Path) -> Result<Report, CliError> {
    let a = io::operator_from_json(&read_json(left)?)?;
    let b = io::operator_from_json(&read_json(right)?)?;
    let out = link(&a, &b)?;
    let labels = out.spaces().labels();
    Ok(Report {
        json: io::operator_to_json(&out),
        table: format!(
            "linked operator on [{}], dim {}, trace {:.6}\n",
            labels.join(", "),
            out.spaces().total_dim(),
            out.trace().re
        ),
    })
}

fn cmd_compile(graph: &Path) -> Result<Report, CliError> {
    let g = io::graph_from_json(&read_json(graph)?)?;
    let comb = compile(&g)?;
    Ok(Report {
        table: format!(
            "compiled comb: {} teeth, {}\n",
            comb.teeth.len(),
            kind_str(comb.kind)
        ),
        json: io::comb_to_json(&comb),
    })
}

fn cmd_realize(comb_path: &Path) -> Result<Report, CliError> {
    let comb = io::comb_from_json(&read_json(comb_path)?)?;
    let seq = realize_comb(&comb)?;
    let cx = complexity(&comb)?;
    let mut table = String::new();
    for (j, (step, anc)) in seq.steps.iter().zip(&seq.ancilla_dims).enumerate() {
        table.push_str(&format!(
            "step {}: {}x{} isometry, ancilla dim {}\n",
            j + 1,
            step.nrows(),
            step.ncols(),
            anc
        ));
    }
    table.push_str(&format!(
        "complexity: d_max = {}, r = {}\n",
        cx.d_max, cx.r
    ));
    Ok(Report {
        json: json!({
            "sequence": io::isometry_sequence_to_json(&seq),
            "complexity": {"d_max": cx.d_max, "r": cx.r},
        }),
        table,
    })
}

fn cmd_born(cli: &Cli, tester: &Path, comb: &Path) -> Result<Report, CliError> {
    let t = io::tester_from_json(&read_json(tester)?)?;
    validate_tester(&t, cli.tol.max(1e-8))?;
    let c = io::comb_from_json(&read_json(comb)?)?;
    let probs = born_all(&t, &c)?;
    let mut table = String::new();
    for (i, p) in probs.iter().enumerate() {
        table.push_str(&format!("outcome {i}: {p:.9}\n"));
    }
    table.push_str(&format!("sum: {:.9}\n", probs.iter().sum::<f64>()));
    Ok(Report {
        json: json!({"probabilities": probs, "sum": probs.iter().sum::<f64>()}),
        table,
    })
}

fn cmd_distance(cli: &Cli, left: &Path, right: &Path) -> Result<Report, CliError> {
    let a = io::comb_from_json(&read_json(left)?)?;
    let b = io::comb_from_json(&read_json(right)?)?;
    let prob = DiscriminationProblem::new(a, b);
    let cfg = SeesawConfig {
        tol: cli.tol.max(1e-8),
        seed: cli.seed,
        ..SeesawConfig::default()
    };
    let res = comb_distance(&prob, &cfg)?;
    Ok(Report {
        json: json!({
            "distance": res.distance,
            "p_error": res.p_error,
            "converged": res.converged,
            "iterations": res.trace.len(),
            "seed": cli.seed,
            "tester": io::tester_to_json(&res.tester),
        }),
        table: format!(
            "distance: {:.9}\np_error:  {:.9}\nconverged: {} ({} iterations)\nseed: {}\n",
            res.distance,
            res.p_error,
            res.converged,
            res.trace.len(),
            cli.seed
        ),
    })
}

fn cmd_multitime(state: &Path, instrument: &Path) -> Result<Report, CliError> {
    let s = io::multitime_state_from_json(&read_json(state)?)?;
    let m = io::multitime_measurement_from_json(&read_json(instrument)?)?;
    let probs = history_distribution(&m, &s)?;
    let mut table = String::new();
    for (o, p) in m.outcomes.iter().zip(&probs) {
        table.push_str(&format!("{}: {:.9}\n", o.label, p));
    }
    Ok(Report {
        json: json!({
            "outcomes": m.outcomes.iter().map(|o| o.label.clone()).collect::<Vec<_>>(),
            "probabilities": probs,
        }),
        table,
    })
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    match &cli.cmd {
        Cmd::Validate { kind, file } => cmd_validate(cli, *kind, file),
        Cmd::Link { left, right } => cmd_link(left, right),
        Cmd::Compile { graph } => cmd_compile(graph),
        Cmd::Realize { comb } => cmd_realize(comb),
        Cmd::Born { tester, comb } => cmd_born(cli, tester, comb),
        Cmd::Distance { left, right } => cmd_distance(cli, left, right),
        Cmd::Multitime { state, instrument } => cmd_multitime(state, instrument),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli).and_then(|r| emit(&cli, &r).map(|()| r)) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
