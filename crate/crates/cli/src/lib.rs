//! Scenario parsing, task execution and reports for the `detgerbe` binary.

pub mod report;
pub mod run;
pub mod scenario;

use report::{Ledger, Report};
use scenario::{parse_scenario, ParseError, Scenario, ScenarioDocument, TaskKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PROPERTY: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

/// Default scenario for each task, used when `--scenario` is absent.
pub fn default_scenario(kind: TaskKind) -> &'static str {
    match kind {
        TaskKind::Cohomology => include_str!("../scenarios/cohomology.json"),
        TaskKind::Transgression => include_str!("../scenarios/transgression.json"),
        TaskKind::CentralExtension => include_str!("../scenarios/central-extension.json"),
        TaskKind::Fock => include_str!("../scenarios/fock.json"),
        TaskKind::GerbalExtract => include_str!("../scenarios/gerbal-extract.json"),
        TaskKind::GerbalPair => include_str!("../scenarios/gerbal-pair.json"),
        TaskKind::DoubleLoop => include_str!("../scenarios/double-loop.json"),
    }
}

#[derive(Debug)]
pub enum Failure {
    Parse(ParseError),
    Run(run::RunError),
    Mismatch { expected: TaskKind, found: TaskKind },
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Parse(e) => e.fmt(f),
            Failure::Run(e) => e.fmt(f),
            Failure::Mismatch { expected, found } => {
                write!(f, "invalid field `task`: scenario is {:?} but the subcommand expects {:?}", found.name(), expected.name())
            }
        }
    }
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Run(run::RunError::Budget(_)) => EXIT_BUDGET,
            _ => EXIT_INPUT,
        }
    }
}

pub struct Overrides {
    pub seed: Option<u64>,
    pub budget: Option<u64>,
}

/// Parses `text`, checks it is a `kind` scenario and runs it.
pub fn run_scenario(kind: TaskKind, text: &str, o: &Overrides) -> Result<Report, Failure> {
    let sc: Scenario = parse_scenario(text).map_err(Failure::Parse)?;
    if sc.task.kind() != kind {
        return Err(Failure::Mismatch { expected: kind, found: sc.task.kind() });
    }
    let seed = o.seed.or(sc.seed).unwrap_or(run::DEFAULT_SEED);
    let budget = o.budget.or(sc.budget).unwrap_or_else(|| run::default_budget(kind));
    let out = run::execute(&sc.task, seed, budget).map_err(Failure::Run)?;
    Ok(finish(kind.name(), seed, budget, sc.params, out.results, out.ledger))
}

pub fn finish(task: &str, seed: u64, budget: u64, inputs: serde_json::Value, results: serde_json::Value, ledger: Ledger) -> Report {
    let verdict = ledger.verdict();
    Report { task: task.into(), seed, budget, inputs, results, properties: ledger.properties, verdict, elapsed_seconds: None }
}

pub fn scenario_schema() -> String {
    let mut s = serde_json::to_string_pretty(&schemars::schema_for!(ScenarioDocument)).expect("schema");
    s.push('\n');
    s
}

pub fn report_schema() -> String {
    let mut s = serde_json::to_string_pretty(&schemars::schema_for!(Report)).expect("schema");
    s.push('\n');
    s
}
