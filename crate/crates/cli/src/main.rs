use clap::{Args, Parser, Subcommand, ValueEnum};
use detgerbe::acceptance::{self, Config};
use detgerbe_cli::report::Ledger;
use detgerbe_cli::scenario::TaskKind;
use detgerbe_cli::{default_scenario, finish, report_schema, run_scenario, scenario_schema, Overrides, EXIT_INPUT, EXIT_OK, EXIT_PROPERTY};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "detgerbe", version, about = "Determinantal gerbes and gerbal representations, exactly over Q")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Scenario JSON; the built-in example for the subcommand when absent.
    #[arg(long, global = true, value_name = "FILE")]
    scenario: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Work limit of the task's dominant loop; exceeding it exits with 3.
    #[arg(long, global = true, value_name = "K", value_parser = clap::value_parser!(u64).range(1..))]
    budget: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Add wall-clock time to the report (breaks byte-identical output).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// H^n(G, M) with the solver and its oracles.
    Cohomology,
    /// d₂ and d₃ of a central extension of a normal subgroup.
    Transgress,
    /// GL~ → GL^ and the central extension by Q^×.
    CentralExt,
    /// Fock modules and canonical morphisms against det lines.
    Fock,
    /// Extract the 3-cocycle of a gerbal action on a finite category.
    Gerbal,
    /// The 3-cocycle of a gerbal pair, by formula, filtration and Rep_λ.
    Pair,
    /// The gerbal representation of GL_{∞,∞} on a sample.
    DoubleLoop,
    /// Run the acceptance criteria.
    Selftest {
        /// Comma-separated criterion ids (default: all ten).
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u8>,
    },
    /// Print the published JSON schema.
    Schema {
        #[arg(value_enum)]
        which: SchemaKind,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemaKind {
    Scenario,
    Report,
}

fn kind(c: &Command) -> Option<TaskKind> {
    Some(match c {
        Command::Cohomology => TaskKind::Cohomology,
        Command::Transgress => TaskKind::Transgression,
        Command::CentralExt => TaskKind::CentralExtension,
        Command::Fock => TaskKind::Fock,
        Command::Gerbal => TaskKind::GerbalExtract,
        Command::Pair => TaskKind::GerbalPair,
        Command::DoubleLoop => TaskKind::DoubleLoop,
        _ => return None,
    })
}

fn selftest(criteria: &[u8], seed: u64) -> detgerbe_cli::report::Report {
    let cfg = Config { seed, enlarge: 0 };
    let reports = if criteria.is_empty() { acceptance::run_all(&cfg) } else { criteria.iter().map(|&i| acceptance::run(i, &cfg)).collect() };
    let mut ledger = Ledger::default();
    let mut summary = Vec::new();
    for r in &reports {
        for c in &r.checks {
            ledger.check(&format!("criterion {}: {}", r.id, c.name), c.pass, c.detail.clone());
        }
        ledger.check(&format!("criterion {}: time limit", r.id), r.elapsed <= r.limit, format!("limit {}s", r.limit.as_secs()));
        summary.push(json!({ "id": r.id, "title": r.title, "pass": r.pass() }));
    }
    let passed = reports.iter().filter(|r| r.pass()).count();
    let results = json!({ "criteria": summary, "passed": passed, "total": reports.len() });
    finish("selftest", seed, 0, json!({ "criteria": criteria }), results, ledger)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let c = &cli.common;
    let start = Instant::now();
    let mut report = match &cli.command {
        Command::Schema { which } => {
            print!("{}", if matches!(which, SchemaKind::Scenario) { scenario_schema() } else { report_schema() });
            return ExitCode::from(EXIT_OK as u8);
        }
        Command::Selftest { criteria } => {
            if let Some(&bad) = criteria.iter().find(|&&i| !(1..=10).contains(&i)) {
                eprintln!("error: invalid field `criteria`: no criterion {bad}");
                return ExitCode::from(EXIT_INPUT as u8);
            }
            selftest(criteria, c.seed.unwrap_or(detgerbe_cli::run::DEFAULT_SEED))
        }
        cmd => {
            let k = kind(cmd).expect("task subcommand");
            let (name, text) = match &c.scenario {
                Some(p) => match std::fs::read_to_string(p) {
                    Ok(t) => (p.display().to_string(), t),
                    Err(e) => {
                        eprintln!("error: cannot read {}: {e}", p.display());
                        return ExitCode::from(EXIT_INPUT as u8);
                    }
                },
                None => (format!("<built-in {}>", k.name()), default_scenario(k).to_string()),
            };
            match run_scenario(k, &text, &Overrides { seed: c.seed, budget: c.budget }) {
                Ok(r) => r,
                Err(f) => {
                    eprintln!("error: {name}: {f}");
                    return ExitCode::from(f.exit_code() as u8);
                }
            }
        }
    };
    if c.timing {
        report.elapsed_seconds = Some(start.elapsed().as_secs_f64());
    }
    match c.format {
        Format::Json => print!("{}", report.to_json()),
        Format::Text => print!("{}", report.to_text()),
    }
    let code = if report.verdict == detgerbe_cli::report::Verdict::Pass { EXIT_OK } else { EXIT_PROPERTY };
    ExitCode::from(code as u8)
}
