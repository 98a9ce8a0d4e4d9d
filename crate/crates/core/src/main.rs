use clap::{Args, Parser, Subcommand, ValueEnum};
use green_transition::emit::{render, Format};
use green_transition::run::{run, Command, RunError};
use green_transition::scenario::{parse_scenario, ScenarioError, SeedState};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "green-transition", version, about = "Green/brown transition dynamics under social-norm preferences")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate the scenario's tax policy period by period.
    Simulate(Common),
    /// List and classify the fixed points of the share map.
    FixedPoints(Common),
    /// Compare the green and brown steady states.
    SteadyState(Common),
    /// Compute tax thresholds, the minimal constant tax and a removable schedule.
    Policy(Common),
    /// Track fixed points across a parameter grid.
    Sweep(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SeedArg {
    BrownSse,
    Pristine,
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the scenario's tax rate.
    #[arg(long)]
    tau: Option<f64>,
    /// Override the initial levels state.
    #[arg(long, value_enum)]
    seed_state: Option<SeedArg>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::FixedPoints(a) => (Command::FixedPoints, a),
        Cmd::SteadyState(a) => (Command::SteadyState, a),
        Cmd::Policy(a) => (Command::Policy, a),
        Cmd::Sweep(a) => (Command::Sweep, a),
    };
    ExitCode::from(execute(command, &args))
}

fn fail(code: u8, msg: impl std::fmt::Display) -> u8 {
    eprintln!("error: {msg}");
    code
}

fn write_output(args: &Common, text: &str) -> Result<(), u8> {
    match &args.out {
        Some(path) => std::fs::write(path, text).map_err(|e| fail(1, format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(command: Command, args: &Common) -> u8 {
    let text = match std::fs::read_to_string(&args.scenario) {
        Ok(t) => t,
        Err(e) => return fail(2, format!("cannot read {}: {e}", args.scenario.display())),
    };
    let mut doc = match parse_scenario(&text) {
        Ok(doc) => doc,
        Err(e @ (ScenarioError::Syntax(_) | ScenarioError::Invalid(_))) => return fail(2, e),
    };
    if let Some(tau) = args.tau {
        doc.override_tau(tau);
    }
    if let Some(seed) = args.seed_state {
        doc.initial.seed = match seed {
            SeedArg::BrownSse => SeedState::BrownSse,
            SeedArg::Pristine => SeedState::Pristine,
        };
        doc.initial.b_prev = None;
        doc.initial.h_prev = None;
    }
    let format = match args.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    match run(command, &doc) {
        Ok(result) => match write_output(args, &render(&result, format)) {
            Ok(()) => 0,
            Err(code) => code,
        },
        Err(RunError::Infeasible(report)) => {
            let body = serde_json::json!({ "status": "infeasible", "error": report.to_string(), "report": report });
            let mut out = serde_json::to_string_pretty(&body).expect("report serializes");
            out.push('\n');
            if let Err(code) = write_output(args, &out) {
                return code;
            }
            fail(3, report)
        }
        Err(e) => {
            let code = e.exit_code() as u8;
            fail(code, e)
        }
    }
}
