//! `vfold` — exact Milnor numbers, Whitney regularity along arcs,
//! vanishing folds, and fold-inducing coordinate changes for polynomial
//! families, driven by a family-description file.
//!
//! Exit codes: 0 when every verdict is determined, 2 when some verdict is
//! blocked by the truncation order, 1 on errors.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use vfold_cli::bundled::{bundled, NAMES};
use vfold_cli::familyspec::{parse_family_spec, FamilySpec, Task, TaskSpec};
use vfold_cli::report::{run_report_filtered, Overrides, Report, ReportStatus};

#[derive(Parser)]
#[command(
    name = "vfold",
    about = "Milnor numbers, Whitney regularity and vanishing folds for polynomial families",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// Path to a family-description file
    #[arg(value_name = "FILE", conflicts_with = "bundled")]
    file: Option<PathBuf>,
    /// Use a bundled family instead of a file (briancon-speder, coalescing)
    #[arg(long, value_name = "NAME")]
    bundled: Option<String>,
    /// Override the truncation order for series work
    #[arg(long)]
    order: Option<u64>,
    /// Override the degree cap for local Milnor computations
    #[arg(long)]
    cap: Option<usize>,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Milnor-number tasks (mu-weighted, mu-local, mu-profile, section)
    Mu {
        #[command(flatten)]
        input: Input,
    },
    /// Whitney condition (a)/(b') limits along an arc
    Whitney {
        #[command(flatten)]
        input: Input,
        /// Arc name (defaults to the file's whitney tasks)
        #[arg(long)]
        arc: Option<String>,
    },
    /// Vanishing-fold test along an arc
    Fold {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        arc: Option<String>,
    },
    /// Build and verify the fold-inducing change of variables from an arc
    Transform {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        arc: Option<String>,
    },
    /// Numeric kink search on a specialized fibre
    Radius {
        #[command(flatten)]
        input: Input,
        /// Parameter values, e.g. `--at 1` or `--at 1,2`
        #[arg(long)]
        at: Option<String>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the file's full task list
    Report {
        #[command(flatten)]
        input: Input,
    },
}

fn load(input: &Input) -> Result<FamilySpec, String> {
    let text = match (&input.file, &input.bundled) {
        (Some(path), None) => std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?,
        (None, Some(name)) => bundled(name)
            .map(str::to_string)
            .ok_or_else(|| format!("no bundled family `{name}` (available: {})", NAMES.join(", ")))?,
        _ => return Err("give a file path or --bundled NAME".to_string()),
    };
    parse_family_spec(&text).map_err(|e| e.to_string())
}

fn overrides(input: &Input, budget: Option<usize>, epsilon: Option<f64>, seed: Option<u64>) -> Overrides {
    Overrides {
        order: input.order,
        cap: input.cap,
        budget,
        epsilon,
        seed,
    }
}

fn emit(report: &Report, format: Format) -> ExitCode {
    match format {
        Format::Text => print!("{}", report.to_text()),
        Format::Json => print!("{}", report.to_json()),
    }
    match report.status() {
        ReportStatus::AllDetermined => ExitCode::SUCCESS,
        ReportStatus::Undetermined => ExitCode::from(2),
        ReportStatus::Errored => ExitCode::from(1),
    }
}

fn filter_tasks(spec: &FamilySpec, keep: &[&str]) -> Vec<Task> {
    spec.tasks
        .iter()
        .filter(|t| keep.contains(&t.spec.kind()))
        .cloned()
        .collect()
}

/// Tasks for an arc-centred subcommand: the file's own tasks of that kind,
/// or a synthesized one when `--arc` names an arc directly.
fn arc_tasks(
    spec: &FamilySpec,
    kind: &str,
    arc: Option<String>,
    make: impl Fn(String) -> TaskSpec,
) -> Result<Vec<Task>, String> {
    if let Some(name) = arc {
        if spec.arc(&name).is_none() {
            return Err(format!("no arc named `{name}` in the family file"));
        }
        return Ok(vec![Task {
            spec: make(name),
            note: None,
            line: 0,
        }]);
    }
    let tasks = filter_tasks(spec, &[kind]);
    if tasks.is_empty() {
        return Err(format!(
            "the file declares no `{kind}` task; pass --arc NAME to run one directly"
        ));
    }
    Ok(tasks)
}

fn run() -> Result<ExitCode, String> {
    let cli = Cli::parse();
    Ok(match cli.command {
        Command::Mu { input } => {
            let spec = load(&input)?;
            let tasks = filter_tasks(&spec, &["mu-weighted", "mu-local", "mu-profile", "section"]);
            if tasks.is_empty() {
                return Err("the file declares no Milnor-number tasks".to_string());
            }
            let report = run_report_filtered(&spec, &tasks, &overrides(&input, None, None, None));
            emit(&report, input.format)
        }
        Command::Whitney { input, arc } => {
            let spec = load(&input)?;
            let tasks = arc_tasks(&spec, "whitney", arc, |arc| TaskSpec::Whitney { arc })?;
            let report = run_report_filtered(&spec, &tasks, &overrides(&input, None, None, None));
            emit(&report, input.format)
        }
        Command::Fold { input, arc } => {
            let spec = load(&input)?;
            let tasks = arc_tasks(&spec, "fold", arc, |arc| TaskSpec::Fold { arc })?;
            let report = run_report_filtered(&spec, &tasks, &overrides(&input, None, None, None));
            emit(&report, input.format)
        }
        Command::Transform { input, arc } => {
            let spec = load(&input)?;
            let tasks = arc_tasks(&spec, "transform", arc, |arc| TaskSpec::Transform { arc })?;
            let report = run_report_filtered(&spec, &tasks, &overrides(&input, None, None, None));
            emit(&report, input.format)
        }
        Command::Radius {
            input,
            at,
            epsilon,
            budget,
            seed,
        } => {
            let spec = load(&input)?;
            let tasks = if let Some(at_text) = at {
                let values = at_text
                    .split(',')
                    .map(|p| vfold_cli::familyspec::parse_rational(p, 0))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| format!("bad rational in --at `{at_text}`"))?;
                vec![Task {
                    spec: TaskSpec::Radius {
                        at: values,
                        epsilon: epsilon.unwrap_or(1.0),
                        budget,
                        seed,
                    },
                    note: None,
                    line: 0,
                }]
            } else {
                let tasks = filter_tasks(&spec, &["radius"]);
                if tasks.is_empty() {
                    return Err(
                        "the file declares no `radius` task; pass --at VALUES to run one".to_string()
                    );
                }
                tasks
            };
            let report =
                run_report_filtered(&spec, &tasks, &overrides(&input, budget, epsilon, seed));
            emit(&report, input.format)
        }
        Command::Report { input } => {
            let spec = load(&input)?;
            let report = run_report_filtered(&spec, &spec.tasks, &overrides(&input, None, None, None));
            emit(&report, input.format)
        }
    })
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}
