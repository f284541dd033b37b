//! Command-line driver: validate, solve, pareto, assess and serve.

pub mod spec;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use planopt_core::assessment::{
    assess_vectors, boiler_vector, check_bounds, derive_boiler_powers, magnitudes_vector, AssessmentError,
};
use planopt_core::io::{self, LoadError, QualitativeMapping};
use planopt_core::lp::SolveStatus;
use planopt_core::model::{solve_scenario, ModelError, ObjectiveSpec, PlanInstance, UserConstraint};
use planopt_core::pareto::{nnc_front, ParetoError, ParetoFront, ParetoRequest};

pub const EXIT_USER: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_NO_OPTIMUM: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "planopt", version, about = "Regional energy plan synthesis and assessment")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct InstanceArgs {
    /// Instance document.
    pub instance: PathBuf,
    /// Qualitative mapping override, e.g. `high=1,medium=0.5,low=0.25`.
    #[arg(long)]
    pub mapping: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check an instance document.
    Validate {
        #[command(flatten)]
        input: InstanceArgs,
    },
    /// Optimize one objective.
    Solve {
        #[command(flatten)]
        input: InstanceArgs,
        /// `min|max k1*key1 + k2*key2 ...`
        #[arg(long, allow_hyphen_values = true)]
        objective: String,
        /// `expr <=|=|>= rhs`; repeatable.
        #[arg(long = "constraint", allow_hyphen_values = true)]
        constraints: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a Pareto front.
    Pareto {
        #[command(flatten)]
        input: InstanceArgs,
        /// Objectives separated by `;`.
        #[arg(long, allow_hyphen_values = true)]
        objectives: String,
        #[arg(long)]
        points: usize,
        #[arg(long = "constraint", allow_hyphen_values = true)]
        constraints: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Assess a fixed plan.
    Assess {
        #[command(flatten)]
        input: InstanceArgs,
        /// Plan document with `magnitudes` and optional `boiler_powers`.
        #[arg(long)]
        magnitudes: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the HTTP service.
    Serve {
        /// Overrides PLANOPT_ADDR.
        #[arg(long)]
        addr: Option<String>,
    },
}

#[derive(Debug)]
pub enum CliError {
    User(String),
    Io(String),
    NoOptimum(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::User(_) => EXIT_USER,
            CliError::Io(_) => EXIT_IO,
            CliError::NoOptimum(_) => EXIT_NO_OPTIMUM,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::User(m) | CliError::Io(m) | CliError::NoOptimum(m) => m,
        }
    }
}

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Io { .. } => CliError::Io(e.to_string()),
            _ => CliError::User(e.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::NotOptimal(SolveStatus::Unbounded) => CliError::NoOptimum("unbounded".into()),
            ModelError::NotOptimal(_) => CliError::NoOptimum("infeasible".into()),
            ModelError::InvalidInstance(_) | ModelError::UnknownQuantity(_) | ModelError::EmptyExpression(_) => {
                CliError::User(e.to_string())
            }
            other => CliError::Io(other.to_string()),
        }
    }
}

impl From<ParetoError> for CliError {
    fn from(e: ParetoError) -> Self {
        match e {
            ParetoError::Infeasible { .. } | ParetoError::Unbounded(_) => CliError::NoOptimum(e.to_string()),
            ParetoError::Model(m) => m.into(),
            _ => CliError::User(e.to_string()),
        }
    }
}

impl From<AssessmentError> for CliError {
    fn from(e: AssessmentError) -> Self {
        CliError::User(e.to_string())
    }
}

/// What a command produced: a document destined for `--out` or stdout, and
/// text for the terminal.
#[derive(Debug, Default)]
pub struct Output {
    pub document: Option<String>,
    pub out: Option<PathBuf>,
    pub report: String,
    pub warnings: Vec<String>,
}

fn load(input: &InstanceArgs) -> Result<PlanInstance, CliError> {
    let mapping = input
        .mapping
        .as_deref()
        .map(QualitativeMapping::parse_overrides)
        .transpose()
        .map_err(|e| CliError::User(format!("--mapping: {e}")))?;
    Ok(io::load_instance_with(&input.instance, mapping.as_ref())?)
}

fn parse_constraints(specs: &[String]) -> Result<Vec<UserConstraint>, CliError> {
    specs
        .iter()
        .map(|s| spec::parse_constraint(s).map_err(|e| CliError::User(format!("--constraint: {e}"))))
        .collect()
}

fn check(instance: &PlanInstance, objectives: &[ObjectiveSpec], constraints: &[UserConstraint]) -> Result<(), CliError> {
    for o in objectives {
        o.check(instance).map_err(|e| CliError::User(format!("objective {:?}: {e}", o.label)))?;
    }
    for c in constraints {
        c.check(instance).map_err(|e| CliError::User(format!("constraint \"{c}\": {e}")))?;
    }
    Ok(())
}

fn cell(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e9 || v.abs() < 1e-4) {
        format!("{v:.6e}")
    } else {
        format!("{v:.6}")
    }
}

/// One row per scenario with fixed-width columns.
pub fn summary_table(front: &ParetoFront) -> String {
    let widths: Vec<usize> = front.objectives.iter().map(|o| o.label.len().max(16)).collect();
    let mut s = String::new();
    let _ = write!(s, "{:>3}  {:<12}", "#", "kind");
    for (o, w) in front.objectives.iter().zip(&widths) {
        let _ = write!(s, "  {:>w$}", o.label, w = w);
    }
    s.push('\n');
    for (i, sc) in front.scenarios.iter().enumerate() {
        let kind = match sc.kind {
            planopt_core::model::ScenarioKind::Boundary => "boundary",
            planopt_core::model::ScenarioKind::Intermediate => "intermediate",
        };
        let _ = write!(s, "{:>3}  {:<12}", i + 1, kind);
        for (o, w) in front.objectives.iter().zip(&widths) {
            let _ = write!(s, "  {:>w$}", cell(sc.objective_values[&o.label]), w = w);
        }
        s.push('\n');
    }
    let _ = writeln!(s, "dropped subproblems: {}", front.dropped);
    s
}

/// Runs every command except `serve`.
pub fn run(command: &Command) -> Result<Output, CliError> {
    match command {
        Command::Validate { input } => {
            let instance = load(input)?;
            Ok(Output {
                report: "OK\n".into(),
                warnings: instance.warnings().iter().map(ToString::to_string).collect(),
                ..Output::default()
            })
        }
        Command::Solve {
            input,
            objective,
            constraints,
            out,
        } => {
            let objective = spec::parse_objective(objective).map_err(|e| CliError::User(format!("--objective: {e}")))?;
            let constraints = parse_constraints(constraints)?;
            let instance = load(input)?;
            check(&instance, std::slice::from_ref(&objective), &constraints)?;
            let scenario = solve_scenario(&instance, &objective, &constraints)?;
            Ok(Output {
                document: Some(io::scenario_to_string(&scenario)),
                out: out.clone(),
                report: format!("{} = {}\n", objective.label, cell(scenario.objective_values[&objective.label])),
                ..Output::default()
            })
        }
        Command::Pareto {
            input,
            objectives,
            points,
            constraints,
            out,
        } => {
            let objectives =
                spec::parse_objectives(objectives).map_err(|e| CliError::User(format!("--objectives: {e}")))?;
            let constraints = parse_constraints(constraints)?;
            let instance = load(input)?;
            check(&instance, &objectives, &constraints)?;
            let request = ParetoRequest {
                objectives,
                points: *points,
                extra: constraints,
            };
            let front = nnc_front(&instance, &request)?;
            Ok(Output {
                document: Some(io::front_to_string(&front)),
                out: out.clone(),
                report: summary_table(&front),
                ..Output::default()
            })
        }
        Command::Assess { input, magnitudes, out } => {
            let instance = load(input)?;
            let plan = io::load_plan(magnitudes)?;
            let m = magnitudes_vector(&instance, &plan.magnitudes)?;
            check_bounds(&instance, &m)?;
            let b = match &plan.boiler_powers {
                Some(p) => boiler_vector(&instance, p)?,
                None => derive_boiler_powers(&instance, &m).ok_or_else(|| {
                    CliError::User("boiler_powers are required when an activity has more than one boiler".into())
                })?,
            };
            let result = assess_vectors(&instance, &m, &b)?;
            Ok(Output {
                document: Some(io::assessment_to_string(&result)),
                out: out.clone(),
                ..Output::default()
            })
        }
        Command::Serve { .. } => Err(CliError::User("serve is not a batch command".into())),
    }
}

pub fn write_output(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
