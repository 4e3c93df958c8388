use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ucform::formulations::step_functions;
use ucform::harness::{generate_instance, measure_gap, run_benchmark, BenchConfig, CSV_HEADER};
use ucform::oracle::{certify_with_guard, DEFAULT_SIZE_GUARD};
use ucform::{
    build, read_mps, validate_instance, write_lp, write_mps, Backend, Base, CommandTemplate, FormulationChoice, Instance,
    Mode, Model, SolveConfig, StartupKind,
};

/// Tolerance at which `oracle` reports agreement.
const AGREEMENT_TOL: f64 = 1e-6;

#[derive(Parser)]
#[command(name = "ucform", version, about = "Unit commitment models with interchangeable start-up cost formulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance file and print OK.
    Validate { instance: PathBuf },
    /// Write the model of an instance as MPS or LP.
    Build {
        instance: PathBuf,
        #[command(flatten)]
        choice: ChoiceArgs,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "mps")]
        format: Format,
    },
    /// Solve an instance or an MPS file.
    Solve {
        /// An instance JSON, or a model when the name ends in `.mps`.
        input: PathBuf,
        #[command(flatten)]
        choice: ChoiceArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Solve the LP relaxation only.
        #[arg(long)]
        lp: bool,
        /// Print every variable value.
        #[arg(long)]
        values: bool,
    },
    /// Integrality gaps as CSV.
    Gap {
        instance: PathBuf,
        /// Comma-separated formulations; all four when absent.
        #[arg(long, value_delimiter = ',')]
        formulations: Vec<StartupKind>,
        #[arg(long, default_value_t = 0.0)]
        ktol: f64,
        #[arg(long, default_value = "basic")]
        base: Base,
        #[arg(long, default_value_t = 0.0)]
        gap: f64,
        #[arg(long, default_value_t = ucform::solver::DEFAULT_TIME_LIMIT)]
        time_limit: f64,
        #[arg(long, default_value = "reference")]
        backend: String,
    },
    /// Run a benchmark described by a JSON config.
    Bench {
        config: PathBuf,
        /// Directory for gaps.csv, summary.csv and report.json; the gap CSV
        /// goes to standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print the per-unit step approximations as JSON.
    Approx {
        instance: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        ktol: f64,
    },
    /// Compare all formulations at exact costs with schedule enumeration.
    Oracle {
        instance: PathBuf,
        #[arg(long, default_value = "basic")]
        base: Base,
        /// Largest number of unit-periods to enumerate.
        #[arg(long, default_value_t = DEFAULT_SIZE_GUARD)]
        guard: usize,
    },
    /// Write a synthetic instance.
    Generate {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        units: usize,
        #[arg(long, default_value_t = 24)]
        horizon: usize,
        #[arg(long, default_value_t = 0.3)]
        volatility: f64,
        #[arg(long)]
        network: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ChoiceArgs {
    #[arg(long, short = 'f', default_value = "temp")]
    formulation: StartupKind,
    #[arg(long, default_value_t = 0.0)]
    ktol: f64,
    #[arg(long, default_value = "basic")]
    base: Base,
}

#[derive(Args)]
struct SolverArgs {
    /// `reference`, or a command template with `{input}` and `{output}`.
    #[arg(long, default_value = "reference")]
    backend: String,
    /// Relative gap target.
    #[arg(long)]
    gap: Option<f64>,
    #[arg(long, default_value_t = ucform::solver::DEFAULT_TIME_LIMIT)]
    time_limit: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Mps,
    Lp,
}

enum Failure {
    Usage(String),
    Data(String),
    Solve(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Solve(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Solve(m) => m,
        }
    }
}

fn data<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Data(e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    let inst = Instance::from_path(path).map_err(data)?;
    let violations = validate_instance(&inst);
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Failure::Data(format!("invalid instance:\n  {}", list.join("\n  "))));
    }
    Ok(inst)
}

fn backend(text: &str) -> Result<Backend, Failure> {
    if text.trim() == "reference" {
        Ok(Backend::Reference)
    } else {
        CommandTemplate::parse(text).map(Backend::External).map_err(|e| Failure::Usage(e.to_string()))
    }
}

fn write_out(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Data(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Validate { instance } => {
            load_instance(&instance)?;
            println!("OK");
        }
        Command::Build {
            instance,
            choice,
            out,
            format,
        } => {
            let inst = load_instance(&instance)?;
            let built = build(&inst, &FormulationChoice::new(choice.base, choice.formulation, choice.ktol)).map_err(data)?;
            let text = match format {
                Format::Mps => write_mps(&built.model).map_err(data)?,
                Format::Lp => write_lp(&built.model),
            };
            write_out(out.as_deref(), &text)?;
        }
        Command::Solve {
            input,
            choice,
            solver,
            lp,
            values,
        } => solve_command(&input, &choice, &solver, lp, values)?,
        Command::Gap {
            instance,
            formulations,
            ktol,
            base,
            gap,
            time_limit,
            backend: text,
        } => {
            let inst = load_instance(&instance)?;
            let config = SolveConfig::new(Mode::Mip, gap, time_limit, backend(&text)?).map_err(|e| Failure::Usage(e.to_string()))?;
            let kinds = if formulations.is_empty() {
                StartupKind::ALL.to_vec()
            } else {
                formulations
            };
            let id = instance.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            println!("{CSV_HEADER}");
            let mut unsolved = 0;
            for kind in kinds {
                let row = measure_gap(&id, &inst, &FormulationChoice::new(base, kind, ktol), &config).map_err(data)?;
                if !row.solved() {
                    unsolved += 1;
                }
                println!("{}", row.csv_line());
            }
            if unsolved > 0 {
                return Err(Failure::Solve(format!("{unsolved} formulation(s) not solved to the gap target")));
            }
        }
        Command::Bench { config, out, threads } => {
            let mut cfg = BenchConfig::from_path(&config).map_err(data)?;
            if let Some(t) = threads {
                cfg.threads = t;
            }
            let report = run_benchmark(&cfg).map_err(data)?;
            match out {
                Some(dir) => {
                    report.write_to(&dir).map_err(data)?;
                    print!("{}", report.summary_csv());
                }
                None => print!("{}", report.to_csv()),
            }
        }
        Command::Approx { instance, ktol } => {
            if !(ktol >= 0.0 && ktol.is_finite()) {
                return Err(Failure::Usage(format!("--ktol must be finite and >= 0, got {ktol}")));
            }
            let inst = load_instance(&instance)?;
            let units: Vec<_> = inst
                .units
                .iter()
                .zip(step_functions(&inst, ktol))
                .map(|(u, f)| json!({ "unit": u.id, "steps": f.steps() }))
                .collect();
            let doc = json!({ "ktol": ktol, "units": units });
            println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
        }
        Command::Oracle { instance, base, guard } => {
            let inst = load_instance(&instance)?;
            let report = certify_with_guard(&inst, base, guard).map_err(data)?;
            println!("{}", report.to_json());
            if !report.agrees(AGREEMENT_TOL) {
                return Err(Failure::Solve(format!(
                    "formulations disagree with the enumeration (max deviation {:e})",
                    report.max_deviation
                )));
            }
        }
        Command::Generate {
            seed,
            units,
            horizon,
            volatility,
            network,
            out,
        } => {
            if units == 0 || horizon < 2 {
                return Err(Failure::Usage("need at least 1 unit and 2 periods".into()));
            }
            let inst = generate_instance(seed, units, horizon, volatility, network);
            write_out(out.as_deref(), &(inst.to_json_string() + "\n"))?;
        }
    }
    Ok(())
}

fn is_mps(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("mps"))
}

fn solve_command(input: &Path, choice: &ChoiceArgs, solver: &SolverArgs, lp: bool, values: bool) -> Result<(), Failure> {
    let model: Model = if is_mps(input) {
        let text = fs::read_to_string(input).map_err(|e| Failure::Data(format!("{}: {e}", input.display())))?;
        read_mps(&text).map_err(data)?
    } else {
        let inst = load_instance(input)?;
        build(&inst, &FormulationChoice::new(choice.base, choice.formulation, choice.ktol))
            .map_err(data)?
            .model
    };
    let mode = if lp { Mode::LpRelaxation } else { Mode::Mip };
    let gap = solver.gap.unwrap_or(ucform::solver::DEFAULT_GAP);
    let config = SolveConfig::new(mode, gap, solver.time_limit, backend(&solver.backend)?).map_err(|e| Failure::Usage(e.to_string()))?;
    let sol = ucform::solve(&model, &config);
    println!("status: {}", sol.status);
    println!("objective: {}", sol.objective);
    println!("best_bound: {}", sol.best_bound);
    println!("nodes: {}", sol.nodes);
    if let Some(m) = &sol.message {
        println!("message: {m}");
    }
    if values && !sol.values.is_empty() {
        for (var, v) in model.variables().iter().zip(&sol.values) {
            println!("{} {v}", var.name);
        }
    }
    if sol.status.has_solution() {
        Ok(())
    } else {
        Err(Failure::Solve(format!("no solution: {}", sol.status)))
    }
}
