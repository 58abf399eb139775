use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use blocktri::kalman::{self, LinearGaussianModel};
use blocktri::report;
use blocktri::sim::{self, Conditioning, MeasPattern, ModelParams, Scenario};
use blocktri::spectral::{self, ProcessOnlySystem, SpectralReport};
use blocktri::{Algorithm, BlockTriSystem, Error};

const EXIT_NOT_PD: u8 = 3;
const EXIT_IO: u8 = 4;
const EXIT_DISAGREE: u8 = 5;

/// Block tridiagonal solvers and Kalman smoothing diagnostics.
#[derive(Parser)]
#[command(name = "blocktri", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a scenario (preset or seeded random model) as JSON.
    Simulate(SimulateArgs),
    /// Solve a scenario with one algorithm and print a run report.
    Solve(SolveArgs),
    /// Eigenvalue and singular-value bounds with the weakest-link diagnosis.
    Bounds(InputArgs),
    /// Run every solver and recursion on a scenario and compare them.
    Compare(CompareArgs),
    /// Run the toy-example regression and a seeded comparison suite.
    PaperCheck(FormatArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// List presets and exit.
    #[arg(long)]
    list: bool,
    /// Named preset (see --list).
    #[arg(long, conflicts_with_all = ["seed", "n", "big_n"])]
    preset: Option<String>,
    /// With --preset toy6: the variant with the last coupling reduced.
    #[arg(long, requires = "preset")]
    stabilized: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// State dimension.
    #[arg(long)]
    n: Option<usize>,
    /// Number of steps.
    #[arg(long = "N", id = "big_n")]
    big_n: Option<usize>,
    #[arg(long, default_value = "mixed")]
    m_pattern: MeasPattern,
    #[arg(long, default_value = "well")]
    conditioning: Conditioning,
    /// Rank-deficient process matrices.
    #[arg(long)]
    singular_process: bool,
    /// Output path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct FormatArgs {
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct InputArgs {
    /// Scenario, system or model JSON.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    format: FormatArgs,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value = "fbt")]
    algorithm: Algorithm,
    /// Run the two-worker variant (mf, hybrid).
    #[arg(long)]
    parallel: bool,
    /// Write per-pivot spectra as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write solution blocks as CSV (k, x1..xn).
    #[arg(long)]
    estimates: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    parallel: bool,
}

/// Accept a scenario document, a bare system or a bare model.
fn load_scenario(path: &Path) -> blocktri::Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let name = path
        .file_stem()
        .map_or("input".into(), |s| s.to_string_lossy().into_owned());
    if value.get("name").is_some() {
        return Scenario::from_json(&text);
    }
    let bare = |model: Option<LinearGaussianModel>, system: Option<BlockTriSystem>| Scenario {
        name: name.clone(),
        seed: 0,
        model,
        system,
        expected: Default::default(),
    };
    if value.get("diag").is_some() {
        Ok(bare(None, Some(BlockTriSystem::from_json(&text)?)))
    } else {
        Ok(bare(Some(LinearGaussianModel::from_json(&text)?), None))
    }
}

fn emit<T: serde::Serialize>(format: Format, value: &T, text: impl FnOnce() -> String) -> blocktri::Result<()> {
    let mut out = std::io::stdout().lock();
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(value)?)?,
        Format::Text => write!(out, "{}", text())?,
    }
    Ok(())
}

fn simulate(args: SimulateArgs) -> blocktri::Result<ExitCode> {
    if args.list {
        for (name, about) in sim::PRESETS {
            println!("{name:<16} {about}");
        }
        return Ok(ExitCode::SUCCESS);
    }
    let scenario = match &args.preset {
        Some(name) if args.stabilized => {
            if name != "toy6" {
                return Err(Error::BadParameters("--stabilized applies to toy6 only".into()));
            }
            sim::toy_section6(true)
        }
        Some(name) => sim::preset(name)?,
        None => {
            let (Some(n), Some(big_n)) = (args.n, args.big_n) else {
                return Err(Error::BadParameters("give --preset or both --n and --N".into()));
            };
            sim::random_model(ModelParams {
                seed: args.seed.unwrap_or(0),
                n,
                big_n,
                meas: args.m_pattern,
                conditioning: args.conditioning,
                singular_process: args.singular_process,
            })?
        }
    };
    match args.out {
        Some(path) => scenario.save(path)?,
        None => println!("{}", scenario.to_json()?),
    }
    Ok(ExitCode::SUCCESS)
}

fn solve(args: SolveArgs) -> blocktri::Result<ExitCode> {
    let scenario = load_scenario(&args.input.input)?;
    let sys = scenario.system()?;
    let (sol, rep) = report::run_solve(&scenario.name, &sys, args.algorithm, args.parallel)?;
    if let Some(path) = &args.trace {
        sol.trace.save_csv(path)?;
    }
    if let Some(path) = &args.estimates {
        kalman::save_estimates_csv(&sol.e, path)?;
    }
    emit(args.input.format.format, &rep, || rep.to_text())?;
    Ok(ExitCode::SUCCESS)
}

fn bounds_text(r: &SpectralReport) -> String {
    let num = |v: f64| blocktri::linalg::fmt_shortest(v);
    let opt = |x: Option<f64>| x.map_or("-".to_string(), num);
    let rows = [
        ("lambda_min", num(r.lambda_min)),
        ("lambda_max", num(r.lambda_max)),
        ("kappa", num(r.kappa)),
        ("bound_lower", opt(r.bound_lower)),
        ("bound_upper", opt(r.bound_upper)),
        ("sv_bound_lower", opt(r.sv_bound_lower)),
        ("sv_bound_upper", opt(r.sv_bound_upper)),
        ("condition_bound", opt(r.condition_bound)),
        ("weakest_link_bound", opt(r.weakest_link_bound)),
        (
            "weakest_link_suspect",
            r.weakest_link_suspect.map_or("-".into(), |b| b.to_string()),
        ),
        ("argmax_block", r.argmax_block.map_or("-".into(), |k| k.to_string())),
    ];
    rows.iter().map(|(k, v)| format!("{k:<22} {v:>24}\n")).collect()
}

fn bounds(args: InputArgs) -> blocktri::Result<ExitCode> {
    let scenario = load_scenario(&args.input)?;
    let rep = match &scenario.model {
        Some(model) => {
            let pos = ProcessOnlySystem::from_model(model)?;
            let rep = spectral::spectral_report(&pos)?;
            if rep.condition_bound.is_none() {
                eprintln!("warning: {}", Error::VacuousBound);
            }
            rep
        }
        None => {
            eprintln!("warning: no process structure; reporting the measured spectrum only");
            spectral::system_report(&scenario.system()?)?
        }
    };
    emit(args.format.format, &rep, || bounds_text(&rep))?;
    Ok(ExitCode::SUCCESS)
}

fn compare(args: CompareArgs) -> blocktri::Result<ExitCode> {
    let scenario = load_scenario(&args.input.input)?;
    let rep = report::compare(&scenario, args.parallel)?;
    emit(args.input.format.format, &rep, || rep.to_text())?;
    Ok(if rep.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_DISAGREE)
    })
}

fn paper_check(args: FormatArgs) -> blocktri::Result<ExitCode> {
    let rep = report::paper_check()?;
    emit(args.format, &rep, || rep.to_text())?;
    Ok(if rep.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_DISAGREE)
    })
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::PivotNotPositiveDefinite { .. }
        | Error::CovarianceNotPD { .. }
        | Error::CombinedNotPD { .. } => EXIT_NOT_PD,
        Error::Io(_)
        | Error::Json(_)
        | Error::Csv(_)
        | Error::DimensionMismatch(_)
        | Error::NotSymmetric { .. }
        | Error::BadParameters(_) => EXIT_IO,
        Error::IdentityViolation { .. } => EXIT_DISAGREE,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Solve(a) => solve(a),
        Command::Bounds(a) => bounds(a),
        Command::Compare(a) => compare(a),
        Command::PaperCheck(a) => paper_check(a),
    };
    result.unwrap_or_else(|err| {
        eprintln!("error: {err}");
        ExitCode::from(exit_code(&err))
    })
}
