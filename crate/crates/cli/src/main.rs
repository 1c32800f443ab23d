use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use storyline_core::crossings::total_crossings;
use storyline_core::generate::{generate_instance, GenParams};
use storyline_core::heuristics::{greedy_baseline, improve, initial_slicing, SliceConfig};
use storyline_core::io::bench::{run_bench, write_csv, BenchManifest};
use storyline_core::io::book::convert_book;
use storyline_core::io::{
    instance_to_string, parse_instance, read_solution, render_svg, solution_to_string, CurveStyle, IoError,
    RenderSpec, SolutionReport,
};
use storyline_core::models::{build_model, write_lp, Formulation, ModelOptions};
use storyline_core::solver::{solve_exact, SolveError, SolveOptions, SolveStatus};
use storyline_core::{validate, StorylineInstance};

mod code {
    pub const IO: u8 = 1;
    pub const TIMEOUT: u8 = 2;
    pub const SEMANTIC: u8 = 3;
    pub const PARSE: u8 = 4;
    pub const BACKEND: u8 = 5;
    pub const USAGE: u8 = 64;
}

#[derive(Parser)]
#[command(name = "storyline", version, about = "Crossing minimization for storyline drawings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance to optimality with an integer program.
    Solve(SolveArgs),
    /// Compute a heuristic drawing.
    Heuristic(HeuristicArgs),
    /// Validate a solution file and recount its crossings.
    Check { instance: PathBuf, solution: PathBuf },
    /// Render a solution as SVG.
    Render(RenderArgs),
    /// Run a benchmark manifest and write per-run CSV rows.
    Bench(BenchArgs),
    /// Generate a random instance.
    Gen(GenArgs),
    /// Convert a GraphBase-style book file to an instance file.
    Convert {
        book: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

impl Toggle {
    fn on(self) -> bool {
        matches!(self, Toggle::On)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormulationArg {
    Lin,
    Qdr,
    Plo,
}

impl From<FormulationArg> for Formulation {
    fn from(f: FormulationArg) -> Self {
        match f {
            FormulationArg::Lin => Formulation::Lin,
            FormulationArg::Qdr => Formulation::Qdr,
            FormulationArg::Plo => Formulation::Plo,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "plo")]
    formulation: FormulationArg,
    #[arg(long, value_enum, default_value = "on")]
    sbc: Toggle,
    #[arg(long, value_enum, default_value = "off")]
    init: Toggle,
    #[arg(long, value_enum, default_value = "off")]
    rnd: Toggle,
    /// Seconds.
    #[arg(long, default_value_t = 3600.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Solver backend; defaults to $STORYLINE_BACKEND, then highs.
    #[arg(long)]
    backend: Option<String>,
    /// Solution file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Store the solve time in the solution file.
    #[arg(long)]
    record_time: bool,
    /// Also write the model (without solving it) in LP format.
    #[arg(long)]
    lp: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Slicing,
    Greedy,
    Improve,
}

#[derive(Args)]
struct HeuristicArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "slicing")]
    method: Method,
    /// Layers per slicing window.
    #[arg(long, default_value_t = 30)]
    window: usize,
    /// Layers committed per slicing window.
    #[arg(long, default_value_t = 5)]
    stride: usize,
    /// Seconds per slicing window.
    #[arg(long, default_value_t = 3600.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    backend: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    instance: PathBuf,
    solution: PathBuf,
    #[arg(long, value_enum, default_value = "orthogonal")]
    style: StyleArg,
    #[arg(long, default_value_t = 60.0)]
    column_width: f64,
    #[arg(long, default_value_t = 20.0)]
    row_gap: f64,
    #[arg(long)]
    no_labels: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StyleArg {
    Orthogonal,
    Smooth,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// CSV file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fill the time column; off by default so reruns are byte-identical.
    #[arg(long)]
    record_time: bool,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    layers: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    min_interactions: usize,
    #[arg(long, default_value_t = 2)]
    max_interactions: usize,
    #[arg(long, default_value_t = 1)]
    min_size: usize,
    #[arg(long, default_value_t = 3)]
    max_size: usize,
    /// Probability that a layer repeats the previous one.
    #[arg(long, default_value_t = 0.3)]
    repeat: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        let code = match e {
            IoError::Io { .. } => code::IO,
            IoError::Syntax { .. } => code::PARSE,
            _ => code::SEMANTIC,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        let code = match e {
            SolveError::InvalidOptions(_) | SolveError::Infeasible(_) => code::SEMANTIC,
            SolveError::CapabilityMismatch { .. } | SolveError::Backend(_) => code::BACKEND,
            SolveError::NoSolution(_) => code::TIMEOUT,
        };
        Failure::new(code, e.to_string())
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::new(code::IO, format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::new(code::IO, e.to_string())),
    }
}

fn solve(a: SolveArgs) -> Result<u8, Failure> {
    let inst = parse_instance(&a.instance)?;
    let formulation = Formulation::from(a.formulation);
    if let Some(lp) = &a.lp {
        let model = build_model(
            &inst,
            formulation,
            &ModelOptions {
                sbc: a.sbc.on(),
                fixed: Vec::new(),
            },
        );
        emit(Some(lp), &write_lp(&model))?;
    }
    let opts = SolveOptions {
        sbc: a.sbc.on(),
        init: a.init.on(),
        rnd: a.rnd.on(),
        time_limit: a.time_limit,
        seed: a.seed,
        backend: a.backend,
        ..SolveOptions::default()
    };
    let (d, report) = solve_exact(&inst, formulation, &opts)?;
    eprintln!(
        "{} crossings, status {}, bound {}, {} rounds, {} LOP rows, {:.3}s",
        report.best_crossings,
        report.status.name(),
        report.bound,
        report.separation_rounds,
        report.lop_added,
        report.wall_time
    );
    let file = SolutionReport::from_solve(formulation.name(), &report, a.record_time);
    emit(a.out.as_deref(), &solution_to_string(&inst, &d, &file))?;
    Ok(match report.status {
        SolveStatus::Optimal => 0,
        _ => code::TIMEOUT,
    })
}

fn heuristic(a: HeuristicArgs) -> Result<u8, Failure> {
    let inst = parse_instance(&a.instance)?;
    let (d, name) = match a.method {
        Method::Greedy => (greedy_baseline(&inst), "greedy"),
        Method::Improve => (improve(&inst, &greedy_baseline(&inst)), "improve"),
        Method::Slicing => {
            let cfg = SliceConfig::new(a.window, a.stride).map_err(|e| Failure::new(code::SEMANTIC, e))?;
            let opts = SolveOptions {
                time_limit: a.time_limit,
                seed: a.seed,
                backend: a.backend,
                ..SolveOptions::default()
            };
            let (d, outcome) = initial_slicing(&inst, &cfg, &opts);
            if let Some(why) = &outcome.fallback {
                eprintln!("slicing fell back to the greedy baseline: {why}");
            }
            info!("{} windows, all optimal: {}", outcome.windows, outcome.all_optimal);
            (improve(&inst, &d), "slicing")
        }
    };
    let k = total_crossings(&inst, &d).map_err(|e| Failure::new(code::SEMANTIC, e.to_string()))?.total;
    eprintln!("{k} crossings");
    emit(a.out.as_deref(), &solution_to_string(&inst, &d, &SolutionReport::heuristic(name, k)))?;
    Ok(0)
}

fn check(instance: &Path, solution: &Path) -> Result<u8, Failure> {
    let inst = parse_instance(instance)?;
    let (d, report) = read_solution(solution, &inst)?;
    debug_assert!(validate(&inst, &d).is_empty());
    println!("valid, {} crossings ({})", report.crossings, report.status.name());
    Ok(0)
}

fn render(a: RenderArgs) -> Result<u8, Failure> {
    let inst = parse_instance(&a.instance)?;
    let (d, _) = read_solution(&a.solution, &inst)?;
    let spec = RenderSpec {
        column_width: a.column_width,
        row_gap: a.row_gap,
        style: match a.style {
            StyleArg::Orthogonal => CurveStyle::Orthogonal,
            StyleArg::Smooth => CurveStyle::Smooth,
        },
        labels: !a.no_labels,
        ..RenderSpec::default()
    };
    let svg = render_svg(&inst, &d, &spec).map_err(|e| Failure::new(code::SEMANTIC, e.to_string()))?;
    emit(a.out.as_deref(), &svg)?;
    Ok(0)
}

fn bench(a: BenchArgs) -> Result<u8, Failure> {
    let manifest = BenchManifest::load(&a.manifest)?;
    let base = a.manifest.parent().unwrap_or(Path::new("."));
    let (rows, summary) = run_bench(&manifest, base);
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf, a.record_time).map_err(|e| Failure::new(code::IO, e.to_string()))?;
    emit(a.out.as_deref(), &String::from_utf8(buf).expect("csv is utf-8"))?;
    eprint!("{}", summary.to_text());
    Ok(0)
}

fn gen(a: GenArgs) -> Result<u8, Failure> {
    let params = GenParams {
        n: a.n,
        layers: a.layers,
        interactions: (a.min_interactions, a.max_interactions),
        size: (a.min_size, a.max_size),
        repeat: a.repeat,
    };
    let inst: StorylineInstance =
        generate_instance(&params, a.seed).map_err(|e| Failure::new(code::SEMANTIC, e.to_string()))?;
    emit(a.out.as_deref(), &instance_to_string(&inst))?;
    Ok(0)
}

fn convert(book: &Path, out: Option<&Path>) -> Result<u8, Failure> {
    let text = std::fs::read_to_string(book).map_err(|e| Failure::new(code::IO, format!("{}: {e}", book.display())))?;
    let (inst, summary) = convert_book(&text).map_err(|e| {
        let code = match e {
            storyline_core::io::book::BookError::Syntax { .. } => code::PARSE,
            _ => code::SEMANTIC,
        };
        Failure::new(code, e.to_string())
    })?;
    eprintln!(
        "{} characters, {} layers, {} empty chapters skipped, {} cliques merged",
        inst.num_chars(),
        inst.num_layers(),
        summary.skipped_chapters,
        summary.merged_cliques
    );
    emit(out, &instance_to_string(&inst))?;
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { code::USAGE } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Heuristic(a) => heuristic(a),
        Command::Check { instance, solution } => check(&instance, &solution),
        Command::Render(a) => render(a),
        Command::Bench(a) => bench(a),
        Command::Gen(a) => gen(a),
        Command::Convert { book, out } => convert(&book, out.as_deref()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
