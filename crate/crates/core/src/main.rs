use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cubicreg::bench::{self, BenchRow, SuiteConfig};
use cubicreg::problems::{check_problem, FD_TOL};
use cubicreg::solver::{SolveStatus, SolverRegistry, SolverSettings};
use cubicreg::{make_problem, Error};

const EXIT_ERROR: u8 = 1;
const EXIT_BUDGET: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_NO_INPUT: u8 = 66;

#[derive(Parser)]
#[command(name = "cubicreg", version, about = "Cubic-regularization solvers and benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem and append a result row.
    Run(RunArgs),
    /// Run a suite of problems and solvers over seeded starting points.
    Bench(BenchArgs),
    /// Compute a performance profile from a rows file.
    Profile(ProfileArgs),
    /// Check a problem's derivatives against finite differences.
    Check(CheckArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    problem: String,
    #[arg(long)]
    n: usize,
    /// cr, arc or arc-practical.
    #[arg(long)]
    solver: String,
    /// nag or bb.
    #[arg(long, default_value = "nag")]
    subsolver: String,
    #[arg(long, default_value_t = 1e-5)]
    eps_g: f64,
    /// Hessian Lipschitz constant; required by cr and arc.
    #[arg(long)]
    lipschitz: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    max_outer: Option<usize>,
    /// Start from the seeded perturbation of the standard point.
    #[arg(long)]
    perturb: bool,
    /// CSV file to append the result row to.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Suite description in JSON.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the suite's repetition count.
    #[arg(long)]
    reps: Option<u64>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ProfileArgs {
    #[arg(long)]
    input: PathBuf,
    /// Column to compare, e.g. n_i, n_prod, n_g or time.
    #[arg(long)]
    metric: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    problem: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn usage_code(e: &Error) -> u8 {
    match e {
        Error::MissingFlag(_) | Error::UnknownProblem { .. } | Error::UnknownStrategy { .. } | Error::Config(_) => {
            EXIT_USAGE
        }
        Error::MissingColumn(_) => EXIT_DATA,
        _ => EXIT_ERROR,
    }
}

fn run(args: RunArgs) -> Result<u8, Error> {
    let problem = make_problem(&args.problem, args.n)?;
    let mut settings = SolverSettings::new(args.eps_g);
    settings.lipschitz = args.lipschitz;
    settings.subsolver = args.subsolver.clone();
    settings.seed = args.seed;
    settings.max_outer = args.max_outer;
    let solver = SolverRegistry::default().create(&args.solver, &settings)?;
    let x0 = if args.perturb {
        bench::perturbed_start(&problem.x0(), args.seed)
    } else {
        problem.x0()
    };
    let report = solver.solve(problem.as_ref(), &x0).map_err(|e| match e {
        // Configuration problems surfacing at solve time are runtime errors here.
        Error::Config(m) => Error::Contract(m),
        other => other,
    })?;
    let label = format!("{}:{}", args.solver, args.subsolver);
    let row = BenchRow::from_report(problem.name(), args.n, &label, args.seed, &report);
    if let Some(path) = &args.out {
        bench::append_row(path, &row)?;
    }
    println!(
        "{} n={} {} status={} f={:.10e} |g|={:.3e} n_i={} n_prod={} n_f={} n_g={} n_eig={} time={:.3}s",
        row.problem,
        row.n,
        row.solver,
        row.status,
        row.f_final,
        report.grad_norm_final,
        row.n_i,
        row.n_prod,
        row.n_f,
        row.n_g,
        row.n_eig,
        row.time
    );
    Ok(match report.status {
        SolveStatus::Stationary => 0,
        SolveStatus::MaxOuter => EXIT_BUDGET,
        _ => EXIT_ERROR,
    })
}

fn bench_cmd(args: BenchArgs) -> Result<u8, Error> {
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return Ok(EXIT_NO_INPUT);
        }
    };
    let cfg = match SuiteConfig::from_json(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return Ok(EXIT_NO_INPUT);
        }
    };
    let reps = args.reps.unwrap_or(cfg.reps);
    let rows = bench::run_suite(&cfg, reps, &SolverRegistry::default())?;
    std::fs::create_dir_all(&args.out_dir)?;
    bench::write_rows(&args.out_dir.join("rows.csv"), &rows)?;
    bench::write_means(&args.out_dir.join("means.csv"), &bench::means(&rows))?;
    for metric in ["n_i", "n_prod", "n_g"] {
        let table = bench::head_to_head(&rows, metric)?;
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(args.out_dir.join(format!("wins_{metric}.csv")))?;
        for h in &table {
            w.serialize(h)?;
        }
        w.flush()?;
    }
    let solved = rows.iter().filter(|r| r.is_stationary()).count();
    println!("{} runs, {} stationary; results in {}", rows.len(), solved, args.out_dir.display());
    Ok(0)
}

fn profile_cmd(args: ProfileArgs) -> Result<u8, Error> {
    if !args.input.is_file() {
        eprintln!("error: cannot read {}", args.input.display());
        return Ok(EXIT_NO_INPUT);
    }
    let records = bench::read_metric_table(&args.input, &args.metric)?;
    let points = bench::performance_profile(&records);
    bench::write_profile_csv(&args.out, &points)?;
    if let Some(svg) = &args.svg {
        std::fs::write(svg, bench::profile_svg(&points, &args.metric))?;
    }
    println!("{} profile points written to {}", points.len(), args.out.display());
    Ok(0)
}

fn check_cmd(args: CheckArgs) -> Result<u8, Error> {
    let problem = make_problem(&args.problem, args.n)?;
    let report = check_problem(problem.as_ref(), 20, args.seed);
    println!(
        "{} n={}: worst gradient error {:.3e}, worst Hessian error {:.3e} (tolerance {:.0e})",
        problem.name(),
        args.n,
        report.worst_grad_err,
        report.worst_hess_err,
        FD_TOL
    );
    for (x, ge, he) in &report.failures {
        let head: Vec<String> = x.iter().take(6).map(|v| format!("{v:.6}")).collect();
        let more = if x.len() > 6 { ", ..." } else { "" };
        println!("FAIL at x = [{}{more}]: gradient {ge:.3e}, Hessian {he:.3e}", head.join(", "));
    }
    Ok(if report.passed() { 0 } else { EXIT_ERROR })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Bench(a) => bench_cmd(a),
        Command::Profile(a) => profile_cmd(a),
        Command::Check(a) => check_cmd(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(usage_code(&e))
        }
    }
}
