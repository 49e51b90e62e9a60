//! Benchmark harness: result rows, CSV files, suite grids and aggregation.

mod compare;
mod profile;

pub use compare::{head_to_head, HeadToHead};
pub use profile::{performance_profile, profile_svg, read_metric_table, write_profile_csv, MetricRecord, ProfilePoint};

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::problems::make_problem;
use crate::solver::{SolveReport, SolverRegistry, SolverSettings};

/// Column order of every emitted row file.
pub const BENCH_COLUMNS: [&str; 14] = [
    "problem", "n", "solver", "seed", "f_final", "n_i", "n_prod", "n_f", "n_g", "n_eig", "time", "time_eig",
    "time_loop", "status",
];

/// Scale of the uniform perturbation applied to standard starting points.
pub const PERTURBATION: f64 = 0.1;

/// One solve, flattened for CSV output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub problem: String,
    pub n: usize,
    pub solver: String,
    pub seed: u64,
    pub f_final: f64,
    pub n_i: u64,
    pub n_prod: u64,
    pub n_f: u64,
    pub n_g: u64,
    pub n_eig: u64,
    pub time: f64,
    pub time_eig: f64,
    pub time_loop: f64,
    pub status: String,
}

impl BenchRow {
    pub fn from_report(problem: &str, n: usize, solver: &str, seed: u64, report: &SolveReport) -> Self {
        let c = &report.counters;
        Self {
            problem: problem.to_string(),
            n,
            solver: solver.to_string(),
            seed,
            f_final: report.f_final,
            n_i: report.outer_iterations() as u64,
            n_prod: c.n_prod,
            n_f: c.n_f,
            n_g: c.n_g,
            n_eig: c.n_eig,
            time: c.time_total,
            time_eig: c.time_eig,
            time_loop: c.time_loop(),
            status: report.status.as_str().to_string(),
        }
    }

    /// Row for a cell whose solve returned an error.
    fn failed(problem: &str, n: usize, solver: &str, seed: u64) -> Self {
        Self {
            problem: problem.to_string(),
            n,
            solver: solver.to_string(),
            seed,
            f_final: f64::NAN,
            n_i: 0,
            n_prod: 0,
            n_f: 0,
            n_g: 0,
            n_eig: 0,
            time: 0.0,
            time_eig: 0.0,
            time_loop: 0.0,
            status: "error".to_string(),
        }
    }

    pub fn is_stationary(&self) -> bool {
        self.status == "stationary"
    }

    fn record(&self) -> [String; 14] {
        // 17 significant digits round-trip every finite double exactly.
        let fl = |v: f64| format!("{v:.16e}");
        [
            self.problem.clone(),
            self.n.to_string(),
            self.solver.clone(),
            self.seed.to_string(),
            fl(self.f_final),
            self.n_i.to_string(),
            self.n_prod.to_string(),
            self.n_f.to_string(),
            self.n_g.to_string(),
            self.n_eig.to_string(),
            fl(self.time),
            fl(self.time_eig),
            fl(self.time_loop),
            self.status.clone(),
        ]
    }
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

/// Writes a header and all rows to `path`, replacing any existing file.
pub fn write_rows(path: &Path, rows: &[BenchRow]) -> Result<()> {
    let mut w = writer(File::create(path)?);
    w.write_record(BENCH_COLUMNS)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

/// Appends one row, writing the header first when the file is new or empty.
pub fn append_row(path: &Path, row: &BenchRow) -> Result<()> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut w = writer(file);
    if fresh {
        w.write_record(BENCH_COLUMNS)?;
    }
    w.write_record(row.record())?;
    w.flush()?;
    Ok(())
}

pub fn read_rows(path: &Path) -> Result<Vec<BenchRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    for col in BENCH_COLUMNS {
        if !headers.iter().any(|h| h == col) {
            return Err(Error::MissingColumn(col.to_string()));
        }
    }
    let mut rows = Vec::new();
    for rec in r.deserialize() {
        rows.push(rec?);
    }
    Ok(rows)
}

/// Per-(problem, n, solver) averages of a row set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanRow {
    pub problem: String,
    pub n: usize,
    pub solver: String,
    pub reps: usize,
    pub solved: usize,
    pub f_final: f64,
    pub n_i: f64,
    pub n_prod: f64,
    pub n_f: f64,
    pub n_g: f64,
    pub n_eig: f64,
    pub time: f64,
    pub time_eig: f64,
    pub time_loop: f64,
}

pub fn means(rows: &[BenchRow]) -> Vec<MeanRow> {
    let mut groups: BTreeMap<(String, usize, String), Vec<&BenchRow>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.problem.clone(), r.n, r.solver.clone())).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((problem, n, solver), g)| {
            let k = g.len() as f64;
            let avg = |f: &dyn Fn(&BenchRow) -> f64| g.iter().map(|r| f(r)).sum::<f64>() / k;
            MeanRow {
                problem,
                n,
                solver,
                reps: g.len(),
                solved: g.iter().filter(|r| r.is_stationary()).count(),
                f_final: avg(&|r| r.f_final),
                n_i: avg(&|r| r.n_i as f64),
                n_prod: avg(&|r| r.n_prod as f64),
                n_f: avg(&|r| r.n_f as f64),
                n_g: avg(&|r| r.n_g as f64),
                n_eig: avg(&|r| r.n_eig as f64),
                time: avg(&|r| r.time),
                time_eig: avg(&|r| r.time_eig),
                time_loop: avg(&|r| r.time_loop),
            }
        })
        .collect()
}

pub fn write_means(path: &Path, means: &[MeanRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    for m in means {
        w.serialize(m)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteProblem {
    pub name: String,
    pub n: usize,
    /// Overrides the suite-wide Lipschitz constant for this problem.
    #[serde(default)]
    pub lipschitz: Option<f64>,
}

/// Benchmark grid read from a JSON document.
///
/// Solver entries are either a solver name (`"arc-practical"`) or a name and
/// subsolver joined by a colon (`"arc-practical:bb"`); the entry string is
/// used verbatim as the `solver` column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub problems: Vec<SuiteProblem>,
    pub solvers: Vec<String>,
    pub eps_g: f64,
    #[serde(default = "default_reps")]
    pub reps: u64,
    #[serde(default)]
    pub lipschitz: Option<f64>,
    #[serde(default)]
    pub max_outer: Option<usize>,
}

fn default_reps() -> u64 {
    10
}

impl SuiteConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SuiteConfig = serde_json::from_str(text)?;
        if cfg.problems.is_empty() || cfg.solvers.is_empty() {
            return Err(Error::Config("suite needs at least one problem and one solver".into()));
        }
        if !(cfg.eps_g > 0.0) {
            return Err(Error::Config(format!("eps_g must be positive, got {}", cfg.eps_g)));
        }
        Ok(cfg)
    }
}

/// Splits `"solver:subsolver"` into its parts; the subsolver defaults to `nag`.
pub fn parse_solver_label(label: &str) -> (&str, &str) {
    match label.split_once(':') {
        Some((s, sub)) => (s, sub),
        None => (label, "nag"),
    }
}

/// Standard starting point plus a seeded uniform perturbation in
/// `PERTURBATION * [-1, 1]^n`.
pub fn perturbed_start(x0: &[f64], seed: u64) -> Vec<f64> {
    let mut rng = linalg::rng_from_seed(seed);
    let u = linalg::uniform_vector(x0.len(), -1.0, 1.0, &mut rng);
    x0.iter().zip(&u).map(|(a, b)| a + PERTURBATION * b).collect()
}

/// Thread cap from `CUBICREG_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var("CUBICREG_THREADS").ok()?.trim().parse().ok().filter(|&t| t > 0)
}

/// Runs every (problem, solver, seed) cell of the suite, seeds `1..=reps`.
/// Cells run in parallel; the returned rows are sorted by
/// `(problem, n, solver, seed)`.
pub fn run_suite(cfg: &SuiteConfig, reps: u64, registry: &SolverRegistry) -> Result<Vec<BenchRow>> {
    // Validate every name and setting once before spending time on the grid.
    for p in &cfg.problems {
        make_problem(&p.name, p.n)?;
        for label in &cfg.solvers {
            registry.create(parse_solver_label(label).0, &settings_for(cfg, p, label, 1))?;
        }
    }
    let cells: Vec<(&SuiteProblem, &String, u64)> = cfg
        .problems
        .iter()
        .flat_map(|p| cfg.solvers.iter().flat_map(move |s| (1..=reps).map(move |seed| (p, s, seed))))
        .collect();
    let run = || -> Vec<BenchRow> {
        cells
            .par_iter()
            .map(|&(p, label, seed)| run_cell(cfg, p, label, seed, registry))
            .collect()
    };
    let mut rows = match thread_cap() {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };
    rows.sort_by(|a, b| {
        (&a.problem, a.n, &a.solver, a.seed).cmp(&(&b.problem, b.n, &b.solver, b.seed))
    });
    Ok(rows)
}

fn settings_for(cfg: &SuiteConfig, p: &SuiteProblem, label: &str, seed: u64) -> SolverSettings {
    let mut s = SolverSettings::new(cfg.eps_g);
    s.subsolver = parse_solver_label(label).1.to_string();
    s.lipschitz = p.lipschitz.or(cfg.lipschitz);
    s.seed = seed;
    s.max_outer = cfg.max_outer;
    s
}

fn run_cell(cfg: &SuiteConfig, p: &SuiteProblem, label: &str, seed: u64, registry: &SolverRegistry) -> BenchRow {
    let attempt = || -> Result<BenchRow> {
        let problem = make_problem(&p.name, p.n)?;
        let solver = registry.create(parse_solver_label(label).0, &settings_for(cfg, p, label, seed))?;
        let x0 = perturbed_start(&problem.x0(), seed);
        let report = solver.solve(problem.as_ref(), &x0)?;
        Ok(BenchRow::from_report(problem.name(), p.n, label, seed, &report))
    };
    attempt().unwrap_or_else(|e| {
        log::warn!("{} n={} {label} seed {seed}: {e}", p.name, p.n);
        BenchRow::failed(&p.name, p.n, label, seed)
    })
}
