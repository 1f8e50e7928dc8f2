//! Command-line front end. The `medbounds` binary is a thin wrapper around
//! [`run`], which takes its arguments and output streams explicitly so it
//! can be driven from tests.
//!
//! Exit codes: 0 on success, 1 on data or numerical errors (the error name
//! is printed on stderr), 2 on usage errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{self, BoundInterval};
use crate::canonical::implied_observed;
use crate::error::{Error, Result};
use crate::estimand::EstimandId;
use crate::inference::{bootstrap_bounds, BootstrapConfig};
use crate::lp::{self, ExactObserved};
use crate::observed::{estimate_distribution, total_effect, ObservedDistribution, RecordTable};
use crate::report::{write_reports_csv, BootstrapReport, BoundReport};
use crate::simulation::{
    dirichlet_study, sample_counterfactuals, vertex_sweep, vertex_sweep_cross_check, SimulationConfig, SweepMethod,
    VertexCell, VertexTable,
};

/// Limits from two methods that differ by more than this count as a mismatch.
pub const AGREEMENT_TOL: f64 = 1e-7;

#[derive(Debug, Parser)]
#[command(name = "medbounds", version, about = "Sharp bounds for mediation effects with two sequential binary mediators")]
struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, env = "MEDBOUNDS_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Bound one or more estimands from a record CSV or probability JSON.
    Bounds(BoundsArgs),
    /// Compare every closed form with the LP on random observed laws.
    Verify(VerifyArgs),
    /// Tabulate the bounds over all deterministic response types.
    Vertices(VerticesArgs),
    /// Dirichlet simulation study.
    Simulate(SimulateArgs),
    /// Percentile bootstrap intervals for the bound endpoints.
    Bootstrap(BootstrapArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BoundsMethod {
    /// Closed form where one exists, LP otherwise.
    Auto,
    Closed,
    Lp,
    /// Both methods; exits 1 if they disagree.
    Both,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    /// `.csv` with columns x,m1,m2,y or `.json` with cell probabilities.
    #[arg(long)]
    input: PathBuf,
    /// Estimand names, comma separated, or `all`.
    #[arg(long, required = true, value_delimiter = ',', value_parser = parse_selection)]
    estimand: Vec<Vec<EstimandId>>,
    #[arg(long, value_enum, default_value_t = BoundsMethod::Auto)]
    method: BoundsMethod,
    /// Solve the LP in rational arithmetic.
    #[arg(long)]
    exact: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Also write the reports to a `.json` or `.csv` file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long)]
    seed: u64,
    /// Dirichlet concentration for the counterfactual draws.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = AGREEMENT_TOL)]
    tolerance: f64,
    /// Also cross-check the vertex sweep of every closed form.
    #[arg(long)]
    vertices: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VertexMethod {
    Auto,
    Closed,
    Lp,
    /// Closed form and LP; exits 1 on any disagreement.
    Cross,
}

#[derive(Debug, Args)]
struct VerticesArgs {
    #[arg(long, value_parser = parse_estimand)]
    estimand: EstimandId,
    #[arg(long, value_enum, default_value_t = VertexMethod::Auto)]
    method: VertexMethod,
    /// Write the table to a `.json` or `.csv` file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Dirichlet concentrations, comma separated.
    #[arg(long, required = true, value_delimiter = ',')]
    alphas: Vec<f64>,
    /// Draws per concentration.
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: u64,
    /// Defaults to NDE-000, JNIE-1, MS2NIE1-11, NIE2-100.
    #[arg(long, value_delimiter = ',', value_parser = parse_selection)]
    estimands: Vec<Vec<EstimandId>>,
    /// Per-draw rows, `.csv` or `.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-level summary, `.csv` or `.json`.
    #[arg(long)]
    summary_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BootstrapArgs {
    /// Record CSV with columns x,m1,m2,y.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = parse_estimand)]
    estimand: EstimandId,
    #[arg(long, default_value_t = 2000)]
    replicates: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_estimand(s: &str) -> std::result::Result<EstimandId, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_selection(s: &str) -> std::result::Result<Vec<EstimandId>, String> {
    if s.trim().eq_ignore_ascii_case("all") {
        Ok(EstimandId::all())
    } else {
        parse_estimand(s).map(|e| vec![e])
    }
}

/// What a command produced, collected before anything is written so that
/// the work can run inside a thread pool.
#[derive(Debug, Default)]
struct Outcome {
    stdout: Vec<u8>,
    stderr: Vec<u8>,
    code: i32,
}

impl Outcome {
    fn json<T: Serialize + ?Sized>(value: &T) -> Result<Self> {
        let mut stdout = serde_json::to_vec_pretty(value)?;
        stdout.push(b'\n');
        Ok(Self {
            stdout,
            ..Self::default()
        })
    }

    fn text(s: String) -> Self {
        Self {
            stdout: (s + "\n").into_bytes(),
            ..Self::default()
        }
    }

    fn fail(mut self, message: String) -> Self {
        self.stderr.extend_from_slice(message.as_bytes());
        self.stderr.push(b'\n');
        self.code = 1;
        self
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                2
            } else {
                let _ = write!(stdout, "{}", e.render());
                0
            };
            return code;
        }
    };

    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: InvalidConfig: thread pool: {e}");
            return 2;
        }
    };

    match pool.install(|| dispatch(cli.command)) {
        Ok(outcome) => {
            let _ = stdout.write_all(&outcome.stdout);
            let _ = stderr.write_all(&outcome.stderr);
            let _ = stdout.flush();
            outcome.code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {}: {e}", e.name());
            1
        }
    }
}

fn dispatch(command: Command) -> Result<Outcome> {
    match command {
        Command::Bounds(a) => cmd_bounds(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Vertices(a) => cmd_vertices(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Bootstrap(a) => cmd_bootstrap(a),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FileKind {
    Json,
    Csv,
}

fn file_kind(path: &Path) -> Result<FileKind> {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("json") => Ok(FileKind::Json),
        Some("csv") => Ok(FileKind::Csv),
        _ => Err(Error::InvalidConfig(format!(
            "cannot tell the format of `{}`; use a .json or .csv extension",
            path.display()
        ))),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_json_file<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn write_csv_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(create(path)?);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    match file_kind(path)? {
        FileKind::Json => write_json_file(path, rows),
        FileKind::Csv => write_csv_rows(path, rows),
    }
}

enum Input {
    Records(RecordTable),
    Probabilities(ObservedDistribution),
}

impl Input {
    fn load(path: &Path) -> Result<Self> {
        match file_kind(path) {
            Ok(FileKind::Csv) => Ok(Input::Records(RecordTable::from_csv_path(path)?)),
            Ok(FileKind::Json) => Ok(Input::Probabilities(ObservedDistribution::from_json_path(path)?)),
            Err(_) => Err(Error::MalformedInput(format!(
                "input `{}` must be a .csv record file or a .json probability file",
                path.display()
            ))),
        }
    }

    fn distribution(&self) -> Result<ObservedDistribution> {
        match self {
            Input::Records(t) => estimate_distribution(t),
            Input::Probabilities(d) => Ok(*d),
        }
    }

    fn exact(&self) -> Result<ExactObserved> {
        match self {
            Input::Records(t) => ExactObserved::from_counts(&t.counts()),
            Input::Probabilities(d) => ExactObserved::from_distribution(d),
        }
    }
}

struct BoundsRun {
    reports: Vec<BoundReport>,
    /// Rational LP limits, kept for the text output.
    exact: Vec<Option<(String, String)>>,
    mismatches: Vec<String>,
}

fn cmd_bounds(a: BoundsArgs) -> Result<Outcome> {
    let input = Input::load(&a.input)?;
    let dist = input.distribution()?;
    let exact = if a.exact { Some(input.exact()?) } else { None };
    let estimands: Vec<EstimandId> = a.estimand.into_iter().flatten().collect();

    let lp_bound = |e: EstimandId| -> Result<(BoundInterval, Option<(String, String)>)> {
        match &exact {
            Some(x) => {
                let iv = lp::sharp_bounds_lp_exact(x, e)?;
                let text = (iv.lower.to_string(), iv.upper.to_string());
                Ok((iv.to_bound(), Some(text)))
            }
            None => Ok((lp::sharp_bounds_lp(&dist, e)?, None)),
        }
    };

    let mut run = BoundsRun {
        reports: Vec::new(),
        exact: Vec::new(),
        mismatches: Vec::new(),
    };
    for e in estimands {
        let closed_available = e == EstimandId::Te || bounds::has_closed_form(e);
        let use_closed = match a.method {
            BoundsMethod::Closed | BoundsMethod::Both => true,
            BoundsMethod::Auto => closed_available,
            BoundsMethod::Lp => false,
        };
        let use_lp = match a.method {
            BoundsMethod::Lp | BoundsMethod::Both => true,
            BoundsMethod::Auto => !closed_available,
            BoundsMethod::Closed => false,
        };
        let closed = if use_closed {
            let b = bounds::closed_form_bounds(&dist, e)?;
            run.reports.push(BoundReport::new(e, &b));
            run.exact.push(None);
            Some(b)
        } else {
            None
        };
        if use_lp {
            let (b, text) = lp_bound(e)?;
            run.reports.push(BoundReport::new(e, &b));
            run.exact.push(text);
            if let Some(c) = closed {
                let diff = (c.lower - b.lower).abs().max((c.upper - b.upper).abs());
                if diff > AGREEMENT_TOL {
                    run.mismatches.push(format!(
                        "mismatch: {e} closed-form ({}, {}) vs lp ({}, {})",
                        c.lower, c.upper, b.lower, b.upper
                    ));
                }
            }
        }
    }

    if let Some(path) = &a.out {
        match file_kind(path)? {
            FileKind::Json => write_json_file(path, &run.reports)?,
            FileKind::Csv => write_reports_csv(&run.reports, create(path)?)?,
        }
    }

    let mut outcome = match a.format {
        Format::Json if run.reports.len() == 1 => Outcome::json(&run.reports[0])?,
        Format::Json => Outcome::json(&run.reports)?,
        Format::Text => {
            let mut lines = vec![format!("TE {:.4}", total_effect(&dist))];
            for (r, x) in run.reports.iter().zip(&run.exact) {
                lines.push(r.to_text());
                if let Some((lo, hi)) = x {
                    lines.push(format!("{:<12} exact        [{lo}, {hi}]", ""));
                }
            }
            Outcome::text(lines.join("\n"))
        }
    };
    if !run.mismatches.is_empty() {
        outcome = outcome.fail(run.mismatches.join("\n"));
    }
    Ok(outcome)
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    samples: usize,
    seed: u64,
    alpha: f64,
    tolerance: f64,
    estimands: Vec<EstimandId>,
    comparisons: usize,
    max_abs_diff: f64,
    mismatches: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    vertex_checks: Vec<VertexCheck>,
    passed: bool,
}

#[derive(Debug, Serialize)]
struct VertexCheck {
    estimand: EstimandId,
    mismatches: usize,
}

fn cmd_verify(a: VerifyArgs) -> Result<Outcome> {
    if a.samples == 0 {
        return Err(Error::InvalidConfig("samples must be at least 1".into()));
    }
    let estimands = EstimandId::with_closed_form();
    let qs = sample_counterfactuals(a.alpha, a.samples, a.seed)?;
    let diffs: Vec<f64> = qs
        .par_iter()
        .map(|q| {
            let obs = implied_observed(q);
            estimands
                .iter()
                .map(|&e| {
                    let c = bounds::closed_form_bounds(&obs, e)?;
                    let l = lp::sharp_bounds_lp(&obs, e)?;
                    Ok((c.lower - l.lower).abs().max((c.upper - l.upper).abs()))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let mismatches = diffs.iter().filter(|d| **d > a.tolerance).count();
    let vertex_checks = if a.vertices {
        estimands
            .iter()
            .map(|&e| {
                Ok(VertexCheck {
                    estimand: e,
                    mismatches: vertex_sweep_cross_check(e)?.2,
                })
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let passed = mismatches == 0 && vertex_checks.iter().all(|v| v.mismatches == 0);
    let report = VerifyReport {
        samples: a.samples,
        seed: a.seed,
        alpha: a.alpha,
        tolerance: a.tolerance,
        comparisons: diffs.len(),
        max_abs_diff: diffs.iter().copied().fold(0.0, f64::max),
        mismatches,
        estimands,
        vertex_checks,
        passed,
    };
    let outcome = Outcome::json(&report)?;
    Ok(if passed {
        outcome
    } else {
        outcome.fail(format!(
            "verification failed: {} of {} comparisons exceed {}",
            report.mismatches, report.comparisons, report.tolerance
        ))
    })
}

#[derive(Debug, Serialize)]
struct VertexReport {
    estimand: EstimandId,
    method: &'static str,
    total: u64,
    cells: Vec<VertexCell>,
    widths: std::collections::BTreeMap<i8, u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mismatches: Option<usize>,
}

impl VertexReport {
    fn new(t: &VertexTable, method: &'static str, mismatches: Option<usize>) -> Self {
        Self {
            estimand: t.estimand,
            method,
            total: t.total(),
            cells: t.cells(),
            widths: t.width_counts(),
            mismatches,
        }
    }
}

fn cmd_vertices(a: VerticesArgs) -> Result<Outcome> {
    let (table, name, mismatches) = match a.method {
        VertexMethod::Auto => (vertex_sweep(a.estimand, SweepMethod::Auto)?, "auto", None),
        VertexMethod::Closed => (vertex_sweep(a.estimand, SweepMethod::ClosedForm)?, "closed-form", None),
        VertexMethod::Lp => (vertex_sweep(a.estimand, SweepMethod::Lp)?, "lp", None),
        VertexMethod::Cross => {
            let (closed, _, m) = vertex_sweep_cross_check(a.estimand)?;
            (closed, "cross", Some(m))
        }
    };
    let report = VertexReport::new(&table, name, mismatches);

    let outcome = match &a.out {
        Some(path) => {
            match file_kind(path)? {
                FileKind::Json => write_json_file(path, &report)?,
                FileKind::Csv => {
                    let mut w = create(path)?;
                    table.write_csv(&mut w)?;
                    w.flush()?;
                }
            }
            Outcome::default()
        }
        None => Outcome::json(&report)?,
    };
    Ok(match mismatches {
        Some(m) if m > 0 => outcome.fail(format!("{m} vertices where closed form and LP disagree")),
        _ => outcome,
    })
}

#[derive(Debug, Serialize)]
struct SimulateReport<'a> {
    seed: u64,
    n: usize,
    alphas: &'a [f64],
    estimands: &'a [EstimandId],
    redraws: usize,
    summary: &'a [crate::simulation::SummaryRow],
}

fn cmd_simulate(a: SimulateArgs) -> Result<Outcome> {
    let estimands: Vec<EstimandId> = if a.estimands.is_empty() {
        EstimandId::decomposition_terms().to_vec()
    } else {
        a.estimands.into_iter().flatten().collect()
    };
    let config = SimulationConfig {
        alpha_levels: a.alphas,
        n_per_level: a.n,
        seed: a.seed,
        estimands,
    };
    let out = dirichlet_study(&config)?;
    if let Some(path) = &a.out {
        write_rows(path, &out.rows)?;
    }
    if let Some(path) = &a.summary_out {
        write_rows(path, &out.summary)?;
    }
    Outcome::json(&SimulateReport {
        seed: config.seed,
        n: config.n_per_level,
        alphas: &config.alpha_levels,
        estimands: &config.estimands,
        redraws: out.redraws,
        summary: &out.summary,
    })
}

fn cmd_bootstrap(a: BootstrapArgs) -> Result<Outcome> {
    let records = match Input::load(&a.input)? {
        Input::Records(t) => t,
        Input::Probabilities(_) => {
            return Err(Error::MalformedInput(
                "bootstrap needs row-level records (a .csv file)".into(),
            ))
        }
    };
    let config = BootstrapConfig {
        replicates: a.replicates,
        level: a.level,
        seed: a.seed,
    };
    let report = BootstrapReport::from(&bootstrap_bounds(&records, a.estimand, &config)?);
    if let Some(path) = &a.out {
        write_json_file(path, &report)?;
    }
    match a.format {
        Format::Json => Outcome::json(&report),
        Format::Text => Ok(Outcome::text(report.to_text())),
    }
}
