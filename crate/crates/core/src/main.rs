use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ptorsion::bounds::BoundSet;
use ptorsion::harness::{
    classical_inequality_suite, evaluate, run_fuzz, run_sequence, sequence_csv, sequence_svg, FuzzConfig,
    SequenceKind, SolveOptions, DEFAULT_L_GRID,
};
use ptorsion::parallel::{profile, steiner_slacks, WeightProfile, DEFAULT_GRID};
use ptorsion::quantitative::deficit_report;
use ptorsion::shapes::{from_descriptor, Shape};
use ptorsion::solver::rayleigh_check;
use ptorsion::Error;

#[derive(Parser)]
#[command(name = "ptorsion", version, about = "Convex bodies, weighted p-torsion and shape-functional inequalities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Metrics and the classical inequality suite for one body.
    Geometry(ShapeArgs),
    /// Inner parallel set profile as CSV.
    Profile(ShapeArgs),
    /// Web-function lower bounds.
    Bound(ShapeArgs),
    /// Finite element solve with Richardson extrapolation.
    Solve(ShapeArgs),
    /// Deficit report for the quantitative estimates.
    Deficit(ShapeArgs),
    /// Table over a thinning sequence.
    Sequence(SequenceArgs),
    /// Inequality checks on a random corpus.
    Fuzz(FuzzArgs),
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// const[:c] | linear:β | exp:λ
    #[arg(long, default_value = "const")]
    weight: WeightProfile,
    /// Intervals of the parallel-set grid.
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
}

#[derive(Args)]
struct SolveArgs {
    /// Coarsest of the three Richardson mesh sizes.
    #[arg(long)]
    h: Option<f64>,
    /// Node budget of the finest level when --h is not given.
    #[arg(long, default_value_t = 20_000)]
    nodes: usize,
}

impl SolveArgs {
    fn options(&self, grid: usize) -> SolveOptions {
        SolveOptions { finest_nodes: self.nodes, grid, h: self.h }
    }
}

#[derive(Args)]
struct ShapeArgs {
    /// Shape descriptor: a JSON file or an inline JSON object.
    shape: String,
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    solve: SolveArgs,
    /// Use this torsion value instead of solving (deficit only).
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SequenceArgs {
    #[arg(long, default_value = "rectangle")]
    kind: SequenceKind,
    /// Comma-separated parameters.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_L_GRID)]
    l: Vec<f64>,
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    solve: SolveArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct FuzzArgs {
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// How a subcommand ended when no error was raised.
enum Outcome {
    Pass,
    Violation,
}

fn load_shape(arg: &str) -> Result<Shape, Error> {
    let text = if arg.trim_start().starts_with('{') { arg.to_string() } else { fs::read_to_string(arg)? };
    from_descriptor(&text)
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Error> {
    match out {
        Some(path) => Ok(fs::write(path, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct GeometryOut<'a> {
    metrics: ptorsion::geometry::BodyMetrics,
    analytic: &'a ptorsion::shapes::AnalyticRecord,
    suite: ptorsion::harness::InequalityReport,
}

#[derive(Serialize)]
struct SolveOut {
    #[serde(rename = "T")]
    t: f64,
    t_error: f64,
    reference_t: Option<f64>,
    richardson: ptorsion::solver::RichardsonResult,
    finest: ptorsion::solver::SolveSummary,
    rayleigh_defect: f64,
    mesh: ptorsion::solver::MeshStats,
}

fn run(cli: Cli) -> Result<Outcome, Error> {
    match cli.command {
        Command::Geometry(a) => {
            let shape = load_shape(&a.shape)?;
            let suite = classical_inequality_suite(&shape.polygon, a.common.grid)?;
            let out = GeometryOut { metrics: shape.polygon.metrics(), analytic: &shape.record, suite };
            emit(&json(&out), a.out.as_ref())?;
            Ok(Outcome::Pass)
        }
        Command::Profile(a) => {
            let shape = load_shape(&a.shape)?;
            let prof = profile(&shape.polygon, a.common.weight, a.common.grid)?;
            emit(&prof.to_csv(), a.out.as_ref())?;
            let st = steiner_slacks(&prof);
            eprintln!("steiner slacks: {}", serde_json::to_string(&st).expect("serializable"));
            Ok(if ptorsion::parallel::steiner_check(&prof).is_ok() { Outcome::Pass } else { Outcome::Violation })
        }
        Command::Bound(a) => {
            let shape = load_shape(&a.shape)?;
            let prof = profile(&shape.polygon, a.common.weight, a.common.grid)?;
            let b = BoundSet::compute(&prof, a.common.p)?;
            emit(&json(&b), a.out.as_ref())?;
            Ok(if b.chain_defect() > 1e-9 { Outcome::Violation } else { Outcome::Pass })
        }
        Command::Solve(a) => {
            let shape = load_shape(&a.shape)?;
            let (f, p) = (a.common.weight, a.common.p);
            let ev = evaluate(&shape.polygon, &f, p, &a.solve.options(a.common.grid))?;
            let r = ev.richardson.finest.as_ref().expect("richardson keeps the finest solve");
            let out = SolveOut {
                t: ev.t,
                t_error: ev.t_error,
                reference_t: shape.reference_torsion(&f, p),
                finest: r.summary(),
                rayleigh_defect: rayleigh_check(r, &f, p),
                mesh: r.mesh.stats(),
                richardson: ev.richardson.clone(),
            };
            print!("{}", json(&out));
            if let Some(path) = a.out.as_ref() {
                r.write_csv(fs::File::create(path)?)?;
            }
            Ok(Outcome::Pass)
        }
        Command::Deficit(a) => {
            let shape = load_shape(&a.shape)?;
            let (f, p) = (a.common.weight, a.common.p);
            if !f.is_constant() || f.at_origin() != 1.0 {
                return Err(Error::BadParameter("deficit estimates are stated for f = 1".into()));
            }
            let report = match a.t {
                Some(t) => deficit_report(&shape.polygon, t, 0.0, p)?,
                None => evaluate(&shape.polygon, &f, p, &a.solve.options(a.common.grid))?.deficit,
            };
            emit(&json(&report), a.out.as_ref())?;
            Ok(if report.all_ok() { Outcome::Pass } else { Outcome::Violation })
        }
        Command::Sequence(a) => {
            let rows = run_sequence(a.kind, &a.l, a.common.p, &a.common.weight, &a.solve.options(a.common.grid))?;
            emit(&sequence_csv(&rows), a.out.as_ref())?;
            if let Some(path) = a.svg.as_ref() {
                fs::write(path, sequence_svg(a.kind, &rows, a.common.p))?;
            }
            let ok = rows.iter().all(|r| r.theorem2_ok && r.theorem3_ok.unwrap_or(true));
            Ok(if ok { Outcome::Pass } else { Outcome::Violation })
        }
        Command::Fuzz(a) => {
            let cfg = FuzzConfig::new(a.seed, a.n);
            let summary = run_fuzz(&cfg, &a.common.weight, a.common.p, a.common.grid)?;
            emit(&json(&summary), a.out.as_ref())?;
            if summary.violations > 0 {
                Ok(Outcome::Violation)
            } else if !summary.failures.is_empty() {
                Err(Error::BadParameter(format!("{} bodies failed", summary.failures.len())))
            } else {
                Ok(Outcome::Pass)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Violation) => ExitCode::from(2),
        Err(e @ Error::ViolationFound { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
