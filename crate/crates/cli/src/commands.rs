use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use otrelax::harness::{
    rows_to_csv, run_replication, sort_rows, summarize, summary_to_csv, ExperimentConfig,
    ExperimentRow,
};
use otrelax::measure::{sample_factor_model, sample_standard_normal, FactorModelParams};
use otrelax::ot::{solve_ot, CostMatrix};
use otrelax::otr::{solve_relaxed, Method};
use otrelax::stats::{
    confidence_radius, confidence_radius_refined, optimized_zeta, optimized_zeta_bound,
    BoundInputs, BoundReport, UnitCube,
};
use otrelax::{CostSpec, RelaxedProblem};
use rayon::prelude::*;

use crate::config::ConfigFile;
use crate::error::{CliError, Result};
use crate::io::{read_measure, write_map, write_measure, write_plan, write_text};
use crate::number::sig;
use crate::plot::render_svg;

#[derive(Debug, Parser)]
#[command(
    name = "otrelax",
    version,
    about = "Optimal transport, its delta-relaxation, and concentration bounds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal transport cost between two measure files.
    Ot(OtArgs),
    /// Relaxed transport cost G_delta.
    Otr(OtrArgs),
    /// Confidence radius for G_0 from n samples (upper bounds only).
    Bound(BoundArgs),
    /// Estimation experiment on the Gaussian factor model.
    Experiment(ExperimentArgs),
    /// Writes a sampled measure file.
    Sample(SampleArgs),
}

#[derive(Debug, Args)]
pub struct OtArgs {
    #[arg(long)]
    pub mu: PathBuf,
    #[arg(long)]
    pub nu: PathBuf,
    /// euclid, sqeuclid or power:K.
    #[arg(long)]
    pub cost: CostSpec,
    /// Writes the optimal plan as `i,j,mass`.
    #[arg(long)]
    pub plan: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Auto,
    Generic,
    Closed,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Auto => Method::Auto,
            MethodArg::Generic => Method::Generic,
            MethodArg::Closed => Method::Closed,
        }
    }
}

#[derive(Debug, Args)]
pub struct OtrArgs {
    #[arg(long)]
    pub mu: PathBuf,
    #[arg(long)]
    pub nu: PathBuf,
    #[arg(long)]
    pub delta: f64,
    /// euclid (distance both ways), sqeuclid (squared distance both ways),
    /// or power:K (distance to nu, distance^K for the ball).
    #[arg(long)]
    pub cost: CostSpec,
    #[arg(long, value_enum, default_value = "auto")]
    pub method: MethodArg,
    /// Writes the relaxed map as `y_idx,w_idx,x1..xd,mass`.
    #[arg(long)]
    pub map: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long)]
    pub n: Option<u64>,
    /// Failure probability.
    #[arg(long)]
    pub rho: f64,
    /// Chaining cut-off.
    #[arg(long)]
    pub zeta: f64,
    /// Metric power of the ball cost.
    #[arg(long, default_value_t = 1.0)]
    pub k: f64,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Dimension of the unit cube holding the samples.
    #[arg(long)]
    pub dim: u32,
    /// Multiplier for k = 1 (must exceed 1).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Use the tighter integral for connected, centered spaces.
    #[arg(long)]
    pub refined: bool,
    /// Also report the bound with the cut-off chosen in closed form (dim > 2).
    #[arg(long)]
    pub optimized: bool,
    /// CSV sweep, `n=100,1000,...` or `delta=0.1,0.01,...`.
    #[arg(long)]
    pub grid: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Preset {
    Desk,
    Paper,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// JSON overriding preset fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "desk")]
    pub preset: Preset,
    /// Directory receiving rows.csv, summary.csv and plot.svg.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Model {
    /// Standard normal.
    Normal,
    /// Correlated Gaussian factor model.
    Factor,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, value_enum)]
    pub model: Model,
    #[arg(long)]
    pub dim: usize,
    #[arg(long)]
    pub n: usize,
    /// Factor loading, factor model only.
    #[arg(long, default_value_t = 0.8)]
    pub rho: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Runs a parsed command and returns what goes to stdout.
pub fn dispatch(command: Command) -> Result<String> {
    match command {
        Command::Ot(args) => ot(args),
        Command::Otr(args) => otr(args),
        Command::Bound(args) => bound(args),
        Command::Experiment(args) => experiment(args),
        Command::Sample(args) => sample(args),
    }
}

fn ot(args: OtArgs) -> Result<String> {
    let mu = read_measure(&args.mu)?;
    let nu = read_measure(&args.nu)?;
    let plan = solve_ot(&mu, &nu, &CostMatrix::from_measures(&mu, &nu, args.cost)?)?;
    if let Some(path) = &args.plan {
        write_plan(path, &plan)?;
    }
    Ok(format!("value {}\n", sig(plan.value)))
}

/// The `(c̃, c)` pair a `--cost` flag selects.
pub fn relaxed_costs(spec: CostSpec) -> (CostSpec, CostSpec) {
    match spec {
        CostSpec::EuclideanPower(k) if k > 1.0 => (CostSpec::EUCLIDEAN, spec),
        _ => (spec, spec),
    }
}

fn otr(args: OtrArgs) -> Result<String> {
    let mu = read_measure(&args.mu)?;
    let nu = read_measure(&args.nu)?;
    let (ctilde, c) = relaxed_costs(args.cost);
    let problem = RelaxedProblem::new(mu, nu, args.delta, ctilde, c)?;
    let solution = solve_relaxed(&problem, args.method.into())?;
    if let Some(path) = &args.map {
        write_map(path, &solution.map_points, problem.mu0.dim())?;
    }
    Ok(format!(
        "G_delta {}\nlambda_star {}\nG_0 {}\n",
        sig(solution.value),
        sig(solution.lambda_star),
        sig(solution.g0)
    ))
}

enum Sweep {
    N(Vec<u64>),
    Delta(Vec<f64>),
}

fn parse_grid(spec: &str) -> Result<Sweep> {
    let bad = || {
        CliError::Usage(format!(
            "--grid expects n=A,B,... or delta=A,B,..., got {spec:?}"
        ))
    };
    let (key, values) = spec.split_once('=').ok_or_else(bad)?;
    let values: Vec<&str> = values
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .collect();
    if values.is_empty() {
        return Err(bad());
    }
    match key.trim() {
        "n" => values
            .iter()
            .map(|v| v.parse().map_err(|_| bad()))
            .collect::<Result<_>>()
            .map(Sweep::N),
        "delta" => values
            .iter()
            .map(|v| v.parse().map_err(|_| bad()))
            .collect::<Result<_>>()
            .map(Sweep::Delta),
        _ => Err(bad()),
    }
}

struct BoundRow {
    n: u64,
    delta: f64,
    report: BoundReport,
    optimized: Option<(f64, f64)>,
}

fn bound_row(args: &BoundArgs, n: u64, delta: f64) -> Result<BoundRow> {
    let inputs =
        BoundInputs::unit_cube(args.dim, n, args.rho, args.zeta, args.k, delta, args.lambda)?;
    let report = if args.refined {
        confidence_radius_refined(&inputs)?
    } else {
        confidence_radius(&inputs)?
    };
    let optimized = if args.optimized {
        let cube = UnitCube { dim: args.dim };
        let h = cube.h_constant();
        let eps = optimized_zeta_bound(n, args.rho, args.dim, report.k_lambda, cube.diameter(), h)?;
        Some((eps, optimized_zeta(n, args.dim, h)))
    } else {
        None
    };
    Ok(BoundRow {
        n,
        delta,
        report,
        optimized,
    })
}

fn bound(args: BoundArgs) -> Result<String> {
    let need = |what: &str| CliError::Usage(format!("bound needs --{what}"));
    let mut out = String::new();
    if let Some(grid) = &args.grid {
        let rows: Vec<BoundRow> = match parse_grid(grid)? {
            Sweep::N(ns) => {
                let delta = args.delta.ok_or_else(|| need("delta"))?;
                ns.into_iter()
                    .map(|n| bound_row(&args, n, delta))
                    .collect::<Result<_>>()?
            }
            Sweep::Delta(deltas) => {
                let n = args.n.ok_or_else(|| need("n"))?;
                deltas
                    .into_iter()
                    .map(|d| bound_row(&args, n, d))
                    .collect::<Result<_>>()?
            }
        };
        out.push_str("n,delta,lambda,K_lambda,epsilon_upper,q_k,radius_upper");
        if args.optimized {
            out.push_str(",epsilon_optimized_upper,zeta_optimized");
        }
        out.push('\n');
        for row in rows {
            let r = row.report;
            let _ = write!(
                out,
                "{},{},{},{},{},{},{}",
                row.n,
                sig(row.delta),
                sig(r.lambda_used),
                sig(r.k_lambda),
                sig(r.epsilon),
                sig(r.q_k),
                sig(r.radius)
            );
            if let Some((eps, zeta)) = row.optimized {
                let _ = write!(out, ",{},{}", sig(eps), sig(zeta));
            }
            out.push('\n');
        }
        return Ok(out);
    }
    let row = bound_row(
        &args,
        args.n.ok_or_else(|| need("n"))?,
        args.delta.ok_or_else(|| need("delta"))?,
    )?;
    let r = row.report;
    let _ = writeln!(out, "note all values are upper bounds, not estimates");
    let _ = writeln!(
        out,
        "epsilon_form {}",
        if args.refined { "refined" } else { "plain" }
    );
    let _ = writeln!(out, "lambda {}", sig(r.lambda_used));
    let _ = writeln!(out, "K_lambda {}", sig(r.k_lambda));
    let _ = writeln!(out, "epsilon_upper_bound {}", sig(r.epsilon));
    let _ = writeln!(out, "q_k {}", sig(r.q_k));
    let _ = writeln!(out, "radius_upper_bound {}", sig(r.radius));
    let _ = writeln!(out, "coverage {}", sig(r.coverage));
    if let Some((eps, zeta)) = row.optimized {
        let _ = writeln!(out, "zeta_optimized {}", sig(zeta));
        let _ = writeln!(out, "epsilon_optimized_upper_bound {}", sig(eps));
        let _ = writeln!(out, "radius_optimized_upper_bound {}", sig(eps + r.q_k));
    }
    Ok(out)
}

/// Runs every replication on `threads` workers; the row order never depends on scheduling.
pub fn run_parallel(config: &ExperimentConfig, threads: usize) -> Result<Vec<ExperimentRow>> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {threads} threads: {e}")))?;
    let per_rep: Vec<Vec<ExperimentRow>> = pool.install(|| {
        (0..config.replications)
            .into_par_iter()
            .map(|rep| run_replication(config, rep))
            .collect::<otrelax::Result<_>>()
    })?;
    let mut rows: Vec<ExperimentRow> = per_rep.into_iter().flatten().collect();
    sort_rows(&mut rows);
    Ok(rows)
}

fn experiment(args: ExperimentArgs) -> Result<String> {
    if args.threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let preset = match args.preset {
        Preset::Desk => ExperimentConfig::desk(),
        Preset::Paper => ExperimentConfig::paper(),
    };
    let file = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let config = file.apply(preset, args.seed)?;
    let rows = run_parallel(&config, args.threads)?;
    let summary = summarize(&rows)?;
    let svg = render_svg(&summary)?;
    std::fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;
    let files = [
        ("rows.csv", rows_to_csv(&rows)),
        ("summary.csv", summary_to_csv(&summary)),
        ("plot.svg", svg),
    ];
    for (name, contents) in &files {
        write_text(&args.out.join(name), contents)?;
    }
    let mut out = format!("rows {}\n", rows.len());
    for s in &summary {
        let _ = writeln!(
            out,
            "n {} g0_emp_mean {} gdelta_emp_mean {} g0_ref_mean {} closer_fraction {}",
            s.n,
            sig(s.g0_empirical.mean),
            sig(s.g_delta_empirical.mean),
            sig(s.g0_reference.mean),
            sig(s.closer_fraction)
        );
    }
    let _ = writeln!(out, "out {}", display(&args.out));
    Ok(out)
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

fn sample(args: SampleArgs) -> Result<String> {
    let mu = match args.model {
        Model::Normal => sample_standard_normal(args.dim, args.n, args.seed)?,
        Model::Factor => sample_factor_model(&FactorModelParams {
            dim: args.dim,
            rho: args.rho,
            n_samples: args.n,
            seed: args.seed,
        })?,
    };
    write_measure(&args.out, &mu)?;
    Ok(format!("atoms {}\ndim {}\n", mu.len(), mu.dim()))
}
