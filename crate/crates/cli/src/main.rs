use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adarestart::harness::verify::{run_suite, SUITES};
use adarestart::harness::{
    cmd_run, grid_search, last_active_set_change, lp_ratio_sweep, ActiveSnapshot, Algorithm, ExperimentConfig,
    PolicySpec, Problem, StepConfig, EXIT_TARGET_UNMET,
};
use adarestart::io::InstanceFile;
use adarestart::problems::{GameFamily, Loss};
use adarestart::saddle::AverageTarget;
use adarestart::smooth::AgdConfig;
use adarestart::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "adarestart", version, about = "Adaptive restarts for first-order methods")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver and write trace.csv, series.csv and summary.json.
    Run(RunArgs),
    /// Run fixed-period restarts for each period and pick the best.
    GridSearch(GridArgs),
    /// Sweep PDHG primal/dual step ratios on an LP.
    RatioSweep(SweepArgs),
    /// Run a named verification suite.
    Verify {
        /// One of the suite names, or `list`.
        suite: String,
    },
    /// Write an instance description as JSON.
    GenInstance {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Last active-set change in an `active_sets.json` file.
    ActiveSet {
        snapshots: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    MatrixGame,
    BoxLp,
    Bilinear,
    Regression,
    HardExample,
    Quadratic,
}

#[derive(Args, Clone)]
struct ProblemArgs {
    /// Instance JSON file; replaces the generator flags below.
    #[arg(long, conflicts_with = "problem")]
    instance: Option<PathBuf>,
    #[arg(long, value_enum)]
    problem: Option<Kind>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    #[arg(long, value_enum, default_value = "uniform-negative")]
    family: FamilyArg,
    #[arg(long)]
    sources: Option<usize>,
    #[arg(long)]
    sinks: Option<usize>,
    /// Comma-separated nonzero singular values for bilinear games.
    #[arg(long, value_delimiter = ',')]
    singular_values: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "lasso")]
    loss: LossArg,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    density: Option<f64>,
    #[arg(long)]
    libsvm: Option<String>,
    #[arg(long)]
    best_known: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    smoothness: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    UniformNegative,
    Normal,
}

#[derive(Clone, Copy, ValueEnum)]
enum LossArg {
    Lasso,
    Logistic,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Pdhg,
    Extragradient,
    Agd,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    None,
    Fixed,
    Adaptive,
    Function,
}

#[derive(Clone, Copy, ValueEnum)]
enum AverageArg {
    Current,
    LookAhead,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Full experiment configuration as JSON; replaces every other solver flag.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_enum, default_value = "pdhg")]
    algorithm: AlgorithmArg,
    #[arg(long, value_enum, default_value = "adaptive")]
    policy: PolicyArg,
    #[arg(long)]
    period: Option<usize>,
    /// Defaults to 0.5 for saddle methods and 0.25 for AGD.
    #[arg(long)]
    beta: Option<f64>,
    /// First epoch length `tau_1`.
    #[arg(long, default_value_t = 1)]
    tau1: usize,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    scale: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    ratio: f64,
    #[arg(long, value_enum, default_value = "current")]
    average: AverageArg,
    #[arg(long, default_value_t = 1.0)]
    ell0: f64,
    #[arg(long, default_value_t = 1.25)]
    eta: f64,
    #[arg(long)]
    reset_ell: bool,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
    #[arg(long)]
    target: Option<f64>,
    /// Also record the residual of the raw iterate.
    #[arg(long)]
    track_current: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, value_delimiter = ',', default_value = "8,32,128,512,2048")]
    periods: Vec<usize>,
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Defaults to 1e-5, 1e-4, ..., 1e5.
    #[arg(long, value_delimiter = ',')]
    ratios: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn need<T>(value: Option<T>, flag: &str, kind: &str) -> Result<T> {
    value.ok_or_else(|| Error::invalid(format!("--{flag} is required for {kind}")))
}

impl ProblemArgs {
    /// Instance description plus the directory relative paths resolve against.
    fn resolve(&self) -> Result<(InstanceFile, Option<PathBuf>)> {
        if let Some(path) = &self.instance {
            return Ok((InstanceFile::load(path)?, path.parent().map(Path::to_path_buf)));
        }
        let kind = self
            .problem
            .ok_or_else(|| Error::invalid("give either --instance or --problem"))?;
        let file = match kind {
            Kind::MatrixGame => InstanceFile::MatrixGame {
                seed: need(self.seed, "seed", "matrix games")?,
                rows: self.rows.unwrap_or(100),
                cols: self.cols.unwrap_or(100),
                family: match self.family {
                    FamilyArg::UniformNegative => GameFamily::UniformNegative,
                    FamilyArg::Normal => GameFamily::Normal,
                },
                matrix: None,
            },
            Kind::BoxLp => InstanceFile::BoxLp {
                seed: Some(need(self.seed, "seed", "generated LPs")?),
                sources: Some(self.sources.unwrap_or(10)),
                sinks: Some(self.sinks.unwrap_or(20)),
                lp: None,
            },
            Kind::Bilinear => InstanceFile::Bilinear {
                seed: Some(need(self.seed, "seed", "generated bilinear games")?),
                rows: need(self.rows, "rows", "bilinear games")?,
                cols: need(self.cols, "cols", "bilinear games")?,
                singular_values: self.singular_values.clone(),
                a: None,
                b: None,
                c: None,
            },
            Kind::Regression => InstanceFile::Regression {
                seed: if self.libsvm.is_some() {
                    self.seed
                } else {
                    Some(need(self.seed, "seed", "generated regression data")?)
                },
                loss: match self.loss {
                    LossArg::Lasso => Loss::Lasso,
                    LossArg::Logistic => Loss::Logistic,
                },
                lambda: need(self.lambda, "lambda", "regression")?,
                rows: self.rows,
                cols: self.cols,
                density: self.density,
                libsvm: self.libsvm.clone(),
                best_known: self.best_known,
            },
            Kind::HardExample => InstanceFile::HardExample {
                n: self.n.unwrap_or(500),
                delta: self.delta.unwrap_or(1e-4),
                alpha: self.alpha.unwrap_or(1e-4),
            },
            Kind::Quadratic => InstanceFile::Quadratic {
                seed: need(self.seed, "seed", "quadratics")?,
                n: need(self.n, "n", "quadratics")?,
                alpha: need(self.alpha, "alpha", "quadratics")?,
                smoothness: need(self.smoothness, "smoothness", "quadratics")?,
            },
        };
        Ok((file, std::env::current_dir().ok()))
    }
}

impl SolverArgs {
    fn experiment(&self) -> Result<(ExperimentConfig, Option<PathBuf>)> {
        if let Some(path) = &self.config {
            let cfg: ExperimentConfig = serde_json::from_str(&fs::read_to_string(path)?)?;
            cfg.validate()?;
            return Ok((cfg, path.parent().map(Path::to_path_buf)));
        }
        let (problem, base) = self.problem.resolve()?;
        let algorithm = match self.algorithm {
            AlgorithmArg::Pdhg => Algorithm::Pdhg,
            AlgorithmArg::Extragradient => Algorithm::Extragradient,
            AlgorithmArg::Agd => Algorithm::Agd,
        };
        let default_beta = if matches!(algorithm, Algorithm::Agd) { 0.25 } else { 0.5 };
        let policy = match self.policy {
            PolicyArg::None => PolicySpec::NoRestart,
            PolicyArg::Fixed => PolicySpec::Fixed {
                period: need(self.period, "period", "fixed restarts")?,
            },
            PolicyArg::Adaptive => PolicySpec::Adaptive {
                beta: self.beta.unwrap_or(default_beta),
                first_epoch: self.tau1,
            },
            PolicyArg::Function => PolicySpec::FunctionScheme,
        };
        let cfg = ExperimentConfig {
            problem,
            algorithm,
            policy,
            steps: StepConfig {
                gamma: self.gamma,
                scale: self.scale,
                ratio: self.ratio,
                average: match self.average {
                    AverageArg::Current => AverageTarget::Current,
                    AverageArg::LookAhead => AverageTarget::LookAhead,
                },
                agd: AgdConfig {
                    ell0: self.ell0,
                    eta: self.eta,
                    reset_ell: self.reset_ell,
                },
            },
            max_iters: self.max_iters,
            target: self.target,
            track_current: self.track_current,
        };
        cfg.validate()?;
        Ok((cfg, base))
    }
}

fn emit(json: String, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, json + "\n")?,
        None => println!("{json}"),
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run(args) => {
            let (cfg, base) = args.solver.experiment()?;
            let problem = Problem::from_file(&cfg.problem, base.as_deref())?;
            let summary = cmd_run(&cfg, &problem, &args.out)?;
            println!(
                "{} iterations, final residual {:.3e}, {} restarts",
                summary.iterations, summary.final_residual, summary.restart_count
            );
            if summary.target.is_some() && !summary.reached_target {
                eprintln!("target not reached within {} iterations", cfg.max_iters);
                return Ok(ExitCode::from(EXIT_TARGET_UNMET as u8));
            }
        }
        Command::GridSearch(args) => {
            let (cfg, base) = args.solver.experiment()?;
            let problem = Problem::from_file(&cfg.problem, base.as_deref())?;
            let result = grid_search(&cfg, &problem, &args.periods)?;
            emit(serde_json::to_string_pretty(&result)?, args.out.as_deref())?;
        }
        Command::RatioSweep(args) => {
            let (file, base) = args.problem.resolve()?;
            let Problem::BoxLp(lp) = Problem::from_file(&file, base.as_deref())? else {
                return Err(Error::NotApplicable("the ratio sweep needs an LP instance".into()));
            };
            let ratios = args
                .ratios
                .unwrap_or_else(|| (-5..=5).map(|k| 10f64.powi(k)).collect());
            let result = lp_ratio_sweep(&lp, &ratios, args.iters)?;
            emit(serde_json::to_string_pretty(&result)?, args.out.as_deref())?;
        }
        Command::Verify { suite } => {
            if suite == "list" {
                SUITES.iter().for_each(|s| println!("{s}"));
                return Ok(ExitCode::SUCCESS);
            }
            let outcomes = run_suite(&suite)?;
            let mut all = true;
            for o in &outcomes {
                all &= o.passed;
                println!("{} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
            }
            if !all {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::GenInstance { problem, out } => {
            let (file, _) = problem.resolve()?;
            file.save(&out)?;
        }
        Command::ActiveSet { snapshots } => {
            let snaps: Vec<ActiveSnapshot> = serde_json::from_str(&fs::read_to_string(&snapshots)?)?;
            let index = last_active_set_change(&snaps)?;
            println!("last active-set change at snapshot {index} (iteration {})", snaps[index].iteration);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
