use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use vcei::dataset::{load_pair, ColumnSpec, Rarity, SyntheticFamily};
use vcei::exec::{with_workers, Exec};
use vcei::harness::{generate_suite, run_benchmark, write_csv, BenchmarkOptions};
use vcei::identifier::{
    identify_by_trend, parse_grid, run, EvalInputs, Mode, PipelineConfig, SubsetMethod, Weighting, DEFAULT_B_ALPHA,
    DEFAULT_CORESET_REPEATS, DEFAULT_M,
};
use vcei::kernel::LengthscaleMethod;
use vcei::{Result, VceiError};

const EXIT_FAILURE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Parser)]
#[command(
    name = "vcei",
    version,
    about = "Bivariate causal direction by variation of the cause marginal"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Identify the causal direction of one pair file.
    Identify {
        path: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every pair file in a directory and report accuracy.
    Benchmark {
        dir: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Output directory for benchmark.json and benchmark.csv
        /// (summary JSON goes to stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Fill the runtime_ms column. Makes output run-dependent.
        #[arg(long)]
        timing: bool,
    },
    /// Write labelled synthetic pairs.
    Generate {
        #[arg(long, default_value = "fig1")]
        family: String,
        #[arg(long, default_value_t = 500)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Swap x and y on every second pair.
        #[arg(long)]
        swap_half: bool,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Score both directions over a b_alpha grid.
    Sweep {
        path: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// JSON report destination (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a long-format CSV of the curves.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct PipelineArgs {
    /// Support size of the reweighted subset.
    #[arg(long, default_value_t = DEFAULT_M)]
    m: usize,
    /// Sup-norm bound on the weights.
    #[arg(long, default_value_t = DEFAULT_B_ALPHA)]
    b_alpha: f64,
    /// Trend grid as lo:hi:steps.
    #[arg(long, default_value = "0.05:0.5:10")]
    grid: String,
    #[arg(long, default_value = "score")]
    mode: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Thread cap (0 = all cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Run single-threaded.
    #[arg(long)]
    sequential: bool,
    /// MMD-slack budget on the reweighting.
    #[arg(long)]
    b_d: Option<f64>,
    /// Coreset subset instead of a random one.
    #[arg(long)]
    coreset: bool,
    /// Median-heuristic lengthscales instead of KDE cross-validation.
    #[arg(long)]
    median_heuristic: bool,
    /// Fit the weighted model on a multinomial resample.
    #[arg(long)]
    resample: bool,
    /// GP noise variance.
    #[arg(long)]
    noise: Option<f64>,
    /// Compare predictions on this many random inputs instead of all.
    #[arg(long)]
    eval_points: Option<usize>,
    /// Skip robust standardization.
    #[arg(long)]
    raw: bool,
    /// 0-based x and y columns of the pair file.
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [0, 1])]
    columns: Vec<usize>,
}

impl PipelineArgs {
    fn config(&self) -> Result<PipelineConfig> {
        let mut cfg = PipelineConfig {
            m: self.m,
            b_alpha: self.b_alpha,
            grid: parse_grid(&self.grid)?,
            mode: self.mode.parse::<Mode>()?,
            b_d: self.b_d,
            seed: self.seed,
            standardize: !self.raw,
            exec: if self.sequential {
                Exec::Sequential
            } else {
                Exec::Parallel
            },
            ..PipelineConfig::default()
        };
        if self.coreset {
            cfg.subset = SubsetMethod::Coreset {
                repeats: DEFAULT_CORESET_REPEATS,
                rarity: Rarity::default(),
            };
        }
        if self.median_heuristic {
            cfg.lengthscale = LengthscaleMethod::MedianHeuristic;
        }
        if self.resample {
            cfg.weighting = Weighting::Resample;
        }
        if let Some(noise) = self.noise {
            cfg.noise_variance = noise;
        }
        if let Some(k) = self.eval_points {
            cfg.eval_inputs = EvalInputs::Random(k);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn columns(&self) -> ColumnSpec {
        ColumnSpec {
            x: vec![self.columns[0]],
            y: vec![self.columns[1]],
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn io_err(path: &Path, e: io::Error) -> VceiError {
    VceiError::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| io_err(path, e)),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| io_err(Path::new("<stdout>"), e)),
    }
}

fn identify_cmd(path: &Path, args: &PipelineArgs, out: Option<&Path>) -> Result<()> {
    let cfg = args.config()?;
    let pair = load_pair(path, &args.columns())?;
    let report = with_workers(args.workers, || run(&pair, &cfg))?;
    emit(&to_json(&report)?, out)
}

fn benchmark_cmd(dir: &Path, args: &PipelineArgs, out: Option<&Path>, timing: bool) -> Result<()> {
    let cfg = args.config()?;
    let opts = BenchmarkOptions {
        workers: args.workers,
        timing,
    };
    let result = run_benchmark(dir, &cfg, &opts)?;
    match result.accuracy {
        Some(a) => log::info!("accuracy {}/{} = {a:.3}", result.correct, result.total),
        None => log::warn!("no labelled pairs; accuracy undefined"),
    }
    match out {
        Some(outdir) => {
            fs::create_dir_all(outdir).map_err(|e| io_err(outdir, e))?;
            let csv_path = outdir.join("benchmark.csv");
            let file = fs::File::create(&csv_path).map_err(|e| io_err(&csv_path, e))?;
            write_csv(&result, file)?;
            emit(&to_json(&result)?, Some(&outdir.join("benchmark.json")))
        }
        None => emit(&to_json(&result)?, None),
    }
}

fn generate_cmd(family: &str, n: usize, count: usize, seed: u64, swap_half: bool, out: &Path) -> Result<()> {
    let family: SyntheticFamily = family.parse()?;
    let paths = generate_suite(family, n, count, seed, out, swap_half)?;
    log::info!("wrote {} pairs to {}", paths.len(), out.display());
    Ok(())
}

fn sweep_cmd(path: &Path, args: &PipelineArgs, out: Option<&Path>, csv: Option<&Path>) -> Result<()> {
    let cfg = args.config()?;
    let pair = load_pair(path, &args.columns())?;
    let report = with_workers(args.workers, || identify_by_trend(&pair, &cfg.grid, &cfg))?;
    if let Some(csv_path) = csv {
        let mut text = String::from("direction,b_alpha,score,sdr_objective,recovered_objective,rank_one_gap\n");
        for curve in [&report.trend_xy, &report.trend_yx].into_iter().flatten() {
            for p in &curve.points {
                let s = &p.solution;
                text.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    p.direction, s.b_alpha, p.score, s.sdr_objective, s.recovered_objective, s.rank_one_gap
                ));
            }
        }
        fs::write(csv_path, text).map_err(|e| io_err(csv_path, e))?;
    }
    emit(&to_json(&report)?, out)
}

fn exit_code(e: &VceiError) -> u8 {
    if e.is_solver_failure() {
        EXIT_SOLVER
    } else if e.is_input_failure() || matches!(e, VceiError::Usage(_)) {
        EXIT_INPUT
    } else {
        EXIT_FAILURE
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("VCEI_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Identify { path, pipeline, out } => identify_cmd(path, pipeline, out.as_deref()),
        Command::Benchmark {
            dir,
            pipeline,
            out,
            timing,
        } => benchmark_cmd(dir, pipeline, out.as_deref(), *timing),
        Command::Generate {
            family,
            n,
            count,
            seed,
            swap_half,
            out,
        } => generate_cmd(family, *n, *count, *seed, *swap_half, out),
        Command::Sweep {
            path,
            pipeline,
            out,
            csv,
        } => sweep_cmd(path, pipeline, out.as_deref(), csv.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("vcei: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
