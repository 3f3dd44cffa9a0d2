//! Directory-level benchmark runs and synthetic suite generation.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dataset::{
    generate_synthetic, load_pair, metadata_path, read_label, write_pair, ColumnSpec, Direction, SyntheticFamily,
};
use crate::error::{Result, VceiError};
use crate::exec::with_workers;
use crate::identifier::{derive_seed, run, DirectionReport, PipelineConfig, SCHEMA_VERSION};

/// Ground-truth file of the cause-effect pairs distribution.
pub const PAIRMETA_FILE: &str = "pairmeta.txt";

pub const CSV_HEADER: [&str; 10] = [
    "name",
    "truth",
    "decision",
    "s_xy",
    "s_yx",
    "slope_xy",
    "slope_yx",
    "rank_one_gap_x",
    "rank_one_gap_y",
    "runtime_ms",
];

/// One `pairmeta.txt` row: 1-based inclusive column ranges and a weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairMeta {
    pub id: String,
    pub cause: (usize, usize),
    pub effect: (usize, usize),
    pub weight: f64,
}

impl PairMeta {
    pub fn is_univariate(&self) -> bool {
        self.cause.0 == self.cause.1 && self.effect.0 == self.effect.1
    }

    /// Columns and ground truth for a univariate pair, with x the first column.
    pub fn columns(&self) -> Option<(ColumnSpec, Direction)> {
        if !self.is_univariate() || self.cause.0 == 0 || self.effect.0 == 0 {
            return None;
        }
        let (c, e) = (self.cause.0 - 1, self.effect.0 - 1);
        if c < e {
            Some((ColumnSpec { x: vec![c], y: vec![e] }, Direction::XtoY))
        } else {
            Some((ColumnSpec { x: vec![e], y: vec![c] }, Direction::YtoX))
        }
    }
}

pub fn read_pairmeta(path: &Path) -> Result<BTreeMap<String, PairMeta>> {
    let text = fs::read_to_string(path).map_err(|e| VceiError::io(path, e))?;
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() || fields[0].starts_with('#') {
            continue;
        }
        let bad = |message: String| VceiError::MalformedFile {
            path: path.to_path_buf(),
            row: i + 1,
            message,
        };
        if fields.len() < 6 {
            return Err(bad(format!("expected 6 fields, found {}", fields.len())));
        }
        let col = |s: &str| s.parse::<usize>().map_err(|_| bad(format!("bad column {s:?}")));
        let weight = fields[5]
            .parse::<f64>()
            .map_err(|_| bad(format!("bad weight {:?}", fields[5])))?;
        let meta = PairMeta {
            id: fields[0].to_string(),
            cause: (col(fields[1])?, col(fields[2])?),
            effect: (col(fields[3])?, col(fields[4])?),
            weight,
        };
        out.insert(meta.id.clone(), meta);
    }
    Ok(out)
}

/// Pair-file id as used in `pairmeta.txt` (`pair0007` -> `0007`).
fn pair_id(stem: &str) -> &str {
    stem.strip_prefix("pair").unwrap_or(stem)
}

fn is_pair_file(path: &Path) -> bool {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("");
    let file = path.file_name().and_then(|s| s.to_str()).unwrap_or("");
    matches!(ext, "txt" | "dat")
        && !stem.ends_with("_des")
        && file != PAIRMETA_FILE
        && !stem.to_ascii_lowercase().starts_with("readme")
}

/// Pair files in `dir`, sorted by file name.
pub fn discover_pairs(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| VceiError::io(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| VceiError::io(dir, e))?.path();
        if path.is_file() && is_pair_file(&path) {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub name: String,
    pub truth: Option<Direction>,
    pub decision: Option<Direction>,
    pub correct: bool,
    pub s_xy: Option<f64>,
    pub s_yx: Option<f64>,
    pub slope_xy: Option<f64>,
    pub slope_yx: Option<f64>,
    pub rank_one_gap_x: Option<f64>,
    pub rank_one_gap_y: Option<f64>,
    pub runtime_ms: Option<f64>,
    pub tie: bool,
    /// Error of the failed direction when the decision was forced.
    pub degraded: Option<String>,
    /// Set when no decision could be made at all.
    pub error: Option<String>,
    pub solver_failure: bool,
}

impl PairResult {
    fn from_report(r: &DirectionReport) -> PairResult {
        PairResult {
            name: r.name.clone(),
            truth: r.truth,
            decision: Some(r.decision),
            correct: r.correct == Some(true),
            s_xy: r.s_xy(),
            s_yx: r.s_yx(),
            slope_xy: r.slope_xy(),
            slope_yx: r.slope_yx(),
            rank_one_gap_x: r.rank_one_gap_x(),
            rank_one_gap_y: r.rank_one_gap_y(),
            runtime_ms: None,
            tie: r.tie,
            degraded: r.degraded.as_ref().map(|f| format!("{}: {}", f.direction, f.error)),
            error: None,
            solver_failure: r.degraded.as_ref().is_some_and(|f| f.solver_failure),
        }
    }

    fn failed(name: String, truth: Option<Direction>, e: &VceiError) -> PairResult {
        PairResult {
            name,
            truth,
            error: Some(e.to_string()),
            solver_failure: e.is_solver_failure(),
            ..PairResult::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedPair {
    pub name: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkResult {
    pub schema_version: u32,
    /// `correct / total` over labelled pairs; failures count as incorrect.
    pub accuracy: Option<f64>,
    pub correct: usize,
    pub total: usize,
    pub unlabeled: usize,
    pub failed: usize,
    pub per_pair: Vec<PairResult>,
    pub skipped: Vec<SkippedPair>,
    pub config: PipelineConfig,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BenchmarkOptions {
    /// Thread cap for the per-pair fan-out (0 = default).
    pub workers: usize,
    /// Record wall-clock time per pair. Off by default so that reruns are
    /// byte-identical.
    pub timing: bool,
}

struct Job {
    path: PathBuf,
    columns: ColumnSpec,
    truth: Option<Direction>,
}

fn plan(dir: &Path) -> Result<(Vec<Job>, Vec<SkippedPair>)> {
    if !dir.is_dir() {
        return Err(VceiError::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory"),
        ));
    }
    let meta_path = dir.join(PAIRMETA_FILE);
    let meta = if meta_path.exists() {
        Some(read_pairmeta(&meta_path)?)
    } else {
        None
    };
    let mut jobs = Vec::new();
    let mut skipped = Vec::new();
    for path in discover_pairs(dir)? {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        match &meta {
            None => jobs.push(Job {
                path,
                columns: ColumnSpec::default(),
                truth: None,
            }),
            Some(meta) => match meta.get(pair_id(&stem)) {
                None => skipped.push(SkippedPair {
                    name: stem,
                    reason: "not listed in pairmeta".into(),
                }),
                Some(m) => match m.columns() {
                    Some((columns, truth)) => jobs.push(Job {
                        path,
                        columns,
                        truth: Some(truth),
                    }),
                    None => skipped.push(SkippedPair {
                        name: stem,
                        reason: "multivariate pair".into(),
                    }),
                },
            },
        }
    }
    if jobs.is_empty() {
        return Err(VceiError::Usage(format!("no pair files found in {}", dir.display())));
    }
    Ok((jobs, skipped))
}

fn run_job(job: &Job, config: &PipelineConfig, timing: bool) -> PairResult {
    let start = Instant::now();
    let name = job
        .path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut result = match load_pair(&job.path, &job.columns) {
        Err(e) => {
            log::error!("{name}: {e}");
            let truth = job
                .truth
                .or_else(|| read_label(&metadata_path(&job.path)).ok().flatten());
            PairResult::failed(name.clone(), truth, &e)
        }
        Ok(mut pair) => {
            if job.truth.is_some() {
                pair.label = job.truth;
            }
            let cfg = PipelineConfig {
                seed: derive_seed(config.seed, &format!("pair/{name}")),
                ..config.clone()
            };
            match run(&pair, &cfg) {
                Ok(report) => PairResult::from_report(&report),
                Err(e) => {
                    log::error!("{name}: {e}");
                    PairResult::failed(name.clone(), pair.label, &e)
                }
            }
        }
    };
    if timing {
        result.runtime_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    log::info!(
        "{name}: decision {} truth {}",
        result.decision.map_or("-", Direction::as_str),
        result.truth.map_or("-", Direction::as_str)
    );
    result
}

/// Run the pipeline on every pair file in `dir`.
pub fn run_benchmark(dir: &Path, config: &PipelineConfig, opts: &BenchmarkOptions) -> Result<BenchmarkResult> {
    config.validate()?;
    let (jobs, skipped) = plan(dir)?;
    let exec = config.exec;
    let per_pair = with_workers(opts.workers, || {
        exec.map(&jobs, |job| run_job(job, config, opts.timing))
    });

    let labelled: Vec<&PairResult> = per_pair.iter().filter(|p| p.truth.is_some()).collect();
    let total = labelled.len();
    let correct = labelled.iter().filter(|p| p.correct).count();
    Ok(BenchmarkResult {
        schema_version: SCHEMA_VERSION,
        accuracy: (total > 0).then(|| correct as f64 / total as f64),
        correct,
        total,
        unlabeled: per_pair.len() - total,
        failed: per_pair.iter().filter(|p| p.error.is_some()).count(),
        per_pair,
        skipped,
        config: config.clone(),
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Per-pair table with the columns in [`CSV_HEADER`].
pub fn write_csv<W: Write>(result: &BenchmarkResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for p in &result.per_pair {
        w.write_record([
            p.name.clone(),
            p.truth.map(|d| d.to_string()).unwrap_or_default(),
            p.decision.map(|d| d.to_string()).unwrap_or_default(),
            opt(p.s_xy),
            opt(p.s_yx),
            opt(p.slope_xy),
            opt(p.slope_yx),
            opt(p.rank_one_gap_x),
            opt(p.rank_one_gap_y),
            opt(p.runtime_ms),
        ])?;
    }
    w.flush().map_err(|e| VceiError::io("<csv>", e))?;
    Ok(())
}

/// Write `count` labelled pairs named `{family}-{i:03}.txt` into `outdir`.
/// With `swap_half`, every odd-indexed pair has x and y exchanged.
pub fn generate_suite(
    family: SyntheticFamily,
    n: usize,
    count: usize,
    seed: u64,
    outdir: &Path,
    swap_half: bool,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(outdir).map_err(|e| VceiError::io(outdir, e))?;
    let mut paths = Vec::with_capacity(count);
    for i in 0..count {
        let mut pair = generate_synthetic(family, n, derive_seed(seed, &format!("generate/{i}")))?;
        if swap_half && i % 2 == 1 {
            pair = pair.swapped();
        }
        pair.name = format!("{family}-{i:03}");
        let path = outdir.join(format!("{}.txt", pair.name));
        write_pair(&path, &pair)?;
        paths.push(path);
    }
    Ok(paths)
}
