//! Direction scoring and the forced decision.
//!
//! For a hypothesised direction `c -> e`, a reweighting of the cause
//! candidate's empirical marginal is found that is maximally distinct from
//! it, two regressors `e | c` are fitted (uniform and reweighted) on the same
//! support, and the squared MMD between their mean predictions on the cause
//! samples is the score. The lower-scoring direction is returned.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dataset::{extract_coreset, random_subset, robust_standardize, select_rows, DataPair, Direction, Rarity};
use crate::error::{Result, VceiError};
use crate::exec::Exec;
use crate::kernel::{median_heuristic, select_lengthscale, GramMatrix, Kernel, LengthscaleMethod};
use crate::mmd::{mmd2_biased, WeightVector};
use crate::regressor::{WeightedGp, DEFAULT_NOISE_VARIANCE};
use crate::variation::{build_problem, solve, validate_grid, Recovery, SdrSolution, SolveStatus, SolverOptions};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_M: usize = 100;
pub const DEFAULT_B_ALPHA: f64 = 0.2;
/// Coreset candidate fills tried when coreset subsets are requested.
pub const DEFAULT_CORESET_REPEATS: usize = 10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// One solve per direction at a fixed `b_alpha`.
    #[default]
    Score,
    /// Slope of the score over a `b_alpha` sweep.
    Trend,
}

impl FromStr for Mode {
    type Err = VceiError;
    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "score" => Ok(Mode::Score),
            "trend" => Ok(Mode::Trend),
            _ => Err(VceiError::Usage(format!(
                "unknown mode {s:?} (expected score or trend)"
            ))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Score => "score",
            Mode::Trend => "trend",
        })
    }
}

/// How the size-`m` support is drawn from the full sample.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubsetMethod {
    #[default]
    Random,
    Coreset {
        repeats: usize,
        rarity: Rarity,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// Per-sample noise `sigma^2 / (n_eff w_i)`.
    #[default]
    Precision,
    /// Unweighted fit on a seeded multinomial resample.
    Resample,
}

/// Inputs at which the two regressors are compared.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalInputs {
    /// Every cause-candidate sample.
    #[default]
    Full,
    /// A seeded random subset of this size.
    Random(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub m: usize,
    pub b_alpha: f64,
    /// Ascending `b_alpha` values for trend mode.
    pub grid: Vec<f64>,
    pub mode: Mode,
    pub lengthscale: LengthscaleMethod,
    pub noise_variance: f64,
    pub subset: SubsetMethod,
    pub weighting: Weighting,
    /// Optional MMD-slack budget on the reweighting.
    pub b_d: Option<f64>,
    pub eval_inputs: EvalInputs,
    pub standardize: bool,
    pub seed: u64,
    pub solver: SolverOptions,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            m: DEFAULT_M,
            b_alpha: DEFAULT_B_ALPHA,
            grid: linspace(0.05, 0.5, 10),
            mode: Mode::Score,
            lengthscale: LengthscaleMethod::default(),
            noise_variance: DEFAULT_NOISE_VARIANCE,
            subset: SubsetMethod::Random,
            weighting: Weighting::Precision,
            b_d: None,
            eval_inputs: EvalInputs::Full,
            standardize: true,
            seed: 0,
            solver: SolverOptions::default(),
            exec: Exec::default(),
        }
    }
}

impl PipelineConfig {
    /// Support size actually used for a sample of `n` points.
    pub fn effective_m(&self, n: usize) -> usize {
        self.m.min(n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(VceiError::Usage(format!("m must be at least 2, got {}", self.m)));
        }
        if !(self.noise_variance > 0.0) {
            return Err(VceiError::Usage("noise variance must be positive".into()));
        }
        match self.mode {
            Mode::Score => {
                if !(self.b_alpha > 0.0 && self.b_alpha <= 1.0) {
                    return Err(VceiError::Usage(format!("b_alpha {} outside (0, 1]", self.b_alpha)));
                }
            }
            Mode::Trend => {
                if self.grid.len() < 3 {
                    return Err(VceiError::Usage("trend mode needs at least 3 grid points".into()));
                }
            }
        }
        Ok(())
    }
}

/// `steps` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => vec![],
        1 => vec![lo],
        _ => (0..steps)
            .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
            .collect(),
    }
}

/// Parse `lo:hi:steps`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || VceiError::Usage(format!("grid {spec:?} is not lo:hi:steps"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let steps: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if steps == 0 || !(lo <= hi) {
        return Err(bad());
    }
    Ok(linspace(lo, hi, steps))
}

/// Deterministic child seed for a named stream.
pub fn derive_seed(base: u64, tag: &str) -> u64 {
    // FNV-1a over the tag, then a splitmix64 finaliser
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut z = base ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionSummary {
    pub b_alpha: f64,
    pub status: SolveStatus,
    pub sdr_objective: f64,
    pub dual_bound: f64,
    pub recovered_objective: f64,
    pub rank_one_gap: f64,
    pub rank_one: bool,
    pub closed_form: bool,
    pub iterations: usize,
    pub recovery: Recovery,
    /// Support rows (indices into the pair) with positive weight.
    pub support: Vec<usize>,
    pub max_weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionScore {
    pub direction: Direction,
    pub score: f64,
    pub solution: SolutionSummary,
    pub lengthscale_cause: f64,
    pub lengthscale_effect: f64,
    pub subset_size: usize,
    pub rare_count: Option<usize>,
    /// Score between two uniform fits; zero for deterministic weighting.
    pub bias_baseline: f64,
    pub weighted_jitter: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DroppedPoint {
    pub b_alpha: f64,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendCurve {
    pub grid: Vec<f64>,
    pub scores: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub points: Vec<DirectionScore>,
    pub dropped: Vec<DroppedPoint>,
}

impl TrendCurve {
    pub fn mean_score(&self) -> f64 {
        self.scores.iter().sum::<f64>() / self.scores.len() as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub direction: Direction,
    pub error: String,
    pub solver_failure: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionReport {
    pub schema_version: u32,
    pub name: String,
    pub n: usize,
    pub mode: Mode,
    pub decision: Direction,
    pub tie: bool,
    /// Set when one direction failed and the decision is forced.
    pub degraded: Option<Failure>,
    pub truth: Option<Direction>,
    pub correct: Option<bool>,
    pub score_xy: Option<DirectionScore>,
    pub score_yx: Option<DirectionScore>,
    pub trend_xy: Option<TrendCurve>,
    pub trend_yx: Option<TrendCurve>,
    pub config: PipelineConfig,
}

impl DirectionReport {
    pub fn s_xy(&self) -> Option<f64> {
        match self.mode {
            Mode::Score => self.score_xy.as_ref().map(|s| s.score),
            Mode::Trend => self.trend_xy.as_ref().map(TrendCurve::mean_score),
        }
    }

    pub fn s_yx(&self) -> Option<f64> {
        match self.mode {
            Mode::Score => self.score_yx.as_ref().map(|s| s.score),
            Mode::Trend => self.trend_yx.as_ref().map(TrendCurve::mean_score),
        }
    }

    pub fn slope_xy(&self) -> Option<f64> {
        self.trend_xy.as_ref().map(|t| t.slope)
    }

    pub fn slope_yx(&self) -> Option<f64> {
        self.trend_yx.as_ref().map(|t| t.slope)
    }

    /// Rank-one gap of the cause-x solve (mean over the sweep in trend mode).
    pub fn rank_one_gap_x(&self) -> Option<f64> {
        mean_gap(self.score_xy.as_ref(), self.trend_xy.as_ref())
    }

    pub fn rank_one_gap_y(&self) -> Option<f64> {
        mean_gap(self.score_yx.as_ref(), self.trend_yx.as_ref())
    }
}

fn mean_gap(score: Option<&DirectionScore>, trend: Option<&TrendCurve>) -> Option<f64> {
    if let Some(s) = score {
        return Some(s.solution.rank_one_gap);
    }
    let t = trend?;
    let n = t.points.len() as f64;
    Some(t.points.iter().map(|p| p.solution.rank_one_gap).sum::<f64>() / n)
}

/// `(decision, tie)`: the lower score wins, exact ties go to `XtoY`.
pub fn decide(s_xy: f64, s_yx: f64) -> (Direction, bool) {
    if s_xy < s_yx {
        (Direction::XtoY, false)
    } else if s_yx < s_xy {
        (Direction::YtoX, false)
    } else {
        (Direction::XtoY, true)
    }
}

/// Smaller slope wins; equal slopes fall back to the smaller mean score.
pub fn decide_trend(xy: &TrendCurve, yx: &TrendCurve) -> (Direction, bool) {
    if xy.slope < yx.slope {
        (Direction::XtoY, false)
    } else if yx.slope < xy.slope {
        (Direction::YtoX, false)
    } else {
        decide(xy.mean_score(), yx.mean_score())
    }
}

/// Ordinary least-squares `(slope, intercept)` of `y` on `x`.
pub fn ols(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// Everything about one direction that does not depend on `b_alpha`.
struct Prepared {
    direction: Direction,
    support_rows: Vec<usize>,
    cause_sub: DMatrix<f64>,
    effect_sub: DMatrix<f64>,
    eval: DMatrix<f64>,
    kernel_cause: Kernel,
    kernel_effect: Kernel,
    gram_mm: GramMatrix,
    gram_mn: GramMatrix,
    gram_nn_sum: f64,
    uniform_pred: DMatrix<f64>,
    bias_baseline: f64,
    rare_count: Option<usize>,
    resample_seed: u64,
}

fn direction_tag(d: Direction, stream: &str) -> String {
    format!("{}/{}", stream, d.as_str())
}

fn prepare(pair: &DataPair, direction: Direction, config: &PipelineConfig) -> Result<Prepared> {
    let (cause, effect) = pair.oriented(direction);
    let n = pair.n();
    let m = config.effective_m(n);
    let subset_seed = derive_seed(config.seed, &direction_tag(direction, "subset"));
    let (support_rows, rare_count) = match config.subset {
        SubsetMethod::Random => (random_subset(n, m, subset_seed), None),
        SubsetMethod::Coreset { repeats, rarity } => {
            let joint = pair.joint();
            let kernel = Kernel::sek(median_heuristic(&joint)?);
            let c = extract_coreset(pair, m, rarity, repeats, &kernel, subset_seed)?;
            (c.indices, Some(c.rare_count))
        }
    };
    let cause_sub = select_rows(cause, &support_rows);
    let effect_sub = select_rows(effect, &support_rows);
    let eval = match config.eval_inputs {
        EvalInputs::Full => cause.clone(),
        EvalInputs::Random(k) => {
            let rows = random_subset(n, k, derive_seed(config.seed, &direction_tag(direction, "eval")));
            select_rows(cause, &rows)
        }
    };

    let kernel_cause = Kernel::sek(select_lengthscale(&cause_sub, config.lengthscale)?);
    let kernel_effect = Kernel::sek(select_lengthscale(&effect_sub, config.lengthscale)?);

    let gram_mm = kernel_cause.gram_self(&cause_sub);
    let gram_mn = kernel_cause.gram(&cause_sub, cause)?;
    let gram_nn_sum = kernel_cause.gram_sum(cause);

    let resample_seed = derive_seed(config.seed, &direction_tag(direction, "resample"));
    let uniform = WeightVector::uniform(cause_sub.nrows());
    let (uniform_pred, bias_baseline) = match config.weighting {
        Weighting::Precision => {
            let gp = WeightedGp::fit(&cause_sub, &effect_sub, None, kernel_cause, config.noise_variance)?;
            (gp.predict_mean(&eval)?, 0.0)
        }
        Weighting::Resample => {
            let fit = |seed| {
                WeightedGp::fit_resampled(
                    &cause_sub,
                    &effect_sub,
                    &uniform,
                    kernel_cause,
                    config.noise_variance,
                    seed,
                )
                .and_then(|gp| gp.predict_mean(&eval))
            };
            let a = fit(derive_seed(resample_seed, "uniform"))?;
            let b = fit(derive_seed(resample_seed, "baseline"))?;
            let bias = mmd2_biased(&kernel_effect, &a, &b)?;
            (a, bias)
        }
    };

    Ok(Prepared {
        direction,
        support_rows,
        cause_sub,
        effect_sub,
        eval,
        kernel_cause,
        kernel_effect,
        gram_mm,
        gram_mn,
        gram_nn_sum,
        uniform_pred,
        bias_baseline,
        rare_count,
        resample_seed,
    })
}

fn summarize(sol: &SdrSolution, rows: &[usize], b_alpha: f64) -> SolutionSummary {
    let w = sol.weights.as_slice();
    SolutionSummary {
        b_alpha,
        status: sol.status,
        sdr_objective: sol.sdr_objective,
        dual_bound: sol.dual_bound,
        recovered_objective: sol.recovered_objective,
        rank_one_gap: sol.rank_one_gap,
        rank_one: sol.is_rank_one(),
        closed_form: sol.closed_form,
        iterations: sol.iterations,
        recovery: sol.recovery,
        support: (0..w.len()).filter(|&i| w[i] > 0.0).map(|i| rows[i]).collect(),
        max_weight: sol.weights.max(),
    }
}

fn score_at(prep: &Prepared, b_alpha: f64, config: &PipelineConfig) -> Result<DirectionScore> {
    let problem = build_problem(
        &prep.gram_mm,
        &prep.gram_mn,
        prep.gram_nn_sum,
        Some(b_alpha),
        config.b_d,
    )?;
    let sol = solve(&problem, &config.solver)?;
    if sol.status == SolveStatus::Infeasible {
        return Err(VceiError::Solver {
            status: sol.status.as_str().into(),
            message: format!(
                "b_alpha = {b_alpha}: primal residual {:.2e} after {} iterations",
                sol.primal_residual, sol.iterations
            ),
        });
    }
    let weighted = match config.weighting {
        Weighting::Precision => WeightedGp::fit(
            &prep.cause_sub,
            &prep.effect_sub,
            Some(&sol.weights),
            prep.kernel_cause,
            config.noise_variance,
        )?,
        Weighting::Resample => WeightedGp::fit_resampled(
            &prep.cause_sub,
            &prep.effect_sub,
            &sol.weights,
            prep.kernel_cause,
            config.noise_variance,
            derive_seed(prep.resample_seed, &format!("weighted/{b_alpha}")),
        )?,
    };
    let pred = weighted.predict_mean(&prep.eval)?;
    let score = mmd2_biased(&prep.kernel_effect, &prep.uniform_pred, &pred)?;
    if !score.is_finite() {
        return Err(VceiError::DegenerateSample(format!(
            "non-finite score at b_alpha = {b_alpha}"
        )));
    }
    Ok(DirectionScore {
        direction: prep.direction,
        score,
        solution: summarize(&sol, &prep.support_rows, b_alpha),
        lengthscale_cause: prep.kernel_cause.lengthscale,
        lengthscale_effect: prep.kernel_effect.lengthscale,
        subset_size: prep.support_rows.len(),
        rare_count: prep.rare_count,
        bias_baseline: prep.bias_baseline,
        weighted_jitter: weighted.jitter(),
    })
}

fn annotate(direction: Direction) -> impl Fn(VceiError) -> VceiError {
    move |e| VceiError::Direction {
        direction,
        source: Box::new(e),
    }
}

fn standardized(pair: &DataPair, config: &PipelineConfig) -> DataPair {
    if config.standardize {
        robust_standardize(pair).0
    } else {
        pair.clone()
    }
}

/// Score one direction at `config.b_alpha`. The pair is used as given.
pub fn score_direction(pair: &DataPair, direction: Direction, config: &PipelineConfig) -> Result<DirectionScore> {
    let m = config.effective_m(pair.n());
    if config.b_alpha * (m as f64) < 1.0 - 1e-12 {
        return Err(annotate(direction)(VceiError::InfeasibleBound {
            b_alpha: config.b_alpha,
            m,
            min: 1.0 / m as f64,
        }));
    }
    prepare(pair, direction, config)
        .and_then(|prep| score_at(&prep, config.b_alpha, config))
        .map_err(annotate(direction))
}

/// Score curve over `grid` for one direction; failing grid points are dropped.
pub fn trend_direction(
    pair: &DataPair,
    direction: Direction,
    grid: &[f64],
    config: &PipelineConfig,
) -> Result<TrendCurve> {
    let wrap = annotate(direction);
    validate_grid(grid, config.effective_m(pair.n())).map_err(&wrap)?;
    let prep = prepare(pair, direction, config).map_err(&wrap)?;
    let results = config.exec.map(grid, |&b| score_at(&prep, b, config));
    let mut points = Vec::new();
    let mut dropped = Vec::new();
    for (&b, r) in grid.iter().zip(results) {
        match r {
            Ok(p) => points.push(p),
            Err(e) => {
                log::warn!("{} {}: dropping b_alpha = {b}: {e}", pair.name, direction);
                dropped.push(DroppedPoint {
                    b_alpha: b,
                    error: e.to_string(),
                })
            }
        }
    }
    if points.len() < 3 {
        return Err(wrap(VceiError::InsufficientData {
            got: points.len(),
            need: 3,
        }));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.solution.b_alpha).collect();
    let scores: Vec<f64> = points.iter().map(|p| p.score).collect();
    let (slope, intercept) = ols(&xs, &scores);
    Ok(TrendCurve {
        grid: xs,
        scores,
        slope,
        intercept,
        points,
        dropped,
    })
}

fn failure(direction: Direction, e: &VceiError) -> Failure {
    Failure {
        direction,
        error: e.to_string(),
        solver_failure: e.is_solver_failure(),
    }
}

fn finish(
    pair: &DataPair,
    config: &PipelineConfig,
    decision: Direction,
    tie: bool,
    degraded: Option<Failure>,
) -> DirectionReport {
    DirectionReport {
        schema_version: SCHEMA_VERSION,
        name: pair.name.clone(),
        n: pair.n(),
        mode: config.mode,
        decision,
        tie,
        degraded,
        truth: pair.label,
        correct: pair.label.map(|t| t == decision),
        score_xy: None,
        score_yx: None,
        trend_xy: None,
        trend_yx: None,
        config: config.clone(),
    }
}

/// Resolve two per-direction outcomes into a forced decision.
fn resolve<T>(
    xy: Result<T>,
    yx: Result<T>,
    decide_both: impl Fn(&T, &T) -> (Direction, bool),
) -> Result<(Option<T>, Option<T>, Direction, bool, Option<Failure>)> {
    match (xy, yx) {
        (Ok(a), Ok(b)) => {
            let (d, tie) = decide_both(&a, &b);
            Ok((Some(a), Some(b), d, tie, None))
        }
        (Ok(a), Err(e)) => {
            log::warn!("{e}; forcing x->y");
            Ok((
                Some(a),
                None,
                Direction::XtoY,
                false,
                Some(failure(Direction::YtoX, &e)),
            ))
        }
        (Err(e), Ok(b)) => {
            log::warn!("{e}; forcing y->x");
            Ok((
                None,
                Some(b),
                Direction::YtoX,
                false,
                Some(failure(Direction::XtoY, &e)),
            ))
        }
        (Err(a), Err(b)) => Err(VceiError::Pipeline {
            xy: Box::new(a),
            yx: Box::new(b),
        }),
    }
}

/// Single-score identification at `config.b_alpha`.
pub fn identify(pair: &DataPair, config: &PipelineConfig) -> Result<DirectionReport> {
    config.validate()?;
    let data = standardized(pair, config);
    let (xy, yx) = config.exec.join(
        || score_direction(&data, Direction::XtoY, config),
        || score_direction(&data, Direction::YtoX, config),
    );
    let (xy, yx, decision, tie, degraded) = resolve(xy, yx, |a, b| decide(a.score, b.score))?;
    let mut report = finish(pair, config, decision, tie, degraded);
    report.mode = Mode::Score;
    report.score_xy = xy;
    report.score_yx = yx;
    Ok(report)
}

/// Identification by the slope of the score over `grid`.
pub fn identify_by_trend(pair: &DataPair, grid: &[f64], config: &PipelineConfig) -> Result<DirectionReport> {
    if grid.len() < 3 {
        return Err(VceiError::Usage("trend mode needs at least 3 grid points".into()));
    }
    let data = standardized(pair, config);
    let (xy, yx) = config.exec.join(
        || trend_direction(&data, Direction::XtoY, grid, config),
        || trend_direction(&data, Direction::YtoX, grid, config),
    );
    let (xy, yx, decision, tie, degraded) = resolve(xy, yx, decide_trend)?;
    let mut cfg = config.clone();
    cfg.mode = Mode::Trend;
    cfg.grid = grid.to_vec();
    let mut report = finish(pair, &cfg, decision, tie, degraded);
    report.trend_xy = xy;
    report.trend_yx = yx;
    Ok(report)
}

/// Dispatch on `config.mode`.
pub fn run(pair: &DataPair, config: &PipelineConfig) -> Result<DirectionReport> {
    match config.mode {
        Mode::Score => identify(pair, config),
        Mode::Trend => identify_by_trend(pair, &config.grid, config),
    }
}
