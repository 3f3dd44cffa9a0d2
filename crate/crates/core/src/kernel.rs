//! Squared-exponential kernel, Gram matrices and lengthscale selection.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VceiError};
use crate::exec::Exec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelKind {
    SquaredExponential,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub kind: KernelKind,
    pub lengthscale: f64,
    pub output_scale: f64,
}

impl Kernel {
    /// Unit-scale squared-exponential kernel.
    pub fn sek(lengthscale: f64) -> Kernel {
        assert!(lengthscale > 0.0, "lengthscale must be positive");
        Kernel {
            kind: KernelKind::SquaredExponential,
            lengthscale,
            output_scale: 1.0,
        }
    }

    #[inline]
    pub fn eval(&self, u: &[f64], v: &[f64]) -> f64 {
        let d2: f64 = u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
        self.eval_sq_dist(d2)
    }

    #[inline]
    pub fn eval_sq_dist(&self, d2: f64) -> f64 {
        match self.kind {
            KernelKind::SquaredExponential => {
                self.output_scale * (-d2 / (2.0 * self.lengthscale * self.lengthscale)).exp()
            }
        }
    }

    pub fn gram(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<GramMatrix> {
        gram_with(Exec::default(), self, a, b)
    }

    pub fn gram_self(&self, a: &DMatrix<f64>) -> GramMatrix {
        gram_self_with(Exec::default(), self, a)
    }

    /// `1^T K_aa 1` without materialising the matrix.
    pub fn gram_sum(&self, a: &DMatrix<f64>) -> f64 {
        gram_sum_with(Exec::default(), self, a)
    }
}

/// Kernel evaluations between two sample sets. `symmetric` is set when both
/// sides are the same set, in which case the matrix is exactly symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    pub values: DMatrix<f64>,
    pub symmetric: bool,
}

impl GramMatrix {
    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn total(&self) -> f64 {
        self.values.row_iter().map(|r| r.sum()).sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.values.row_iter().map(|r| r.sum()).collect()
    }
}

pub(crate) fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn gram_with(exec: Exec, kernel: &Kernel, a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<GramMatrix> {
    if a.ncols() != b.ncols() {
        return Err(VceiError::Shape(format!(
            "gram: sample dimensions differ ({} vs {})",
            a.ncols(),
            b.ncols()
        )));
    }
    let (ra, rb) = (rows_of(a), rows_of(b));
    let rows: Vec<Vec<f64>> = exec.map(&ra, |u| rb.iter().map(|v| kernel.eval(u, v)).collect());
    let values = DMatrix::from_fn(ra.len(), rb.len(), |i, j| rows[i][j]);
    Ok(GramMatrix {
        values,
        symmetric: false,
    })
}

pub fn gram_self_with(exec: Exec, kernel: &Kernel, a: &DMatrix<f64>) -> GramMatrix {
    let ra = rows_of(a);
    let n = ra.len();
    // upper triangle per row, mirrored below
    let upper: Vec<Vec<f64>> = exec.map_range(n, |i| (i..n).map(|j| kernel.eval(&ra[i], &ra[j])).collect());
    let mut values = DMatrix::zeros(n, n);
    for (i, row) in upper.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            values[(i, i + off)] = v;
            values[(i + off, i)] = v;
        }
    }
    GramMatrix {
        values,
        symmetric: true,
    }
}

pub fn gram_sum_with(exec: Exec, kernel: &Kernel, a: &DMatrix<f64>) -> f64 {
    let ra = rows_of(a);
    exec.sum_range(ra.len(), |i| ra.iter().map(|v| kernel.eval(&ra[i], v)).sum())
}

/// Row sums of `K_ab` without materialising the matrix.
pub fn cross_row_sums_with(exec: Exec, kernel: &Kernel, a: &DMatrix<f64>, b: &DMatrix<f64>) -> Vec<f64> {
    let (ra, rb) = (rows_of(a), rows_of(b));
    exec.map(&ra, |u| rb.iter().map(|v| kernel.eval(u, v)).sum())
}

// ---------------------------------------------------------------------------
// Lengthscale selection

/// Samples beyond this count are thinned (evenly strided) before the
/// quadratic-cost lengthscale heuristics run.
pub const LENGTHSCALE_MAX_SAMPLES: usize = 2000;

pub const KDE_CV_FOLDS: usize = 5;
pub const KDE_CV_GRID: usize = 25;
pub const DEFAULT_FOLD_SEED: u64 = 0x5eed_f01d;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthscaleMethod {
    /// Maximise 5-fold held-out log-likelihood of a Gaussian KDE whose
    /// bandwidth is the candidate lengthscale.
    KdeCv5 { fold_seed: u64 },
    /// Median pairwise Euclidean distance (zero distances excluded).
    MedianHeuristic,
}

impl Default for LengthscaleMethod {
    fn default() -> Self {
        LengthscaleMethod::KdeCv5 {
            fold_seed: DEFAULT_FOLD_SEED,
        }
    }
}

fn thinned_rows(samples: &DMatrix<f64>) -> Vec<Vec<f64>> {
    let rows = rows_of(samples);
    if rows.len() <= LENGTHSCALE_MAX_SAMPLES {
        return rows;
    }
    let n = rows.len();
    (0..LENGTHSCALE_MAX_SAMPLES)
        .map(|k| rows[k * n / LENGTHSCALE_MAX_SAMPLES].clone())
        .collect()
}

fn sq_dist(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum()
}

pub fn median_heuristic(samples: &DMatrix<f64>) -> Result<f64> {
    if samples.nrows() < 2 {
        return Err(VceiError::InsufficientData {
            got: samples.nrows(),
            need: 2,
        });
    }
    let rows = thinned_rows(samples);
    let mut dists: Vec<f64> = Vec::with_capacity(rows.len() * (rows.len() - 1) / 2);
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let d = sq_dist(&rows[i], &rows[j]).sqrt();
            if d > 0.0 {
                dists.push(d);
            }
        }
    }
    if dists.is_empty() {
        return Err(VceiError::DegenerateSample("all pairwise distances are zero".into()));
    }
    let mid = dists.len() / 2;
    if dists.len() % 2 == 1 {
        let (_, m, _) = dists.select_nth_unstable_by(mid, f64::total_cmp);
        Ok(*m)
    } else {
        let (lo, m, _) = dists.select_nth_unstable_by(mid, f64::total_cmp);
        let below = lo.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(0.5 * (below + *m))
    }
}

/// Fold id for each sample: a seeded shuffle dealt round-robin into `k` folds.
pub fn kfold_assignment(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        fold[i] = pos % k;
    }
    fold
}

/// Candidate lengthscales: log-spaced over `[1e-2, 1e2] x anchor`.
pub fn kde_cv_grid(anchor: f64) -> Vec<f64> {
    (0..KDE_CV_GRID)
        .map(|i| anchor * 10f64.powf(-2.0 + 4.0 * i as f64 / (KDE_CV_GRID - 1) as f64))
        .collect()
}

fn log_sum_exp(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + v.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Mean held-out log density of an isotropic Gaussian KDE with bandwidth `h`.
pub fn kde_cv_score(rows: &[Vec<f64>], folds: &[usize], k: usize, h: f64) -> f64 {
    let d = rows.first().map_or(1, |r| r.len()) as f64;
    let log_norm = -0.5 * d * (2.0 * std::f64::consts::PI * h * h).ln();
    let mut total = 0.0;
    let mut count = 0usize;
    for f in 0..k {
        let train: Vec<&Vec<f64>> = rows
            .iter()
            .zip(folds)
            .filter(|(_, &g)| g != f)
            .map(|(r, _)| r)
            .collect();
        let ln_train = (train.len() as f64).ln();
        for (q, _) in rows.iter().zip(folds).filter(|(_, &g)| g == f) {
            let lse = log_sum_exp(train.iter().map(|t| -sq_dist(q, t) / (2.0 * h * h)));
            total += lse - ln_train + log_norm;
            count += 1;
        }
    }
    total / count as f64
}

pub fn select_lengthscale(samples: &DMatrix<f64>, method: LengthscaleMethod) -> Result<f64> {
    select_lengthscale_with(Exec::default(), samples, method)
}

pub fn select_lengthscale_with(exec: Exec, samples: &DMatrix<f64>, method: LengthscaleMethod) -> Result<f64> {
    match method {
        LengthscaleMethod::MedianHeuristic => median_heuristic(samples),
        LengthscaleMethod::KdeCv5 { fold_seed } => {
            if samples.nrows() < KDE_CV_FOLDS {
                return Err(VceiError::InsufficientData {
                    got: samples.nrows(),
                    need: KDE_CV_FOLDS,
                });
            }
            let anchor = median_heuristic(samples)?;
            let rows = thinned_rows(samples);
            let folds = kfold_assignment(rows.len(), KDE_CV_FOLDS, fold_seed);
            let grid = kde_cv_grid(anchor);
            let scores = exec.map(&grid, |&h| kde_cv_score(&rows, &folds, KDE_CV_FOLDS, h));
            let mut best = 0;
            for (i, s) in scores.iter().enumerate() {
                if *s > scores[best] {
                    best = i;
                }
            }
            Ok(grid[best])
        }
    }
}
