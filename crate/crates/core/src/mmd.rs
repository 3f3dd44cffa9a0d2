//! Biased (V-statistic) squared-MMD estimators.
//!
//! All estimators clamp small negative values produced by floating-point
//! cancellation to zero; the `_raw` variants return the unclamped value.

use log::debug;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VceiError};
use crate::exec::Exec;
use crate::kernel::{cross_row_sums_with, gram_sum_with, GramMatrix, Kernel};

/// Simplex weights over a sample set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    weights: Vec<f64>,
}

/// Entries above this negative tolerance are clamped to zero.
pub const NEGATIVE_WEIGHT_TOL: f64 = 1e-10;
pub const SUM_TOL: f64 = 1e-8;

impl WeightVector {
    pub fn new(mut weights: Vec<f64>) -> Result<WeightVector> {
        if weights.is_empty() {
            return Err(VceiError::Usage("empty weight vector".into()));
        }
        for w in weights.iter_mut() {
            if !w.is_finite() || *w < -NEGATIVE_WEIGHT_TOL {
                return Err(VceiError::Usage(format!("invalid weight {w}")));
            }
            if *w < 0.0 {
                *w = 0.0;
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(VceiError::Usage(format!("weights sum to {total}, expected 1")));
        }
        Ok(WeightVector { weights })
    }

    pub fn uniform(n: usize) -> WeightVector {
        assert!(n > 0);
        WeightVector {
            weights: vec![1.0 / n as f64; n],
        }
    }

    /// Normalise nonnegative (e.g. integer count) weights.
    pub fn from_unnormalized(raw: &[f64]) -> Result<WeightVector> {
        let total: f64 = raw.iter().sum();
        if total <= 0.0 || !total.is_finite() {
            return Err(VceiError::Usage("weights must have a positive finite sum".into()));
        }
        WeightVector::new(raw.iter().map(|w| w / total).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    /// Number of strictly positive entries.
    pub fn support(&self) -> usize {
        self.weights.iter().filter(|&&w| w > 0.0).count()
    }

    pub fn is_uniform(&self) -> bool {
        let u = 1.0 / self.len() as f64;
        self.weights.iter().all(|&w| w == u)
    }
}

pub(crate) fn clamp_nonneg(raw: f64, what: &str) -> f64 {
    if raw < 0.0 {
        if raw < -1e-12 {
            debug!("{what}: clamped negative estimate {raw:e} to 0");
        }
        0.0
    } else {
        raw
    }
}

pub fn mmd2_biased_raw(kernel: &Kernel, a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    mmd2_biased_raw_with(Exec::default(), kernel, a, b)
}

pub fn mmd2_biased_raw_with(exec: Exec, kernel: &Kernel, a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    if a.nrows() == 0 || b.nrows() == 0 {
        return Err(VceiError::Usage("MMD needs two nonempty sample sets".into()));
    }
    if a.ncols() != b.ncols() {
        return Err(VceiError::Shape(format!(
            "MMD: sample dimensions differ ({} vs {})",
            a.ncols(),
            b.ncols()
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let (n, m) = (a.nrows() as f64, b.nrows() as f64);
    let saa = gram_sum_with(exec, kernel, a);
    let sbb = gram_sum_with(exec, kernel, b);
    let sab: f64 = cross_row_sums_with(exec, kernel, a, b).into_iter().sum();
    Ok(saa / (n * n) - 2.0 * sab / (n * m) + sbb / (m * m))
}

/// `(1/N^2) sum K_aa - (2/NM) sum K_ab + (1/M^2) sum K_bb`, clamped at 0.
pub fn mmd2_biased(kernel: &Kernel, a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    Ok(clamp_nonneg(mmd2_biased_raw(kernel, a, b)?, "mmd2_biased"))
}

fn check_weights(rows: usize, w: &WeightVector) -> Result<()> {
    if w.len() != rows {
        return Err(VceiError::Shape(format!(
            "weight vector has length {} but the Gram matrix has {rows} rows",
            w.len()
        )));
    }
    Ok(())
}

fn quad_form(k: &DMatrix<f64>, w: &[f64]) -> f64 {
    k.row_iter()
        .zip(w)
        .map(|(row, wi)| wi * row.iter().zip(w).map(|(kij, wj)| kij * wj).sum::<f64>())
        .sum()
}

/// `a^T K a - (2/N) a^T K 1 + (1/N^2) 1^T K 1`.
pub fn mmd2_weighted_vs_uniform(gram: &GramMatrix, w: &WeightVector) -> Result<f64> {
    let n = gram.nrows();
    if gram.ncols() != n {
        return Err(VceiError::Shape(format!(
            "K_xx must be square, got {}x{}",
            n,
            gram.ncols()
        )));
    }
    check_weights(n, w)?;
    let nf = n as f64;
    let rs = gram.row_sums();
    let a = w.as_slice();
    let quad = quad_form(&gram.values, a);
    let lin: f64 = a.iter().zip(&rs).map(|(ai, r)| ai * r).sum();
    let total: f64 = rs.iter().sum();
    Ok(clamp_nonneg(
        quad - 2.0 * lin / nf + total / (nf * nf),
        "mmd2_weighted_vs_uniform",
    ))
}

/// Weighted subset of size M against the uniform empirical of the full set:
/// `a^T K_mm a - (2/N) a^T K_mn 1 + (1/N^2) 1^T K_nn 1`.
pub fn mmd2_weighted_subset_vs_full(
    gram_mm: &GramMatrix,
    gram_mn: &GramMatrix,
    gram_nn_sum: f64,
    w: &WeightVector,
    n_full: usize,
) -> Result<f64> {
    let m = gram_mm.nrows();
    if gram_mm.ncols() != m || gram_mn.nrows() != m || gram_mn.ncols() != n_full {
        return Err(VceiError::Shape(format!(
            "expected K_mm {m}x{m} and K_mn {m}x{n_full}, got {}x{} and {}x{}",
            gram_mm.nrows(),
            gram_mm.ncols(),
            gram_mn.nrows(),
            gram_mn.ncols()
        )));
    }
    check_weights(m, w)?;
    let nf = n_full as f64;
    let a = w.as_slice();
    let quad = quad_form(&gram_mm.values, a);
    let lin: f64 = a.iter().zip(gram_mn.row_sums()).map(|(ai, r)| ai * r).sum();
    Ok(clamp_nonneg(
        quad - 2.0 * lin / nf + gram_nn_sum / (nf * nf),
        "mmd2_weighted_subset_vs_full",
    ))
}

/// Uniform subset against the full set, reusing a precomputed `1^T K_nn 1`.
pub(crate) fn mmd2_subset_vs_full_sum(
    kernel: &Kernel,
    subset: &DMatrix<f64>,
    full: &DMatrix<f64>,
    full_sum: f64,
) -> Result<f64> {
    let exec = Exec::default();
    let (m, n) = (subset.nrows() as f64, full.nrows() as f64);
    let smm = gram_sum_with(exec, kernel, subset);
    let smn: f64 = cross_row_sums_with(exec, kernel, subset, full).into_iter().sum();
    Ok(clamp_nonneg(
        smm / (m * m) - 2.0 * smn / (m * n) + full_sum / (n * n),
        "coreset mmd",
    ))
}
