//! Exact Gaussian-process regression with per-sample weights.
//!
//! Weights act as precisions: sample `i` gets noise variance
//! `sigma^2 / (n_eff * w_i)`, where `n_eff` counts the strictly positive
//! weights. Uniform weights therefore reduce to the ordinary GP with noise
//! `sigma^2`, and zero-weight samples are dropped.

use nalgebra::{Cholesky, DMatrix, Dyn};
use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::select_rows;
use crate::error::{Result, VceiError};
use crate::kernel::Kernel;
use crate::mmd::WeightVector;

pub const DEFAULT_NOISE_VARIANCE: f64 = 1e-2;
/// Diagonal jitter tried in order after a failed factorization.
pub const JITTER_LADDER: [f64; 3] = [1e-8, 1e-6, 1e-4];

#[derive(Clone, Debug)]
pub struct WeightedGp {
    kernel: Kernel,
    noise_variance: f64,
    train_inputs: DMatrix<f64>,
    /// `(K + D)^-1 Y`, one column per output.
    coefficients: DMatrix<f64>,
    factor: Cholesky<f64, Dyn>,
    jitter: f64,
    sample_weights: Vec<f64>,
}

fn check_rows(inputs: &DMatrix<f64>, targets: &DMatrix<f64>) -> Result<()> {
    if inputs.nrows() != targets.nrows() {
        return Err(VceiError::Shape(format!(
            "{} inputs but {} targets",
            inputs.nrows(),
            targets.nrows()
        )));
    }
    Ok(())
}

impl WeightedGp {
    /// Fit with precision weights; `None` means uniform.
    pub fn fit(
        inputs: &DMatrix<f64>,
        targets: &DMatrix<f64>,
        weights: Option<&WeightVector>,
        kernel: Kernel,
        noise_variance: f64,
    ) -> Result<WeightedGp> {
        check_rows(inputs, targets)?;
        if !(noise_variance > 0.0) {
            return Err(VceiError::Usage(format!(
                "noise variance {noise_variance} must be positive"
            )));
        }
        let n = inputs.nrows();
        let w: Vec<f64> = match weights {
            Some(w) if w.len() != n => {
                return Err(VceiError::Shape(format!("{} weights for {n} samples", w.len())));
            }
            Some(w) => w.as_slice().to_vec(),
            None => vec![1.0 / n as f64; n],
        };
        let keep: Vec<usize> = (0..n).filter(|&i| w[i] > 0.0).collect();
        if keep.len() < 2 {
            return Err(VceiError::InsufficientSupport { surviving: keep.len() });
        }
        let n_eff = keep.len() as f64;
        let x = select_rows(inputs, &keep);
        let y = select_rows(targets, &keep);
        let kept_w: Vec<f64> = keep.iter().map(|&i| w[i]).collect();
        let noise: Vec<f64> = kept_w.iter().map(|wi| noise_variance / (n_eff * wi)).collect();

        let mut k = kernel.gram_self(&x).values;
        for (i, s) in noise.iter().enumerate() {
            k[(i, i)] += s;
        }
        let (factor, jitter) = factorize(k)?;
        let coefficients = factor.solve(&y);
        Ok(WeightedGp {
            kernel,
            noise_variance,
            train_inputs: x,
            coefficients,
            factor,
            jitter,
            sample_weights: kept_w,
        })
    }

    /// Fit an unweighted GP on a multinomial resample of size `n_eff` drawn
    /// with probabilities `weights`.
    pub fn fit_resampled(
        inputs: &DMatrix<f64>,
        targets: &DMatrix<f64>,
        weights: &WeightVector,
        kernel: Kernel,
        noise_variance: f64,
        seed: u64,
    ) -> Result<WeightedGp> {
        check_rows(inputs, targets)?;
        if weights.len() != inputs.nrows() {
            return Err(VceiError::Shape(format!(
                "{} weights for {} samples",
                weights.len(),
                inputs.nrows()
            )));
        }
        let draws = resample_indices(weights, seed)?;
        let x = select_rows(inputs, &draws);
        let y = select_rows(targets, &draws);
        WeightedGp::fit(&x, &y, None, kernel, noise_variance)
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    /// Number of training samples kept after dropping zero weights.
    pub fn support(&self) -> usize {
        self.train_inputs.nrows()
    }

    pub fn sample_weights(&self) -> &[f64] {
        &self.sample_weights
    }

    /// Jitter that was needed for the factorization (0 if none).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn factor(&self) -> &Cholesky<f64, Dyn> {
        &self.factor
    }

    pub fn predict_mean(&self, query: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let ks = self.kernel.gram(query, &self.train_inputs)?;
        Ok(ks.values * &self.coefficients)
    }
}

fn factorize(k: DMatrix<f64>) -> Result<(Cholesky<f64, Dyn>, f64)> {
    if let Some(f) = Cholesky::new(k.clone()) {
        return Ok((f, 0.0));
    }
    for &jitter in &JITTER_LADDER {
        let mut kj = k.clone();
        for i in 0..kj.nrows() {
            kj[(i, i)] += jitter;
        }
        if let Some(f) = Cholesky::new(kj) {
            log::debug!("gp factorization needed jitter {jitter:e}");
            return Ok((f, jitter));
        }
    }
    Err(VceiError::Factorization {
        jitter: JITTER_LADDER[JITTER_LADDER.len() - 1],
    })
}

/// Seeded multinomial draw of size `n_eff` (count of positive weights),
/// returned as sorted indices.
pub fn resample_indices(weights: &WeightVector, seed: u64) -> Result<Vec<usize>> {
    let n_eff = weights.support();
    let dist = WeightedIndex::new(weights.as_slice()).map_err(|e| VceiError::Usage(format!("cannot resample: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws: Vec<usize> = (0..n_eff).map(|_| dist.sample(&mut rng)).collect();
    draws.sort_unstable();
    Ok(draws)
}
