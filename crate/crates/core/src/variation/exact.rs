//! Closed-form optimum of the relaxation without the MMD-slack block.
//!
//! If `C_ij <= (C_ii + C_jj) / 2` for all pairs (true for any PSD kernel, as
//! `|K_ij| <= sqrt(K_ii K_jj)`), then for feasible `A` with row sums `r`,
//! `<C, A> <= sum_i r_i C_ii`. The bound is attained by `A = diag(r)` with `r`
//! filling capacity `b` in decreasing order of `C_ii`, which is feasible since
//! `diag(r) - r r'` is PSD. Multipliers `mu_i = (C_ii - tau)_+` on the row
//! bound certify the value.

use nalgebra::DMatrix;

use super::admm::AdmmOutput;

/// Relative slack allowed in the midpoint condition.
const MIDPOINT_TOL: f64 = 1e-12;

pub(crate) fn applicable(c: &DMatrix<f64>) -> bool {
    let m = c.nrows();
    let scale = c.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    (0..m).all(|i| (0..i).all(|j| c[(i, j)] <= 0.5 * (c[(i, i)] + c[(j, j)]) + MIDPOINT_TOL * scale))
}

/// Indices by decreasing diagonal, ties toward the lower index.
fn fill_order(c: &DMatrix<f64>) -> Vec<usize> {
    let mut order: Vec<usize> = (0..c.nrows()).collect();
    order.sort_by(|&i, &j| c[(j, j)].total_cmp(&c[(i, i)]).then(i.cmp(&j)));
    order
}

pub(crate) fn water_fill(c: &DMatrix<f64>, cap: f64) -> Vec<f64> {
    let m = c.nrows();
    let mut r = vec![0.0; m];
    let mut remaining = 1.0;
    for i in fill_order(c) {
        if remaining <= 1e-12 {
            break;
        }
        let take = cap.min(remaining);
        r[i] = take;
        remaining -= take;
    }
    r
}

pub(crate) fn solve(c: &DMatrix<f64>, row_bound: Option<f64>) -> AdmmOutput {
    let m = c.nrows();
    let cap = row_bound.unwrap_or(1.0).min(1.0);
    let r = water_fill(c, cap);
    let lifted = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(r.clone()));
    let objective: f64 = (0..m).map(|i| r[i] * c[(i, i)]).sum();

    let upper_bound = match row_bound {
        None => c.max(),
        Some(b) => {
            let tau = (0..m)
                .filter(|&i| r[i] > 0.0)
                .map(|i| c[(i, i)])
                .fold(f64::INFINITY, f64::min);
            let mu: Vec<f64> = (0..m).map(|i| (c[(i, i)] - tau).max(0.0)).collect();
            let shifted = DMatrix::from_fn(m, m, |i, j| c[(i, j)] - 0.5 * (mu[i] + mu[j]));
            shifted.max() + b * mu.iter().sum::<f64>()
        }
    };
    let mass: f64 = r.iter().sum();
    AdmmOutput {
        lifted,
        objective,
        upper_bound,
        iterations: 0,
        primal_residual: (mass - 1.0).abs(),
        dual_residual: 0.0,
        converged: true,
    }
}
