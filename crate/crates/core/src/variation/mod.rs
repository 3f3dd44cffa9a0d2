//! Maximally distinct reweighting of an empirical marginal.
//!
//! The nonconvex problem `max_a MMD^2(sum a_i d_{x_i}, p_N)` over the simplex
//! is lifted to `A ~ a a'` and relaxed to a semidefinite program. Weights are
//! read back from the lifted solution.

mod admm;
mod exact;
pub mod simplex;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

pub use admm::SolverOptions;

use crate::error::{Result, VceiError};
use crate::kernel::GramMatrix;
use crate::mmd::WeightVector;
use simplex::project_capped_simplex;

/// Recovered weights below this are treated as solver noise.
pub const WEIGHT_NOISE_FLOOR: f64 = 1e-6;
/// `rank_one_gap` above this flags the recovery as approximate.
pub const RANK_ONE_TOL: f64 = 0.1;

/// Optional linear constraint `<G, A> <= rhs` bounding the weighted MMD of
/// the subset by its uniform MMD plus `b_d`.
#[derive(Clone, Debug, PartialEq)]
pub struct MmdSlack {
    pub matrix: DMatrix<f64>,
    pub rhs: f64,
    pub b_d: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintBlock {
    Psd,
    NonNeg,
    Normalization,
    Symmetry,
    RowBound,
    MmdSlack,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdrProblem {
    /// `K_mm - (1/N)(1 k' + k 1')` with `k = K_mn 1`.
    pub objective_matrix: DMatrix<f64>,
    /// `(1/N^2) 1' K_nn 1`.
    pub constant_term: f64,
    pub b_alpha: Option<f64>,
    pub mmd_slack: Option<MmdSlack>,
    pub m: usize,
    pub n_full: usize,
    gram_mm: DMatrix<f64>,
    cross_sums: Vec<f64>,
}

impl SdrProblem {
    pub fn num_variables(&self) -> usize {
        self.m * self.m
    }

    pub fn constraint_blocks(&self) -> Vec<ConstraintBlock> {
        let mut blocks = vec![
            ConstraintBlock::Psd,
            ConstraintBlock::NonNeg,
            ConstraintBlock::Normalization,
            ConstraintBlock::Symmetry,
        ];
        if self.b_alpha.is_some() {
            blocks.push(ConstraintBlock::RowBound);
        }
        if self.mmd_slack.is_some() {
            blocks.push(ConstraintBlock::MmdSlack);
        }
        blocks
    }

    /// Original (unlifted) objective at weights `a`, unclamped.
    pub fn objective_at(&self, a: &[f64]) -> f64 {
        let nf = self.n_full as f64;
        let quad: f64 = self
            .gram_mm
            .row_iter()
            .zip(a)
            .map(|(row, ai)| ai * row.iter().zip(a).map(|(k, aj)| k * aj).sum::<f64>())
            .sum();
        let lin: f64 = a.iter().zip(&self.cross_sums).map(|(ai, k)| ai * k).sum();
        quad - 2.0 * lin / nf + self.constant_term
    }

    /// Lifted objective `<C, A> + const`.
    pub fn lifted_objective(&self, lifted: &DMatrix<f64>) -> f64 {
        self.objective_matrix.dot(lifted) + self.constant_term
    }

    fn satisfies_slack(&self, a: &[f64]) -> bool {
        match &self.mmd_slack {
            None => true,
            Some(s) => {
                let v = quad(&s.matrix, a);
                v <= s.rhs + 1e-7 * (1.0 + s.rhs.abs())
            }
        }
    }

    /// Conic standard form as JSON, for reproducing a solve elsewhere.
    pub fn to_debug_json(&self) -> serde_json::Value {
        let matrix =
            |m: &DMatrix<f64>| -> Vec<Vec<f64>> { m.row_iter().map(|r| r.iter().copied().collect()).collect() };
        let m = self.m;
        let mut cones = vec![
            serde_json::json!({"kind": "psd", "size": m + 1,
                "map": "[[A, A1], [1'A, 1]]"}),
            serde_json::json!({"kind": "nonneg", "size": m * m, "map": "A"}),
        ];
        if let Some(b) = self.b_alpha {
            cones.push(serde_json::json!({"kind": "nonneg", "size": m, "map": "b 1 - A1", "b": b}));
        }
        if let Some(s) = &self.mmd_slack {
            cones.push(serde_json::json!({"kind": "nonneg", "size": 1, "map": "rhs - <G, A>",
                "rhs": s.rhs, "b_d": s.b_d, "G": matrix(&s.matrix)}));
        }
        serde_json::json!({
            "schema_version": 1,
            "sense": "maximize",
            "variable": {"name": "A", "shape": [m, m], "symmetric": true},
            "objective": {"matrix": matrix(&self.objective_matrix), "constant": self.constant_term},
            "equalities": [{"map": "1'A1", "rhs": 1.0}],
            "cones": cones,
            "n_full": self.n_full,
        })
    }
}

fn quad(g: &DMatrix<f64>, a: &[f64]) -> f64 {
    g.row_iter()
        .zip(a)
        .map(|(row, ai)| ai * row.iter().zip(a).map(|(k, aj)| k * aj).sum::<f64>())
        .sum()
}

pub fn build_problem(
    gram_mm: &GramMatrix,
    gram_mn: &GramMatrix,
    gram_nn_sum: f64,
    b_alpha: Option<f64>,
    b_d: Option<f64>,
) -> Result<SdrProblem> {
    let m = gram_mm.nrows();
    let n = gram_mn.ncols();
    if gram_mm.ncols() != m || gram_mn.nrows() != m {
        return Err(VceiError::Shape(format!(
            "expected K_mm {m}x{m} and K_mn {m}xN, got {}x{} and {}x{n}",
            gram_mm.nrows(),
            gram_mm.ncols(),
            gram_mn.nrows()
        )));
    }
    if m < 2 {
        return Err(VceiError::InsufficientData { got: m, need: 2 });
    }
    if let Some(b) = b_alpha {
        let min = 1.0 / m as f64;
        if !(b >= min * (1.0 - 1e-12)) || b.is_nan() {
            return Err(VceiError::InfeasibleBound { b_alpha: b, m, min });
        }
        if b > 1.0 {
            return Err(VceiError::Usage(format!("b_alpha = {b} exceeds 1")));
        }
    }
    if let Some(bd) = b_d {
        if !(bd >= 0.0) {
            return Err(VceiError::Usage(format!("b_d = {bd} must be nonnegative")));
        }
    }

    let (mf, nf) = (m as f64, n as f64);
    let k = gram_mn.row_sums();
    let gram = gram_mm.values.clone();
    let objective_matrix = DMatrix::from_fn(m, m, |i, j| gram[(i, j)] - (k[i] + k[j]) / nf);
    let constant_term = gram_nn_sum / (nf * nf);

    let mmd_slack = b_d.map(|b_d| {
        let kt = gram_mm.row_sums();
        let kt_sum: f64 = kt.iter().sum();
        let matrix = DMatrix::from_fn(m, m, |i, j| gram[(i, j)] - (kt[i] + kt[j]) / mf);
        let k_sum: f64 = k.iter().sum();
        let uniform_mmd = (kt_sum / (mf * mf) - 2.0 * k_sum / (mf * nf) + constant_term).max(0.0);
        MmdSlack {
            matrix,
            rhs: uniform_mmd + b_d - kt_sum / (mf * mf),
            b_d,
        }
    });

    Ok(SdrProblem {
        objective_matrix,
        constant_term,
        b_alpha,
        mmd_slack,
        m,
        n_full: n,
        gram_mm: gram,
        cross_sums: k,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Inaccurate,
    Infeasible,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Inaccurate => "inaccurate",
            SolveStatus::Infeasible => "infeasible",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Closed form when the objective matrix allows it, ADMM otherwise.
    #[default]
    Auto,
    /// Always run the iterative conic solver.
    Admm,
}

/// How the weights were read back from the lifted matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Recovery {
    /// Projected row sums `A 1`.
    RowSums,
    /// A normalized column of `A`, used when it scores strictly higher than
    /// the row sums (ties between symmetric optima average out in `A 1`).
    Column(usize),
}

#[derive(Clone, Debug)]
pub struct SdrSolution {
    pub lifted: DMatrix<f64>,
    pub weights: WeightVector,
    pub sdr_objective: f64,
    /// Certified upper bound on the relaxed optimum.
    pub dual_bound: f64,
    pub recovered_objective: f64,
    pub rank_one_gap: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub recovery: Recovery,
    pub b_alpha: Option<f64>,
    /// True when the closed form was used instead of the iterative solver.
    pub closed_form: bool,
}

impl SdrSolution {
    pub fn is_rank_one(&self) -> bool {
        self.rank_one_gap <= RANK_ONE_TOL
    }
}

/// `1 - lambda_max(A) / trace(A)`.
pub fn rank_one_gap(a: &DMatrix<f64>) -> f64 {
    let tr = a.trace();
    if tr <= 0.0 {
        return 1.0;
    }
    let top = SymmetricEigen::new(a.clone()).eigenvalues.max();
    (1.0 - top / tr).clamp(0.0, 1.0)
}

/// Zero weights below the noise floor and hand their mass to the remaining
/// uncapped entries in proportion.
fn drop_solver_noise(w: &mut [f64], cap: f64) {
    let removed: f64 = w.iter().filter(|&&v| v > 0.0 && v < WEIGHT_NOISE_FLOOR).sum();
    if removed == 0.0 {
        return;
    }
    let open: f64 = w
        .iter()
        .filter(|&&v| v >= WEIGHT_NOISE_FLOOR && v < cap - WEIGHT_NOISE_FLOOR)
        .sum();
    let headroom: f64 = w
        .iter()
        .filter(|&&v| v >= WEIGHT_NOISE_FLOOR && v < cap - WEIGHT_NOISE_FLOOR)
        .map(|&v| cap - v)
        .sum();
    if open <= 0.0 || headroom < removed {
        return;
    }
    let scale = 1.0 + removed / open;
    if w.iter()
        .any(|&v| v >= WEIGHT_NOISE_FLOOR && v < cap - WEIGHT_NOISE_FLOOR && v * scale > cap)
    {
        return;
    }
    for v in w.iter_mut() {
        if *v < WEIGHT_NOISE_FLOOR {
            *v = 0.0;
        } else if *v < cap - WEIGHT_NOISE_FLOOR {
            *v *= scale;
        }
    }
}

fn recover(problem: &SdrProblem, lifted: &DMatrix<f64>) -> Result<(WeightVector, f64, Recovery)> {
    let cap = problem.b_alpha.unwrap_or(1.0);
    let finish = |raw: Vec<f64>| -> Result<(WeightVector, f64)> {
        let mut w = project_capped_simplex(&raw, cap);
        drop_solver_noise(&mut w, cap);
        let obj = problem.objective_at(&w);
        Ok((WeightVector::new(w)?, obj))
    };

    let rows: Vec<f64> = lifted.row_iter().map(|r| r.sum()).collect();
    let (mut best, mut best_obj) = finish(rows)?;
    let mut kind = Recovery::RowSums;
    for j in 0..problem.m {
        let col = lifted.column(j);
        let mass: f64 = col.iter().map(|v| v.max(0.0)).sum();
        if mass <= 1e-9 {
            continue;
        }
        let raw: Vec<f64> = col.iter().map(|v| v.max(0.0) / mass).collect();
        let (w, obj) = finish(raw)?;
        if obj > best_obj + 1e-12 && problem.satisfies_slack(w.as_slice()) {
            best = w;
            best_obj = obj;
            kind = Recovery::Column(j);
        }
    }
    Ok((best, best_obj, kind))
}

pub fn solve(problem: &SdrProblem, opts: &SolverOptions) -> Result<SdrSolution> {
    let data = admm::ConicData {
        objective: &problem.objective_matrix,
        row_bound: problem.b_alpha,
        slack: problem.mmd_slack.as_ref().map(|s| (&s.matrix, s.rhs)),
    };
    let exact =
        opts.backend == Backend::Auto && problem.mmd_slack.is_none() && exact::applicable(&problem.objective_matrix);
    let out = if exact {
        exact::solve(&problem.objective_matrix, problem.b_alpha)
    } else {
        admm::solve(&data, opts)
    };
    let status = if out.converged {
        SolveStatus::Optimal
    } else if out.primal_residual > 1e-4 {
        SolveStatus::Infeasible
    } else {
        SolveStatus::Inaccurate
    };
    if status != SolveStatus::Optimal {
        log::warn!(
            "sdr solve {} after {} iterations (primal {:.2e}, dual {:.2e}, gap {:.2e})",
            status.as_str(),
            out.iterations,
            out.primal_residual,
            out.dual_residual,
            out.upper_bound - out.objective
        );
    }
    let (weights, recovered_objective, recovery) = recover(problem, &out.lifted)?;
    let rank_one_gap = rank_one_gap(&out.lifted);
    if rank_one_gap > RANK_ONE_TOL {
        log::debug!("lifted solution far from rank one (gap {rank_one_gap:.3})");
    }
    Ok(SdrSolution {
        sdr_objective: out.objective + problem.constant_term,
        dual_bound: out.upper_bound + problem.constant_term,
        lifted: out.lifted,
        weights,
        recovered_objective,
        rank_one_gap,
        status,
        iterations: out.iterations,
        primal_residual: out.primal_residual,
        dual_residual: out.dual_residual,
        recovery,
        b_alpha: problem.b_alpha,
        closed_form: exact,
    })
}

/// Check that a sweep grid is ascending and within `[1/m, 1]`.
pub fn validate_grid(grid: &[f64], m: usize) -> Result<()> {
    if grid.is_empty() {
        return Err(VceiError::Usage("empty b_alpha grid".into()));
    }
    let min = 1.0 / m as f64;
    for (i, &b) in grid.iter().enumerate() {
        if !(b >= min * (1.0 - 1e-12)) {
            return Err(VceiError::InfeasibleBound { b_alpha: b, m, min });
        }
        if b > 1.0 {
            return Err(VceiError::Usage(format!("grid value {b} exceeds 1")));
        }
        if i > 0 && b < grid[i - 1] {
            return Err(VceiError::Usage("b_alpha grid must be ascending".into()));
        }
    }
    Ok(())
}

/// One solve per grid value. Failures carry the offending `b_alpha`.
pub fn sweep_b_alpha(
    gram_mm: &GramMatrix,
    gram_mn: &GramMatrix,
    gram_nn_sum: f64,
    grid: &[f64],
    b_d: Option<f64>,
    opts: &SolverOptions,
) -> Result<Vec<SdrSolution>> {
    validate_grid(grid, gram_mm.nrows())?;
    grid.iter()
        .map(|&b| {
            let problem = build_problem(gram_mm, gram_mn, gram_nn_sum, Some(b), b_d)?;
            let sol = solve(&problem, opts)?;
            if sol.status == SolveStatus::Infeasible {
                return Err(VceiError::Solver {
                    status: sol.status.as_str().into(),
                    message: format!("b_alpha = {b}: primal residual {:.2e}", sol.primal_residual),
                });
            }
            Ok(sol)
        })
        .collect()
}
