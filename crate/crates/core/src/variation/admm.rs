//! Operator-splitting (ADMM) solver for the lifted weight problem
//!
//! ```text
//! maximize    <C, A>
//! subject to  [[A, A1], [1'A, 1]]  PSD
//!             A >= 0 (entrywise),  1'A1 = 1,  A = A'
//!             A1 <= b              (optional)
//!             <G, A> <= h          (optional)
//! ```
//!
//! The variable `A` is a dense symmetric matrix with the Frobenius inner
//! product. Each cone block gets its own slack; the `A`-update is an
//! equality-constrained least-squares problem whose normal operator
//! `c0 I + c1 (.J + J.) + c2 G<G, .>` is inverted in closed form, so one
//! iteration costs one eigendecomposition of size `M + 1` plus `O(M^2)` work.
//!
//! A certified upper bound on the optimum is computed from the scaled dual
//! iterates; the solver stops when primal and dual residuals and the gap to
//! that bound are all within tolerance.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::Backend;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub max_iter: usize,
    /// Initial penalty parameter.
    pub rho: f64,
    /// Over-relaxation factor in (0, 2).
    pub relaxation: f64,
    /// Rebalance `rho` every this many iterations (0 disables).
    pub adapt_every: usize,
    /// Convergence (and dual bound) check interval.
    pub check_every: usize,
    pub backend: Backend,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            eps_abs: 1e-7,
            eps_rel: 1e-7,
            max_iter: 20_000,
            rho: 1.0,
            relaxation: 1.6,
            adapt_every: 50,
            check_every: 10,
            backend: Backend::Auto,
        }
    }
}

pub(crate) struct ConicData<'a> {
    pub objective: &'a DMatrix<f64>,
    pub row_bound: Option<f64>,
    pub slack: Option<(&'a DMatrix<f64>, f64)>,
}

#[derive(Clone, Debug)]
pub(crate) struct AdmmOutput {
    pub lifted: DMatrix<f64>,
    pub objective: f64,
    pub upper_bound: f64,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub converged: bool,
}

fn frob(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// `y += a x`.
fn axpy(y: &mut DMatrix<f64>, a: f64, x: &DMatrix<f64>) {
    y.iter_mut().zip(x.iter()).for_each(|(yi, xi)| *yi += a * xi);
}

fn amax(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `[[A, A1], [1'A, 1]]`.
fn lift(a: &DMatrix<f64>) -> DMatrix<f64> {
    let m = a.nrows();
    let mut y = DMatrix::zeros(m + 1, m + 1);
    y.view_mut((0, 0), (m, m)).copy_from(a);
    for i in 0..m {
        let r = a.row(i).sum();
        y[(i, m)] = r;
        y[(m, i)] = r;
    }
    y[(m, m)] = 1.0;
    y
}

/// Adjoint of `A -> [[A, A1], [1'A, 0]]`: `W11 + w 1' + 1 w'`.
fn lift_adjoint(w: &DMatrix<f64>) -> DMatrix<f64> {
    let m = w.nrows() - 1;
    DMatrix::from_fn(m, m, |i, j| w[(i, j)] + w[(i, m)] + w[(j, m)])
}

/// `(v 1' + 1 v') / 2`.
fn sym_outer_ones(v: &DVector<f64>) -> DMatrix<f64> {
    let m = v.len();
    DMatrix::from_fn(m, m, |i, j| 0.5 * (v[i] + v[j]))
}

fn project_psd(x: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(x.clone());
    let n = x.nrows();
    let positive = eig.eigenvalues.iter().filter(|&&l| l > 0.0).count();
    let mut out;
    if positive <= n / 2 {
        out = DMatrix::zeros(n, n);
        for (k, &l) in eig.eigenvalues.iter().enumerate() {
            if l > 0.0 {
                let q = eig.eigenvectors.column(k);
                out.ger(l, &q, &q, 1.0);
            }
        }
    } else {
        out = x.clone();
        for (k, &l) in eig.eigenvalues.iter().enumerate() {
            if l < 0.0 {
                let q = eig.eigenvectors.column(k);
                out.ger(-l, &q, &q, 1.0);
            }
        }
    }
    // restore exact symmetry
    let t = out.transpose();
    (out + t) * 0.5
}

/// Closed-form inverse of `A -> c0 A + c1 (A J + J A) (+ c2 G <G, A>)`.
struct NormalOperator {
    m: f64,
    c0: f64,
    c1: f64,
    slack: Option<(DMatrix<f64>, DMatrix<f64>, f64)>, // (G, T^-1 G, c2 / (1 + c2 <G, T^-1 G>))
}

impl NormalOperator {
    fn new(m: usize, c0: f64, c1: f64, g: Option<(&DMatrix<f64>, f64)>) -> Self {
        let mut op = NormalOperator {
            m: m as f64,
            c0,
            c1,
            slack: None,
        };
        if let Some((g, c2)) = g {
            let tg = op.base_inverse(g);
            let denom = 1.0 + c2 * frob(g, &tg);
            op.slack = Some((g.clone(), tg, c2 / denom));
        }
        op
    }

    fn base_inverse(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let (m, c0, c1) = (self.m, self.c0, self.c1);
        let r: Vec<f64> = b.row_iter().map(|row| row.sum()).collect();
        let t: f64 = r.iter().sum();
        let k_cross = (1.0 / (c0 + c1 * m) - 1.0 / c0) / m;
        let k_mean = (1.0 / c0 - 2.0 / (c0 + c1 * m) + 1.0 / (c0 + 2.0 * c1 * m)) * t / (m * m);
        DMatrix::from_fn(b.nrows(), b.ncols(), |i, j| {
            b[(i, j)] / c0 + k_cross * (r[i] + r[j]) + k_mean
        })
    }

    fn inverse(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let mut x = self.base_inverse(b);
        if let Some((g, tg, coef)) = &self.slack {
            let s = coef * frob(g, &x);
            axpy(&mut x, -s, tg);
        }
        x
    }

    /// Forward map without the slack term.
    #[cfg(test)]
    fn apply_base(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        let r: Vec<f64> = a.row_iter().map(|row| row.sum()).collect();
        DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| {
            self.c0 * a[(i, j)] + self.c1 * (r[i] + r[j])
        })
    }
}

struct Blocks {
    psd: DMatrix<f64>,
    nonneg: DMatrix<f64>,
    row: Option<DVector<f64>>,
    slack: Option<f64>,
}

pub(crate) fn solve(data: &ConicData<'_>, opts: &SolverOptions) -> AdmmOutput {
    let c = data.objective;
    let m = c.nrows();
    let mf = m as f64;
    let b = data.row_bound;
    let (g, h) = match data.slack {
        Some((g, h)) => (Some(g), h),
        None => (None, 0.0),
    };

    let c1 = 1.0 + if b.is_some() { 0.5 } else { 0.0 };
    let op = NormalOperator::new(m, 2.0, c1, g.map(|g| (g, 1.0)));
    let jmat = DMatrix::from_element(m, m, 1.0);
    let hinv_j = op.inverse(&jmat);
    let j_hinv_j = hinv_j.sum();

    // maps A -> (T_k A + d_k)
    let affine = |a: &DMatrix<f64>| -> Blocks {
        let rows: DVector<f64> = DVector::from_iterator(m, a.row_iter().map(|r| r.sum()));
        Blocks {
            psd: lift(a),
            nonneg: a.clone(),
            row: b.map(|bb| DVector::from_element(m, bb) - &rows),
            slack: g.map(|g| h - frob(g, a)),
        }
    };
    let project = |x: &Blocks| -> Blocks {
        Blocks {
            psd: project_psd(&x.psd),
            nonneg: x.nonneg.map(|v| v.max(0.0)),
            row: x.row.as_ref().map(|r| r.map(|v| v.max(0.0))),
            slack: x.slack.map(|s| s.max(0.0)),
        }
    };
    // sum_k T_k^* w_k
    let adjoint = |w: &Blocks| -> DMatrix<f64> {
        let mut out = lift_adjoint(&w.psd) + &w.nonneg;
        if let Some(r) = &w.row {
            out -= sym_outer_ones(r);
        }
        if let (Some(s), Some(g)) = (w.slack, g) {
            axpy(&mut out, -s, g);
        }
        out
    };

    let mut a = DMatrix::from_element(m, m, 1.0 / (mf * mf));
    let mut z = project(&affine(&a));
    let mut u = Blocks {
        psd: DMatrix::zeros(m + 1, m + 1),
        nonneg: DMatrix::zeros(m, m),
        row: b.map(|_| DVector::zeros(m)),
        slack: g.map(|_| 0.0),
    };
    let mut rho = opts.rho;
    let alpha = opts.relaxation;
    let c_scale = amax(c).max(1e-12);

    let mut out = AdmmOutput {
        lifted: a.clone(),
        objective: frob(c, &a),
        upper_bound: f64::INFINITY,
        iterations: 0,
        primal_residual: f64::INFINITY,
        dual_residual: f64::INFINITY,
        converged: false,
    };

    for it in 1..=opts.max_iter {
        // A-update
        let v = Blocks {
            psd: &z.psd - &u.psd,
            nonneg: &z.nonneg - &u.nonneg,
            row: match (&z.row, &u.row, b) {
                (Some(zr), Some(ur), Some(bb)) => Some(zr - ur - DVector::from_element(m, bb)),
                _ => None,
            },
            slack: match (z.slack, u.slack) {
                (Some(zs), Some(us)) => Some(zs - us - h),
                _ => None,
            },
        };
        let rhs = c + adjoint(&v) * rho;
        let hinv_rhs = op.inverse(&rhs);
        let lambda = (hinv_rhs.sum() - rho) / j_hinv_j;
        a = (hinv_rhs - &hinv_j * lambda) / rho;

        // relaxed slack update
        let ta = affine(&a);
        let relax = |t: &DMatrix<f64>, zo: &DMatrix<f64>| t * alpha + zo * (1.0 - alpha);
        let hat = Blocks {
            psd: relax(&ta.psd, &z.psd),
            nonneg: relax(&ta.nonneg, &z.nonneg),
            row: ta
                .row
                .as_ref()
                .zip(z.row.as_ref())
                .map(|(t, zo)| t * alpha + zo * (1.0 - alpha)),
            slack: ta.slack.zip(z.slack).map(|(t, zo)| alpha * t + (1.0 - alpha) * zo),
        };
        let shifted = Blocks {
            psd: &hat.psd + &u.psd,
            nonneg: &hat.nonneg + &u.nonneg,
            row: hat.row.as_ref().zip(u.row.as_ref()).map(|(x, y)| x + y),
            slack: hat.slack.zip(u.slack).map(|(x, y)| x + y),
        };
        let z_new = project(&shifted);
        u = Blocks {
            psd: &shifted.psd - &z_new.psd,
            nonneg: &shifted.nonneg - &z_new.nonneg,
            row: shifted.row.as_ref().zip(z_new.row.as_ref()).map(|(x, y)| x - y),
            slack: shifted.slack.zip(z_new.slack).map(|(x, y)| x - y),
        };

        let check = it % opts.check_every.max(1) == 0 || it == opts.max_iter;
        let adapt = opts.adapt_every > 0 && it % opts.adapt_every == 0;
        if check || adapt {
            let dz = Blocks {
                psd: &z_new.psd - &z.psd,
                nonneg: &z_new.nonneg - &z.nonneg,
                row: z_new.row.as_ref().zip(z.row.as_ref()).map(|(x, y)| x - y),
                slack: z_new.slack.zip(z.slack).map(|(x, y)| x - y),
            };
            let prim = amax(&(&ta.psd - &z_new.psd))
                .max(amax(&(&ta.nonneg - &z_new.nonneg)))
                .max(
                    ta.row
                        .as_ref()
                        .zip(z_new.row.as_ref())
                        .map_or(0.0, |(x, y)| (x - y).amax()),
                )
                .max(ta.slack.zip(z_new.slack).map_or(0.0, |(x, y)| (x - y).abs()));
            let prim_scale = amax(&ta.psd).max(amax(&z_new.psd));
            let dual = rho * amax(&adjoint(&dz));
            let dual_scale = c_scale.max(rho * amax(&adjoint(&u)));

            if adapt {
                let ratio = ((prim / prim_scale.max(1e-12)) / (dual / dual_scale).max(1e-30)).sqrt();
                if !(0.2..=5.0).contains(&ratio) {
                    let new_rho = (rho * ratio).clamp(1e-6, 1e6);
                    let scale = rho / new_rho;
                    u.psd *= scale;
                    u.nonneg *= scale;
                    if let Some(r) = u.row.as_mut() {
                        *r *= scale;
                    }
                    if let Some(s) = u.slack.as_mut() {
                        *s *= scale;
                    }
                    rho = new_rho;
                }
            }

            if check {
                let objective = frob(c, &a);
                let upper = dual_bound(c, &u, rho, b, g, h);
                let gap = upper - objective;
                out = AdmmOutput {
                    lifted: a.clone(),
                    objective,
                    upper_bound: upper,
                    iterations: it,
                    primal_residual: prim,
                    dual_residual: dual,
                    converged: false,
                };
                let tol = |scale: f64| opts.eps_abs + opts.eps_rel * scale;
                if prim <= tol(prim_scale) && dual <= tol(dual_scale) && gap <= tol(objective.abs().max(upper.abs())) {
                    out.converged = true;
                    return out;
                }
            }
        }
        z = z_new;
    }
    out
}

/// Upper bound on `max <C, A>` from dual multipliers `mu_k = Proj_{K*}(-rho u_k)`:
/// `max_ij (C + sum T_k^* mu_k)_ij + sum <mu_k, d_k>`, valid because feasible
/// `A` is entrywise nonnegative with unit total mass.
fn dual_bound(c: &DMatrix<f64>, u: &Blocks, rho: f64, b: Option<f64>, g: Option<&DMatrix<f64>>, h: f64) -> f64 {
    let n = u.psd.nrows();
    let mu_psd = project_psd(&(&u.psd * -rho));
    let mut s = c + lift_adjoint(&mu_psd);
    let mut offset = mu_psd[(n - 1, n - 1)];
    if let (Some(r), Some(bb)) = (&u.row, b) {
        let mu = r.map(|v| (-rho * v).max(0.0));
        s -= sym_outer_ones(&mu);
        offset += bb * mu.sum();
    }
    if let (Some(sl), Some(g)) = (u.slack, g) {
        let mu = (-rho * sl).max(0.0);
        axpy(&mut s, -mu, g);
        offset += h * mu;
    }
    s.max() + offset
}
