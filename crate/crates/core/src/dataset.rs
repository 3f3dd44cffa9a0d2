//! Bivariate sample sets: loading, robust scaling, coreset extraction and
//! synthetic generators.
//!
//! Samples are stored as `n x d` matrices, one observation per row.

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::warn;
use nalgebra::DMatrix;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Result, VceiError};
use crate::kernel::Kernel;
use crate::mmd;

/// Floor applied to the interquartile range of constant columns.
pub const SPREAD_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "x->y")]
    XtoY,
    #[serde(rename = "y->x")]
    YtoX,
}

impl Direction {
    pub fn reversed(self) -> Direction {
        match self {
            Direction::XtoY => Direction::YtoX,
            Direction::YtoX => Direction::XtoY,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::XtoY => "x->y",
            Direction::YtoX => "y->x",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = VceiError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "x->y" => Ok(Direction::XtoY),
            "y->x" => Ok(Direction::YtoX),
            other => Err(VceiError::Usage(format!(
                "unknown direction {other:?}, expected \"x->y\" or \"y->x\""
            ))),
        }
    }
}

/// `n` paired observations with an optional ground-truth direction.
#[derive(Clone, Debug, PartialEq)]
pub struct DataPair {
    pub name: String,
    pub xs: DMatrix<f64>,
    pub ys: DMatrix<f64>,
    pub label: Option<Direction>,
}

impl DataPair {
    pub fn new(name: impl Into<String>, xs: DMatrix<f64>, ys: DMatrix<f64>, label: Option<Direction>) -> Result<Self> {
        if xs.nrows() != ys.nrows() {
            return Err(VceiError::Shape(format!(
                "x has {} rows but y has {}",
                xs.nrows(),
                ys.nrows()
            )));
        }
        if xs.ncols() == 0 || ys.ncols() == 0 {
            return Err(VceiError::Shape("both variables need at least one column".into()));
        }
        if xs.nrows() < 2 {
            return Err(VceiError::InsufficientData {
                got: xs.nrows(),
                need: 2,
            });
        }
        if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
            return Err(VceiError::Usage("non-finite value in sample set".into()));
        }
        Ok(DataPair {
            name: name.into(),
            xs,
            ys,
            label,
        })
    }

    /// Convenience constructor for univariate pairs.
    pub fn from_columns(name: impl Into<String>, xs: &[f64], ys: &[f64], label: Option<Direction>) -> Result<Self> {
        DataPair::new(
            name,
            DMatrix::from_column_slice(xs.len(), 1, xs),
            DMatrix::from_column_slice(ys.len(), 1, ys),
            label,
        )
    }

    pub fn n(&self) -> usize {
        self.xs.nrows()
    }

    /// Exchange the roles of x and y (the label flips accordingly).
    pub fn swapped(&self) -> DataPair {
        DataPair {
            name: self.name.clone(),
            xs: self.ys.clone(),
            ys: self.xs.clone(),
            label: self.label.map(Direction::reversed),
        }
    }

    /// `(cause candidate, effect candidate)` for a hypothesised direction.
    pub fn oriented(&self, direction: Direction) -> (&DMatrix<f64>, &DMatrix<f64>) {
        match direction {
            Direction::XtoY => (&self.xs, &self.ys),
            Direction::YtoX => (&self.ys, &self.xs),
        }
    }

    /// Rows of `[x | y]`.
    pub fn joint(&self) -> DMatrix<f64> {
        let n = self.n();
        let (dx, dy) = (self.xs.ncols(), self.ys.ncols());
        DMatrix::from_fn(
            n,
            dx + dy,
            |i, j| {
                if j < dx {
                    self.xs[(i, j)]
                } else {
                    self.ys[(i, j - dx)]
                }
            },
        )
    }

    pub fn subset(&self, indices: &[usize]) -> DataPair {
        DataPair {
            name: self.name.clone(),
            xs: select_rows(&self.xs, indices),
            ys: select_rows(&self.ys, indices),
            label: self.label,
        }
    }
}

pub fn select_rows(m: &DMatrix<f64>, indices: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(indices.len(), m.ncols(), |i, j| m[(indices[i], j)])
}

/// Which columns of a pair file hold x and which hold y (0-based).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub x: Vec<usize>,
    pub y: Vec<usize>,
}

impl Default for ColumnSpec {
    fn default() -> Self {
        ColumnSpec { x: vec![0], y: vec![1] }
    }
}

/// Sidecar file holding the ground-truth direction for `path`.
pub fn metadata_path(path: &Path) -> PathBuf {
    path.with_extension("meta")
}

/// Parse a whitespace-delimited pair file. `#` lines and blank lines are
/// skipped. Ground truth is read from the `.meta` sidecar when present.
pub fn load_pair(path: &Path, columns: &ColumnSpec) -> Result<DataPair> {
    let text = fs::read_to_string(path).map_err(|e| VceiError::io(path, e))?;
    let width = columns.x.iter().chain(&columns.y).max().map_or(0, |m| m + 1);
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    let mut rows = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = lineno + 1;
        let fields: Vec<f64> = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| VceiError::MalformedFile {
                        path: path.to_path_buf(),
                        row,
                        message: format!("invalid numeric field {tok:?}"),
                    })
            })
            .collect::<Result<_>>()?;
        if fields.len() < width {
            return Err(VceiError::MalformedFile {
                path: path.to_path_buf(),
                row,
                message: format!("expected at least {width} fields, found {}", fields.len()),
            });
        }
        xs.extend(columns.x.iter().map(|&c| fields[c]));
        ys.extend(columns.y.iter().map(|&c| fields[c]));
        rows += 1;
    }
    if rows < 2 {
        return Err(VceiError::InsufficientData { got: rows, need: 2 });
    }
    let label = read_label(&metadata_path(path))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    DataPair::new(
        name,
        DMatrix::from_row_slice(rows, columns.x.len(), &xs),
        DMatrix::from_row_slice(rows, columns.y.len(), &ys),
        label,
    )
}

/// Read a `direction: x->y` metadata file; `None` if it does not exist.
pub fn read_label(path: &Path) -> Result<Option<Direction>> {
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(path).map_err(|e| VceiError::io(path, e))?;
    for (i, line) in text.lines().enumerate() {
        if let Some(rest) = line.trim().strip_prefix("direction:") {
            return rest.parse().map(Some).map_err(|_| VceiError::MalformedFile {
                path: path.to_path_buf(),
                row: i + 1,
                message: format!("bad direction {:?}", rest.trim()),
            });
        }
    }
    Ok(None)
}

/// Write a pair in the loader's format, plus a `.meta` sidecar if labelled.
pub fn write_pair(path: &Path, pair: &DataPair) -> Result<()> {
    let mut out = String::with_capacity(pair.n() * 48);
    for i in 0..pair.n() {
        let row: Vec<String> = pair
            .xs
            .row(i)
            .iter()
            .chain(pair.ys.row(i).iter())
            .map(|v| format!("{v:e}"))
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    write_file(path, out.as_bytes())?;
    if let Some(label) = pair.label {
        write_file(&metadata_path(path), format!("direction: {label}\n").as_bytes())?;
    }
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| VceiError::io(path, e))?;
    f.write_all(bytes).map_err(|e| VceiError::io(path, e))
}

// ---------------------------------------------------------------------------
// Robust scaling

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub center: Vec<f64>,
    pub spread: Vec<f64>,
}

impl ScalingParams {
    /// Per-column median and interquartile range.
    pub fn fit(m: &DMatrix<f64>) -> ScalingParams {
        let mut center = Vec::with_capacity(m.ncols());
        let mut spread = Vec::with_capacity(m.ncols());
        for col in m.column_iter() {
            let mut v: Vec<f64> = col.iter().copied().collect();
            v.sort_by(f64::total_cmp);
            center.push(quantile_sorted(&v, 0.5));
            let iqr = quantile_sorted(&v, 0.75) - quantile_sorted(&v, 0.25);
            spread.push(if iqr > SPREAD_FLOOR { iqr } else { SPREAD_FLOOR });
        }
        ScalingParams { center, spread }
    }

    pub fn transform(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
            (m[(i, j)] - self.center[j]) / self.spread[j]
        })
    }

    pub fn inverse_transform(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * self.spread[j] + self.center[j])
    }
}

/// Linear-interpolation quantile of an ascending slice.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Center each column on its median and divide by its interquartile range.
pub fn robust_standardize(pair: &DataPair) -> (DataPair, ScalingParams, ScalingParams) {
    let px = ScalingParams::fit(&pair.xs);
    let py = ScalingParams::fit(&pair.ys);
    let scaled = DataPair {
        name: pair.name.clone(),
        xs: px.transform(&pair.xs),
        ys: py.transform(&pair.ys),
        label: pair.label,
    };
    (scaled, px, py)
}

// ---------------------------------------------------------------------------
// Coreset

/// Gaussian kernel density estimate with Scott's-rule bandwidth.
#[derive(Clone, Debug)]
pub struct GaussianKde {
    data: DMatrix<f64>,
    bandwidth: Vec<f64>,
}

impl GaussianKde {
    pub fn scott(data: &DMatrix<f64>) -> GaussianKde {
        let (n, d) = data.shape();
        let factor = (n as f64).powf(-1.0 / (d as f64 + 4.0));
        let bandwidth = data
            .column_iter()
            .map(|c| {
                let mean = c.mean();
                let var = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0).max(1.0);
                (var.sqrt() * factor).max(SPREAD_FLOOR)
            })
            .collect();
        GaussianKde {
            data: data.clone(),
            bandwidth,
        }
    }

    pub fn bandwidth(&self) -> &[f64] {
        &self.bandwidth
    }

    pub fn density(&self, point: &[f64]) -> f64 {
        let n = self.data.nrows();
        let norm: f64 = self
            .bandwidth
            .iter()
            .map(|h| h * (2.0 * std::f64::consts::PI).sqrt())
            .product();
        let total: f64 = (0..n)
            .map(|i| {
                let q: f64 = point
                    .iter()
                    .enumerate()
                    .map(|(j, p)| ((p - self.data[(i, j)]) / self.bandwidth[j]).powi(2))
                    .sum();
                (-0.5 * q).exp()
            })
            .sum();
        total / (n as f64 * norm)
    }

    /// Density evaluated at each of the estimator's own samples.
    pub fn self_densities(&self) -> Vec<f64> {
        (0..self.data.nrows())
            .map(|i| {
                let row: Vec<f64> = self.data.row(i).iter().copied().collect();
                self.density(&row)
            })
            .collect()
    }
}

/// How a sample is judged rare under a marginal KDE.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Rarity {
    /// Density below this quantile of the densities over the sample set.
    Quantile(f64),
    /// Density below this absolute value.
    Absolute(f64),
}

impl Default for Rarity {
    fn default() -> Self {
        Rarity::Quantile(0.05)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coreset {
    /// Sorted, distinct row indices into the source pair.
    pub indices: Vec<usize>,
    pub rare_count: usize,
    pub seed: u64,
    /// Squared MMD between the coreset and the full set (joint samples).
    pub mmd2: f64,
}

/// Indices of samples whose marginal density (x or y) is below the rarity
/// threshold, ordered from rarest to least rare.
pub fn rare_indices(pair: &DataPair, rarity: Rarity) -> Vec<usize> {
    let marginals = [&pair.xs, &pair.ys];
    // score < 1 means rare under that marginal
    let mut score = vec![f64::INFINITY; pair.n()];
    for m in marginals {
        let dens = GaussianKde::scott(m).self_densities();
        let thr = match rarity {
            Rarity::Quantile(q) => {
                let mut s = dens.clone();
                s.sort_by(f64::total_cmp);
                quantile_sorted(&s, q)
            }
            Rarity::Absolute(t) => t,
        };
        for (i, &d) in dens.iter().enumerate() {
            if d < thr {
                score[i] = score[i].min(d / thr);
            }
        }
    }
    let mut rare: Vec<usize> = (0..pair.n()).filter(|&i| score[i].is_finite()).collect();
    rare.sort_by(|&a, &b| score[a].total_cmp(&score[b]).then(a.cmp(&b)));
    rare
}

/// Size-`m` subset holding every rare sample plus the random fill (out of
/// `repeats` candidates) closest in MMD to the full joint sample set.
pub fn extract_coreset(
    pair: &DataPair,
    m: usize,
    rarity: Rarity,
    repeats: usize,
    kernel: &Kernel,
    seed: u64,
) -> Result<Coreset> {
    let n = pair.n();
    if m < 2 {
        return Err(VceiError::Usage(format!("coreset size must be >= 2, got {m}")));
    }
    if repeats == 0 {
        return Err(VceiError::Usage("coreset repeats must be >= 1".into()));
    }
    let joint = pair.joint();
    if m >= n {
        let indices: Vec<usize> = (0..n).collect();
        return Ok(Coreset {
            indices,
            rare_count: 0,
            seed,
            mmd2: 0.0,
        });
    }
    let mut rare = rare_indices(pair, rarity);
    if rare.len() > m {
        warn!(
            "{}: {} rare samples exceed coreset size {m}; keeping the {m} rarest",
            pair.name,
            rare.len()
        );
        rare.truncate(m);
    }
    let k = rare.len();
    let mut is_rare = vec![false; n];
    for &i in &rare {
        is_rare[i] = true;
    }
    let pool: Vec<usize> = (0..n).filter(|&i| !is_rare[i]).collect();
    let full_sum = kernel.gram_sum(&joint);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..repeats {
        let fill = index::sample(&mut rng, pool.len(), m - k);
        let mut idx: Vec<usize> = rare.iter().copied().chain(fill.iter().map(|j| pool[j])).collect();
        idx.sort_unstable();
        let sub = select_rows(&joint, &idx);
        let value = mmd::mmd2_subset_vs_full_sum(kernel, &sub, &joint, full_sum)?;
        if best.as_ref().is_none_or(|(v, _)| value < *v) {
            best = Some((value, idx));
        }
    }
    let (mmd2, indices) = best.expect("repeats >= 1");
    Ok(Coreset {
        indices,
        rare_count: k,
        seed,
        mmd2,
    })
}

/// `m` distinct indices out of `0..n`, sorted; all indices when `m >= n`.
pub fn random_subset(n: usize, m: usize, seed: u64) -> Vec<usize> {
    if m >= n {
        return (0..n).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = index::sample(&mut rng, n, m).into_vec();
    idx.sort_unstable();
    idx
}

// ---------------------------------------------------------------------------
// Synthetic generators

/// Synthetic cause-effect families. Everything except `Fig1` is a
/// reconstruction from the family name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SyntheticFamily {
    /// `x ~ U[-2.5, 2.5]`, `y = -x^2 e / 2` with `e ~ N(0, 1)`.
    Fig1,
    /// Additive noise: `y = f(x) + e`.
    An,
    /// Additive noise with `e` scaled by 5.
    AnS,
    /// Location-scale: `y = f(x) + g(x) e`.
    Ls,
    /// Location-scale with `e` scaled by 5.
    LsS,
    /// Multiplicative uniform noise: `y = f(x) u`, `u ~ U[0.5, 1.5]`.
    MnU,
}

impl SyntheticFamily {
    pub const ALL: [SyntheticFamily; 6] = [
        SyntheticFamily::Fig1,
        SyntheticFamily::An,
        SyntheticFamily::AnS,
        SyntheticFamily::Ls,
        SyntheticFamily::LsS,
        SyntheticFamily::MnU,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SyntheticFamily::Fig1 => "fig1",
            SyntheticFamily::An => "an",
            SyntheticFamily::AnS => "an-s",
            SyntheticFamily::Ls => "ls",
            SyntheticFamily::LsS => "ls-s",
            SyntheticFamily::MnU => "mn-u",
        }
    }
}

impl fmt::Display for SyntheticFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SyntheticFamily {
    type Err = VceiError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        SyntheticFamily::ALL
            .into_iter()
            .find(|f| f.as_str() == key || f.as_str().replace('-', "") == key)
            .ok_or_else(|| {
                let names: Vec<&str> = SyntheticFamily::ALL.iter().map(|f| f.as_str()).collect();
                VceiError::Usage(format!("unknown family {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

/// Natural cubic spline through `(knots_x[i], knots_y[i])`, extended
/// linearly outside the knot range.
#[derive(Clone, Debug)]
pub struct NaturalSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    second: Vec<f64>,
}

impl NaturalSpline {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> NaturalSpline {
        let k = xs.len();
        assert!(k >= 2 && ys.len() == k);
        let mut second = vec![0.0; k];
        if k > 2 {
            // tridiagonal system for interior second derivatives (Thomas algorithm)
            let n = k - 2;
            let mut diag = vec![0.0; n];
            let mut upper = vec![0.0; n];
            let mut rhs = vec![0.0; n];
            for i in 0..n {
                let (h0, h1) = (xs[i + 1] - xs[i], xs[i + 2] - xs[i + 1]);
                diag[i] = 2.0 * (h0 + h1);
                upper[i] = h1;
                rhs[i] = 6.0 * ((ys[i + 2] - ys[i + 1]) / h1 - (ys[i + 1] - ys[i]) / h0);
            }
            for i in 1..n {
                let lower = xs[i + 1] - xs[i];
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            let mut sol = vec![0.0; n];
            sol[n - 1] = rhs[n - 1] / diag[n - 1];
            for i in (0..n - 1).rev() {
                sol[i] = (rhs[i] - upper[i] * sol[i + 1]) / diag[i];
            }
            second[1..k - 1].copy_from_slice(&sol);
        }
        NaturalSpline { xs, ys, second }
    }

    fn slope_at_knot(&self, i: usize) -> f64 {
        let k = self.xs.len();
        if i + 1 < k {
            let h = self.xs[i + 1] - self.xs[i];
            (self.ys[i + 1] - self.ys[i]) / h - h * (2.0 * self.second[i] + self.second[i + 1]) / 6.0
        } else {
            let h = self.xs[i] - self.xs[i - 1];
            (self.ys[i] - self.ys[i - 1]) / h + h * (self.second[i - 1] + 2.0 * self.second[i]) / 6.0
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0] + self.slope_at_knot(0) * (x - self.xs[0]);
        }
        if x >= self.xs[k - 1] {
            return self.ys[k - 1] + self.slope_at_knot(k - 1) * (x - self.xs[k - 1]);
        }
        let i = self.xs.partition_point(|&t| t <= x).saturating_sub(1).min(k - 2);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a.powi(3) - a) * self.second[i] + (b.powi(3) - b) * self.second[i + 1]) * h * h / 6.0
    }
}

const SPLINE_KNOTS: usize = 5;

fn random_spline<R: Rng>(rng: &mut R, lo: f64, hi: f64, values: impl Distribution<f64>) -> NaturalSpline {
    let span = if hi > lo { hi - lo } else { 1.0 };
    let xs: Vec<f64> = (0..SPLINE_KNOTS)
        .map(|i| lo + span * i as f64 / (SPLINE_KNOTS - 1) as f64)
        .collect();
    let ys: Vec<f64> = (0..SPLINE_KNOTS).map(|_| values.sample(rng)).collect();
    NaturalSpline::new(xs, ys)
}

/// Labelled (`x->y`) synthetic pair; a pure function of `(family, n, seed)`.
pub fn generate_synthetic(family: SyntheticFamily, n: usize, seed: u64) -> Result<DataPair> {
    if n < 2 {
        return Err(VceiError::InsufficientData { got: n, need: 2 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std_normal = Normal::new(0.0, 1.0).expect("valid normal");
    let (xs, ys): (Vec<f64>, Vec<f64>) = match family {
        SyntheticFamily::Fig1 => {
            let ux = Uniform::new_inclusive(-2.5, 2.5).expect("valid range");
            let xs: Vec<f64> = (0..n).map(|_| ux.sample(&mut rng)).collect();
            let ys = xs.iter().map(|&x| -0.5 * x * x * std_normal.sample(&mut rng)).collect();
            (xs, ys)
        }
        _ => {
            let xs: Vec<f64> = (0..n).map(|_| std_normal.sample(&mut rng)).collect();
            let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let f = random_spline(&mut rng, lo, hi, std_normal);
            let noise_scale = match family {
                SyntheticFamily::AnS | SyntheticFamily::LsS => 5.0,
                _ => 1.0,
            };
            let ys = match family {
                SyntheticFamily::An | SyntheticFamily::AnS => xs
                    .iter()
                    .map(|&x| f.eval(x) + noise_scale * std_normal.sample(&mut rng))
                    .collect(),
                SyntheticFamily::Ls | SyntheticFamily::LsS => {
                    let knot_scale = Uniform::new(0.1, 1.0).expect("valid range");
                    let g = random_spline(&mut rng, lo, hi, knot_scale);
                    xs.iter()
                        .map(|&x| {
                            let scale = g.eval(x).max(0.05);
                            f.eval(x) + scale * noise_scale * std_normal.sample(&mut rng)
                        })
                        .collect()
                }
                SyntheticFamily::MnU => {
                    let u = Uniform::new(0.5, 1.5).expect("valid range");
                    xs.iter().map(|&x| f.eval(x) * u.sample(&mut rng)).collect()
                }
                SyntheticFamily::Fig1 => unreachable!(),
            };
            (xs, ys)
        }
    };
    DataPair::from_columns(format!("{family}-{seed}"), &xs, &ys, Some(Direction::XtoY))
}
