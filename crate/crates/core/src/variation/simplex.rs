//! Euclidean projection onto the (capped) probability simplex.

/// Project `v` onto `{a : 0 <= a_i <= cap, sum a = 1}`.
///
/// `cap * v.len()` must be at least 1; pass `cap >= 1` for the plain simplex.
pub fn project_capped_simplex(v: &[f64], cap: f64) -> Vec<f64> {
    let n = v.len();
    assert!(n > 0, "empty vector");
    let cap = cap.min(1.0);
    let nf = n as f64;
    assert!(cap * nf >= 1.0 - 1e-12, "cap {cap} infeasible for {n} entries");
    if cap * nf <= 1.0 + 1e-12 {
        return vec![1.0 / nf; n];
    }
    let mass = |tau: f64| -> f64 { v.iter().map(|&x| (x - tau).clamp(0.0, cap)).sum() };

    // mass(tau) is piecewise linear and nonincreasing with kinks at v_i - cap and v_i
    let mut kinks: Vec<f64> = v.iter().flat_map(|&x| [x - cap, x]).collect();
    kinks.sort_by(f64::total_cmp);
    kinks.dedup();
    let masses: Vec<f64> = kinks.iter().map(|&t| mass(t)).collect();
    let k = masses.iter().rposition(|&m| m >= 1.0).unwrap_or(0);
    let tau = if masses[k] == 1.0 || k + 1 == kinks.len() {
        kinks[k]
    } else {
        let mid = 0.5 * (kinks[k] + kinks[k + 1]);
        let (mut free_sum, mut free, mut capped) = (0.0, 0usize, 0usize);
        for &x in v {
            let t = x - mid;
            if t >= cap {
                capped += 1;
            } else if t > 0.0 {
                free += 1;
                free_sum += x;
            }
        }
        if free == 0 {
            kinks[k]
        } else {
            (free_sum + cap * capped as f64 - 1.0) / free as f64
        }
    };
    v.iter().map(|&x| (x - tau).clamp(0.0, cap)).collect()
}
