//! Small numerical kernels shared by the grid-based modules.
//!
//! Several routines here are written so that they commute *bit-exactly* with
//! the reflection `z -> -z` of a symmetric grid. The saddle state of the flow
//! is unstable, and any rounding asymmetry would otherwise be amplified until
//! a symmetric initial condition drifts into one of the wells.

/// Sums `values` pairwise from the outside in: `(v[0] + v[n-1]) + (v[1] + v[n-2]) + ...`.
///
/// The result is invariant under reversal of `values`, bit for bit.
pub fn mirror_sum(values: &[f64]) -> f64 {
    let n = values.len();
    let half = n / 2;
    let mut acc = 0.0;
    for k in 0..half {
        acc += values[k] + values[n - 1 - k];
    }
    if n % 2 == 1 {
        acc += values[half];
    }
    acc
}

/// `sum_k values[k] * odd[k]` for an odd weight (`odd[n-1-k] == -odd[k]`), computed
/// from the upper half so that reversing `values` negates the result exactly.
pub fn mirror_odd_dot(values: &[f64], odd: &[f64]) -> f64 {
    let n = values.len();
    debug_assert_eq!(n, odd.len());
    let half = n / 2;
    let mut acc = 0.0;
    for k in 0..half {
        let hi = n - 1 - k;
        acc += (values[hi] - values[k]) * odd[hi];
    }
    acc
}

/// Bernoulli function `B(x) = x / (e^x - 1)`, with `B(0) = 1`.
pub fn bernoulli(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        // 1 - x/2 + x^2/12 - x^4/720
        let x2 = x * x;
        1.0 - 0.5 * x + x2 / 12.0 - x2 * x2 / 720.0
    } else {
        x / x.exp_m1()
    }
}

/// Thomas algorithm for `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
///
/// `lower[0]` and `upper[n-1]` are ignored. Returns `None` on a zero pivot.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Some(Vec::new());
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot == 0.0 || !pivot.is_finite() {
        return None;
    }
    c[0] = upper[0] / pivot;
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i] * c[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return None;
        }
        c[i] = if i + 1 < n { upper[i] / pivot } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / pivot;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Some(x)
}

/// Tridiagonal solve that is exactly equivariant under index reversal.
///
/// Solves the system once as given and once in reversed index order and
/// averages the two answers. If the system for `R x` is the reversal of the
/// system for `x`, the two results are reversals of each other bit for bit.
pub fn solve_tridiagonal_mirrored(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let forward = solve_tridiagonal(lower, diag, upper, rhs)?;
    // reversed system: row i of the new system is row n-1-i of the old one,
    // with the roles of the sub- and super-diagonal swapped
    let rev = |v: &[f64]| v.iter().rev().copied().collect::<Vec<_>>();
    let backward = solve_tridiagonal(&rev(upper), &rev(diag), &rev(lower), &rev(rhs))?;
    let n = forward.len();
    Some((0..n).map(|i| 0.5 * (forward[i] + backward[n - 1 - i])).collect())
}

/// Numerically stable `log(sum_i exp(a_i))`.
pub fn log_sum_exp(values: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let s: f64 = values.into_iter().map(|a| (a - max).exp()).sum();
    max + s.ln()
}

/// Composite trapezoid rule for samples `f` on a uniform grid of spacing `h`.
pub fn trapezoid(f: &[f64], h: f64) -> f64 {
    match f.len() {
        0 | 1 => 0.0,
        n => h * (0.5 * (f[0] + f[n - 1]) + f[1..n - 1].iter().sum::<f64>()),
    }
}

/// Median of a slice (average of the two central values for even length).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
