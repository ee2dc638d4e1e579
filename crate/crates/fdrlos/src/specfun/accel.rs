//! Convergence acceleration for slowly converging partial sums.

use crate::error::{NumError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Wynn's epsilon algorithm (iterated Shanks transform).
    Shanks,
    /// Extrapolation in 1/N, 1/N², …
    Richardson,
    /// Extrapolation for tails behaving like ln N / N: basis
    /// {ln N/N, 1/N, ln N/N², 1/N²}.
    RichardsonLog,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Accelerated {
    pub value: f64,
    /// Difference between the two highest-order estimates.
    pub err: f64,
    /// Whether the two highest-order estimates agree to 1e-6 relative.
    pub stable: bool,
    /// Set when the transform broke down and the last partial sum was returned.
    pub fallback: bool,
}

/// Extrapolate the limit of `sums`, where `sums[i]` is the partial sum of
/// the first i + 1 terms.
pub fn accelerate(sums: &[f64], method: Method) -> Result<Accelerated> {
    if sums.len() < 3 {
        return Err(NumError::InvalidParams(format!(
            "acceleration needs at least 3 partial sums, got {}",
            sums.len()
        )));
    }
    if sums.iter().any(|s| !s.is_finite()) {
        return Err(NumError::Domain("partial sums must be finite".into()));
    }
    let last = *sums.last().unwrap();
    let out = match method {
        Method::Shanks => wynn(sums),
        Method::Richardson => richardson(sums, &[inv, inv2, inv3]),
        Method::RichardsonLog => richardson(sums, &[log_inv, inv, log_inv2, inv2]),
    };
    Ok(match out {
        Some((value, prev)) if value.is_finite() => {
            let err = (value - prev).abs();
            Accelerated { value, err, stable: err <= 1e-6 * value.abs().max(1e-300), fallback: false }
        }
        _ => {
            let err = (last - sums[sums.len() - 2]).abs();
            Accelerated { value: last, err, stable: false, fallback: true }
        }
    })
}

fn inv(n: f64) -> f64 {
    1.0 / n
}
fn inv2(n: f64) -> f64 {
    1.0 / (n * n)
}
fn inv3(n: f64) -> f64 {
    1.0 / (n * n * n)
}
fn log_inv(n: f64) -> f64 {
    n.ln() / n
}
fn log_inv2(n: f64) -> f64 {
    n.ln() / (n * n)
}

/// Returns (best, previous-order) estimates.
fn wynn(s: &[f64]) -> Option<(f64, f64)> {
    let n = s.len();
    // eps[k] holds column k of the epsilon table, indexed by starting term
    let mut prev: Vec<f64> = vec![0.0; n + 1];
    let mut cur: Vec<f64> = s.to_vec();
    let mut evens: Vec<f64> = vec![*s.last()?];
    let mut k = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for j in 0..cur.len() - 1 {
            let d = cur[j + 1] - cur[j];
            if d == 0.0 || !d.is_finite() {
                // exact convergence in this column
                return if k % 2 == 0 {
                    Some((cur[j + 1], *evens.last()?))
                } else {
                    let e = *evens.last()?;
                    Some((e, e))
                };
            }
            next.push(prev[j + 1] + 1.0 / d);
        }
        prev = cur;
        cur = next;
        k += 1;
        if k % 2 == 0 {
            evens.push(*cur.last()?);
        }
    }
    match evens.len() {
        1 => None,
        l => Some((evens[l - 1], evens[l - 2])),
    }
}

fn richardson(s: &[f64], basis: &[fn(f64) -> f64]) -> Option<(f64, f64)> {
    let full = fit(s, basis)?;
    let lower = fit(s, &basis[..basis.len() - 1])?;
    Some((full, lower))
}

/// Solve for the constant in S_N = S + Σ c_j φ_j(N) through points spread
/// over the upper half of the available N.
fn fit(s: &[f64], basis: &[fn(f64) -> f64]) -> Option<f64> {
    let k = basis.len() + 1;
    let n = s.len();
    if n < k {
        return None;
    }
    let mut idx: Vec<usize> = (0..k).map(|j| n - 1 - j * (n / 2).max(k - 1) / (k - 1).max(1)).collect();
    idx.dedup();
    if idx.len() < k || idx.iter().any(|&i| i >= n) {
        idx = (n - k..n).collect();
    }
    let mut a = vec![vec![0.0; k + 1]; k];
    for (row, &i) in a.iter_mut().zip(&idx) {
        let nn = (i + 1) as f64;
        row[0] = 1.0;
        for (c, f) in row[1..k].iter_mut().zip(basis) {
            *c = f(nn);
        }
        row[k] = s[i];
    }
    solve_first(&mut a)
}

/// Gaussian elimination with partial pivoting on an augmented k×(k+1)
/// system; returns the first unknown.
fn solve_first(a: &mut [Vec<f64>]) -> Option<f64> {
    let k = a.len();
    for col in 0..k {
        let piv = (col..k).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        for r in col + 1..k {
            let f = a[r][col] / a[col][col];
            for c in col..=k {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    let mut x = vec![0.0; k];
    for r in (0..k).rev() {
        let mut v = a[r][k];
        for c in r + 1..k {
            v -= a[r][c] * x[c];
        }
        x[r] = v / a[r][r];
    }
    x[0].is_finite().then_some(x[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn partial<F: Fn(f64) -> f64>(t: F, n: usize) -> Vec<f64> {
        let mut acc = 0.0;
        (1..=n).map(|i| {
            acc += t(i as f64);
            acc
        })
        .collect()
    }

    #[test]
    fn shanks_on_alternating_series() {
        let s = partial(|i| if i as u64 % 2 == 1 { 1.0 / i } else { -1.0 / i }, 14);
        let a = accelerate(&s, Method::Shanks).unwrap();
        assert!((a.value - std::f64::consts::LN_2).abs() < 1e-10, "{a:?}");
        assert!(a.stable && !a.fallback);
    }

    #[test]
    fn richardson_on_inverse_squares() {
        let s = partial(|i| 1.0 / (i * i), 60);
        let a = accelerate(&s, Method::Richardson).unwrap();
        let want = std::f64::consts::PI.powi(2) / 6.0;
        assert!((a.value - want).abs() < 1e-7, "{}", a.value - want);
        assert!((s[59] - want).abs() > 1e-2);
    }

    #[test]
    fn log_richardson_on_log_tail() {
        // Σ ln i / i² = −ζ'(2)
        let s = partial(|i| i.ln() / (i * i), 400);
        let a = accelerate(&s, Method::RichardsonLog).unwrap();
        let want = 0.937_548_254_315_843_8;
        assert!((a.value - want).abs() < 1e-6, "{}", a.value - want);
        assert!((s[399] - want).abs() > 1e-2);
    }

    #[test]
    fn degenerate_input() {
        assert!(accelerate(&[1.0, 2.0], Method::Shanks).is_err());
        assert!(accelerate(&[1.0, f64::NAN, 2.0], Method::Shanks).is_err());
        let a = accelerate(&[1.0, 1.0, 1.0, 1.0], Method::Shanks).unwrap();
        assert_eq!(a.value, 1.0);
    }
}
