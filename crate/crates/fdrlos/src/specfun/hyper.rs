//! Confluent hypergeometric functions M = ₁F₁ and U, and the generalised
//! exponential integral E_ν.

use crate::error::{NumError, Result};
use crate::specfun::gamma::{gamma_sign, ln_gamma};
use crate::specfun::quad;

const RESCALE: f64 = 1e250;

fn check_b(b: f64) -> Result<()> {
    if b <= 0.0 && b == b.round() {
        return Err(NumError::Domain(format!("kummer_m: b = {b} is a nonpositive integer")));
    }
    Ok(())
}

/// Power series Σ (a)_n/(b)_n zⁿ/n!, returned as (sign, ln|sum|).
fn m_series(a: f64, b: f64, z: f64) -> Result<(f64, f64)> {
    let mut sum = 0.0f64;
    let mut term = 1.0f64;
    let mut ln_scale = 0.0;
    let mut peak = 0.0f64;
    let mut n = 0usize;
    loop {
        sum += term;
        peak = peak.max(sum.abs());
        let nf = n as f64;
        if a + nf == 0.0 {
            break;
        }
        term *= (a + nf) * z / ((b + nf) * (nf + 1.0));
        n += 1;
        if term.abs() > RESCALE {
            term /= RESCALE;
            sum /= RESCALE;
            peak /= RESCALE;
            ln_scale += RESCALE.ln();
        }
        // past the largest term once the ratio drops below one
        let past_peak = (a + nf).abs() * z < (b + nf).abs() * (nf + 1.0);
        if past_peak && term.abs() <= 1e-17 * sum.abs() {
            break;
        }
        if n > 100_000 {
            return Err(NumError::NotConverged(format!("kummer_m series at z={z}")));
        }
    }
    if sum == 0.0 {
        return Ok((0.0, f64::NEG_INFINITY));
    }
    if sum.abs() < 1e-10 * peak {
        return Err(NumError::NotConverged(format!(
            "kummer_m({a}, {b}, {z}) lost precision to cancellation"
        )));
    }
    Ok((sum.signum(), ln_scale + sum.abs().ln()))
}

/// Large-z expansion ln M − z ≈ ln Γ(b) − ln Γ(a) + (a−b) ln z + ln Σ_s (b−a)_s (1−a)_s / (s! z^s).
/// Returns `None` when the truncated series cannot reach double precision.
fn m_asymptotic(a: f64, b: f64, z: f64) -> Option<(f64, f64)> {
    if a <= 0.0 && a == a.round() {
        return None;
    }
    let mut sum = 1.0;
    let mut term = 1.0f64;
    let mut s = 0.0;
    loop {
        let next = term * (b - a + s) * (1.0 - a + s) / ((s + 1.0) * z);
        if next.abs() >= term.abs() && term != 0.0 {
            return None;
        }
        term = next;
        sum += term;
        s += 1.0;
        if term.abs() < 1e-16 * sum.abs() {
            break;
        }
        if s > 200.0 {
            return None;
        }
    }
    let sign = gamma_sign(b) * gamma_sign(a) * sum.signum();
    let ln = ln_gamma(b).ok()? - ln_gamma(a).ok()? + (a - b) * z.ln() + sum.abs().ln();
    Some((sign, ln))
}

/// (sign, ln|M| − z).
fn m_signed_ln_scaled(a: f64, b: f64, z: f64) -> Result<(f64, f64)> {
    check_b(b)?;
    if !(z >= 0.0) || !z.is_finite() || !a.is_finite() || !b.is_finite() {
        return Err(NumError::Domain(format!("kummer_m requires finite z ≥ 0, got {z}")));
    }
    if z == 0.0 {
        return Ok((1.0, 0.0));
    }
    let polynomial = a <= 0.0 && a == a.round();
    if !polynomial && z > 40.0 && z > 2.0 * (a * a + b * b) {
        if let Some(r) = m_asymptotic(a, b, z) {
            return Ok(r);
        }
    }
    let (sign, ln) = m_series(a, b, z)?;
    Ok((sign, ln - z))
}

fn m_signed_ln(a: f64, b: f64, z: f64) -> Result<(f64, f64)> {
    let (sign, ln) = m_signed_ln_scaled(a, b, z)?;
    Ok((sign, ln + z))
}

/// ln ₁F₁(a; b; z) − z, accurate even when both terms are huge.
pub fn ln_kummer_m_scaled(a: f64, b: f64, z: f64) -> Result<f64> {
    let (sign, ln) = m_signed_ln_scaled(a, b, z)?;
    if sign <= 0.0 {
        return Err(NumError::Domain(format!("kummer_m({a}, {b}, {z}) is not positive")));
    }
    Ok(ln)
}

/// ln ₁F₁(a; b; z) for z ≥ 0, requiring the function to be positive
/// there (always so when a > 0 and b > 0).
pub fn ln_kummer_m(a: f64, b: f64, z: f64) -> Result<f64> {
    let (sign, ln) = m_signed_ln(a, b, z)?;
    if sign <= 0.0 {
        return Err(NumError::Domain(format!("kummer_m({a}, {b}, {z}) is not positive")));
    }
    Ok(ln)
}

/// Kummer's confluent hypergeometric function ₁F₁(a; b; z), z ≥ 0.
pub fn kummer_m(a: f64, b: f64, z: f64) -> Result<f64> {
    let (sign, ln) = m_signed_ln(a, b, z)?;
    if ln > 709.0 {
        return Err(NumError::Overflow(format!("kummer_m({a}, {b}, {z})")));
    }
    Ok(sign * ln.exp())
}

/// ln of ∫ exp(φ(v)) dv over the real line for a smooth, unimodal-ish
/// log-integrand with at least exponential decay at both ends.
///
/// `peak_hint` is a point near the maximum; the range is extended in
/// each direction until φ drops 45 below the largest value seen.
pub(crate) fn ln_line_trapezoid<F: Fn(f64) -> f64>(phi: F, peak_hint: f64) -> Result<f64> {
    const STEP: f64 = 0.25;
    let mut top = phi(peak_hint);
    let (mut lo, mut hi) = (peak_hint, peak_hint);
    let (mut f_lo, mut f_hi) = (top, top);
    while f_lo > top - 45.0 || f_hi > top - 45.0 {
        if f_lo > top - 45.0 {
            lo -= STEP;
            f_lo = phi(lo);
            top = top.max(f_lo);
        }
        if f_hi > top - 45.0 {
            hi += STEP;
            f_hi = phi(hi);
            top = top.max(f_hi);
        }
        if hi - lo > 2e5 || !top.is_finite() {
            return Err(NumError::Divergent("log-variable integrand does not decay".into()));
        }
    }
    let mut n = ((hi - lo) / 0.5).ceil().max(16.0) as usize;
    let mut h = (hi - lo) / n as f64;
    let mut sum: f64 = (0..=n).map(|j| (phi(lo + j as f64 * h) - top).exp()).sum();
    let mut prev = sum * h;
    let mut last_diff = f64::INFINITY;
    for _ in 0..14 {
        // add the midpoints of the previous grid
        let mids: f64 = (0..n).map(|j| (phi(lo + (j as f64 + 0.5) * h) - top).exp()).sum();
        sum += mids;
        n *= 2;
        h *= 0.5;
        let cur = sum * h;
        let diff = (cur - prev).abs();
        // the second test catches refinement stalled at the rounding floor
        if diff <= 1e-14 * cur.abs() || (diff <= 1e-12 * cur.abs() && diff >= 0.5 * last_diff) {
            return Ok(top + cur.ln());
        }
        last_diff = diff;
        prev = cur;
    }
    Err(NumError::NotConverged("trapezoid refinement in log variable".into()))
}

/// ln U(a, b, z) for a > 0, z > 0 from the integral representation
/// U = (1/Γ(a)) ∫₀^∞ e^{−zt} t^{a−1} (1+t)^{b−a−1} dt, taken in t = e^v.
pub fn ln_kummer_u_integral(a: f64, b: f64, z: f64) -> Result<f64> {
    if !(a > 0.0) || !(z > 0.0) || !b.is_finite() {
        return Err(NumError::Domain(format!("integral form of U needs a > 0, z > 0; got a={a}, z={z}")));
    }
    let c = b - a - 1.0;
    let phi = |v: f64| {
        let ev = v.exp();
        let log1p = if v > 35.0 { v } else { ev.ln_1p() };
        a * v - z * ev + c * log1p
    };
    // stationary point of the dominant part a·v − z·e^v (+ c·v for large t)
    let guess = if a + c > 0.0 { ((a + c) / z).ln() } else { (a / z).ln() };
    let hint = if guess.is_finite() { guess } else { 0.0 };
    let ln_int = ln_line_trapezoid(phi, hint)?;
    Ok(ln_int - ln_gamma(a)?)
}

/// Tricomi's confluent hypergeometric function U(a, b, z), z > 0.
///
/// Uses the integral representation for a > 0, the Kummer transformation
/// U(a,b,z) = z^{1−b} U(1+a−b, 2−b, z) when that moves a to the positive
/// side, the polynomial form at nonpositive integer a, and otherwise a
/// downward recurrence in a (stable for this recessive solution).
pub fn kummer_u(a: f64, b: f64, z: f64) -> Result<f64> {
    if !(z > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(NumError::Domain(format!("kummer_u requires z > 0, got {z}")));
    }
    if a > 0.0 {
        return exp_checked(ln_kummer_u_integral(a, b, z)?, "kummer_u");
    }
    if 1.0 + a - b > 0.0 {
        let l = (1.0 - b) * z.ln() + ln_kummer_u_integral(1.0 + a - b, 2.0 - b, z)?;
        return exp_checked(l, "kummer_u");
    }
    if a == a.round() {
        // U(−n, b, z) = (−1)^n (b)_n M(−n, b, z), a polynomial in z
        let n = (-a) as usize;
        let mut poch = 1.0;
        for j in 0..n {
            poch *= b + j as f64;
        }
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        if poch == 0.0 {
            // (b)_n vanishes; fall back to the Kummer-transformed polynomial
            return kummer_u_recurrence(a, b, z);
        }
        return Ok(sign * poch * kummer_m(a, b, z)?);
    }
    kummer_u_recurrence(a, b, z)
}

fn kummer_u_recurrence(a: f64, b: f64, z: f64) -> Result<f64> {
    // U(a−1) = (2a − b + z) U(a) − a(a − b + 1) U(a+1)
    let shift = (1.0 - a).ceil().max(1.0);
    let mut a_hi = a + shift; // > 0
    let mut u_next = kummer_u(a_hi + 1.0, b, z)?;
    let mut u = kummer_u(a_hi, b, z)?;
    while a_hi - a > 0.5 {
        let u_prev = (2.0 * a_hi - b + z) * u - a_hi * (a_hi - b + 1.0) * u_next;
        u_next = u;
        u = u_prev;
        a_hi -= 1.0;
    }
    if !u.is_finite() {
        return Err(NumError::Overflow(format!("kummer_u({a}, {b}, {z})")));
    }
    Ok(u)
}

fn exp_checked(l: f64, what: &str) -> Result<f64> {
    if l > 709.0 {
        return Err(NumError::Overflow(what.into()));
    }
    Ok(l.exp())
}

fn expint_range(nu: f64, z: f64) -> f64 {
    // integrand in v = ln t is exp((1−ν)v − z e^v); find where it is 50 below its peak
    let g = |v: f64| (1.0 - nu) * v - z * v.exp();
    let start = if nu < 1.0 { ((1.0 - nu) / z).ln().max(0.0) } else { 0.0 };
    let top = g(start);
    let mut v = start;
    while g(v) > top - 50.0 && v < 1e6 {
        v += 0.5 + 0.1 * v;
    }
    v
}

/// Generalised exponential integral E_ν(z) = ∫₁^∞ t^{−ν} e^{−zt} dt, z > 0.
pub fn gen_exp_integral(nu: f64, z: f64) -> Result<f64> {
    if !(z > 0.0) || !nu.is_finite() {
        return Err(NumError::Domain(format!("gen_exp_integral requires z > 0, got {z}")));
    }
    let top = expint_range(nu, z);
    let r = quad::integrate(|v| ((1.0 - nu) * v - z * v.exp()).exp(), 0.0, top, 0.0, 1e-14)?;
    Ok(r.value)
}

/// ∂E_ν(z)/∂ν = −∫₁^∞ ln t · t^{−ν} e^{−zt} dt.
pub fn gen_exp_integral_dnu(nu: f64, z: f64) -> Result<f64> {
    if !(z > 0.0) || !nu.is_finite() {
        return Err(NumError::Domain(format!("gen_exp_integral requires z > 0, got {z}")));
    }
    let top = expint_range(nu, z);
    let r = quad::integrate(|v| -v * ((1.0 - nu) * v - z * v.exp()).exp(), 0.0, top, 0.0, 1e-14)?;
    Ok(r.value)
}
