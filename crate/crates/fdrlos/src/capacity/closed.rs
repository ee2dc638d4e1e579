//! Capacities as (bivariate) Meijer G expressions.
//!
//! The bivariate integrals are written directly as gamma ratios Ψ₁(s+t),
//! Ψ₂(s), Ψ₃(t) with kernel x^{−s} y^{−t}.

use std::f64::consts::LN_2;

use super::{CapacityEstimate, Diagnostics, Method, NumericsConfig, OpraCutoff};
use crate::channel::{average_over_x, ChannelParams};
use crate::error::{NumError, Result};
use crate::specfun::accel::{accelerate, Method as Accel};
use crate::specfun::gamma::{gamma, ln_gamma, EULER_GAMMA};
use crate::specfun::meijer::{egbmg_ratios, meijer_g, MeijerGSpec};
use crate::specfun::mellin::{line_only, plane_integral, GammaFactor, GammaRatio, MbValue};

fn up(c: f64) -> GammaFactor {
    GammaFactor::plus(c)
}

fn down(c: f64) -> GammaFactor {
    GammaFactor::minus(c)
}

fn ratio(num: &[GammaFactor], den: &[GammaFactor]) -> GammaRatio {
    GammaRatio::new(num.to_vec(), den.to_vec())
}

/// ∫₀^∞ ln(1 + zt) tⁱ e^{−t} dt = G^{1,3}_{3,2}(1, 1, −i; 1, 0 | z).
fn log_moment(i: usize, z: f64, n: &NumericsConfig) -> Result<MbValue> {
    let spec = MeijerGSpec::new(&[1.0, 1.0, -(i as f64)], &[], &[1.0], &[0.0]);
    meijer_g(&spec, z, &n.contour)
}

/// E[ln(1 + γ̄ u v)] for independent unit exponentials u, v.
fn double_rayleigh_log(gamma_bar: f64, n: &NumericsConfig) -> Result<MbValue> {
    let spec = MeijerGSpec::new(&[1.0, 1.0, 0.0, 0.0], &[], &[1.0], &[0.0]);
    meijer_g(&spec, gamma_bar, &n.contour)
}

fn scaled(v: MbValue, factor: f64) -> (f64, f64) {
    (v.value * factor, v.err * factor.abs())
}

/// E[log₂(1 + γ) | x] in closed form, returned as (value, error).
///
/// Integer m expands the conditional density into m exponential-times-power
/// terms, each a univariate Meijer G. Other m use a bivariate integral with
/// a Γ(1 − m) prefactor; near-integer m is routed to the integer form.
pub fn ora_conditional_closed(x: f64, p: &ChannelParams, n: &NumericsConfig) -> Result<(f64, f64)> {
    p.validate()?;
    n.validate()?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(NumError::Domain(format!("x must be > 0, got {x}")));
    }
    let (k, m, g) = (p.k, p.m, p.gamma_bar);
    let mx = m * x;
    let scale = (k + mx) * g / (m * (k + 1.0));
    if k == 0.0 {
        return Ok(scaled(log_moment(0, scale, n)?, 1.0 / LN_2));
    }
    match n.integer_m(m) {
        Some(mi) => {
            let near = mx / (k + mx);
            let far = k / (k + mx);
            let (mut value, mut err) = (0.0, 0.0);
            for i in 0..mi {
                let ln_c = ln_gamma(mi as f64)? - ln_gamma((mi - i) as f64)? - 2.0 * ln_gamma(i as f64 + 1.0)?;
                let w = (ln_c + (mi - 1 - i) as f64 * near.ln() + i as f64 * far.ln()).exp() / LN_2;
                let (v, e) = scaled(log_moment(i, scale, n)?, w);
                value += v;
                err += e;
            }
            Ok((value, err))
        }
        None => ora_conditional_egbmg(x, p, n),
    }
}

/// The bivariate form of E[log₂(1 + γ) | x]; rejects integer m, where
/// Γ(1 − m) is infinite and the pole families pinch.
pub fn ora_conditional_egbmg(x: f64, p: &ChannelParams, n: &NumericsConfig) -> Result<(f64, f64)> {
    let (k, m, g) = (p.k, p.m, p.gamma_bar);
    if (m - m.round()).abs() <= n.integer_snap.max(1e-6) {
        return Err(NumError::ContourInfeasible(format!(
            "m = {m} is an integer; use the finite-sum form instead"
        )));
    }
    if k == 0.0 {
        return Err(NumError::Domain("the bivariate form needs k > 0".into()));
    }
    let mx = m * x;
    let b1 = ratio(&[down(1.0)], &[]);
    let b2 = ratio(&[up(1.0), down(0.0), down(0.0)], &[down(1.0)]);
    let b3 = ratio(&[up(0.0), down(1.0 - m)], &[down(1.0)]);
    let xa = (k + mx) * g / (m * (k + 1.0));
    let ya = k / mx;
    let e = egbmg_ratios([&b1, &b2, &b3], xa, ya, &n.contour, &n.contour)?;
    let gm = gamma(1.0 - m)?;
    let pre = (mx / (k + mx)).powf(m - 1.0) / (gm * LN_2);
    Ok(scaled(e, pre))
}

fn integer_m(p: &ChannelParams, n: &NumericsConfig) -> Result<usize> {
    n.integer_m(p.m)
        .ok_or_else(|| NumError::InvalidParams(format!("this form needs integer m, got {}", p.m)))
}

/// ORA capacity for integer m as a finite sum of bivariate Meijer G terms.
pub fn ora_closed_integer(p: &ChannelParams, n: &NumericsConfig) -> Result<CapacityEstimate> {
    p.validate()?;
    n.validate()?;
    let mi = integer_m(p, n)?;
    let mut diag = Diagnostics { terms: Some(mi), converged: true, ..Default::default() };
    if p.k == 0.0 {
        let v = double_rayleigh_log(p.gamma_bar, n)?;
        diag.terms = Some(1);
        diag.nodes = Some(v.nodes);
        diag.notes.push("k = 0: double-Rayleigh form".into());
        return CapacityEstimate::new(v.value / LN_2, Method::ClosedForm, v.err / LN_2, diag);
    }
    let m = mi as f64;
    let z = p.k / m;
    let x = p.k * p.gamma_bar / (m * (p.k + 1.0));
    let b1 = ratio(&[up(m - 1.0)], &[]);
    let (mut value, mut err, mut nodes) = (0.0, 0.0, 0);
    for i in 0..mi {
        let fi = i as f64;
        let b2 = ratio(&[up(1.0), down(0.0), down(0.0), down(1.0 + fi)], &[down(1.0), up(m - 1.0)]);
        let b3 = ratio(&[down(0.0), up(m - fi)], &[]);
        let e = egbmg_ratios([&b1, &b2, &b3], x, z, &n.contour, &n.contour)?;
        let ln_c = ln_gamma(m)? + (fi + 1.0 - m) * z.ln() - 2.0 * ln_gamma(fi + 1.0)? - ln_gamma(m - fi)?;
        let c = ln_c.exp() / LN_2;
        value += c * e.value;
        err += c.abs() * e.err;
        nodes += e.nodes;
        diag.notes.extend(e.notes.into_iter().map(|s| format!("term {i}: {s}")));
    }
    diag.nodes = Some(nodes);
    CapacityEstimate::new(value, Method::ClosedForm, err, diag)
}

/// ORA capacity in closed form for any m: the finite sum for integer m,
/// otherwise the conditional bivariate form averaged over x.
pub fn ora_closed(p: &ChannelParams, n: &NumericsConfig) -> Result<CapacityEstimate> {
    p.validate()?;
    n.validate()?;
    if p.k == 0.0 {
        // the shadowing shape is irrelevant without a LoS term
        return ora_closed_integer(&ChannelParams { m: 1.0, ..*p }, n);
    }
    if n.integer_m(p.m).is_some() {
        return ora_closed_integer(p, n);
    }
    let mut err_inner = 0.0f64;
    let avg = average_over_x(
        |x| {
            let (v, e) = ora_conditional_closed(x, p, n)?;
            err_inner = err_inner.max(e);
            Ok(v)
        },
        &n.grid,
    )?;
    let diag = Diagnostics {
        nodes: Some(avg.order),
        converged: avg.converged,
        notes: vec!["conditional bivariate form averaged over x".into()],
        ..Default::default()
    };
    CapacityEstimate::new(avg.value, Method::ClosedForm, avg.err + err_inner, diag)
}

/// Terms and partial sums of the per-term OPRA series.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OpraSeries {
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub errs: Vec<f64>,
}

fn opra_scale(p: &ChannelParams, cutoff: &OpraCutoff) -> f64 {
    (p.k + 1.0) * cutoff.gamma0 / p.gamma_bar
}

/// E[log₂(γ/γ₀)⁺] when k = 0: 2K₀(2√P)/ln 2 with P = γ₀/γ̄.
fn opra_double_rayleigh(p: &ChannelParams, cutoff: &OpraCutoff, n: &NumericsConfig) -> Result<MbValue> {
    let spec = MeijerGSpec::new(&[], &[], &[0.0, 0.0], &[]);
    meijer_g(&spec, opra_scale(p, cutoff), &n.contour)
}

fn opra_term(i: usize, p: &ChannelParams, cutoff: &OpraCutoff, n: &NumericsConfig) -> Result<(f64, f64)> {
    let m = p.m;
    let z = p.k / m;
    let fi = i as f64;
    let b1 = ratio(&[up(m + 1.0)], &[]);
    let b2 = ratio(&[up(fi + 1.0), up(0.0), up(0.0)], &[up(1.0), up(1.0)]);
    let b3 = ratio(&[down(0.0), up(m + fi)], &[]);
    let e = egbmg_ratios([&b1, &b2, &b3], opra_scale(p, cutoff), z, &n.contour, &n.contour)?;
    let c = (-m * z.ln() - ln_gamma(m)? - 2.0 * ln_gamma(fi + 1.0)?).exp() / LN_2;
    Ok((c * e.value, c.abs() * e.err))
}

/// The first `n_terms` terms of the OPRA series and their partial sums.
pub fn opra_series(p: &ChannelParams, cutoff: &OpraCutoff, n_terms: usize, n: &NumericsConfig) -> Result<OpraSeries> {
    p.validate()?;
    n.validate()?;
    if p.k == 0.0 {
        return Err(NumError::Domain("the OPRA series needs k > 0".into()));
    }
    let mut out = OpraSeries::default();
    let mut sum = 0.0;
    for i in 0..n_terms {
        let (t, e) = opra_term(i, p, cutoff, n)?;
        sum += t;
        out.terms.push(t);
        out.partial_sums.push(sum);
        out.errs.push(e);
    }
    Ok(out)
}

/// The OPRA series summed under the integral sign.
///
/// Summing the terms needs Re(s + t) < −m, which moves the s-line left of
/// the double pole at s = 0 in every term. Those residues sum in turn to a
/// single integral of Γ(−t)Γ(m+t)² plus −2γ_E − ln P, so the result is
/// −(plane integral) + (line integral) + constant, all on fixed lines.
pub fn opra_closed_resummed(p: &ChannelParams, cutoff: &OpraCutoff, n: &NumericsConfig) -> Result<CapacityEstimate> {
    p.validate()?;
    n.validate()?;
    if p.k == 0.0 {
        let v = opra_double_rayleigh(p, cutoff, n)?;
        let diag = Diagnostics { terms: Some(1), nodes: Some(v.nodes), converged: true, notes: vec!["k = 0: double-Rayleigh form".into()] };
        return CapacityEstimate::new(v.value / LN_2, Method::ClosedForm, v.err / LN_2, diag);
    }
    let m = p.m;
    let z = p.k / m;
    let x = opra_scale(p, cutoff);
    let (sigma_s, sigma_t) = (-0.6, 0.3 - m);
    let b1 = ratio(&[up(m + 1.0), down(-m)], &[]);
    let b2 = ratio(&[up(0.0)], &[down(1.0)]);
    let b3 = ratio(&[down(0.0), up(m)], &[down(1.0 - m)]);
    let plane = plane_integral([&b1, &b2, &b3], x.ln(), z.ln(), sigma_s, sigma_t, &n.contour, &n.contour)?;
    let tail = ratio(&[down(0.0), up(m), up(m)], &[]);
    let line = line_only(&tail, z.ln(), -m - 0.5, &n.contour)?;
    let c = (-m * z.ln() - ln_gamma(m)?).exp();
    let value = (c * (line.value - plane.value) - 2.0 * EULER_GAMMA - x.ln()) / LN_2;
    let err = c * (line.err + plane.err) / LN_2;
    let diag = Diagnostics { nodes: Some(plane.nodes + line.nodes), converged: true, notes: plane.notes, ..Default::default() };
    CapacityEstimate::new(value, Method::ClosedForm, err, diag)
}

/// OPRA capacity in closed form.
///
/// Sums the per-term series with Shanks acceleration over the last seven
/// partial sums while it settles within `series_tol`. When the terms decay
/// too slowly, the resummed integral is returned instead, with a note.
pub fn opra_closed(p: &ChannelParams, cutoff: &OpraCutoff, n: &NumericsConfig) -> Result<CapacityEstimate> {
    p.validate()?;
    n.validate()?;
    if p.k == 0.0 {
        return opra_closed_resummed(p, cutoff, n);
    }
    let tol = n.series_tol;
    let mut sums: Vec<f64> = Vec::new();
    let mut err = 0.0;
    let mut last: Option<f64> = None;
    let mut reason = String::new();
    for i in 0..n.n_max {
        let (t, e) = match opra_term(i, p, cutoff, n) {
            Ok(v) => v,
            Err(e) => {
                reason = format!("term {i} failed: {e}");
                break;
            }
        };
        err += e;
        let s = sums.last().copied().unwrap_or(0.0) + t;
        sums.push(s);
        if sums.len() >= 7 {
            let tail = &sums[sums.len() - 7..];
            let acc = accelerate(tail, Accel::Shanks)?;
            if let Some(prev) = last {
                if (acc.value - prev).abs() <= tol * acc.value.abs() && t.abs() <= tol.sqrt() * s.abs() {
                    let diag = Diagnostics {
                        terms: Some(sums.len()),
                        converged: true,
                        notes: vec![format!("Shanks-accelerated series, {} terms", sums.len())],
                        ..Default::default()
                    };
                    return CapacityEstimate::new(acc.value, Method::ClosedForm, err + (acc.value - prev).abs(), diag);
                }
            }
            last = Some(acc.value);
        }
        // Terms eventually fall off like 1/i², which no series transform
        // here handles; once the ratio of successive terms creeps towards 1
        // the resummed integral is cheaper and exact.
        if i >= 10 {
            let prev_t = sums[i - 1] - if i >= 2 { sums[i - 2] } else { 0.0 };
            let rho = (t / prev_t).abs();
            if rho > 0.75 && t.abs() > tol * s.abs() {
                reason = format!("successive terms shrink only by {rho:.3} after {} terms", i + 1);
                break;
            }
        }
    }
    if reason.is_empty() {
        reason = format!("series unsettled after {} terms", n.n_max);
    }
    let mut r = opra_closed_resummed(p, cutoff, n)?;
    r.diagnostics.terms = Some(sums.len());
    r.diagnostics.notes.insert(0, format!("{reason}; value from the resummed integral"));
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::quadrature::{opra_quadrature, ora_conditional_quadrature, ora_quadrature};

    fn num() -> NumericsConfig {
        NumericsConfig::default()
    }

    #[test]
    fn conditional_integer_path_matches_quadrature() {
        for (k, m, x) in [(20.0, 1.0, 0.3), (20.0, 2.0, 1.7), (0.5, 3.0, 0.05), (0.0, 2.0, 1.0)] {
            let p = ChannelParams::new(k, m, 10.0).unwrap();
            let (c, _) = ora_conditional_closed(x, &p, &num()).unwrap();
            let q = ora_conditional_quadrature(x, &p, 1e-12).unwrap();
            assert!((c - q).abs() < 1e-8 * q, "k={k} m={m} x={x}: {c} vs {q}");
        }
    }

    #[test]
    fn conditional_bivariate_path_matches_quadrature() {
        for (k, m, x) in [(2.0, 1.5, 1.0), (20.0, 0.7, 0.4), (5.0, 2.5, 2.0)] {
            let p = ChannelParams::new(k, m, 10.0).unwrap();
            let (c, _) = ora_conditional_closed(x, &p, &num()).unwrap();
            let q = ora_conditional_quadrature(x, &p, 1e-12).unwrap();
            assert!((c - q).abs() < 1e-7 * q, "k={k} m={m} x={x}: {c} vs {q}");
        }
        let p = ChannelParams::new(2.0, 2.0, 10.0).unwrap();
        assert!(matches!(ora_conditional_egbmg(1.0, &p, &num()), Err(NumError::ContourInfeasible(_))));
    }

    #[test]
    fn integer_closed_form_matches_quadrature() {
        for (k, m) in [(20.0, 2.0), (0.5, 1.0), (200.0, 4.0), (0.0, 3.0)] {
            let p = ChannelParams::new(k, m, 100.0).unwrap();
            let c = ora_closed_integer(&p, &num()).unwrap();
            let q = ora_quadrature(&p, &num().grid).unwrap();
            assert!((c.value - q.value).abs() < 1e-6, "k={k} m={m}: {} vs {}", c.value, q.value);
        }
        let p = ChannelParams::new(1.0, 1.5, 10.0).unwrap();
        assert!(ora_closed_integer(&p, &num()).is_err());
    }

    #[test]
    fn opra_forms_agree() {
        let c = OpraCutoff::given(0.833_529_976_9).unwrap();
        let p = ChannelParams::new(20.0, 2.0, 10.0).unwrap();
        let r = opra_closed_resummed(&p, &c, &num()).unwrap();
        assert!((r.value - 3.160_115_68).abs() < 1e-6, "{}", r.value);
        for (k, m) in [(0.5, 2.0), (3.0, 1.5)] {
            let p = ChannelParams::new(k, m, 10.0).unwrap();
            let q = opra_quadrature(&p, &c, &num().grid).unwrap().value;
            let v = opra_closed(&p, &c, &num()).unwrap();
            assert!((v.value - q).abs() < 1e-8 * q, "k={k} m={m}: {} vs {q}", v.value);
            let s = opra_series(&p, &c, 12, &num()).unwrap();
            assert!(s.terms.iter().all(|&t| t > 0.0));
            assert!(*s.partial_sums.last().unwrap() < q);
        }
    }

    #[test]
    fn opra_double_rayleigh_closed_form() {
        // 2K₀(2√P)/ln 2 at P = 0.3/10, from mpmath
        let p = ChannelParams::new(0.0, 1.0, 10.0).unwrap();
        let c = OpraCutoff::given(0.3).unwrap();
        let v = opra_closed(&p, &c, &num()).unwrap();
        assert!((v.value * LN_2 - 2.483_899_116_293_779).abs() < 1e-9, "{}", v.value * LN_2);
    }
}
