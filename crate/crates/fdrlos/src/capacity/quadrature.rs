//! Capacities by direct numerical integration over γ and x.

use std::f64::consts::LN_2;

use super::{CapacityEstimate, Diagnostics, Method};
use crate::channel::{average_over_x, average_over_x_n, ChannelParams, Conditional, QuadratureGrid};
use crate::error::{NumError, Result};

/// E[log₂(1 + γ) | x] by quadrature over γ.
pub fn ora_conditional_quadrature(x: f64, p: &ChannelParams, rel_tol: f64) -> Result<f64> {
    p.validate()?;
    Ok(Conditional::new(p, x)?.expect(0.0, f64::ln_1p, rel_tol)? / LN_2)
}

/// ORA capacity E[log₂(1 + γ)] averaged first over γ given x, then over x.
pub fn ora_quadrature(p: &ChannelParams, grid: &QuadratureGrid) -> Result<CapacityEstimate> {
    p.validate()?;
    let tol = grid.panel_tol;
    let avg = average_over_x(|x| Conditional::new(p, x)?.expect(0.0, f64::ln_1p, tol), grid)?;
    let diagnostics = Diagnostics {
        nodes: Some(avg.order),
        converged: avg.converged,
        notes: if avg.converged { vec![] } else { vec![format!("x-average unsettled at order {}", avg.order)] },
        ..Default::default()
    };
    let value = avg.value / LN_2;
    CapacityEstimate::new(value, Method::Quadrature, avg.err / LN_2 + tol * value, diagnostics)
}

/// Solved OPRA cut-off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpraCutoff {
    /// Linear SNR threshold γ₀.
    pub gamma0: f64,
    /// E[(1/γ₀ − 1/γ)·1{γ ≥ γ₀}] − 1 at `gamma0`.
    pub residual: f64,
    pub iterations: usize,
}

impl OpraCutoff {
    /// A threshold supplied by the caller, with unknown residual.
    pub fn given(gamma0: f64) -> Result<Self> {
        if !(gamma0 > 0.0) || !gamma0.is_finite() {
            return Err(NumError::InvalidParams(format!("cut-off must be > 0, got {gamma0}")));
        }
        Ok(OpraCutoff { gamma0, residual: f64::NAN, iterations: 0 })
    }
}

/// Power-constraint value E[(1/γ₀ − 1/γ)·1{γ ≥ γ₀}] and the tail
/// probability P(γ ≥ γ₀), which gives its derivative −P/γ₀².
pub fn opra_constraint(p: &ChannelParams, gamma0: f64, grid: &QuadratureGrid) -> Result<(f64, f64)> {
    p.validate()?;
    if !(gamma0 > 0.0) {
        return Err(NumError::Domain(format!("cut-off must be > 0, got {gamma0}")));
    }
    let tol = grid.panel_tol;
    let avg = average_over_x_n(
        |x| {
            let c = Conditional::new(p, x)?;
            let lhs = c.expect(gamma0, |g| 1.0 / gamma0 - 1.0 / g, tol)?;
            let tail = c.expect(gamma0, |_| 1.0, tol)?;
            Ok([lhs, tail])
        },
        grid,
    )?;
    Ok((avg.value[0], avg.value[1]))
}

/// The γ₀ that meets the average power constraint with equality.
///
/// Safeguarded Newton iteration in ln γ₀ on the bracket [10⁻¹², 1]; the
/// objective is strictly decreasing, and its derivative comes from the
/// tail probability evaluated alongside it.
pub fn opra_cutoff(p: &ChannelParams, grid: &QuadratureGrid, tol: f64) -> Result<OpraCutoff> {
    p.validate()?;
    if !(tol > 0.0) {
        return Err(NumError::InvalidParams(format!("cut-off tolerance must be > 0, got {tol}")));
    }
    let eval = |t: f64| -> Result<(f64, f64)> {
        let g0 = t.exp();
        let (lhs, tail) = opra_constraint(p, g0, grid)?;
        // d/dt of lhs(e^t) = −P/γ₀
        Ok((lhs - 1.0, -tail / g0))
    };
    let (mut lo, mut hi) = (1e-12f64.ln(), 0.0f64);
    let (f_lo, _) = eval(lo)?;
    let (f_hi, d_hi) = eval(hi)?;
    if !(f_lo > 0.0 && f_hi < 0.0) {
        return Err(NumError::Bracket { lo: lo.exp(), hi: hi.exp(), lo_value: f_lo, hi_value: f_hi });
    }
    if f_hi.abs() <= tol {
        return Ok(OpraCutoff { gamma0: 1.0, residual: f_hi, iterations: 0 });
    }
    // Newton from the upper end moves left monotonically for a convex objective.
    let mut t = hi - f_hi / d_hi;
    if !(t > lo && t < hi) {
        t = 0.5 * (lo + hi);
    }
    for it in 1..=200 {
        let (f, d) = eval(t)?;
        if f.abs() <= tol {
            return Ok(OpraCutoff { gamma0: t.exp(), residual: f, iterations: it });
        }
        if f > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        if hi - lo < 1e-15 {
            return Ok(OpraCutoff { gamma0: t.exp(), residual: f, iterations: it });
        }
        let newton = t - f / d;
        t = if newton > lo && newton < hi && d < 0.0 { newton } else { 0.5 * (lo + hi) };
    }
    Err(NumError::NotConverged("cut-off iteration exhausted".into()))
}

/// OPRA capacity E[log₂(γ/γ₀)·1{γ ≥ γ₀}] by quadrature.
pub fn opra_quadrature(p: &ChannelParams, cutoff: &OpraCutoff, grid: &QuadratureGrid) -> Result<CapacityEstimate> {
    p.validate()?;
    let g0 = cutoff.gamma0;
    let tol = grid.panel_tol;
    let avg = average_over_x(|x| Conditional::new(p, x)?.expect(g0, |g| (g / g0).ln(), tol), grid)?;
    let mut notes = vec![format!("cut-off γ₀ = {g0:.12e}")];
    if !avg.converged {
        notes.push(format!("x-average unsettled at order {}", avg.order));
    }
    let diagnostics = Diagnostics { nodes: Some(avg.order), converged: avg.converged, notes, ..Default::default() };
    let value = avg.value / LN_2;
    CapacityEstimate::new(value, Method::Quadrature, avg.err / LN_2 + tol * value, diagnostics)
}
