//! Approximate ORA capacity for small and large LoS-to-scatter ratio k.

use std::f64::consts::LN_2;

use super::{CapacityEstimate, Diagnostics, Method, NumericsConfig};
use crate::channel::ChannelParams;
use crate::error::{NumError, Result};
use crate::specfun::gamma::ln_gamma;
use crate::specfun::meijer::{meijer_g, MeijerGSpec};

/// First-order expansion in k around the double-Rayleigh channel. Two
/// univariate Meijer G terms; accurate while k ≪ 1.
pub fn ora_approx_low_ratio(p: &ChannelParams, n: &NumericsConfig) -> Result<CapacityEstimate> {
    p.validate()?;
    n.validate()?;
    let (k, m) = (p.k, p.m);
    let z = p.gamma_bar / (k + 1.0);
    let base = meijer_g(&MeijerGSpec::new(&[1.0, 1.0, 0.0, 0.0], &[], &[1.0], &[0.0]), z, &n.contour)?;
    let corr = meijer_g(&MeijerGSpec::new(&[1.0, 1.0, -1.0, 1.0], &[], &[1.0], &[0.0]), z, &n.contour)?;
    let w = k * (m - 1.0) / m;
    let value = (base.value + w * corr.value) / LN_2;
    let err = (base.err + w.abs() * corr.err) / LN_2;
    let diag = Diagnostics {
        terms: Some(2),
        nodes: Some(base.nodes + corr.nodes),
        converged: true,
        notes: if k > 1.0 { vec![format!("k = {k} is outside the small-k regime")] } else { vec![] },
    };
    CapacityEstimate::new(value, Method::ApproxLowRatio, err, diag)
}

/// Large-k expansion for integer m, keeping `n_terms` powers of m/k in
/// each of the m branches. `n_terms = 0` selects the resummed single-term
/// form, which replaces the power series by (m/(k+m))^{m−i}.
pub fn ora_approx_high_ratio(p: &ChannelParams, n_terms: usize, n: &NumericsConfig) -> Result<CapacityEstimate> {
    p.validate()?;
    n.validate()?;
    let mi = n
        .integer_m(p.m)
        .ok_or_else(|| NumError::InvalidParams(format!("the large-k expansion needs integer m, got {}", p.m)))?;
    if p.k <= 0.0 {
        return Err(NumError::Domain("the large-k expansion needs k > 0".into()));
    }
    let (k, m) = (p.k, mi as f64);
    let z = k / m;
    let arg = k * p.gamma_bar / (m * (k + 1.0));
    let (mut value, mut err, mut nodes) = (0.0, 0.0, 0);
    let lg_m = ln_gamma(m)?;
    for i in 0..mi {
        let fi = i as f64;
        let ln_fact2 = 2.0 * ln_gamma(fi + 1.0)?;
        if n_terms == 0 {
            let g = meijer_g(&MeijerGSpec::new(&[1.0, 1.0, -fi], &[], &[1.0], &[0.0]), arg, &n.contour)?;
            let c = (lg_m + (m - fi) * (m / (k + m)).ln() - ln_fact2).exp() * k / m;
            value += c * g.value;
            err += c * g.err;
            nodes += g.nodes;
            continue;
        }
        for l in 0..n_terms {
            let fl = l as f64;
            let spec = MeijerGSpec::new(&[1.0, 1.0, -fi], &[m - 1.0], &[1.0, fl + m - 1.0], &[0.0]);
            let g = meijer_g(&spec, arg, &n.contour)?;
            // (m−i)_l / l! = Γ(m−i+l) / (Γ(m−i) l!)
            let ln_c = lg_m + (fi + 1.0 - m - fl) * z.ln() + ln_gamma(m - fi + fl)?
                - ln_gamma(m - fi)?
                - ln_gamma(fl + 1.0)?
                - ln_fact2;
            let c = if l % 2 == 0 { ln_c.exp() } else { -ln_c.exp() };
            value += c * g.value;
            err += c.abs() * g.err;
            nodes += g.nodes;
        }
    }
    let diag = Diagnostics {
        terms: Some(if n_terms == 0 { mi } else { mi * n_terms }),
        nodes: Some(nodes),
        converged: true,
        notes: if k < m { vec![format!("k = {k} is below m; the expansion in m/k is not accurate here")] } else { vec![] },
    };
    CapacityEstimate::new(value / LN_2, Method::ApproxHighRatio, err / LN_2, diag)
}
