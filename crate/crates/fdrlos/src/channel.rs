//! The fading model: a Gamma-shadowed line-of-sight term plus a
//! double-Rayleigh scatter term, S = ω₀√ξ e^{jφ} + ω₂ G₂ G₃, γ = γ̄|S|².
//!
//! Conditioned on x = |G₃|², γ is a shadowed-Rician variable whose density
//! is an exponential times ₁F₁; the marginal is its average over x ~ Exp(1).

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{NumError, Result};
use crate::specfun::hyper::ln_kummer_m_scaled;
use crate::specfun::quad::{gk15_points, integrate_breaks, GaussLaguerre};

/// Fading environment: Rician factor `k`, shadowing shape `m` and average
/// SNR `gamma_bar`, all on linear scales.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub k: f64,
    pub m: f64,
    pub gamma_bar: f64,
}

/// Smallest supported shadowing shape.
pub const MIN_M: f64 = 0.5;

impl ChannelParams {
    pub fn new(k: f64, m: f64, gamma_bar: f64) -> Result<Self> {
        let p = ChannelParams { k, m, gamma_bar };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k >= 0.0) || !self.k.is_finite() {
            return Err(NumError::InvalidParams(format!("k must be finite and ≥ 0, got {}", self.k)));
        }
        if !(self.m >= MIN_M) || !self.m.is_finite() {
            return Err(NumError::InvalidParams(format!("m must be finite and ≥ {MIN_M}, got {}", self.m)));
        }
        if !(self.gamma_bar > 0.0) || !self.gamma_bar.is_finite() {
            return Err(NumError::InvalidParams(format!(
                "average SNR must be finite and > 0, got {}",
                self.gamma_bar
            )));
        }
        Ok(())
    }

    /// LoS power fraction ω₀² = k/(1+k).
    pub fn omega0_sq(&self) -> f64 {
        self.k / (1.0 + self.k)
    }

    /// Scatter power fraction ω₂² = 1/(1+k).
    pub fn omega2_sq(&self) -> f64 {
        1.0 / (1.0 + self.k)
    }

    pub fn with_gamma_bar(&self, gamma_bar: f64) -> Self {
        ChannelParams { gamma_bar, ..*self }
    }
}

/// Integration settings for averages over the channel.
///
/// The x-average is split at `split`: adaptive Gauss–Kronrod below it
/// (where conditional quantities vary like ln x) and a shifted
/// Gauss–Laguerre rule of `laguerre_order` nodes above, doubled up to
/// `max_order` until the total changes by less than `outer_tol`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureGrid {
    pub laguerre_order: usize,
    pub max_order: usize,
    pub split: f64,
    pub outer_tol: f64,
    /// Relative tolerance of the γ-panels.
    pub panel_tol: f64,
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        QuadratureGrid { laguerre_order: 96, max_order: 384, split: 1.0, outer_tol: 1e-8, panel_tol: 1e-10 }
    }
}

impl QuadratureGrid {
    pub fn validate(&self) -> Result<()> {
        if self.laguerre_order < 32 {
            return Err(NumError::InvalidParams(format!(
                "laguerre_order must be ≥ 32, got {}",
                self.laguerre_order
            )));
        }
        if self.max_order < self.laguerre_order {
            return Err(NumError::InvalidParams("max_order must be ≥ laguerre_order".into()));
        }
        if !(self.panel_tol > 0.0 && self.panel_tol <= 1e-6) {
            return Err(NumError::InvalidParams(format!("panel_tol must lie in (0, 1e-6], got {}", self.panel_tol)));
        }
        if !(self.outer_tol > 0.0 && self.outer_tol <= 1e-3) {
            return Err(NumError::InvalidParams(format!("outer_tol must lie in (0, 1e-3], got {}", self.outer_tol)));
        }
        if !(self.split > 0.0) || !self.split.is_finite() {
            return Err(NumError::InvalidParams("split must be positive".into()));
        }
        Ok(())
    }

    /// The same grid with every order doubled.
    pub fn refined(&self) -> Self {
        QuadratureGrid {
            laguerre_order: self.laguerre_order * 2,
            max_order: self.max_order * 2,
            ..*self
        }
    }
}

/// The density of γ given x, with its constants precomputed:
/// f(γ) = A e^{−βγ} ₁F₁(m; 1; cγ) = A e^{−(β−c)γ} [e^{−cγ} ₁F₁(m; 1; cγ)].
#[derive(Debug, Clone, Copy)]
pub struct Conditional {
    m: f64,
    mean: f64,
    ln_a: f64,
    rate: f64,
    c: f64,
}

impl Conditional {
    pub fn new(p: &ChannelParams, x: f64) -> Result<Self> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(NumError::Domain(format!("conditioning value x must be > 0, got {x}")));
        }
        let beta = (p.k + 1.0) / (x * p.gamma_bar);
        let mx = p.m * x;
        // ratio forms stay finite as x → 0
        let c = beta * p.k / (p.k + mx);
        let ln_a = beta.ln() + p.m * (mx / (p.k + mx)).ln();
        // β − c without cancellation
        let rate = p.m * (p.k + 1.0) / ((p.k + mx) * p.gamma_bar);
        let mean = p.gamma_bar * (p.k + x) / (p.k + 1.0);
        Ok(Conditional { m: p.m, mean, ln_a, rate, c })
    }

    /// Exponential decay rate of the density, β − c.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// Conditional mean of γ, γ̄(k + x)/(k + 1).
    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn ln_pdf(&self, gamma: f64) -> Result<f64> {
        if !(gamma >= 0.0) {
            return Err(NumError::Domain(format!("SNR must be ≥ 0, got {gamma}")));
        }
        Ok(self.ln_a - self.rate * gamma + ln_kummer_m_scaled(self.m, 1.0, self.c * gamma)?)
    }

    pub fn pdf(&self, gamma: f64) -> Result<f64> {
        Ok(self.ln_pdf(gamma)?.exp())
    }

    /// Upper end beyond which the density is negligible.
    pub fn gamma_max(&self) -> f64 {
        let m = self.m;
        (m + 10.0 * m.sqrt() + 45.0) / self.rate()
    }

    /// ∫_lo^∞ g(γ) f(γ) dγ on geometric panels.
    pub fn expect<G: FnMut(f64) -> f64>(&self, lo: f64, mut g: G, rel_tol: f64) -> Result<f64> {
        let hi = self.gamma_max();
        if lo >= hi {
            return Ok(0.0);
        }
        let mut breaks = Vec::with_capacity(32);
        let span = hi - lo;
        breaks.push(lo);
        for j in (0..24).rev() {
            breaks.push(lo + span * 0.5f64.powi(j));
        }
        let mut failure = None;
        let mut f = |t: f64| match self.ln_pdf(t) {
            Ok(l) => g(t) * l.exp(),
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        };
        let r = integrate_breaks(&mut f, &breaks, 1e-300, rel_tol, 4000)?;
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(r.value)
    }
}

/// f(γ | x).
pub fn conditional_pdf(gamma: f64, x: f64, p: &ChannelParams) -> Result<f64> {
    p.validate()?;
    Conditional::new(p, x)?.pdf(gamma)
}

/// Result of an average over x ~ Exp(1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Average {
    pub value: f64,
    /// Change under the last order doubling plus the head-rule estimate.
    pub err: f64,
    pub order: usize,
    pub converged: bool,
}

/// Component-wise average of a vector-valued integrand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AverageN<const N: usize> {
    pub value: [f64; N],
    pub err: [f64; N],
    pub order: usize,
    pub converged: bool,
}

impl<const N: usize> AverageN<N> {
    pub fn component(&self, i: usize) -> Average {
        Average { value: self.value[i], err: self.err[i], order: self.order, converged: self.converged }
    }
}

/// ∫₀^∞ h(x) e^{−x} dx.
pub fn average_over_x<H: FnMut(f64) -> Result<f64>>(mut h: H, grid: &QuadratureGrid) -> Result<Average> {
    Ok(average_over_x_n(|x| Ok([h(x)?]), grid)?.component(0))
}

/// ∫₀^∞ h(x) e^{−x} dx for each component of h.
///
/// Below `grid.split` the integrand is summed with a fixed Gauss–Kronrod
/// rule on geometrically shrinking panels, which resolves the ln x
/// behaviour of conditional quantities near x = 0. Above it a shifted
/// Gauss–Laguerre rule is doubled until all components settle.
pub fn average_over_x_n<const N: usize, H>(mut h: H, grid: &QuadratureGrid) -> Result<AverageN<N>>
where
    H: FnMut(f64) -> Result<[f64; N]>,
{
    grid.validate()?;
    let a = grid.split;
    let mut head = [0.0; N];
    let mut head_err = [0.0; N];
    for j in (0..HEAD_PANELS).rev() {
        let hi = a * 0.5f64.powi(j);
        let lo = if j + 1 == HEAD_PANELS { 0.0 } else { hi * 0.5 };
        let pts = gk15_points(lo, hi);
        let mut vals = [[0.0; N]; 15];
        for (slot, &(x, _, _)) in vals.iter_mut().zip(&pts) {
            let v = h(x)?;
            let e = (-x).exp();
            for c in 0..N {
                slot[c] = v[c] * e;
            }
        }
        for c in 0..N {
            let kron: f64 = pts.iter().zip(&vals).map(|(p, v)| p.1 * v[c]).sum();
            let gauss: f64 = pts.iter().zip(&vals).map(|(p, v)| p.2 * v[c]).sum();
            let mean = kron / (hi - lo);
            let asc: f64 = pts.iter().zip(&vals).map(|(p, v)| p.1 * (v[c] - mean).abs()).sum();
            head[c] += kron;
            head_err[c] += panel_error(kron - gauss, asc);
        }
    }
    let shift = (-a).exp();
    let mut order = grid.laguerre_order;
    let mut prev: Option<[f64; N]> = None;
    loop {
        let rule = GaussLaguerre::new(order)?;
        let mut tail = [0.0; N];
        for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
            if w == 0.0 {
                continue;
            }
            let v = h(a + u)?;
            for c in 0..N {
                tail[c] += w * v[c];
            }
        }
        let mut value = [0.0; N];
        for c in 0..N {
            value[c] = head[c] + shift * tail[c];
        }
        if let Some(p) = prev {
            let mut err = [0.0; N];
            let mut done = true;
            for c in 0..N {
                let diff = (value[c] - p[c]).abs();
                err[c] = diff + head_err[c];
                done &= diff <= grid.outer_tol * value[c].abs().max(1e-300);
            }
            if done || order * 2 > grid.max_order {
                return Ok(AverageN { value, err, order, converged: done });
            }
        }
        prev = Some(value);
        order *= 2;
    }
}

const HEAD_PANELS: i32 = 40;

/// The QUADPACK scaling of the Kronrod–Gauss difference.
fn panel_error(diff: f64, asc: f64) -> f64 {
    if asc == 0.0 || diff == 0.0 {
        return diff.abs();
    }
    asc * (200.0 * diff.abs() / asc).powf(1.5).min(1.0)
}

/// f(γ) = ∫₀^∞ f(γ | x) e^{−x} dx.
pub fn marginal_pdf(gamma: f64, p: &ChannelParams, grid: &QuadratureGrid) -> Result<Average> {
    p.validate()?;
    if !(gamma >= 0.0) {
        return Err(NumError::Domain(format!("SNR must be ≥ 0, got {gamma}")));
    }
    average_over_x(|x| Conditional::new(p, x)?.pdf(gamma), grid)
}

/// Draws γ from the physical model.
#[derive(Debug, Clone, Copy)]
pub struct SnrSampler {
    shadow: Gamma<f64>,
    omega0: f64,
    omega2: f64,
    gamma_bar: f64,
}

impl SnrSampler {
    pub fn new(p: &ChannelParams) -> Result<Self> {
        p.validate()?;
        let shadow = Gamma::new(p.m, 1.0 / p.m).map_err(|e| NumError::InvalidParams(e.to_string()))?;
        Ok(SnrSampler {
            shadow,
            omega0: p.omega0_sq().sqrt(),
            omega2: p.omega2_sq().sqrt(),
            gamma_bar: p.gamma_bar,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let xi = self.shadow.sample(rng);
        let phi = rng.random::<f64>() * std::f64::consts::TAU;
        let g2 = complex_normal(rng);
        let g3 = complex_normal(rng);
        let amp = self.omega0 * xi.sqrt();
        let re = amp * phi.cos() + self.omega2 * (g2.0 * g3.0 - g2.1 * g3.1);
        let im = amp * phi.sin() + self.omega2 * (g2.0 * g3.1 + g2.1 * g3.0);
        self.gamma_bar * (re * re + im * im)
    }
}

/// Unit-variance circularly-symmetric complex normal as (re, im).
fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    (a * s, b * s)
}

/// One draw of γ.
pub fn sample_snr<R: Rng + ?Sized>(p: &ChannelParams, rng: &mut R) -> Result<f64> {
    Ok(SnrSampler::new(p)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(k: f64, m: f64, g: f64) -> ChannelParams {
        ChannelParams::new(k, m, g).unwrap()
    }

    #[test]
    fn validation() {
        assert!(ChannelParams::new(1.0, 0.4, 1.0).is_err());
        assert!(ChannelParams::new(-1.0, 1.0, 1.0).is_err());
        assert!(ChannelParams::new(1.0, 1.0, 0.0).is_err());
        let p = params(3.0, 2.0, 1.0);
        assert!((p.omega0_sq() + p.omega2_sq() - 1.0).abs() < 1e-15);
        assert!(QuadratureGrid { laguerre_order: 16, ..Default::default() }.validate().is_err());
        assert!(QuadratureGrid { panel_tol: 1e-3, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn conditional_is_normalised_with_the_right_mean() {
        let p = params(2.0, 3.0, 5.0);
        for x in [1e-3, 0.2, 1.0, 7.0] {
            let c = Conditional::new(&p, x).unwrap();
            let mass = c.expect(0.0, |_| 1.0, 1e-12).unwrap();
            assert!((mass - 1.0).abs() < 1e-10, "x={x} mass={mass}");
            let mean = c.expect(0.0, |g| g, 1e-12).unwrap();
            let want = p.gamma_bar * (p.k + x) / (p.k + 1.0);
            assert!((mean - want).abs() < 1e-9 * want, "x={x}");
            assert!((c.mean() - want).abs() < 1e-12 * want);
        }
    }

    #[test]
    fn conditional_at_zero_and_rayleigh_limit() {
        let p = params(2.0, 3.0, 5.0);
        let x = 0.7;
        let kx = p.k / x;
        let gx = (p.k + x) / (p.k + 1.0) * p.gamma_bar;
        let want = p.m.powf(p.m) * (1.0 + kx) / ((p.m + kx).powf(p.m) * gx);
        assert!((conditional_pdf(0.0, x, &p).unwrap() - want).abs() < 1e-13 * want);
        assert!(conditional_pdf(1.0, 0.0, &p).is_err());
        // k = 0: exponential with mean xγ̄
        let p = params(0.0, 2.0, 4.0);
        let f = conditional_pdf(3.0, 0.5, &p).unwrap();
        assert!((f - (-3.0f64 / 2.0).exp() / 2.0).abs() < 1e-14);
    }

    #[test]
    fn marginal_is_normalised() {
        let grid = QuadratureGrid::default();
        for (k, m, g) in [(0.1, 1.0, 10.0), (20.0, 2.0, 10.0), (200.0, 2.0, 100.0)] {
            let p = params(k, m, g);
            let mass = average_over_x(|x| Conditional::new(&p, x)?.expect(0.0, |_| 1.0, 1e-11), &grid).unwrap();
            assert!((mass.value - 1.0).abs() < 1e-6, "{k} {m} {g}: {}", mass.value);
            let mean = average_over_x(|x| Conditional::new(&p, x)?.expect(0.0, |t| t, 1e-11), &grid).unwrap();
            assert!((mean.value / g - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn marginal_pdf_matches_double_rayleigh_at_k0() {
        // k = 0: f(γ) = (2/γ̄) K₀(2√(γ/γ̄)); mpmath reference
        let p = params(0.0, 1.0, 1.0);
        let f = marginal_pdf(0.5, &p, &QuadratureGrid::default()).unwrap();
        assert!((f.value - 0.478_284_421_452_162).abs() < 1e-7, "{}", f.value);
    }

    #[test]
    fn sampler_has_unit_mean_and_is_reproducible() {
        let p = params(20.0, 2.0, 10.0);
        let s = SnrSampler::new(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 200_000;
        let mean: f64 = (0..n).map(|_| s.sample(&mut rng)).sum::<f64>() / n as f64;
        assert!((mean / 10.0 - 1.0).abs() < 0.01, "{mean}");
        let a: Vec<f64> = {
            let mut r = ChaCha8Rng::seed_from_u64(1);
            (0..5).map(|_| sample_snr(&p, &mut r).unwrap()).collect()
        };
        let b: Vec<f64> = {
            let mut r = ChaCha8Rng::seed_from_u64(1);
            (0..5).map(|_| sample_snr(&p, &mut r).unwrap()).collect()
        };
        assert_eq!(a, b);
    }
}
