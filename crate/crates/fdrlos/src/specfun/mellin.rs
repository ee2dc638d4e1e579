//! Mellin–Barnes machinery shared by the univariate and bivariate Meijer G
//! evaluators.
//!
//! All integrands are written in the convention
//! `(1/2πi) ∫ Ψ(τ) x^{−τ} dτ`, where Ψ is a ratio of gamma functions of the
//! form Γ(c ± τ).  A factor Γ(c + τ) has poles at τ = −c − n ("left"
//! family, must lie left of the contour); Γ(c − τ) has poles at τ = c + n
//! ("right" family).  Denominator factors contribute zeros that can cancel
//! poles.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{NumError, Result};
use crate::specfun::gamma::ln_gamma_c;

/// Γ(offset + dir·τ) with dir = ±1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaFactor {
    pub offset: f64,
    pub dir: f64,
}

impl GammaFactor {
    pub fn plus(offset: f64) -> Self {
        GammaFactor { offset, dir: 1.0 }
    }
    pub fn minus(offset: f64) -> Self {
        GammaFactor { offset, dir: -1.0 }
    }
    /// The factor seen as a function of τ' where τ = shift + sign·τ'.
    fn substitute(self, shift: f64, sign: f64) -> Self {
        GammaFactor { offset: self.offset + self.dir * shift, dir: self.dir * sign }
    }
    fn pole(self, n: usize) -> f64 {
        // offset + dir·τ = −n
        -(self.offset + n as f64) * self.dir
    }
    fn family(self) -> Family {
        if self.dir > 0.0 {
            Family::Left
        } else {
            Family::Right
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Left,
    Right,
    /// Poles of both families coincide: no contour can separate them.
    Pinched,
}

/// A net pole of a gamma ratio after cancellation against denominator zeros.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole {
    pub at: f64,
    pub order: i32,
    pub family: Family,
}

/// Ratio of gamma products Π Γ(num) / Π Γ(den).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GammaRatio {
    pub num: Vec<GammaFactor>,
    pub den: Vec<GammaFactor>,
}

const SAME: f64 = 1e-9;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= SAME * (1.0 + a.abs().max(b.abs()))
}

impl GammaRatio {
    pub fn new(num: Vec<GammaFactor>, den: Vec<GammaFactor>) -> Self {
        let mut r = GammaRatio { num, den };
        r.cancel();
        r
    }

    /// Remove factors appearing identically in numerator and denominator.
    fn cancel(&mut self) {
        let mut i = 0;
        while i < self.num.len() {
            let f = self.num[i];
            if let Some(j) = self.den.iter().position(|g| g.dir == f.dir && close(g.offset, f.offset)) {
                self.num.remove(i);
                self.den.remove(j);
            } else {
                i += 1;
            }
        }
    }

    /// Product of two ratios.
    pub fn times(&self, other: &GammaRatio) -> GammaRatio {
        let mut num = self.num.clone();
        num.extend_from_slice(&other.num);
        let mut den = self.den.clone();
        den.extend_from_slice(&other.den);
        GammaRatio::new(num, den)
    }

    /// The ratio as a function of τ' where τ = shift + sign·τ'.
    pub fn substitute(&self, shift: f64, sign: f64) -> GammaRatio {
        GammaRatio {
            num: self.num.iter().map(|f| f.substitute(shift, sign)).collect(),
            den: self.den.iter().map(|f| f.substitute(shift, sign)).collect(),
        }
    }

    pub fn ln_eval(&self, tau: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for f in &self.num {
            acc += ln_gamma_c(f.offset + f.dir * tau);
        }
        for f in &self.den {
            acc -= ln_gamma_c(f.offset + f.dir * tau);
        }
        acc
    }

    /// Exponential decay count: |Ψ(σ+iT)| ~ e^{−(π/2)·count·|T|}.
    pub fn decay_count(&self) -> i32 {
        self.num.len() as i32 - self.den.len() as i32
    }

    /// Net poles with real part in `[lo, hi]`, sorted.
    pub fn poles(&self, lo: f64, hi: f64) -> Vec<Pole> {
        // (position, count, family) events
        let mut ev: Vec<(f64, i32, Option<Family>)> = Vec::new();
        let mut collect = |fs: &[GammaFactor], sign: i32| {
            for f in fs {
                let mut n = 0usize;
                loop {
                    let p = f.pole(n);
                    if p < lo - 1.0 || p > hi + 1.0 {
                        // poles move monotonically away once outside
                        let moving_out = (f.dir > 0.0 && p < lo) || (f.dir < 0.0 && p > hi);
                        if moving_out {
                            break;
                        }
                    } else {
                        ev.push((p, sign, if sign > 0 { Some(f.family()) } else { None }));
                    }
                    n += 1;
                    if n > 100_000 {
                        break;
                    }
                }
            }
        };
        collect(&self.num, 1);
        collect(&self.den, -1);
        ev.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out = Vec::new();
        let mut i = 0;
        while i < ev.len() {
            let at = ev[i].0;
            let mut order = 0;
            let (mut left, mut right) = (false, false);
            let mut j = i;
            while j < ev.len() && close(ev[j].0, at) {
                order += ev[j].1;
                match ev[j].2 {
                    Some(Family::Left) => left = true,
                    Some(Family::Right) => right = true,
                    _ => {}
                }
                j += 1;
            }
            if order > 0 && at >= lo && at <= hi {
                let family = match (left, right) {
                    (true, true) => Family::Pinched,
                    (true, false) => Family::Left,
                    _ => Family::Right,
                };
                out.push(Pole { at, order, family });
            }
            i = j;
        }
        out
    }

    pub(crate) fn window(&self) -> (f64, f64) {
        let w = self
            .num
            .iter()
            .chain(&self.den)
            .map(|f| f.offset.abs())
            .fold(0.0, f64::max);
        (-(w + 60.0), w + 60.0)
    }
}

/// A vertical line Re τ = σ together with the poles it crosses relative to
/// a properly separating contour.
#[derive(Debug, Clone)]
pub struct Gap {
    pub lo: f64,
    pub hi: f64,
    /// Poles on the wrong side of the line: left-family poles to its right
    /// (their residues are added) and right-family poles to its left
    /// (subtracted).
    pub crossed: Vec<Pole>,
    pub invalid: bool,
}

impl Gap {
    pub fn contains(&self, s: f64) -> bool {
        s > self.lo && s < self.hi
    }
}

/// All gaps between consecutive net poles of `r`.
pub fn gaps(r: &GammaRatio) -> Vec<Gap> {
    let (lo, hi) = r.window();
    let poles = r.poles(lo, hi);
    let mut edges = vec![f64::NEG_INFINITY];
    edges.extend(poles.iter().map(|p| p.at));
    edges.push(f64::INFINITY);
    let mut out = Vec::with_capacity(edges.len() - 1);
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut crossed = Vec::new();
        let mut invalid = false;
        for p in &poles {
            let wrong = match p.family {
                Family::Left => p.at >= b,
                Family::Right => p.at <= a,
                Family::Pinched => {
                    invalid = true;
                    false
                }
            };
            if wrong {
                crossed.push(*p);
            }
        }
        out.push(Gap { lo: a, hi: b, crossed, invalid });
    }
    out
}

/// Evaluation settings for one vertical contour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourConfig {
    /// Abscissa of the line; chosen automatically when `None`.
    pub sigma: Option<f64>,
    /// Truncation |Im τ| ≤ height; chosen from the integrand decay when `None`.
    pub height: Option<f64>,
    /// Minimum number of trapezoid nodes before convergence is accepted.
    pub nodes: usize,
    /// Relative tolerance for successive step halvings.
    pub tol: f64,
}

impl Default for ContourConfig {
    fn default() -> Self {
        ContourConfig { sigma: None, height: None, nodes: 64, tol: 1e-10 }
    }
}

impl ContourConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(h) = self.height {
            if !(h > 0.0) {
                return Err(NumError::InvalidParams(format!("contour height must be > 0, got {h}")));
            }
        }
        if self.nodes < 64 {
            return Err(NumError::InvalidParams(format!("contour nodes must be ≥ 64, got {}", self.nodes)));
        }
        if !(self.tol > 0.0 && self.tol <= 1e-3) {
            return Err(NumError::InvalidParams(format!("contour tol must lie in (0, 1e-3], got {}", self.tol)));
        }
        if let Some(s) = self.sigma {
            if !s.is_finite() {
                return Err(NumError::InvalidParams("contour sigma must be finite".into()));
            }
        }
        Ok(())
    }
}

/// Value of a contour integral with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct MbValue {
    pub value: f64,
    pub err: f64,
    pub nodes: usize,
    pub notes: Vec<String>,
}

const DROP: f64 = 40.0;
const COARSE: f64 = 0.5;
const REACH: f64 = 400.0;

/// Upper truncation for a one-dimensional log-magnitude profile: the
/// smallest T with the profile below `peak − DROP` for all |a| ≥ T.
fn truncation(profile: impl Fn(f64) -> f64) -> Result<(f64, f64, f64)> {
    let n = (REACH / COARSE) as i64;
    let vals: Vec<f64> = (-n..=n).map(|j| profile(j as f64 * COARSE)).collect();
    let peak = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !peak.is_finite() {
        return Err(NumError::Overflow("non-finite Mellin–Barnes integrand".into()));
    }
    let mut t = None;
    let mut outside = f64::NEG_INFINITY;
    for k in (0..=n).rev() {
        let v = vals[(n + k) as usize].max(vals[(n - k) as usize]);
        if v >= peak - DROP {
            t = Some((k + 1) as f64 * COARSE);
            break;
        }
        outside = outside.max(v);
    }
    let t = t.unwrap_or(COARSE);
    if t >= REACH {
        return Err(NumError::Divergent("integrand has not decayed within the search window".into()));
    }
    Ok((t.max(2.0), peak, outside))
}

/// (1/2πi) ∫_{σ−i∞}^{σ+i∞} exp(ln_f(τ)) dτ by the trapezoid rule in Im τ.
///
/// The line must not pass through singularities; the caller is
/// responsible for residues of poles on the wrong side.
pub fn line_integral<F: Fn(Complex64) -> Complex64>(ln_f: F, sigma: f64, cfg: &ContourConfig) -> Result<(Complex64, f64, usize)> {
    let at = |a: f64| ln_f(Complex64::new(sigma, a));
    let (t, _, outside) = match cfg.height {
        Some(h) => {
            let (_, peak, _) = truncation(|a| at(a).re)?;
            let edge = at(h).re.max(at(-h).re);
            (h, peak, edge)
        }
        None => truncation(|a| at(a).re)?,
    };
    let mut h = 0.5f64.min(t / 8.0);
    let mut prev: Option<Complex64> = None;
    for _ in 0..14 {
        let n = (t / h).ceil() as i64;
        let logs: Vec<Complex64> = (-n..=n).map(|j| at(j as f64 * h)).collect();
        let top = logs.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
        let mut sum = Complex64::new(0.0, 0.0);
        let mut l1 = 0.0;
        for l in &logs {
            let v = (l - top).exp();
            sum += v;
            l1 += v.norm();
        }
        let scale = top.exp() * h / (2.0 * PI);
        let cur = sum * scale;
        let l1 = l1 * scale;
        let used = logs.len();
        if !cur.re.is_finite() {
            return Err(NumError::Overflow("contour integral overflowed".into()));
        }
        if let Some(p) = prev {
            let diff = (cur - p).norm();
            if used >= cfg.nodes && diff <= (cfg.tol * cur.norm()).max(1e-14 * l1) {
                let tail = outside.exp() * (t + 1.0) / PI;
                return Ok((cur, diff + tail, used));
            }
        }
        prev = Some(cur);
        h *= 0.5;
    }
    Err(NumError::NotConverged(format!("contour quadrature on Re τ = {sigma} did not settle")))
}

/// Residue of exp(ln_f) at an isolated singularity `p`, from the
/// trapezoid rule on a small circle (exact up to rounding for poles).
pub fn residue<F: Fn(Complex64) -> Complex64>(ln_f: F, p: f64, radius: f64) -> Complex64 {
    const N: usize = 64;
    let mut logs = Vec::with_capacity(N);
    for j in 0..N {
        let th = 2.0 * PI * (j as f64 + 0.5) / N as f64;
        let e = Complex64::from_polar(1.0, th);
        logs.push((ln_f(p + radius * e), e));
    }
    let top = logs.iter().map(|(l, _)| l.re).fold(f64::NEG_INFINITY, f64::max);
    let mut sum = Complex64::new(0.0, 0.0);
    for (l, e) in &logs {
        sum += (l - top).exp() * radius * e;
    }
    sum * top.exp() / N as f64
}

pub(crate) fn residue_radius(poles: &[Pole], p: f64) -> f64 {
    let nearest = poles
        .iter()
        .filter(|q| !close(q.at, p))
        .map(|q| (q.at - p).abs())
        .fold(1.0, f64::min);
    0.3 * nearest
}

/// (1/2πi) ∫ Ψ(τ) x^{−τ} dτ with the line fixed at `sigma`, adding the
/// residues of any poles it puts on the wrong side.
pub fn univariate(
    ratio: &GammaRatio,
    ln_x: f64,
    sigma: f64,
    cfg: &ContourConfig,
) -> Result<MbValue> {
    if ratio.decay_count() <= 0 {
        return Err(NumError::Divergent(format!(
            "gamma ratio has no exponential decay (net factor count {})",
            ratio.decay_count()
        )));
    }
    let gs = gaps(ratio);
    let gap = gs
        .iter()
        .find(|g| g.contains(sigma))
        .ok_or_else(|| NumError::ContourInfeasible(format!("line Re τ = {sigma} passes through a pole")))?;
    if gap.invalid {
        return Err(NumError::ContourInfeasible("pole families coincide (pinched contour)".into()));
    }
    let dist = (sigma - gap.lo).min(gap.hi - sigma);
    if dist < 1e-3 {
        return Err(NumError::ContourInfeasible(format!("line Re τ = {sigma} is within {dist:e} of a pole")));
    }
    let ln_f = |t: Complex64| ratio.ln_eval(t) - t * ln_x;
    let (v, err, nodes) = line_integral(ln_f, sigma, cfg)?;
    let mut total = v;
    let mut notes = Vec::new();
    if !gap.crossed.is_empty() {
        let (lo, hi) = ratio.window();
        let all = ratio.poles(lo, hi);
        for p in &gap.crossed {
            let r = residue(ln_f, p.at, residue_radius(&all, p.at));
            let sign = if p.family == Family::Left { 1.0 } else { -1.0 };
            total += sign * r;
            notes.push(format!("residue at τ = {} ({:?} family)", p.at, p.family));
        }
    }
    Ok(MbValue { value: total.re, err: err + 1e-15 * total.norm(), nodes, notes })
}

/// (1/2πi) ∫ Ψ(τ) x^{−τ} dτ along the straight line Re τ = `sigma` alone,
/// with no residue bookkeeping. Only requires the line to miss every pole.
pub fn line_only(ratio: &GammaRatio, ln_x: f64, sigma: f64, cfg: &ContourConfig) -> Result<MbValue> {
    if ratio.decay_count() <= 0 {
        return Err(NumError::Divergent(format!(
            "gamma ratio has no exponential decay (net factor count {})",
            ratio.decay_count()
        )));
    }
    let (lo, hi) = ratio.window();
    let near = ratio
        .poles(lo.min(sigma - 1.0), hi.max(sigma + 1.0))
        .iter()
        .map(|p| (p.at - sigma).abs())
        .fold(f64::INFINITY, f64::min);
    if near < 1e-3 {
        return Err(NumError::ContourInfeasible(format!("line Re τ = {sigma} is within {near:e} of a pole")));
    }
    let (v, err, nodes) = line_integral(|t| ratio.ln_eval(t) - t * ln_x, sigma, cfg)?;
    Ok(MbValue { value: v.re, err: err + 1e-15 * v.norm(), nodes, notes: Vec::new() })
}

/// Pick a line inside a gap with no crossings, preferring the widest.
pub fn natural_sigma(ratio: &GammaRatio) -> Result<f64> {
    let gs = gaps(ratio);
    if gs.iter().any(|g| g.invalid) {
        return Err(NumError::ContourInfeasible("pole families coincide (pinched contour)".into()));
    }
    let best = gs
        .iter()
        .filter(|g| g.crossed.is_empty())
        .max_by(|a, b| (a.hi - a.lo).total_cmp(&(b.hi - b.lo)))
        .ok_or_else(|| NumError::ContourInfeasible("left and right pole families interleave".into()))?;
    Ok(match (best.lo.is_finite(), best.hi.is_finite()) {
        (true, true) => 0.5 * (best.lo + best.hi),
        (true, false) => best.lo + 0.5,
        (false, true) => best.hi - 0.5,
        (false, false) => 0.0,
    })
}

/// Three-block double integral
/// (1/2πi)² ∫∫ Ψ₁(s+t) Ψ₂(s) Ψ₃(t) x^{−s} y^{−t} ds dt on straight lines,
/// with no residue handling.
pub fn plane_integral(
    blocks: [&GammaRatio; 3],
    ln_x: f64,
    ln_y: f64,
    sigma_s: f64,
    sigma_t: f64,
    cfg_s: &ContourConfig,
    cfg_t: &ContourConfig,
) -> Result<MbValue> {
    let [b1, b2, b3] = blocks;
    let sw = sigma_s + sigma_t;
    let la = |a: f64| {
        let s = Complex64::new(sigma_s, a);
        b2.ln_eval(s) - s * ln_x
    };
    let lb = |b: f64| {
        let t = Complex64::new(sigma_t, b);
        b3.ln_eval(t) - t * ln_y
    };
    let lc = |c: f64| b1.ln_eval(Complex64::new(sw, c));

    // coarse profiles for the truncation box
    let n = (REACH / (2.0 * COARSE)) as i64;
    let ra: Vec<f64> = (-n..=n).map(|j| la(j as f64 * COARSE).re).collect();
    let rb: Vec<f64> = (-n..=n).map(|j| lb(j as f64 * COARSE).re).collect();
    let rc: Vec<f64> = (-2 * n..=2 * n).map(|j| lc(j as f64 * COARSE).re).collect();
    let size = (2 * n + 1) as usize;
    let mut colmax = vec![f64::NEG_INFINITY; size];
    let mut rowmax = vec![f64::NEG_INFINITY; size];
    for j in 0..size {
        for k in 0..size {
            let v = ra[j] + rb[k] + rc[j + k];
            colmax[j] = colmax[j].max(v);
            rowmax[k] = rowmax[k].max(v);
        }
    }
    let peak = colmax.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !peak.is_finite() {
        return Err(NumError::Overflow("non-finite bivariate integrand".into()));
    }
    let reach = |maxes: &[f64]| -> Result<(f64, f64)> {
        let c = n as usize;
        let mut outside = f64::NEG_INFINITY;
        for k in (0..=c).rev() {
            let v = maxes[c + k].max(maxes[c - k]);
            if v >= peak - DROP {
                if k == c {
                    return Err(NumError::Divergent("bivariate integrand does not decay".into()));
                }
                return Ok((((k + 1) as f64 * COARSE).max(2.0), outside));
            }
            outside = outside.max(v);
        }
        Ok((2.0, outside))
    };
    let (mut ta, out_a) = reach(&colmax)?;
    let (mut tb, out_b) = reach(&rowmax)?;
    let mut outside = out_a.max(out_b);
    if let Some(h) = cfg_s.height {
        ta = h;
        outside = outside.max(ra[(n + (h / COARSE).round().min(n as f64) as i64) as usize]);
    }
    if let Some(h) = cfg_t.height {
        tb = h;
        outside = outside.max(rb[(n + (h / COARSE).round().min(n as f64) as i64) as usize]);
    }
    if cfg_s.height.is_some() || cfg_t.height.is_some() {
        // recompute the largest magnitude outside the requested box
        let mut o = f64::NEG_INFINITY;
        for j in 0..size {
            for k in 0..size {
                let a = (j as f64 - n as f64) * COARSE;
                let b = (k as f64 - n as f64) * COARSE;
                if a.abs() > ta || b.abs() > tb {
                    o = o.max(ra[j] + rb[k] + rc[j + k]);
                }
            }
        }
        outside = o;
    }

    let tol = cfg_s.tol.min(cfg_t.tol);
    let min_nodes = cfg_s.nodes.max(cfg_t.nodes);
    let mut h = 0.5f64.min(ta.min(tb) / 8.0);
    let mut prev: Option<f64> = None;
    for _ in 0..12 {
        let na = (ta / h).ceil() as i64;
        let nb = (tb / h).ceil() as i64;
        let a: Vec<Complex64> = (-na..=na).map(|j| la(j as f64 * h)).collect();
        let b: Vec<Complex64> = (-nb..=nb).map(|k| lb(k as f64 * h)).collect();
        let c: Vec<Complex64> = (-(na + nb)..=(na + nb)).map(|q| lc(q as f64 * h)).collect();
        let (sum, top) = separable_sum(&a, &b, &c);
        let scale = h * h / (4.0 * PI * PI);
        let cur = sum.re * scale;
        let l1 = sum.norm() * scale;
        if !cur.is_finite() || !top.is_finite() {
            return Err(NumError::Overflow("bivariate contour sum overflowed".into()));
        }
        let nodes = a.len().min(b.len());
        let val = cur * top.exp();
        let l1 = l1 * top.exp();
        if let Some(p) = prev {
            let diff = (val - p).abs();
            if nodes >= min_nodes && diff <= (tol * val.abs()).max(1e-14 * l1) {
                let tail = outside.exp() * (ta + tb + 2.0) * (ta + tb + 2.0) / (4.0 * PI * PI);
                return Ok(MbValue {
                    value: val,
                    err: diff + tail,
                    nodes: a.len() * b.len(),
                    notes: vec![format!(
                        "lines Re s = {sigma_s:.4}, Re t = {sigma_t:.4}; box {ta:.1} x {tb:.1}; step {h}"
                    )],
                });
            }
        }
        prev = Some(val);
        h *= 0.5;
    }
    Err(NumError::NotConverged("bivariate contour quadrature did not settle".into()))
}

/// Σ_j Σ_k exp(a_j + b_k + c_{j+k}) with a common shift, returned as
/// (shifted sum, shift).  Uses factorised scaling when the dynamic range
/// allows, otherwise exponentiates every term separately.
fn separable_sum(a: &[Complex64], b: &[Complex64], c: &[Complex64]) -> (Complex64, f64) {
    let ma = a.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let mb = b.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let mc = c.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let mut top = f64::NEG_INFINITY;
    for (j, aj) in a.iter().enumerate() {
        for (k, bk) in b.iter().enumerate() {
            top = top.max(aj.re + bk.re + c[j + k].re);
        }
    }
    if top - (ma + mb + mc) > -600.0 {
        let ea: Vec<Complex64> = a.iter().map(|z| (z - ma).exp()).collect();
        let eb: Vec<Complex64> = b.iter().map(|z| (z - mb).exp()).collect();
        let ec: Vec<Complex64> = c.iter().map(|z| (z - mc).exp()).collect();
        let mut sum = Complex64::new(0.0, 0.0);
        for (j, aj) in ea.iter().enumerate() {
            let mut inner = Complex64::new(0.0, 0.0);
            for (k, bk) in eb.iter().enumerate() {
                inner += bk * ec[j + k];
            }
            sum += aj * inner;
        }
        // rescale to the common shift `top`
        let factor = (ma + mb + mc - top).exp();
        (sum * factor, top)
    } else {
        let mut sum = Complex64::new(0.0, 0.0);
        for (j, aj) in a.iter().enumerate() {
            for (k, bk) in b.iter().enumerate() {
                let l = aj + bk + c[j + k] - top;
                if l.re > -745.0 {
                    sum += l.exp();
                }
            }
        }
        (sum, top)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pole_bookkeeping_cancels_zeros() {
        // Γ(−τ)² / Γ(τ): double right poles at n ≥ 1 minus nothing, at 0 the
        // left zero of 1/Γ(τ) removes one order.
        let r = GammaRatio::new(
            vec![GammaFactor::minus(0.0), GammaFactor::minus(0.0)],
            vec![GammaFactor::plus(0.0)],
        );
        let p = r.poles(-3.5, 2.5);
        assert_eq!(p.len(), 3);
        assert_eq!((p[0].at, p[0].order, p[0].family), (0.0, 1, Family::Right));
        assert_eq!((p[1].at, p[1].order), (1.0, 2));
    }

    #[test]
    fn identical_factors_cancel() {
        let r = GammaRatio::new(vec![GammaFactor::plus(1.0)], vec![GammaFactor::plus(1.0)]);
        assert!(r.num.is_empty() && r.den.is_empty());
    }

    #[test]
    fn pinched_families_are_detected() {
        // Γ(τ) Γ(1 − τ − 1) = Γ(τ)Γ(−τ): poles at 0 from both families
        let r = GammaRatio::new(vec![GammaFactor::plus(0.0), GammaFactor::minus(0.0)], vec![]);
        assert!(natural_sigma(&r).is_err());
    }

    #[test]
    fn exponential_from_single_gamma() {
        // (1/2πi)∫Γ(τ) x^{−τ} dτ = e^{−x}
        let r = GammaRatio::new(vec![GammaFactor::plus(0.0)], vec![]);
        let s = natural_sigma(&r).unwrap();
        for x in [0.1f64, 1.0, 5.0] {
            let v = univariate(&r, x.ln(), s, &ContourConfig::default()).unwrap();
            assert!((v.value - (-x).exp()).abs() < 1e-11, "x={x} got {}", v.value);
        }
    }

    #[test]
    fn crossing_a_pole_adds_its_residue() {
        // moving the line past τ = 0 of Γ(τ) and adding the residue gives the same value
        let r = GammaRatio::new(vec![GammaFactor::plus(0.0)], vec![]);
        let x: f64 = 0.7;
        let a = univariate(&r, x.ln(), 0.5, &ContourConfig::default()).unwrap();
        let b = univariate(&r, x.ln(), -0.5, &ContourConfig::default()).unwrap();
        assert!((a.value - b.value).abs() < 1e-11);
        assert_eq!(b.notes.len(), 1);
    }

    #[test]
    fn plane_integral_factorises() {
        // Γ(2+w) = ∫u^{1+w}e^{−u}du turns the double integral into
        // ∫₀^∞ u e^{−u} e^{−(x+y)/u} du
        let one = GammaRatio::new(vec![GammaFactor::plus(2.0)], vec![]);
        let g = GammaRatio::new(vec![GammaFactor::plus(0.0)], vec![]);
        let v = plane_integral([&one, &g, &g], 0.3f64.ln(), 1.7f64.ln(), 0.5, 0.5, &ContourConfig::default(), &ContourConfig::default()).unwrap();
        let f = |u: f64| u * (-u).exp() * (-0.3 / u).exp() * (-1.7 / u).exp();
        let q = crate::specfun::quad::integrate(f, 0.0, 80.0, 0.0, 1e-13).unwrap().value;
        assert!((v.value - q).abs() < 1e-9 * q, "{} vs {}", v.value, q);
    }
}
