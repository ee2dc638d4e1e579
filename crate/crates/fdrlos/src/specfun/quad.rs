//! Real-line quadrature: adaptive Gauss–Kronrod and Gauss–Laguerre rules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{NumError, Result};

// 15-point Kronrod abscissae and weights (first 7 abscissae paired, last is 0),
// with the embedded 7-point Gauss weights for the odd-indexed abscissae.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of a one-dimensional quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub err: f64,
    pub evals: usize,
}

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        resk += WGK[j] * s;
        if j % 2 == 1 {
            resg += WG[j / 2] * s;
        }
    }
    (resk * h, ((resk - resg) * h).abs())
}

/// The 15 Kronrod nodes on `[a, b]` as (x, Kronrod weight, Gauss weight),
/// with a zero Gauss weight for nodes outside the embedded 7-point rule.
pub fn gk15_points(a: f64, b: f64) -> [(f64, f64, f64); 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [(c, WGK[7] * h, WG[3] * h); 15];
    for j in 0..7 {
        let wg = if j % 2 == 1 { WG[j / 2] * h } else { 0.0 };
        out[2 * j] = (c - h * XGK[j], WGK[j] * h, wg);
        out[2 * j + 1] = (c + h * XGK[j], WGK[j] * h, wg);
    }
    out
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive Gauss–Kronrod (7/15) quadrature over `[a, b]`.
///
/// Subdivides the interval with the largest error estimate until the total
/// estimate falls below `max(abs_tol, rel_tol·|I|)`.  Exhausting the
/// interval budget returns [`NumError::NotConverged`].
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<Integral> {
    integrate_breaks(&mut f, &[a, b], abs_tol, rel_tol, 2000)
}

/// As [`integrate`], seeded with the given breakpoints (sorted).
pub fn integrate_breaks<F: FnMut(f64) -> f64>(
    f: &mut F,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_pieces: usize,
) -> Result<Integral> {
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut err = 0.0;
    let mut evals = 0;
    for w in breaks.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (v, e) = kronrod15(f, w[0], w[1]);
        evals += 15;
        total += v;
        err += e;
        heap.push(Piece { a: w[0], b: w[1], value: v, err: e });
    }
    while err > abs_tol.max(rel_tol * total.abs()) {
        if heap.len() >= max_pieces {
            return Err(NumError::NotConverged(format!(
                "quadrature error {err:e} after {max_pieces} pieces (value {total:e})"
            )));
        }
        let Some(p) = heap.pop() else { break };
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // interval exhausted at machine precision; keep its estimate
            heap.push(Piece { err: 0.0, ..p });
            err = heap.iter().map(|q| q.err).sum();
            continue;
        }
        let (v1, e1) = kronrod15(f, p.a, mid);
        let (v2, e2) = kronrod15(f, mid, p.b);
        evals += 30;
        total += v1 + v2 - p.value;
        err += e1 + e2 - p.err;
        heap.push(Piece { a: p.a, b: mid, value: v1, err: e1 });
        heap.push(Piece { a: mid, b: p.b, value: v2, err: e2 });
        if err < 0.0 {
            err = heap.iter().map(|q| q.err).sum();
        }
    }
    if !total.is_finite() {
        return Err(NumError::Overflow("non-finite quadrature sum".into()));
    }
    // re-sum to shed accumulated rounding from the running updates
    let value = heap.iter().map(|q| q.value).sum();
    let err = heap.iter().map(|q| q.err).sum();
    Ok(Integral { value, err, evals })
}

/// Gauss–Laguerre rule for ∫₀^∞ g(x) e^{−x} dx.
#[derive(Debug, Clone)]
pub struct GaussLaguerre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLaguerre {
    /// Nodes and weights of order `n` by Newton iteration on the
    /// three-term recurrence, rescaled to stay finite at large orders.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(NumError::InvalidParams("Gauss–Laguerre order must be positive".into()));
        }
        let nf = n as f64;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let mut z = 0.0;
        for i in 0..n {
            z = match i {
                0 => 3.0 / (1.0 + 2.4 * nf),
                1 => z + 15.0 / (1.0 + 2.5 * nf),
                _ => {
                    let ai = (i - 1) as f64;
                    z + (1.0 + 2.55 * ai) / (1.9 * ai) * (z - nodes[i - 2])
                }
            };
            let mut converged = false;
            let (mut pp, mut p2, mut ln_scale) = (0.0, 0.0, 0.0);
            let mut last_step = f64::INFINITY;
            for it in 0..200 {
                let (mut p1, mut q2) = (1.0f64, 0.0f64);
                ln_scale = 0.0;
                for j in 1..=n {
                    let jf = j as f64;
                    let p3 = q2;
                    q2 = p1;
                    p1 = ((2.0 * jf - 1.0 - z) * q2 - (jf - 1.0) * p3) / jf;
                    if p1.abs() > 1e150 {
                        p1 *= 1e-150;
                        q2 *= 1e-150;
                        ln_scale += 150.0 * std::f64::consts::LN_10;
                    }
                }
                p2 = q2;
                pp = (nf * p1 - nf * p2) / z;
                let z1 = z;
                z = z1 - p1 / pp;
                // rounding in the recurrence limits the attainable accuracy;
                // stop once steps no longer shrink
                let step = (z - z1).abs();
                if step <= 1e-15 * z || (it > 3 && step >= 0.5 * last_step && step <= 1e-12 * z) {
                    converged = true;
                    break;
                }
                last_step = step;
            }
            if !converged {
                return Err(NumError::NotConverged(format!("Laguerre node {i} of {n}")));
            }
            nodes[i] = z;
            weights[i] = -(-2.0 * ln_scale).exp() / (pp * nf * p2);
        }
        Ok(GaussLaguerre { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Σ wᵢ g(xᵢ).
    pub fn apply<F: FnMut(f64) -> f64>(&self, mut g: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * g(x)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_is_exact_for_polynomials() {
        let r = integrate(|x| x.powi(9) - 3.0 * x * x + 1.0, -1.0, 2.0, 1e-14, 1e-14).unwrap();
        let exact = (2f64.powi(10) - 1.0) / 10.0 - (8.0 + 1.0) + 3.0;
        assert!((r.value - exact).abs() < 1e-12);
        assert_eq!(r.evals, 15);
    }

    #[test]
    fn fixed_points_match_the_adaptive_rule() {
        let pts = gk15_points(0.5, 2.0);
        let k: f64 = pts.iter().map(|&(x, w, _)| w * x.cos()).sum();
        let g: f64 = pts.iter().map(|&(x, _, w)| w * x.cos()).sum();
        let exact = 2f64.sin() - 0.5f64.sin();
        assert!((k - exact).abs() < 1e-15);
        assert!((g - exact).abs() < 1e-8);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let r = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-12, 1e-12).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9);
        let r = integrate(|x: f64| x.ln(), 0.0, 1.0, 1e-12, 1e-12).unwrap();
        assert!((r.value + 1.0).abs() < 1e-10);
    }

    #[test]
    fn laguerre_moments() {
        for n in [32, 96, 192, 384] {
            let q = GaussLaguerre::new(n).unwrap();
            let s0: f64 = q.apply(|_| 1.0);
            let s1: f64 = q.apply(|x| x);
            let s3: f64 = q.apply(|x| x * x * x);
            assert!((s0 - 1.0).abs() < 1e-11, "n={n} s0={s0}");
            assert!((s1 - 1.0).abs() < 1e-11, "n={n} s1={s1}");
            assert!((s3 - 6.0).abs() < 1e-10, "n={n} s3={s3}");
            assert!(q.nodes.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn laguerre_log_moment_converges() {
        // ∫ ln x e^{-x} dx = -γ; the rule converges slowly because of the log.
        let g = crate::specfun::gamma::EULER_GAMMA;
        let e96 = (GaussLaguerre::new(96).unwrap().apply(f64::ln) + g).abs();
        let e384 = (GaussLaguerre::new(384).unwrap().apply(f64::ln) + g).abs();
        assert!(e384 < e96 && e96 < 1e-2);
    }
}
