//! Gamma family: real and complex log-gamma, digamma, harmonic numbers.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{NumError, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

// B_{2k} / (2k (2k-1)) for k = 1..=9.
const STIRLING: [f64; 9] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
];

fn is_pole(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// Natural log of |Γ(x)| for real `x` off the poles.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || is_pole(x) {
        return Err(NumError::Domain(format!("ln_gamma has a pole at {x}")));
    }
    if x > 0.0 {
        Ok(statrs::function::gamma::ln_gamma(x))
    } else {
        // reflection: |Γ(x)| = π / (|sin πx| Γ(1-x))
        let s = (PI * x).sin().abs();
        Ok(PI.ln() - s.ln() - statrs::function::gamma::ln_gamma(1.0 - x))
    }
}

/// Sign of Γ(x) for real `x` off the poles.
pub fn gamma_sign(x: f64) -> f64 {
    if x > 0.0 || (x.floor() as i64) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Γ(x) as a real number; overflow is an error rather than infinity.
pub fn gamma(x: f64) -> Result<f64> {
    let l = ln_gamma(x)?;
    if l > 709.0 {
        return Err(NumError::Overflow(format!("gamma({x})")));
    }
    Ok(gamma_sign(x) * l.exp())
}

/// Log-gamma on the complex plane.
///
/// The imaginary part is only defined modulo 2π, which is all the
/// Mellin–Barnes integrands need since they are exponentiated at the end.
pub fn ln_gamma_c(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // Γ(z)Γ(1-z) = π / sin(πz)
        return Complex64::new(PI.ln(), 0.0) - ln_sin_pi(z) - ln_gamma_c(1.0 - z);
    }
    let mut w = z;
    let mut prod = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    while w.re < 15.0 {
        prod *= w;
        if prod.norm() > 1e200 {
            acc += prod.ln();
            prod = Complex64::new(1.0, 0.0);
        }
        w += 1.0;
    }
    acc += prod.ln();
    stirling(w) - acc
}

fn stirling(z: Complex64) -> Complex64 {
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut p = inv;
    for c in STIRLING {
        series += p * c;
        p *= inv2;
    }
    (z - 0.5) * z.ln() - z + LN_SQRT_2PI + series
}

/// ln sin(πz), computed without overflow for large |Im z|.
fn ln_sin_pi(z: Complex64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    if z.im.abs() < 5.0 {
        return (z * PI).sin().ln();
    }
    // For Im z > 0: sin(πz) = (i/2) e^{-iπz} (1 - e^{2iπz}); mirror for Im z < 0.
    let (zz, flip) = if z.im > 0.0 { (z, false) } else { (z.conj(), true) };
    let small = (i * 2.0 * PI * zz).exp();
    let v = (i * 0.5).ln() - i * PI * zz + (1.0 - small).ln();
    if flip {
        v.conj()
    } else {
        v
    }
}

/// Digamma ψ(x) for real x > 0.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(NumError::Domain(format!("digamma requires x > 0, got {x}")));
    }
    Ok(statrs::function::gamma::digamma(x))
}

/// Harmonic number H_n = Σ_{j=1}^n 1/j.
pub fn harmonic(n: usize) -> f64 {
    (1..=n).map(|j| 1.0 / j as f64).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_reference_values() {
        assert!(ln_gamma(1.0).unwrap().abs() < 1e-15);
        assert!((ln_gamma(0.5).unwrap() - 0.572_364_942_924_700_1).abs() < 1e-14);
        // mpmath: loggamma(7.3)
        assert!((ln_gamma(7.3).unwrap() - 7.147_892_523_022_249).abs() < 1e-12);
        assert!((ln_gamma(1e-3).unwrap() - 6.907_178_885_383_853).abs() < 1e-12);
        assert!(ln_gamma(-2.0).is_err());
        assert!(ln_gamma(0.0).is_err());
    }

    #[test]
    fn complex_matches_real_on_axis() {
        for &x in &[0.001, 0.3, 1.0, 2.5, 7.3, 40.0, 900.0, -0.5, -3.7] {
            let c = ln_gamma_c(Complex64::new(x, 0.0));
            assert!((c.re - ln_gamma(x).unwrap()).abs() < 1e-11 * (1.0 + c.re.abs()), "x={x}");
        }
    }

    #[test]
    fn complex_reference_values() {
        // mpmath: loggamma(2.5+3j) and loggamma(-1.3+40j)
        let a = ln_gamma_c(Complex64::new(2.5, 3.0));
        assert!((a.re - (-1.470_954_610_348_842)).abs() < 1e-12);
        let b = ln_gamma_c(Complex64::new(-1.3, 40.0)).exp();
        let want = Complex64::new(-8.900_502_614_556_441e-31, -1.435_372_195_700_803e-30);
        assert!((b - want).norm() < 1e-10 * want.norm());
        // far up the line stays finite
        let c = ln_gamma_c(Complex64::new(-3.25, 300.0));
        assert!(c.re.is_finite() && c.re < -400.0);
    }

    #[test]
    fn recurrence_holds() {
        let z = Complex64::new(0.3, -7.1);
        let lhs = ln_gamma_c(z + 1.0).exp();
        let rhs = z * ln_gamma_c(z).exp();
        assert!((lhs - rhs).norm() < 1e-12 * rhs.norm());
    }

    #[test]
    fn digamma_values() {
        assert!((digamma(1.0).unwrap() + EULER_GAMMA).abs() < 1e-13);
        assert!((digamma(5.0).unwrap() - (25.0 / 12.0 - EULER_GAMMA)).abs() < 1e-13);
        // mpmath: digamma(2.5)
        assert!((digamma(2.5).unwrap() - 0.703_156_640_645_243_2).abs() < 1e-13);
        assert!(digamma(0.0).is_err());
        assert!((harmonic(4) - 25.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn gamma_sign_and_value() {
        assert!((gamma(5.0).unwrap() - 24.0).abs() < 1e-11);
        assert!((gamma(-0.5).unwrap() + 2.0 * PI.sqrt()).abs() < 1e-12);
        assert!(gamma(200.0).is_err());
    }
}
