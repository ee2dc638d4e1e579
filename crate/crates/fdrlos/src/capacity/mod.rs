//! Ergodic capacity under rate adaptation (ORA) and joint power and rate
//! adaptation (OPRA).
//!
//! Every path returns a [`CapacityEstimate`] in bit/s/Hz. Internal work is
//! in natural logarithms with a single 1/ln 2 at the end.

use std::fmt;

use crate::channel::QuadratureGrid;
use crate::error::{NumError, Result};
use crate::specfun::mellin::ContourConfig;

mod approx;
mod asymptotic;
mod closed;
mod quadrature;

pub use approx::{ora_approx_high_ratio, ora_approx_low_ratio};
pub use asymptotic::{opra_high_snr, opra_high_snr_variant, ora_high_snr, ora_high_snr_variant, HighSnrVariant};
pub use closed::{
    opra_closed, opra_closed_resummed, opra_series, ora_closed, ora_closed_integer, ora_conditional_closed,
    OpraSeries,
};
pub use quadrature::{
    opra_constraint, opra_cutoff, opra_quadrature, ora_conditional_quadrature, ora_quadrature, OpraCutoff,
};

/// How a capacity value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Quadrature,
    ClosedForm,
    ApproxLowRatio,
    ApproxHighRatio,
    HighSnr,
    MonteCarlo,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Quadrature,
        Method::ClosedForm,
        Method::ApproxLowRatio,
        Method::ApproxHighRatio,
        Method::HighSnr,
        Method::MonteCarlo,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Quadrature => "quadrature",
            Method::ClosedForm => "closed_form",
            Method::ApproxLowRatio => "approx_low_ratio",
            Method::ApproxHighRatio => "approx_high_ratio",
            Method::HighSnr => "high_snr",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = NumError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "quadrature" | "quad" => Method::Quadrature,
            "closed_form" | "closed" => Method::ClosedForm,
            "approx_low_ratio" | "approx_low" => Method::ApproxLowRatio,
            "approx_high_ratio" | "approx_high" => Method::ApproxHighRatio,
            "high_snr" => Method::HighSnr,
            "monte_carlo" | "mc" => Method::MonteCarlo,
            other => return Err(NumError::InvalidParams(format!("unknown method '{other}'"))),
        })
    }
}

/// What went into an estimate.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    /// Series terms summed, when the method is a series.
    pub terms: Option<usize>,
    /// Quadrature nodes or Laguerre order used.
    pub nodes: Option<usize>,
    /// Whether every internal convergence test passed.
    pub converged: bool,
    pub notes: Vec<String>,
}

/// A capacity value with its provenance and error estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityEstimate {
    /// bit/s/Hz
    pub value: f64,
    pub method: Method,
    /// Absolute error estimate in bit/s/Hz.
    pub err_est: f64,
    pub diagnostics: Diagnostics,
}

impl CapacityEstimate {
    /// Builds an estimate, clamping values that are negative only through
    /// rounding and rejecting ones that are meaningfully negative.
    pub(crate) fn new(value: f64, method: Method, err_est: f64, mut diagnostics: Diagnostics) -> Result<Self> {
        if !value.is_finite() || !err_est.is_finite() {
            return Err(NumError::NotConverged(format!("{method} produced a non-finite value")));
        }
        let err_est = err_est.abs();
        let value = if value < 0.0 {
            if value < -(err_est + 1e-9) {
                diagnostics.notes.push(format!("raw value {value:.6e} below zero, clamped"));
            }
            0.0
        } else {
            value
        };
        Ok(CapacityEstimate { value, method, err_est, diagnostics })
    }
}

/// Knobs shared by all capacity paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericsConfig {
    pub grid: QuadratureGrid,
    pub contour: ContourConfig,
    /// Relative tolerance for series truncation.
    pub series_tol: f64,
    /// Term cap for the OPRA series.
    pub n_max: usize,
    /// Residual target for the OPRA cut-off.
    pub cutoff_tol: f64,
    /// Shapes within this distance of an integer take the integer-m path.
    pub integer_snap: f64,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        NumericsConfig {
            grid: QuadratureGrid::default(),
            contour: ContourConfig::default(),
            series_tol: 1e-8,
            n_max: 64,
            cutoff_tol: 1e-10,
            integer_snap: 1e-6,
        }
    }
}

impl NumericsConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.contour.validate()?;
        if !(self.series_tol > 0.0 && self.series_tol < 1.0) {
            return Err(NumError::InvalidParams(format!("series_tol must lie in (0, 1), got {}", self.series_tol)));
        }
        if self.n_max < 3 {
            return Err(NumError::InvalidParams("n_max must be at least 3".into()));
        }
        if !(self.cutoff_tol > 0.0 && self.cutoff_tol < 1e-3) {
            return Err(NumError::InvalidParams(format!("cutoff_tol must lie in (0, 1e-3), got {}", self.cutoff_tol)));
        }
        if !(self.integer_snap >= 0.0 && self.integer_snap < 0.5) {
            return Err(NumError::InvalidParams("integer_snap must lie in [0, 0.5)".into()));
        }
        Ok(())
    }

    /// `m` as an integer when it lies within the snapping distance of one.
    pub fn integer_m(&self, m: f64) -> Option<usize> {
        let r = m.round();
        ((m - r).abs() <= self.integer_snap && r >= 1.0).then_some(r as usize)
    }
}

/// |exact − approx| / exact.
pub fn relative_error(exact: &CapacityEstimate, approx: &CapacityEstimate) -> Result<f64> {
    relative_error_values(exact.value, approx.value)
}

pub fn relative_error_values(exact: f64, approx: f64) -> Result<f64> {
    if exact == 0.0 || !exact.is_finite() {
        return Err(NumError::Domain("relative error needs a nonzero exact value".into()));
    }
    Ok((exact - approx).abs() / exact.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn est(v: f64) -> CapacityEstimate {
        CapacityEstimate::new(v, Method::Quadrature, 0.0, Diagnostics::default()).unwrap()
    }

    #[test]
    fn relative_error_basics() {
        assert_eq!(relative_error(&est(3.13), &est(3.13)).unwrap(), 0.0);
        let d = relative_error(&est(3.13), &est(3.32)).unwrap();
        assert!((d - 0.0607).abs() < 5e-5);
        assert!(relative_error(&est(0.0), &est(1.0)).is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert_eq!("approx_high".parse::<Method>().unwrap(), Method::ApproxHighRatio);
        assert!("bogus".parse::<Method>().is_err());
    }

    #[test]
    fn integer_detection() {
        let c = NumericsConfig::default();
        assert_eq!(c.integer_m(2.0000005), Some(2));
        assert_eq!(c.integer_m(2.1), None);
        assert_eq!(c.integer_m(0.5), None);
    }

    #[test]
    fn negative_rounding_is_clamped() {
        let e = CapacityEstimate::new(-1e-14, Method::ClosedForm, 1e-12, Diagnostics::default()).unwrap();
        assert_eq!(e.value, 0.0);
        assert!(e.diagnostics.notes.is_empty());
        assert!(CapacityEstimate::new(f64::NAN, Method::ClosedForm, 0.0, Diagnostics::default()).is_err());
    }
}
