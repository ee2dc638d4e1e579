//! Command implementations. Each returns the full record set; the caller
//! sorts, writes and maps statuses to the exit code.

use std::time::Instant;

use anyhow::{bail, Result};
use fdrlos::capacity::{
    opra_closed, opra_cutoff, opra_high_snr, opra_quadrature, ora_approx_high_ratio, ora_approx_low_ratio,
    ora_closed, ora_high_snr, ora_quadrature, relative_error_values, CapacityEstimate, Method, NumericsConfig,
    OpraCutoff,
};
use fdrlos::channel::ChannelParams;
use fdrlos::mcsim::{mc_opra, mc_ora, McResult};
use fdrlos::NumError;
use rayon::prelude::*;

use crate::records::{Record, STATUS_ERROR, STATUS_FAIL, STATUS_OK, STATUS_PASS};
use crate::settings::{Regime, Scheme, Settings};
use crate::Usage;

/// Published (SNR dB, value) columns of the reference table at m = 2.
pub const TABLE_SNR_DB: [f64; 5] = [0.0, 10.0, 20.0, 30.0, 40.0];
pub const TABLE_EXACT: [(f64, [f64; 5]); 2] =
    [(20.0, [0.91, 3.13, 6.22, 9.56, 12.84]), (200.0, [0.92, 3.16, 6.27, 9.62, 12.89])];
pub const TABLE_APPROX: [(f64, [f64; 5]); 2] =
    [(20.0, [0.94, 3.32, 6.70, 10.32, 13.97]), (200.0, [0.92, 3.18, 6.32, 9.65, 13.01])];
const TABLE_TOL: f64 = 0.01;

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn params(k: f64, m: f64, snr_db: f64) -> Result<ChannelParams> {
    ChannelParams::new(k, m, db_to_linear(snr_db)).map_err(|e| Usage(format!("k = {k}, m = {m}: {e}")).into())
}

/// Result of one method at one point.
enum Outcome {
    Estimate(CapacityEstimate),
    Mc(McResult),
}

impl Outcome {
    fn value(&self) -> f64 {
        match self {
            Outcome::Estimate(e) => e.value,
            Outcome::Mc(r) => r.mean,
        }
    }
}

struct Point {
    scheme: Scheme,
    p: ChannelParams,
    k: f64,
    m: f64,
    snr_db: f64,
    cutoff: Option<Result<OpraCutoff, NumError>>,
}

impl Point {
    fn new(scheme: Scheme, k: f64, m: f64, snr_db: f64, n: &NumericsConfig) -> Result<Point> {
        let p = params(k, m, snr_db)?;
        let cutoff = (scheme == Scheme::Opra).then(|| opra_cutoff(&p, &n.grid, n.cutoff_tol));
        Ok(Point { scheme, p, k, m, snr_db, cutoff })
    }

    fn blank(&self, method: Method, terms: Option<usize>) -> Record {
        Record {
            scheme: self.scheme.to_string(),
            k: self.k,
            m: self.m,
            snr_db: self.snr_db,
            method: method.to_string(),
            terms,
            gamma0: self.cutoff.as_ref().and_then(|c| c.as_ref().ok()).map(|c| c.gamma0),
            status: STATUS_OK.into(),
            ..Default::default()
        }
    }

    fn compute(&self, method: Method, terms: usize, s: &Settings) -> Result<Outcome, NumError> {
        let n = &s.numerics;
        let est = |e: Result<CapacityEstimate, NumError>| e.map(Outcome::Estimate);
        match self.scheme {
            Scheme::Ora => match method {
                Method::Quadrature => est(ora_quadrature(&self.p, &n.grid)),
                Method::ClosedForm => est(ora_closed(&self.p, n)),
                Method::ApproxLowRatio => est(ora_approx_low_ratio(&self.p, n)),
                Method::ApproxHighRatio => est(ora_approx_high_ratio(&self.p, terms, n)),
                Method::HighSnr => est(ora_high_snr(&self.p, n.series_tol)),
                Method::MonteCarlo => mc_ora(&self.p, &s.mc).map(Outcome::Mc),
            },
            Scheme::Opra => {
                let c = match self.cutoff.as_ref().expect("OPRA points carry a cut-off") {
                    Ok(c) => c,
                    Err(e) => return Err(e.clone()),
                };
                match method {
                    Method::Quadrature => est(opra_quadrature(&self.p, c, &n.grid)),
                    Method::ClosedForm => est(opra_closed(&self.p, c, n)),
                    Method::HighSnr => est(opra_high_snr(&self.p, c, n.series_tol)),
                    Method::MonteCarlo => mc_opra(&self.p, c.gamma0, &s.mc).map(Outcome::Mc),
                    Method::ApproxLowRatio | Method::ApproxHighRatio => {
                        Err(NumError::InvalidParams(format!("{method} is defined for ORA only")))
                    }
                }
            }
        }
    }

    /// Runs one method and fills a record; failures become status "error".
    fn record(&self, method: Method, terms: usize, s: &Settings) -> (Record, Option<Outcome>) {
        let shown_terms = (method == Method::ApproxHighRatio).then_some(terms);
        let mut r = self.blank(method, shown_terms);
        let t = Instant::now();
        let out = self.compute(method, terms, s);
        if s.timing {
            r.runtime_ms = Some((t.elapsed().as_secs_f64() * 1e3 * 1000.0).round() / 1000.0);
        }
        match out {
            Ok(o) => {
                match &o {
                    Outcome::Estimate(e) => {
                        r.capacity_bps_hz = Some(e.value);
                        r.err_est_bps_hz = Some(e.err_est);
                        if r.terms.is_none() {
                            r.terms = e.diagnostics.terms;
                        }
                        r.note = e.diagnostics.notes.join("; ");
                    }
                    Outcome::Mc(m) => {
                        r.capacity_bps_hz = Some(m.mean);
                        r.std_err_bps_hz = Some(m.std_err);
                        r.note = format!("{} samples, seed {}", m.samples_used, s.mc.seed);
                    }
                }
                (r, Some(o))
            }
            Err(e) => {
                r.status = STATUS_ERROR.into();
                r.note = format!("{method}: {e}");
                (r, None)
            }
        }
    }
}

fn required<'a>(v: &'a Option<Vec<f64>>, name: &str) -> Result<&'a [f64]> {
    match v {
        Some(v) if !v.is_empty() => Ok(v),
        _ => Err(Usage(format!("--{name} is required")).into()),
    }
}

fn methods_or(s: &Settings, default: &[Method]) -> Vec<Method> {
    s.methods.clone().unwrap_or_else(|| default.to_vec())
}

fn terms_or(s: &Settings, default: &[usize]) -> Vec<usize> {
    s.terms.clone().unwrap_or_else(|| default.to_vec())
}

/// Every (k, m, SNR) combination, validated before any work starts.
fn points(ks: &[f64], ms: &[f64], snrs: &[f64]) -> Result<Vec<(f64, f64, f64)>> {
    let mut out = Vec::new();
    for &k in ks {
        for &m in ms {
            for &snr in snrs {
                params(k, m, snr)?;
                out.push((k, m, snr));
            }
        }
    }
    Ok(out)
}

fn run_methods(scheme: Scheme, cells: &[(f64, f64, f64)], methods: &[Method], terms: &[usize], s: &Settings) -> Result<Vec<Record>> {
    let per_cell: Vec<Result<Vec<Record>>> = cells
        .par_iter()
        .map(|&(k, m, snr)| {
            let pt = Point::new(scheme, k, m, snr, &s.numerics)?;
            let mut out = Vec::new();
            for &method in methods {
                let ts: &[usize] = if method == Method::ApproxHighRatio { terms } else { &[0] };
                for &t in ts {
                    out.push(pt.record(method, t, s).0);
                }
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for r in per_cell {
        all.extend(r?);
    }
    Ok(all)
}

pub fn point(s: &Settings) -> Result<Vec<Record>> {
    let (k, m, snr) = (required(&s.k, "k")?, required(&s.m, "m")?, required(&s.snr_db, "snr-db")?);
    if k.len() != 1 || m.len() != 1 || snr.len() != 1 {
        bail!(Usage("point takes a single k, m and SNR; use sweep or grid for lists".into()));
    }
    let scheme = s.scheme.unwrap_or(Scheme::Ora);
    let methods = methods_or(s, &[Method::ClosedForm, Method::Quadrature]);
    let cells = points(k, m, snr)?;
    run_methods(scheme, &cells, &methods, &terms_or(s, &[1]), s)
}

pub fn sweep(s: &Settings) -> Result<Vec<Record>> {
    let (k, m) = (required(&s.k, "k")?, required(&s.m, "m")?);
    let snr = s.snr_db.clone().unwrap_or_else(|| crate::values::linear(0.0, 40.0, 5.0).expect("static range"));
    let scheme = s.scheme.unwrap_or(Scheme::Ora);
    let methods = methods_or(s, &[Method::ClosedForm, Method::Quadrature, Method::HighSnr]);
    let cells = points(k, m, &snr)?;
    run_methods(scheme, &cells, &methods, &terms_or(s, &[1]), s)
}

/// Per-cell failures stay in the output as records with status "error".
pub fn grid(s: &Settings) -> Result<Vec<Record>> {
    let m = s.m.clone().unwrap_or_else(|| crate::values::linear(0.5, 6.0, 0.5).expect("static range"));
    let k = s.k.clone().unwrap_or_else(|| crate::values::logspace(0.01, 1000.0, 11).expect("static range"));
    let snr = s.snr_db.clone().unwrap_or_else(|| vec![10.0]);
    let scheme = s.scheme.unwrap_or(Scheme::Ora);
    let methods = methods_or(s, &[Method::Quadrature]);
    let cells = points(&k, &m, &snr)?;
    run_methods(scheme, &cells, &methods, &terms_or(s, &[1]), s)
}

/// Relative error of an approximation against quadrature.
pub fn errors(s: &Settings) -> Result<Vec<Record>> {
    let regime = s.regime.ok_or_else(|| Usage("--regime low-ratio|high-ratio is required".into()))?;
    if s.scheme == Some(Scheme::Opra) {
        bail!(Usage("the approximations are defined for ORA only".into()));
    }
    let (method, k0, terms) = match regime {
        Regime::LowRatio => (Method::ApproxLowRatio, 0.01, vec![0]),
        Regime::HighRatio => (Method::ApproxHighRatio, 200.0, terms_or(s, &[1, 3])),
    };
    let k = s.k.clone().unwrap_or_else(|| vec![k0]);
    let m = s.m.clone().unwrap_or_else(|| vec![2.0]);
    let snr = s.snr_db.clone().unwrap_or_else(|| crate::values::linear(0.0, 40.0, 5.0).expect("static range"));
    let cells = points(&k, &m, &snr)?;
    let per_cell: Vec<Result<Vec<Record>>> = cells
        .par_iter()
        .map(|&(k, m, snr)| {
            let pt = Point::new(Scheme::Ora, k, m, snr, &s.numerics)?;
            let (qr, q) = pt.record(Method::Quadrature, 0, s);
            let mut out = vec![qr];
            for &t in &terms {
                let (mut r, a) = pt.record(method, t, s);
                if method == Method::ApproxLowRatio {
                    r.terms = Some(2);
                }
                if let (Some(q), Some(a)) = (&q, &a) {
                    r.reference_bps_hz = Some(q.value());
                    r.abs_diff_bps_hz = Some((a.value() - q.value()).abs());
                    r.rel_error = relative_error_values(q.value(), a.value()).ok();
                }
                out.push(r);
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for r in per_cell {
        all.extend(r?);
    }
    Ok(all)
}

fn judge(r: &mut Record, reference: f64, tol: f64) {
    if let Some(v) = r.capacity_bps_hz {
        let d = (v - reference).abs();
        r.reference_bps_hz = Some(reference);
        r.abs_diff_bps_hz = Some(d);
        r.rel_error = relative_error_values(reference, v).ok();
        if r.status == STATUS_OK {
            r.status = if d <= tol { STATUS_PASS } else { STATUS_FAIL }.into();
        }
    }
}

/// The ten reference cells for closed form and quadrature, and the
/// approximation column for the large-k expansion (`--terms`, default 0).
pub fn table1(s: &Settings) -> Result<Vec<Record>> {
    let terms = terms_or(s, &[0]);
    let mut cells = Vec::new();
    for (i, &(k, exact)) in TABLE_EXACT.iter().enumerate() {
        for (j, &snr) in TABLE_SNR_DB.iter().enumerate() {
            cells.push((k, snr, exact[j], TABLE_APPROX[i].1[j]));
        }
    }
    let per_cell: Vec<Result<Vec<Record>>> = cells
        .par_iter()
        .map(|&(k, snr, exact, approx)| {
            let pt = Point::new(Scheme::Ora, k, 2.0, snr, &s.numerics)?;
            let mut out = Vec::new();
            let (mut q, qv) = pt.record(Method::Quadrature, 0, s);
            judge(&mut q, exact, TABLE_TOL);
            out.push(q);
            let (mut c, _) = pt.record(Method::ClosedForm, 0, s);
            judge(&mut c, exact, TABLE_TOL);
            out.push(c);
            for &t in &terms {
                let (mut a, _) = pt.record(Method::ApproxHighRatio, t, s);
                judge(&mut a, approx, TABLE_TOL);
                out.push(a);
            }
            if s.with_mc {
                let (mut r, mc) = pt.record(Method::MonteCarlo, 0, s);
                if let (Some(Outcome::Mc(mc)), Some(q)) = (mc, qv) {
                    judge(&mut r, q.value(), 3.0 * mc.std_err);
                    r.note = format!("{}; checked against quadrature within 3 std_err", r.note);
                }
                out.push(r);
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for r in per_cell {
        all.extend(r?);
    }
    Ok(all)
}

/// Closed form against quadrature within max(1e-3, err_est), and Monte
/// Carlo against quadrature within 3 std_err when --mc is set.
pub fn validate(s: &Settings) -> Result<Vec<Record>> {
    let k = s.k.clone().unwrap_or_else(|| vec![0.5, 20.0, 200.0]);
    let m = s.m.clone().unwrap_or_else(|| vec![1.0, 2.0, 4.0]);
    let snr = s.snr_db.clone().unwrap_or_else(|| TABLE_SNR_DB.to_vec());
    let schemes: Vec<Scheme> = match s.scheme {
        Some(sc) => vec![sc],
        None => vec![Scheme::Ora, Scheme::Opra],
    };
    let mut cells = Vec::new();
    for &sc in &schemes {
        for c in points(&k, &m, &snr)? {
            cells.push((sc, c));
        }
    }
    let per_cell: Vec<Result<Vec<Record>>> = cells
        .par_iter()
        .map(|&(sc, (k, m, snr))| {
            let pt = Point::new(sc, k, m, snr, &s.numerics)?;
            let (q, qv) = pt.record(Method::Quadrature, 0, s);
            let mut out = Vec::new();
            if let Some(qv) = qv {
                let (mut c, cv) = pt.record(Method::ClosedForm, 0, s);
                let tol = match (&cv, &qv) {
                    (Some(Outcome::Estimate(a)), Outcome::Estimate(b)) => 1e-3f64.max(a.err_est + b.err_est),
                    _ => 1e-3,
                };
                judge(&mut c, qv.value(), tol);
                out.push(c);
                if s.with_mc {
                    let (mut r, mc) = pt.record(Method::MonteCarlo, 0, s);
                    if let Some(Outcome::Mc(mc)) = mc {
                        judge(&mut r, qv.value(), 3.0 * mc.std_err);
                    }
                    out.push(r);
                }
            }
            out.push(q);
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for r in per_cell {
        all.extend(r?);
    }
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings() -> Settings {
        Settings::default()
    }

    #[test]
    fn invalid_shape_is_a_usage_error() {
        let s = Settings { k: Some(vec![20.0]), m: Some(vec![0.4]), snr_db: Some(vec![10.0]), ..settings() };
        let e = point(&s).unwrap_err();
        assert!(e.downcast_ref::<Usage>().is_some(), "{e}");
    }

    #[test]
    fn point_requires_single_values() {
        let s = Settings { k: Some(vec![20.0, 200.0]), m: Some(vec![2.0]), snr_db: Some(vec![10.0]), ..settings() };
        assert!(point(&s).unwrap_err().downcast_ref::<Usage>().is_some());
        let s = Settings { m: Some(vec![2.0]), snr_db: Some(vec![10.0]), ..settings() };
        assert!(point(&s).is_err());
    }

    #[test]
    fn opra_rejects_approximations_per_record() {
        let s = Settings {
            k: Some(vec![20.0]),
            m: Some(vec![2.0]),
            snr_db: Some(vec![10.0]),
            scheme: Some(Scheme::Opra),
            methods: Some(vec![Method::ApproxLowRatio, Method::Quadrature]),
            ..settings()
        };
        let rs = point(&s).unwrap();
        assert_eq!(rs.len(), 2);
        assert!(rs[0].failed());
        assert!(!rs[1].failed());
        assert!((rs[1].gamma0.unwrap() - 0.833_529_976_9).abs() < 1e-7);
    }

    #[test]
    fn judging() {
        let mut r = Record { capacity_bps_hz: Some(3.1325), status: STATUS_OK.into(), ..Default::default() };
        judge(&mut r, 3.13, 0.01);
        assert_eq!(r.status, STATUS_PASS);
        let mut r = Record { capacity_bps_hz: Some(9.5197), status: STATUS_OK.into(), ..Default::default() };
        judge(&mut r, 9.56, 0.01);
        assert!(r.mismatch());
    }
}
