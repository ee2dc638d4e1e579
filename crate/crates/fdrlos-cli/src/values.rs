//! Parsing of value lists: `20,200`, `0:40:5` (inclusive step) and
//! `log:0.01:1000:11` (log-spaced points).

use anyhow::{bail, Context, Result};

fn num(s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().with_context(|| format!("'{s}' is not a number"))?;
    if !v.is_finite() {
        bail!("'{s}' is not finite");
    }
    Ok(v)
}

/// Inclusive arithmetic range; the last point is kept when it lands within
/// a millionth of a step of `stop`.
pub fn linear(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) {
        bail!("range step must be > 0, got {step}");
    }
    if stop < start {
        bail!("range stop {stop} is below start {start}");
    }
    let n = ((stop - start) / step + 1e-6).floor() as usize;
    if n > 100_000 {
        bail!("range has more than 100000 points");
    }
    // rounding to 12 significant decimals keeps 0.1-style steps printable
    Ok((0..=n).map(|i| round12(start + i as f64 * step)).collect())
}

fn round12(v: f64) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    let scale = 10f64.powi(12 - v.abs().log10().ceil() as i32);
    (v * scale).round() / scale
}

pub fn logspace(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo) {
        bail!("log range needs 0 < start ≤ stop, got {lo}..{hi}");
    }
    if n < 2 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.log10(), hi.log10());
    Ok((0..n).map(|i| round12(10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))).collect())
}

pub fn parse_values(spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    if spec.is_empty() {
        bail!("empty value list");
    }
    let parts: Vec<&str> = spec.split(':').collect();
    let out = match parts.as_slice() {
        ["log", a, b, n] => {
            let n: usize = n.trim().parse().with_context(|| format!("'{n}' is not a point count"))?;
            logspace(num(a)?, num(b)?, n)?
        }
        [a, b, s] => linear(num(a)?, num(b)?, num(s)?)?,
        [_] => spec.split(',').map(num).collect::<Result<Vec<_>>>()?,
        _ => bail!("cannot read '{spec}'; use a list 1,2,3, a range start:stop:step or log:start:stop:count"),
    };
    if out.is_empty() {
        bail!("'{spec}' yields no values");
    }
    Ok(out)
}

pub fn parse_usizes(spec: &str) -> Result<Vec<usize>> {
    spec.split(',')
        .map(|s| s.trim().parse::<usize>().with_context(|| format!("'{s}' is not a non-negative integer")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_values("20, 200").unwrap(), vec![20.0, 200.0]);
        assert_eq!(parse_values("0:40:10").unwrap(), vec![0.0, 10.0, 20.0, 30.0, 40.0]);
        assert_eq!(parse_values("0.5:1:0.1").unwrap(), vec![0.5, 0.6, 0.7, 0.8, 0.9, 1.0]);
        let l = parse_values("log:0.01:1000:6").unwrap();
        assert_eq!(l, vec![0.01, 0.1, 1.0, 10.0, 100.0, 1000.0]);
    }

    #[test]
    fn rejects_bad_specs() {
        for s in ["", "a,b", "0:10:0", "10:0:1", "1:2", "log:0:1:3", "1:2:3:4"] {
            assert!(parse_values(s).is_err(), "{s}");
        }
        assert!(parse_usizes("1,x").is_err());
        assert_eq!(parse_usizes("0,1,3").unwrap(), vec![0, 1, 3]);
    }
}
