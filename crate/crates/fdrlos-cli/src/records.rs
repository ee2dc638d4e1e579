//! Output records and their CSV / JSON encodings.
//!
//! Every command writes the same columns in the same order; fields that do
//! not apply are empty in CSV and null in JSON.

use std::io::Write;

use anyhow::Result;
use serde::Serialize;

use crate::settings::Format;

pub const STATUS_OK: &str = "ok";
pub const STATUS_ERROR: &str = "error";
pub const STATUS_PASS: &str = "pass";
pub const STATUS_FAIL: &str = "fail";

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Record {
    pub scheme: String,
    pub k: f64,
    pub m: f64,
    pub snr_db: f64,
    pub method: String,
    pub terms: Option<usize>,
    pub capacity_bps_hz: Option<f64>,
    pub err_est_bps_hz: Option<f64>,
    pub std_err_bps_hz: Option<f64>,
    pub gamma0: Option<f64>,
    pub reference_bps_hz: Option<f64>,
    pub abs_diff_bps_hz: Option<f64>,
    pub rel_error: Option<f64>,
    pub status: String,
    pub runtime_ms: Option<f64>,
    pub note: String,
}

impl Record {
    pub fn failed(&self) -> bool {
        self.status == STATUS_ERROR
    }

    pub fn mismatch(&self) -> bool {
        self.status == STATUS_FAIL
    }
}

/// Deterministic order: (k, m, SNR, method, terms, scheme).
pub fn sort(records: &mut [Record]) {
    records.sort_by(|a, b| {
        a.k.total_cmp(&b.k)
            .then(a.m.total_cmp(&b.m))
            .then(a.snr_db.total_cmp(&b.snr_db))
            .then(a.method.cmp(&b.method))
            .then(a.terms.cmp(&b.terms))
            .then(a.scheme.cmp(&b.scheme))
    });
}

pub fn write<W: Write>(records: &[Record], format: Format, out: W) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            if records.is_empty() {
                w.serialize(Option::<Record>::None).ok();
            }
            for r in records {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, records)?;
            writeln!(out)?;
        }
    }
    Ok(())
}
