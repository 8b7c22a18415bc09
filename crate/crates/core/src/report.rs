//! Deterministic serialization: compact JSON with every float written to 17
//! significant digits, and CSV tables for reports and scans.

use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::error::{Error, Result};
use crate::jacobi::{JacobiReport, ScanResult};

/// Version tag embedded in every emitted document.
pub const SCHEMA_VERSION: u32 = 1;

struct FullPrecision;

impl Formatter for FullPrecision {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{}", fmt_f64(value))
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        write!(writer, "{}", fmt_f64(value as f64))
    }
}

/// A float with 17 significant digits (round-trips exactly).
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Compact JSON with full-precision floats.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision);
    value.serialize(&mut ser).map_err(|e| Error::invalid(format!("serialization failed: {e}")))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::invalid(e.to_string()))
}

fn join_f64(v: &[f64]) -> String {
    v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(";")
}

fn join_u64(v: &[u64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

/// One row per evaluated mode; chain probes follow the explicit modes.
pub fn report_csv(r: &JacobiReport) -> String {
    let mut out = String::from("degrees,lambdas,dtn,Lambda,mult,degenerate,source\n");
    let mut row = |e: &crate::jacobi::ModeEntry, source: &str| {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            join_u64(&e.mode.degrees),
            join_f64(&e.mode.lambdas),
            fmt_f64(e.dtn),
            fmt_f64(e.lambda_df),
            e.mode.mult,
            e.degenerate,
            source
        ));
    };
    for e in &r.entries {
        row(e, "mode");
    }
    for run in &r.runs {
        for e in &run.probes {
            row(e, "chain_probe");
        }
    }
    out
}

/// Samples, then brackets, as two CSV sections separated by a blank line.
pub fn scan_csv(s: &ScanResult) -> String {
    let mut out = String::from("param,index,min_abs_nonconst,degenerate\n");
    for x in &s.samples {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f64(x.param),
            x.index,
            x.min_abs_nonconst.map(fmt_f64).unwrap_or_default(),
            x.degenerate
        ));
    }
    out.push_str("\nparam_lo,param_hi,index_lo,index_hi,resolved\n");
    for b in &s.jump_brackets {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(b.param_lo),
            fmt_f64(b.param_hi),
            b.index_lo,
            b.index_hi,
            b.resolved
        ));
    }
    out
}
