//! CSV emission and parsing.
//!
//! Reals are written in scientific notation with five significant digits
//! and a signed two-digit exponent (`3.0553e-03`), orders with four
//! decimals. Formatting never consults the locale.

use std::fs;
use std::path::Path;

use sfde_core::soe::SoeApproximation;

use crate::bench::BenchRow;
use crate::error::{HarnessError, Result};
use crate::study::{CompareRow, ConvergenceRow};

pub const CONVERGENCE_HEADER: [&str; 9] = ["M", "N", "error_u", "order_u", "error_p", "order_p", "cpu_ms", "avg_iters", "converged"];

/// `{:.4e}` with the exponent padded to at least two digits and always signed.
pub fn fmt_sci(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.4e}");
    let (mant, exp) = s.split_once('e').expect("LowerExp always has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", exp.abs())
}

pub fn fmt_fixed(x: f64) -> String {
    format!("{x:.4}")
}

fn opt(v: Option<f64>, f: fn(f64) -> String) -> String {
    v.map(f).unwrap_or_default()
}

fn to_string(records: impl IntoIterator<Item = Vec<String>>, header: &[&str]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for r in records {
        w.write_record(&r).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("CSV output is UTF-8")
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let records = rows.iter().map(|r| {
        vec![
            r.m.to_string(),
            r.n.to_string(),
            fmt_sci(r.error_u),
            opt(r.order_u, fmt_fixed),
            fmt_sci(r.error_p),
            opt(r.order_p, fmt_fixed),
            opt(r.cpu_ms, |v| format!("{v:.1}")),
            opt(r.avg_iters, |v| format!("{v:.2}")),
            r.converged.to_string(),
        ]
    });
    to_string(records, &CONVERGENCE_HEADER)
}

pub fn compare_csv(rows: &[CompareRow]) -> String {
    let records = rows.iter().map(|r| {
        vec![
            r.method.name().to_string(),
            r.m.to_string(),
            r.n.to_string(),
            fmt_sci(r.error_u),
            fmt_sci(r.error_p),
            opt(r.cpu_ms, |v| format!("{v:.1}")),
            opt(r.avg_iters, |v| format!("{v:.2}")),
            fmt_sci(r.max_diff),
            r.converged.to_string(),
        ]
    });
    to_string(records, &["method", "M", "N", "error_u", "error_p", "cpu_ms", "avg_iters", "max_diff", "converged"])
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let records = rows.iter().map(|r| {
        vec![
            r.m.to_string(),
            r.nexp.to_string(),
            fmt_sci(r.fast_seconds),
            opt(r.fast_ratio, fmt_fixed),
            opt(r.dense_seconds, fmt_sci),
            opt(r.dense_ratio, fmt_fixed),
            r.table_bytes.to_string(),
            r.peak_bytes.to_string(),
        ]
    });
    to_string(records, &["M", "nexp", "fast_s", "fast_ratio", "dense_s", "dense_ratio", "table_bytes", "peak_bytes"])
}

/// Nodes and weights with full precision, one exponential per row.
pub fn soe_csv(soe: &SoeApproximation) -> String {
    let records = soe
        .lambdas
        .iter()
        .zip(&soe.thetas)
        .enumerate()
        .map(|(s, (l, t))| vec![s.to_string(), format!("{l:e}"), format!("{t:e}")]);
    to_string(records, &["s", "lambda", "theta"])
}

/// `x, u, u_exact` at the cell centers.
pub fn solution_csv(centers: &[f64], u: &[f64], exact: Option<&dyn Fn(f64) -> f64>) -> String {
    let records = centers.iter().zip(u).map(|(&x, &v)| {
        vec![
            format!("{x:e}"),
            format!("{v:e}"),
            exact.map(|f| format!("{:e}", f(x))).unwrap_or_default(),
        ]
    });
    to_string(records, &["x", "u", "u_exact"])
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

fn parse_opt(s: &str) -> std::result::Result<Option<f64>, String> {
    if s.is_empty() {
        Ok(None)
    } else {
        s.parse().map(Some).map_err(|_| format!("not a number: {s:?}"))
    }
}

/// Parses a convergence table written by [`convergence_csv`].
pub fn parse_convergence(text: &str, path: &Path) -> Result<Vec<ConvergenceRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| HarnessError::csv(path, e))?.clone();
    if header.iter().ne(CONVERGENCE_HEADER) {
        return Err(HarnessError::Format {
            path: path.to_path_buf(),
            line: 1,
            reason: format!("unexpected header {header:?}"),
        });
    }
    let mut rows = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| HarnessError::csv(path, e))?;
        let fail = |reason: String| HarnessError::Format {
            path: path.to_path_buf(),
            line: k + 2,
            reason,
        };
        let num = |i: usize| rec[i].parse::<f64>().map_err(|_| fail(format!("not a number: {:?}", &rec[i])));
        let int = |i: usize| rec[i].parse::<usize>().map_err(|_| fail(format!("not an integer: {:?}", &rec[i])));
        rows.push(ConvergenceRow {
            m: int(0)?,
            n: int(1)?,
            error_u: num(2)?,
            order_u: parse_opt(&rec[3]).map_err(fail)?,
            error_p: num(4)?,
            order_p: parse_opt(&rec[5]).map_err(fail)?,
            cpu_ms: parse_opt(&rec[6]).map_err(fail)?,
            avg_iters: parse_opt(&rec[7]).map_err(fail)?,
            converged: rec[8].parse().map_err(|_| fail(format!("not a bool: {:?}", &rec[8])))?,
        });
    }
    Ok(rows)
}

pub fn read_convergence(path: impl AsRef<Path>) -> Result<Vec<ConvergenceRow>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_convergence(&text, path)
}
