//! Benchmark rows, the CSV schema and the gnuplot stub.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Column names, in order.
pub const CSV_HEADER: &str =
    "case,kernel,strategy,N,M,dt,l1_error,cond_min,cond_med,cond_max,eps_min,eps_med,eps_max,status";

/// One ladder rung.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub case: String,
    pub kernel: String,
    pub strategy: String,
    /// Number of centers (nodes).
    pub n: usize,
    /// Number of evaluation points.
    pub m: usize,
    /// Time step, for time-dependent cases.
    pub dt: Option<f64>,
    pub l1_error: f64,
    pub cond: Summary,
    pub eps: Summary,
    pub status: String,
}

/// Min / median / max over stencils; NaN when nothing was recorded.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub min: f64,
    pub med: f64,
    pub max: f64,
}

impl Summary {
    pub const NONE: Summary = Summary {
        min: f64::NAN,
        med: f64::NAN,
        max: f64::NAN,
    };

    /// Ignores NaN entries (unrecorded values); infinities are kept.
    pub fn of(values: &[f64]) -> Summary {
        let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
        if v.is_empty() {
            return Summary::NONE;
        }
        v.sort_by(f64::total_cmp);
        let k = v.len();
        let med = if k % 2 == 1 { v[k / 2] } else { 0.5 * (v[k / 2 - 1] + v[k / 2]) };
        Summary {
            min: v[0],
            med,
            max: v[k - 1],
        }
    }
}

fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:e}")
    }
}

fn parse_num(s: &str, line: usize) -> Result<f64> {
    s.parse()
        .map_err(|_| Error::InvalidArgument(format!("line {line}: `{s}` is not a number")))
}

impl BenchRow {
    pub fn to_csv(&self) -> String {
        [
            self.case.clone(),
            self.kernel.clone(),
            self.strategy.clone(),
            self.n.to_string(),
            self.m.to_string(),
            self.dt.map(num).unwrap_or_default(),
            num(self.l1_error),
            num(self.cond.min),
            num(self.cond.med),
            num(self.cond.max),
            num(self.eps.min),
            num(self.eps.med),
            num(self.eps.max),
            self.status.clone(),
        ]
        .join(",")
    }
}

/// The full CSV document for `rows`.
pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.to_csv());
        s.push('\n');
    }
    s
}

/// Parses and schema-checks a CSV document produced by [`to_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<BenchRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::InvalidArgument("missing or wrong CSV header".into()));
    }
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        let ln = k + 2;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 14 {
            return Err(Error::InvalidArgument(format!("line {ln}: expected 14 fields, got {}", f.len())));
        }
        let int = |s: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| Error::InvalidArgument(format!("line {ln}: `{s}` is not a count")))
        };
        let status = f[13].to_string();
        if !["ok", "blowup", "singular"].contains(&status.as_str()) {
            return Err(Error::InvalidArgument(format!("line {ln}: unknown status `{status}`")));
        }
        rows.push(BenchRow {
            case: f[0].into(),
            kernel: f[1].into(),
            strategy: f[2].into(),
            n: int(f[3])?,
            m: int(f[4])?,
            dt: if f[5].is_empty() { None } else { Some(parse_num(f[5], ln)?) },
            l1_error: parse_num(f[6], ln)?,
            cond: Summary {
                min: parse_num(f[7], ln)?,
                med: parse_num(f[8], ln)?,
                max: parse_num(f[9], ln)?,
            },
            eps: Summary {
                min: parse_num(f[10], ln)?,
                med: parse_num(f[11], ln)?,
                max: parse_num(f[12], ln)?,
            },
            status,
        });
    }
    Ok(rows)
}

/// A gnuplot script plotting `l1_error` against `N` from `csv_name`.
pub fn gnuplot_stub(csv_name: &str, title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set logscale xy");
    let _ = writeln!(s, "set xlabel 'N'");
    let _ = writeln!(s, "set ylabel 'L1 error'");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set title '{title}'");
    let _ = writeln!(
        s,
        "plot '{csv_name}' using 4:(stringcolumn(14) eq 'ok' ? $7 : 1/0) with linespoints title '{title}'"
    );
    s
}
