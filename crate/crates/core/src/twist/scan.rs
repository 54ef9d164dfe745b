//! Full scans over a family of twists with two-stage vanishing detection.

use std::io::{BufRead, Write};

use rayon::prelude::*;

use super::{enumerate_fundamental, twist_parity, twisted_coefficients, Parity, Signs};
use crate::curve::{an_table, CoefficientTable, CurveConfig, Provider};
use crate::error::{Error, Result};
use crate::lfunc;

/// The value below which an L-value (or derivative) counts as zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdPolicy {
    pub tau: f64,
}

impl Default for ThresholdPolicy {
    fn default() -> Self {
        ThresholdPolicy { tau: 1e-2 }
    }
}

/// Error targets for the two passes. The coarse target is multiplied by
/// `(log |d|)^r`; the refine target is absolute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionPolicy {
    pub coarse_eps: f64,
    pub refine_eps: f64,
    /// Upper limit on series length per evaluation.
    pub max_terms: Option<usize>,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy { coarse_eps: 1e-2, refine_eps: 1e-4, max_terms: None }
    }
}

impl PrecisionPolicy {
    /// Both targets divided by `factor`.
    pub fn stricter(&self, factor: f64) -> PrecisionPolicy {
        PrecisionPolicy { coarse_eps: self.coarse_eps / factor, refine_eps: self.refine_eps / factor, max_terms: self.max_terms }
    }

    fn coarse_target(&self, d: i64, r: u32) -> f64 {
        self.coarse_eps * (d.unsigned_abs() as f64).ln().powi(r as i32)
    }
}

#[derive(Debug, Clone)]
pub struct ScanOptions {
    /// `None` scans both parities.
    pub parity: Option<Parity>,
    pub signs: Signs,
    pub precision: PrecisionPolicy,
    pub threshold: ThresholdPolicy,
    pub provider: Provider,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            parity: None,
            signs: Signs::Both,
            precision: PrecisionPolicy::default(),
            threshold: ThresholdPolicy::default(),
            provider: Provider::Hybrid,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Vanishing {
    Yes,
    No,
    Unresolved,
}

impl Vanishing {
    pub fn name(self) -> &'static str {
        match self {
            Vanishing::Yes => "true",
            Vanishing::No => "false",
            Vanishing::Unresolved => "unresolved",
        }
    }

    pub fn parse(s: &str) -> Option<Vanishing> {
        match s {
            "true" => Some(Vanishing::Yes),
            "false" => Some(Vanishing::No),
            "unresolved" => Some(Vanishing::Unresolved),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwistRecord {
    pub d: i64,
    pub parity: Parity,
    pub order: u32,
    /// `L^(r)(E_d,1)/r!`; NaN when no evaluation fit in the budget.
    pub value: f64,
    pub error: f64,
    /// `value / (log |d|)^r`.
    pub normalised: f64,
    pub vanishing: Vanishing,
    pub terms: usize,
}

#[derive(Debug, Clone, Default)]
pub struct ScanReport {
    pub records: Vec<TwistRecord>,
    /// Discriminants left out, with the reason.
    pub skipped: Vec<(i64, String)>,
    /// Even twists whose value lies below `-error`.
    pub negative: Vec<i64>,
    pub base_terms: usize,
}

fn budget_ok(policy: &PrecisionPolicy, m: usize) -> bool {
    policy.max_terms.is_none_or(|cap| m <= cap)
}

fn evaluate(table: &CoefficientTable, base: &CurveConfig, d: i64, parity: Parity, opts: &ScanOptions) -> TwistRecord {
    let r = parity.order();
    let conductor = (base.conductor as f64) * (d as f64) * (d as f64);
    let norm = (d.unsigned_abs() as f64).ln().powi(r as i32);
    let tau = opts.threshold.tau;
    let mut record = TwistRecord {
        d,
        parity,
        order: r,
        value: f64::NAN,
        error: f64::INFINITY,
        normalised: f64::NAN,
        vanishing: Vanishing::Unresolved,
        terms: 0,
    };
    let view = match twisted_coefficients(table, base, d, table.len()) {
        Ok(v) => v,
        Err(_) => return record,
    };
    let run = |target: f64, record: &mut TwistRecord| -> bool {
        let m = lfunc::terms_needed(conductor, r, 0.5 * target);
        record.terms = m;
        if !budget_ok(&opts.precision, m) || m > table.len() {
            return false;
        }
        match lfunc::l_derivative_with_terms(&view, conductor, r, m) {
            Ok(v) => {
                record.value = v.value;
                record.error = v.error;
                record.normalised = v.value / norm;
                true
            }
            Err(_) => false,
        }
    };
    if !run(opts.precision.coarse_target(d, r), &mut record) {
        return record;
    }
    if record.value.abs() - record.error > tau {
        record.vanishing = Vanishing::No;
        return record;
    }
    if !run(opts.precision.refine_eps, &mut record) {
        record.vanishing = Vanishing::Unresolved;
        return record;
    }
    record.vanishing = if record.value.abs() + record.error <= tau {
        Vanishing::Yes
    } else if record.value.abs() - record.error > tau {
        Vanishing::No
    } else {
        Vanishing::Unresolved
    };
    record
}

/// Coefficients needed to evaluate every twist with `|d| < x` under `opts`.
pub fn base_terms_needed(base: &CurveConfig, x: u64, opts: &ScanOptions) -> usize {
    let conductor = base.conductor as f64 * (x as f64).powi(2);
    let eps = opts.precision.coarse_eps.min(opts.precision.refine_eps);
    let m = [0, 1].iter().map(|&r| lfunc::terms_needed(conductor, r, 0.5 * eps)).max().unwrap_or(1);
    match opts.precision.max_terms {
        Some(cap) => m.min(cap),
        None => m,
    }
}

/// Evaluates the listed discriminants against a prepared base table.
/// Ineligible `d` and those of the wrong parity go to the skip list.
pub fn scan_discriminants(base: &CurveConfig, table: &CoefficientTable, ds: &[i64], opts: &ScanOptions) -> ScanReport {
    let mut report = ScanReport { base_terms: table.len(), ..Default::default() };
    let mut work = Vec::new();
    for &d in ds {
        match twist_parity(base, d) {
            Ok(p) if opts.parity.is_none_or(|want| want == p) => work.push((d, p)),
            Ok(_) => {}
            Err(e) => report.skipped.push((d, e.to_string())),
        }
    }
    report.records = work.par_iter().map(|&(d, p)| evaluate(table, base, d, p, opts)).collect();
    report.negative = report
        .records
        .iter()
        .filter(|r| r.parity == Parity::Even && r.value < -r.error)
        .map(|r| r.d)
        .collect();
    report
}

/// All eligible fundamental `d` with `1 < |d| < x`, ordered by `|d|`.
pub fn scan(base: &CurveConfig, x: u64, opts: &ScanOptions) -> Result<ScanReport> {
    let ds = enumerate_fundamental(x, opts.signs);
    if ds.is_empty() {
        return Ok(ScanReport::default());
    }
    let m = base_terms_needed(base, x, opts);
    let table = an_table(base, m.max(1), opts.provider)?;
    let mut report = scan_discriminants(base, &table, &ds, opts);
    report.base_terms = table.len();
    Ok(report)
}

pub const CSV_HEADER: &str = "d,parity,r,value,error,normalised_value,vanishing,terms";

fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.8e}")
    }
}

/// Writes `#`-prefixed header lines, the column header and one row per record.
pub fn write_csv<W: Write>(mut w: W, header: &[String], records: &[TwistRecord]) -> std::io::Result<()> {
    for line in header {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.d,
            r.parity.name(),
            r.order,
            fmt_float(r.value),
            fmt_float(r.error),
            fmt_float(r.normalised),
            r.vanishing.name(),
            r.terms
        )?;
    }
    Ok(())
}

pub fn write_skip_manifest<W: Write>(mut w: W, header: &[String], report: &ScanReport) -> std::io::Result<()> {
    for line in header {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "# skipped: {}", report.skipped.len())?;
    writeln!(w, "# negativity violations: {}", report.negative.len())?;
    writeln!(w, "d,status")?;
    for (d, reason) in &report.skipped {
        writeln!(w, "{d},skipped: {}", reason.replace(',', ";"))?;
    }
    for d in &report.negative {
        writeln!(w, "{d},negative even value")?;
    }
    Ok(())
}

fn parse_float(s: &str) -> Option<f64> {
    match s {
        "nan" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

/// Reads records written by [`write_csv`]; `#` lines and the column header
/// are skipped.
pub fn read_csv<R: BufRead>(r: R) -> Result<Vec<TwistRecord>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::Config(format!("reading scan CSV: {e}")))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("d,") {
            continue;
        }
        let bad = || Error::Config(format!("scan CSV line {}: malformed row '{line}'", i + 1));
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(bad());
        }
        out.push(TwistRecord {
            d: f[0].parse().map_err(|_| bad())?,
            parity: Parity::parse(f[1]).ok_or_else(bad)?,
            order: f[2].parse().map_err(|_| bad())?,
            value: parse_float(f[3]).ok_or_else(bad)?,
            error: parse_float(f[4]).ok_or_else(bad)?,
            normalised: parse_float(f[5]).ok_or_else(bad)?,
            vanishing: Vanishing::parse(f[6]).ok_or_else(bad)?,
            terms: f[7].parse().map_err(|_| bad())?,
        });
    }
    Ok(out)
}
