//! Marginal files and quantization onto the dyadic grid.
//!
//! A marginal file lists `(breakpoint, value)` pairs as decimal or rational
//! strings. With [`Interpolation::Step`] each value holds until the next
//! breakpoint (a final row at breakpoint 1 only closes the domain); with
//! [`Interpolation::Linear`] the values are samples joined by straight
//! segments and the breakpoints must run from 0 to 1.
//!
//! [`quantize`] replaces the raw function by its average over each column of
//! width `2^-N`, rounded to the nearest multiple of `2^-(N+K)` (ties toward
//! zero), and reports the exact L1 and sup errors of the replacement.

use std::fmt;
use std::path::Path;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::num::Dyadic;
use crate::plane::GridParams;
use crate::stepfn::StepFunction;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalParseError {
    #[error("empty number")]
    Empty,
    #[error("malformed number `{0}`")]
    Malformed(String),
}

/// Parses `7`, `-2.5`, `3/8` or `1/3` exactly.
pub fn parse_rational(s: &str) -> Result<BigRational, RationalParseError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(RationalParseError::Empty);
    }
    let bad = || RationalParseError::Malformed(s.to_string());
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_decimal(n.trim()).ok_or_else(bad)?;
        let d = parse_decimal(d.trim()).ok_or_else(bad)?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(n / d);
    }
    parse_decimal(s).ok_or_else(bad)
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let (neg, body) = match s.as_bytes().first()? {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let r = BigRational::new(num, den);
    Some(if neg { -r } else { r })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IngestError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("negative value {value} at breakpoint {breakpoint}")]
    NegativeValue { breakpoint: String, value: String },
    #[error("invalid breakpoints: {0}")]
    Domain(String),
    #[error("quantized value {0} is too large")]
    ValueTooLarge(String),
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    #[default]
    Step,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginalFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginalFile {
    pub format: MarginalFormat,
    pub interpolation: Interpolation,
    pub entries: Vec<(BigRational, BigRational)>,
}

fn rational_field(s: &str, what: &str, row: usize) -> Result<BigRational, IngestError> {
    parse_rational(s).map_err(|e| IngestError::Parse(format!("row {row}, {what}: {e}")))
}

impl MarginalFile {
    /// CSV with header `breakpoint,value`.
    pub fn parse_csv(text: &str, interpolation: Interpolation) -> Result<Self, IngestError> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let headers = reader.headers().map_err(|e| IngestError::Parse(e.to_string()))?.clone();
        if headers.len() != 2 || &headers[0] != "breakpoint" || &headers[1] != "value" {
            return Err(IngestError::Parse("expected header `breakpoint,value`".into()));
        }
        let mut entries = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| IngestError::Parse(e.to_string()))?;
            if rec.len() != 2 {
                return Err(IngestError::Parse(format!("row {} has {} fields", i + 1, rec.len())));
            }
            entries.push((rational_field(&rec[0], "breakpoint", i + 1)?, rational_field(&rec[1], "value", i + 1)?));
        }
        let file = MarginalFile { format: MarginalFormat::Csv, interpolation, entries };
        file.validate()?;
        Ok(file)
    }

    /// JSON array of `{"b": "...", "v": "..."}`; numbers are accepted too.
    pub fn parse_json(text: &str, interpolation: Interpolation) -> Result<Self, IngestError> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| IngestError::Parse(e.to_string()))?;
        let rows = value.as_array().ok_or_else(|| IngestError::Parse("expected a JSON array".into()))?;
        let field = |row: &serde_json::Value, key: &str, idx: usize| -> Result<BigRational, IngestError> {
            let raw = match row.get(key) {
                Some(serde_json::Value::String(s)) => s.clone(),
                Some(serde_json::Value::Number(n)) => n.to_string(),
                _ => return Err(IngestError::Parse(format!("row {idx}: missing `{key}`"))),
            };
            rational_field(&raw, key, idx)
        };
        let entries = rows
            .iter()
            .enumerate()
            .map(|(i, row)| Ok((field(row, "b", i + 1)?, field(row, "v", i + 1)?)))
            .collect::<Result<Vec<_>, IngestError>>()?;
        let file = MarginalFile { format: MarginalFormat::Json, interpolation, entries };
        file.validate()?;
        Ok(file)
    }

    /// Picks the format from the extension: `.json` is JSON, anything else CSV.
    pub fn from_path(path: &Path, interpolation: Interpolation) -> Result<Self, IngestError> {
        let text = std::fs::read_to_string(path).map_err(|e| IngestError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Self::parse_json(&text, interpolation),
            _ => Self::parse_csv(&text, interpolation),
        }
    }

    /// A step function given exactly.
    pub fn from_step_function(f: &StepFunction) -> Self {
        let entries = f
            .pieces()
            .map(|(a, _, v)| (a.to_rational(), v.to_rational()))
            .collect();
        MarginalFile { format: MarginalFormat::Csv, interpolation: Interpolation::Step, entries }
    }

    fn validate(&self) -> Result<(), IngestError> {
        self.pieces().map(|_| ())
    }

    fn pieces(&self) -> Result<Vec<LinearPiece>, IngestError> {
        let e = &self.entries;
        let zero = BigRational::zero();
        let one = BigRational::from_integer(1.into());
        if e.is_empty() {
            return Err(IngestError::Domain("no entries".into()));
        }
        if e[0].0 != zero {
            return Err(IngestError::Domain("first breakpoint must be 0".into()));
        }
        if e.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(IngestError::Domain("breakpoints must be strictly increasing".into()));
        }
        if let Some((b, v)) = e.iter().find(|(_, v)| v.is_negative()) {
            return Err(IngestError::NegativeValue { breakpoint: b.to_string(), value: v.to_string() });
        }
        let last = &e[e.len() - 1].0;
        match self.interpolation {
            Interpolation::Step => {
                if *last > one {
                    return Err(IngestError::Domain("breakpoints must lie in [0, 1]".into()));
                }
                let open: Vec<&(BigRational, BigRational)> =
                    e.iter().filter(|(b, _)| *b < one).collect();
                Ok(open
                    .iter()
                    .enumerate()
                    .map(|(i, (b, v))| LinearPiece {
                        lo: b.clone(),
                        hi: open.get(i + 1).map_or(one.clone(), |n| n.0.clone()),
                        y_lo: v.clone(),
                        y_hi: v.clone(),
                    })
                    .collect())
            }
            Interpolation::Linear => {
                if e.len() < 2 || *last != one {
                    return Err(IngestError::Domain("linear samples must run from 0 to 1".into()));
                }
                Ok(e.windows(2)
                    .map(|w| LinearPiece {
                        lo: w[0].0.clone(),
                        hi: w[1].0.clone(),
                        y_lo: w[0].1.clone(),
                        y_hi: w[1].1.clone(),
                    })
                    .collect())
            }
        }
    }
}

#[derive(Debug, Clone)]
struct LinearPiece {
    lo: BigRational,
    hi: BigRational,
    y_lo: BigRational,
    y_hi: BigRational,
}

impl LinearPiece {
    fn at(&self, x: &BigRational) -> BigRational {
        if self.y_lo == self.y_hi {
            return self.y_lo.clone();
        }
        &self.y_lo + (&self.y_hi - &self.y_lo) * (x - &self.lo) / (&self.hi - &self.lo)
    }

    /// Clips to `[lo, hi)`, returning `(lo, hi, y(lo), y(hi))`.
    fn clip(&self, lo: &BigRational, hi: &BigRational) -> Option<(BigRational, BigRational, BigRational, BigRational)> {
        let a = if self.lo > *lo { self.lo.clone() } else { lo.clone() };
        let b = if self.hi < *hi { self.hi.clone() } else { hi.clone() };
        if a >= b {
            return None;
        }
        let (ya, yb) = (self.at(&a), self.at(&b));
        Some((a, b, ya, yb))
    }
}

fn ser_rational<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(r)
}

/// Exact errors introduced by quantization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuantizationReport {
    /// `∫ |raw − quantized|`.
    #[serde(serialize_with = "ser_rational")]
    pub l1_error: BigRational,
    /// `max |raw − quantized|`.
    #[serde(serialize_with = "ser_rational")]
    pub sup_error: BigRational,
}

impl fmt::Display for QuantizationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "quantization error: L1 {} (~{:.3e}), sup {} (~{:.3e})",
            self.l1_error,
            self.l1_error.to_f64().unwrap_or(f64::NAN),
            self.sup_error,
            self.sup_error.to_f64().unwrap_or(f64::NAN)
        )
    }
}

fn pow2(e: u32) -> BigRational {
    BigRational::from_integer(BigInt::from(1) << e as usize)
}

/// Nearest multiple of `2^-e` (ties toward zero) for a nonnegative value.
fn round_to_grid(x: &BigRational, e: u32) -> BigInt {
    let scaled = x * pow2(e);
    let (q, r) = scaled.numer().div_rem(scaled.denom());
    // r / denom is the fractional part; round up only past one half
    if BigInt::from(2) * r > *scaled.denom() {
        q + 1
    } else {
        q
    }
}

/// `∫ |d(x)| dx` over a segment of length `len` where `d` runs linearly from
/// `da` to `db`.
fn abs_linear_integral(da: &BigRational, db: &BigRational, len: &BigRational) -> BigRational {
    let two = BigRational::from_integer(2.into());
    if (da.is_negative() && db.is_positive()) || (da.is_positive() && db.is_negative()) {
        let (a, b) = (da.abs(), db.abs());
        len * (&a * &a + &b * &b) / (two * (a + b))
    } else {
        len * (da.abs() + db.abs()) / two
    }
}

/// Column averages of `raw` on width `2^-N`, rounded to the `2^-(N+K)` grid.
pub fn quantize(raw: &MarginalFile, params: GridParams) -> Result<(StepFunction, QuantizationReport), IngestError> {
    let pieces = raw.pieces()?;
    let depth = params.depth();
    let fine = params.fine_exponent();
    let width = BigRational::new(1.into(), BigInt::from(1) << depth as usize);
    let mut values = Vec::with_capacity(params.side());
    let mut l1 = BigRational::zero();
    let mut sup = BigRational::zero();
    let two = BigRational::from_integer(2.into());
    for c in 0..params.side() {
        let lo = &width * BigRational::from_integer(c.into());
        let hi = &lo + &width;
        let clipped: Vec<_> = pieces.iter().filter_map(|p| p.clip(&lo, &hi)).collect();
        let integral: BigRational = clipped
            .iter()
            .map(|(a, b, ya, yb)| (b - a) * (ya + yb) / &two)
            .fold(BigRational::zero(), |acc, x| acc + x);
        let average = integral / &width;
        let units = round_to_grid(&average, fine);
        let q = BigRational::new(units.clone(), BigInt::from(1) << fine as usize);
        for (a, b, ya, yb) in &clipped {
            let (da, db) = (ya - &q, yb - &q);
            l1 += abs_linear_integral(&da, &db, &(b - a));
            for d in [da.abs(), db.abs()] {
                if d > sup {
                    sup = d;
                }
            }
        }
        let units = units.to_i128().ok_or_else(|| IngestError::ValueTooLarge(q.to_string()))?;
        values.push(Dyadic::new(units, fine));
    }
    let f = StepFunction::uniform(&values).expect("2^N nonnegative cells");
    Ok((f, QuantizationReport { l1_error: l1, sup_error: sup }))
}
