//! Trace records, per-generation summaries and the offline trace audit.
//!
//! A [`Trace`] is a replayable artifact: [`audit_trace`] rebuilds the
//! starting hypograph, re-applies every recorded swap and re-derives each
//! claimed quantity from scratch before checking the swap invariants.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::feasibility::FeasibilityReport;
use crate::num::Dyadic;
use crate::plane::{initial_set, is_swappable, DyadicSet, GridParams, PlaneError, SwapMove};
use crate::stepfn::{first_prefix_violation, StepFunction};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error("malformed trace at line {line}: {reason}")]
    MalformedTrace { line: usize, reason: String },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error(transparent)]
    Plane(#[from] PlaneError),
}

/// One executed swap with the measured drop in `‖f − v‖₁` and `|A Δ A′|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SwapRecord {
    pub mv: SwapMove,
    pub l1_decrease: Dyadic,
    pub sym_diff: Dyadic,
}

impl fmt::Display for SwapRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "swap n={} i={} j={} k={} dl1={} symdiff={}",
            self.mv.generation, self.mv.i, self.mv.j, self.mv.k, self.l1_decrease, self.sym_diff
        )
    }
}

/// Line-delimited list of [`SwapRecord`]s. Blank lines and lines starting
/// with `#` are ignored when parsing.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub records: Vec<SwapRecord>,
}

impl Trace {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&r.to_string());
            out.push('\n');
        }
        out
    }
}

impl FromStr for Trace {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut records = Vec::new();
        for (idx, raw) in s.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |reason: String| ReportError::MalformedTrace { line: idx + 1, reason };
            let mut words = line.split_whitespace();
            if words.next() != Some("swap") {
                return Err(bad("expected a `swap` record".into()));
            }
            let mut fields = [None::<&str>; 6];
            const KEYS: [&str; 6] = ["n", "i", "j", "k", "dl1", "symdiff"];
            for word in words {
                let (key, value) = word.split_once('=').ok_or_else(|| bad(format!("`{word}` is not key=value")))?;
                let slot = KEYS
                    .iter()
                    .position(|k| *k == key)
                    .ok_or_else(|| bad(format!("unknown key `{key}`")))?;
                if fields[slot].replace(value).is_some() {
                    return Err(bad(format!("duplicate key `{key}`")));
                }
            }
            let get = |slot: usize| fields[slot].ok_or_else(|| bad(format!("missing key `{}`", KEYS[slot])));
            let int = |slot: usize| -> Result<usize, ReportError> {
                get(slot)?.parse().map_err(|_| bad(format!("`{}` is not an index", KEYS[slot])))
            };
            let dy = |slot: usize| -> Result<Dyadic, ReportError> {
                get(slot)?.parse().map_err(|e| bad(format!("`{}`: {e}", KEYS[slot])))
            };
            records.push(SwapRecord {
                mv: SwapMove::new(int(0)? as u32, int(1)?, int(2)?, int(3)?),
                l1_decrease: dy(4)?,
                sym_diff: dy(5)?,
            });
        }
        Ok(Trace { records })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GenerationRecord {
    pub generation: u32,
    pub swap_count: usize,
    /// `‖f − v_{E_n}‖₁` after the generation.
    pub residual_l1: Dyadic,
    /// `|E_{n−1} Δ E_n|`.
    pub sym_diff_total: Dyadic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceSummary {
    pub generations: Vec<GenerationRecord>,
    /// `‖f − v_{E_0}‖₁`.
    pub initial_residual: Dyadic,
    pub final_residual: Dyadic,
    pub feasibility: FeasibilityReport,
}

impl TraceSummary {
    pub fn total_swaps(&self) -> usize {
        self.generations.iter().map(|g| g.swap_count).sum()
    }

    pub fn total_sym_diff(&self) -> Dyadic {
        self.generations.iter().map(|g| g.sym_diff_total).sum()
    }

    /// Residuals never increase and the total movement stays within the
    /// initial residual.
    pub fn is_consistent(&self) -> bool {
        let mut last = self.initial_residual;
        for g in &self.generations {
            if g.residual_l1 > last {
                return false;
            }
            last = g.residual_l1;
        }
        self.total_sym_diff() <= self.initial_residual
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

impl fmt::Display for TraceSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "feasibility: {}", self.feasibility)?;
        writeln!(f, "initial residual: {} (~{:.6})", self.initial_residual, self.initial_residual.to_f64())?;
        writeln!(f, "{:>4} {:>7} {:>20} {:>20}", "n", "swaps", "residual", "|E(n-1) D E(n)|")?;
        for g in &self.generations {
            writeln!(
                f,
                "{:>4} {:>7} {:>20} {:>20}",
                g.generation,
                g.swap_count,
                g.residual_l1.to_string(),
                g.sym_diff_total.to_string()
            )?;
        }
        write!(f, "final residual: {} (~{:.6})", self.final_residual, self.final_residual.to_f64())
    }
}

/// Exact `‖f − v_E‖₁`. `f` must be constant on the set's finest columns.
pub fn residual(set: &DyadicSet, f: &StepFunction) -> Result<Dyadic, ReportError> {
    let depth = set.params().depth();
    let cells = f.cell_values(depth).ok_or_else(|| {
        ReportError::GridMismatch(format!("target is not constant on columns of width 2^-{depth}"))
    })?;
    Ok(set.residual_to(&cells))
}

/// Which replayed property failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Invariant {
    /// The recorded move satisfies every swappability condition.
    Swappable,
    /// Horizontal section and total measure are unchanged.
    HorizontalSection,
    /// `|A∖A′| = ∫_{X_j}(v_A − v_{A′})` and `|A′∖A| = ∫_{X_k}(v_{A′} − v_A)`.
    MassTransfer,
    /// `‖f − v_{A′}‖₁ = ‖f − v_A‖₁ − |A Δ A′|`.
    L1Decrease,
    /// The recorded `dl1` matches the replay.
    ClaimedL1,
    /// The recorded `symdiff` matches the replay.
    ClaimedSymDiff,
    /// Per column block, `v` moves monotonically toward `f` or stays put.
    ColumnMonotonicity,
    /// `∫₀ᵗ f* ≤ ∫₀ᵗ v*` after the move.
    Majorization,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditViolation {
    /// 0-based record index.
    pub record: usize,
    pub invariant: Invariant,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum AuditOutcome {
    Pass,
    Violation(AuditViolation),
}

impl AuditOutcome {
    pub fn is_pass(&self) -> bool {
        matches!(self, AuditOutcome::Pass)
    }
}

/// `lo` plus every breakpoint of the three functions inside `[lo, hi)`; all
/// three are constant between consecutive points.
fn window_points(a: &StepFunction, b: &StepFunction, c: &StepFunction, lo: Dyadic, hi: Dyadic) -> Vec<Dyadic> {
    let mut pts: Vec<Dyadic> = std::iter::once(lo)
        .chain(a.breakpoints().iter().copied())
        .chain(b.breakpoints().iter().copied())
        .chain(c.breakpoints().iter().copied())
        .filter(|&x| x >= lo && x < hi)
        .collect();
    pts.sort();
    pts.dedup();
    pts
}

/// `|A ∖ B|` from the cell fills; every cell holds a left-aligned rectangle.
fn difference_measure(a: &DyadicSet, b: &DyadicSet) -> Dyadic {
    let units: u64 = a
        .fills()
        .iter()
        .zip(b.fills())
        .map(|(&x, &y)| x.saturating_sub(y) as u64)
        .sum();
    Dyadic::new(units as i128, 0) * a.params().unit_area()
}

fn check_record(
    index: usize,
    rec: &SwapRecord,
    before: &DyadicSet,
    after: &DyadicSet,
    f: &StepFunction,
) -> Result<Option<AuditViolation>, ReportError> {
    let violation = |invariant: Invariant, detail: String| Ok(Some(AuditViolation { record: index, invariant, detail }));
    let mv = rec.mv;
    if !is_swappable(before, f, mv)? {
        return violation(Invariant::Swappable, format!("move {mv} is not swappable"));
    }

    let (h0, h1) = (before.horizontal_section(), after.horizontal_section());
    if h0 != h1 || before.measure() != after.measure() {
        return violation(Invariant::HorizontalSection, "horizontal section changed".into());
    }

    let (v0, v1) = (before.vertical_section(), after.vertical_section());
    let block = Dyadic::unit(mv.generation);
    let col = |idx: usize| (Dyadic::from_int(idx as i64 - 1) * block, Dyadic::from_int(idx as i64) * block);
    let (j_lo, j_hi) = col(mv.j);
    let (k_lo, k_hi) = col(mv.k);
    let removed = difference_measure(before, after);
    let added = difference_measure(after, before);
    let donor_drop = v0.integral_over(j_lo, j_hi) - v1.integral_over(j_lo, j_hi);
    let receiver_gain = v1.integral_over(k_lo, k_hi) - v0.integral_over(k_lo, k_hi);
    if removed != donor_drop || added != receiver_gain {
        return violation(
            Invariant::MassTransfer,
            format!("|A\\A'|={removed} vs {donor_drop}, |A'\\A|={added} vs {receiver_gain}"),
        );
    }

    let l1_before = f.l1_distance(&v0);
    let l1_after = f.l1_distance(&v1);
    let sym = removed + added;
    if l1_after != l1_before - sym {
        return violation(
            Invariant::L1Decrease,
            format!("{l1_after} != {l1_before} - {sym}"),
        );
    }
    if rec.l1_decrease != l1_before - l1_after {
        return violation(
            Invariant::ClaimedL1,
            format!("recorded {} but replay gives {}", rec.l1_decrease, l1_before - l1_after),
        );
    }
    if rec.sym_diff != sym {
        return violation(
            Invariant::ClaimedSymDiff,
            format!("recorded {} but replay gives {sym}", rec.sym_diff),
        );
    }

    for l in 1..=(1usize << mv.generation) {
        let (lo, hi) = col(l);
        let pts = window_points(f, &v0, &v1, lo, hi);
        let below = pts.iter().all(|&x| f.eval(x) >= v0.eval(x));
        let above = pts.iter().all(|&x| f.eval(x) <= v0.eval(x));
        let ok = pts.iter().all(|&x| {
            let (fx, a, b) = (f.eval(x), v0.eval(x), v1.eval(x));
            if below && above {
                b == a
            } else if below {
                fx >= b && b >= a
            } else if above {
                fx <= b && b <= a
            } else {
                b == a
            }
        });
        if !ok {
            return violation(Invariant::ColumnMonotonicity, format!("column block {l}"));
        }
    }

    if let Some(v) = first_prefix_violation(&f.rearrangement_profile(), &v1.rearrangement_profile()) {
        return violation(
            Invariant::Majorization,
            format!("at t={}: {} > {}", v.t, v.lhs, v.rhs),
        );
    }
    Ok(None)
}

/// Replays `trace` from the hypograph of `g` and checks every swap.
pub fn audit_trace(
    trace: &Trace,
    f: &StepFunction,
    g: &StepFunction,
    params: GridParams,
) -> Result<AuditOutcome, ReportError> {
    let mut set = initial_set(g, params)?;
    if f.cell_values(params.depth()).is_none() {
        return Err(ReportError::GridMismatch(format!(
            "target is not constant on columns of width 2^-{}",
            params.depth()
        )));
    }
    for (index, rec) in trace.records.iter().enumerate() {
        if !rec.mv.is_valid_for(params) {
            return Err(ReportError::MalformedTrace {
                line: index + 1,
                reason: format!("move {} is out of range", rec.mv),
            });
        }
        let after = set.swap(rec.mv)?;
        if let Some(v) = check_record(index, rec, &set, &after, f)? {
            return Ok(AuditOutcome::Violation(v));
        }
        set = after;
    }
    Ok(AuditOutcome::Pass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plane::reconstruct;

    fn d(n: i128, e: u32) -> Dyadic {
        Dyadic::new(n, e)
    }

    fn ramp(e: u32) -> StepFunction {
        let cells = 1i128 << e;
        let vals: Vec<Dyadic> = (0..cells).map(|c| d(2 * cells - 2 * c - 1, e + 2)).collect();
        StepFunction::uniform(&vals).unwrap()
    }

    #[test]
    fn residual_examples() {
        let p = GridParams::new(2, 1).unwrap();
        let one = StepFunction::constant(Dyadic::ONE).unwrap();
        let full = initial_set(&one, p).unwrap();
        assert_eq!(residual(&full, &one).unwrap(), Dyadic::ZERO);

        let bumpy = StepFunction::new(vec![Dyadic::ZERO, d(1, 3), Dyadic::ONE], vec![Dyadic::ONE, Dyadic::ZERO]).unwrap();
        assert!(matches!(residual(&full, &bumpy), Err(ReportError::GridMismatch(_))));
    }

    #[test]
    fn residual_of_ramp_hypograph() {
        let p = GridParams::new(4, 4).unwrap();
        let f = ramp(4);
        let e0 = initial_set(&f, p).unwrap();
        // the oracle integrates |f − λ_f| directly on the sub-unit grid
        let lambda = f.distribution_profile();
        let mut expected = Dyadic::ZERO;
        for u in 0..256 {
            let x = d(u, 8);
            expected += (f.eval(x) - lambda.value_at(x)).abs() * d(1, 8);
        }
        assert_eq!(residual(&e0, &f).unwrap(), expected);
    }

    #[test]
    fn trace_text_round_trip() {
        let f = ramp(3);
        let rec = reconstruct(&f, &f, GridParams::new(3, 2).unwrap()).unwrap();
        assert!(!rec.trace.records.is_empty());
        let text = rec.trace.to_text();
        assert_eq!(text.parse::<Trace>().unwrap(), rec.trace);
        assert!("swap n=1 i=1 j=1\n".parse::<Trace>().is_err());
        assert!("swap n=1 i=1 j=1 k=2 dl1=1/3 symdiff=0\n".parse::<Trace>().is_err());
        assert!("flip\n".parse::<Trace>().is_err());
        assert_eq!("# header\n\n".parse::<Trace>().unwrap(), Trace::default());
    }

    #[test]
    fn audit_accepts_reconstruct_traces() {
        let f = ramp(3);
        let p = GridParams::new(3, 2).unwrap();
        let rec = reconstruct(&f, &f, p).unwrap();
        assert_eq!(audit_trace(&rec.trace, &f, &f, p).unwrap(), AuditOutcome::Pass);
        assert!(rec.summary.is_consistent());
    }

    #[test]
    fn audit_flags_corrupted_record() {
        let f = ramp(3);
        let p = GridParams::new(3, 2).unwrap();
        let mut trace = reconstruct(&f, &f, p).unwrap().trace;
        let victim = trace.records.len() / 2;
        trace.records[victim].l1_decrease += d(1, 10);
        match audit_trace(&trace, &f, &f, p).unwrap() {
            AuditOutcome::Violation(v) => {
                assert_eq!(v.record, victim);
                assert_eq!(v.invariant, Invariant::ClaimedL1);
            }
            AuditOutcome::Pass => panic!("corruption not detected"),
        }
    }

    #[test]
    fn audit_of_empty_trace_passes() {
        let one = StepFunction::constant(Dyadic::ONE).unwrap();
        let p = GridParams::new(2, 0).unwrap();
        assert!(audit_trace(&Trace::default(), &one, &one, p).unwrap().is_pass());
    }

    #[test]
    fn audit_rejects_out_of_range_moves() {
        let one = StepFunction::constant(Dyadic::ONE).unwrap();
        let p = GridParams::new(2, 0).unwrap();
        let trace: Trace = "swap n=3 i=1 j=1 k=2 dl1=0 symdiff=0".parse().unwrap();
        assert!(matches!(audit_trace(&trace, &one, &one, p), Err(ReportError::MalformedTrace { .. })));
    }

    #[test]
    fn summary_renders() {
        let f = ramp(2);
        let rec = reconstruct(&f, &f, GridParams::new(2, 2).unwrap()).unwrap();
        let text = rec.summary.to_string();
        assert!(text.contains("final residual"));
        let json: serde_json::Value = serde_json::from_str(&rec.summary.to_json()).unwrap();
        assert_eq!(json["feasibility"]["verdict"], "feasible");
    }
}
