//! Nonnegative step functions on `[0, 1]` and their rearrangement calculus.
//!
//! A [`StepFunction`] holds a value on each half-open interval
//! `[b_i, b_{i+1})`; the function is right-continuous and canonical (no two
//! adjacent intervals share a value). Decreasing rearrangements and
//! distribution functions both live on `[0, ∞)` and are carried by
//! [`Profile`].

use serde::Serialize;
use thiserror::Error;

use crate::num::Dyadic;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StepFnError {
    #[error("a step function needs at least one interval")]
    Empty,
    #[error("breakpoints must start at 0 and end at 1")]
    Domain,
    #[error("breakpoints must be strictly increasing")]
    NotIncreasing,
    #[error("{values} values given for {intervals} intervals")]
    LengthMismatch { values: usize, intervals: usize },
    #[error("negative value {0}")]
    Negative(Dyadic),
    #[error("{0} pieces is not a power of two")]
    NotPowerOfTwo(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct StepFunction {
    breaks: Vec<Dyadic>,
    values: Vec<Dyadic>,
}

impl StepFunction {
    pub fn new(breaks: Vec<Dyadic>, values: Vec<Dyadic>) -> Result<Self, StepFnError> {
        if breaks.len() < 2 {
            return Err(StepFnError::Empty);
        }
        if breaks[0] != Dyadic::ZERO || *breaks.last().unwrap() != Dyadic::ONE {
            return Err(StepFnError::Domain);
        }
        if breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(StepFnError::NotIncreasing);
        }
        if values.len() + 1 != breaks.len() {
            return Err(StepFnError::LengthMismatch {
                values: values.len(),
                intervals: breaks.len() - 1,
            });
        }
        if let Some(v) = values.iter().find(|v| v.is_negative()) {
            return Err(StepFnError::Negative(*v));
        }
        Ok(Self::merged(breaks, values))
    }

    fn merged(breaks: Vec<Dyadic>, values: Vec<Dyadic>) -> Self {
        let mut out_b = vec![breaks[0]];
        let mut out_v: Vec<Dyadic> = Vec::with_capacity(values.len());
        for (i, v) in values.into_iter().enumerate() {
            if out_v.last() == Some(&v) {
                *out_b.last_mut().unwrap() = breaks[i + 1];
            } else {
                out_v.push(v);
                out_b.push(breaks[i + 1]);
            }
        }
        StepFunction { breaks: out_b, values: out_v }
    }

    pub fn constant(value: Dyadic) -> Result<Self, StepFnError> {
        Self::new(vec![Dyadic::ZERO, Dyadic::ONE], vec![value])
    }

    pub fn zero() -> Self {
        StepFunction { breaks: vec![Dyadic::ZERO, Dyadic::ONE], values: vec![Dyadic::ZERO] }
    }

    /// Equal-width pieces; the number of values must be a power of two.
    pub fn uniform(values: &[Dyadic]) -> Result<Self, StepFnError> {
        let n = values.len();
        if n == 0 {
            return Err(StepFnError::Empty);
        }
        if !n.is_power_of_two() {
            return Err(StepFnError::NotPowerOfTwo(n));
        }
        let e = n.trailing_zeros();
        let breaks = (0..=n).map(|i| Dyadic::new(i as i128, e)).collect();
        Self::new(breaks, values.to_vec())
    }

    /// Builds a function from consecutive `(length, value)` pieces starting at 0.
    /// Zero-length pieces are dropped; the lengths must sum to 1.
    pub fn from_pieces<I>(pieces: I) -> Result<Self, StepFnError>
    where
        I: IntoIterator<Item = (Dyadic, Dyadic)>,
    {
        let mut breaks = vec![Dyadic::ZERO];
        let mut values = Vec::new();
        let mut at = Dyadic::ZERO;
        for (len, v) in pieces {
            if len.is_zero() {
                continue;
            }
            if len.is_negative() {
                return Err(StepFnError::NotIncreasing);
            }
            at += len;
            breaks.push(at);
            values.push(v);
        }
        Self::new(breaks, values)
    }

    pub fn breakpoints(&self) -> &[Dyadic] {
        &self.breaks
    }

    pub fn values(&self) -> &[Dyadic] {
        &self.values
    }

    /// `(start, end, value)` for every interval, left to right.
    pub fn pieces(&self) -> impl Iterator<Item = (Dyadic, Dyadic, Dyadic)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.breaks[i], self.breaks[i + 1], v))
    }

    /// Value at `x`; zero outside `[0, 1)`.
    pub fn eval(&self, x: Dyadic) -> Dyadic {
        if x.is_negative() || x >= Dyadic::ONE {
            return Dyadic::ZERO;
        }
        let idx = self.breaks.partition_point(|b| *b <= x) - 1;
        self.values[idx]
    }

    pub fn integral(&self) -> Dyadic {
        self.pieces().map(|(a, b, v)| (b - a) * v).sum()
    }

    /// Integral over `[lo, hi)`, with both ends clamped to `[0, 1]`.
    pub fn integral_over(&self, lo: Dyadic, hi: Dyadic) -> Dyadic {
        self.pieces()
            .map(|(a, b, v)| {
                let a = a.max(lo);
                let b = b.min(hi);
                if a < b {
                    (b - a) * v
                } else {
                    Dyadic::ZERO
                }
            })
            .sum()
    }

    pub fn max_value(&self) -> Dyadic {
        self.values.iter().copied().max().unwrap_or(Dyadic::ZERO)
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] >= w[1])
    }

    /// Measure of the strict super-level set `{x : f(x) > s}`.
    pub fn distribution(&self, s: Dyadic) -> Dyadic {
        self.pieces().filter(|&(_, _, v)| v > s).map(|(a, b, _)| b - a).sum()
    }

    /// The decreasing rearrangement restricted to `[0, 1]`.
    pub fn rearrange(&self) -> StepFunction {
        let mut pieces: Vec<(Dyadic, Dyadic)> = self.pieces().map(|(a, b, v)| (b - a, v)).collect();
        // stable: equal values keep their original order before merging
        pieces.sort_by_key(|p| std::cmp::Reverse(p.1));
        Self::from_pieces(pieces).expect("rearrangement of a valid function is valid")
    }

    /// `∫₀ᵗ f*(s) ds`; saturates at the total integral once `t ≥ 1`.
    pub fn primitive_rearr(&self, t: Dyadic) -> Dyadic {
        self.rearrangement_profile().prefix_integral(t)
    }

    /// `∫₀ᵗ λ_f(s) ds`, computed through the layer-cake identity
    /// `∫₀ᵗ λ_f = ∫₀¹ min(f(x), t) dx`.
    pub fn primitive_dist(&self, t: Dyadic) -> Dyadic {
        if !t.is_negative() {
            self.pieces().map(|(a, b, v)| (b - a) * v.min(t)).sum()
        } else {
            Dyadic::ZERO
        }
    }

    /// `f*` on `[0, ∞)`.
    pub fn rearrangement_profile(&self) -> Profile {
        Profile::from_pieces(self.pieces().map(|(a, b, v)| (b - a, v)))
    }

    /// `λ_f` on `[0, ∞)`.
    pub fn distribution_profile(&self) -> Profile {
        let mut levels: Vec<Dyadic> = self.values.iter().copied().filter(|v| !v.is_zero()).collect();
        levels.sort();
        levels.dedup();
        let mut prev = Dyadic::ZERO;
        let mut pieces = Vec::with_capacity(levels.len());
        for level in levels {
            // on [prev, level) the super-level set is {f ≥ level} = {f > prev}
            pieces.push((level - prev, self.distribution(prev)));
            prev = level;
        }
        Profile { pieces }
    }

    /// `‖self − other‖₁`.
    pub fn l1_distance(&self, other: &StepFunction) -> Dyadic {
        let mut cuts: Vec<Dyadic> = self.breaks.iter().chain(other.breaks.iter()).copied().collect();
        cuts.sort();
        cuts.dedup();
        cuts.windows(2)
            .map(|w| (w[1] - w[0]) * (self.eval(w[0]) - other.eval(w[0])).abs())
            .sum()
    }

    /// The per-cell values if the function is constant on every interval of
    /// width `2^-e`.
    pub fn cell_values(&self, e: u32) -> Option<Vec<Dyadic>> {
        if self.breaks.iter().any(|b| b.to_grid(e).is_none()) {
            return None;
        }
        let cells = 1usize << e;
        Some((0..cells).map(|c| self.eval(Dyadic::new(c as i128, e))).collect())
    }
}

/// A nonincreasing, nonnegative step function on `[0, ∞)` with bounded
/// support, stored as consecutive `(length, value)` pieces starting at 0.
/// Values are strictly decreasing and positive; the function vanishes after
/// the last piece.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Profile {
    pieces: Vec<(Dyadic, Dyadic)>,
}

/// First point where a prefix-integral domination fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrefixViolation {
    pub t: Dyadic,
    pub lhs: Dyadic,
    pub rhs: Dyadic,
}

impl Profile {
    /// Sorts arbitrary `(length, value)` pieces by decreasing value and merges
    /// equal values; zero values and zero lengths are dropped.
    pub fn from_pieces<I>(pieces: I) -> Self
    where
        I: IntoIterator<Item = (Dyadic, Dyadic)>,
    {
        let mut raw: Vec<(Dyadic, Dyadic)> = pieces
            .into_iter()
            .filter(|(len, v)| !len.is_zero() && !v.is_zero())
            .collect();
        raw.sort_by_key(|p| std::cmp::Reverse(p.1));
        let mut out: Vec<(Dyadic, Dyadic)> = Vec::with_capacity(raw.len());
        for (len, v) in raw {
            match out.last_mut() {
                Some(last) if last.1 == v => last.0 += len,
                _ => out.push((len, v)),
            }
        }
        Profile { pieces: out }
    }

    pub fn pieces(&self) -> &[(Dyadic, Dyadic)] {
        &self.pieces
    }

    pub fn support_end(&self) -> Dyadic {
        self.pieces.iter().map(|p| p.0).sum()
    }

    pub fn total(&self) -> Dyadic {
        self.pieces.iter().map(|&(l, v)| l * v).sum()
    }

    pub fn value_at(&self, t: Dyadic) -> Dyadic {
        if t.is_negative() {
            return Dyadic::ZERO;
        }
        let mut end = Dyadic::ZERO;
        for &(len, v) in &self.pieces {
            end += len;
            if t < end {
                return v;
            }
        }
        Dyadic::ZERO
    }

    pub fn prefix_integral(&self, t: Dyadic) -> Dyadic {
        let mut acc = Dyadic::ZERO;
        let mut start = Dyadic::ZERO;
        for &(len, v) in &self.pieces {
            let end = start + len;
            if t <= start {
                break;
            }
            acc += (end.min(t) - start) * v;
            start = end;
        }
        acc
    }

    /// `0` followed by the right end of every piece.
    pub fn breakpoints(&self) -> Vec<Dyadic> {
        let mut out = Vec::with_capacity(self.pieces.len() + 1);
        let mut at = Dyadic::ZERO;
        out.push(at);
        for &(len, _) in &self.pieces {
            at += len;
            out.push(at);
        }
        out
    }

    /// The profile as a function on `[0, 1]`, if its support fits there.
    pub fn to_unit_function(&self) -> Option<StepFunction> {
        let end = self.support_end();
        if end > Dyadic::ONE {
            return None;
        }
        let tail = (Dyadic::ONE - end, Dyadic::ZERO);
        StepFunction::from_pieces(self.pieces.iter().copied().chain(std::iter::once(tail))).ok()
    }

    /// Prefix integrals at an ascending list of points, in one sweep.
    fn prefix_integrals_at(&self, ts: &[Dyadic]) -> Vec<Dyadic> {
        let mut out = Vec::with_capacity(ts.len());
        let mut idx = 0;
        let mut start = Dyadic::ZERO;
        let mut acc = Dyadic::ZERO;
        for &t in ts {
            while idx < self.pieces.len() && start + self.pieces[idx].0 <= t {
                acc += self.pieces[idx].0 * self.pieces[idx].1;
                start += self.pieces[idx].0;
                idx += 1;
            }
            let partial = if idx < self.pieces.len() && t > start {
                (t - start) * self.pieces[idx].1
            } else {
                Dyadic::ZERO
            };
            out.push(acc + partial);
        }
        out
    }
}

/// First breakpoint `t` with `∫₀ᵗ lower > ∫₀ᵗ upper`, or `None` when
/// `upper` dominates everywhere.
///
/// Both prefix integrals are concave and piecewise linear, so their
/// difference is linear between consecutive breakpoints of either profile;
/// checking the union of breakpoints is exact. Past both supports the two
/// sides are constant.
pub fn first_prefix_violation(lower: &Profile, upper: &Profile) -> Option<PrefixViolation> {
    let mut ts: Vec<Dyadic> = lower.breakpoints();
    ts.extend(upper.breakpoints());
    ts.sort();
    ts.dedup();
    let lhs = lower.prefix_integrals_at(&ts);
    let rhs = upper.prefix_integrals_at(&ts);
    ts.into_iter()
        .zip(lhs.into_iter().zip(rhs))
        .find(|(_, (l, r))| l > r)
        .map(|(t, (lhs, rhs))| PrefixViolation { t, lhs, rhs })
}
