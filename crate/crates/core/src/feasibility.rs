//! Realizability tests for marginal pairs.
//!
//! The discrete test compares prefix sums of the column targets against the
//! conjugate of the row targets. The continuous test compares the prefix
//! integrals of `f*` against those of `λ_g`. Both return a
//! [`FeasibilityReport`] carrying the first failing point when they fail.

use std::fmt;

use serde::Serialize;

use crate::num::Dyadic;
use crate::stepfn::{first_prefix_violation, Profile, StepFunction};

/// A nonincreasing sequence of positive integers. Construction sorts the
/// input and strips zero parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize)]
pub struct Partition {
    parts: Vec<u64>,
}

impl Partition {
    pub fn new(mut parts: Vec<u64>) -> Self {
        parts.sort_unstable_by(|a, b| b.cmp(a));
        while parts.last() == Some(&0) {
            parts.pop();
        }
        Partition { parts }
    }

    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    pub fn total(&self) -> u64 {
        self.parts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// `p̂_i = #{l : p_l ≥ i}` for `i = 1..=p_1`.
    pub fn conjugate(&self) -> Partition {
        let largest = self.parts.first().copied().unwrap_or(0);
        let parts = (1..=largest)
            .map(|i| self.parts.iter().take_while(|&&p| p >= i).count() as u64)
            .collect();
        Partition { parts }
    }

    /// The `i`-th part (0-based), zero past the end.
    pub fn part(&self, i: usize) -> u64 {
        self.parts.get(i).copied().unwrap_or(0)
    }
}

impl From<&[u64]> for Partition {
    fn from(parts: &[u64]) -> Self {
        Partition::new(parts.to_vec())
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Feasible,
    InfeasibleNorm,
    InfeasibleMajorization,
}

impl Verdict {
    pub fn is_feasible(self) -> bool {
        self == Verdict::Feasible
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Feasible => "feasible",
            Verdict::InfeasibleNorm => "infeasible_norm",
            Verdict::InfeasibleMajorization => "infeasible_majorization",
        })
    }
}

/// Where a condition was checked: a continuous abscissa `t` or a 1-based
/// prefix length `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessPoint {
    T(Dyadic),
    M(usize),
}

impl fmt::Display for WitnessPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WitnessPoint::T(t) => write!(f, "t={t}"),
            WitnessPoint::M(m) => write!(f, "m={m}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Witness {
    pub point: WitnessPoint,
    pub lhs: Dyadic,
    pub rhs: Dyadic,
}

/// Verdict plus certificate. `witness` is set exactly when the verdict is
/// [`Verdict::InfeasibleMajorization`]; a norm failure stores the two totals
/// in `lhs_total` / `rhs_total`, which are always filled.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct FeasibilityReport {
    pub verdict: Verdict,
    pub lhs_total: Dyadic,
    pub rhs_total: Dyadic,
    pub witness: Option<Witness>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.verdict.is_feasible()
    }

    fn from_totals(lhs_total: Dyadic, rhs_total: Dyadic, witness: Option<Witness>) -> Self {
        let verdict = if lhs_total != rhs_total {
            Verdict::InfeasibleNorm
        } else if witness.is_some() {
            Verdict::InfeasibleMajorization
        } else {
            Verdict::Feasible
        };
        let witness = if verdict == Verdict::InfeasibleMajorization { witness } else { None };
        FeasibilityReport { verdict, lhs_total, rhs_total, witness }
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.verdict)?;
        match (&self.verdict, &self.witness) {
            (Verdict::InfeasibleNorm, _) => {
                write!(f, " (totals {} != {})", self.lhs_total, self.rhs_total)
            }
            (_, Some(w)) => write!(f, " (at {}: {} > {})", w.point, w.lhs, w.rhs),
            _ => Ok(()),
        }
    }
}

/// Gale–Ryser test for row sums `p` and column sums `q`: equal totals and
/// `Σ_{i≤m} q_i ≤ Σ_{i≤m} p̂_i` for every `m`.
pub fn check_gale_ryser(p: &Partition, q: &Partition) -> FeasibilityReport {
    let conj = p.conjugate();
    let span = q.len().max(conj.len());
    let mut lhs = 0u64;
    let mut rhs = 0u64;
    let mut witness = None;
    for i in 0..span {
        lhs += q.part(i);
        rhs += conj.part(i);
        if lhs > rhs {
            witness = Some(Witness {
                point: WitnessPoint::M(i + 1),
                lhs: Dyadic::from_int(lhs as i64),
                rhs: Dyadic::from_int(rhs as i64),
            });
            break;
        }
    }
    FeasibilityReport::from_totals(
        Dyadic::from_int(p.total() as i64),
        Dyadic::from_int(q.total() as i64),
        witness,
    )
}

fn check_profiles(lower: &Profile, upper: &Profile, lhs_total: Dyadic, rhs_total: Dyadic) -> FeasibilityReport {
    let witness = first_prefix_violation(lower, upper).map(|v| Witness {
        point: WitnessPoint::T(v.t),
        lhs: v.lhs,
        rhs: v.rhs,
    });
    FeasibilityReport::from_totals(lhs_total, rhs_total, witness)
}

/// Continuous test: `∫f = ∫g` and `∫₀ᵗ f* ≤ ∫₀ᵗ λ_g` for all `t > 0`.
pub fn check_hlp(f: &StepFunction, g: &StepFunction) -> FeasibilityReport {
    check_profiles(
        &f.rearrangement_profile(),
        &g.distribution_profile(),
        f.integral(),
        g.integral(),
    )
}

/// The transposed test: `∫f = ∫g` and `∫₀ʳ g* ≤ ∫₀ʳ λ_f` for all `r > 0`.
pub fn check_hlp_symmetric(f: &StepFunction, g: &StepFunction) -> FeasibilityReport {
    check_profiles(
        &g.rearrangement_profile(),
        &f.distribution_profile(),
        f.integral(),
        g.integral(),
    )
}
