//! Generators and brute-force oracles shared by the integration tests.
//!
//! The oracles work on explicit integer grids: a function is a vector of
//! cell heights, a set is a matrix of fill widths expanded to sub-columns.
//! None of them call the library's rearrangement or profile code.

#![allow(dead_code)]

use rand::Rng;
use xsection::{Dyadic, DyadicSet, GridParams, StepFunction};

/// A nonnegative function sampled on `2^cells_exp` equal cells with
/// heights `heights[c] · 2^-value_exp`.
#[derive(Debug, Clone)]
pub struct Grid {
    pub cells_exp: u32,
    pub value_exp: u32,
    pub heights: Vec<u64>,
}

impl Grid {
    pub fn to_fn(&self) -> StepFunction {
        let vals: Vec<Dyadic> = self.heights.iter().map(|&h| Dyadic::new(h as i128, self.value_exp)).collect();
        StepFunction::uniform(&vals).unwrap()
    }

    fn width(&self) -> Dyadic {
        Dyadic::unit(self.cells_exp)
    }

    fn level(&self, m: u64) -> Dyadic {
        Dyadic::new(m as i128, self.value_exp)
    }

    pub fn integral(&self) -> Dyadic {
        self.heights.iter().map(|&h| self.level(h) * self.width()).sum()
    }

    /// `|{f > s}|` by counting cells.
    pub fn distribution(&self, s: Dyadic) -> Dyadic {
        let n = self.heights.iter().filter(|&&h| self.level(h) > s).count();
        Dyadic::new(n as i128, self.cells_exp)
    }

    pub fn sorted_desc(&self) -> Vec<u64> {
        let mut h = self.heights.clone();
        h.sort_unstable_by(|a, b| b.cmp(a));
        h
    }

    /// `f*(t)` by indexing the sorted cells.
    pub fn rearranged_at(&self, t: Dyadic) -> Dyadic {
        let idx = floor_dyadic(t.mul_pow2(self.cells_exp as i32));
        self.sorted_desc().get(idx as usize).map_or(Dyadic::ZERO, |&h| self.level(h))
    }

    /// `∫₀ᵗ f*` by summing whole sorted cells plus a partial one.
    pub fn rearranged_primitive(&self, t: Dyadic) -> Dyadic {
        let w = self.width();
        let mut acc = Dyadic::ZERO;
        let mut at = Dyadic::ZERO;
        for h in self.sorted_desc() {
            if at >= t {
                break;
            }
            let step = if at + w <= t { w } else { t - at };
            acc += step * self.level(h);
            at += w;
        }
        acc
    }

    /// `∫₀ᵗ λ_f` by integrating the distribution level by level: `λ_f` is
    /// constant on each `[m, m + 1) · 2^-value_exp`.
    pub fn distribution_primitive(&self, t: Dyadic) -> Dyadic {
        let top = self.heights.iter().copied().max().unwrap_or(0);
        let mut acc = Dyadic::ZERO;
        for m in 0..top {
            let lo = self.level(m);
            if lo >= t {
                break;
            }
            let hi = self.level(m + 1).min(t);
            acc += (hi - lo) * self.distribution(lo);
        }
        acc
    }
}

fn floor_dyadic(x: Dyadic) -> i128 {
    x.numerator().div_euclid(1i128 << x.log2_denominator())
}

pub fn random_grid<R: Rng>(rng: &mut R, max_cells_exp: u32, max_value_exp: u32, max_value: u64) -> Grid {
    let cells_exp = rng.gen_range(0..=max_cells_exp);
    let value_exp = rng.gen_range(0..=max_value_exp);
    let top = max_value << value_exp;
    let heights = (0..1usize << cells_exp)
        .map(|_| match rng.gen_range(0..4) {
            0 => 0,
            1 => top,
            _ => rng.gen_range(0..=top),
        })
        .collect();
    Grid { cells_exp, value_exp, heights }
}

/// A random dyadic in `[0, hi]` with denominator at most `2^exp`.
pub fn random_point<R: Rng>(rng: &mut R, hi: u64, exp: u32) -> Dyadic {
    Dyadic::new(rng.gen_range(0..=(hi << exp)) as i128, exp)
}

pub fn random_params<R: Rng>(rng: &mut R, max_depth: u32, max_sub: u32) -> GridParams {
    GridParams::new(rng.gen_range(1..=max_depth), rng.gen_range(0..=max_sub)).unwrap()
}

pub fn random_set<R: Rng>(rng: &mut R, params: GridParams) -> DyadicSet {
    let side = params.side();
    let cap = params.capacity();
    let density: f64 = rng.gen();
    let fills = (0..side * side)
        .map(|_| {
            if rng.gen_bool(density) {
                if rng.gen_bool(0.5) {
                    cap
                } else {
                    rng.gen_range(0..=cap)
                }
            } else {
                0
            }
        })
        .collect();
    DyadicSet::from_fills(params, fills).unwrap()
}

/// `v_E` on each sub-column: entry `[c][s]` is the number of rows whose
/// fill in column `c` exceeds `s`.
pub fn sub_column_counts(set: &DyadicSet) -> Vec<Vec<u64>> {
    let p = set.params();
    let side = p.side();
    (0..side)
        .map(|c| (0..p.capacity()).map(|s| (0..side).filter(|&r| set.fill(r, c) > s).count() as u64).collect())
        .collect()
}

/// `v_E` on the `2^(N+K)` sub-columns.
pub fn vertical_section_oracle(set: &DyadicSet) -> StepFunction {
    let depth = set.params().depth();
    let vals: Vec<Dyadic> = sub_column_counts(set)
        .into_iter()
        .flatten()
        .map(|n| Dyadic::new(n as i128, depth))
        .collect();
    StepFunction::uniform(&vals).unwrap()
}

/// `h_E` on the `2^N` row bands.
pub fn horizontal_section_oracle(set: &DyadicSet) -> StepFunction {
    let p = set.params();
    let side = p.side();
    let vals: Vec<Dyadic> = (0..side)
        .map(|r| {
            let units: u64 = (0..side).map(|c| set.fill(r, c) as u64).sum();
            Dyadic::new(units as i128, p.fine_exponent())
        })
        .collect();
    StepFunction::uniform(&vals).unwrap()
}

/// Per-column averages of `v_E`.
pub fn column_average(set: &DyadicSet) -> StepFunction {
    let p = set.params();
    let side = p.side();
    let vals: Vec<Dyadic> = (0..side)
        .map(|c| {
            let units: u64 = (0..side).map(|r| set.fill(r, c) as u64).sum();
            // Σ_r 2^-N · w/2^K
            Dyadic::new(units as i128, p.fine_exponent())
        })
        .collect();
    StepFunction::uniform(&vals).unwrap()
}

/// `‖f − v_E‖₁` for `f` constant on each cell column, summed sub-column by
/// sub-column.
pub fn residual_oracle(set: &DyadicSet, f: &StepFunction) -> Dyadic {
    let p = set.params();
    let sub_width = Dyadic::unit(p.fine_exponent());
    sub_column_counts(set)
        .into_iter()
        .enumerate()
        .map(|(c, counts)| {
            let fc = f.eval(Dyadic::new(c as i128, p.depth()));
            counts
                .into_iter()
                .map(|n| (fc - Dyadic::new(n as i128, p.depth())).abs() * sub_width)
                .sum::<Dyadic>()
        })
        .sum()
}

/// Random nonnegative heights on `2^cells_exp` cells summing to `units`,
/// each at most `cap`.
pub fn random_composition<R: Rng>(rng: &mut R, cells_exp: u32, units: u64, cap: u64) -> Option<Vec<u64>> {
    let cells = 1usize << cells_exp;
    if units > cap * cells as u64 {
        return None;
    }
    let mut heights = vec![0u64; cells];
    let mut left = units;
    while left > 0 {
        let c = rng.gen_range(0..cells);
        if heights[c] < cap {
            heights[c] += 1;
            left -= 1;
        }
    }
    Some(heights)
}
