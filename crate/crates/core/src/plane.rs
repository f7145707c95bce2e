//! Dyadic-resolution subsets of the unit square and the swappable-square
//! construction.
//!
//! A [`DyadicSet`] at depth `N` with sub-resolution `K` splits `[0,1]²` into
//! `2^N × 2^N` cells. Every set reachable from a hypograph by horizontal
//! block swaps holds, in each cell, a left-aligned rectangle spanning the
//! full cell height, so one integer fill width in `[0, 2^K]` per cell
//! describes it exactly.
//!
//! Cell `(row, col)` (0-based) covers `[col·2^-N, (col+1)·2^-N) ×
//! [row·2^-N, (row+1)·2^-N)`. Row 0 is the bottom band. Swap moves use the
//! 1-based generation indices `i` (row band), `j` and `k` (column blocks).

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::discrete::{ryser_construct, DiscreteError};
use crate::feasibility::{check_hlp, FeasibilityReport};
use crate::num::Dyadic;
use crate::report::{GenerationRecord, SwapRecord, Trace, TraceSummary};
use crate::stepfn::{first_prefix_violation, Profile, StepFunction};

/// Bound on `N + K`.
pub const MAX_FINE_EXPONENT: u32 = 30;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlaneError {
    #[error("invalid grid parameters N={depth}, K={sub}: need N >= 1 and N + K <= {MAX_FINE_EXPONENT}")]
    InvalidParams { depth: u32, sub: u32 },
    #[error("quantization error: {0}")]
    Quantization(String),
    #[error("move {0} is out of range for this grid")]
    IndexOutOfRange(SwapMove),
    #[error("fill {fill} at cell ({row}, {col}) exceeds the cell capacity {capacity}")]
    FillOutOfRange { row: usize, col: usize, fill: u32, capacity: u32 },
    #[error("expected {expected} fill entries, got {got}")]
    FillCount { expected: usize, got: usize },
    #[error("marginal pair is not realizable: {0}")]
    InfeasibleInput(Box<FeasibilityReport>),
    #[error("exact discrete realization failed: {0}")]
    Discrete(#[from] DiscreteError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct GridParams {
    depth: u32,
    sub: u32,
}

impl GridParams {
    pub fn new(depth: u32, sub: u32) -> Result<Self, PlaneError> {
        if depth == 0 || depth.checked_add(sub).is_none_or(|s| s > MAX_FINE_EXPONENT) {
            return Err(PlaneError::InvalidParams { depth, sub });
        }
        Ok(GridParams { depth, sub })
    }

    /// `N`: finest cells have side `2^-N`.
    pub fn depth(self) -> u32 {
        self.depth
    }

    /// `K`: fill widths are multiples of `2^-(N+K)`.
    pub fn sub(self) -> u32 {
        self.sub
    }

    pub fn side(self) -> usize {
        1 << self.depth
    }

    /// Fill width of a full cell.
    pub fn capacity(self) -> u32 {
        1 << self.sub
    }

    pub fn fine_exponent(self) -> u32 {
        self.depth + self.sub
    }

    /// Area of one fill unit: `2^-N · 2^-(N+K)`.
    pub fn unit_area(self) -> Dyadic {
        Dyadic::unit(2 * self.depth + self.sub)
    }
}

/// The horizontal swap σⁿᵢⱼₖ: exchange the contents of the generation-`n`
/// squares in row band `i`, column blocks `j` and `k` (all 1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct SwapMove {
    pub generation: u32,
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

impl fmt::Display for SwapMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(n={}, i={}, j={}, k={})", self.generation, self.i, self.j, self.k)
    }
}

impl SwapMove {
    pub fn new(generation: u32, i: usize, j: usize, k: usize) -> Self {
        SwapMove { generation, i, j, k }
    }

    pub fn is_valid_for(&self, params: GridParams) -> bool {
        let n = self.generation;
        if n == 0 || n > params.depth() {
            return false;
        }
        let blocks = 1usize << n;
        let in_range = |x: usize| (1..=blocks).contains(&x);
        in_range(self.i) && in_range(self.j) && in_range(self.k) && self.j != self.k
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DyadicSet {
    params: GridParams,
    fill: Vec<u32>,
}

impl fmt::Debug for DyadicSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DyadicSet N={} K={}", self.params.depth, self.params.sub)?;
        let side = self.params.side();
        for row in (0..side).rev() {
            let cells: Vec<String> = (0..side).map(|c| self.fill(row, c).to_string()).collect();
            writeln!(f, "  {}", cells.join(" "))?;
        }
        Ok(())
    }
}

impl DyadicSet {
    pub fn empty(params: GridParams) -> Self {
        DyadicSet { params, fill: vec![0; params.side() * params.side()] }
    }

    pub fn full(params: GridParams) -> Self {
        DyadicSet { params, fill: vec![params.capacity(); params.side() * params.side()] }
    }

    /// Row-major fills, bottom row first.
    pub fn from_fills(params: GridParams, fill: Vec<u32>) -> Result<Self, PlaneError> {
        let side = params.side();
        if fill.len() != side * side {
            return Err(PlaneError::FillCount { expected: side * side, got: fill.len() });
        }
        if let Some(pos) = fill.iter().position(|&w| w > params.capacity()) {
            return Err(PlaneError::FillOutOfRange {
                row: pos / side,
                col: pos % side,
                fill: fill[pos],
                capacity: params.capacity(),
            });
        }
        Ok(DyadicSet { params, fill })
    }

    pub fn params(&self) -> GridParams {
        self.params
    }

    pub fn fills(&self) -> &[u32] {
        &self.fill
    }

    pub fn fill(&self, row: usize, col: usize) -> u32 {
        self.fill[row * self.params.side() + col]
    }

    fn fill_mut(&mut self, row: usize, col: usize) -> &mut u32 {
        let side = self.params.side();
        &mut self.fill[row * side + col]
    }

    /// `|E|`, exactly.
    pub fn measure(&self) -> Dyadic {
        let units: u64 = self.fill.iter().map(|&w| w as u64).sum();
        Dyadic::new(units as i128, 0) * self.params.unit_area()
    }

    fn column_fills(&self, col: usize) -> Vec<u32> {
        (0..self.params.side()).map(|r| self.fill(r, col)).collect()
    }

    /// `(length, value)` pieces of `v_E` across one finest column, left to
    /// right, covering the whole column width.
    fn column_pieces(&self, col: usize) -> Vec<(Dyadic, Dyadic)> {
        let p = self.params;
        let mut ws = self.column_fills(col);
        ws.sort_unstable();
        let side = ws.len();
        let mut pieces = Vec::with_capacity(side + 1);
        let mut prev = 0u32;
        for (t, &w) in ws.iter().enumerate() {
            if w > prev {
                let count = (side - t) as i128;
                pieces.push((
                    Dyadic::new((w - prev) as i128, p.fine_exponent()),
                    Dyadic::new(count, p.depth),
                ));
                prev = w;
            }
        }
        if prev < p.capacity() {
            pieces.push((Dyadic::new((p.capacity() - prev) as i128, p.fine_exponent()), Dyadic::ZERO));
        }
        pieces
    }

    /// Number of rows whose slice covers the whole cell column (the minimum
    /// of `v_E · 2^N` over that column).
    fn full_count(&self, col: usize) -> usize {
        let cap = self.params.capacity();
        (0..self.params.side()).filter(|&r| self.fill(r, col) == cap).count()
    }

    /// Number of rows with a nonempty slice in the column (the maximum of
    /// `v_E · 2^N` over that column).
    fn nonempty_count(&self, col: usize) -> usize {
        (0..self.params.side()).filter(|&r| self.fill(r, col) > 0).count()
    }

    /// `v_E(x) = ∫ χ_E(x, y) dy`.
    pub fn vertical_section(&self) -> StepFunction {
        let pieces: Vec<(Dyadic, Dyadic)> =
            (0..self.params.side()).flat_map(|c| self.column_pieces(c)).collect();
        StepFunction::from_pieces(pieces).expect("column pieces tile [0, 1]")
    }

    /// `h_E(y) = ∫ χ_E(x, y) dx`.
    pub fn horizontal_section(&self) -> StepFunction {
        let side = self.params.side();
        let vals: Vec<Dyadic> = (0..side)
            .map(|r| {
                let units: u64 = (0..side).map(|c| self.fill(r, c) as u64).sum();
                Dyadic::new(units as i128, self.params.fine_exponent())
            })
            .collect();
        StepFunction::uniform(&vals).expect("row count is a power of two")
    }

    /// `v_E*` on `[0, 1]`.
    pub fn vertical_profile(&self) -> Profile {
        Profile::from_pieces((0..self.params.side()).flat_map(|c| self.column_pieces(c)))
    }

    /// `‖f − v_E‖₁` for a target given by its per-column values.
    pub(crate) fn residual_to(&self, target: &[Dyadic]) -> Dyadic {
        (0..self.params.side())
            .flat_map(|c| {
                let fc = target[c];
                self.column_pieces(c).into_iter().map(move |(len, v)| len * (fc - v).abs())
            })
            .sum()
    }

    /// `|E Δ other|`; both sets must share grid parameters.
    pub fn symmetric_difference(&self, other: &DyadicSet) -> Dyadic {
        assert_eq!(self.params, other.params, "symmetric difference across grids");
        let units: u64 = self.fill.iter().zip(&other.fill).map(|(&a, &b)| a.abs_diff(b) as u64).sum();
        Dyadic::new(units as i128, 0) * self.params.unit_area()
    }

    fn block_len(&self, generation: u32) -> usize {
        1 << (self.params.depth - generation)
    }

    /// Finest-cell rows and columns of block `(i, j)` at `generation`.
    fn block_span(&self, generation: u32, idx: usize) -> std::ops::Range<usize> {
        let b = self.block_len(generation);
        (idx - 1) * b..idx * b
    }

    /// Applies σⁿᵢⱼₖ, returning the new set.
    pub fn swap(&self, mv: SwapMove) -> Result<DyadicSet, PlaneError> {
        let mut out = self.clone();
        out.swap_in_place(mv)?;
        Ok(out)
    }

    pub fn swap_in_place(&mut self, mv: SwapMove) -> Result<(), PlaneError> {
        if !mv.is_valid_for(self.params) {
            return Err(PlaneError::IndexOutOfRange(mv));
        }
        let b = self.block_len(mv.generation);
        let j0 = (mv.j - 1) * b;
        let k0 = (mv.k - 1) * b;
        for r in self.block_span(mv.generation, mv.i) {
            for c in 0..b {
                let a = self.fill(r, j0 + c);
                let z = self.fill(r, k0 + c);
                *self.fill_mut(r, j0 + c) = z;
                *self.fill_mut(r, k0 + c) = a;
            }
        }
        Ok(())
    }

    /// The shifted content of block `(i, k)` is a proper subset of block
    /// `(i, j)`'s content.
    fn receiver_properly_inside_donor(&self, mv: SwapMove) -> bool {
        let b = self.block_len(mv.generation);
        let j0 = (mv.j - 1) * b;
        let k0 = (mv.k - 1) * b;
        let mut strict = false;
        for r in self.block_span(mv.generation, mv.i) {
            for c in 0..b {
                let donor = self.fill(r, j0 + c);
                let receiver = self.fill(r, k0 + c);
                if receiver > donor {
                    return false;
                }
                strict |= receiver < donor;
            }
        }
        strict
    }
}

/// Result of evaluating each swappability condition separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SwapConditions {
    /// `v_E ≥ f + 2^-n` on the donor column block.
    pub donor_excess: bool,
    /// `v_E ≤ f − 2^-n` on the receiver column block.
    pub receiver_deficit: bool,
    /// `∫₀ᵗ f* ≤ ∫₀ᵗ v_{E'}*` for all `t` after the swap.
    pub majorization_kept: bool,
    /// Receiver content strictly inside the donor content.
    pub proper_subset: bool,
}

impl SwapConditions {
    pub fn all(&self) -> bool {
        self.donor_excess && self.receiver_deficit && self.majorization_kept && self.proper_subset
    }
}

/// Column targets for a given grid: `f` must be constant on every finest
/// column.
#[derive(Debug, Clone)]
struct Target {
    cells: Vec<Dyadic>,
    rearranged: Profile,
}

impl Target {
    fn new(f: &StepFunction, params: GridParams) -> Result<Self, PlaneError> {
        let cells = f.cell_values(params.depth()).ok_or_else(|| {
            PlaneError::Quantization(format!(
                "target is not constant on columns of width 2^-{}",
                params.depth()
            ))
        })?;
        Ok(Target { cells, rearranged: f.rearrangement_profile() })
    }

    fn block_margin_ok(&self, set: &DyadicSet, generation: u32, block: usize, donor: bool) -> bool {
        let margin = Dyadic::unit(generation);
        let depth = set.params.depth;
        set.block_span(generation, block).all(|c| {
            if donor {
                Dyadic::new(set.full_count(c) as i128, depth) >= self.cells[c] + margin
            } else {
                Dyadic::new(set.nonempty_count(c) as i128, depth) <= self.cells[c] - margin
            }
        })
    }

    fn majorized_by(&self, set: &DyadicSet) -> bool {
        first_prefix_violation(&self.rearranged, &set.vertical_profile()).is_none()
    }

    fn conditions(&self, set: &DyadicSet, mv: SwapMove, short_circuit: bool) -> SwapConditions {
        let mut out = SwapConditions {
            donor_excess: self.block_margin_ok(set, mv.generation, mv.j, true),
            receiver_deficit: self.block_margin_ok(set, mv.generation, mv.k, false),
            proper_subset: set.receiver_properly_inside_donor(mv),
            majorization_kept: false,
        };
        if short_circuit && !(out.donor_excess && out.receiver_deficit && out.proper_subset) {
            return out;
        }
        let after = set.swap(mv).expect("move validated by caller");
        out.majorization_kept = self.majorized_by(&after);
        out
    }
}

/// The hypograph `{(x, y) : x < g(y)}`.
///
/// `g` must be constant on row bands of height `2^-N`, take values on the
/// `2^-(N+K)` grid and not exceed 1.
pub fn initial_set(g: &StepFunction, params: GridParams) -> Result<DyadicSet, PlaneError> {
    let rows = g.cell_values(params.depth()).ok_or_else(|| {
        PlaneError::Quantization(format!(
            "row marginal is not constant on bands of height 2^-{}",
            params.depth()
        ))
    })?;
    let cap = params.capacity() as i128;
    let side = params.side();
    let mut set = DyadicSet::empty(params);
    for (r, value) in rows.into_iter().enumerate() {
        let units = value.to_grid(params.fine_exponent()).ok_or_else(|| {
            PlaneError::Quantization(format!(
                "row value {value} is not a multiple of 2^-{}",
                params.fine_exponent()
            ))
        })?;
        if units > cap * side as i128 {
            return Err(PlaneError::Quantization(format!("row value {value} exceeds 1")));
        }
        let full = (units / cap) as usize;
        let partial = (units % cap) as u32;
        for c in 0..full {
            *set.fill_mut(r, c) = cap as u32;
        }
        if partial > 0 {
            *set.fill_mut(r, full) = partial;
        }
    }
    Ok(set)
}

/// Evaluates every swappability condition of `mv` for target `f`.
/// Out-of-range moves yield all-false conditions.
pub fn swap_conditions(set: &DyadicSet, f: &StepFunction, mv: SwapMove) -> Result<SwapConditions, PlaneError> {
    let target = Target::new(f, set.params)?;
    if !mv.is_valid_for(set.params) {
        return Ok(SwapConditions::default());
    }
    Ok(target.conditions(set, mv, false))
}

/// Whether the squares `(i, j)` and `(i, k)` of generation `n` are swappable
/// with respect to `f` and `set`.
///
/// Out-of-range moves (including `j == k`) are reported as not swappable.
pub fn is_swappable(set: &DyadicSet, f: &StepFunction, mv: SwapMove) -> Result<bool, PlaneError> {
    let target = Target::new(f, set.params)?;
    debug_assert!(target.majorized_by(set), "majorization hypothesis violated before the move");
    Ok(mv.is_valid_for(set.params) && target.conditions(set, mv, true).all())
}

fn optimize_with(
    set: &mut DyadicSet,
    target: &Target,
    generation: u32,
    trace: &mut Vec<SwapRecord>,
) {
    let blocks = 1usize << generation;
    loop {
        let donors: Vec<usize> =
            (1..=blocks).filter(|&j| target.block_margin_ok(set, generation, j, true)).collect();
        let receivers: Vec<usize> =
            (1..=blocks).filter(|&k| target.block_margin_ok(set, generation, k, false)).collect();
        let mut next = None;
        'scan: for i in 1..=blocks {
            for &j in &donors {
                for &k in &receivers {
                    let mv = SwapMove::new(generation, i, j, k);
                    if set.receiver_properly_inside_donor(mv)
                        && target.majorized_by(&set.swap(mv).expect("indices in range"))
                    {
                        next = Some(mv);
                        break 'scan;
                    }
                }
            }
        }
        let Some(mv) = next else { break };
        let before = set.residual_to(&target.cells);
        let previous = set.clone();
        set.swap_in_place(mv).expect("indices in range");
        let after = set.residual_to(&target.cells);
        debug_assert!(after < before);
        trace.push(SwapRecord {
            mv,
            l1_decrease: before - after,
            sym_diff: previous.symmetric_difference(set),
        });
    }
}

/// Exhaustive swapping at one generation: applies the first swappable move
/// in `(i, j, k)` lexicographic order until none remains. Returns the
/// terminal set and the executed moves.
pub fn optimize_generation(
    set: &DyadicSet,
    f: &StepFunction,
    generation: u32,
) -> Result<(DyadicSet, Vec<SwapRecord>), PlaneError> {
    if generation == 0 || generation > set.params.depth() {
        return Err(PlaneError::IndexOutOfRange(SwapMove::new(generation, 1, 1, 2)));
    }
    let target = Target::new(f, set.params)?;
    let mut out = set.clone();
    let mut trace = Vec::new();
    optimize_with(&mut out, &target, generation, &mut trace);
    Ok((out, trace))
}

/// Output of [`reconstruct`].
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub set: DyadicSet,
    pub summary: TraceSummary,
    pub trace: Trace,
}

/// Builds a set with horizontal section `g` whose vertical section
/// approaches `f`: start from the hypograph of `g`, then run exhaustive
/// swapping for generations `1..=N` in order.
pub fn reconstruct(f: &StepFunction, g: &StepFunction, params: GridParams) -> Result<Reconstruction, PlaneError> {
    let feasibility = check_hlp(f, g);
    if !feasibility.is_feasible() {
        return Err(PlaneError::InfeasibleInput(Box::new(feasibility)));
    }
    let target = Target::new(f, params)?;
    let mut set = initial_set(g, params)?;
    let initial_residual = set.residual_to(&target.cells);
    let mut generations = Vec::with_capacity(params.depth() as usize);
    let mut records = Vec::new();
    for n in 1..=params.depth() {
        let previous = set.clone();
        let before = records.len();
        optimize_with(&mut set, &target, n, &mut records);
        generations.push(GenerationRecord {
            generation: n,
            swap_count: records.len() - before,
            residual_l1: set.residual_to(&target.cells),
            sym_diff_total: previous.symmetric_difference(&set),
        });
    }
    let final_residual = set.residual_to(&target.cells);
    Ok(Reconstruction {
        set,
        summary: TraceSummary { generations, initial_residual, final_residual, feasibility },
        trace: Trace { records },
    })
}

/// Exact realization with whole cells, through the greedy matrix
/// constructor. Requires both marginals to be multiples of `2^-N` on every
/// column and row band.
pub fn realize_exact_discrete(f: &StepFunction, g: &StepFunction, params: GridParams) -> Result<DyadicSet, PlaneError> {
    let depth = params.depth();
    let counts = |h: &StepFunction, what: &str| -> Result<Vec<u64>, PlaneError> {
        let cells = h.cell_values(depth).ok_or_else(|| {
            PlaneError::Quantization(format!("{what} marginal is not constant on width 2^-{depth}"))
        })?;
        cells
            .into_iter()
            .map(|v| {
                v.to_grid(depth)
                    .and_then(|n| u64::try_from(n).ok())
                    .ok_or_else(|| PlaneError::Quantization(format!("{what} value {v} is not a multiple of 2^-{depth}")))
            })
            .collect()
    };
    let row_sums = counts(g, "row")?;
    let col_sums = counts(f, "column")?;
    let matrix = ryser_construct(&row_sums, &col_sums)?;
    let mut set = DyadicSet::empty(params);
    for r in 0..matrix.rows() {
        for c in 0..matrix.cols() {
            if matrix.get(r, c) {
                *set.fill_mut(r, c) = params.capacity();
            }
        }
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(n: i128, e: u32) -> Dyadic {
        Dyadic::new(n, e)
    }

    fn params(n: u32, k: u32) -> GridParams {
        GridParams::new(n, k).unwrap()
    }

    fn row(set: &DyadicSet, r: usize) -> Vec<u32> {
        (0..set.params().side()).map(|c| set.fill(r, c)).collect()
    }

    #[test]
    fn grid_params_bounds() {
        assert!(GridParams::new(0, 2).is_err());
        assert!(GridParams::new(20, 11).is_err());
        assert!(GridParams::new(20, 10).is_ok());
        let p = params(2, 2);
        assert_eq!((p.side(), p.capacity(), p.unit_area()), (4, 4, d(1, 6)));
    }

    #[test]
    fn hypograph_of_constant() {
        let g = StepFunction::constant(d(5, 4)).unwrap();
        let e0 = initial_set(&g, params(2, 2)).unwrap();
        for r in 0..4 {
            assert_eq!(row(&e0, r), vec![4, 1, 0, 0]);
        }
        assert_eq!(e0.measure(), d(5, 4));
        assert_eq!(e0.horizontal_section(), g);
        assert_eq!(e0.vertical_section(), g.distribution_profile().to_unit_function().unwrap());

        let zero = initial_set(&StepFunction::zero(), params(2, 2)).unwrap();
        assert_eq!(zero, DyadicSet::empty(params(2, 2)));
        let one = initial_set(&StepFunction::constant(Dyadic::ONE).unwrap(), params(2, 2)).unwrap();
        assert_eq!(one, DyadicSet::full(params(2, 2)));
    }

    #[test]
    fn hypograph_rejects_off_grid_rows() {
        let g = StepFunction::constant(d(1, 5)).unwrap();
        assert!(matches!(initial_set(&g, params(2, 2)), Err(PlaneError::Quantization(_))));
        let g = StepFunction::new(vec![Dyadic::ZERO, d(1, 3), Dyadic::ONE], vec![Dyadic::ONE, Dyadic::ZERO]).unwrap();
        assert!(matches!(initial_set(&g, params(2, 2)), Err(PlaneError::Quantization(_))));
        let g = StepFunction::constant(Dyadic::from_int(2)).unwrap();
        assert!(matches!(initial_set(&g, params(2, 2)), Err(PlaneError::Quantization(_))));
    }

    #[test]
    fn sections_of_trivial_sets() {
        let p = params(2, 1);
        let empty = DyadicSet::empty(p);
        assert_eq!(empty.vertical_section(), StepFunction::zero());
        assert_eq!(empty.horizontal_section(), StepFunction::zero());
        let one = StepFunction::constant(Dyadic::ONE).unwrap();
        let full = DyadicSet::full(p);
        assert_eq!(full.vertical_section(), one);
        assert_eq!(full.horizontal_section(), one);
    }

    #[test]
    fn swap_examples() {
        let g = StepFunction::constant(d(5, 4)).unwrap();
        let e0 = initial_set(&g, params(2, 2)).unwrap();
        let e1 = e0.swap(SwapMove::new(2, 1, 1, 4)).unwrap();
        assert_eq!(row(&e1, 0), vec![0, 1, 0, 4]);
        assert_eq!(row(&e1, 1), vec![4, 1, 0, 0]);

        // identical blocks
        assert_eq!(e0.swap(SwapMove::new(2, 2, 3, 4)).unwrap(), e0);

        let p = params(1, 0);
        let set = DyadicSet::from_fills(p, vec![1, 0, 0, 0]).unwrap();
        let swapped = set.swap(SwapMove::new(1, 1, 1, 2)).unwrap();
        assert_eq!(swapped.fills(), &[0, 1, 0, 0]);

        assert!(matches!(e0.swap(SwapMove::new(3, 1, 1, 2)), Err(PlaneError::IndexOutOfRange(_))));
        assert!(matches!(e0.swap(SwapMove::new(1, 1, 1, 1)), Err(PlaneError::IndexOutOfRange(_))));
        assert!(matches!(e0.swap(SwapMove::new(1, 0, 1, 2)), Err(PlaneError::IndexOutOfRange(_))));
    }

    #[test]
    fn coarse_swap_moves_whole_blocks() {
        let p = params(2, 1);
        let fills: Vec<u32> = (0..16).map(|x| x % 3).collect();
        let set = DyadicSet::from_fills(p, fills).unwrap();
        let out = set.swap(SwapMove::new(1, 2, 1, 2)).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                let expected = if r >= 2 { set.fill(r, (c + 2) % 4) } else { set.fill(r, c) };
                assert_eq!(out.fill(r, c), expected, "cell ({r}, {c})");
            }
        }
        assert_eq!(out.horizontal_section(), set.horizontal_section());
    }

    #[test]
    fn empty_blocks_are_never_swappable() {
        let p = params(2, 2);
        let set = DyadicSet::empty(p);
        let f = StepFunction::zero();
        assert!(!is_swappable(&set, &f, SwapMove::new(2, 1, 1, 2)).unwrap());
        assert!(!is_swappable(&set, &f, SwapMove::new(2, 1, 2, 2)).unwrap());
        assert!(!is_swappable(&set, &f, SwapMove::new(5, 1, 1, 2)).unwrap());
    }

    fn deficit_fixture() -> (DyadicSet, StepFunction) {
        let g = StepFunction::constant(d(5, 4)).unwrap();
        let e0 = initial_set(&g, params(2, 2)).unwrap();
        let f = StepFunction::uniform(&[d(3, 2), d(1, 2), Dyadic::ZERO, d(1, 2)]).unwrap();
        (e0, f)
    }

    #[test]
    fn swappable_fixture_passes_every_condition() {
        let (e0, f) = deficit_fixture();
        let mv = SwapMove::new(2, 1, 1, 4);
        let c = swap_conditions(&e0, &f, mv).unwrap();
        assert_eq!(
            c,
            SwapConditions { donor_excess: true, receiver_deficit: true, majorization_kept: true, proper_subset: true }
        );
        assert!(is_swappable(&e0, &f, mv).unwrap());

        // re-derive each condition from the section functions
        let v = e0.vertical_section();
        let after = e0.swap(mv).unwrap().vertical_section();
        let quarter = d(1, 2);
        for u in 0..16 {
            let x = d(u, 4);
            if u < 4 {
                assert!(v.eval(x) >= f.eval(x) + quarter);
            }
            if u >= 12 {
                assert!(v.eval(x) <= f.eval(x) - quarter);
            }
        }
        for s in 0..=64 {
            let t = d(s, 6);
            assert!(f.primitive_rearr(t) <= after.primitive_rearr(t), "t = {t}");
        }
    }

    #[test]
    fn donor_margin_violation_blocks_the_move() {
        let (e0, _) = deficit_fixture();
        // donor column at 1 against f = 7/8 leaves a margin of only 1/8
        let f = StepFunction::uniform(&[d(7, 3), d(1, 3), Dyadic::ZERO, d(1, 3)]).unwrap();
        let c = swap_conditions(&e0, &f, SwapMove::new(2, 1, 1, 4)).unwrap();
        assert!(!c.donor_excess);
        assert!(c.proper_subset);
        assert!(!is_swappable(&e0, &f, SwapMove::new(2, 1, 1, 4)).unwrap());
    }

    #[test]
    fn optimize_on_exact_target_does_nothing() {
        let f = StepFunction::uniform(&[Dyadic::ONE, Dyadic::ONE, Dyadic::ZERO, Dyadic::ZERO]).unwrap();
        let set = initial_set(&StepFunction::constant(d(1, 1)).unwrap(), params(2, 0)).unwrap();
        assert_eq!(set.vertical_section(), f);
        let (out, trace) = optimize_generation(&set, &f, 2).unwrap();
        assert!(trace.is_empty());
        assert_eq!(out, set);
    }

    #[test]
    fn single_imbalance_takes_one_swap() {
        let p = params(1, 0);
        let g = StepFunction::constant(d(1, 1)).unwrap();
        let f = StepFunction::constant(d(1, 1)).unwrap();
        let e0 = initial_set(&g, p).unwrap();
        assert_eq!(e0.fills(), &[1, 0, 1, 0]);
        let (out, trace) = optimize_generation(&e0, &f, 1).unwrap();
        assert_eq!(trace.len(), 1);
        assert_eq!(trace[0].mv, SwapMove::new(1, 1, 1, 2));
        assert_eq!(out.vertical_section(), f);
        assert_eq!(out.horizontal_section(), g);
    }

    #[test]
    fn constant_quarter_reaches_zero_residual() {
        let p = params(2, 0);
        let a = StepFunction::constant(d(1, 2)).unwrap();
        let rec = reconstruct(&a, &a, p).unwrap();
        assert!(rec.summary.final_residual <= rec.summary.initial_residual);
        assert_eq!(rec.summary.final_residual, Dyadic::ZERO);
        assert_eq!(rec.set.horizontal_section(), a);

        let exact = realize_exact_discrete(&a, &a, p).unwrap();
        assert_eq!(exact.vertical_section(), a);
        assert_eq!(exact.horizontal_section(), a);
    }

    #[test]
    fn full_square() {
        let one = StepFunction::constant(Dyadic::ONE).unwrap();
        let rec = reconstruct(&one, &one, params(3, 1)).unwrap();
        assert_eq!(rec.set, DyadicSet::full(params(3, 1)));
        assert_eq!(rec.summary.final_residual, Dyadic::ZERO);
        assert!(rec.trace.records.is_empty());
    }

    #[test]
    fn infeasible_input_is_rejected() {
        let two = StepFunction::constant(Dyadic::from_int(2)).unwrap();
        assert!(matches!(reconstruct(&two, &two, params(2, 0)), Err(PlaneError::InfeasibleInput(_))));
    }

    #[test]
    fn target_must_be_column_constant() {
        let p = params(2, 2);
        let g = StepFunction::constant(d(5, 4)).unwrap();
        let f = StepFunction::new(vec![Dyadic::ZERO, d(5, 4), Dyadic::ONE], vec![Dyadic::ONE, Dyadic::ZERO]).unwrap();
        let e0 = initial_set(&g, p).unwrap();
        assert!(matches!(optimize_generation(&e0, &f, 1), Err(PlaneError::Quantization(_))));
    }
}
