//! (0,1)-matrices with prescribed row and column sums.
//!
//! Two constructors are provided. [`ryser_construct`] is the greedy column
//! fill; [`swap_construct`] starts from the left-aligned matrix and moves
//! ones between columns within a row, the discrete counterpart of the
//! swappable-square moves in [`crate::plane`]. [`brute_force_realize`] is an
//! exhaustive oracle for small instances.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::feasibility::{check_gale_ryser, FeasibilityReport, Partition};

/// Upper bound on `rows * cols` accepted by the exhaustive oracle.
pub const BRUTE_FORCE_MAX_CELLS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiscreteError {
    #[error("margins are not realizable: {0}")]
    Infeasible(Box<FeasibilityReport>),
    #[error("instance has {cells} cells, exhaustive search is limited to {max}")]
    InstanceTooLarge { cells: usize, max: usize },
    #[error("swap construction stalled with column sums {current:?} (target {target:?})")]
    Stalled { current: Vec<u64>, target: Vec<u64> },
    #[error("constructed matrix misses its margins")]
    MarginMismatch,
    #[error("malformed matrix text: {0}")]
    Parse(String),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
}

impl BinaryMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        BinaryMatrix { rows, cols, bits: vec![false; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self, DiscreteError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = BinaryMatrix::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(DiscreteError::Parse(format!("row {} has {} entries, expected {cols}", r + 1, row.len())));
            }
            for (c, &b) in row.iter().enumerate() {
                match b {
                    0 => {}
                    1 => m.set(r, c, true),
                    _ => return Err(DiscreteError::Parse(format!("entry {b} is not 0 or 1"))),
                }
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.bits[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        self.bits[r * self.cols + c] = v;
    }

    pub fn row_sums(&self) -> Vec<u64> {
        (0..self.rows)
            .map(|r| (0..self.cols).filter(|&c| self.get(r, c)).count() as u64)
            .collect()
    }

    pub fn col_sums(&self) -> Vec<u64> {
        (0..self.cols)
            .map(|c| (0..self.rows).filter(|&r| self.get(r, c)).count() as u64)
            .collect()
    }

    pub fn has_margins(&self, rows: &[u64], cols: &[u64]) -> bool {
        self.row_sums() == rows && self.col_sums() == cols
    }

    /// One line per row, `0`/`1` characters, no separators.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.rows * (self.cols + 1));
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.push(if self.get(r, c) { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }
}

impl fmt::Debug for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinaryMatrix {}x{}\n{}", self.rows, self.cols, self.to_text())
    }
}

impl FromStr for BinaryMatrix {
    type Err = DiscreteError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let rows: Vec<Vec<u8>> = s
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| {
                l.chars()
                    .map(|ch| match ch {
                        '0' => Ok(0),
                        '1' => Ok(1),
                        other => Err(DiscreteError::Parse(format!("unexpected character {other:?}"))),
                    })
                    .collect()
            })
            .collect::<Result<_, _>>()?;
        BinaryMatrix::from_rows(&rows)
    }
}

fn feasibility(rows: &[u64], cols: &[u64]) -> Result<(), DiscreteError> {
    let report = check_gale_ryser(&Partition::from(rows), &Partition::from(cols));
    if !report.is_feasible() {
        return Err(DiscreteError::Infeasible(Box::new(report)));
    }
    Ok(())
}

/// Greedy construction: columns in nonincreasing target order, each placing
/// its ones in the rows with the largest remaining demand (lowest index on
/// ties). Margins are checked on the result.
pub fn ryser_construct(rows: &[u64], cols: &[u64]) -> Result<BinaryMatrix, DiscreteError> {
    feasibility(rows, cols)?;
    let mut m = BinaryMatrix::zeros(rows.len(), cols.len());
    let mut residual: Vec<u64> = rows.to_vec();
    let mut col_order: Vec<usize> = (0..cols.len()).collect();
    col_order.sort_by(|&a, &b| cols[b].cmp(&cols[a]));
    for c in col_order {
        let mut row_order: Vec<usize> = (0..rows.len()).collect();
        row_order.sort_by(|&a, &b| residual[b].cmp(&residual[a]));
        for &r in row_order.iter().take(cols[c] as usize) {
            if residual[r] == 0 {
                return Err(DiscreteError::MarginMismatch);
            }
            m.set(r, c, true);
            residual[r] -= 1;
        }
    }
    if m.has_margins(rows, cols) {
        Ok(m)
    } else {
        Err(DiscreteError::MarginMismatch)
    }
}

/// Exhaustive search over every matrix whose rows have the requested sums.
/// Independent of the Gale–Ryser test; only the cell bound is enforced.
pub fn brute_force_realize(rows: &[u64], cols: &[u64]) -> Result<Option<BinaryMatrix>, DiscreteError> {
    let cells = rows.len() * cols.len();
    if cells > BRUTE_FORCE_MAX_CELLS {
        return Err(DiscreteError::InstanceTooLarge { cells, max: BRUTE_FORCE_MAX_CELLS });
    }
    let width = cols.len();
    let candidates: Vec<Vec<u32>> = rows
        .iter()
        .map(|&target| {
            (0u32..(1u32 << width)).filter(|mask| mask.count_ones() as u64 == target).collect()
        })
        .collect();
    let mut chosen = vec![0u32; rows.len()];
    let mut col_fill = vec![0u64; width];
    if search(0, &candidates, cols, &mut chosen, &mut col_fill) {
        let mut m = BinaryMatrix::zeros(rows.len(), width);
        for (r, mask) in chosen.iter().enumerate() {
            for c in 0..width {
                if mask >> c & 1 == 1 {
                    m.set(r, c, true);
                }
            }
        }
        Ok(Some(m))
    } else {
        Ok(None)
    }
}

fn search(row: usize, candidates: &[Vec<u32>], cols: &[u64], chosen: &mut [u32], col_fill: &mut [u64]) -> bool {
    if row == candidates.len() {
        return col_fill == cols;
    }
    for &mask in &candidates[row] {
        let fits = (0..cols.len()).all(|c| mask >> c & 1 == 0 || col_fill[c] < cols[c]);
        if !fits {
            continue;
        }
        for (c, fill) in col_fill.iter_mut().enumerate() {
            *fill += (mask >> c & 1) as u64;
        }
        chosen[row] = mask;
        if search(row + 1, candidates, cols, chosen, col_fill) {
            return true;
        }
        for (c, fill) in col_fill.iter_mut().enumerate() {
            *fill -= (mask >> c & 1) as u64;
        }
    }
    false
}

/// A single executed move of [`swap_construct_traced`]: a one travels from
/// `donor` to `receiver` inside `row` (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatrixMove {
    pub row: usize,
    pub donor: usize,
    pub receiver: usize,
}

/// `Σ_{i≤m} sorted(target)_i ≤ Σ_{i≤m} sorted(current)_i` for all `m`.
fn majorizes(current: &[u64], target: &[u64]) -> bool {
    let mut a = current.to_vec();
    let mut b = target.to_vec();
    a.sort_unstable_by(|x, y| y.cmp(x));
    b.sort_unstable_by(|x, y| y.cmp(x));
    let (mut sa, mut sb) = (0u64, 0u64);
    for i in 0..a.len().max(b.len()) {
        sa += a.get(i).copied().unwrap_or(0);
        sb += b.get(i).copied().unwrap_or(0);
        if sb > sa {
            return false;
        }
    }
    true
}

/// Swap-based construction, returning the matrix and every executed move.
///
/// Columns are processed in nonincreasing target order (stable), and the
/// result is mapped back to the given order. Starts with row `r` holding
/// ones in its first `rows[r]` columns, then scans rows top-down for a move
/// from the leftmost over-full column to the leftmost under-full column such
/// that the row has a one at the donor and a zero at the receiver, and the
/// new column sums still majorize the target.
pub fn swap_construct_traced(rows: &[u64], cols: &[u64]) -> Result<(BinaryMatrix, Vec<MatrixMove>), DiscreteError> {
    feasibility(rows, cols)?;
    let width = cols.len();
    let mut order: Vec<usize> = (0..width).collect();
    order.sort_by(|&a, &b| cols[b].cmp(&cols[a]));
    let sorted: Vec<u64> = order.iter().map(|&c| cols[c]).collect();
    let mut m = BinaryMatrix::zeros(rows.len(), width);
    for (r, &len) in rows.iter().enumerate() {
        for c in 0..len as usize {
            m.set(r, c, true);
        }
    }
    let mut sums = m.col_sums();
    let mut moves = Vec::new();
    while sums != sorted {
        let cur = &sums;
        let sorted = &sorted;
        let next = (0..rows.len()).find_map(|r| {
            (0..width)
                .filter(|&d| cur[d] > sorted[d] && m.get(r, d))
                .flat_map(|d| {
                    (0..width)
                        .filter(move |&k| cur[k] < sorted[k])
                        .map(move |k| (d, k))
                })
                .find(|&(d, k)| {
                    if m.get(r, k) {
                        return false;
                    }
                    let mut after = cur.clone();
                    after[d] -= 1;
                    after[k] += 1;
                    majorizes(&after, sorted)
                })
                .map(|(d, k)| MatrixMove { row: r, donor: d, receiver: k })
        });
        let Some(mv) = next else {
            let mut current = vec![0; width];
            for (pos, &c) in order.iter().enumerate() {
                current[c] = sums[pos];
            }
            return Err(DiscreteError::Stalled { current, target: cols.to_vec() });
        };
        m.set(mv.row, mv.donor, false);
        m.set(mv.row, mv.receiver, true);
        sums[mv.donor] -= 1;
        sums[mv.receiver] += 1;
        moves.push(mv);
    }
    let mut out = BinaryMatrix::zeros(rows.len(), width);
    for r in 0..rows.len() {
        for (pos, &c) in order.iter().enumerate() {
            out.set(r, c, m.get(r, pos));
        }
    }
    let moves = moves
        .into_iter()
        .map(|mv| MatrixMove { row: mv.row, donor: order[mv.donor], receiver: order[mv.receiver] })
        .collect();
    Ok((out, moves))
}

pub fn swap_construct(rows: &[u64], cols: &[u64]) -> Result<BinaryMatrix, DiscreteError> {
    swap_construct_traced(rows, cols).map(|(m, _)| m)
}
