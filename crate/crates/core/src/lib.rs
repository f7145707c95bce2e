//! Plane sets and 0-1 matrices with prescribed cross sections.
//!
//! The crate decides whether a pair of marginals is realizable, either as
//! row and column sums of a 0-1 matrix or as the section lengths of a
//! measurable subset of the unit square, and builds a realization on a dyadic
//! grid by repeated square swaps.
//!
//! All arithmetic is exact: grid quantities are [`Dyadic`] rationals and
//! ingestion goes through arbitrary-precision rationals.

pub mod discrete;
pub mod feasibility;
pub mod ingest;
pub mod netpbm;
pub mod num;
pub mod plane;
pub mod report;
pub mod stepfn;
pub mod svg;

pub use discrete::{brute_force_realize, ryser_construct, swap_construct, BinaryMatrix, DiscreteError};
pub use feasibility::{check_gale_ryser, check_hlp, check_hlp_symmetric, FeasibilityReport, Partition, Verdict};
pub use ingest::{quantize, Interpolation, MarginalFile, QuantizationReport};
pub use num::Dyadic;
pub use plane::{initial_set, is_swappable, reconstruct, DyadicSet, GridParams, SwapMove};
pub use report::{audit_trace, AuditOutcome, Trace, TraceSummary};
pub use stepfn::{Profile, StepFunction};
