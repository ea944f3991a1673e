//! Pinned numeric defaults shared by solvers, reports and the CLI.
//!
//! Every tolerance that influences a reported number is named here once, so
//! results stay reproducible across entry points.

/// Relative tolerance for the power-iteration norm solver.
pub const POWER_TOL: f64 = 1e-10;

/// Iteration budget for the power-iteration norm solver.
pub const POWER_MAX_ITERS: usize = 10_000;

/// Seed for the deterministic start vector of iterative solvers.
pub const POWER_SEED: u64 = 0x5EED;

/// Largest matrix dimension handled by dense eigensolvers.
pub const DENSE_CAP: usize = 4096;

/// Largest permitted level size d^n; callers can lower or raise it per
/// automaton (the CLI reads an environment override).
pub const LEVEL_CAP: u64 = 1 << 20;

/// Grid-clustering tolerance used when merging spectra across levels.
pub const MERGE_TOL: f64 = 1e-6;

/// Grid-clustering tolerance for multiplicities within one dense solve;
/// tight, so only numerically coincident eigenvalues merge.
pub const EIGEN_DEDUP_TOL: f64 = 1e-12;

/// Rank cutoff for Gram-Schmidt and nullspace computations.
pub const RANK_TOL: f64 = 1e-8;

/// Gap threshold separating eigenvalue clusters in block splitting.
pub const CLUSTER_GAP: f64 = 1e-6;

/// Tolerance of the numeric normality check before spectrum unions.
pub const NORMALITY_TOL: f64 = 1e-9;

/// Default ball radius bound for matrix-algebra closures.
pub const MAX_BALL: usize = 8;

/// Safety cap on section-closure breadth-first searches. Closures of words
/// over an automaton whose section words are single letters never lengthen,
/// so this is unreachable for such automata; it guards the general case,
/// where triviality is not decidable by closure.
pub const CLOSURE_CAP: usize = 1 << 22;
