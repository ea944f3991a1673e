//! treestar: computations with automaton groups acting on rooted trees.
//!
//! The crate models finite automata whose states act on the d-regular rooted
//! tree by wreath recursion, and provides:
//!
//! - word arithmetic: images of vertices, target-indexed sections, level
//!   permutations, decidable triviality and equality ([`Automaton`]);
//! - finite-level representations on the levels of the tree, with exact
//!   sparse matrices, operator-norm and spectrum approximation
//!   ([`LevelMatrix`], [`norm_profile`], [`spectrum_union`]);
//! - the exact boundary trace of a word and of algebra elements, boundary
//!   partitions and essential-freeness reports ([`boundary_trace`]);
//! - the matrix recursion that rewrites an element over level-n blocks, the
//!   slice-wise conditional expectation back onto its image, kernel-element
//!   candidates and certified kernel checks ([`recursion_matrix`],
//!   [`conditional_expectation`], [`verify_kernel`]);
//! - block diagnostics for the finite-level matrix algebras
//!   ([`algebra_closure`], [`block_dimensions`], [`dimension_trend`]).
//!
//! Exact data (words, rationals, Gaussian rationals) is kept exact until a
//! computation genuinely needs floating point; every iterative solver is
//! seeded and deterministic.

pub mod action;
pub mod algebra;
pub mod automaton;
pub mod defaults;
pub mod expr;
pub mod kernel;
pub mod levelrep;
pub mod norms;
pub mod perm;
pub mod recursion;
pub mod scalar;
pub mod spectra;
pub mod trace;
pub mod wedderburn;
pub mod words;

pub use action::LevelError;
pub use algebra::AlgebraElement;
pub use automaton::{
    Automaton, AutomatonError, State, TensorError, ValidationError, Violation, WordParseError,
};
pub use expr::{parse_expression, ExprError};
pub use kernel::{
    kernel_candidate_stab, kernel_search, verify_kernel, KernelCandidate, KernelCase,
    KernelConstruction, KernelError,
};
pub use levelrep::{intertwiner_check, rho_level, tensor_power_apply, LevelMatrix};
pub use norms::{
    jordan_fixture, matrix_norm, norm_profile, operator_norm_level, JordanFixture, NormEstimate,
    NormProfile,
};
pub use perm::Perm;
pub use recursion::{
    block_evaluate, conditional_expectation, recursion_matrix, ExpectError, ExpectationOutcome,
    RecursionMatrix,
};
pub use scalar::GaussianRational;
pub use spectra::{spectrum_level, spectrum_union, SpectrumError, SpectrumMethod, SpectrumReport};
pub use trace::{
    boundary_partition, boundary_trace, freeness_report, level_trace, trace_element,
    trace_recursion_residual, BoundaryPartition, FreenessReport, SectionGraph, TraceError,
};
pub use wedderburn::{
    algebra_closure, block_dimensions, dimension_trend, Block, BlockReport, MatrixAlgebraBasis,
    TrendReport, WedderburnError, VERDICT_BOUNDED, VERDICT_GROWING,
};
pub use words::{Letter, Vertex, VertexParseError, Word};
