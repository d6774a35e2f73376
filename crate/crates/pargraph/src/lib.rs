//! Parallel rewriting of attributed graphs with set-valued attributes.
//!
//! The library implements simultaneous application of concurrent rule
//! matchings on directed graphs whose vertices and arrows carry finite
//! sets of values from a many-sorted algebra, together with decision
//! procedures for the properties relating parallel and sequential
//! rewriting: parallel independence, sequential independence, regularity,
//! parallel coherence and the effective deletion property.
//!
//! Modules:
//! - [`sigma`]: signatures, terms, algebras, assignments, evaluation;
//! - [`graph`]: the attributed-graph data model and its lattice algebra;
//! - [`rules`]: rules ⟨L,K,R⟩, matching enumeration, lifted matchings;
//! - [`rewrite`]: the parallel step, sequential steps, full parallel steps;
//! - [`independence`]: the property checkers and combined report;
//! - [`format`]: the text format (parser, serializer) and documents;
//! - [`eca`]: elementary cellular automata encoded as rule sets, with an
//!   independent array-based oracle;
//! - [`sampler`]: seeded random instances for empirical validation.

pub mod eca;
pub mod format;
pub mod graph;
pub mod independence;
pub mod rewrite;
pub mod rules;
pub mod sampler;
pub mod sigma;

#[cfg(test)]
pub(crate) mod testkit;

pub use graph::{AttributedGraph, Attribution, GraphMorphism, ItemId, MatchingId};
pub use independence::{property_report, PropertyReport};
pub use rewrite::{full_parallel_step, MatchSet};
pub use rules::{Matching, Rule};
pub use sigma::{Algebra, ConcreteAlgebra, Signature, Term, Value};
