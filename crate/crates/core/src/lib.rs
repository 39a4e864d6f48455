//! Query engines and a static tractability analyzer for pattern trees, the
//! {AND, OPTIONAL} fragment of SPARQL recast over arbitrary relational
//! vocabularies.
//!
//! The crate is organised bottom-up:
//!
//! * [`relational`]: structures, atoms, Gaifman graphs, tree decompositions
//!   and two homomorphism solvers (backtracking, and dynamic programming over
//!   a tree decomposition).
//! * [`core_ops`]: cores, extension cores and the selection-annotated
//!   projections of structures.
//! * [`ext`]: the extension problem, decided either directly or through the
//!   extension core.
//! * [`pattern`]: the pattern-tree model and the brute-force reference
//!   semantics.
//! * [`csts`]: critical subtrees and the projection-free evaluation engine.
//! * [`fpt`]: interface components, stop sets and the evaluation engine for
//!   well-designed trees with projection.
//! * [`analyzer`]: the tractability report.
//! * [`frontend`]: query/fact/JSON formats, engine dispatch and the
//!   differential fuzzer.

pub mod analyzer;
pub mod config;
pub mod core_ops;
pub mod csts;
pub mod error;
pub mod ext;
pub mod fpt;
pub mod frontend;
pub mod gen;
pub mod pattern;
pub mod relational;

pub use config::Config;
pub use error::{Error, Result};
pub use pattern::{NodeId, PatternTree, Subtree};
pub use relational::{Atom, Graph, Mapping, Structure, Symbol, Term, TreeDecomposition};
