//! Relational structures, atoms, Gaifman graphs, tree decompositions and
//! homomorphism solvers.

mod cq;
mod decomp;
mod graph;
pub(crate) mod hom;
mod structure;
mod symbol;
mod treewidth;

pub use cq::evaluate_cq;
pub use decomp::hom_via_decomposition;
pub(crate) use decomp::hom_via_decomposition_unchecked;
pub use graph::{gaifman_graph, Graph};
pub use hom::{find_homomorphism, find_homomorphism_strict};
pub use structure::{singleton_marking, Mapping, Structure, Tuple};
pub(crate) use symbol::{is_ident, split_args, split_atom};
pub use symbol::{Atom, Symbol, Term};
pub use treewidth::{
    treewidth_estimate, treewidth_exact, treewidth_exact_with_limit, treewidth_upper,
    TreeDecomposition, WidthEstimate, DEFAULT_VERTEX_LIMIT,
};
