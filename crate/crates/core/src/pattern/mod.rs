//! Pattern trees and their reference semantics.

mod semantics;
mod tree;

pub use semantics::{
    all_solutions_bruteforce, check_budget, is_solution_bruteforce, pp_solution_subtree,
    restrict_before,
};
pub use tree::{NodeId, PatternTree, Subtree, MAX_NODES};
