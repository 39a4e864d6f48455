use serde::{Deserialize, Serialize};

/// Limits and budgets shared by the engines.
///
/// Every limit guards a computation that is exponential in the size of the
/// query (never the data); the defaults cover the query sizes the engines are
/// intended for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Config {
    /// Largest graph handed to the exact treewidth search.
    pub treewidth_vertex_limit: usize,
    /// Largest structure for which a core is computed.
    pub core_domain_limit: usize,
    /// Decompositions up to this width are evaluated by dynamic programming,
    /// wider ones by backtracking.
    pub width_budget: usize,
    /// Largest number of inherited variables a stop set may range over.
    pub stop_width_cap: usize,
    /// Variable budget of the brute-force oracle.
    pub oracle_max_vars: usize,
    /// Constant budget of the brute-force oracle.
    pub oracle_max_consts: usize,
    /// Largest number of root-containing subtrees enumerated by the analyzer.
    pub subtree_cap: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            treewidth_vertex_limit: 24,
            core_domain_limit: 16,
            width_budget: 3,
            stop_width_cap: 6,
            oracle_max_vars: 10,
            oracle_max_consts: 8,
            subtree_cap: 4096,
        }
    }
}
