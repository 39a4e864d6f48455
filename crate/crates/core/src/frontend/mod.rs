//! Text formats, engine dispatch and the differential fuzzer.

mod engine;
mod facts;
mod fuzz;
mod json;
mod query;

pub use engine::{check_mapping, evaluate, resolve, solve, Engine};
pub use facts::{parse_facts, parse_pair, write_facts, write_pair};
pub use fuzz::{minimize, run_fuzz, Divergence, FuzzOptions, FuzzReport};
pub use json::{mapping_from_json, tree_from_json, tree_to_json, NodeJson, TreeJson};
pub use query::{parse_query, parse_query_with_warnings, to_query_text, Warning};

/// Reads a pattern tree given either as query text or as tree JSON.
pub fn load_tree(text: &str) -> crate::Result<(crate::PatternTree, Vec<Warning>)> {
    if text.trim_start().starts_with('{') {
        Ok((tree_from_json(text)?, Vec::new()))
    } else {
        parse_query_with_warnings(text)
    }
}
