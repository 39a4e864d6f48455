//! JSON encodings of pattern trees and mappings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern::PatternTree;
use crate::relational::{Atom, Mapping};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TreeJson {
    pub free_vars: Vec<String>,
    pub nodes: Vec<NodeJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeJson {
    pub id: u64,
    pub parent: Option<u64>,
    pub atoms: Vec<Atom>,
}

impl TreeJson {
    pub fn from_tree(p: &PatternTree) -> Self {
        TreeJson {
            free_vars: p.free_vars().iter().cloned().collect(),
            nodes: p
                .node_ids()
                .map(|t| NodeJson {
                    id: t as u64,
                    parent: p.parent(t).map(|q| q as u64),
                    atoms: p.label(t).iter().cloned().collect(),
                })
                .collect(),
        }
    }

    /// Node ids may be arbitrary; siblings are ordered as listed.
    pub fn to_tree(&self) -> Result<PatternTree> {
        let mut index = BTreeMap::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if index.insert(n.id, i).is_some() {
                return Err(Error::Invalid(format!("duplicate node id {}", n.id)));
            }
        }
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            let parent = match n.parent {
                None => None,
                Some(q) => Some(*index.get(&q).ok_or_else(|| {
                    Error::Invalid(format!("node {} has unknown parent {q}", n.id))
                })?),
            };
            if let Some(a) = n.atoms.iter().find(|a| a.symbol.base().starts_with("__")) {
                return Err(Error::Invalid(format!(
                    "relation names starting with `__` are reserved: {a}"
                )));
            }
            nodes.push((parent, n.atoms.clone()));
        }
        PatternTree::new(
            nodes,
            self.free_vars.iter().map(|v| v.trim_start_matches('?')),
        )
    }
}

pub fn tree_from_json(text: &str) -> Result<PatternTree> {
    let raw: TreeJson = serde_json::from_str(text).map_err(json_error)?;
    raw.to_tree()
}

pub fn tree_to_json(p: &PatternTree) -> String {
    serde_json::to_string_pretty(&TreeJson::from_tree(p)).expect("plain data")
}

/// `{"var": "const", …}`; a leading `?` on a variable is ignored.
pub fn mapping_from_json(text: &str) -> Result<Mapping> {
    let raw: BTreeMap<String, String> = serde_json::from_str(text).map_err(json_error)?;
    Ok(raw
        .into_iter()
        .map(|(k, v)| (k.trim_start_matches('?').to_string(), v))
        .collect())
}

fn json_error(e: serde_json::Error) -> Error {
    Error::parse(e.line(), e.column(), e.to_string())
}
