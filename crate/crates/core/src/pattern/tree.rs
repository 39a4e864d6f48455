use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relational::{Atom, Structure, Term};

/// Node identifier: the position of the node in the depth-first,
/// left-to-right traversal. `a < b` iff `a ≺ b`.
pub type NodeId = usize;

/// Trees are limited to this many nodes so that node sets fit in a `u64`.
pub const MAX_NODES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
struct Node {
    parent: Option<NodeId>,
    children: Vec<NodeId>,
    label: BTreeSet<Atom>,
}

/// A rooted, ordered tree whose nodes carry sets of atoms, plus the set of
/// free (output) variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternTree {
    nodes: Vec<Node>,
    free_vars: BTreeSet<String>,
}

/// A set of nodes of one pattern tree. Root-containing, connected sets are
/// the subtrees of the semantics; other sets (like `T_{≺t}`) use the same
/// type.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subtree(u64);

impl Subtree {
    pub fn empty() -> Self {
        Subtree(0)
    }

    pub fn root_only() -> Self {
        Subtree(1)
    }

    pub fn from_bits(bits: u64) -> Self {
        Subtree(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, t: NodeId) -> bool {
        t < MAX_NODES && self.0 & (1 << t) != 0
    }

    pub fn with(self, t: NodeId) -> Self {
        Subtree(self.0 | (1 << t))
    }

    pub fn without(self, t: NodeId) -> Self {
        Subtree(self.0 & !(1 << t))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: Subtree) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: Subtree) -> Self {
        Subtree(self.0 | other.0)
    }

    pub fn intersection(self, other: Subtree) -> Self {
        Subtree(self.0 & other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = NodeId> {
        let mut w = self.0;
        std::iter::from_fn(move || {
            if w == 0 {
                None
            } else {
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(b)
            }
        })
    }
}

impl FromIterator<NodeId> for Subtree {
    fn from_iter<I: IntoIterator<Item = NodeId>>(iter: I) -> Self {
        iter.into_iter().fold(Subtree::empty(), Subtree::with)
    }
}

impl fmt::Display for Subtree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<String> = self.iter().map(|t| t.to_string()).collect();
        write!(f, "{{{}}}", ids.join(","))
    }
}

impl Serialize for Subtree {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for Subtree {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let ids = Vec::<NodeId>::deserialize(d)?;
        if let Some(t) = ids.iter().find(|&&t| t >= MAX_NODES) {
            return Err(serde::de::Error::custom(format!(
                "node id {t} out of range"
            )));
        }
        Ok(ids.into_iter().collect())
    }
}

impl PatternTree {
    /// Builds a tree from `(parent, atoms)` entries, where the parent is an
    /// index into `nodes`. Siblings are ordered as they appear in `nodes`.
    /// Nodes are renumbered into traversal order; the returned vector maps
    /// each input index to its new id.
    pub fn from_nodes<I, S>(
        nodes: Vec<(Option<usize>, Vec<Atom>)>,
        free_vars: I,
    ) -> Result<(Self, Vec<NodeId>)>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let n = nodes.len();
        if n == 0 {
            return Err(Error::Invalid("a pattern tree needs a root".into()));
        }
        if n > MAX_NODES {
            return Err(Error::Invalid(format!(
                "{n} nodes, at most {MAX_NODES} are supported"
            )));
        }
        let roots: Vec<usize> = (0..n).filter(|&i| nodes[i].0.is_none()).collect();
        if roots.len() != 1 {
            return Err(Error::Invalid(format!(
                "expected one root, found {}",
                roots.len()
            )));
        }
        let mut children = vec![Vec::new(); n];
        for (i, (parent, atoms)) in nodes.iter().enumerate() {
            if let Some(p) = *parent {
                if p >= n || p == i {
                    return Err(Error::Invalid(format!("node {i} has invalid parent {p}")));
                }
                children[p].push(i);
            }
            if let Some(a) = atoms
                .iter()
                .find(|a| a.args.iter().any(|t| matches!(t, Term::Const(_))))
            {
                return Err(Error::Invalid(format!(
                    "constants are not supported in query atoms: {a}"
                )));
            }
        }
        let all: Vec<&Atom> = nodes.iter().flat_map(|(_, a)| a.iter()).collect();
        Structure::from_atoms(all)?;
        let mut order = Vec::with_capacity(n);
        let mut stack = vec![roots[0]];
        while let Some(i) = stack.pop() {
            order.push(i);
            stack.extend(children[i].iter().rev());
        }
        if order.len() != n {
            return Err(Error::Invalid("the parent links contain a cycle".into()));
        }
        let mut new_id = vec![0; n];
        for (pos, &i) in order.iter().enumerate() {
            new_id[i] = pos;
        }
        let tree_nodes = order
            .iter()
            .map(|&i| Node {
                parent: nodes[i].0.map(|p| new_id[p]),
                children: children[i].iter().map(|&c| new_id[c]).collect(),
                label: nodes[i].1.iter().cloned().collect(),
            })
            .collect();
        let tree = PatternTree {
            nodes: tree_nodes,
            free_vars: free_vars.into_iter().map(Into::into).collect(),
        };
        Ok((tree, new_id))
    }

    /// Convenience constructor for trees given in traversal order.
    pub fn new<I, S>(nodes: Vec<(Option<usize>, Vec<Atom>)>, free_vars: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::from_nodes(nodes, free_vars).map(|(t, _)| t)
    }

    /// The same tree with every variable free.
    pub fn projection_free(&self) -> PatternTree {
        PatternTree {
            nodes: self.nodes.clone(),
            free_vars: self.all_vars(),
        }
    }

    pub fn with_free_vars<I, S>(&self, free_vars: I) -> PatternTree
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        PatternTree {
            nodes: self.nodes.clone(),
            free_vars: free_vars.into_iter().map(Into::into).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn node_ids(&self) -> std::ops::Range<NodeId> {
        0..self.nodes.len()
    }

    pub fn parent(&self, t: NodeId) -> Option<NodeId> {
        self.nodes[t].parent
    }

    pub fn children(&self, t: NodeId) -> &[NodeId] {
        &self.nodes[t].children
    }

    pub fn label(&self, t: NodeId) -> &BTreeSet<Atom> {
        &self.nodes[t].label
    }

    pub fn free_vars(&self) -> &BTreeSet<String> {
        &self.free_vars
    }

    pub fn node_vars(&self, t: NodeId) -> BTreeSet<String> {
        self.nodes[t]
            .label
            .iter()
            .flat_map(|a| a.vars().map(str::to_string))
            .collect()
    }

    pub fn vars(&self, nodes: Subtree) -> BTreeSet<String> {
        nodes.iter().flat_map(|t| self.node_vars(t)).collect()
    }

    pub fn free_vars_of(&self, nodes: Subtree) -> BTreeSet<String> {
        self.vars(nodes)
            .intersection(&self.free_vars)
            .cloned()
            .collect()
    }

    pub fn all_vars(&self) -> BTreeSet<String> {
        self.vars(self.full())
    }

    /// `λ(nodes)`.
    pub fn atoms(&self, nodes: Subtree) -> BTreeSet<Atom> {
        nodes
            .iter()
            .flat_map(|t| self.nodes[t].label.iter().cloned())
            .collect()
    }

    /// Canonical structure of `λ(nodes)`.
    pub fn structure(&self, nodes: Subtree) -> Structure {
        let atoms = self.atoms(nodes);
        Structure::from_atoms(&atoms).expect("arities are checked on construction")
    }

    pub fn full(&self) -> Subtree {
        self.node_ids().collect()
    }

    /// `T_{≺t}`: all nodes strictly before `t`.
    pub fn before(&self, t: NodeId) -> Subtree {
        (0..t).collect()
    }

    /// The nodes of the subtree rooted at `t`.
    pub fn descendants(&self, t: NodeId) -> Subtree {
        let mut out = Subtree::empty().with(t);
        for u in t + 1..self.len() {
            if self.nodes[u].parent.is_some_and(|p| out.contains(p)) {
                out = out.with(u);
            }
        }
        out
    }

    /// Nodes on the path from the root to the parent of `t`.
    pub fn branch(&self, t: NodeId) -> Subtree {
        let mut out = Subtree::empty();
        let mut cur = self.nodes[t].parent;
        while let Some(p) = cur {
            out = out.with(p);
            cur = self.nodes[p].parent;
        }
        out
    }

    /// `ch(T')`: nodes outside `sub` whose parent is in `sub`.
    pub fn children_of(&self, sub: Subtree) -> Vec<NodeId> {
        self.node_ids()
            .filter(|&t| !sub.contains(t) && self.nodes[t].parent.is_some_and(|p| sub.contains(p)))
            .collect()
    }

    pub fn is_root_subtree(&self, sub: Subtree) -> bool {
        sub.contains(0)
            && sub.bits() >> self.len() == 0
            && sub
                .iter()
                .all(|t| t == 0 || self.nodes[t].parent.is_some_and(|p| sub.contains(p)))
    }

    /// Number of root-containing subtrees, saturating.
    pub fn count_root_subtrees(&self) -> u128 {
        fn count(tree: &PatternTree, t: NodeId) -> u128 {
            tree.children(t).iter().fold(1u128, |acc, &c| {
                acc.saturating_mul(count(tree, c).saturating_add(1))
            })
        }
        count(self, 0)
    }

    /// All root-containing subtrees, smallest first in the order produced by
    /// deciding children left to right.
    pub fn root_subtrees(&self) -> Vec<Subtree> {
        let mut out = vec![Subtree::root_only()];
        for t in 1..self.len() {
            let p = self.nodes[t].parent.expect("non-root");
            let extended: Vec<Subtree> = out
                .iter()
                .filter(|s| s.contains(p))
                .map(|s| s.with(t))
                .collect();
            out.extend(extended);
        }
        out.sort_by_key(|s| (s.len(), s.bits()));
        out
    }

    /// The tree induced by a root-containing, connected node set, with the
    /// map from old to new ids.
    pub fn induced(&self, keep: Subtree) -> (PatternTree, BTreeMap<NodeId, NodeId>) {
        assert!(
            self.is_root_subtree(keep),
            "induced tree needs a root subtree"
        );
        let ids: Vec<NodeId> = keep.iter().collect();
        let map: BTreeMap<NodeId, NodeId> = ids
            .iter()
            .enumerate()
            .map(|(new, &old)| (old, new))
            .collect();
        let nodes = ids
            .iter()
            .map(|&old| Node {
                parent: self.nodes[old].parent.map(|p| map[&p]),
                children: self.nodes[old]
                    .children
                    .iter()
                    .filter(|c| keep.contains(**c))
                    .map(|c| map[c])
                    .collect(),
                label: self.nodes[old].label.clone(),
            })
            .collect();
        (
            PatternTree {
                nodes,
                free_vars: self.free_vars.clone(),
            },
            map,
        )
    }

    /// Some variable whose occurrences do not form a connected node set.
    pub fn well_designed_violation(&self) -> Option<String> {
        self.all_vars().into_iter().find(|v| {
            let holding: Vec<NodeId> = self
                .node_ids()
                .filter(|&t| self.node_vars(t).contains(v))
                .collect();
            let tops = holding
                .iter()
                .filter(|&&t| {
                    self.nodes[t]
                        .parent
                        .is_none_or(|p| !self.node_vars(p).contains(v))
                })
                .count();
            tops > 1
        })
    }

    pub fn is_well_designed(&self) -> bool {
        self.well_designed_violation().is_none()
    }

    /// Every relation symbol occurs in at most one atom of the tree.
    pub fn is_simple(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.nodes
            .iter()
            .flat_map(|n| n.label.iter())
            .all(|a| seen.insert(a.symbol.clone()))
    }

    pub fn is_projection_free(&self) -> bool {
        self.free_vars == self.all_vars()
    }

    /// Free variables that occur in no atom.
    pub fn dangling_free_vars(&self) -> BTreeSet<String> {
        self.free_vars
            .difference(&self.all_vars())
            .cloned()
            .collect()
    }
}

impl fmt::Display for PatternTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn node(
            tree: &PatternTree,
            t: NodeId,
            depth: usize,
            f: &mut fmt::Formatter<'_>,
        ) -> fmt::Result {
            let atoms: Vec<String> = tree.label(t).iter().map(Atom::to_string).collect();
            writeln!(
                f,
                "{:indent$}t{t}: {}",
                "",
                atoms.join(" "),
                indent = 2 * depth
            )?;
            for &c in tree.children(t) {
                node(tree, c, depth + 1, f)?;
            }
            Ok(())
        }
        let free: Vec<&str> = self.free_vars.iter().map(String::as_str).collect();
        writeln!(f, "free: {}", free.join(" "))?;
        node(self, 0, 0, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atoms(xs: &[&str]) -> Vec<Atom> {
        xs.iter().map(|a| a.parse().unwrap()).collect()
    }

    fn ticket_tree() -> PatternTree {
        PatternTree::new(
            vec![
                (None, atoms(&["ticket(t)"])),
                (
                    Some(0),
                    atoms(&["seatclass(s,c)", "empty(s)", "class(t,c)"]),
                ),
                (Some(0), atoms(&["seatclass(s,c)", "empty(s)"])),
            ],
            ["t", "s", "c"],
        )
        .unwrap()
    }

    #[test]
    fn input_order_is_renumbered_into_traversal_order() {
        let (tree, ids) = PatternTree::from_nodes(
            vec![
                (Some(2), atoms(&["b(y)"])),
                (Some(2), atoms(&["c(z)"])),
                (None, atoms(&["a(x)"])),
                (Some(0), atoms(&["d(w)"])),
            ],
            ["x"],
        )
        .unwrap();
        assert_eq!(ids, vec![1, 3, 0, 2]);
        assert_eq!(tree.children(0), &[1, 3]);
        assert_eq!(tree.children(1), &[2]);
    }

    #[test]
    fn bad_shapes_are_rejected() {
        assert!(PatternTree::new(vec![], Vec::<String>::new()).is_err());
        assert!(
            PatternTree::new(vec![(None, vec![]), (None, vec![])], Vec::<String>::new()).is_err()
        );
        assert!(PatternTree::new(
            vec![(Some(1), vec![]), (Some(0), vec![])],
            Vec::<String>::new()
        )
        .is_err());
    }

    #[test]
    fn classification_of_ticket_tree() {
        let p = ticket_tree();
        assert!(!p.is_well_designed());
        assert!(!p.is_simple());
        assert!(p.is_projection_free());
    }

    #[test]
    fn path_classification() {
        let p = PatternTree::new(
            vec![
                (None, atoms(&["r1(x,y)"])),
                (Some(0), atoms(&["r2(y,z)", "r3(z,w)"])),
            ],
            ["x", "w"],
        )
        .unwrap();
        assert!(p.is_well_designed());
        assert!(p.is_simple());
        assert!(!p.is_projection_free());
    }

    #[test]
    fn root_subtrees_of_ticket_tree() {
        let p = ticket_tree();
        assert_eq!(p.count_root_subtrees(), 4);
        let subs = p.root_subtrees();
        assert_eq!(subs.len(), 4);
        assert!(subs.iter().all(|s| p.is_root_subtree(*s)));
        assert_eq!(p.children_of(Subtree::root_only()), vec![1, 2]);
    }

    #[test]
    fn branch_and_descendants() {
        let p = PatternTree::new(
            vec![
                (None, atoms(&["a(x)"])),
                (Some(0), atoms(&["b(x,y)"])),
                (Some(1), atoms(&["c(y,z)"])),
                (Some(0), atoms(&["d(x)"])),
            ],
            ["x"],
        )
        .unwrap();
        assert_eq!(p.branch(2), Subtree::from_iter([0, 1]));
        assert_eq!(p.descendants(1), Subtree::from_iter([1, 2]));
        assert_eq!(p.before(3), Subtree::from_iter([0, 1, 2]));
    }
}
