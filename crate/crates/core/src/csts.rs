//! Critical subtrees and the evaluation engine for projection-free pattern
//! trees.
//!
//! For a pp-solution `μ` with witness `T'`, `μ` is an answer iff no child
//! `t` of `T'` admits an extension of `μ_{≺t}`. A child test can be skipped
//! when it can only succeed if some other child's test succeeds too, which
//! is witnessed by a homomorphism between the two test pairs. The surviving pairs are the
//! critical subtrees.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::config::Config;
use crate::core_ops::ExtensionPair;
use crate::error::{Error, Result};
use crate::ext::PreparedExt;
use crate::pattern::{pp_solution_subtree, NodeId, PatternTree, Subtree};
use crate::relational::{find_homomorphism, Atom, Mapping, Structure};

/// The extension test for child `child` of `subtree`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct CriticalPair {
    pub subtree: Subtree,
    pub child: NodeId,
    /// `λ(T'_{≺t})`.
    pub context: BTreeSet<Atom>,
    /// `λ(t)`.
    pub child_label: BTreeSet<Atom>,
    /// Variables of `T'` that also occur before `t` anywhere in the tree;
    /// exactly these are fixed when testing for an extension to `t`.
    pub pinned: BTreeSet<String>,
}

impl CriticalPair {
    fn new(p: &PatternTree, sub: Subtree, t: NodeId) -> Self {
        let pinned = p
            .vars(p.before(t))
            .intersection(&p.vars(sub))
            .cloned()
            .collect();
        CriticalPair {
            subtree: sub,
            child: t,
            context: p.atoms(sub.intersection(p.before(t))),
            child_label: p.label(t).clone(),
            pinned,
        }
    }

    /// `(A, A ∪ λ(t))` where `A` is the context with the pinned variables as
    /// its domain.
    pub fn extension_pair(&self) -> ExtensionPair {
        let mut anchor = Structure::from_atoms(&self.context).expect("consistent arities");
        for v in &self.pinned {
            anchor.add_element(v.clone());
        }
        let extension =
            anchor.union(&Structure::from_atoms(&self.child_label).expect("consistent arities"));
        ExtensionPair::new(anchor, extension)
    }

    /// Whether this pair makes `other` redundant: a homomorphism from this
    /// pair into `other` fixing the pinned variables means any extension for
    /// `other` yields one for this pair. Pinned variables reaching the child
    /// of `other` must be pinned there as well.
    fn makes_redundant(&self, mine: &Structure, other: &CriticalPair, theirs: &Structure) -> bool {
        let child_vars: BTreeSet<&str> = other.child_label.iter().flat_map(Atom::vars).collect();
        if self
            .pinned
            .iter()
            .any(|v| child_vars.contains(v.as_str()) && !other.pinned.contains(v))
        {
            return false;
        }
        let identity: Mapping = self.pinned.iter().map(|v| (v.clone(), v.clone())).collect();
        find_homomorphism(mine, theirs, &identity).is_some()
    }
}

/// Order in which candidate pairs are scanned during elimination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScanOrder {
    #[default]
    Forward,
    Reverse,
}

/// `csts(T')`, scanning children in `≺` order.
pub fn critical_subtrees(p: &PatternTree, sub: Subtree) -> Vec<CriticalPair> {
    critical_subtrees_with_order(p, sub, ScanOrder::Forward)
}

pub fn critical_subtrees_with_order(
    p: &PatternTree,
    sub: Subtree,
    order: ScanOrder,
) -> Vec<CriticalPair> {
    let mut pairs: Vec<CriticalPair> = p
        .children_of(sub)
        .into_iter()
        .map(|t| CriticalPair::new(p, sub, t))
        .collect();
    if order == ScanOrder::Reverse {
        pairs.reverse();
    }
    let structures: Vec<Structure> = pairs.iter().map(|c| c.extension_pair().extension).collect();
    let mut alive = vec![true; pairs.len()];
    let mut changed = true;
    while changed {
        changed = false;
        for i in 0..pairs.len() {
            for j in 0..pairs.len() {
                if i == j || !alive[i] || !alive[j] {
                    continue;
                }
                if pairs[i].makes_redundant(&structures[i], &pairs[j], &structures[j]) {
                    alive[j] = false;
                    changed = true;
                }
            }
        }
    }
    let mut out: Vec<CriticalPair> = pairs
        .into_iter()
        .zip(alive)
        .filter(|(_, a)| *a)
        .map(|(c, _)| c)
        .collect();
    out.sort_by_key(|c| c.child);
    out
}

/// Whether every child of `sub` has its pair in `pairs` or is made redundant
/// by a pair in `pairs`.
pub fn covers_all_children(p: &PatternTree, sub: Subtree, pairs: &[CriticalPair]) -> bool {
    let kept: Vec<Structure> = pairs.iter().map(|c| c.extension_pair().extension).collect();
    p.children_of(sub).into_iter().all(|t| {
        let pair = CriticalPair::new(p, sub, t);
        let mine = pair.extension_pair().extension;
        pairs
            .iter()
            .zip(&kept)
            .any(|(c, s)| c.child == t || c.makes_redundant(s, &pair, &mine))
    })
}

/// `csts(p)`: the union over all root-containing subtrees.
pub fn csts_all(p: &PatternTree, subtree_cap: usize) -> Result<Vec<CriticalPair>> {
    let count = p.count_root_subtrees();
    if count > subtree_cap as u128 {
        return Err(Error::CapExceeded {
            count: count.min(usize::MAX as u128) as usize,
            cap: subtree_cap,
        });
    }
    Ok(p.root_subtrees()
        .into_iter()
        .flat_map(|s| critical_subtrees(p, s))
        .collect())
}

/// Decides `mu ∈ p(db)` for a projection-free tree: `mu` must be a
/// pp-solution, and no critical pair of `T_mu` may admit an extension.
pub fn eval_projection_free(
    p: &PatternTree,
    db: &Structure,
    mu: &Mapping,
    cfg: &Config,
) -> Result<bool> {
    if !p.is_projection_free() {
        return Err(Error::Invalid(
            "the csts engine needs a projection-free tree".into(),
        ));
    }
    let Some(t_mu) = pp_solution_subtree(p, db, mu) else {
        return Ok(false);
    };
    for pair in critical_subtrees(p, t_mu) {
        let prepared = PreparedExt::new_or_plain(&pair.extension_pair(), cfg);
        if prepared.decide(db, &mu.restrict(&pair.pinned)) {
            return Ok(false);
        }
    }
    Ok(true)
}
