//! Static tractability analysis of a pattern tree for a given width bound.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::config::Config;
use crate::core_ops::{extension_core, projection_under_set, ExtensionPair};
use crate::csts::csts_all;
use crate::error::Error;
use crate::fpt::{
    combination_count, combination_pair, for_each_combination, interface_components,
    prune_irrelevant, relevant_nodes, InterfaceComponent,
};
use crate::pattern::{NodeId, PatternTree, Subtree};
use crate::relational::{treewidth_estimate, Atom, WidthEstimate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Violated,
    /// The width is only known as an interval that contains the bound.
    Unknown,
}

impl Verdict {
    fn of(w: WidthEstimate, c: usize) -> Self {
        if w.upper <= c {
            Verdict::Holds
        } else if w.lower > c {
            Verdict::Violated
        } else {
            Verdict::Unknown
        }
    }

    fn of_all(ws: impl IntoIterator<Item = WidthEstimate>, c: usize) -> Self {
        ws.into_iter()
            .fold(Verdict::Holds, |acc, w| match (acc, Verdict::of(w, c)) {
                (Verdict::Violated, _) | (_, Verdict::Violated) => Verdict::Violated,
                (Verdict::Unknown, _) | (_, Verdict::Unknown) => Verdict::Unknown,
                _ => Verdict::Holds,
            })
    }
}

/// Treewidth of an extension core together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CoreWidth {
    pub width: WidthEstimate,
    /// False when the core was too large to compute and the width bounds the
    /// uncored structure instead.
    pub cored: bool,
}

/// Treewidth of `extcore(pair)`.
pub fn extension_core_width(pair: &ExtensionPair, cfg: &Config) -> CoreWidth {
    match extension_core(pair, cfg.core_domain_limit) {
        Ok(ec) => CoreWidth {
            width: treewidth_estimate(&ec.gaifman_graph(), cfg.treewidth_vertex_limit).0,
            cored: true,
        },
        Err(_) => {
            let whole = pair.anchor.union(&pair.extension);
            let projected = projection_under_set(&whole, pair.anchor.domain());
            let (w, _) = treewidth_estimate(&projected.gaifman_graph(), cfg.treewidth_vertex_limit);
            CoreWidth {
                width: WidthEstimate {
                    lower: 0,
                    upper: w.upper,
                },
                cored: false,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentEntry {
    pub node: NodeId,
    pub atoms: BTreeSet<Atom>,
    pub kind: crate::fpt::ComponentKind,
    pub inherited: BTreeSet<String>,
    pub inherited_plus: BTreeSet<String>,
    /// Treewidth of the extension core of the component over its extended
    /// inherited variables.
    pub extcore: CoreWidth,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionA {
    pub verdict: Verdict,
    pub max_width: WidthEstimate,
    pub components: Vec<ComponentEntry>,
    /// A component whose width exceeds the bound.
    pub witness: Option<ComponentEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionB {
    pub verdict: Verdict,
    /// The interface component width: most inherited variables of a
    /// component of a relevant node.
    pub width: usize,
    pub witness: Option<ComponentEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CombinationWitness {
    pub subtree: Subtree,
    /// `(child, index into its interface components)`.
    pub choice: Vec<(NodeId, usize)>,
    pub extcore: CoreWidth,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CombinationScan {
    pub verdict: Verdict,
    pub max_width: WidthEstimate,
    pub combinations: usize,
    /// Combinations left unchecked because of the cap.
    pub skipped: u128,
    pub witness: Option<CombinationWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionC {
    /// Over the subtrees of the tree without irrelevant nodes; node ids refer
    /// to that tree.
    #[serde(flatten)]
    pub pruned: CombinationScan,
    /// Over all subtrees of the original tree, when the result differs.
    pub unpruned: Option<CombinationScan>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CstsEntry {
    pub subtree: Subtree,
    pub child: NodeId,
    pub extcore: CoreWidth,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CstsReport {
    /// Largest extension-core treewidth over all critical pairs.
    pub max_width: Option<WidthEstimate>,
    pub verdict: Verdict,
    pub pairs: Vec<CstsEntry>,
    /// Set when there were too many subtrees to enumerate.
    pub truncated: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TractabilityReport {
    pub bound: usize,
    pub well_designed: bool,
    pub simple: bool,
    pub projection_free: bool,
    pub relevant_nodes: Subtree,
    pub condition_a: Option<ConditionA>,
    pub condition_b: Option<ConditionB>,
    pub condition_c: Option<ConditionC>,
    pub csts: Option<CstsReport>,
    pub notices: Vec<String>,
}

fn max_width(ws: impl IntoIterator<Item = WidthEstimate>) -> WidthEstimate {
    ws.into_iter()
        .fold(WidthEstimate::exact(0), |acc, w| WidthEstimate {
            lower: acc.lower.max(w.lower),
            upper: acc.upper.max(w.upper),
        })
}

fn entry(c: &InterfaceComponent, cfg: &Config) -> ComponentEntry {
    ComponentEntry {
        node: c.node,
        atoms: c.atoms.clone(),
        kind: c.kind,
        inherited: c.inherited.clone(),
        inherited_plus: c.inherited_plus.clone(),
        extcore: extension_core_width(&c.extension_pair(), cfg),
    }
}

/// Evaluates the tractability conditions for bound `c`. Conditions (a) to
/// (c) are only reported for well-designed trees, the critical-subtree
/// quantity only for projection-free ones.
pub fn check_conditions(
    p: &PatternTree,
    c: usize,
    combo_cap: usize,
    cfg: &Config,
) -> TractabilityReport {
    let well_designed = p.is_well_designed();
    let projection_free = p.is_projection_free();
    let mut notices = Vec::new();
    if !p.dangling_free_vars().is_empty() {
        notices.push(format!(
            "free variables without occurrence: {}",
            p.dangling_free_vars()
                .into_iter()
                .collect::<Vec<_>>()
                .join(", ")
        ));
    }
    let relevant = relevant_nodes(p);
    let mut report = TractabilityReport {
        bound: c,
        well_designed,
        simple: p.is_simple(),
        projection_free,
        relevant_nodes: relevant,
        condition_a: None,
        condition_b: None,
        condition_c: None,
        csts: None,
        notices,
    };
    if projection_free {
        report.csts = Some(csts_report(p, c, cfg));
    }
    if !well_designed {
        report
            .notices
            .push("not well-designed: conditions (a) to (c) do not apply".into());
        return report;
    }

    let entries: Vec<ComponentEntry> = relevant
        .iter()
        .filter(|&t| t != p.root())
        .flat_map(|t| interface_components(p, t).expect("non-root"))
        .map(|comp| entry(&comp, cfg))
        .collect();

    let a_max = max_width(entries.iter().map(|e| e.extcore.width));
    report.condition_a = Some(ConditionA {
        verdict: Verdict::of_all(entries.iter().map(|e| e.extcore.width), c),
        max_width: a_max,
        witness: entries.iter().find(|e| e.extcore.width.lower > c).cloned(),
        components: entries.clone(),
    });

    let b_width = entries.iter().map(|e| e.inherited.len()).max().unwrap_or(0);
    report.condition_b = Some(ConditionB {
        verdict: if b_width <= c {
            Verdict::Holds
        } else {
            Verdict::Violated
        },
        width: b_width,
        witness: entries.iter().find(|e| e.inherited.len() > c).cloned(),
    });

    let (pruned_tree, _) = prune_irrelevant(p);
    let pruned = combination_scan(
        &pruned_tree,
        Subtree::from_bits(u64::MAX),
        c,
        combo_cap,
        cfg,
    );
    let unpruned = combination_scan(p, relevant, c, combo_cap, cfg);
    if pruned.skipped > 0 || unpruned.skipped > 0 {
        report.notices.push(
            "condition (c): combination cap reached, some combinations were not checked".into(),
        );
    }
    let differs = unpruned.max_width != pruned.max_width || unpruned.verdict != pruned.verdict;
    report.condition_c = Some(ConditionC {
        pruned,
        unpruned: differs.then_some(unpruned),
    });
    report
}

/// Condition (c) over the root subtrees of `p`, where only children in
/// `relevant` contribute a component.
fn combination_scan(
    p: &PatternTree,
    relevant: Subtree,
    c: usize,
    cap: usize,
    cfg: &Config,
) -> CombinationScan {
    let comps: BTreeMap<NodeId, Vec<InterfaceComponent>> = p
        .node_ids()
        .skip(1)
        .map(|t| (t, interface_components(p, t).expect("non-root")))
        .collect();
    let mut widths = Vec::new();
    let mut witness: Option<CombinationWitness> = None;
    let mut checked = 0usize;
    let mut skipped = 0u128;
    for sub in p.root_subtrees() {
        let children: Vec<NodeId> = p
            .children_of(sub)
            .into_iter()
            .filter(|&t| relevant.contains(t))
            .collect();
        let total = combination_count(&children, &comps);
        if checked as u128 + total > cap as u128 {
            skipped = skipped.saturating_add(total);
            continue;
        }
        let _ = for_each_combination(&children, &comps, |choice| {
            checked += 1;
            let width = extension_core_width(&combination_pair(p, sub, choice), cfg);
            widths.push(width.width);
            let worse = witness
                .as_ref()
                .is_none_or(|w| width.width.upper > w.extcore.width.upper);
            if worse {
                witness = Some(CombinationWitness {
                    subtree: sub,
                    choice: choice.iter().map(|(t, k, _)| (*t, *k)).collect(),
                    extcore: width,
                });
            }
            Ok(false)
        });
    }
    let verdict = match Verdict::of_all(widths.iter().copied(), c) {
        Verdict::Holds if skipped > 0 => Verdict::Unknown,
        v => v,
    };
    CombinationScan {
        verdict,
        max_width: max_width(widths),
        combinations: checked,
        skipped,
        witness: witness.filter(|w| w.extcore.width.upper > c),
    }
}

fn csts_report(p: &PatternTree, c: usize, cfg: &Config) -> CstsReport {
    match csts_all(p, cfg.subtree_cap) {
        Ok(pairs) => {
            let entries: Vec<CstsEntry> = pairs
                .iter()
                .map(|pair| CstsEntry {
                    subtree: pair.subtree,
                    child: pair.child,
                    extcore: extension_core_width(&pair.extension_pair(), cfg),
                })
                .collect();
            let widths: Vec<WidthEstimate> = entries.iter().map(|e| e.extcore.width).collect();
            CstsReport {
                max_width: (!widths.is_empty()).then(|| max_width(widths.iter().copied())),
                verdict: Verdict::of_all(widths, c),
                pairs: entries,
                truncated: None,
            }
        }
        Err(e @ Error::CapExceeded { .. }) => CstsReport {
            max_width: None,
            verdict: Verdict::Unknown,
            pairs: Vec::new(),
            truncated: Some(e.to_string()),
        },
        Err(e) => unreachable!("csts_all only fails on the cap: {e}"),
    }
}
