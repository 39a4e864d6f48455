//! Evaluation of well-designed pattern trees with projection.
//!
//! A mapping `μ` is an answer iff some subtree `T'` with `fvar(T') = dom(μ)`
//! has an extension of `μ` mapping `λ(T')` into the database that cannot be
//! extended to any child. A child is blocked iff one of its interface
//! components is, so the engine guesses one component per child and records
//! the blocking assignments of its inherited variables (the stop set) as
//! facts of a fresh relation. What remains is a single conjunctive query.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::config::Config;
use crate::core_ops::ExtensionPair;
use crate::error::{Error, Result};
use crate::ext::PreparedExt;
use crate::pattern::{NodeId, PatternTree, Subtree};
use crate::relational::{Atom, Graph, Mapping, Structure, Symbol};

/// Prefix of the relation symbols introduced for component interface atoms.
/// User vocabularies may not use it.
pub const CIA_PREFIX: &str = "__cia";

/// Nodes `t` whose subtree has a free variable outside `fvar(branch(t))`.
/// The root is included only when the predicate holds for it.
pub fn relevant_nodes(p: &PatternTree) -> Subtree {
    p.node_ids()
        .filter(|&t| {
            let below = p.free_vars_of(p.descendants(t));
            let above = p.free_vars_of(p.branch(t));
            below.difference(&above).next().is_some()
        })
        .collect()
}

/// The tree restricted to its relevant nodes and the root, with the map from
/// old to new node ids.
pub fn prune_irrelevant(p: &PatternTree) -> (PatternTree, BTreeMap<NodeId, NodeId>) {
    p.induced(relevant_nodes(p).with(p.root()))
}

/// The `s`-components of `atoms`: for each connected component `C` of the
/// Gaifman graph without `s`, all atoms with a variable in `C`. Atoms whose
/// variables all lie in `s` belong to no component.
pub fn s_components(atoms: &BTreeSet<Atom>, s: &BTreeSet<String>) -> Vec<BTreeSet<Atom>> {
    let mut g = Graph::new();
    for a in atoms {
        let outside: Vec<&str> = a.vars().filter(|v| !s.contains(*v)).collect();
        for v in &outside {
            g.add_vertex(*v);
        }
        for (i, u) in outside.iter().enumerate() {
            for v in &outside[i + 1..] {
                g.add_edge(u, v);
            }
        }
    }
    let adj = g.adjacency();
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut out = Vec::new();
    for start in g.vertices() {
        if !seen.insert(start) {
            continue;
        }
        let mut comp = BTreeSet::from([start.as_str()]);
        let mut stack = vec![start.as_str()];
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if seen.insert(u) {
                    comp.insert(u);
                    stack.push(u);
                }
            }
        }
        out.push(
            atoms
                .iter()
                .filter(|a| a.vars().any(|v| comp.contains(v)))
                .cloned()
                .collect(),
        );
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentKind {
    /// A single atom over interface variables only.
    Type1,
    /// An interface component of the node's label.
    Type2,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InterfaceComponent {
    pub node: NodeId,
    pub atoms: BTreeSet<Atom>,
    pub kind: ComponentKind,
    /// Existential interface variables of the component.
    pub inherited: BTreeSet<String>,
    /// `inherited` plus the free variables the component shares with the
    /// parent.
    pub inherited_plus: BTreeSet<String>,
}

impl InterfaceComponent {
    pub fn width(&self) -> usize {
        self.inherited.len()
    }

    pub fn vars(&self) -> BTreeSet<String> {
        self.atoms
            .iter()
            .flat_map(|a| a.vars().map(str::to_string))
            .collect()
    }

    /// `(S_V, S)` with `V` the extended inherited variables: the extension
    /// test behind the stop set.
    pub fn extension_pair(&self) -> ExtensionPair {
        ExtensionPair::new(
            Structure::with_domain(self.inherited_plus.iter().cloned()),
            Structure::from_atoms(&self.atoms).expect("labels have consistent arities"),
        )
    }
}

/// Variables shared by `t` and its parent.
pub fn interface(p: &PatternTree, t: NodeId) -> Result<BTreeSet<String>> {
    let parent = p.parent(t).ok_or(Error::RootHasNoParent)?;
    Ok(p.node_vars(t)
        .intersection(&p.node_vars(parent))
        .cloned()
        .collect())
}

pub fn interface_components(p: &PatternTree, t: NodeId) -> Result<Vec<InterfaceComponent>> {
    let iface = interface(p, t)?;
    let parent = p.parent(t).ok_or(Error::RootHasNoParent)?;
    let parent_free: BTreeSet<String> = p
        .node_vars(parent)
        .intersection(p.free_vars())
        .cloned()
        .collect();
    let label = p.label(t);
    let singles = label
        .iter()
        .filter(|a| a.vars().all(|v| iface.contains(v)))
        .map(|a| (ComponentKind::Type1, BTreeSet::from([a.clone()])));
    let blocks = s_components(label, &iface)
        .into_iter()
        .map(|c| (ComponentKind::Type2, c));
    Ok(singles
        .chain(blocks)
        .map(|(kind, atoms)| {
            let vars: BTreeSet<String> = atoms
                .iter()
                .flat_map(|a| a.vars().map(str::to_string))
                .collect();
            let inherited: BTreeSet<String> = vars
                .iter()
                .filter(|v| iface.contains(*v) && !p.free_vars().contains(*v))
                .cloned()
                .collect();
            let inherited_plus = inherited
                .iter()
                .cloned()
                .chain(vars.intersection(&parent_free).cloned())
                .collect();
            InterfaceComponent {
                node: t,
                atoms,
                kind,
                inherited,
                inherited_plus,
            }
        })
        .collect())
}

/// Assignments of the inherited variables of `comp` that cannot be extended,
/// together with `mu`, to a homomorphism from the component into `db`.
pub fn stop_set(
    comp: &InterfaceComponent,
    db: &Structure,
    mu: &Mapping,
    cfg: &Config,
) -> Result<BTreeSet<Mapping>> {
    let vars = comp.vars();
    let bound = mu.restrict(&vars);
    let anchor: BTreeSet<String> = comp.inherited.iter().chain(bound.keys()).cloned().collect();
    let pair = ExtensionPair::new(
        Structure::with_domain(anchor),
        Structure::from_atoms(&comp.atoms).expect("labels have consistent arities"),
    );
    let prepared = PreparedExt::new_or_plain(&pair, cfg);
    stop_with(&prepared, &comp.inherited, db, &bound, cfg)
}

fn stop_with(
    prepared: &PreparedExt,
    inherited: &BTreeSet<String>,
    db: &Structure,
    bound: &Mapping,
    cfg: &Config,
) -> Result<BTreeSet<Mapping>> {
    if inherited.len() > cfg.stop_width_cap {
        return Err(Error::WidthCapExceeded {
            width: inherited.len(),
            cap: cfg.stop_width_cap,
        });
    }
    let vars: Vec<&String> = inherited.iter().collect();
    let values: Vec<&String> = db.domain().iter().collect();
    let mut out = BTreeSet::new();
    if values.is_empty() && !vars.is_empty() {
        return Ok(out);
    }
    let mut digits = vec![0usize; vars.len()];
    loop {
        let nu: Mapping = vars
            .iter()
            .zip(&digits)
            .map(|(v, &i)| ((*v).clone(), values[i].clone()))
            .collect();
        let mut h = bound.clone();
        for (k, v) in nu.iter() {
            h.insert(k.clone(), v.clone());
        }
        if !prepared.decide(db, &h) {
            out.insert(nu);
        }
        let Some(pos) = digits.iter().rposition(|&d| d + 1 < values.len()) else {
            break;
        };
        digits[pos] += 1;
        for d in &mut digits[pos + 1..] {
            *d = 0;
        }
    }
    Ok(out)
}

/// The component interface atom for component `k` of child `t` of `sub`.
pub fn cia_atom(sub: Subtree, t: NodeId, k: usize, comp: &InterfaceComponent) -> Atom {
    let vars: Vec<&String> = comp.inherited.iter().collect();
    Atom::query(&cia_symbol_name(sub, t, k), &vars)
}

fn cia_symbol_name(sub: Subtree, t: NodeId, k: usize) -> String {
    format!("{CIA_PREFIX}_{:x}_{t}_{k}", sub.bits())
}

/// `(S_fvar(T'), λ(T') ∪ {cia(S_1), …, cia(S_n)})` for the given choice of
/// one component index per child.
pub fn combination_pair(
    p: &PatternTree,
    sub: Subtree,
    choice: &[(NodeId, usize, &InterfaceComponent)],
) -> ExtensionPair {
    let mut atoms = p.atoms(sub);
    atoms.extend(choice.iter().map(|(t, k, c)| cia_atom(sub, *t, *k, c)));
    ExtensionPair::new(
        Structure::with_domain(p.free_vars_of(sub)),
        Structure::from_atoms(&atoms).expect("cia symbols are fresh"),
    )
}

/// Calls `f` with every choice of one component per child, in odometer order.
pub(crate) fn for_each_combination<'a>(
    children: &[NodeId],
    comps: &'a BTreeMap<NodeId, Vec<InterfaceComponent>>,
    mut f: impl FnMut(&[(NodeId, usize, &'a InterfaceComponent)]) -> Result<bool>,
) -> Result<bool> {
    if children.iter().any(|t| comps[t].is_empty()) {
        return Ok(false);
    }
    let mut digits = vec![0usize; children.len()];
    loop {
        let choice: Vec<(NodeId, usize, &InterfaceComponent)> = children
            .iter()
            .zip(&digits)
            .map(|(t, &k)| (*t, k, &comps[t][k]))
            .collect();
        if f(&choice)? {
            return Ok(true);
        }
        let Some(pos) = digits
            .iter()
            .zip(children)
            .rposition(|(&d, t)| d + 1 < comps[t].len())
        else {
            return Ok(false);
        };
        digits[pos] += 1;
        for d in &mut digits[pos + 1..] {
            *d = 0;
        }
    }
}

/// Number of component combinations for the children of `sub`.
pub(crate) fn combination_count(
    children: &[NodeId],
    comps: &BTreeMap<NodeId, Vec<InterfaceComponent>>,
) -> u128 {
    children
        .iter()
        .fold(1u128, |acc, t| acc.saturating_mul(comps[t].len() as u128))
}

/// The query-side work of the engine, shared by all evaluations of one tree.
#[derive(Debug, Clone)]
pub struct FptEngine {
    tree: PatternTree,
    components: BTreeMap<NodeId, Vec<InterfaceComponent>>,
    stop_tests: BTreeMap<(NodeId, usize), PreparedExt>,
    cfg: Config,
}

impl FptEngine {
    pub fn new(p: &PatternTree, cfg: &Config) -> Result<Self> {
        Self::build(p, cfg, true)
    }

    /// Skips the removal of irrelevant nodes.
    pub fn without_pruning(p: &PatternTree, cfg: &Config) -> Result<Self> {
        Self::build(p, cfg, false)
    }

    fn build(p: &PatternTree, cfg: &Config, prune: bool) -> Result<Self> {
        if let Some(v) = p.well_designed_violation() {
            return Err(Error::NotWellDesigned(v));
        }
        let tree = if prune {
            prune_irrelevant(p).0
        } else {
            p.clone()
        };
        let mut components = BTreeMap::new();
        let mut stop_tests = BTreeMap::new();
        for t in tree.node_ids().skip(1) {
            let comps = interface_components(&tree, t)?;
            for (k, c) in comps.iter().enumerate() {
                stop_tests.insert((t, k), PreparedExt::new_or_plain(&c.extension_pair(), cfg));
            }
            components.insert(t, comps);
        }
        Ok(FptEngine {
            tree,
            components,
            stop_tests,
            cfg: *cfg,
        })
    }

    /// The tree actually evaluated.
    pub fn tree(&self) -> &PatternTree {
        &self.tree
    }

    pub fn components(&self, t: NodeId) -> &[InterfaceComponent] {
        self.components.get(&t).map_or(&[], Vec::as_slice)
    }

    pub fn eval(&self, db: &Structure, mu: &Mapping) -> Result<bool> {
        let p = &self.tree;
        if mu.keys().any(|k| !p.free_vars().contains(k)) {
            return Ok(false);
        }
        let dom = mu.domain();
        let mut stops: HashMap<(NodeId, usize), BTreeSet<Mapping>> = HashMap::new();
        for sub in p.root_subtrees() {
            if p.free_vars_of(sub) != dom {
                continue;
            }
            let children = p.children_of(sub);
            let found = for_each_combination(&children, &self.components, |choice| {
                let mut extended = db.clone();
                for &(t, k, comp) in choice {
                    let stop = match stops.get(&(t, k)) {
                        Some(s) => s,
                        None => {
                            let bound = mu.restrict(&comp.inherited_plus);
                            let s = stop_with(
                                &self.stop_tests[&(t, k)],
                                &comp.inherited,
                                db,
                                &bound,
                                &self.cfg,
                            )?;
                            stops.entry((t, k)).or_insert(s)
                        }
                    };
                    let symbol = Symbol::new(cia_symbol_name(sub, t, k));
                    for nu in stop {
                        let tuple = comp
                            .inherited
                            .iter()
                            .map(|v| nu.get(v).expect("total").clone())
                            .collect();
                        extended.add_tuple(symbol.clone(), tuple)?;
                    }
                }
                let pair = combination_pair(p, sub, choice);
                Ok(PreparedExt::new_or_plain(&pair, &self.cfg).decide(&extended, mu))
            })?;
            if found {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Decides `mu ∈ p(db)` for a well-designed tree.
pub fn eval_fpt(p: &PatternTree, db: &Structure, mu: &Mapping, cfg: &Config) -> Result<bool> {
    FptEngine::new(p, cfg)?.eval(db, mu)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atoms(xs: &[&str]) -> Vec<Atom> {
        xs.iter().map(|a| a.parse().unwrap()).collect()
    }

    fn set(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|x| x.to_string()).collect()
    }

    fn db(facts: &[&str]) -> Structure {
        let parsed: Vec<Atom> = facts.iter().map(|f| f.parse().unwrap()).collect();
        Structure::from_atoms(&parsed).unwrap()
    }

    fn m(pairs: &[(&str, &str)]) -> Mapping {
        pairs.iter().copied().collect()
    }

    fn path_tree(free: &[&str]) -> PatternTree {
        PatternTree::new(
            vec![
                (None, atoms(&["r1(x,y)"])),
                (Some(0), atoms(&["r2(y,z)", "r3(z,w)"])),
            ],
            free.iter().copied(),
        )
        .unwrap()
    }

    #[test]
    fn relevance() {
        assert_eq!(
            relevant_nodes(&path_tree(&["x", "w"])),
            Subtree::from_iter([0, 1])
        );
        assert_eq!(relevant_nodes(&path_tree(&["x"])), Subtree::root_only());
        assert_eq!(relevant_nodes(&path_tree(&[])), Subtree::empty());
        assert_eq!(prune_irrelevant(&path_tree(&[])).0.len(), 1);
    }

    #[test]
    fn components_of_a_label() {
        let label: BTreeSet<Atom> = atoms(&["r2(y,z)", "r3(z,w)"]).into_iter().collect();
        assert_eq!(s_components(&label, &set(&["y"])), vec![label.clone()]);
        let split: BTreeSet<Atom> = atoms(&["r2(y,z)", "r4(y,u)"]).into_iter().collect();
        assert_eq!(s_components(&split, &set(&["y"])).len(), 2);
        let disconnected: BTreeSet<Atom> = atoms(&["a(x)", "b(y)"]).into_iter().collect();
        assert_eq!(s_components(&disconnected, &BTreeSet::new()).len(), 2);
    }

    #[test]
    fn interface_components_of_path() {
        let p = path_tree(&["x", "w"]);
        let comps = interface_components(&p, 1).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].kind, ComponentKind::Type2);
        assert_eq!(comps[0].inherited, set(&["y"]));
        assert_eq!(comps[0].inherited_plus, set(&["y"]));
        assert_eq!(interface_components(&p, 0), Err(Error::RootHasNoParent));

        let q = PatternTree::new(
            vec![(None, atoms(&["a(y)"])), (Some(0), atoms(&["r5(y)"]))],
            ["y"],
        )
        .unwrap();
        let comps = interface_components(&q, 1).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].kind, ComponentKind::Type1);
        assert!(comps[0].inherited.is_empty());
        assert_eq!(comps[0].inherited_plus, set(&["y"]));
    }

    #[test]
    fn stop_sets_of_path() {
        let p = path_tree(&["x", "w"]);
        let comp = &interface_components(&p, 1).unwrap()[0];
        let cfg = Config::default();
        let mu = m(&[("x", "a")]);
        let stop = stop_set(comp, &db(&["r1(a,b)"]), &mu, &cfg).unwrap();
        assert_eq!(stop, BTreeSet::from([m(&[("y", "a")]), m(&[("y", "b")])]));
        let d2 = db(&["r1(a,b)", "r2(b,c)", "r3(c,d)"]);
        let stop = stop_set(comp, &d2, &mu, &cfg).unwrap();
        assert_eq!(stop.len(), 3);
        assert!(!stop.contains(&m(&[("y", "b")])));
        let tiny = Config {
            stop_width_cap: 0,
            ..cfg
        };
        assert!(matches!(
            stop_set(comp, &d2, &mu, &tiny),
            Err(Error::WidthCapExceeded { width: 1, cap: 0 })
        ));
    }

    #[test]
    fn path_answers() {
        let p = path_tree(&["x", "w"]);
        let cfg = Config::default();
        let d1 = db(&["r1(a,b)"]);
        let d2 = db(&["r1(a,b)", "r2(b,c)", "r3(c,d)"]);
        assert!(eval_fpt(&p, &d1, &m(&[("x", "a")]), &cfg).unwrap());
        assert!(eval_fpt(&p, &d2, &m(&[("x", "a"), ("w", "d")]), &cfg).unwrap());
        assert!(!eval_fpt(&p, &d2, &m(&[("x", "a")]), &cfg).unwrap());
        assert!(!eval_fpt(&p, &d2, &m(&[("y", "b")]), &cfg).unwrap());
    }

    #[test]
    fn rejects_trees_that_are_not_well_designed() {
        let p = PatternTree::new(
            vec![
                (None, atoms(&["a(x)"])),
                (Some(0), atoms(&["b(x,y)"])),
                (Some(0), atoms(&["c(x,y)"])),
            ],
            ["x"],
        )
        .unwrap();
        assert!(matches!(
            eval_fpt(&p, &Structure::new(), &Mapping::new(), &Config::default()),
            Err(Error::NotWellDesigned(_))
        ));
    }

    #[test]
    fn empty_child_always_extends() {
        let p = PatternTree::new(vec![(None, atoms(&["a(x)"])), (Some(0), vec![])], ["x"]).unwrap();
        let d = db(&["a(1)"]);
        let cfg = Config::default();
        let engine = FptEngine::without_pruning(&p, &cfg).unwrap();
        assert_eq!(
            engine.eval(&d, &m(&[("x", "1")])).unwrap(),
            crate::pattern::is_solution_bruteforce(&p, &d, &m(&[("x", "1")]))
        );
    }
}
