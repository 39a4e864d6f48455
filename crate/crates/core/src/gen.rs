//! Seeded random instances for differential testing.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::core_ops::ExtensionPair;
use crate::ext::ExtInstance;
use crate::pattern::PatternTree;
use crate::relational::{Atom, Mapping, Structure, Symbol};

/// Size knobs for random pattern trees and databases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_nodes: usize,
    pub max_atoms: usize,
    pub max_arity: usize,
    pub max_vars: usize,
    pub domain: usize,
    /// Every variable is introduced at one node and may only be reused below
    /// it through the parent chain.
    pub well_designed: bool,
    /// Every atom gets its own relation symbol.
    pub simple: bool,
    /// Symbol pool size when `simple` is off.
    pub symbols: usize,
    /// Probability that a possible fact is present.
    pub density: f64,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_nodes: 4,
            max_atoms: 3,
            max_arity: 3,
            max_vars: 6,
            domain: 5,
            well_designed: true,
            simple: false,
            symbols: 3,
            density: 0.4,
        }
    }
}

fn var_name(i: usize) -> String {
    format!("v{i}")
}

/// A random pattern tree; the free variables are a random subset of the
/// variables.
pub fn random_tree(rng: &mut impl Rng, params: &TreeParams) -> PatternTree {
    let n = rng.gen_range(1..=params.max_nodes.max(1));
    let arities: Vec<usize> = (0..params.symbols.max(1))
        .map(|_| rng.gen_range(1..=params.max_arity.max(1)))
        .collect();
    let mut parents: Vec<Option<usize>> = vec![None];
    for i in 1..n {
        parents.push(Some(rng.gen_range(0..i)));
    }
    let mut node_vars: Vec<Vec<String>> = Vec::with_capacity(n);
    let mut next_var = 0usize;
    let mut next_symbol = 0usize;
    let mut nodes = Vec::with_capacity(n);
    for (i, parent) in parents.iter().enumerate() {
        let count = rng.gen_range(if i == 0 { 1 } else { 0 }..=params.max_atoms.max(1));
        let mut usable: Vec<String> = if params.well_designed {
            parent.map(|p| node_vars[p].clone()).unwrap_or_default()
        } else {
            (0..next_var).map(var_name).collect()
        };
        let mut atoms = Vec::with_capacity(count);
        for _ in 0..count {
            let (name, arity) = if params.simple {
                next_symbol += 1;
                (
                    format!("s{next_symbol}"),
                    rng.gen_range(1..=params.max_arity.max(1)),
                )
            } else {
                let k = rng.gen_range(0..arities.len());
                (format!("r{k}"), arities[k])
            };
            if usable.is_empty() && next_var >= params.max_vars {
                continue;
            }
            let args: Vec<String> = (0..arity)
                .map(|_| {
                    if next_var < params.max_vars && (usable.is_empty() || rng.gen_bool(0.4)) {
                        let v = var_name(next_var);
                        next_var += 1;
                        usable.push(v.clone());
                        v
                    } else {
                        usable.choose(rng).expect("non-empty").clone()
                    }
                })
                .collect();
            atoms.push(Atom::query(&name, &args));
        }
        let mut vars: Vec<String> = atoms
            .iter()
            .flat_map(|a| a.vars().map(str::to_string))
            .collect();
        vars.sort();
        vars.dedup();
        node_vars.push(vars);
        nodes.push((*parent, atoms));
    }
    let all: BTreeSet<String> = node_vars.iter().flatten().cloned().collect();
    let free: Vec<String> = all.into_iter().filter(|_| rng.gen_bool(0.5)).collect();
    PatternTree::new(nodes, free).expect("generated trees are valid")
}

/// A random database over the vocabulary of `atoms` with constants
/// `c0..c{domain-1}`.
pub fn random_database<'a>(
    rng: &mut impl Rng,
    atoms: impl IntoIterator<Item = &'a Atom>,
    domain: usize,
    density: f64,
) -> Structure {
    let consts: Vec<String> = (0..domain).map(|i| format!("c{i}")).collect();
    let mut vocab: BTreeSet<(Symbol, usize)> = BTreeSet::new();
    for a in atoms {
        vocab.insert((a.symbol.clone(), a.args.len()));
    }
    let mut db = Structure::with_domain(consts.iter().cloned());
    for (symbol, arity) in vocab {
        let total = consts.len().pow(arity as u32);
        for code in 0..total {
            if !rng.gen_bool(density) {
                continue;
            }
            let mut rest = code;
            let tuple = (0..arity)
                .map(|_| {
                    let c = consts[rest % consts.len()].clone();
                    rest /= consts.len();
                    c
                })
                .collect();
            db.add_tuple(symbol.clone(), tuple)
                .expect("one arity per symbol");
        }
    }
    db
}

/// A random partial mapping of `vars` into the domain of `db`.
pub fn random_mapping(rng: &mut impl Rng, vars: &BTreeSet<String>, db: &Structure) -> Mapping {
    let values: Vec<&String> = db.domain().iter().collect();
    if values.is_empty() {
        return Mapping::new();
    }
    let mut out = Mapping::new();
    for v in vars {
        if rng.gen_bool(0.7) {
            out.insert(v.clone(), (*values.choose(rng).expect("non-empty")).clone());
        }
    }
    out
}

/// A random structure over unary and binary symbols `e0, e1, …`.
pub fn random_structure(
    rng: &mut impl Rng,
    elements: usize,
    symbols: usize,
    density: f64,
) -> Structure {
    let names: Vec<String> = (0..elements).map(|i| format!("a{i}")).collect();
    let mut s = Structure::with_domain(names.iter().cloned());
    for k in 0..symbols {
        let arity = if k % 3 == 2 { 1 } else { 2 };
        let symbol = Symbol::new(format!("e{k}"));
        for i in 0..elements {
            if arity == 1 {
                if rng.gen_bool(density) {
                    s.add_tuple(symbol.clone(), vec![names[i].clone()])
                        .expect("unary");
                }
                continue;
            }
            for j in 0..elements {
                if rng.gen_bool(density / 2.0) {
                    s.add_tuple(symbol.clone(), vec![names[i].clone(), names[j].clone()])
                        .expect("binary");
                }
            }
        }
    }
    s
}

/// A random EXT instance: query-side pair over `vars` variables, a target
/// with `consts` constants that is made to contain the image of the anchor.
pub fn random_ext_instance(rng: &mut impl Rng, vars: usize, consts: usize) -> ExtInstance {
    let names: Vec<String> = (0..vars.max(1)).map(var_name).collect();
    let symbols = [("p", 1), ("q", 2), ("s", 2)];
    let random_atoms = |rng: &mut dyn rand::RngCore, pool: &[String], count: usize| -> Vec<Atom> {
        (0..count)
            .map(|_| {
                let (name, arity) = symbols[rng.gen_range(0..symbols.len())];
                let args: Vec<&String> = (0..arity)
                    .map(|_| &pool[rng.gen_range(0..pool.len())])
                    .collect();
                Atom::query(name, &args)
            })
            .collect()
    };
    let split = rng.gen_range(0..=names.len());
    let anchor_pool = &names[..split.max(1)];
    let anchor_atoms = if split == 0 {
        Vec::new()
    } else {
        let count = rng.gen_range(0..=2);
        random_atoms(rng, anchor_pool, count)
    };
    let mut anchor = Structure::from_atoms(&anchor_atoms).expect("fixed arities");
    if split > 0 {
        for v in anchor_pool {
            if rng.gen_bool(0.5) {
                anchor.add_element(v.clone());
            }
        }
    }
    let count = rng.gen_range(1..=4);
    let extension =
        Structure::from_atoms(&random_atoms(rng, &names, count)).expect("fixed arities");

    let all_atoms: Vec<Atom> = anchor_atoms
        .iter()
        .cloned()
        .chain(extension.atoms())
        .collect();
    let mut target = random_database(rng, &all_atoms, consts.max(1), 0.35);
    let values: Vec<String> = target.domain().iter().cloned().collect();
    let h: Mapping = anchor
        .domain()
        .iter()
        .map(|v| (v.clone(), values.choose(rng).expect("non-empty").clone()))
        .collect();
    for a in &anchor_atoms {
        let image = a.vars().map(|v| h.get(v).expect("total").clone()).collect();
        target
            .add_tuple(a.symbol.clone(), image)
            .expect("fixed arities");
    }
    ExtInstance::new(ExtensionPair::new(anchor, extension), target, h)
        .expect("anchor image was added")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_trees_respect_the_knobs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for simple in [false, true] {
            let params = TreeParams {
                simple,
                ..TreeParams::default()
            };
            for _ in 0..200 {
                let p = random_tree(&mut rng, &params);
                assert!(p.len() <= 4);
                assert!(p.all_vars().len() <= 6);
                assert!(p.is_well_designed(), "{p}");
                if simple {
                    assert!(p.is_simple());
                }
            }
        }
    }

    #[test]
    fn same_seed_same_instance() {
        let params = TreeParams::default();
        let a = random_tree(&mut ChaCha8Rng::seed_from_u64(9), &params);
        let b = random_tree(&mut ChaCha8Rng::seed_from_u64(9), &params);
        assert_eq!(a, b);
    }

    #[test]
    fn ext_instances_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            random_ext_instance(&mut rng, 6, 5);
        }
    }
}
