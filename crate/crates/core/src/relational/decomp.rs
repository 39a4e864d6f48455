//! Homomorphism search by dynamic programming over a tree decomposition of
//! the source: one table of local solutions per bag, a bottom-up semijoin
//! pass, then a top-down pass that picks a witness.

use std::collections::HashSet;

use super::hom::{BitSet, Problem};
use super::structure::{Mapping, Structure};
use super::treewidth::TreeDecomposition;
use crate::error::Result;

/// Decides `source → target` (extending `fixed`) using `td`, which must be a
/// valid decomposition of the Gaifman graph of `source`.
pub fn hom_via_decomposition(
    source: &Structure,
    td: &TreeDecomposition,
    target: &Structure,
    fixed: &Mapping,
) -> Result<Option<Mapping>> {
    td.validate(&source.gaifman_graph())?;
    Ok(hom_via_decomposition_unchecked(source, td, target, fixed))
}

pub(crate) fn hom_via_decomposition_unchecked(
    source: &Structure,
    td: &TreeDecomposition,
    target: &Structure,
    fixed: &Mapping,
) -> Option<Mapping> {
    let p = Problem::new(source, target, fixed, false).expect("non-strict mode cannot fail");
    if p.infeasible {
        return None;
    }
    if td.is_empty() {
        return p.src.is_empty().then(Mapping::new);
    }
    // Bag vertices that are not source elements carry no constraint.
    let bags: Vec<Vec<usize>> = td
        .bags()
        .iter()
        .map(|b| {
            b.iter()
                .filter_map(|v| p.src.binary_search(&v.as_str()).ok())
                .collect()
        })
        .collect();

    let mut tables: Vec<Vec<Vec<u32>>> = bags.iter().map(|b| bag_table(&p, b)).collect();

    let order = td.top_down_order();
    for &bag in order.iter().rev() {
        let Some(parent) = td.parent()[bag] else {
            continue;
        };
        let (child_pos, parent_pos) = separator(&bags[bag], &bags[parent]);
        let keys: HashSet<Vec<u32>> = tables[bag]
            .iter()
            .map(|row| child_pos.iter().map(|&i| row[i]).collect())
            .collect();
        tables[parent]
            .retain(|row| keys.contains(&parent_pos.iter().map(|&i| row[i]).collect::<Vec<_>>()));
        if tables[parent].is_empty() {
            return None;
        }
    }

    let mut assign: Vec<Option<u32>> = vec![None; p.src.len()];
    for &bag in &order {
        let row = tables[bag].iter().find(|row| {
            bags[bag]
                .iter()
                .zip(row.iter())
                .all(|(&v, &x)| assign[v].is_none_or(|a| a == x))
        })?;
        for (&v, &x) in bags[bag].iter().zip(row) {
            assign[v] = Some(x);
        }
    }
    let values: Vec<u32> = assign.into_iter().collect::<Option<_>>()?;
    Some(p.to_mapping(&values))
}

/// Positions of the shared vertices inside the child and the parent bag.
fn separator(child: &[usize], parent: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut c = Vec::new();
    let mut q = Vec::new();
    for (i, v) in child.iter().enumerate() {
        if let Some(j) = parent.iter().position(|u| u == v) {
            c.push(i);
            q.push(j);
        }
    }
    (c, q)
}

/// All assignments of the bag's vertices, in lexicographic order, that
/// satisfy every constraint lying inside the bag.
fn bag_table(p: &Problem<'_>, bag: &[usize]) -> Vec<Vec<u32>> {
    let inside: Vec<usize> = p
        .constraints
        .iter()
        .enumerate()
        .filter(|(_, c)| c.args.iter().all(|a| bag.contains(a)))
        .map(|(i, _)| i)
        .collect();
    // A constraint is checked once its last bag vertex is assigned.
    let mut due: Vec<Vec<usize>> = vec![Vec::new(); bag.len()];
    for &ci in &inside {
        let last = p.constraints[ci]
            .args
            .iter()
            .map(|a| bag.iter().position(|b| b == a).expect("inside bag"))
            .max()
            .expect("constraints have arguments");
        due[last].push(ci);
    }
    let mut rows = Vec::new();
    let mut assign: Vec<Option<u32>> = vec![None; p.src.len()];
    let mut row = Vec::with_capacity(bag.len());
    fill(p, bag, &due, 0, &mut assign, &mut row, &mut rows);
    rows
}

fn fill(
    p: &Problem<'_>,
    bag: &[usize],
    due: &[Vec<usize>],
    depth: usize,
    assign: &mut Vec<Option<u32>>,
    row: &mut Vec<u32>,
    rows: &mut Vec<Vec<u32>>,
) {
    if depth == bag.len() {
        rows.push(row.clone());
        return;
    }
    let var = bag[depth];
    let domain: &BitSet = &p.domains[var];
    for value in domain.iter() {
        let value = value as u32;
        assign[var] = Some(value);
        let ok = due[depth].iter().all(|&ci| {
            let c = &p.constraints[ci];
            let image: Vec<u32> = c
                .args
                .iter()
                .map(|&a| assign[a].expect("assigned"))
                .collect();
            p.relations[c.rel].tuples.binary_search(&image).is_ok()
        });
        if ok {
            row.push(value);
            fill(p, bag, due, depth + 1, assign, row, rows);
            row.pop();
        }
    }
    assign[var] = None;
}
