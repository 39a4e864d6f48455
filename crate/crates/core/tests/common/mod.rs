//! Independent reference implementations for the integration tests. Nothing
//! here calls into the crate's solvers; only its data types are used.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};

use ptree::{Atom, Graph, Mapping, PatternTree, Structure, Symbol, TreeDecomposition};

type Fact = (Symbol, Vec<String>);

pub fn facts(s: &Structure) -> HashSet<Fact> {
    s.relations()
        .iter()
        .flat_map(|(sym, ts)| ts.iter().map(move |t| (sym.clone(), t.clone())))
        .collect()
}

/// Exhaustive homomorphism search from `source` into the facts `target`
/// over the element set `values`, with `fixed` preassigned. Tuples are
/// checked as soon as their last element is assigned.
pub fn hom_into(
    source: &Structure,
    target: &HashSet<Fact>,
    values: &[String],
    fixed: &BTreeMap<String, String>,
) -> Option<BTreeMap<String, String>> {
    let free: Vec<String> = source
        .domain()
        .iter()
        .filter(|e| !fixed.contains_key(*e))
        .cloned()
        .collect();
    let depth_of: BTreeMap<&str, usize> = free
        .iter()
        .enumerate()
        .map(|(i, e)| (e.as_str(), i + 1))
        .collect();
    // checks[d]: tuples whose elements are all assigned once `d` elements are.
    let mut checks: Vec<Vec<&Fact>> = vec![Vec::new(); free.len() + 1];
    let all = facts(source);
    let all: Vec<Fact> = all.into_iter().collect();
    for f in &all {
        let d =
            f.1.iter()
                .map(|e| depth_of.get(e.as_str()).copied().unwrap_or(0))
                .max()
                .unwrap_or(0);
        checks[d].push(f);
    }
    let mut assignment = fixed.clone();
    let ok_at = |assignment: &BTreeMap<String, String>, d: usize| {
        checks[d].iter().all(|(sym, t)| {
            let image: Vec<String> = t.iter().map(|e| assignment[e].clone()).collect();
            target.contains(&(sym.clone(), image))
        })
    };
    if !ok_at(&assignment, 0) {
        return None;
    }
    fn go(
        d: usize,
        free: &[String],
        values: &[String],
        assignment: &mut BTreeMap<String, String>,
        ok_at: &dyn Fn(&BTreeMap<String, String>, usize) -> bool,
    ) -> bool {
        if d == free.len() {
            return true;
        }
        for v in values {
            assignment.insert(free[d].clone(), v.clone());
            if ok_at(assignment, d + 1) && go(d + 1, free, values, assignment, ok_at) {
                return true;
            }
        }
        assignment.remove(&free[d]);
        false
    }
    go(0, &free, values, &mut assignment, &ok_at).then_some(assignment)
}

pub fn hom_exists(
    source: &Structure,
    target: &Structure,
    fixed: &BTreeMap<String, String>,
) -> bool {
    let values: Vec<String> = target.domain().iter().cloned().collect();
    hom_into(source, &facts(target), &values, fixed).is_some()
}

fn as_map(m: &Mapping) -> BTreeMap<String, String> {
    m.iter().map(|(k, v)| (k.clone(), v.clone())).collect()
}

/// Does `h` (on the anchor's elements) extend to a homomorphism of
/// `anchor ∪ extension` into `target`?
pub fn ext_oracle(
    anchor: &Structure,
    extension: &Structure,
    target: &Structure,
    h: &Mapping,
) -> bool {
    let whole = anchor.union(extension);
    let fixed: BTreeMap<String, String> = as_map(h)
        .into_iter()
        .filter(|(k, _)| whole.domain().contains(k))
        .collect();
    hom_exists(&whole, target, &fixed)
}

/// Restriction of `s` to the elements in `keep`.
pub fn induced(s: &Structure, keep: &BTreeSet<String>) -> Structure {
    let mut out = Structure::with_domain(keep.iter().cloned());
    for (sym, t) in facts(s) {
        if t.iter().all(|e| keep.contains(e)) {
            out.add_tuple(sym, t).unwrap();
        }
    }
    out
}

/// Size of the smallest induced substructure that `s` maps into, which is
/// the size of its core.
pub fn core_size(s: &Structure) -> usize {
    let elems: Vec<String> = s.domain().iter().cloned().collect();
    let n = elems.len();
    let target_facts = facts(s);
    for k in 0..=n {
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != k {
                continue;
            }
            let values: Vec<String> = (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| elems[i].clone())
                .collect();
            if hom_into(s, &target_facts, &values, &BTreeMap::new()).is_some() {
                return k;
            }
        }
    }
    n
}

/// Whether `s` has no homomorphism into itself minus one element.
pub fn is_core(s: &Structure) -> bool {
    let f = facts(s);
    s.domain().iter().all(|u| {
        let values: Vec<String> = s.domain().iter().filter(|e| *e != u).cloned().collect();
        hom_into(s, &f, &values, &BTreeMap::new()).is_none()
    })
}

/// Structures equal up to a renaming of elements.
pub fn isomorphic(a: &Structure, b: &Structure) -> bool {
    if a.domain().len() != b.domain().len() {
        return false;
    }
    let count = |s: &Structure| -> BTreeMap<Symbol, usize> {
        s.relations()
            .iter()
            .map(|(k, v)| (k.clone(), v.len()))
            .filter(|(_, n)| *n > 0)
            .collect()
    };
    if count(a) != count(b) {
        return false;
    }
    // An injective homomorphism between structures with equal tuple counts
    // per symbol is an isomorphism.
    let fa: Vec<Fact> = facts(a).into_iter().collect();
    let fb = facts(b);
    let elems: Vec<String> = a.domain().iter().cloned().collect();
    let targets: Vec<String> = b.domain().iter().cloned().collect();
    let depth_of: BTreeMap<&str, usize> = elems
        .iter()
        .enumerate()
        .map(|(i, e)| (e.as_str(), i + 1))
        .collect();
    let mut checks: Vec<Vec<&Fact>> = vec![Vec::new(); elems.len() + 1];
    for f in &fa {
        let d = f.1.iter().map(|e| depth_of[e.as_str()]).max().unwrap_or(0);
        checks[d].push(f);
    }
    if !checks[0].iter().all(|f| fb.contains(*f)) {
        return false;
    }
    fn go(
        d: usize,
        elems: &[String],
        targets: &[String],
        used: &mut Vec<bool>,
        assignment: &mut BTreeMap<String, String>,
        checks: &[Vec<&Fact>],
        fb: &HashSet<Fact>,
    ) -> bool {
        if d == elems.len() {
            return true;
        }
        for (i, v) in targets.iter().enumerate() {
            if used[i] {
                continue;
            }
            used[i] = true;
            assignment.insert(elems[d].clone(), v.clone());
            let ok = checks[d + 1].iter().all(|(sym, t)| {
                let image: Vec<String> = t.iter().map(|e| assignment[e].clone()).collect();
                fb.contains(&(sym.clone(), image))
            });
            if ok && go(d + 1, elems, targets, used, assignment, checks, fb) {
                return true;
            }
            used[i] = false;
        }
        assignment.remove(&elems[d]);
        false
    }
    go(
        0,
        &elems,
        &targets,
        &mut vec![false; targets.len()],
        &mut BTreeMap::new(),
        &checks,
        &fb,
    )
}

/// Preorder of the nodes, computed from the child lists.
fn preorder(p: &PatternTree) -> Vec<usize> {
    let mut out = Vec::new();
    let mut stack = vec![p.root()];
    while let Some(t) = stack.pop() {
        out.push(t);
        for &c in p.children(t).iter().rev() {
            stack.push(c);
        }
    }
    out
}

fn atom_vars(atoms: &BTreeSet<Atom>) -> BTreeSet<String> {
    atoms
        .iter()
        .flat_map(|a| a.vars().map(str::to_string))
        .collect()
}

fn maps_into(atoms: &BTreeSet<Atom>, nu: &BTreeMap<String, String>, db: &HashSet<Fact>) -> bool {
    atoms.iter().all(|a| {
        let image: Option<Vec<String>> = a.vars().map(|v| nu.get(v).cloned()).collect();
        image.is_some_and(|img| db.contains(&(a.symbol.clone(), img)))
    })
}

fn all_homs(
    atoms: &BTreeSet<Atom>,
    vars: &[String],
    values: &[String],
    db: &HashSet<Fact>,
    nu: &mut BTreeMap<String, String>,
    out: &mut Vec<BTreeMap<String, String>>,
) {
    if nu.len() == vars.len() {
        if maps_into(atoms, nu, db) {
            out.push(nu.clone());
        }
        return;
    }
    let v = &vars[nu.len()];
    for c in values {
        nu.insert(v.clone(), c.clone());
        // Prune on atoms whose variables are all bound.
        let ok = atoms.iter().all(|a| {
            let image: Option<Vec<String>> = a.vars().map(|x| nu.get(x).cloned()).collect();
            image.is_none_or(|img| db.contains(&(a.symbol.clone(), img)))
        });
        if ok {
            all_homs(atoms, vars, values, db, nu, out);
        }
        nu.remove(v);
    }
}

/// The answer set by the definition: every pp-solution `ν` whose maximal
/// witnessing subtree has no child admitting an extension of `ν` restricted
/// to the variables of all earlier nodes, projected to the free variables.
pub fn answers(p: &PatternTree, db: &Structure) -> BTreeSet<Mapping> {
    let order = preorder(p);
    let pos: BTreeMap<usize, usize> = order.iter().enumerate().map(|(i, &t)| (t, i)).collect();
    let n = p.len();
    let db_facts = facts(db);
    let values: Vec<String> = db.domain().iter().cloned().collect();
    let mut out = BTreeSet::new();
    let mut seen: BTreeSet<BTreeMap<String, String>> = BTreeSet::new();
    for mask in 0u64..(1 << n) {
        let in_sub = |t: usize| mask & (1 << t) != 0;
        if !in_sub(p.root()) || (0..n).any(|t| in_sub(t) && p.parent(t).is_some_and(|q| !in_sub(q)))
        {
            continue;
        }
        let atoms: BTreeSet<Atom> = (0..n)
            .filter(|&t| in_sub(t))
            .flat_map(|t| p.label(t).iter().cloned())
            .collect();
        let vars: Vec<String> = atom_vars(&atoms).into_iter().collect();
        let mut homs = Vec::new();
        all_homs(
            &atoms,
            &vars,
            &values,
            &db_facts,
            &mut BTreeMap::new(),
            &mut homs,
        );
        for nu in homs {
            if !seen.insert(nu.clone()) {
                continue;
            }
            // T_ν: nodes reachable from the root through nodes fully mapped by ν.
            let good = |t: usize| {
                atom_vars(p.label(t)).iter().all(|v| nu.contains_key(v))
                    && maps_into(p.label(t), &nu, &db_facts)
            };
            let mut t_nu = BTreeSet::new();
            let mut stack = vec![p.root()];
            while let Some(t) = stack.pop() {
                if good(t) {
                    t_nu.insert(t);
                    stack.extend(p.children(t).iter().copied());
                }
            }
            let children: Vec<usize> = t_nu
                .iter()
                .flat_map(|&t| p.children(t).iter().copied())
                .filter(|c| !t_nu.contains(c))
                .collect();
            let maximal = children.iter().all(|&c| {
                let earlier: BTreeSet<String> = order[..pos[&c]]
                    .iter()
                    .flat_map(|&t| atom_vars(p.label(t)))
                    .collect();
                let fixed: BTreeMap<String, String> = nu
                    .iter()
                    .filter(|(k, _)| earlier.contains(*k))
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect();
                let child = Structure::from_atoms(p.label(c)).unwrap();
                let fixed: BTreeMap<String, String> = fixed
                    .into_iter()
                    .filter(|(k, _)| child.domain().contains(k))
                    .collect();
                hom_into(&child, &db_facts, &values, &fixed).is_none()
            });
            if maximal {
                out.insert(
                    nu.iter()
                        .filter(|(k, _)| p.free_vars().contains(*k))
                        .map(|(k, v)| (k.clone(), v.clone()))
                        .collect(),
                );
            }
        }
    }
    out
}

/// Projections of all pp-solutions: the natural hard negatives.
pub fn pp_projections(p: &PatternTree, db: &Structure) -> BTreeSet<Mapping> {
    let n = p.len();
    let db_facts = facts(db);
    let values: Vec<String> = db.domain().iter().cloned().collect();
    let mut out = BTreeSet::new();
    for mask in 0u64..(1 << n) {
        let in_sub = |t: usize| mask & (1 << t) != 0;
        if !in_sub(p.root()) || (0..n).any(|t| in_sub(t) && p.parent(t).is_some_and(|q| !in_sub(q)))
        {
            continue;
        }
        let atoms: BTreeSet<Atom> = (0..n)
            .filter(|&t| in_sub(t))
            .flat_map(|t| p.label(t).iter().cloned())
            .collect();
        let vars: Vec<String> = atom_vars(&atoms).into_iter().collect();
        let mut homs = Vec::new();
        all_homs(
            &atoms,
            &vars,
            &values,
            &db_facts,
            &mut BTreeMap::new(),
            &mut homs,
        );
        for nu in homs {
            out.insert(
                nu.iter()
                    .filter(|(k, _)| p.free_vars().contains(*k))
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect(),
            );
        }
    }
    out
}

/// Exact treewidth by the subset recursion
/// `TW(S) = min_{v ∈ S} max(TW(S \ v), |Q(S \ v, v)|)`, where `Q(S, v)` is
/// the set of vertices outside `S ∪ {v}` reachable from `v` through `S`.
pub fn treewidth_by_subsets(g: &Graph) -> usize {
    let names: Vec<&String> = g.vertices().iter().collect();
    let n = names.len();
    if n == 0 {
        return 0;
    }
    let index: BTreeMap<&str, usize> = names
        .iter()
        .enumerate()
        .map(|(i, v)| (v.as_str(), i))
        .collect();
    let mut adj = vec![0u32; n];
    for (u, v) in g.edges() {
        let (a, b) = (index[u.as_str()], index[v.as_str()]);
        adj[a] |= 1 << b;
        adj[b] |= 1 << a;
    }
    let q = |s: u32, v: usize| -> u32 {
        let mut seen = 1u32 << v;
        let mut frontier = 1u32 << v;
        let mut outside = 0u32;
        while frontier != 0 {
            let mut next = 0;
            for (w, nb) in adj.iter().enumerate() {
                if frontier & (1 << w) != 0 {
                    next |= nb;
                }
            }
            next &= !seen;
            seen |= next;
            outside |= next & !s;
            frontier = next & s;
        }
        outside.count_ones()
    };
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut tw = vec![usize::MAX; 1 << n];
    tw[0] = 0;
    for s in 1..=full {
        let mut best = usize::MAX;
        for v in 0..n {
            if s & (1 << v) == 0 {
                continue;
            }
            let rest = s & !(1 << v);
            best = best.min(tw[rest as usize].max(q(rest, v) as usize));
        }
        tw[s as usize] = best;
    }
    tw[full as usize]
}

/// Checks the three decomposition conditions and the tree shape.
pub fn valid_decomposition(g: &Graph, td: &TreeDecomposition) -> Result<(), String> {
    let bags = td.bags();
    let parent = td.parent();
    if g.vertex_count() == 0 {
        return Ok(());
    }
    if bags.len() != parent.len() || parent.iter().filter(|p| p.is_none()).count() != 1 {
        return Err("not a rooted tree".into());
    }
    for i in 0..bags.len() {
        // Following parents from any bag reaches the root without cycling.
        let mut cur = i;
        let mut steps = 0;
        while let Some(q) = parent[cur] {
            cur = q;
            steps += 1;
            if steps > bags.len() {
                return Err("parent cycle".into());
            }
        }
    }
    for v in g.vertices() {
        let holding: Vec<usize> = (0..bags.len()).filter(|&i| bags[i].contains(v)).collect();
        if holding.is_empty() {
            return Err(format!("vertex {v} in no bag"));
        }
        // Connected: exactly one holding bag has a parent outside the set.
        let tops = holding
            .iter()
            .filter(|&&i| parent[i].is_none_or(|q| !bags[q].contains(v)))
            .count();
        if tops != 1 {
            return Err(format!("bags holding {v} are disconnected"));
        }
    }
    for (u, v) in g.edges() {
        if !bags.iter().any(|b| b.contains(u) && b.contains(v)) {
            return Err(format!("edge {u}-{v} uncovered"));
        }
    }
    let width = bags
        .iter()
        .map(|b| b.len())
        .max()
        .unwrap_or(1)
        .saturating_sub(1);
    if width != td.width() {
        return Err(format!(
            "reported width {} but bags give {width}",
            td.width()
        ));
    }
    Ok(())
}

pub fn parse_atoms(list: &[&str]) -> Vec<Atom> {
    list.iter().map(|a| a.parse().unwrap()).collect()
}
