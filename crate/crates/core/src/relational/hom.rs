//! Homomorphism search by backtracking with generalised forward checking.
//!
//! Variables are chosen smallest-domain-first, ties broken by name, and
//! values are tried in name order, so the answer is deterministic.

use std::collections::{BTreeMap, HashMap};

use super::structure::{Mapping, Structure};
use crate::error::{Error, Result};

/// Fixed-size bit set over target element indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    pub fn empty(n: usize) -> Self {
        BitSet {
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = BitSet::empty(n);
        for i in 0..n {
            s.insert(i);
        }
        s
    }

    pub fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        self.words[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn intersect_with(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= *b;
        }
    }

    pub fn single(n: usize, i: usize) -> Self {
        let mut s = BitSet::empty(n);
        s.insert(i);
        s
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + b)
                }
            })
        })
    }
}

/// Target relation with a per-(position, value) index.
pub(crate) struct TargetRelation {
    pub tuples: Vec<Vec<u32>>,
    index: HashMap<(usize, u32), Vec<u32>>,
}

impl TargetRelation {
    fn new(mut tuples: Vec<Vec<u32>>) -> Self {
        tuples.sort();
        let mut index: HashMap<(usize, u32), Vec<u32>> = HashMap::new();
        for (ti, t) in tuples.iter().enumerate() {
            for (p, &v) in t.iter().enumerate() {
                index.entry((p, v)).or_default().push(ti as u32);
            }
        }
        TargetRelation { tuples, index }
    }

    fn with_value(&self, pos: usize, value: u32) -> &[u32] {
        self.index.get(&(pos, value)).map_or(&[], Vec::as_slice)
    }
}

/// A source tuple that has to be mapped into a target relation.
pub(crate) struct Constraint {
    pub rel: usize,
    pub args: Vec<usize>,
}

/// A homomorphism problem with elements replaced by indices. Source and
/// target elements are indexed in name order.
pub(crate) struct Problem<'a> {
    pub src: Vec<&'a str>,
    pub tgt: Vec<&'a str>,
    pub relations: Vec<TargetRelation>,
    pub constraints: Vec<Constraint>,
    pub by_var: Vec<Vec<usize>>,
    /// Initial domains after fixed bindings and per-position support.
    pub domains: Vec<BitSet>,
    /// A constraint can never be satisfied (missing 0-ary fact, empty
    /// relation, unsupported fixed value).
    pub infeasible: bool,
}

impl<'a> Problem<'a> {
    pub fn new(
        source: &'a Structure,
        target: &'a Structure,
        fixed: &Mapping,
        strict: bool,
    ) -> Result<Self> {
        let src: Vec<&str> = source.domain().iter().map(String::as_str).collect();
        let tgt: Vec<&str> = target.domain().iter().map(String::as_str).collect();
        let src_index: HashMap<&str, usize> =
            src.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let tgt_index: HashMap<&str, u32> = tgt
            .iter()
            .enumerate()
            .map(|(i, s)| (*s, i as u32))
            .collect();
        let n = tgt.len();

        let mut infeasible = false;
        let mut domains = vec![BitSet::full(n); src.len()];
        for (k, v) in fixed.iter() {
            let Some(&si) = src_index.get(k.as_str()) else {
                continue;
            };
            match tgt_index.get(v.as_str()) {
                Some(&ti) => domains[si] = BitSet::single(n, ti as usize),
                None => {
                    domains[si] = BitSet::empty(n);
                    infeasible = true;
                }
            }
        }

        let mut relations = Vec::new();
        let mut rel_ids = BTreeMap::new();
        let mut constraints = Vec::new();
        for (sym, tuples) in source.relations() {
            let rel = match target.relation(sym) {
                Some(tt) => *rel_ids.entry(sym.clone()).or_insert_with(|| {
                    let encoded = tt
                        .iter()
                        .map(|t| t.iter().map(|e| tgt_index[e.as_str()]).collect())
                        .collect();
                    relations.push(TargetRelation::new(encoded));
                    relations.len() - 1
                }),
                None if strict => return Err(Error::SymbolMismatch(sym.to_string())),
                None => {
                    infeasible = true;
                    continue;
                }
            };
            for t in tuples {
                let args: Vec<usize> = t.iter().map(|e| src_index[e.as_str()]).collect();
                if args.is_empty() {
                    if relations[rel].tuples.iter().all(|tt| !tt.is_empty()) {
                        infeasible = true;
                    }
                    continue;
                }
                constraints.push(Constraint { rel, args });
            }
        }
        let mut by_var = vec![Vec::new(); src.len()];
        for (ci, c) in constraints.iter().enumerate() {
            for &a in &c.args {
                if by_var[a].last() != Some(&ci) {
                    by_var[a].push(ci);
                }
            }
        }
        let mut p = Problem {
            src,
            tgt,
            relations,
            constraints,
            by_var,
            domains,
            infeasible,
        };
        if !p.infeasible {
            p.initial_support();
        }
        Ok(p)
    }

    /// Restricts every domain to values supported at its positions.
    fn initial_support(&mut self) {
        for c in &self.constraints {
            let rel = &self.relations[c.rel];
            for (p, &a) in c.args.iter().enumerate() {
                let mut support = BitSet::empty(self.tgt.len());
                for t in &rel.tuples {
                    support.insert(t[p] as usize);
                }
                self.domains[a].intersect_with(&support);
            }
        }
        if self.domains.iter().any(BitSet::is_empty) {
            self.infeasible = true;
        }
    }

    /// Tuples of the constraint's relation consistent with `assign` and the
    /// current domains, including equalities forced by repeated variables.
    pub fn consistent_tuples<'s>(
        &'s self,
        c: &'s Constraint,
        assign: &'s [Option<u32>],
        domains: &'s [BitSet],
    ) -> impl Iterator<Item = &'s Vec<u32>> + 's {
        let rel = &self.relations[c.rel];
        let anchor = c
            .args
            .iter()
            .enumerate()
            .filter_map(|(p, &a)| assign[a].map(|v| rel.with_value(p, v)))
            .min_by_key(|l| l.len());
        let candidates: Box<dyn Iterator<Item = &Vec<u32>>> = match anchor {
            Some(list) => Box::new(list.iter().map(move |&ti| &rel.tuples[ti as usize])),
            None => Box::new(rel.tuples.iter()),
        };
        candidates.filter(move |t| tuple_fits(c, t, assign, domains))
    }

    fn propagate(&self, var: usize, assign: &[Option<u32>], domains: &mut [BitSet]) -> bool {
        for &ci in &self.by_var[var] {
            let c = &self.constraints[ci];
            let open: Vec<(usize, usize)> = c
                .args
                .iter()
                .enumerate()
                .filter(|(_, &a)| assign[a].is_none())
                .map(|(p, &a)| (p, a))
                .collect();
            let mut supports: Vec<BitSet> =
                open.iter().map(|_| BitSet::empty(self.tgt.len())).collect();
            let mut any = false;
            for t in self.consistent_tuples(c, assign, domains) {
                any = true;
                for (k, &(p, _)) in open.iter().enumerate() {
                    supports[k].insert(t[p] as usize);
                }
            }
            if !any {
                return false;
            }
            for (k, &(_, a)) in open.iter().enumerate() {
                domains[a].intersect_with(&supports[k]);
                if domains[a].is_empty() {
                    return false;
                }
            }
        }
        true
    }

    fn search(&self, assign: &mut Vec<Option<u32>>, domains: Vec<BitSet>) -> bool {
        let next = (0..self.src.len())
            .filter(|&v| assign[v].is_none())
            .min_by_key(|&v| (domains[v].count(), v));
        let Some(var) = next else {
            return true;
        };
        for value in domains[var].iter() {
            let mut d = domains.clone();
            d[var] = BitSet::single(self.tgt.len(), value);
            assign[var] = Some(value as u32);
            if self.propagate(var, assign, &mut d) && self.search(assign, d) {
                return true;
            }
        }
        assign[var] = None;
        false
    }

    pub fn solve(&self) -> Option<Vec<u32>> {
        if self.infeasible {
            return None;
        }
        if !self.src.is_empty() && self.tgt.is_empty() {
            return None;
        }
        let mut assign = vec![None; self.src.len()];
        let mut domains = self.domains.clone();
        // Propagate the fixed bindings before branching.
        for v in 0..self.src.len() {
            if domains[v].count() == 1 {
                assign[v] = domains[v].iter().next().map(|x| x as u32);
            }
        }
        for v in 0..self.src.len() {
            if assign[v].is_some() && !self.propagate(v, &assign, &mut domains) {
                return None;
            }
        }
        if self.search(&mut assign, domains) {
            Some(
                assign
                    .into_iter()
                    .map(|v| v.expect("complete assignment"))
                    .collect(),
            )
        } else {
            None
        }
    }

    pub fn to_mapping(&self, values: &[u32]) -> Mapping {
        self.src
            .iter()
            .zip(values)
            .map(|(s, &v)| (s.to_string(), self.tgt[v as usize].to_string()))
            .collect()
    }
}

fn tuple_fits(c: &Constraint, t: &[u32], assign: &[Option<u32>], domains: &[BitSet]) -> bool {
    for (p, &a) in c.args.iter().enumerate() {
        match assign[a] {
            Some(v) if t[p] != v => return false,
            None if !domains[a].contains(t[p] as usize) => return false,
            _ => {}
        }
        // Repeated variable: all its positions carry the same value.
        if c.args[..p]
            .iter()
            .enumerate()
            .any(|(q, &b)| b == a && t[q] != t[p])
        {
            return false;
        }
    }
    true
}

/// Finds a homomorphism `source → target` extending `fixed`.
///
/// A source symbol missing from the target is an empty relation. Bindings in
/// `fixed` for elements outside `dom(source)` are ignored; the result is
/// defined exactly on `dom(source)`.
pub fn find_homomorphism(
    source: &Structure,
    target: &Structure,
    fixed: &Mapping,
) -> Option<Mapping> {
    let p = Problem::new(source, target, fixed, false).expect("non-strict mode cannot fail");
    p.solve().map(|v| p.to_mapping(&v))
}

/// As [`find_homomorphism`], but a source symbol absent from the target is an
/// error.
pub fn find_homomorphism_strict(
    source: &Structure,
    target: &Structure,
    fixed: &Mapping,
) -> Result<Option<Mapping>> {
    let p = Problem::new(source, target, fixed, true)?;
    Ok(p.solve().map(|v| p.to_mapping(&v)))
}
