//! Cores, extension cores and the selection-annotated projections.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relational::{find_homomorphism, singleton_marking, Mapping, Structure, Symbol};

/// A pair `(A, B)`: an anchor and the structure extending it. The two may
/// share domain elements.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionPair {
    pub anchor: Structure,
    pub extension: Structure,
}

impl ExtensionPair {
    pub fn new(anchor: Structure, extension: Structure) -> Self {
        ExtensionPair { anchor, extension }
    }
}

/// The core of `a`: elements are removed one at a time while `a` still maps
/// homomorphically into what is left.
pub fn core(a: &Structure, limit: usize) -> Result<Structure> {
    if a.domain().len() > limit {
        return Err(Error::DomainLimit {
            count: a.domain().len(),
            limit,
        });
    }
    Ok(core_unchecked(a))
}

pub(crate) fn core_unchecked(a: &Structure) -> Structure {
    let mut current = a.clone();
    loop {
        let next = current.domain().iter().find_map(|u| {
            let smaller = current.remove_elements(&BTreeSet::from([u.clone()]));
            find_homomorphism(&current, &smaller, &Mapping::new()).map(|_| smaller)
        });
        match next {
            Some(s) => current = s,
            None => return current,
        }
    }
}

/// `core(A ∪ B ∪ S_dom(A))` with the markers dropped and the anchor
/// projected out.
pub fn extension_core(pair: &ExtensionPair, limit: usize) -> Result<Structure> {
    let s = marked_core(pair, limit)?;
    Ok(projection_under_set(&s, pair.anchor.domain()))
}

/// `core(A ∪ B ∪ S_dom(A))` without the marker relations.
pub(crate) fn marked_core(pair: &ExtensionPair, limit: usize) -> Result<Structure> {
    let marked = pair
        .anchor
        .union(&pair.extension)
        .union(&singleton_marking(pair.anchor.domain()));
    Ok(core(&marked, limit)?.without_markers())
}

/// Moves positions holding elements of `v` into selection annotations.
pub fn projection_under_set(s: &Structure, v: &BTreeSet<String>) -> Structure {
    let mut out = Structure::with_domain(s.domain().difference(v).cloned());
    for (sym, tuples) in s.relations() {
        for t in tuples {
            let positions = sym.free_positions(t.len());
            let mut symbol = sym.clone();
            let mut rest = Vec::new();
            for (pos, e) in positions.into_iter().zip(t) {
                if v.contains(e) {
                    symbol.selections_mut().push((pos, e.clone()));
                } else {
                    rest.push(e.clone());
                }
            }
            symbol.selections_mut().sort();
            out.insert(symbol, rest);
        }
    }
    out
}

/// The projection of `(query, data)` under `h`: tuples fully mapped into
/// `data` are dropped, mapped positions of the others become selections, and
/// the data side keeps the matching selection-projection of each relation.
/// Annotation constants that `h` maps are renamed through it.
///
/// An extension of `h` to a homomorphism `query → data` exists iff the
/// first component maps homomorphically into the second.
pub fn projection_under_hom(
    query: &Structure,
    data: &Structure,
    h: &Mapping,
) -> (Structure, Structure) {
    let mapped = |e: &String| h.get(e).cloned();
    let mut q = Structure::with_domain(
        query
            .domain()
            .iter()
            .filter(|e| !h.contains_key(e))
            .cloned(),
    );
    let mut d = Structure::with_domain(data.domain().iter().cloned());
    let mut introduced: BTreeSet<(Symbol, Symbol)> = BTreeSet::new();

    for (sym, tuples) in query.relations() {
        let mut renamed = sym.clone();
        for (_, b) in renamed.selections_mut() {
            if let Some(v) = h.get(b) {
                *b = v.clone();
            }
        }
        for t in tuples {
            let image: Option<Vec<String>> = t.iter().map(mapped).collect();
            if image
                .as_ref()
                .is_some_and(|img| data.contains(&renamed, img))
            {
                continue;
            }
            let positions = renamed.free_positions(t.len());
            let mut symbol = renamed.clone();
            let mut rest = Vec::new();
            for (pos, e) in positions.into_iter().zip(t) {
                match h.get(e) {
                    Some(v) => symbol.selections_mut().push((pos, v.clone())),
                    None => rest.push(e.clone()),
                }
            }
            symbol.selections_mut().sort();
            introduced.insert((renamed.clone(), symbol.clone()));
            q.insert(symbol, rest);
        }
    }

    for (source_sym, symbol) in introduced {
        let Some(tuples) = data.relation(&source_sym) else {
            continue;
        };
        let arity = tuples.iter().next().map_or(0, Vec::len);
        let positions = source_sym.free_positions(arity);
        let extra: Vec<(usize, &String)> = symbol
            .selections()
            .iter()
            .filter(|s| !source_sym.selections().contains(s))
            .filter_map(|(p, c)| positions.iter().position(|q| q == p).map(|i| (i, c)))
            .collect();
        for t in tuples {
            if extra.iter().all(|(i, c)| &t[*i] == *c) {
                let kept = (0..t.len())
                    .filter(|i| !extra.iter().any(|(j, _)| j == i))
                    .map(|i| t[i].clone())
                    .collect();
                d.insert(symbol.clone(), kept);
            }
        }
    }
    (q, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(facts: &[(&str, &[&str])]) -> Structure {
        let mut st = Structure::new();
        for (r, args) in facts {
            st.add_tuple(
                r.parse().unwrap(),
                args.iter().map(|a| a.to_string()).collect(),
            )
            .unwrap();
        }
        st
    }

    fn set(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn edge_is_its_own_core() {
        let e = s(&[("e", &["u", "v"])]);
        assert_eq!(core(&e, 16).unwrap(), e);
    }

    #[test]
    fn pendant_folds_into_triangle() {
        let tri = s(&[("e", &["u", "v"]), ("e", &["v", "w"]), ("e", &["w", "u"])]);
        let with_pendant = tri.union(&s(&[("e", &["w", "x"])]));
        assert_eq!(core(&with_pendant, 16).unwrap(), tri);
    }

    #[test]
    fn domain_limit() {
        let big = Structure::with_domain((0..20).map(|i| i.to_string()));
        assert!(matches!(
            core(&big, 16),
            Err(Error::DomainLimit { count: 20, .. })
        ));
    }

    #[test]
    fn extension_core_with_empty_anchor_is_core() {
        let tri = s(&[("e", &["u", "v"]), ("e", &["v", "w"]), ("e", &["w", "u"])]);
        let pair = ExtensionPair::new(Structure::new(), tri.clone());
        assert_eq!(extension_core(&pair, 16).unwrap(), tri);
    }

    #[test]
    fn extension_core_annotates_anchor_positions() {
        let pair = ExtensionPair::new(
            Structure::with_domain(["y"]),
            s(&[("r2", &["y", "z"]), ("r3", &["z", "w"])]),
        );
        let ec = extension_core(&pair, 16).unwrap();
        assert_eq!(ec, s(&[("r2[1=y]", &["z"]), ("r3", &["z", "w"])]));
    }

    #[test]
    fn projection_under_set_rules() {
        let r3 = s(&[("r3", &["z", "w"])]);
        assert_eq!(projection_under_set(&r3, &BTreeSet::new()), r3);
        assert_eq!(
            projection_under_set(&r3, &set(&["z"])),
            s(&[("r3[1=z]", &["w"])])
        );
        let full = projection_under_set(&s(&[("r1", &["a", "b"])]), &set(&["a", "b"]));
        let sym: Symbol = "r1[1=a,2=b]".parse().unwrap();
        assert!(full.contains(&sym, &[]));
        assert!(full.domain().is_empty());
    }

    #[test]
    fn nested_projection_keeps_base_positions() {
        let r = s(&[("r", &["a", "b", "c"])]);
        let once = projection_under_set(&r, &set(&["b"]));
        let twice = projection_under_set(&once, &set(&["c"]));
        assert_eq!(twice, s(&[("r[2=b,3=c]", &["a"])]));
    }

    #[test]
    fn projection_under_hom_single_step() {
        let q = s(&[("r2", &["y", "z"])]);
        let d = s(&[("r2", &["b", "c"])]);
        let h: Mapping = [("y", "b")].into_iter().collect();
        let (qp, dp) = projection_under_hom(&q, &d, &h);
        assert_eq!(qp, s(&[("r2[1=b]", &["z"])]));
        assert_eq!(dp.relations(), s(&[("r2[1=b]", &["c"])]).relations());
    }

    #[test]
    fn projection_under_total_hom_is_empty() {
        let q = s(&[("r", &["x", "y"])]);
        let d = s(&[("r", &["a", "b"])]);
        let h: Mapping = [("x", "a"), ("y", "b")].into_iter().collect();
        let (qp, dp) = projection_under_hom(&q, &d, &h);
        assert!(qp.relations().is_empty() && qp.domain().is_empty());
        assert!(dp.relations().is_empty());
    }

    #[test]
    fn mapped_but_absent_tuple_becomes_nullary() {
        let q = s(&[("r", &["x", "y"])]);
        let d = s(&[("r", &["a", "b"])]);
        let h: Mapping = [("x", "b"), ("y", "a")].into_iter().collect();
        let (qp, dp) = projection_under_hom(&q, &d, &h);
        let sym: Symbol = "r[1=b,2=a]".parse().unwrap();
        assert!(qp.contains(&sym, &[]));
        assert!(dp.relation(&sym).is_none());
        assert!(find_homomorphism(&qp, &dp, &Mapping::new()).is_none());
    }

    #[test]
    fn structure_json_round_trip() {
        let st = s(&[("r[1=a]", &["x"]), ("e", &["x", "y"])]);
        let json = serde_json::to_string(&st).unwrap();
        let back: Structure = serde_json::from_str(&json).unwrap();
        assert_eq!(back, st);
    }
}
