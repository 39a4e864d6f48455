//! The extension problem: given `(A, B)`, a target `C` and a homomorphism
//! `h: A → C`, is there a homomorphism `B → C` agreeing with `h` on the
//! elements `A` and `B` share?

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::core_ops::{marked_core, projection_under_hom, projection_under_set, ExtensionPair};
use crate::error::{Error, Result};
use crate::relational::{
    find_homomorphism, hom_via_decomposition_unchecked, treewidth_exact_with_limit, Atom, Mapping,
    Structure, Symbol, TreeDecomposition,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtInstance {
    pair: ExtensionPair,
    target: Structure,
    anchor_map: Mapping,
}

impl ExtInstance {
    /// Fails with [`Error::InvalidAnchor`] unless `anchor_map` is a
    /// homomorphism defined on all of `dom(anchor)`.
    pub fn new(pair: ExtensionPair, target: Structure, anchor_map: Mapping) -> Result<Self> {
        check_anchor(&pair.anchor, &target, &anchor_map)?;
        let anchor_map = anchor_map.restrict(pair.anchor.domain());
        Ok(ExtInstance {
            pair,
            target,
            anchor_map,
        })
    }

    pub fn pair(&self) -> &ExtensionPair {
        &self.pair
    }

    pub fn target(&self) -> &Structure {
        &self.target
    }

    pub fn anchor_map(&self) -> &Mapping {
        &self.anchor_map
    }
}

fn check_anchor(anchor: &Structure, target: &Structure, h: &Mapping) -> Result<()> {
    if let Some(e) = anchor.domain().iter().find(|e| !h.contains_key(e)) {
        return Err(Error::InvalidAnchor(format!("{e} is unmapped")));
    }
    if let Some((k, v)) = h.iter().find(|(_, v)| !target.domain().contains(*v)) {
        return Err(Error::InvalidAnchor(format!(
            "{k}↦{v} leaves the target domain"
        )));
    }
    if !h.maps_into(anchor, target) {
        return Err(Error::InvalidAnchor(
            "some anchor tuple is not preserved".into(),
        ));
    }
    Ok(())
}

/// Direct search for the extension.
pub fn ext_bruteforce(i: &ExtInstance) -> bool {
    let fixed = i.anchor_map.restrict(i.pair.extension.domain());
    find_homomorphism(&i.pair.extension, &i.target, &fixed).is_some()
}

/// Decides the instance through `S = core(A ∪ B ∪ S_dom(A))` without markers:
/// an extension exists iff `h` extends to `A ∪ S`, which is decided on the
/// projection of `(A ∪ S, C)` under `h`.
pub fn ext_via_extcore(i: &ExtInstance, cfg: &Config) -> Result<bool> {
    let prepared = PreparedExt::new(&i.pair, cfg)?;
    Ok(prepared.decide(&i.target, &i.anchor_map))
}

/// The target-independent part of [`ext_via_extcore`]: the reduced structure
/// `A ∪ S` and, when its non-anchor part has width within the budget, a
/// decomposition used for dynamic programming.
#[derive(Debug, Clone)]
pub struct PreparedExt {
    anchor: Structure,
    reduced: Structure,
    decomposition: Option<TreeDecomposition>,
}

impl PreparedExt {
    /// Like [`ext_via_extcore`] this fails with [`Error::DomainLimit`] when
    /// the core cannot be computed.
    pub fn new(pair: &ExtensionPair, cfg: &Config) -> Result<Self> {
        let s = marked_core(pair, cfg.core_domain_limit)?;
        Ok(Self::from_reduced(pair, s, cfg))
    }

    /// Uses the core when it is within the domain limit and the pair itself
    /// otherwise; both give the same answers.
    pub fn new_or_plain(pair: &ExtensionPair, cfg: &Config) -> Self {
        match marked_core(pair, cfg.core_domain_limit) {
            Ok(s) => Self::from_reduced(pair, s, cfg),
            Err(_) => Self::from_reduced(pair, pair.extension.clone(), cfg),
        }
    }

    fn from_reduced(pair: &ExtensionPair, s: Structure, cfg: &Config) -> Self {
        let reduced = pair.anchor.union(&s);
        let free = projection_under_set(&reduced, pair.anchor.domain());
        let decomposition = treewidth_exact_with_limit(
            &free.gaifman_graph(),
            cfg.width_budget,
            cfg.treewidth_vertex_limit,
        )
        .ok()
        .flatten();
        PreparedExt {
            anchor: pair.anchor.clone(),
            reduced,
            decomposition,
        }
    }

    /// `A ∪ S`.
    pub fn reduced(&self) -> &Structure {
        &self.reduced
    }

    pub fn decomposition(&self) -> Option<&TreeDecomposition> {
        self.decomposition.as_ref()
    }

    /// Whether `h` (read on the anchor only) extends to a homomorphism of the
    /// reduced structure into `target`.
    pub fn decide(&self, target: &Structure, h: &Mapping) -> bool {
        let h = h.restrict(self.anchor.domain());
        let (q, d) = projection_under_hom(&self.reduced, target, &h);
        let covers = self.anchor.domain().iter().all(|e| h.contains_key(e));
        match &self.decomposition {
            Some(td) if covers => {
                hom_via_decomposition_unchecked(&q, td, &d, &Mapping::new()).is_some()
            }
            _ => find_homomorphism(&q, &d, &Mapping::new()).is_some(),
        }
    }
}

/// Head symbol of the anchor built by [`cq_to_ext`].
pub const ANSWER_SYMBOL: &str = "Ans";

/// `({Ans(x⃗)}, body)`: membership of a tuple in the query result is the
/// extension problem for this pair.
pub fn cq_to_ext(body: &[Atom], free: &[String]) -> Result<ExtensionPair> {
    let mut anchor = Structure::new();
    anchor.add_tuple(Symbol::new(ANSWER_SYMBOL), free.to_vec())?;
    let extension = Structure::from_atoms(body)?;
    Ok(ExtensionPair::new(anchor, extension))
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

    fn m(pairs: &[(&str, &str)]) -> Mapping {
        pairs.iter().copied().collect()
    }

    fn both(i: &ExtInstance) -> bool {
        let a = ext_bruteforce(i);
        assert_eq!(a, ext_via_extcore(i, &Config::default()).unwrap());
        a
    }

    #[test]
    fn extension_inside_anchor() {
        let a = s(&[("r", &["x", "y"])]);
        let c = s(&[("r", &["1", "2"])]);
        let i = ExtInstance::new(
            ExtensionPair::new(a.clone(), a),
            c,
            m(&[("x", "1"), ("y", "2")]),
        )
        .unwrap();
        assert!(both(&i));
    }

    #[test]
    fn missing_relation_blocks_extension() {
        let a = s(&[("r1", &["x", "y"])]);
        let b = s(&[("r2", &["y", "z"]), ("r3", &["z", "w"])]);
        let c = s(&[("r1", &["a", "b"]), ("r2", &["b", "c"])]);
        let i =
            ExtInstance::new(ExtensionPair::new(a, b), c, m(&[("x", "a"), ("y", "b")])).unwrap();
        assert!(!both(&i));
    }

    #[test]
    fn anchor_must_be_a_homomorphism() {
        let a = s(&[("r", &["x"])]);
        let c = s(&[("r", &["1"])]);
        let bad = ExtInstance::new(
            ExtensionPair::new(a.clone(), a.clone()),
            c.clone(),
            m(&[("x", "2")]),
        );
        assert!(matches!(bad, Err(Error::InvalidAnchor(_))));
        let partial = ExtInstance::new(ExtensionPair::new(a.clone(), a), c, Mapping::new());
        assert!(matches!(partial, Err(Error::InvalidAnchor(_))));
    }

    #[test]
    fn cq_pairs() {
        let pair = cq_to_ext(&[Atom::query("r1", &["x", "y"])], &["x".to_string()]).unwrap();
        assert_eq!(pair.anchor, s(&[("Ans", &["x"])]));
        assert_eq!(pair.extension, s(&[("r1", &["x", "y"])]));
        let boolean = cq_to_ext(&[Atom::query("r1", &["x", "y"])], &[]).unwrap();
        assert!(boolean.anchor.contains(&Symbol::new(ANSWER_SYMBOL), &[]));
    }
}
