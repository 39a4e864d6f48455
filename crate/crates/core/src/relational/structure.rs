use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::graph::Graph;
use super::symbol::{Atom, Symbol, Term};
use crate::error::{Error, Result};

pub type Tuple = Vec<String>;

/// A finite relational structure.
///
/// A set of query atoms is represented by its canonical structure, whose
/// domain is the set of variables. Relations are stored only while non-empty;
/// a symbol missing from the map is an empty relation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Structure {
    domain: BTreeSet<String>,
    relations: BTreeMap<Symbol, BTreeSet<Tuple>>,
}

impl Structure {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_domain<I, S>(elements: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Structure {
            domain: elements.into_iter().map(Into::into).collect(),
            relations: BTreeMap::new(),
        }
    }

    /// Canonical structure of a set of atoms: variables and constants alike
    /// become domain elements named after the term.
    pub fn from_atoms<'a, I>(atoms: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a Atom>,
    {
        let mut s = Structure::new();
        for atom in atoms {
            s.add_tuple(
                atom.symbol.clone(),
                atom.names().map(str::to_string).collect(),
            )?;
        }
        Ok(s)
    }

    pub fn domain(&self) -> &BTreeSet<String> {
        &self.domain
    }

    pub fn relations(&self) -> &BTreeMap<Symbol, BTreeSet<Tuple>> {
        &self.relations
    }

    pub fn relation(&self, symbol: &Symbol) -> Option<&BTreeSet<Tuple>> {
        self.relations.get(symbol)
    }

    pub fn contains(&self, symbol: &Symbol, tuple: &[String]) -> bool {
        self.relations
            .get(symbol)
            .is_some_and(|r| r.contains(tuple))
    }

    pub fn arity(&self, symbol: &Symbol) -> Option<usize> {
        self.relations
            .get(symbol)
            .and_then(|r| r.iter().next())
            .map(Vec::len)
    }

    pub fn tuple_count(&self) -> usize {
        self.relations.values().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }

    pub fn add_element(&mut self, e: impl Into<String>) {
        self.domain.insert(e.into());
    }

    /// Inserts a tuple, adding its elements to the domain. Fails when the
    /// tuple length disagrees with tuples already stored under the symbol.
    pub fn add_tuple(&mut self, symbol: Symbol, tuple: Tuple) -> Result<()> {
        if let Some(arity) = self.arity(&symbol) {
            if arity != tuple.len() {
                return Err(Error::Arity {
                    symbol: symbol.to_string(),
                    expected: arity,
                    found: tuple.len(),
                });
            }
        }
        self.insert(symbol, tuple);
        Ok(())
    }

    /// Unchecked insertion; callers guarantee arity consistency.
    pub(crate) fn insert(&mut self, symbol: Symbol, tuple: Tuple) {
        for e in &tuple {
            if !self.domain.contains(e) {
                self.domain.insert(e.clone());
            }
        }
        self.relations.entry(symbol).or_default().insert(tuple);
    }

    /// Merges domains and relations. Shared symbols are assumed to have the
    /// same arity in both structures.
    pub fn union(&self, other: &Structure) -> Structure {
        let mut out = self.clone();
        out.domain.extend(other.domain.iter().cloned());
        for (sym, tuples) in &other.relations {
            out.relations
                .entry(sym.clone())
                .or_default()
                .extend(tuples.iter().cloned());
        }
        out
    }

    /// Induced substructure on `keep`: the domain shrinks to `keep ∩ dom` and
    /// only tuples lying entirely inside it survive.
    pub fn restrict(&self, keep: &BTreeSet<String>) -> Structure {
        let domain: BTreeSet<String> = self.domain.intersection(keep).cloned().collect();
        let mut relations = BTreeMap::new();
        for (sym, tuples) in &self.relations {
            let kept: BTreeSet<Tuple> = tuples
                .iter()
                .filter(|t| t.iter().all(|e| domain.contains(e)))
                .cloned()
                .collect();
            if !kept.is_empty() {
                relations.insert(sym.clone(), kept);
            }
        }
        Structure { domain, relations }
    }

    /// The structure with `removed` taken out of the domain.
    pub fn remove_elements(&self, removed: &BTreeSet<String>) -> Structure {
        let keep = self.domain.difference(removed).cloned().collect();
        self.restrict(&keep)
    }

    /// Drops the relations accepted by `drop`, keeping the domain.
    pub fn without_symbols(&self, mut drop: impl FnMut(&Symbol) -> bool) -> Structure {
        Structure {
            domain: self.domain.clone(),
            relations: self
                .relations
                .iter()
                .filter(|(s, _)| !drop(s))
                .map(|(s, t)| (s.clone(), t.clone()))
                .collect(),
        }
    }

    pub fn without_markers(&self) -> Structure {
        self.without_symbols(Symbol::is_marker)
    }

    /// Renames domain elements; elements absent from `map` keep their name.
    pub fn rename(&self, map: &BTreeMap<String, String>) -> Structure {
        let f = |e: &String| map.get(e).cloned().unwrap_or_else(|| e.clone());
        let mut out = Structure::with_domain(self.domain.iter().map(f));
        for (sym, tuples) in &self.relations {
            for t in tuples {
                out.insert(sym.clone(), t.iter().map(f).collect());
            }
        }
        out
    }

    pub fn gaifman_graph(&self) -> Graph {
        let mut g = Graph::new();
        for e in &self.domain {
            g.add_vertex(e.clone());
        }
        for tuples in self.relations.values() {
            for t in tuples {
                for (i, u) in t.iter().enumerate() {
                    for v in &t[i + 1..] {
                        g.add_edge(u, v);
                    }
                }
            }
        }
        g
    }

    /// The tuples of the structure as atoms over variables.
    pub fn atoms(&self) -> Vec<Atom> {
        self.relations
            .iter()
            .flat_map(|(sym, tuples)| {
                tuples.iter().map(move |t| {
                    Atom::new(
                        sym.clone(),
                        t.iter().map(|e| Term::Var(e.clone())).collect(),
                    )
                })
            })
            .collect()
    }
}

/// `S_A`: domain `A` and a fresh unary relation `R_a = {(a)}` per element.
pub fn singleton_marking<'a, I>(elements: I) -> Structure
where
    I: IntoIterator<Item = &'a String>,
{
    let mut s = Structure::new();
    for a in elements {
        s.insert(Symbol::marker(a), vec![a.clone()]);
    }
    s
}

/// Fact-file rendering, one `rel(c1,...).` per line; isolated domain
/// elements are listed in a trailing comment.
impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut used = BTreeSet::new();
        for (sym, tuples) in &self.relations {
            for t in tuples {
                writeln!(f, "{sym}({}).", t.join(","))?;
                used.extend(t.iter());
            }
        }
        let isolated: Vec<&String> = self.domain.iter().filter(|e| !used.contains(e)).collect();
        if !isolated.is_empty() {
            let names: Vec<&str> = isolated.iter().map(|s| s.as_str()).collect();
            writeln!(f, "# isolated: {}", names.join(","))?;
        }
        Ok(())
    }
}

/// Serialised as the domain plus the fact list, e.g.
/// `{"domain":["a"],"facts":["r(a)"]}`.
impl Serialize for Structure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let facts: Vec<String> = self
            .relations()
            .iter()
            .flat_map(|(sym, ts)| ts.iter().map(move |t| format!("{sym}({})", t.join(","))))
            .collect();
        let mut st = s.serialize_struct("Structure", 2)?;
        st.serialize_field("domain", self.domain())?;
        st.serialize_field("facts", &facts)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for Structure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            #[serde(default)]
            domain: Vec<String>,
            facts: Vec<String>,
        }
        let raw = Raw::deserialize(d)?;
        let mut s = Structure::with_domain(raw.domain);
        for f in &raw.facts {
            let atom: Atom = f.parse().map_err(serde::de::Error::custom)?;
            s.add_tuple(
                atom.symbol.clone(),
                atom.names().map(str::to_string).collect(),
            )
            .map_err(serde::de::Error::custom)?;
        }
        Ok(s)
    }
}

/// A partial function from variables (or, for homomorphisms between query
/// structures, elements) to domain elements.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Mapping(BTreeMap<String, String>);

impl Mapping {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, key: &str) -> Option<&String> {
        self.0.get(key)
    }

    pub fn insert(&mut self, key: impl Into<String>, value: impl Into<String>) -> Option<String> {
        self.0.insert(key.into(), value.into())
    }

    pub fn remove(&mut self, key: &str) -> Option<String> {
        self.0.remove(key)
    }

    pub fn contains_key(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &String)> {
        self.0.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &String> {
        self.0.keys()
    }

    pub fn domain(&self) -> BTreeSet<String> {
        self.0.keys().cloned().collect()
    }

    pub fn as_map(&self) -> &BTreeMap<String, String> {
        &self.0
    }

    /// `μ|_V`: the restriction to `dom(μ) ∩ V`.
    pub fn restrict<'a, I>(&self, keep: I) -> Mapping
    where
        I: IntoIterator<Item = &'a String>,
    {
        let mut out = Mapping::new();
        for k in keep {
            if let Some(v) = self.0.get(k) {
                out.0.insert(k.clone(), v.clone());
            }
        }
        out
    }

    /// True iff `self` agrees with `other` on all of `dom(other)`.
    pub fn extends(&self, other: &Mapping) -> bool {
        other.0.iter().all(|(k, v)| self.0.get(k) == Some(v))
    }

    /// True iff the two mappings agree wherever both are defined.
    pub fn compatible(&self, other: &Mapping) -> bool {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .0
            .iter()
            .all(|(k, v)| large.0.get(k).is_none_or(|w| w == v))
    }

    pub fn merged(&self, other: &Mapping) -> Option<Mapping> {
        if !self.compatible(other) {
            return None;
        }
        let mut out = self.clone();
        out.0
            .extend(other.0.iter().map(|(k, v)| (k.clone(), v.clone())));
        Some(out)
    }

    /// Checks that every tuple of `source` over `dom(self)` is mapped into
    /// `target`. Tuples touching unmapped elements are ignored.
    pub fn maps_into(&self, source: &Structure, target: &Structure) -> bool {
        source.relations().iter().all(|(sym, tuples)| {
            tuples.iter().all(|t| {
                let image: Option<Vec<String>> = t.iter().map(|e| self.0.get(e).cloned()).collect();
                match image {
                    Some(img) => target.contains(sym, &img),
                    None => true,
                }
            })
        })
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for Mapping {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        Mapping(
            iter.into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
        )
    }
}

impl fmt::Display for Mapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}↦{v}")?;
        }
        f.write_str("}")
    }
}
