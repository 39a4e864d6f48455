use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::symbol::Atom;

/// A simple undirected graph on named vertices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Graph {
    vertices: BTreeSet<String>,
    edges: BTreeSet<(String, String)>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_edges<S: AsRef<str>>(vertices: &[S], edges: &[(S, S)]) -> Self {
        let mut g = Graph::new();
        for v in vertices {
            g.add_vertex(v.as_ref());
        }
        for (u, v) in edges {
            g.add_edge(u.as_ref(), v.as_ref());
        }
        g
    }

    pub fn complete(n: usize) -> Self {
        let names: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
        let mut g = Graph::new();
        for (i, u) in names.iter().enumerate() {
            g.add_vertex(u.clone());
            for v in &names[i + 1..] {
                g.add_edge(u, v);
            }
        }
        g
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Graph::new();
        for i in 0..n {
            g.add_edge(&format!("v{i}"), &format!("v{}", (i + 1) % n));
        }
        g
    }

    pub fn add_vertex(&mut self, v: impl Into<String>) {
        self.vertices.insert(v.into());
    }

    /// Adds both endpoints and the edge; self-loops are ignored.
    pub fn add_edge(&mut self, u: &str, v: &str) {
        self.add_vertex(u);
        self.add_vertex(v);
        if u == v {
            return;
        }
        let e = if u < v {
            (u.to_string(), v.to_string())
        } else {
            (v.to_string(), u.to_string())
        };
        self.edges.insert(e);
    }

    pub fn vertices(&self) -> &BTreeSet<String> {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeSet<(String, String)> {
        &self.edges
    }

    pub fn has_edge(&self, u: &str, v: &str) -> bool {
        let e = if u < v { (u, v) } else { (v, u) };
        self.edges.contains(&(e.0.to_string(), e.1.to_string()))
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn adjacency(&self) -> BTreeMap<&str, BTreeSet<&str>> {
        let mut adj: BTreeMap<&str, BTreeSet<&str>> = self
            .vertices
            .iter()
            .map(|v| (v.as_str(), BTreeSet::new()))
            .collect();
        for (u, v) in &self.edges {
            adj.entry(u).or_default().insert(v);
            adj.entry(v).or_default().insert(u);
        }
        adj
    }

    /// Vertices in index order plus adjacency lists over those indices.
    pub(crate) fn indexed(&self) -> (Vec<&str>, Vec<Vec<usize>>) {
        let names: Vec<&str> = self.vertices.iter().map(String::as_str).collect();
        let index: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let mut adj = vec![Vec::new(); names.len()];
        for (u, v) in &self.edges {
            let (a, b) = (index[u.as_str()], index[v.as_str()]);
            adj[a].push(b);
            adj[b].push(a);
        }
        (names, adj)
    }
}

/// Variables of the atoms as vertices; an edge joins two distinct variables
/// that co-occur in some atom. Constant arguments are ignored.
pub fn gaifman_graph<'a, I>(atoms: I) -> Graph
where
    I: IntoIterator<Item = &'a Atom>,
{
    let mut g = Graph::new();
    for atom in atoms {
        let vars: Vec<&str> = atom.vars().collect();
        for (i, u) in vars.iter().enumerate() {
            g.add_vertex(*u);
            for v in &vars[i + 1..] {
                g.add_edge(u, v);
            }
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_gives_empty_graph() {
        let g = gaifman_graph(std::iter::empty());
        assert_eq!(g.vertex_count(), 0);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn two_binary_atoms() {
        let atoms = [
            Atom::query("r2", &["y", "z"]),
            Atom::query("r3", &["z", "w"]),
        ];
        let g = gaifman_graph(&atoms);
        assert_eq!(g.vertex_count(), 3);
        assert!(g.has_edge("y", "z"));
        assert!(g.has_edge("w", "z"));
        assert!(!g.has_edge("y", "w"));
    }

    #[test]
    fn clique_atoms_give_complete_graph() {
        let mut atoms = Vec::new();
        for i in 1..=4 {
            for j in 1..=4 {
                if i != j {
                    atoms.push(Atom::query("c", &[format!("y{i}"), format!("y{j}")]));
                }
            }
        }
        let g = gaifman_graph(&atoms);
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.edge_count(), 6);
    }

    #[test]
    fn repeated_variable_has_no_self_loop() {
        let g = gaifman_graph(&[Atom::query("e", &["x", "x"])]);
        assert_eq!(g.vertex_count(), 1);
        assert_eq!(g.edge_count(), 0);
    }
}
