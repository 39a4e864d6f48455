//! Tree decompositions and treewidth.
//!
//! The exact solver is a branch and bound over elimination orderings with
//! memoisation on the set of eliminated vertices, the minor-min-width lower
//! bound and the (almost) simplicial reduction rules. It is meant for query
//! graphs, which are small; the data never enters a treewidth computation.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use super::graph::Graph;
use crate::error::{Error, Result};

pub const DEFAULT_VERTEX_LIMIT: usize = 24;

/// A rooted tree of bags. `parent[i]` is `None` exactly for the root.
///
/// The width of the empty decomposition (no bags) is reported as 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreeDecomposition {
    bags: Vec<BTreeSet<String>>,
    parent: Vec<Option<usize>>,
    width: usize,
}

impl TreeDecomposition {
    pub fn empty() -> Self {
        TreeDecomposition {
            bags: Vec::new(),
            parent: Vec::new(),
            width: 0,
        }
    }

    /// Checks that `parent` describes a single rooted tree over the bags.
    pub fn new(bags: Vec<BTreeSet<String>>, parent: Vec<Option<usize>>) -> Result<Self> {
        if bags.len() != parent.len() {
            return Err(Error::InvalidDecomposition(
                "bag and parent lists differ in length".into(),
            ));
        }
        let roots = parent.iter().filter(|p| p.is_none()).count();
        if !bags.is_empty() && roots != 1 {
            return Err(Error::InvalidDecomposition(format!(
                "expected exactly one root, found {roots}"
            )));
        }
        for start in 0..parent.len() {
            let mut cur = start;
            let mut steps = 0;
            while let Some(p) = parent[cur] {
                if p >= parent.len() {
                    return Err(Error::InvalidDecomposition(format!(
                        "parent {p} out of range"
                    )));
                }
                cur = p;
                steps += 1;
                if steps > parent.len() {
                    return Err(Error::InvalidDecomposition(
                        "parent pointers form a cycle".into(),
                    ));
                }
            }
        }
        let width = bags
            .iter()
            .map(BTreeSet::len)
            .max()
            .unwrap_or(1)
            .saturating_sub(1);
        Ok(TreeDecomposition {
            bags,
            parent,
            width,
        })
    }

    pub fn bags(&self) -> &[BTreeSet<String>] {
        &self.bags
    }

    pub fn parent(&self) -> &[Option<usize>] {
        &self.parent
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.bags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bags.is_empty()
    }

    pub fn root(&self) -> Option<usize> {
        self.parent.iter().position(Option::is_none)
    }

    /// Bags ordered so that every bag precedes its children.
    pub fn top_down_order(&self) -> Vec<usize> {
        let mut children = vec![Vec::new(); self.bags.len()];
        for (i, p) in self.parent.iter().enumerate() {
            if let Some(p) = p {
                children[*p].push(i);
            }
        }
        let mut order = Vec::with_capacity(self.bags.len());
        if let Some(r) = self.root() {
            let mut stack = vec![r];
            while let Some(b) = stack.pop() {
                order.push(b);
                stack.extend(children[b].iter().rev());
            }
        }
        order
    }

    /// Checks vertex coverage, edge coverage and connectedness against `g`.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidDecomposition(m));
        for v in g.vertices() {
            let holding: Vec<usize> = (0..self.bags.len())
                .filter(|&i| self.bags[i].contains(v))
                .collect();
            if holding.is_empty() {
                return fail(format!("vertex {v} is in no bag"));
            }
            // In a rooted tree, a node set is connected iff exactly one of
            // its members has its parent outside the set.
            let tops = holding
                .iter()
                .filter(|&&i| self.parent[i].is_none_or(|p| !self.bags[p].contains(v)))
                .count();
            if tops != 1 {
                return fail(format!("bags containing {v} are not connected"));
            }
        }
        for (u, v) in g.edges() {
            if !self.bags.iter().any(|b| b.contains(u) && b.contains(v)) {
                return fail(format!("edge {u}-{v} is in no bag"));
            }
        }
        Ok(())
    }
}

/// Lower and upper bound on a treewidth; equal when the value is exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WidthEstimate {
    pub lower: usize,
    pub upper: usize,
}

impl WidthEstimate {
    pub fn exact(w: usize) -> Self {
        WidthEstimate { lower: w, upper: w }
    }

    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }
}

/// Minimum-width decomposition, or `Ok(None)` if the treewidth exceeds `cap`.
pub fn treewidth_exact(g: &Graph, cap: usize) -> Result<Option<TreeDecomposition>> {
    treewidth_exact_with_limit(g, cap, DEFAULT_VERTEX_LIMIT)
}

pub fn treewidth_exact_with_limit(
    g: &Graph,
    cap: usize,
    vertex_limit: usize,
) -> Result<Option<TreeDecomposition>> {
    let n = g.vertex_count();
    if n > vertex_limit.min(64) {
        return Err(Error::VertexLimit {
            count: n,
            limit: vertex_limit.min(64),
        });
    }
    if n == 0 {
        return Ok(Some(TreeDecomposition::empty()));
    }
    let (names, adj_lists) = g.indexed();
    let (heuristic_order, heuristic_width) = min_fill_order(&adj_lists);

    let mut adj = vec![0u64; n];
    for (v, nb) in adj_lists.iter().enumerate() {
        for &u in nb {
            adj[v] |= 1 << u;
        }
    }
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let lower = minor_min_width(&adj, all);
    if lower > cap {
        return Ok(None);
    }
    let mut search = Search {
        best: heuristic_width.min(cap.saturating_add(1)),
        best_order: (heuristic_width <= cap).then(|| heuristic_order.clone()),
        memo: HashMap::new(),
    };
    if heuristic_width > lower {
        let mut prefix = Vec::with_capacity(n);
        search.dfs(&adj, all, 0, &mut prefix);
    }
    Ok(search
        .best_order
        .map(|order| decomposition_from_order(&names, &adj_lists, &order)))
}

/// Min-fill elimination heuristic; always succeeds.
pub fn treewidth_upper(g: &Graph) -> TreeDecomposition {
    if g.vertex_count() == 0 {
        return TreeDecomposition::empty();
    }
    let (names, adj) = g.indexed();
    let (order, _) = min_fill_order(&adj);
    decomposition_from_order(&names, &adj, &order)
}

/// Exact treewidth when the graph is within `vertex_limit`, otherwise the
/// interval between minor-min-width and min-fill. The returned
/// decomposition realises the upper bound.
pub fn treewidth_estimate(g: &Graph, vertex_limit: usize) -> (WidthEstimate, TreeDecomposition) {
    match treewidth_exact_with_limit(g, usize::MAX, vertex_limit) {
        Ok(Some(td)) => (WidthEstimate::exact(td.width()), td),
        _ => {
            let td = treewidth_upper(g);
            let (_, adj) = g.indexed();
            let sets: Vec<BTreeSet<usize>> =
                adj.into_iter().map(|v| v.into_iter().collect()).collect();
            let lower = minor_min_width_sets(sets).min(td.width());
            (
                WidthEstimate {
                    lower,
                    upper: td.width(),
                },
                td,
            )
        }
    }
}

struct Search {
    best: usize,
    best_order: Option<Vec<usize>>,
    memo: HashMap<u64, usize>,
}

impl Search {
    fn dfs(&mut self, adj: &[u64], remaining: u64, cur: usize, prefix: &mut Vec<usize>) {
        let rem = remaining.count_ones() as usize;
        if rem == 0 || rem - 1 <= cur {
            // Any completion keeps the width at `cur`.
            if cur < self.best {
                self.best = cur;
                let mut order = prefix.clone();
                order.extend(bits(remaining));
                self.best_order = Some(order);
            }
            return;
        }
        if cur >= self.best {
            return;
        }
        match self.memo.get(&remaining) {
            Some(&seen) if seen <= cur => return,
            _ => {
                self.memo.insert(remaining, cur);
            }
        }
        let low = minor_min_width(adj, remaining).max(cur);
        if low >= self.best {
            return;
        }

        // Reduction rules: a simplicial vertex, or an almost simplicial one of
        // degree at most the lower bound, can be eliminated first.
        for v in bits(remaining) {
            let nb = adj[v] & remaining;
            let deg = nb.count_ones() as usize;
            if is_clique(adj, nb) || (deg <= low && almost_clique(adj, nb)) {
                let next = eliminate(adj, v, remaining);
                prefix.push(v);
                self.dfs(&next, remaining & !(1 << v), cur.max(deg), prefix);
                prefix.pop();
                return;
            }
        }

        let mut candidates: Vec<(usize, usize)> = bits(remaining)
            .map(|v| ((adj[v] & remaining).count_ones() as usize, v))
            .collect();
        candidates.sort_unstable();
        for (deg, v) in candidates {
            let width = cur.max(deg);
            if width >= self.best {
                continue;
            }
            let next = eliminate(adj, v, remaining);
            prefix.push(v);
            self.dfs(&next, remaining & !(1 << v), width, prefix);
            prefix.pop();
        }
    }
}

fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let b = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(b)
        }
    })
}

fn is_clique(adj: &[u64], set: u64) -> bool {
    bits(set).all(|u| (adj[u] | (1 << u)) & set == set)
}

fn almost_clique(adj: &[u64], set: u64) -> bool {
    bits(set).any(|u| is_clique(adj, set & !(1 << u)))
}

fn eliminate(adj: &[u64], v: usize, remaining: u64) -> Vec<u64> {
    let mut next = adj.to_vec();
    let nb = adj[v] & remaining & !(1 << v);
    for u in bits(nb) {
        next[u] |= nb & !(1 << u);
        next[u] &= !(1 << v);
    }
    next
}

fn minor_min_width(adj: &[u64], remaining: u64) -> usize {
    let mut adj: Vec<u64> = adj.iter().map(|a| a & remaining).collect();
    let mut alive = remaining;
    let mut lb = 0;
    while alive.count_ones() > 1 {
        let (v, deg) = bits(alive)
            .map(|v| (v, (adj[v] & alive).count_ones()))
            .min_by_key(|&(v, d)| (d, v))
            .unwrap();
        lb = lb.max(deg as usize);
        let nb = adj[v] & alive;
        alive &= !(1 << v);
        if nb == 0 {
            continue;
        }
        let u = bits(nb)
            .min_by_key(|&u| ((adj[u] & alive).count_ones(), u))
            .unwrap();
        for w in bits(nb) {
            if w != u {
                adj[w] |= 1 << u;
                adj[u] |= 1 << w;
            }
        }
    }
    lb
}

fn minor_min_width_sets(mut adj: Vec<BTreeSet<usize>>) -> usize {
    let mut alive: BTreeSet<usize> = (0..adj.len()).collect();
    let mut lb = 0;
    while alive.len() > 1 {
        let v = *alive.iter().min_by_key(|&&v| (adj[v].len(), v)).unwrap();
        lb = lb.max(adj[v].len());
        alive.remove(&v);
        let nb: Vec<usize> = adj[v].iter().copied().collect();
        for &w in &nb {
            adj[w].remove(&v);
        }
        if let Some(&u) = nb.iter().min_by_key(|&&u| (adj[u].len(), u)) {
            for &w in &nb {
                if w != u {
                    adj[w].insert(u);
                    adj[u].insert(w);
                }
            }
        }
    }
    lb
}

fn min_fill_order(adj: &[Vec<usize>]) -> (Vec<usize>, usize) {
    let n = adj.len();
    let mut nbrs: Vec<BTreeSet<usize>> = adj.iter().map(|v| v.iter().copied().collect()).collect();
    let mut alive: BTreeSet<usize> = (0..n).collect();
    let mut order = Vec::with_capacity(n);
    let mut width = 0;
    while !alive.is_empty() {
        let v = *alive
            .iter()
            .min_by_key(|&&v| {
                let nb: Vec<usize> = nbrs[v].iter().copied().collect();
                let mut fill = 0usize;
                for (i, a) in nb.iter().enumerate() {
                    for b in &nb[i + 1..] {
                        if !nbrs[*a].contains(b) {
                            fill += 1;
                        }
                    }
                }
                (fill, nb.len(), v)
            })
            .unwrap();
        width = width.max(nbrs[v].len());
        let nb: Vec<usize> = nbrs[v].iter().copied().collect();
        for &a in &nb {
            nbrs[a].remove(&v);
            for &b in &nb {
                if a != b {
                    nbrs[a].insert(b);
                }
            }
        }
        alive.remove(&v);
        order.push(v);
    }
    (order, width)
}

/// Builds the decomposition induced by an elimination ordering: the bag of
/// `v` is `v` plus its neighbours at elimination time, hung below the bag of
/// the earliest later-eliminated neighbour.
fn decomposition_from_order(
    names: &[&str],
    adj: &[Vec<usize>],
    order: &[usize],
) -> TreeDecomposition {
    let n = names.len();
    let mut pos = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut nbrs: Vec<BTreeSet<usize>> = adj.iter().map(|v| v.iter().copied().collect()).collect();
    let mut bags = Vec::with_capacity(n);
    let mut parent = vec![None; n];
    for (i, &v) in order.iter().enumerate() {
        let nb: Vec<usize> = nbrs[v].iter().copied().collect();
        for &a in &nb {
            nbrs[a].remove(&v);
            for &b in &nb {
                if a != b {
                    nbrs[a].insert(b);
                }
            }
        }
        parent[i] = nb.iter().map(|&u| pos[u]).min();
        let mut bag: BTreeSet<String> = nb.iter().map(|&u| names[u].to_string()).collect();
        bag.insert(names[v].to_string());
        bags.push(bag);
    }
    // Component roots hang below the last bag.
    let last = n - 1;
    for p in parent.iter_mut().take(last) {
        if p.is_none() {
            *p = Some(last);
        }
    }
    TreeDecomposition::new(bags, parent).expect("elimination ordering yields a tree")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        let mut g = Graph::new();
        for i in 1..n {
            g.add_edge(&format!("p{i}"), &format!("p{}", i + 1));
        }
        g
    }

    #[test]
    fn single_vertex_has_width_zero() {
        let g = Graph::from_edges(&["a"], &[]);
        let td = treewidth_exact(&g, 10).unwrap().unwrap();
        assert_eq!(td.width(), 0);
        td.validate(&g).unwrap();
    }

    #[test]
    fn clique_k4() {
        let g = Graph::complete(4);
        let td = treewidth_exact(&g, 10).unwrap().unwrap();
        assert_eq!(td.width(), 3);
        td.validate(&g).unwrap();
        assert_eq!(treewidth_upper(&g).width(), 3);
    }

    #[test]
    fn cycle_c5() {
        let g = Graph::cycle(5);
        let td = treewidth_exact(&g, 10).unwrap().unwrap();
        assert_eq!(td.width(), 2);
        td.validate(&g).unwrap();
        let up = treewidth_upper(&g);
        up.validate(&g).unwrap();
        assert!((2..=3).contains(&up.width()));
    }

    #[test]
    fn path_tree() {
        let g = path(5);
        assert_eq!(treewidth_upper(&g).width(), 1);
        assert_eq!(treewidth_exact(&g, 3).unwrap().unwrap().width(), 1);
    }

    #[test]
    fn cap_reports_exceeded() {
        assert!(treewidth_exact(&Graph::complete(5), 3).unwrap().is_none());
        assert!(treewidth_exact(&Graph::complete(5), 4).unwrap().is_some());
    }

    #[test]
    fn vertex_limit() {
        let g = path(30);
        assert!(matches!(
            treewidth_exact(&g, 3),
            Err(Error::VertexLimit { count: 30, .. })
        ));
        let (est, td) = treewidth_estimate(&g, DEFAULT_VERTEX_LIMIT);
        assert_eq!(est.upper, 1);
        assert_eq!(est.lower, 1);
        td.validate(&g).unwrap();
    }

    #[test]
    fn disconnected_graph() {
        let g = Graph::from_edges(&["a", "b", "c", "d", "e"], &[("a", "b"), ("c", "d")]);
        let td = treewidth_exact(&g, 5).unwrap().unwrap();
        assert_eq!(td.width(), 1);
        td.validate(&g).unwrap();
    }

    #[test]
    fn validate_rejects_broken_decompositions() {
        let g = path(3);
        let bag = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
        let missing_edge =
            TreeDecomposition::new(vec![bag(&["p1", "p2"]), bag(&["p3"])], vec![None, Some(0)])
                .unwrap();
        assert!(missing_edge.validate(&g).is_err());
        let disconnected = TreeDecomposition::new(
            vec![bag(&["p1", "p2"]), bag(&["p3"]), bag(&["p2", "p3"])],
            vec![None, Some(0), Some(1)],
        )
        .unwrap();
        assert!(disconnected.validate(&g).is_err());
        assert!(
            TreeDecomposition::new(vec![bag(&["p1"]), bag(&["p2"])], vec![None, None]).is_err()
        );
    }
}
