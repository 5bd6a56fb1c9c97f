//! Trees, peeling orderings, leaf counts and free-tree canonical forms.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// A rooted tree on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Tree {
    n: usize,
    edges: Vec<(usize, usize)>,
    root: usize,
    adj: Vec<Vec<usize>>,
}

impl Tree {
    /// Validates that `edges` form a spanning tree on `0..n`.
    pub fn new(n: usize, edges: Vec<(usize, usize)>, root: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidTree("no vertices".into()));
        }
        if root >= n {
            return Err(Error::InvalidTree(format!("root {root} out of range")));
        }
        if edges.len() != n - 1 {
            return Err(Error::InvalidTree(format!("{} edges on {} vertices", edges.len(), n)));
        }
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &edges {
            if u >= n || v >= n {
                return Err(Error::InvalidTree(format!("edge ({u}, {v}) out of range")));
            }
            if u == v {
                return Err(Error::InvalidTree(format!("loop at {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidTree("repeated edge".into()));
            }
        }
        let tree = Tree { n, edges, root, adj };
        // n - 1 edges plus connectivity implies acyclic.
        if tree.bfs_from(root).len() != n {
            return Err(Error::InvalidTree("disconnected".into()));
        }
        Ok(tree)
    }

    pub fn path(m: usize) -> Self {
        Tree::new(m + 1, (0..m).map(|i| (i, i + 1)).collect(), 0).expect("path is a tree")
    }

    /// `K_{1,m}` centered (and rooted) at 0.
    pub fn star(m: usize) -> Self {
        Tree::new(m + 1, (1..=m).map(|i| (0, i)).collect(), 0).expect("star is a tree")
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.n - 1
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.adj[v].len() == 1
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.n).filter(|&v| self.is_leaf(v)).collect()
    }

    pub fn with_root(&self, root: usize) -> Result<Self> {
        Tree::new(self.n, self.edges.clone(), root)
    }

    fn bfs_from(&self, start: usize) -> Vec<usize> {
        let mut seen = vec![false; self.n];
        let mut order = Vec::with_capacity(self.n);
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        order
    }

    /// Parent of each vertex when rooted at [`Tree::root`].
    pub fn parents(&self) -> Vec<Option<usize>> {
        let mut parent = vec![None; self.n];
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([self.root]);
        seen[self.root] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(v);
                    queue.push_back(w);
                }
            }
        }
        parent
    }

    /// Distance from the root.
    pub fn depths(&self) -> Vec<usize> {
        let parent = self.parents();
        let mut depth = vec![0; self.n];
        for v in self.bfs_from(self.root) {
            if let Some(q) = parent[v] {
                depth[v] = depth[q] + 1;
            }
        }
        depth
    }

    /// Children lists in increasing vertex order.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let parent = self.parents();
        let mut children = vec![Vec::new(); self.n];
        for (v, q) in parent.into_iter().enumerate() {
            if let Some(q) = q {
                children[q].push(v);
            }
        }
        children
    }

    /// Parses the text format: a line with `n`, then `n - 1` lines `u v`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let n: usize = lines
            .next()
            .ok_or_else(|| Error::InvalidTree("empty input".into()))?
            .parse()
            .map_err(|_| Error::InvalidTree("first line must be the vertex count".into()))?;
        let mut edges = Vec::new();
        for line in lines {
            let mut it = line.split_whitespace().map(str::parse::<usize>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(u)), Some(Ok(v)), None) => edges.push((u, v)),
                _ => return Err(Error::InvalidTree(format!("bad edge line {line:?}"))),
            }
        }
        Tree::new(n, edges, 0)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }
}

/// A vertex order in which every prefix induces a subtree, starting at the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeelingOrdering {
    order: Vec<usize>,
}

impl PeelingOrdering {
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// `position[v]` is the index of `v` in the ordering.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (i, &v) in self.order.iter().enumerate() {
            pos[v] = i;
        }
        pos
    }
}

/// Breadth-first order from the root, neighbors visited in increasing order.
pub fn peeling_ordering(tree: &Tree) -> PeelingOrdering {
    PeelingOrdering { order: tree.bfs_from(tree.root()) }
}

pub fn leaf_count(tree: &Tree) -> usize {
    if tree.vertex_count() == 1 {
        return 0;
    }
    (0..tree.vertex_count()).filter(|&v| tree.is_leaf(v)).count()
}

/// Center (one vertex) or bicenter (two vertices) of the tree.
pub fn centers(tree: &Tree) -> Vec<usize> {
    let n = tree.vertex_count();
    if n <= 2 {
        return (0..n).collect();
    }
    let mut degree: Vec<usize> = (0..n).map(|v| tree.degree(v)).collect();
    let mut layer: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    let mut remaining = n;
    while remaining > 2 {
        remaining -= layer.len();
        let mut next = Vec::new();
        for &v in &layer {
            for &w in tree.neighbors(v) {
                degree[w] -= 1;
                if degree[w] == 1 {
                    next.push(w);
                }
            }
        }
        layer = next;
    }
    layer.sort_unstable();
    layer
}

pub(crate) fn rooted_encoding(tree: &Tree, root: usize) -> Vec<u8> {
    // Iterative post-order so deep paths do not overflow the stack.
    let n = tree.vertex_count();
    let mut parent = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    let mut stack = vec![root];
    parent[root] = root;
    while let Some(v) = stack.pop() {
        order.push(v);
        for &w in tree.neighbors(v) {
            if parent[w] == usize::MAX {
                parent[w] = v;
                stack.push(w);
            }
        }
    }
    let mut codes: Vec<Vec<Vec<u8>>> = vec![Vec::new(); n];
    let mut finished: Vec<Vec<u8>> = vec![Vec::new(); n];
    for &v in order.iter().rev() {
        let mut kids = std::mem::take(&mut codes[v]);
        kids.sort_unstable();
        let mut code = Vec::with_capacity(2 + kids.iter().map(Vec::len).sum::<usize>());
        code.push(b'(');
        for k in kids {
            code.extend_from_slice(&k);
        }
        code.push(b')');
        if v == root {
            finished[v] = code;
        } else {
            codes[parent[v]].push(code);
        }
    }
    std::mem::take(&mut finished[root])
}

/// Canonical byte string of the free tree: equal iff isomorphic.
///
/// Roots at the center (or the smaller encoding over the bicenter) and emits
/// sorted nested-parenthesis encodings. The tree's own root is ignored.
pub fn canonical_form(tree: &Tree) -> Vec<u8> {
    centers(tree).into_iter().map(|c| rooted_encoding(tree, c)).min().expect("a tree has at least one center")
}

/// Canonical form of a graph given as an edge list over arbitrary vertex keys,
/// or `None` if the edges do not form a tree.
pub fn canonical_form_of_edges<V: Ord + Copy>(edges: &[(V, V)]) -> Option<Vec<u8>> {
    let mut keys: Vec<V> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
    keys.sort_unstable();
    keys.dedup();
    if keys.is_empty() {
        return None;
    }
    let index = |v: V| keys.binary_search(&v).expect("key present");
    let relabeled = edges.iter().map(|&(u, v)| (index(u), index(v))).collect();
    Tree::new(keys.len(), relabeled, 0).ok().map(|t| canonical_form(&t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_trees() {
        assert!(Tree::new(3, vec![(0, 1)], 0).is_err());
        assert!(Tree::new(4, vec![(0, 1), (1, 2), (2, 0)], 0).is_err());
        assert!(Tree::new(3, vec![(0, 1), (0, 1)], 0).is_err());
        assert!(Tree::new(2, vec![(0, 0)], 0).is_err());
        assert!(Tree::new(2, vec![(0, 1)], 2).is_err());
    }

    #[test]
    fn peeling_small_cases() {
        assert_eq!(peeling_ordering(&Tree::path(1)).order(), &[0, 1]);
        assert_eq!(peeling_ordering(&Tree::path(3)).order(), &[0, 1, 2, 3]);
        let t = Tree::path(4).with_root(2).unwrap();
        assert_eq!(peeling_ordering(&t).order(), &[2, 1, 3, 0, 4]);
    }

    #[test]
    fn leaf_counts() {
        for m in 1..10 {
            assert_eq!(leaf_count(&Tree::path(m)), 2);
            if m >= 2 {
                assert_eq!(leaf_count(&Tree::star(m)), m);
            }
        }
        assert_eq!(leaf_count(&Tree::new(1, vec![], 0).unwrap()), 0);
    }

    #[test]
    fn canonical_forms() {
        let a = Tree::new(3, vec![(0, 1), (1, 2)], 0).unwrap();
        let b = Tree::new(3, vec![(2, 0), (0, 1)], 0).unwrap();
        assert_eq!(canonical_form(&a), canonical_form(&b));
        assert_ne!(canonical_form(&Tree::star(3)), canonical_form(&Tree::path(3)));
        // Bicentral path: both centers give the same code.
        assert_eq!(centers(&Tree::path(3)), vec![1, 2]);
        assert_eq!(centers(&Tree::path(4)), vec![2]);
    }

    #[test]
    fn text_round_trip() {
        let t = Tree::new(5, vec![(0, 1), (1, 2), (1, 3), (3, 4)], 0).unwrap();
        let back = Tree::parse(&t.to_text()).unwrap();
        assert_eq!(back, t);
        assert!(Tree::parse("3\n0 1\n").is_err());
        assert!(Tree::parse("x\n").is_err());
        assert!(Tree::parse("2\n0 1 2\n").is_err());
    }

    #[test]
    fn edge_list_forms() {
        let edges = [((5, 1), (9, 2)), ((9, 2), (4, 0))];
        assert_eq!(canonical_form_of_edges(&edges), Some(canonical_form(&Tree::path(2))));
        let cycle = [(1, 2), (2, 3), (3, 1)];
        assert_eq!(canonical_form_of_edges(&cycle), None);
    }
}
