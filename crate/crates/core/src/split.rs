//! Splitting a tree into a core subtree plus a forest of stars on stripped leaves.

use crate::error::{Error, Result};
use crate::tree::{peeling_ordering, Tree};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Star {
    /// Center, as a vertex of the core tree.
    pub center: usize,
    /// Number of leaves, at least one.
    pub leaves: usize,
}

/// Stars with pairwise distinct centers in the core tree.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StarForest {
    pub stars: Vec<Star>,
}

impl StarForest {
    pub fn edge_count(&self) -> usize {
        self.stars.iter().map(|s| s.leaves).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.stars.is_empty()
    }

    /// Center of each forest edge, stars in order, repeated by leaf count.
    pub fn edge_centers(&self) -> Vec<usize> {
        self.stars.iter().flat_map(|s| std::iter::repeat_n(s.center, s.leaves)).collect()
    }
}

/// `T = T0 + F`: core tree, star forest, and the map back to the input labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    /// Core tree on compact ids, rooted at a vertex that is not a star center.
    pub t0: Tree,
    /// Input label of each core vertex (increasing).
    pub t0_labels: Vec<usize>,
    pub forest: StarForest,
    /// Input label of each stripped leaf, ordered as [`StarForest::edge_centers`].
    pub leaf_labels: Vec<usize>,
}

impl Split {
    /// Input label of each vertex of [`Split::combined_tree`].
    pub fn combined_labels(&self) -> Vec<usize> {
        self.t0_labels.iter().chain(&self.leaf_labels).copied().collect()
    }

    /// Core tree with the stars reattached: core ids first, then stripped leaves.
    pub fn combined_tree(&self) -> Tree {
        let n0 = self.t0.vertex_count();
        let mut edges = self.t0.edges().to_vec();
        for (k, c) in self.forest.edge_centers().into_iter().enumerate() {
            edges.push((c, n0 + k));
        }
        Tree::new(n0 + self.leaf_labels.len(), edges, self.t0.root())
            .expect("reattaching stars to a tree yields a tree")
    }

    pub fn is_center(&self, v: usize) -> bool {
        self.forest.stars.iter().any(|s| s.center == v)
    }
}

/// Removes `count` leaves of `tree` (largest peeling index first).
///
/// A leaf is skipped when removing it would leave every core vertex adjacent
/// to a stripped leaf, since the core root must not be a star center.
pub fn strip_leaves(tree: &Tree, count: usize) -> Result<Split> {
    let n = tree.vertex_count();
    if tree.edge_count() < 2 {
        return Err(Error::Strip { requested: count, reason: "tree needs at least 2 edges".into() });
    }
    let leaves = tree.leaves();
    if count > leaves.len() {
        return Err(Error::Strip { requested: count, reason: format!("tree has only {} leaves", leaves.len()) });
    }
    let pos = peeling_ordering(tree).positions();
    let mut candidates = leaves;
    candidates.sort_by_key(|&v| std::cmp::Reverse(pos[v]));

    let mut stripped = vec![false; n];
    let mut is_center = vec![false; n];
    let mut taken = 0;
    for &leaf in &candidates {
        if taken == count {
            break;
        }
        let center = tree.neighbors(leaf)[0];
        stripped[leaf] = true;
        let was_center = is_center[center];
        is_center[center] = true;
        let root_available = (0..n).any(|v| !stripped[v] && !is_center[v]);
        if root_available {
            taken += 1;
        } else {
            stripped[leaf] = false;
            is_center[center] = was_center;
        }
    }
    if taken < count {
        return Err(Error::Strip {
            requested: count,
            reason: "no core vertex would remain free to serve as root".into(),
        });
    }

    let t0_labels: Vec<usize> = (0..n).filter(|&v| !stripped[v]).collect();
    let mut compact = vec![usize::MAX; n];
    for (i, &v) in t0_labels.iter().enumerate() {
        compact[v] = i;
    }
    let t0_edges: Vec<(usize, usize)> = tree
        .edges()
        .iter()
        .filter(|&&(u, v)| !stripped[u] && !stripped[v])
        .map(|&(u, v)| (compact[u], compact[v]))
        .collect();
    let root_label = t0_labels.iter().copied().find(|&v| !is_center[v]).expect("checked above");
    let t0 = Tree::new(t0_labels.len(), t0_edges, compact[root_label])?;

    let mut stars = Vec::new();
    let mut leaf_labels = Vec::new();
    for &c in &t0_labels {
        let mine: Vec<usize> = tree.neighbors(c).iter().copied().filter(|&w| stripped[w]).collect();
        if !mine.is_empty() {
            stars.push(Star { center: compact[c], leaves: mine.len() });
            leaf_labels.extend(mine);
        }
    }
    Ok(Split { t0, t0_labels, forest: StarForest { stars }, leaf_labels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::canonical_form;

    #[test]
    fn star_split() {
        let s = strip_leaves(&Tree::star(5), 2).unwrap();
        assert_eq!(s.t0.edge_count(), 3);
        assert_eq!(canonical_form(&s.t0), canonical_form(&Tree::star(3)));
        assert_eq!(s.forest.stars.len(), 1);
        assert_eq!(s.forest.stars[0].leaves, 2);
        assert_eq!(s.t0_labels[s.forest.stars[0].center], 0);
        assert!(!s.is_center(s.t0.root()));
    }

    #[test]
    fn path_split() {
        let s = strip_leaves(&Tree::path(5), 2).unwrap();
        assert_eq!(canonical_form(&s.t0), canonical_form(&Tree::path(3)));
        assert_eq!(s.forest.stars, vec![Star { center: 0, leaves: 1 }, Star { center: 3, leaves: 1 }]);
        assert_eq!(canonical_form(&s.combined_tree()), canonical_form(&Tree::path(5)));
        assert_eq!(s.t0_labels[s.t0.root()], 2);
    }

    #[test]
    fn refuses_bad_requests() {
        assert!(strip_leaves(&Tree::path(1), 1).is_err());
        assert!(strip_leaves(&Tree::path(5), 3).is_err());
        // Stripping both leaves of a 2-path would leave only the center.
        assert!(strip_leaves(&Tree::path(2), 2).is_err());
    }

    #[test]
    fn skips_leaves_that_would_block_the_root() {
        // Spider with three legs of length 1 and one of length 2: stripping the
        // three short legs plus the long leg's tip leaves {0, 4} with 0 a center
        // and 4 a center, so one leaf has to be passed over.
        let t = Tree::new(6, vec![(0, 1), (0, 2), (0, 3), (0, 4), (4, 5)], 0).unwrap();
        assert!(strip_leaves(&t, 4).is_err());
        let s = strip_leaves(&t, 3).unwrap();
        assert_eq!(s.forest.edge_count(), 3);
        assert!(!s.is_center(s.t0.root()));
    }
}
