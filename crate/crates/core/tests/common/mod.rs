//! Fixtures and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use ringel::group::ColorSet;
use ringel::rainbow::{compose_quasi_embedding, QuasiEmbedding, RainbowEmbedding, StarForestEmbedding};
use ringel::sample::sample_unlabeled_tree;
use ringel::split::{Split, Star, StarForest};
use ringel::tree::{leaf_count, Tree};

pub fn leaf_bound(m: usize) -> usize {
    (2 * m).div_ceil(5)
}

/// Path of `m / 2` edges with the remaining edges as bristles at one end.
pub fn broom(m: usize) -> Tree {
    let handle = m / 2;
    let mut edges: Vec<(usize, usize)> = (0..handle).map(|i| (i, i + 1)).collect();
    edges.extend((handle + 1..=m).map(|v| (handle, v)));
    Tree::new(m + 1, edges, 0).unwrap()
}

/// Spine of `m / 2` edges; the other edges hang off spine vertices round-robin.
pub fn caterpillar(m: usize) -> Tree {
    let spine = m / 2;
    let mut edges: Vec<(usize, usize)> = (0..spine).map(|i| (i, i + 1)).collect();
    edges.extend((spine + 1..=m).enumerate().map(|(k, v)| (k % (spine + 1), v)));
    Tree::new(m + 1, edges, 0).unwrap()
}

/// Legs of length two from vertex 0, plus one short leg when `m` is odd.
pub fn spider(m: usize) -> Tree {
    let mut edges = Vec::new();
    let mut next = 1;
    for _ in 0..m / 2 {
        edges.push((0, next));
        edges.push((next, next + 1));
        next += 2;
    }
    if m % 2 == 1 {
        edges.push((0, next));
    }
    Tree::new(m + 1, edges, 0).unwrap()
}

/// `count` seeded unlabeled trees with `m` edges whose leaf count passes `keep`.
pub fn random_trees(m: usize, count: usize, seed: u64, keep: impl Fn(&Tree) -> bool) -> Vec<Tree> {
    (seed..).map(|s| sample_unlabeled_tree(m, s).unwrap()).filter(|t| keep(t)).take(count).collect()
}

/// Stars, brooms, caterpillars, spiders and `random` sampled trees, all with
/// `m` edges and at least `⌈2m/5⌉` leaves.
pub fn battery(m: usize, random: usize) -> Vec<Tree> {
    let mut trees = vec![Tree::star(m), broom(m), caterpillar(m), spider(m)];
    trees.extend(random_trees(m, random, 1000 * m as u64, |t| leaf_count(t) >= leaf_bound(m)));
    assert!(trees.iter().all(|t| leaf_count(t) >= leaf_bound(m)));
    trees
}

/// Battery for the apex targets: `m + 1` edges, leaf bound on the tree left
/// after deleting the designated leaf.
pub fn apex_battery(m: usize, random: usize) -> Vec<Tree> {
    let ok = |t: &Tree| {
        let (z, _) = ringel::complements::deletion_leaf(t).unwrap();
        leaf_count(&ringel::complements::remove_leaf(t, z).unwrap()) >= leaf_bound(m)
    };
    let mut trees: Vec<Tree> =
        [Tree::star(m + 1), broom(m + 1), caterpillar(m + 1), spider(m + 1)].into_iter().filter(|t| ok(t)).collect();
    trees.extend(random_trees(m + 1, random, 7000 + m as u64, ok));
    trees
}

/// All labeled trees on `n` vertices via Prüfer codes.
pub fn all_labeled_trees(n: usize) -> Vec<Tree> {
    if n == 1 {
        return vec![Tree::new(1, vec![], 0).unwrap()];
    }
    if n == 2 {
        return vec![Tree::new(2, vec![(0, 1)], 0).unwrap()];
    }
    let len = n - 2;
    (0..n.pow(len as u32))
        .map(|mut code_index| {
            let code: Vec<usize> = (0..len)
                .map(|_| {
                    let d = code_index % n;
                    code_index /= n;
                    d
                })
                .collect();
            Tree::new(n, ringel::sample::prufer_decode(&code, n), 0).unwrap()
        })
        .collect()
}

/// One representative per isomorphism class, found by [`isomorphic_brute`].
pub fn free_trees_brute(n: usize) -> Vec<Tree> {
    let mut reps: Vec<Tree> = Vec::new();
    for t in all_labeled_trees(n) {
        if !reps.iter().any(|r| isomorphic_brute(r, &t)) {
            reps.push(t);
        }
    }
    reps
}

fn edge_set(t: &Tree) -> HashSet<(usize, usize)> {
    t.edges().iter().map(|&(u, v)| (u.min(v), u.max(v))).collect()
}

/// Isomorphism by trying every vertex permutation (degree-sequence pruned).
pub fn isomorphic_brute(a: &Tree, b: &Tree) -> bool {
    let n = a.vertex_count();
    if n != b.vertex_count() {
        return false;
    }
    let degs = |t: &Tree| {
        let mut d: Vec<usize> = (0..n).map(|v| t.degree(v)).collect();
        d.sort_unstable();
        d
    };
    if degs(a) != degs(b) {
        return false;
    }
    let target = edge_set(b);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut used = vec![false; n];
    fn extend(
        k: usize,
        a: &Tree,
        b: &Tree,
        target: &HashSet<(usize, usize)>,
        perm: &mut Vec<usize>,
        used: &mut [bool],
    ) -> bool {
        let n = perm.len();
        if k == n {
            return a.edges().iter().all(|&(u, v)| {
                let (x, y) = (perm[u], perm[v]);
                target.contains(&(x.min(y), x.max(y)))
            });
        }
        for c in 0..n {
            if !used[c] && a.degree(k) == b.degree(c) {
                used[c] = true;
                perm[k] = c;
                if extend(k + 1, a, b, target, perm, used) {
                    return true;
                }
                used[c] = false;
            }
        }
        false
    }
    extend(0, a, b, &target, &mut perm, &mut used)
}

/// Whether the undirected graph on `edges` is a single tree.
pub fn is_tree<V: Ord + Copy>(edges: &[(V, V)]) -> bool {
    let vs: BTreeSet<V> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
    if vs.len() != edges.len() + 1 {
        return false;
    }
    let idx: Vec<V> = vs.into_iter().collect();
    let pos = |v: V| idx.binary_search(&v).unwrap();
    let mut parent: Vec<usize> = (0..idx.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for &(u, v) in edges {
        let (a, b) = (find(&mut parent, pos(u)), find(&mut parent, pos(v)));
        if a == b {
            return false;
        }
        parent[a] = b;
    }
    true
}

/// `H` of the worked 13-vertex example: core edges 0-1, 1-2, 0-3, 3-4 with
/// images 0, 6, 10, 1, 4 and a two-leaf star at core vertex 4 using colors 2
/// and 5, so the first leaf lands on 6.
pub fn worked_example() -> QuasiEmbedding {
    let p = 13;
    let t0 = Tree::new(5, vec![(0, 1), (1, 2), (0, 3), (3, 4)], 0).unwrap();
    let emb = RainbowEmbedding::new(t0.clone(), p, vec![0, 6, 10, 1, 4]).unwrap();
    let split = Split {
        t0,
        t0_labels: (0..5).collect(),
        forest: StarForest { stars: vec![Star { center: 4, leaves: 2 }] },
        leaf_labels: vec![5, 6],
    };
    let f1 = StarForestEmbedding { centers_image: vec![4], leaf_colors: vec![2, 5], leaf_images: vec![6, 9] };
    let s = ColorSet::new(p, 1..=6).unwrap();
    compose_quasi_embedding(&emb, &f1, &split, &s).unwrap()
}
