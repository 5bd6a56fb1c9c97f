//! Rainbow embeddings of trees and star forests into `Cay(Z_p, S)` and their
//! composition into the quasi-embedding `H`.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::group::{is_prime, ColorSet};
use crate::seed::{stage_rng, Stage};
use crate::split::{Split, StarForest};
use crate::tree::{peeling_ordering, Tree};

/// Seeded restarts before a search gives up.
pub const RESTARTS: u64 = 64;
/// Search nodes explored per restart.
const NODE_BUDGET: u64 = 1 << 20;

fn check_modulus(p: u32) -> Result<()> {
    if p < 3 {
        return Err(Error::ModulusTooSmall(p as u64));
    }
    if !is_prime(p as u64) {
        return Err(Error::NotPrime(p as u64));
    }
    Ok(())
}

/// True when the core-tree embedding is guaranteed to exist: `p > 10` and `10k < 3(p - 1)`.
pub fn in_guaranteed_regime(k: usize, p: u32) -> bool {
    p > 10 && 10 * k < 3 * (p as usize - 1)
}

/// An injective, rainbow, root-to-leaf oriented image of a tree in `Cay(Z_p, S0)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RainbowEmbedding {
    p: u32,
    tree: Tree,
    images: Vec<u32>,
    /// Color of the arc into each vertex; `0` at the root.
    in_colors: Vec<u32>,
    s0: ColorSet,
}

impl RainbowEmbedding {
    /// Validates an explicit vertex map: root at 0, injective, and arc colors
    /// `f(child) - f(parent)` pairwise distinct and antisymmetric.
    pub fn new(tree: Tree, p: u32, images: Vec<u32>) -> Result<Self> {
        check_modulus(p)?;
        let n = tree.vertex_count();
        if images.len() != n {
            return Err(Error::InvalidEmbedding(format!("{} images for {} vertices", images.len(), n)));
        }
        if images[tree.root()] != 0 {
            return Err(Error::InvalidEmbedding("root image must be 0".into()));
        }
        let mut seen = vec![false; p as usize];
        for &y in &images {
            if y >= p || std::mem::replace(&mut seen[y as usize], true) {
                return Err(Error::InvalidEmbedding(format!("image {y} repeated or out of range")));
            }
        }
        let parents = tree.parents();
        let mut in_colors = vec![0; n];
        let mut s0 = ColorSet::empty(p);
        for v in peeling_ordering(&tree).order().iter().skip(1).copied() {
            let u = parents[v].expect("non-root vertex has a parent");
            let c = (images[v] + p - images[u]) % p;
            s0.insert(c)?;
            in_colors[v] = c;
        }
        Ok(RainbowEmbedding { p, tree, images, in_colors, s0 })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn images(&self) -> &[u32] {
        &self.images
    }

    pub fn colors(&self) -> &ColorSet {
        &self.s0
    }

    /// Arcs `(f(parent), f(child), color)` in peeling order.
    pub fn arcs(&self) -> Vec<(u32, u32, u32)> {
        let parents = self.tree.parents();
        peeling_ordering(&self.tree)
            .order()
            .iter()
            .skip(1)
            .map(|&v| {
                let u = parents[v].expect("non-root vertex has a parent");
                (self.images[u], self.images[v], self.in_colors[v])
            })
            .collect()
    }
}

struct CoreSearch<'a> {
    p: u32,
    /// Parent of the vertex added at each depth, as a depth index.
    parent_depth: &'a [usize],
    orders: Vec<Vec<u32>>,
    color_used: Vec<bool>,
    vertex_used: Vec<bool>,
    sums: Vec<u32>,
    nodes: u64,
    exhausted_budget: bool,
}

impl CoreSearch<'_> {
    fn run(&mut self, depth: usize) -> bool {
        if depth == self.sums.len() {
            return true;
        }
        let p = self.p;
        let base = self.sums[self.parent_depth[depth]];
        for idx in 0..self.orders[depth].len() {
            self.nodes += 1;
            if self.nodes > NODE_BUDGET {
                self.exhausted_budget = true;
                return false;
            }
            let a = self.orders[depth][idx];
            let y = (base + a) % p;
            if self.color_used[a as usize] || self.vertex_used[y as usize] {
                continue;
            }
            self.color_used[a as usize] = true;
            self.color_used[(p - a) as usize] = true;
            self.vertex_used[y as usize] = true;
            self.sums[depth] = y;
            if self.run(depth + 1) {
                return true;
            }
            self.color_used[a as usize] = false;
            self.color_used[(p - a) as usize] = false;
            self.vertex_used[y as usize] = false;
            if self.exhausted_budget {
                return false;
            }
        }
        false
    }
}

/// Finds a rainbow embedding of `t0` in `Cay(Z_p, S0)` with `f(root) = 0`.
///
/// Edges are colored in peeling order; the color of edge `i` avoids `±` every
/// earlier color and the new vertex avoids every earlier image. Each depth
/// tries residues in a seeded shuffled order, and the search is restarted
/// with fresh derived seeds when its node budget runs out.
pub fn embed_tree_rainbow(t0: &Tree, p: u32, seed: u64) -> Result<RainbowEmbedding> {
    check_modulus(p)?;
    let k = t0.edge_count();
    if k == 0 {
        return Err(Error::EmptyTree);
    }
    if 2 * k > p as usize - 1 {
        return Err(Error::Regime(format!("{k} edges exceed (p - 1) / 2 = {}", (p - 1) / 2)));
    }
    let order = peeling_ordering(t0);
    let pos = order.positions();
    let parents = t0.parents();
    let parent_depth: Vec<usize> = order.order().iter().map(|&v| parents[v].map_or(0, |u| pos[u])).collect();

    for restart in 0..RESTARTS {
        let mut rng = stage_rng(seed, Stage::CoreEmbedding, restart);
        let orders = (0..=k)
            .map(|_| {
                let mut values: Vec<u32> = (1..p).collect();
                values.shuffle(&mut rng);
                values
            })
            .collect();
        let mut search = CoreSearch {
            p,
            parent_depth: &parent_depth,
            orders,
            color_used: vec![false; p as usize],
            vertex_used: vec![false; p as usize],
            sums: vec![0; k + 1],
            nodes: 0,
            exhausted_budget: false,
        };
        search.vertex_used[0] = true;
        if search.run(1) {
            let mut images = vec![0; t0.vertex_count()];
            for (d, &v) in order.order().iter().enumerate() {
                images[v] = search.sums[d];
            }
            return RainbowEmbedding::new(t0.clone(), p, images);
        }
        if !search.exhausted_budget {
            // The whole space was explored: no embedding exists.
            break;
        }
    }
    Err(Error::NoEmbedding { k, p, in_regime: in_guaranteed_regime(k, p) })
}

struct SumsSearch<'a> {
    p: u32,
    a: &'a [u32],
    b: &'a [u32],
    positions: Vec<usize>,
    orders: Vec<Vec<usize>>,
    b_used: Vec<bool>,
    sum_used: Vec<bool>,
    sigma: Vec<usize>,
    nodes: u64,
    exhausted_budget: bool,
}

impl SumsSearch<'_> {
    fn run(&mut self, depth: usize) -> bool {
        if depth == self.positions.len() {
            return true;
        }
        let i = self.positions[depth];
        for idx in 0..self.orders[depth].len() {
            self.nodes += 1;
            if self.nodes > NODE_BUDGET {
                self.exhausted_budget = true;
                return false;
            }
            let t = self.orders[depth][idx];
            let s = ((self.a[i] + self.b[t]) % self.p) as usize;
            if self.b_used[t] || self.sum_used[s] {
                continue;
            }
            self.b_used[t] = true;
            self.sum_used[s] = true;
            self.sigma[i] = t;
            if self.run(depth + 1) {
                return true;
            }
            self.b_used[t] = false;
            self.sum_used[s] = false;
            if self.exhausted_budget {
                return false;
            }
        }
        false
    }
}

/// Permutation `σ` with `a[i] + b[σ(i)]` pairwise distinct mod `p`, also
/// avoiding every value in `forbidden`.
fn distinct_sums_search(a: &[u32], b: &[u32], p: u32, forbidden: &[u32], seed: u64) -> Result<Vec<usize>> {
    let k = a.len();
    if b.len() != k {
        return Err(Error::ColorCountMismatch { edges: k, colors: b.len() });
    }
    if k >= p as usize {
        return Err(Error::Regime(format!("k = {k} must be below p = {p}")));
    }
    let mut seen = vec![false; p as usize];
    for &x in b {
        if x >= p || std::mem::replace(&mut seen[x as usize], true) {
            return Err(Error::Regime(format!("b must hold {k} distinct residues")));
        }
    }
    let a: Vec<u32> = a.iter().map(|&x| x % p).collect();
    let mut multiplicity = vec![0usize; p as usize];
    for &x in &a {
        multiplicity[x as usize] += 1;
    }
    let mut positions: Vec<usize> = (0..k).collect();
    positions.sort_by_key(|&i| (multiplicity[a[i] as usize], i));

    for restart in 0..RESTARTS {
        let mut rng = stage_rng(seed, Stage::StarForest, restart);
        let orders = (0..k)
            .map(|_| {
                let mut o: Vec<usize> = (0..k).collect();
                o.shuffle(&mut rng);
                o
            })
            .collect();
        let mut sum_used = vec![false; p as usize];
        for &f in forbidden {
            sum_used[(f % p) as usize] = true;
        }
        let mut search = SumsSearch {
            p,
            a: &a,
            b,
            positions: positions.clone(),
            orders,
            b_used: vec![false; k],
            sum_used,
            sigma: vec![0; k],
            nodes: 0,
            exhausted_budget: false,
        };
        if search.run(0) {
            return Ok(search.sigma);
        }
        if !search.exhausted_budget {
            break;
        }
    }
    Err(Error::NoDistinctSums)
}

/// Permutation `σ` of `0..k` such that the sums `a[i] + b[σ(i)]` are pairwise
/// distinct mod `p`. Requires `k < p` and distinct `b`; `a` may repeat.
pub fn distinct_sums_permutation(a: &[u32], b: &[u32], p: u32, seed: u64) -> Result<Vec<usize>> {
    distinct_sums_search(a, b, p, &[], seed)
}

/// Images and colors of the stripped leaves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarForestEmbedding {
    /// Image of each star center, in star order.
    pub centers_image: Vec<u32>,
    /// Color of each forest edge, ordered as [`StarForest::edge_centers`].
    pub leaf_colors: Vec<u32>,
    /// `center image + color` for each forest edge.
    pub leaf_images: Vec<u32>,
}

/// Assigns the colors to the forest edges bijectively so that all leaf images
/// are distinct.
pub fn embed_star_forest(
    forest: &StarForest,
    centers_image: &[u32],
    colors: &ColorSet,
    p: u32,
    seed: u64,
) -> Result<StarForestEmbedding> {
    embed_star_forest_avoiding(forest, centers_image, colors, p, &[], seed)
}

/// As [`embed_star_forest`], with no leaf image in `avoid`.
pub fn embed_star_forest_avoiding(
    forest: &StarForest,
    centers_image: &[u32],
    colors: &ColorSet,
    p: u32,
    avoid: &[u32],
    seed: u64,
) -> Result<StarForestEmbedding> {
    let h = forest.edge_count();
    if colors.len() != h {
        return Err(Error::ColorCountMismatch { edges: h, colors: colors.len() });
    }
    if centers_image.len() != forest.stars.len() {
        return Err(Error::InvalidEmbedding(format!(
            "{} center images for {} stars",
            centers_image.len(),
            forest.stars.len()
        )));
    }
    let mut sorted = centers_image.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::CentersNotInjective);
    }
    let a: Vec<u32> =
        forest.stars.iter().zip(centers_image).flat_map(|(s, &c)| std::iter::repeat_n(c, s.leaves)).collect();
    let sigma = distinct_sums_search(&a, colors.elements(), p, avoid, seed)?;
    let leaf_colors: Vec<u32> = sigma.iter().map(|&t| colors.elements()[t]).collect();
    let leaf_images = a.iter().zip(&leaf_colors).map(|(&c, &s)| (c + s) % p).collect();
    Ok(StarForestEmbedding { centers_image: centers_image.to_vec(), leaf_colors, leaf_images })
}

/// A forest leaf landing on the image of a core vertex other than the root.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Conflict {
    /// Vertex of `Z_p` hit twice.
    pub y: u32,
    /// Image of the core parent of the hit vertex.
    pub x: u32,
    /// Image of the star center whose leaf lands on `y`.
    pub z: u32,
    /// Hit core vertex, as a combined-tree id.
    pub tree_vertex: usize,
    /// Landing leaf, as a combined-tree id.
    pub leaf: usize,
    pub parent: usize,
    pub center: usize,
}

/// `H = f0(T0) ⊕ f1(F)`: the combined tree with its vertex map into `Z_p`.
///
/// Combined-tree ids list the core vertices first, then the forest leaves, and
/// the combined tree is rooted at the core root. Arc `w` is the arc into `w`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuasiEmbedding {
    p: u32,
    colors: ColorSet,
    tree: Tree,
    core_size: usize,
    images: Vec<u32>,
    in_colors: Vec<u32>,
    parents: Vec<Option<usize>>,
    conflicts: Vec<Conflict>,
}

impl QuasiEmbedding {
    pub fn p(&self) -> u32 {
        self.p
    }

    /// The full color set `S`.
    pub fn colors(&self) -> &ColorSet {
        &self.colors
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn core_size(&self) -> usize {
        self.core_size
    }

    pub fn images(&self) -> &[u32] {
        &self.images
    }

    pub fn parent(&self, w: usize) -> Option<usize> {
        self.parents[w]
    }

    pub fn in_color(&self, w: usize) -> u32 {
        self.in_colors[w]
    }

    /// Conflicts ordered by the peeling position of the hit core vertex.
    pub fn conflicts(&self) -> &[Conflict] {
        &self.conflicts
    }

    /// Arcs `(f(parent), f(child), color)`, one per non-root combined vertex, by id.
    pub fn arcs(&self) -> Vec<(u32, u32, u32)> {
        (0..self.tree.vertex_count())
            .filter_map(|w| self.parents[w].map(|u| (self.images[u], self.images[w], self.in_colors[w])))
            .collect()
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.p as usize];
        for (_, head, _) in self.arcs() {
            deg[head as usize] += 1;
        }
        deg
    }
}

/// Joins the core embedding and the forest embedding into `H`, listing every
/// forest leaf that lands on a core image as a conflict.
pub fn compose_quasi_embedding(
    emb: &RainbowEmbedding,
    f1: &StarForestEmbedding,
    split: &Split,
    s: &ColorSet,
) -> Result<QuasiEmbedding> {
    let p = emb.p();
    let forest = &split.forest;
    if f1.leaf_colors.len() != forest.edge_count() {
        return Err(Error::ColorCountMismatch { edges: forest.edge_count(), colors: f1.leaf_colors.len() });
    }
    for (star, &img) in forest.stars.iter().zip(&f1.centers_image) {
        if emb.images()[star.center] != img {
            return Err(Error::CenterMismatch(star.center));
        }
    }
    for &c in &f1.leaf_colors {
        if emb.colors().contains(c) || emb.colors().contains(p - c) {
            return Err(Error::ColorOverlap(c));
        }
    }
    let mut colors = ColorSet::new(p, emb.colors().elements().iter().copied())?;
    for &c in &f1.leaf_colors {
        colors.insert(c)?;
    }
    if colors.len() != s.len() || !s.elements().iter().all(|&c| colors.contains(c)) {
        return Err(Error::InvalidEmbedding("S must be the union of the core and forest colors".into()));
    }
    let mut leaf_seen = vec![false; p as usize];
    for &y in &f1.leaf_images {
        if std::mem::replace(&mut leaf_seen[y as usize], true) {
            return Err(Error::InvalidEmbedding(format!("two forest leaves land on {y}")));
        }
    }

    let n0 = emb.tree().vertex_count();
    let tree = split.combined_tree();
    let n = tree.vertex_count();
    let parents = tree.parents();
    let mut images = emb.images().to_vec();
    images.extend_from_slice(&f1.leaf_images);
    let mut in_colors = vec![0; n];
    for w in 0..n {
        if let Some(u) = parents[w] {
            in_colors[w] = (images[w] + p - images[u]) % p;
        }
    }

    let mut owner = vec![usize::MAX; p as usize];
    for (v, &y) in emb.images().iter().enumerate() {
        owner[y as usize] = v;
    }
    let pos = peeling_ordering(emb.tree()).positions();
    let mut conflicts = Vec::new();
    for leaf in n0..n {
        let v = owner[images[leaf] as usize];
        if v == usize::MAX {
            continue;
        }
        let Some(parent) = parents[v] else {
            return Err(Error::RootLanding(images[leaf]));
        };
        let center = parents[leaf].expect("leaf has a center");
        conflicts.push(Conflict {
            y: images[v],
            x: images[parent],
            z: images[center],
            tree_vertex: v,
            leaf,
            parent,
            center,
        });
    }
    conflicts.sort_by_key(|c| pos[c.tree_vertex]);
    Ok(QuasiEmbedding { p, colors, tree, core_size: n0, images, in_colors, parents, conflicts })
}

/// Extends `s0` to a maximal antisymmetric set by a seeded choice of sign in
/// each free pair; returns the added colors in increasing pair order.
pub fn extend_colors(s0: &ColorSet, rng: &mut ChaCha8Rng) -> Vec<u32> {
    use rand::Rng;
    let p = s0.p();
    s0.free_pairs().into_iter().map(|s| if rng.gen_bool(0.5) { s } else { p - s }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::split::{strip_leaves, Star};

    #[test]
    fn explicit_embeddings_validate() {
        let path = Tree::path(3);
        let emb = RainbowEmbedding::new(path.clone(), 11, vec![0, 1, 3, 6]).unwrap();
        assert_eq!(emb.colors().elements(), &[1, 2, 3]);
        // Colors 1 and 10 are opposite.
        assert!(RainbowEmbedding::new(path.clone(), 11, vec![0, 1, 0, 1]).is_err());
        assert!(RainbowEmbedding::new(Tree::path(2), 11, vec![0, 1, 0]).is_err());
        assert!(RainbowEmbedding::new(Tree::path(2), 11, vec![0, 1, 3]).is_ok());
        assert!(matches!(RainbowEmbedding::new(Tree::star(2), 11, vec![0, 3, 8]), Err(Error::SymmetricPair(3, 8))));
    }

    #[test]
    fn single_edge_any_color() {
        let emb = embed_tree_rainbow(&Tree::path(1), 11, 5).unwrap();
        assert_eq!(emb.images()[0], 0);
        assert_eq!(emb.colors().len(), 1);
    }

    #[test]
    fn rejects_oversized_trees() {
        assert!(matches!(embed_tree_rainbow(&Tree::path(6), 11, 0), Err(Error::Regime(_))));
        assert!(matches!(embed_tree_rainbow(&Tree::path(2), 12, 0), Err(Error::NotPrime(12))));
    }

    #[test]
    fn distinct_sums_trivial_cases() {
        assert_eq!(distinct_sums_permutation(&[3], &[4], 5, 0).unwrap(), vec![0]);
        let sigma = distinct_sums_permutation(&[0, 0], &[1, 2], 5, 0).unwrap();
        let mut sums: Vec<u32> = sigma.iter().enumerate().map(|(i, &t)| [1, 2][t] + [0, 0][i]).collect();
        sums.sort_unstable();
        assert_eq!(sums, vec![1, 2]);
    }

    #[test]
    fn star_forest_examples() {
        let one = StarForest { stars: vec![Star { center: 0, leaves: 1 }] };
        let colors = ColorSet::new(11, [4]).unwrap();
        let e = embed_star_forest(&one, &[0], &colors, 11, 0).unwrap();
        assert_eq!(e.leaf_images, vec![4]);

        let two = StarForest { stars: vec![Star { center: 0, leaves: 1 }, Star { center: 1, leaves: 1 }] };
        let colors = ColorSet::new(11, [2, 5]).unwrap();
        let e = embed_star_forest(&two, &[0, 1], &colors, 11, 0).unwrap();
        assert_ne!(e.leaf_images[0], e.leaf_images[1]);
        assert!(matches!(embed_star_forest(&two, &[0, 0], &colors, 11, 0), Err(Error::CentersNotInjective)));
        assert!(matches!(
            embed_star_forest(&one, &[0], &colors, 11, 0),
            Err(Error::ColorCountMismatch { edges: 1, colors: 2 })
        ));
    }

    #[test]
    fn empty_forest_composes_to_core() {
        let t = Tree::path(3);
        let split = strip_leaves(&t, 0).unwrap();
        let emb = embed_tree_rainbow(&split.t0, 11, 1).unwrap();
        let f1 = StarForestEmbedding { centers_image: vec![], leaf_colors: vec![], leaf_images: vec![] };
        let h = compose_quasi_embedding(&emb, &f1, &split, emb.colors()).unwrap();
        assert!(h.conflicts().is_empty());
        assert_eq!(h.arcs().len(), 3);
    }
}
