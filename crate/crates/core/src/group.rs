//! Cyclic and product groups, antisymmetric color sets and arc-colored Cayley digraphs.
//!
//! Elements of `Z_p` are `u32` residues. Elements of `Z_p x Z_r` are [`Node`]s; the
//! cyclic group is embedded as layer 0 so both groups share one arc representation.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Trial-division primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// An element `(x, layer)` of `Z_p x Z_r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Node {
    pub x: u32,
    pub layer: u32,
}

impl Node {
    pub const fn new(x: u32, layer: u32) -> Self {
        Node { x, layer }
    }
}

impl std::fmt::Display for Node {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.x, self.layer)
    }
}

/// An arc between two group elements, tail first.
pub type Arc = (Node, Node);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CyclicGroup {
    p: u32,
}

impl CyclicGroup {
    pub fn new(p: u32) -> Result<Self> {
        if p < 3 {
            return Err(Error::ModulusTooSmall(p as u64));
        }
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        Ok(CyclicGroup { p })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        ((a as u64 + b as u64) % self.p as u64) as u32
    }

    pub fn sub(&self, a: u32, b: u32) -> u32 {
        ((a as u64 + self.p as u64 - (b % self.p) as u64) % self.p as u64) as u32
    }

    pub fn neg(&self, a: u32) -> u32 {
        self.sub(0, a)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ProductGroup {
    p: u32,
    r: u32,
}

impl ProductGroup {
    pub fn new(p: u32, r: u32) -> Result<Self> {
        CyclicGroup::new(p)?;
        if r == 0 {
            return Err(Error::ZeroBlowup);
        }
        Ok(ProductGroup { p, r })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn order(&self) -> usize {
        self.p as usize * self.r as usize
    }

    pub fn add(&self, a: Node, b: Node) -> Node {
        Node {
            x: ((a.x as u64 + b.x as u64) % self.p as u64) as u32,
            layer: ((a.layer as u64 + b.layer as u64) % self.r as u64) as u32,
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = Node> + '_ {
        (0..self.p).flat_map(move |x| (0..self.r).map(move |layer| Node { x, layer }))
    }
}

/// Either `Z_p` or `Z_p x Z_r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Group {
    Cyclic(CyclicGroup),
    Product(ProductGroup),
}

impl Group {
    pub fn p(&self) -> u32 {
        match self {
            Group::Cyclic(g) => g.p(),
            Group::Product(g) => g.p(),
        }
    }

    /// Blow-up factor; 1 for the cyclic group.
    pub fn r(&self) -> u32 {
        match self {
            Group::Cyclic(_) => 1,
            Group::Product(g) => g.r(),
        }
    }

    pub fn add(&self, a: Node, b: Node) -> Node {
        match self {
            Group::Cyclic(g) => Node::new(g.add(a.x, b.x), 0),
            Group::Product(g) => g.add(a, b),
        }
    }

    pub fn elements(&self) -> Vec<Node> {
        let r = self.r();
        (0..self.p()).flat_map(|x| (0..r).map(move |layer| Node { x, layer })).collect()
    }
}

/// An antisymmetric set of nonzero residues mod `p`, kept in insertion order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ColorSet {
    p: u32,
    elements: Vec<u32>,
}

impl ColorSet {
    pub fn empty(p: u32) -> Self {
        ColorSet { p, elements: Vec::new() }
    }

    pub fn new(p: u32, elements: impl IntoIterator<Item = u32>) -> Result<Self> {
        let mut set = ColorSet::empty(p);
        for s in elements {
            set.insert(s)?;
        }
        Ok(set)
    }

    /// Adds `s`, refusing zero, out-of-range residues, repeats, and `s` whose
    /// opposite `p - s` is already present.
    pub fn insert(&mut self, s: u32) -> Result<()> {
        if s == 0 || s >= self.p {
            return Err(Error::InvalidColor { color: s, p: self.p });
        }
        if self.elements.contains(&s) {
            return Err(Error::RepeatedColor(s));
        }
        let opposite = self.p - s;
        if self.elements.contains(&opposite) {
            return Err(Error::SymmetricPair(opposite, s));
        }
        self.elements.push(s);
        Ok(())
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn elements(&self) -> &[u32] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, s: u32) -> bool {
        self.elements.contains(&s)
    }

    /// True when the set meets every pair `{s, p - s}` exactly once.
    pub fn is_maximal(&self) -> bool {
        self.elements.len() == (self.p as usize - 1) / 2
    }

    /// Pairs `{s, p - s}` (listed by their smaller member) not yet touched by the set.
    pub fn free_pairs(&self) -> Vec<u32> {
        (1..=(self.p - 1) / 2).filter(|&s| !self.contains(s) && !self.contains(self.p - s)).collect()
    }
}

/// An arc of a Cayley digraph together with its color `(s, j)`; `j = 0` over `Z_p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColoredArc {
    pub tail: Node,
    pub head: Node,
    pub color: Node,
}

#[derive(Clone, Debug)]
pub struct CayleyDigraph {
    group: Group,
    colors: ColorSet,
    arcs: Vec<ColoredArc>,
}

/// Builds `Cay(G, S)` over `Z_p`, or `Cay(Z_p x Z_r, S x Z_r)` for product groups.
pub fn build_cayley(group: Group, colors: &ColorSet) -> Result<CayleyDigraph> {
    let p = group.p();
    if colors.p() != p {
        return Err(Error::Parameters(format!("color set is over Z_{} but the group is over Z_{}", colors.p(), p)));
    }
    // Re-validate in case the set was deserialized.
    ColorSet::new(p, colors.elements().iter().copied())?;
    let r = group.r();
    let mut arcs = Vec::with_capacity(p as usize * r as usize * colors.len() * r as usize);
    for tail in group.elements() {
        for &s in colors.elements() {
            for j in 0..r {
                let color = Node::new(s, j);
                arcs.push(ColoredArc { tail, head: group.add(tail, color), color });
            }
        }
    }
    arcs.sort();
    Ok(CayleyDigraph { group, colors: colors.clone(), arcs })
}

impl CayleyDigraph {
    pub fn group(&self) -> Group {
        self.group
    }

    pub fn colors(&self) -> &ColorSet {
        &self.colors
    }

    /// Arcs sorted lexicographically by (tail, head, color).
    pub fn arcs(&self) -> &[ColoredArc] {
        &self.arcs
    }

    pub fn out_degree(&self, v: Node) -> usize {
        let start = self.arcs.partition_point(|a| a.tail < v);
        self.arcs[start..].iter().take_while(|a| a.tail == v).count()
    }

    /// Color of the arc `(tail, head)`, if present.
    pub fn color_of(&self, tail: Node, head: Node) -> Option<Node> {
        let dx = (head.x + self.group.p() - tail.x) % self.group.p();
        let r = self.group.r();
        let dl = (head.layer + r - tail.layer) % r;
        (self.colors.contains(dx) && head.x < self.group.p() && head.layer < r).then_some(Node::new(dx, dl))
    }

    /// Underlying simple graph as sorted undirected edges.
    pub fn underlying_edges(&self) -> BTreeSet<(Node, Node)> {
        self.arcs.iter().map(|a| if a.tail < a.head { (a.tail, a.head) } else { (a.head, a.tail) }).collect()
    }
}

/// Splits the arc `(x, y)` of a digraph over `Z_p` into the `r^2` arcs of `K_{r,r}^{(x,y)}`.
pub fn blow_up_arc(arc: (u32, u32), r: u32) -> Result<Vec<Arc>> {
    let (x, y) = arc;
    if x == y {
        return Err(Error::LoopArc(x));
    }
    if r == 0 {
        return Err(Error::ZeroBlowup);
    }
    Ok((0..r).flat_map(|i| (0..r).map(move |j| (Node::new(x, i), Node::new(y, j)))).collect())
}

/// Applies the translation `v -> v + g` to every arc.
pub fn translate(arcs: &[Arc], g: Node, group: &Group) -> Vec<Arc> {
    arcs.iter().map(|&(u, v)| (group.add(u, g), group.add(v, g))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_colors(p: u32) -> ColorSet {
        ColorSet::new(p, 1..=(p - 1) / 2).unwrap()
    }

    #[test]
    fn primality() {
        let primes: Vec<u64> = (0..40).filter(|&n| is_prime(n)).collect();
        assert_eq!(primes, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]);
        assert!(CyclicGroup::new(12).is_err());
        assert_eq!(CyclicGroup::new(2), Err(Error::ModulusTooSmall(2)));
        assert!(ProductGroup::new(11, 0).is_err());
    }

    #[test]
    fn antisymmetry_enforced() {
        let mut s = ColorSet::new(11, [1, 3]).unwrap();
        assert_eq!(s.insert(10), Err(Error::SymmetricPair(1, 10)));
        assert_eq!(s.insert(3), Err(Error::RepeatedColor(3)));
        assert!(s.insert(0).is_err());
        assert!(s.insert(11).is_err());
        s.insert(4).unwrap();
        assert_eq!(s.free_pairs(), vec![2, 5]);
    }

    #[test]
    fn cayley_z13_is_k13() {
        let g = Group::Cyclic(CyclicGroup::new(13).unwrap());
        let d = build_cayley(g, &all_colors(13)).unwrap();
        assert_eq!(d.arcs().len(), 78);
        let edges = d.underlying_edges();
        assert_eq!(edges.len(), 13 * 12 / 2);
        for v in g.elements() {
            assert_eq!(d.out_degree(v), 6);
        }
    }

    #[test]
    fn cayley_empty_colors() {
        let g = Group::Cyclic(CyclicGroup::new(11).unwrap());
        let d = build_cayley(g, &ColorSet::empty(11)).unwrap();
        assert!(d.arcs().is_empty());
    }

    #[test]
    fn cayley_product_is_blowup() {
        let g = Group::Product(ProductGroup::new(11, 2).unwrap());
        let d = build_cayley(g, &ColorSet::new(11, [1, 3, 4, 5, 9]).unwrap()).unwrap();
        assert_eq!(d.arcs().len(), 220);
        let edges = d.underlying_edges();
        assert_eq!(edges.len(), 220);
        // Enumerate K_11(2) directly.
        let mut count = 0;
        let nodes = g.elements();
        for (a, u) in nodes.iter().enumerate() {
            for v in &nodes[a + 1..] {
                if u.x != v.x {
                    count += 1;
                    assert!(edges.contains(&(*u, *v)));
                }
            }
        }
        assert_eq!(count, 220);
    }

    #[test]
    fn colors_must_match_group() {
        let g = Group::Cyclic(CyclicGroup::new(13).unwrap());
        assert!(build_cayley(g, &all_colors(11)).is_err());
    }

    #[test]
    fn blow_up_arcs() {
        assert_eq!(blow_up_arc((0, 6), 1).unwrap(), vec![(Node::new(0, 0), Node::new(6, 0))]);
        assert_eq!(blow_up_arc((0, 6), 2).unwrap().len(), 4);
        let arcs = blow_up_arc((3, 10), 3).unwrap();
        let distinct: BTreeSet<_> = arcs.iter().collect();
        assert_eq!(distinct.len(), 9);
        assert_eq!(blow_up_arc((4, 4), 2), Err(Error::LoopArc(4)));
    }

    #[test]
    fn translations() {
        let g = Group::Cyclic(CyclicGroup::new(13).unwrap());
        let arc = vec![(Node::new(0, 0), Node::new(6, 0))];
        assert_eq!(translate(&arc, Node::new(0, 0), &g), arc);
        assert_eq!(translate(&arc, Node::new(1, 0), &g), vec![(Node::new(1, 0), Node::new(7, 0))]);
    }

    #[test]
    fn color_lookup_survives_translation() {
        let g = Group::Product(ProductGroup::new(7, 3).unwrap());
        let d = build_cayley(g, &ColorSet::new(7, [1, 2, 4]).unwrap()).unwrap();
        for a in d.arcs().iter().step_by(5) {
            for t in g.elements() {
                let moved = translate(&[(a.tail, a.head)], t, &g)[0];
                assert_eq!(d.color_of(moved.0, moved.1), Some(a.color));
            }
        }
    }
}
