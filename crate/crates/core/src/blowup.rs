//! Lifting `H` into the blow-up, repairing conflicts, and closing under
//! translation to decompose `K_p(r)`.
//!
//! Copy `ℓ = (i + 1) + r j` gives every combined-tree vertex `w` a layer
//! `L_ℓ(w) = λ_w · (i, j) mod r` for a vector `λ_w ∈ Z_r²`. The arc into `w`
//! of copy `ℓ` is `((f(parent), L_ℓ(parent)), (f(w), L_ℓ(w)))`. When the
//! vectors of the two ends of an arc form an invertible matrix, the `r²`
//! copies use each arc of `K_{r,r}` over that `H`-arc exactly once. The
//! plain lift takes `λ_w = (1, depth(w))`.

use rayon::prelude::*;

use crate::decomposition::{Decomposition, Metadata, TreeCopy};
use crate::error::{Error, Result};
use crate::group::{is_prime, translate, Arc, ColorSet, Group, Node, ProductGroup};
use crate::hall::{hall_repair, ConflictMatrixPair};
use crate::rainbow::{
    compose_quasi_embedding, embed_star_forest_avoiding, embed_tree_rainbow, extend_colors, Conflict, QuasiEmbedding,
    RESTARTS,
};
use crate::seed::{derive_seed, stage_rng, Stage};
use crate::split::{strip_leaves, Split, StarForest};
use crate::target::{TargetKind, TargetSpec, Vertex};
use crate::tree::{canonical_form, canonical_form_of_edges, leaf_count, peeling_ordering, Tree};

/// `(i, j)` with `ℓ = (i + 1) + r j`.
pub fn label_coords(label: u32, r: u32) -> (u32, u32) {
    ((label - 1) % r, (label - 1) / r)
}

pub fn label_of_coords(i: u32, j: u32, r: u32) -> u32 {
    i + 1 + r * j
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn layer(lambda: (u32, u32), label: u32, r: u32) -> u32 {
    let (i, j) = label_coords(label, r);
    (lambda.0 * i + lambda.1 * j) % r
}

fn det_is_unit(a: (u32, u32), b: (u32, u32), r: u32) -> bool {
    let det = (a.0 * b.1 % r + r * r - a.1 * b.0 % r) % r;
    gcd(det, r) == 1
}

/// Block index of every label under `λ`, renumbered by first occurrence.
fn partition_signature(lambda: (u32, u32), r: u32) -> Vec<u32> {
    let mut rename = vec![u32::MAX; r as usize];
    let mut next = 0;
    (1..=r * r)
        .map(|l| {
            let c = layer(lambda, l, r) as usize;
            if rename[c] == u32::MAX {
                rename[c] = next;
                next += 1;
            }
            rename[c]
        })
        .collect()
}

/// Some layer class of `λ` is also a layer class of `μ`.
fn shares_block(lambda: (u32, u32), mu: (u32, u32), r: u32) -> bool {
    (0..r).any(|c| {
        let mut values = (1..=r * r).filter(|&l| layer(lambda, l, r) == c).map(|l| layer(mu, l, r));
        match values.next() {
            Some(first) => values.all(|v| v == first),
            None => false,
        }
    })
}

/// Layer vectors for every combined-tree vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftPlan {
    r: u32,
    lambdas: Vec<(u32, u32)>,
}

impl LiftPlan {
    /// The plain lift `λ_w = (1, depth(w))`.
    pub fn plain(h: &QuasiEmbedding, r: u32) -> Self {
        let lambdas = h.tree().depths().into_iter().map(|d| (1 % r, d as u32 % r)).collect();
        LiftPlan { r, lambdas }
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn lambdas(&self) -> &[(u32, u32)] {
        &self.lambdas
    }

    pub fn layer(&self, w: usize, label: u32) -> u32 {
        layer(self.lambdas[w], label, self.r)
    }
}

/// Primitive vectors of `Z_r²`, one per distinct layer partition.
fn partition_classes(r: u32) -> Vec<(u32, u32)> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for a in 0..r {
        for b in 0..r {
            if gcd(gcd(a, b), r) == 1 && seen.insert(partition_signature((a, b), r)) {
                out.push((a, b));
            }
        }
    }
    out
}

/// Chooses layer vectors so that tree arcs partition their `K_{r,r}` and, at
/// every conflict, the hit vertex and the landing leaf's center share no layer
/// class. The second condition lets each conflict be repaired by moving only
/// the landing leaf's arcs.
///
/// Core vertices are assigned in peeling order by backtracking, preferring
/// the plain lift; leaves take the first vector compatible with their center.
pub fn plan_lifts(h: &QuasiEmbedding, r: u32) -> Option<LiftPlan> {
    let n0 = h.core_size();
    let n = h.tree().vertex_count();
    let classes = partition_classes(r);
    let order: Vec<usize> = peeling_ordering(h.tree()).order().iter().copied().filter(|&w| w < n0).collect();
    let pos = {
        let mut pos = vec![usize::MAX; n];
        for (k, &w) in order.iter().enumerate() {
            pos[w] = k;
        }
        pos
    };
    let mut partners: Vec<Vec<usize>> = vec![Vec::new(); n0];
    for c in h.conflicts() {
        partners[c.tree_vertex].push(c.center);
        partners[c.center].push(c.tree_vertex);
    }

    let mut lambdas = vec![(0u32, 0u32); n];
    let root = h.tree().root();
    lambdas[root] = (1 % r, 0);
    let mut budget: u64 = 1 << 18;
    if !assign_core(h, r, &classes, &order, &pos, &partners, 1, &mut lambdas, &mut budget) {
        return None;
    }
    for w in n0..n {
        let c = h.parent(w).expect("leaf has a center");
        let preferred = (lambdas[c].0, (lambdas[c].1 + 1) % r);
        lambdas[w] =
            std::iter::once(preferred).chain(classes.iter().copied()).find(|&l| det_is_unit(lambdas[c], l, r))?;
    }
    Some(LiftPlan { r, lambdas })
}

#[allow(clippy::too_many_arguments)]
fn assign_core(
    h: &QuasiEmbedding,
    r: u32,
    classes: &[(u32, u32)],
    order: &[usize],
    pos: &[usize],
    partners: &[Vec<usize>],
    k: usize,
    lambdas: &mut [(u32, u32)],
    budget: &mut u64,
) -> bool {
    if k == order.len() {
        return true;
    }
    let w = order[k];
    let parent = h.parent(w).expect("non-root core vertex has a parent");
    let preferred = (lambdas[parent].0, (lambdas[parent].1 + 1) % r);
    let preferred_sig = partition_signature(preferred, r);
    let candidates = std::iter::once(preferred)
        .chain(classes.iter().copied().filter(|&c| partition_signature(c, r) != preferred_sig));
    for cand in candidates {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        if !det_is_unit(lambdas[parent], cand, r) {
            continue;
        }
        if partners[w].iter().any(|&v| pos[v] < k && shares_block(cand, lambdas[v], r)) {
            continue;
        }
        lambdas[w] = cand;
        if assign_core(h, r, classes, order, pos, partners, k + 1, lambdas, budget) {
            return true;
        }
    }
    false
}

/// Image of `H` under the plain lift with parameters `(i, j)`: the root goes
/// to `(0, i)` and an arc of color `s` adds `(s, j)`.
pub fn lift_copy(h: &QuasiEmbedding, i: u32, j: u32, r: u32) -> Result<Vec<Arc>> {
    if r == 0 {
        return Err(Error::ZeroBlowup);
    }
    if i >= r || j >= r {
        return Err(Error::Parameters(format!("lift parameters ({i}, {j}) out of range for r = {r}")));
    }
    let family = lift_family(h, &LiftPlan::plain(h, r));
    Ok(family.copy_arcs(h, label_of_coords(i, j, r)))
}

/// Assignment of the arcs of `H(r)` to copy labels `1..=r²`.
///
/// `assignment[w][ℓ - 1]` holds the (tail layer, head layer) of copy `ℓ` on
/// the arc into combined vertex `w`; the root's entry is empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledCopyFamily {
    r: u32,
    assignment: Vec<Vec<(u32, u32)>>,
}

pub fn lift_family(h: &QuasiEmbedding, plan: &LiftPlan) -> LabeledCopyFamily {
    let r = plan.r();
    let n = h.tree().vertex_count();
    let assignment = (0..n)
        .map(|w| match h.parent(w) {
            None => Vec::new(),
            Some(u) => (1..=r * r).map(|l| (plan.layer(u, l), plan.layer(w, l))).collect(),
        })
        .collect();
    LabeledCopyFamily { r, assignment }
}

impl LabeledCopyFamily {
    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn label_count(&self) -> u32 {
        self.r * self.r
    }

    /// (tail layer, head layer) of copy `label` on the arc into `w`.
    pub fn arc(&self, w: usize, label: u32) -> (u32, u32) {
        self.assignment[w][label as usize - 1]
    }

    /// The copy using blown-up arc `((·, tail), (·, head))` into `w`.
    pub fn label_of(&self, w: usize, tail: u32, head: u32) -> Option<u32> {
        self.assignment[w].iter().position(|&a| a == (tail, head)).map(|k| k as u32 + 1)
    }

    /// Every arc of every `K_{r,r}` carries exactly one label.
    pub fn is_partition(&self) -> bool {
        let r = self.r as usize;
        self.assignment.iter().filter(|a| !a.is_empty()).all(|a| {
            let mut seen = vec![false; r * r];
            a.iter().all(|&(t, h)| !std::mem::replace(&mut seen[t as usize * r + h as usize], true))
        })
    }

    pub fn copy_arcs(&self, h: &QuasiEmbedding, label: u32) -> Vec<Arc> {
        let images = h.images();
        (0..self.assignment.len())
            .filter_map(|w| {
                h.parent(w).map(|u| {
                    let (t, hd) = self.arc(w, label);
                    (Node::new(images[u], t), Node::new(images[w], hd))
                })
            })
            .collect()
    }

    /// Layer of every combined vertex in copy `label`, or `None` when some
    /// arc leaves a vertex from a layer other than the one it was entered at.
    pub fn layers(&self, h: &QuasiEmbedding, label: u32) -> Option<Vec<u32>> {
        let n = self.assignment.len();
        let mut layers = vec![u32::MAX; n];
        for w in peeling_ordering(h.tree()).order().iter().copied() {
            if let Some(u) = h.parent(w) {
                let (t, hd) = self.arc(w, label);
                if layers[u] == u32::MAX {
                    layers[u] = t;
                } else if layers[u] != t {
                    return None;
                }
                layers[w] = hd;
            }
        }
        if layers[h.tree().root()] == u32::MAX {
            layers[h.tree().root()] = 0;
        }
        Some(layers)
    }
}

fn in_degree(h: &QuasiEmbedding, y: u32) -> usize {
    h.arcs().iter().filter(|a| a.1 == y).count()
}

/// Reads the label matrices at a conflict from the current assignment.
pub fn conflict_matrices(
    family: &LabeledCopyFamily,
    h: &QuasiEmbedding,
    conflict: &Conflict,
) -> Result<ConflictMatrixPair> {
    let indegree = in_degree(h, conflict.y);
    if indegree != 2 {
        return Err(Error::NotConflicted { vertex: conflict.y, indegree });
    }
    let r = family.r();
    let matrix = |w: usize| -> Result<Vec<Vec<u32>>> {
        (0..r).map(|row| (0..r).map(|col| family.label_of(w, col, row).ok_or(Error::ColumnRepeat)).collect()).collect()
    };
    Ok(ConflictMatrixPair {
        mx: matrix(conflict.tree_vertex)?,
        mz: matrix(conflict.leaf)?,
        y: conflict.y,
        x: conflict.x,
        z: conflict.z,
    })
}

/// Writes repaired matrices back onto the two arcs entering the conflict.
pub fn apply_matrices(
    family: &LabeledCopyFamily,
    conflict: &Conflict,
    repaired: &ConflictMatrixPair,
) -> Result<LabeledCopyFamily> {
    repaired.validate()?;
    let mut out = family.clone();
    for (w, m) in [(conflict.tree_vertex, &repaired.mx), (conflict.leaf, &repaired.mz)] {
        for (row, entries) in m.iter().enumerate() {
            for (col, &l) in entries.iter().enumerate() {
                out.assignment[w][l as usize - 1] = (col as u32, row as u32);
            }
        }
    }
    Ok(out)
}

/// Moves the tails of the arcs leaving the conflicted vertex to each copy's
/// new layer there (its row in the repaired `mx`), keeping every head.
pub fn reassign_outgoing(
    family: &LabeledCopyFamily,
    h: &QuasiEmbedding,
    conflict: &Conflict,
    repaired: &ConflictMatrixPair,
) -> Result<LabeledCopyFamily> {
    let r = family.r() as usize;
    let rows = ConflictMatrixPair::rows_of(&repaired.mx);
    if let Some(missing) = rows.iter().position(|&row| row == usize::MAX) {
        return Err(Error::MissingLabel(missing + 1));
    }
    let v = conflict.tree_vertex;
    let mut out = family.clone();
    for c in (0..h.tree().vertex_count()).filter(|&w| h.parent(w) == Some(v)) {
        let mut seen = vec![false; r * r];
        for l in 1..=family.label_count() {
            let tail = rows[l as usize - 1] as u32;
            let (_, head) = family.arc(c, l);
            if std::mem::replace(&mut seen[tail as usize * r + head as usize], true) {
                return Err(Error::ReassignNotBijective { vertex: conflict.y, target: h.images()[c] });
            }
            out.assignment[c][l as usize - 1] = (tail, head);
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BlowupOptions {
    /// Relax `p > 10` and the leaf-count requirement.
    pub best_effort: bool,
}

/// Everything built for one successful blow-up run.
#[derive(Clone, Debug)]
pub struct BlowupConstruction {
    pub tree: Tree,
    pub p: u32,
    pub r: u32,
    pub seed: u64,
    pub attempt: u64,
    pub split: Split,
    pub h: QuasiEmbedding,
    pub family: LabeledCopyFamily,
    pub conflicts_repaired: usize,
    pub best_effort: bool,
}

impl BlowupConstruction {
    /// Combined-tree id of every input vertex.
    pub fn combined_id_of_input(&self) -> Vec<usize> {
        let labels = self.split.combined_labels();
        let mut id = vec![0; labels.len()];
        for (c, &v) in labels.iter().enumerate() {
            id[v] = c;
        }
        id
    }

    /// Arcs of the `r²` base copies, labels `1..=r²`.
    pub fn base_copies(&self) -> Vec<Vec<Arc>> {
        (1..=self.family.label_count()).map(|l| self.family.copy_arcs(&self.h, l)).collect()
    }

    pub fn metadata(&self) -> Metadata {
        Metadata {
            seed: self.seed,
            attempt: self.attempt,
            conflicts_repaired: self.conflicts_repaired,
            core_edges: self.split.t0.edge_count(),
            forest_edges: self.split.forest.edge_count(),
            best_effort: self.best_effort,
            colors: self.h.colors().elements().to_vec(),
            deleted_leaf: None,
            tournament: None,
        }
    }

    /// The `p` translates by `(x, 0)` of the base copies; copy `x r² + ℓ`
    /// is base copy `ℓ` shifted by `x`.
    pub fn translated_copies(&self, base: &[Vec<Arc>]) -> Vec<(u32, Vec<Arc>)> {
        let group = Group::Product(ProductGroup::new(self.p, self.r).expect("validated"));
        let r2 = self.family.label_count();
        (0..self.p)
            .into_par_iter()
            .flat_map_iter(|x| {
                let g = Node::new(x, 0);
                let group = &group;
                base.iter()
                    .enumerate()
                    .map(move |(k, arcs)| (x * r2 + k as u32 + 1, translate(arcs, g, group)))
                    .collect::<Vec<_>>()
            })
            .collect()
    }

    pub fn into_decomposition(self) -> Decomposition {
        let base = self.base_copies();
        let copies = self
            .translated_copies(&base)
            .into_iter()
            .map(|(label, arcs)| TreeCopy {
                label,
                arcs: arcs.into_iter().map(|(u, v)| (Vertex::Pair(u), Vertex::Pair(v))).collect(),
            })
            .collect();
        Decomposition {
            target: TargetSpec::new(TargetKind::BlowupComplete, self.p, self.r).expect("validated"),
            metadata: self.metadata(),
            tree: self.tree,
            copies,
        }
    }
}

fn trivial_split(tree: &Tree) -> Split {
    let n = tree.vertex_count();
    Split {
        t0: tree.with_root(0).expect("vertex 0 exists"),
        t0_labels: (0..n).collect(),
        forest: StarForest::default(),
        leaf_labels: Vec::new(),
    }
}

/// Splits off `⌈2m/5⌉` leaves, or fewer under best effort.
fn split_tree(tree: &Tree, best_effort: bool) -> Result<Split> {
    let m = tree.edge_count();
    let needed = (2 * m).div_ceil(5);
    let leaves = leaf_count(tree);
    let count = if leaves >= needed {
        needed
    } else if best_effort {
        leaves.saturating_sub(1)
    } else {
        return Err(Error::Regime(format!("tree has {leaves} leaves, fewer than ⌈2m/5⌉ = {needed}")));
    };
    if m < 2 {
        return Ok(trivial_split(tree));
    }
    let mut c = count;
    loop {
        match strip_leaves(tree, c) {
            Ok(split) => return Ok(split),
            Err(_) if best_effort && c > 0 => c -= 1,
            Err(e) => return Err(e),
        }
    }
}

/// Checks shared by every blow-up based construction.
pub(crate) fn validate_blowup_input(tree: &Tree, p: u32, r: u32, best_effort: bool) -> Result<()> {
    if p < 3 {
        return Err(Error::ModulusTooSmall(p as u64));
    }
    if !is_prime(p as u64) {
        return Err(Error::NotPrime(p as u64));
    }
    if r == 0 {
        return Err(Error::ZeroBlowup);
    }
    let m = tree.edge_count();
    if 2 * m != p as usize - 1 {
        return Err(Error::Parameters(format!("tree has {m} edges but p = {p} needs (p - 1) / 2 = {}", (p - 1) / 2)));
    }
    if p <= 10 && !best_effort {
        return Err(Error::Regime(format!("p = {p} must exceed 10")));
    }
    Ok(())
}

/// Runs the pipeline up to (and including) conflict repair, restarting with
/// fresh derived seeds when the forest embedding, the lift plan, or a repair
/// fails.
pub fn construct_blowup(tree: &Tree, p: u32, r: u32, seed: u64, opts: BlowupOptions) -> Result<BlowupConstruction> {
    validate_blowup_input(tree, p, r, opts.best_effort)?;
    let split = split_tree(tree, opts.best_effort)?;
    let target_form = canonical_form(tree);
    let mut last_failure = String::new();

    for attempt in 0..RESTARTS {
        let s = derive_seed(seed, Stage::Restart, attempt);
        let emb = embed_tree_rainbow(&split.t0, p, s)?;
        let extra = extend_colors(emb.colors(), &mut stage_rng(s, Stage::ColorExtension, 0));
        let forest_colors = ColorSet::new(p, extra.iter().copied())?;
        let centers: Vec<u32> = split.forest.stars.iter().map(|st| emb.images()[st.center]).collect();
        let f1 = match embed_star_forest_avoiding(&split.forest, &centers, &forest_colors, p, &[0], s) {
            Ok(f1) => f1,
            Err(e) => {
                last_failure = e.to_string();
                continue;
            }
        };
        let all = ColorSet::new(p, emb.colors().elements().iter().chain(&extra).copied())?;
        let h = compose_quasi_embedding(&emb, &f1, &split, &all)?;
        let Some(plan) = plan_lifts(&h, r) else {
            last_failure = format!("no lift plan separates the {} conflicts", h.conflicts().len());
            continue;
        };
        let mut family = lift_family(&h, &plan);
        let mut repair_failure = None;
        for c in h.conflicts() {
            let step = conflict_matrices(&family, &h, c).and_then(|m| hall_repair(&m)).and_then(|rep| {
                let f = apply_matrices(&family, c, &rep)?;
                reassign_outgoing(&f, &h, c, &rep)
            });
            match step {
                Ok(f) => family = f,
                Err(e) => {
                    repair_failure = Some(e.to_string());
                    break;
                }
            }
        }
        if let Some(e) = repair_failure {
            last_failure = e;
            continue;
        }
        let all_trees = (1..=family.label_count())
            .all(|l| canonical_form_of_edges(&family.copy_arcs(&h, l)).as_deref() == Some(target_form.as_slice()));
        if !all_trees {
            last_failure = "a repaired copy is not isomorphic to the tree".into();
            continue;
        }
        return Ok(BlowupConstruction {
            tree: tree.clone(),
            p,
            r,
            seed,
            attempt,
            conflicts_repaired: h.conflicts().len(),
            split,
            h,
            family,
            best_effort: opts.best_effort,
        });
    }
    Err(Error::Construction { stage: "blow-up", attempts: RESTARTS as usize, detail: last_failure })
}

/// Decomposes `K_p(r)` into `r² p` copies of `tree`, which must have
/// `(p - 1) / 2` edges.
pub fn decompose_blowup(tree: &Tree, p: u32, r: u32, seed: u64, opts: BlowupOptions) -> Result<Decomposition> {
    construct_blowup(tree, p, r, seed, opts).map(BlowupConstruction::into_decomposition)
}
