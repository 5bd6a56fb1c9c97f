//! Decompositions of `K_{4m+2} \ M`, `K_{6m+5} \ e` and `K_n \ K_t` built on
//! top of the blow-up decomposition.
//!
//! For the apex targets the tree loses one leaf `z` (attached at `y`), the
//! rest decomposes `K_p(r)`, and every copy regains its leaf through one
//! extra arc leaving its image of `y`: either to one of the `t = (r + 1) / 2`
//! apexes or along a circulant tournament inside the coclique.

use crate::blowup::{construct_blowup, validate_blowup_input, BlowupConstruction, BlowupOptions};
use crate::decomposition::{Decomposition, TreeCopy};
use crate::error::{Error, Result};
use crate::group::Node;
use crate::matching::perfect_matching;
use crate::rainbow::RESTARTS;
use crate::seed::{derive_seed, Stage};
use crate::target::{TargetKind, TargetSpec, Vertex};
use crate::tree::{leaf_count, Tree};

/// Circulant tournament on `Z_r`: `u -> u + d` for `d` in the connection set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tournament {
    r: u32,
    offsets: Vec<u32>,
}

impl Tournament {
    /// Requires odd `r` and a connection set holding exactly one of `d`, `r - d`
    /// for each `d` in `1..=(r - 1) / 2`.
    pub fn circulant(r: u32, offsets: Vec<u32>) -> Result<Self> {
        if r.is_multiple_of(2) {
            return Err(Error::EvenTournament(r));
        }
        let half = (r - 1) / 2;
        let valid = offsets.len() == half as usize
            && (1..=half).all(|d| offsets.contains(&d) != offsets.contains(&(r - d)))
            && offsets.iter().all(|&d| d > 0 && d < r);
        if !valid {
            return Err(Error::Parameters(format!("{offsets:?} is not a tournament connection set mod {r}")));
        }
        Ok(Tournament { r, offsets })
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn offsets(&self) -> &[u32] {
        &self.offsets
    }

    pub fn out_neighbors(&self, u: u32) -> Vec<u32> {
        self.offsets.iter().map(|&d| (u + d) % self.r).collect()
    }

    pub fn arcs(&self) -> Vec<(u32, u32)> {
        (0..self.r).flat_map(|u| self.out_neighbors(u).into_iter().map(move |v| (u, v))).collect()
    }
}

/// The circulant tournament with connection set `{1, …, (r - 1) / 2}`.
pub fn regular_tournament(r: u32) -> Result<Tournament> {
    if r < 3 && r % 2 == 1 {
        return Err(Error::Parameters(format!("a regular tournament needs r >= 3, got {r}")));
    }
    Tournament::circulant(r, (1..=(r.saturating_sub(1)) / 2).collect())
}

/// Connection sets tried by the assignment search: the standard one, its
/// reflection, then every other choice of signs.
fn connection_sets(r: u32) -> Vec<Vec<u32>> {
    let half = (r - 1) / 2;
    let from_mask =
        |mask: u32| -> Vec<u32> { (1..=half).map(|d| if mask >> (d - 1) & 1 == 1 { r - d } else { d }).collect() };
    let all = (1u32 << half) - 1;
    let mut sets = vec![from_mask(0), from_mask(all)];
    sets.extend((1..all).map(from_mask));
    sets.dedup();
    sets
}

/// Where a copy's restored leaf goes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExtraArc {
    Apex(u32),
    /// Arc inside the coclique to the given layer.
    Tournament(u32),
}

/// Copies waiting for their restored leaf, grouped by the layer of their
/// attachment vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssignmentProblem {
    pub r: u32,
    pub apex_count: u32,
    /// `hosts[a]`: labels whose attachment vertex lies in layer `a`.
    pub hosts: Vec<Vec<u32>>,
    /// `occupied[ℓ - 1]`: other layers copy `ℓ` already uses in the
    /// attachment vertex's coclique.
    pub occupied: Vec<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeafAssignment {
    pub tournament: Tournament,
    /// `(label, extra arc)` per layer, labels ascending.
    pub per_layer: Vec<Vec<(u32, ExtraArc)>>,
}

impl LeafAssignment {
    pub fn arc_of(&self, label: u32) -> Option<(u32, ExtraArc)> {
        self.per_layer
            .iter()
            .enumerate()
            .find_map(|(a, row)| row.iter().find(|(l, _)| *l == label).map(|&(_, arc)| (a as u32, arc)))
    }
}

fn match_layer(problem: &AssignmentProblem, tournament: &Tournament, a: u32) -> Option<Vec<(u32, ExtraArc)>> {
    let arcs: Vec<ExtraArc> = (0..problem.apex_count)
        .map(ExtraArc::Apex)
        .chain(tournament.out_neighbors(a).into_iter().map(ExtraArc::Tournament))
        .collect();
    let mut labels = problem.hosts[a as usize].clone();
    labels.sort_unstable();
    let adj: Vec<Vec<usize>> = labels
        .iter()
        .map(|&l| {
            (0..arcs.len())
                .filter(|&k| match arcs[k] {
                    ExtraArc::Apex(_) => true,
                    ExtraArc::Tournament(b) => !problem.occupied[l as usize - 1].contains(&b),
                })
                .collect()
        })
        .collect();
    let m = perfect_matching(&adj, arcs.len())?;
    Some(labels.into_iter().zip(m).map(|(l, k)| (l, arcs[k])).collect())
}

/// Gives every hosted copy one extra arc at its attachment vertex so that no
/// tournament arc points into a vertex the copy already uses.
///
/// Each layer is an independent bipartite matching between its hosted labels
/// and its `t + (r - 1) / 2` extra arcs. Connection sets of the circulant
/// tournament are tried in turn until every layer matches.
pub fn leaf_assignment_search(problem: &AssignmentProblem) -> Result<LeafAssignment> {
    let r = problem.r;
    if r.is_multiple_of(2) {
        return Err(Error::EvenTournament(r));
    }
    let per_vertex = problem.apex_count + (r - 1) / 2;
    if let Some(a) = problem.hosts.iter().position(|h| h.len() != per_vertex as usize) {
        return Err(Error::Parameters(format!(
            "layer {a} hosts {} copies but has {per_vertex} extra arcs",
            problem.hosts[a].len()
        )));
    }
    let mut failed_layer = 0;
    for offsets in connection_sets(r) {
        let tournament = Tournament::circulant(r, offsets)?;
        let mut per_layer = Vec::with_capacity(r as usize);
        for a in 0..r {
            match match_layer(problem, &tournament, a) {
                Some(row) => per_layer.push(row),
                None => {
                    failed_layer = a;
                    break;
                }
            }
        }
        if per_layer.len() == r as usize {
            return Ok(LeafAssignment { tournament, per_layer });
        }
    }
    Err(Error::NoLeafAssignment(failed_layer))
}

/// The leaf whose removal leaves the most leaves (smallest index on ties),
/// with its neighbor.
pub fn deletion_leaf(tree: &Tree) -> Result<(usize, usize)> {
    if tree.edge_count() < 2 {
        return Err(Error::Parameters("tree needs at least 2 edges".into()));
    }
    let base = leaf_count(tree);
    tree.leaves()
        .into_iter()
        .map(|z| {
            let y = tree.neighbors(z)[0];
            let after = base - 1 + usize::from(tree.degree(y) == 2);
            (z, y, after)
        })
        .max_by_key(|&(z, _, after)| (after, std::cmp::Reverse(z)))
        .map(|(z, y, _)| (z, y))
        .ok_or(Error::EmptyTree)
}

/// `tree` without leaf `z`; vertices above `z` shift down by one.
pub fn remove_leaf(tree: &Tree, z: usize) -> Result<Tree> {
    if !tree.is_leaf(z) {
        return Err(Error::InvalidTree(format!("{z} is not a leaf")));
    }
    let shift = |v: usize| if v > z { v - 1 } else { v };
    let edges = tree.edges().iter().filter(|&&(u, v)| u != z && v != z).map(|&(u, v)| (shift(u), shift(v))).collect();
    Tree::new(tree.vertex_count() - 1, edges, 0)
}

/// Relabels `(x, i)` as `2x + i`, covering `K_{4m+2}` minus the perfect
/// matching `{2x, 2x + 1}`.
pub fn decompose_matching_complement(tree: &Tree, p: u32, seed: u64, opts: BlowupOptions) -> Result<Decomposition> {
    let mut d = construct_blowup(tree, p, 2, seed, opts)?.into_decomposition();
    let relabel = |v: Vertex| match v {
        Vertex::Pair(n) => Vertex::Index(2 * n.x + n.layer),
        other => other,
    };
    for c in &mut d.copies {
        for arc in &mut c.arcs {
            *arc = (relabel(arc.0), relabel(arc.1));
        }
    }
    d.target = TargetSpec::new(TargetKind::MatchingComplement, p, 2)?;
    Ok(d)
}

/// Decomposes `K_{3p+2} \ e` (`r = 3`, apexes `α`, `β`) into copies of a tree
/// with `(p + 1) / 2` edges.
pub fn decompose_near_complete(tree: &Tree, p: u32, seed: u64, opts: BlowupOptions) -> Result<Decomposition> {
    decompose_with_apexes(tree, p, 3, TargetKind::NearComplete, seed, opts)
}

/// Decomposes `K_{rp+t} \ K_t`, `t = (r + 1) / 2`, for odd `r >= 3`.
pub fn decompose_clique_complement(
    tree: &Tree,
    p: u32,
    r: u32,
    seed: u64,
    opts: BlowupOptions,
) -> Result<Decomposition> {
    decompose_with_apexes(tree, p, r, TargetKind::CliqueComplement, seed, opts)
}

fn assignment_problem(base: &BlowupConstruction, attach: usize) -> Option<AssignmentProblem> {
    let h = &base.h;
    let r = base.r;
    let y = base.combined_id_of_input()[attach];
    let partner = (0..h.tree().vertex_count()).find(|&w| w != y && h.images()[w] == h.images()[y]);
    let mut hosts = vec![Vec::new(); r as usize];
    let mut occupied = Vec::with_capacity((r * r) as usize);
    for l in 1..=base.family.label_count() {
        let layers = base.family.layers(h, l)?;
        hosts[layers[y] as usize].push(l);
        occupied.push(partner.map(|w| vec![layers[w]]).unwrap_or_default());
    }
    Some(AssignmentProblem { r, apex_count: r.div_ceil(2), hosts, occupied })
}

fn decompose_with_apexes(
    tree: &Tree,
    p: u32,
    r: u32,
    kind: TargetKind,
    seed: u64,
    opts: BlowupOptions,
) -> Result<Decomposition> {
    let spec = TargetSpec::new(kind, p, r)?;
    let (z, y) = deletion_leaf(tree)?;
    let reduced = remove_leaf(tree, z)?;
    validate_blowup_input(&reduced, p, r, opts.best_effort)?;
    let attach = if y > z { y - 1 } else { y };

    let mut last_failure = String::new();
    for attempt in 0..RESTARTS {
        let base = construct_blowup(&reduced, p, r, derive_seed(seed, Stage::Assignment, attempt), opts)?;
        let Some(problem) = assignment_problem(&base, attach) else {
            last_failure = "a base copy is not connected".into();
            continue;
        };
        let assignment = match leaf_assignment_search(&problem) {
            Ok(a) => a,
            Err(e) => {
                last_failure = e.to_string();
                continue;
            }
        };
        let y_image = base.h.images()[base.combined_id_of_input()[attach]];
        let r2 = base.family.label_count();
        let base_copies = base.base_copies();
        let copies = base
            .translated_copies(&base_copies)
            .into_iter()
            .map(|(label, arcs)| {
                let x = (label - 1) / r2;
                let l = (label - 1) % r2 + 1;
                let (a, extra) = assignment.arc_of(l).expect("every label is assigned");
                let tail = Node::new((y_image + x) % p, a);
                let head = match extra {
                    ExtraArc::Apex(k) => Vertex::Apex(k),
                    ExtraArc::Tournament(b) => Vertex::Pair(Node::new(tail.x, b)),
                };
                let mut arcs: Vec<(Vertex, Vertex)> =
                    arcs.into_iter().map(|(u, v)| (Vertex::Pair(u), Vertex::Pair(v))).collect();
                arcs.push((Vertex::Pair(tail), head));
                TreeCopy { label, arcs }
            })
            .collect();
        let mut metadata = base.metadata();
        metadata.seed = seed;
        metadata.attempt = attempt;
        metadata.deleted_leaf = Some(z);
        metadata.tournament = Some(assignment.tournament.offsets().to_vec());
        return Ok(Decomposition { target: spec, tree: tree.clone(), copies, metadata });
    }
    Err(Error::Construction { stage: "leaf assignment", attempts: RESTARTS as usize, detail: last_failure })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_tournaments() {
        let t = regular_tournament(3).unwrap();
        assert_eq!(t.arcs(), vec![(0, 1), (1, 2), (2, 0)]);
        assert!(matches!(regular_tournament(4), Err(Error::EvenTournament(4))));
        assert!(Tournament::circulant(5, vec![1, 4]).is_err());
        assert_eq!(connection_sets(5), vec![vec![1, 2], vec![4, 3], vec![4, 2], vec![1, 3]]);
        assert_eq!(connection_sets(3), vec![vec![1], vec![2]]);
    }

    #[test]
    fn reverse_orientation_rescues_a_blocked_layer() {
        // Every copy at layer 0 already uses layer 1, so 0 -> 1 is unusable.
        let problem = AssignmentProblem {
            r: 3,
            apex_count: 2,
            hosts: vec![vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 9]],
            occupied: (1..=9).map(|l| if l <= 3 { vec![1] } else { vec![] }).collect(),
        };
        let a = leaf_assignment_search(&problem).unwrap();
        assert_eq!(a.tournament.offsets(), &[2]);
        let blocked = AssignmentProblem {
            occupied: (1..=9).map(|l| if l <= 3 { vec![1, 2] } else { vec![] }).collect(),
            ..problem
        };
        assert!(matches!(leaf_assignment_search(&blocked), Err(Error::NoLeafAssignment(_))));
    }

    #[test]
    fn leaf_deletion_rule() {
        // Path 0-1-2-3: deleting 0 or 3 keeps 2 leaves; ties go to 0.
        assert_eq!(deletion_leaf(&Tree::path(3)).unwrap(), (0, 1));
        let t = remove_leaf(&Tree::path(3), 0).unwrap();
        assert_eq!(t.edges(), &[(0, 1), (1, 2)]);
        // Spider 0-{1,2,3}, 3-4: deleting 4 turns 3 into a leaf.
        let spider = Tree::new(5, vec![(0, 1), (0, 2), (0, 3), (3, 4)], 0).unwrap();
        assert_eq!(deletion_leaf(&spider).unwrap(), (4, 3));
    }
}
