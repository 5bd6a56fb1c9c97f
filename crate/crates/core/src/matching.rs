//! Augmenting-path bipartite matching.

/// Maximum matching of left vertices `0..adj.len()` into right vertices `0..right`.
///
/// Left vertices are processed in order and candidates in the order listed, so
/// the result is deterministic. Returns `match_left[l] = Some(r)`.
pub fn max_matching(adj: &[Vec<usize>], right: usize) -> Vec<Option<usize>> {
    let mut match_right: Vec<Option<usize>> = vec![None; right];
    let mut visited = vec![false; right];
    for l in 0..adj.len() {
        visited.iter_mut().for_each(|v| *v = false);
        augment(l, adj, &mut match_right, &mut visited);
    }
    let mut match_left = vec![None; adj.len()];
    for (r, l) in match_right.iter().enumerate() {
        if let Some(l) = *l {
            match_left[l] = Some(r);
        }
    }
    match_left
}

fn augment(l: usize, adj: &[Vec<usize>], match_right: &mut [Option<usize>], visited: &mut [bool]) -> bool {
    for &r in &adj[l] {
        if visited[r] {
            continue;
        }
        visited[r] = true;
        if match_right[r].is_none_or(|other| augment(other, adj, match_right, visited)) {
            match_right[r] = Some(l);
            return true;
        }
    }
    false
}

/// A matching saturating every left vertex, if one exists.
pub fn perfect_matching(adj: &[Vec<usize>], right: usize) -> Option<Vec<usize>> {
    max_matching(adj, right).into_iter().collect()
}
