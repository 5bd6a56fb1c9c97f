//! Column-wise repair of conflict label matrices so that no row repeats a label.

use crate::error::{Error, Result};
use crate::matching::{max_matching, perfect_matching};

/// Labels of the arcs entering the layers of a conflicted vertex `y`.
///
/// `mx[row][col]` is the label of the copy using arc `((x, col), (y, row))`
/// and `mz[row][col]` that of arc `((z, col), (y, row))`. Row `j` therefore
/// lists every copy entering `(y, j)`, and a copy enters `(y, j)` twice
/// exactly when row `j` repeats its label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConflictMatrixPair {
    pub mx: Vec<Vec<u32>>,
    pub mz: Vec<Vec<u32>>,
    /// Conflicted vertex of `Z_p`.
    pub y: u32,
    pub x: u32,
    pub z: u32,
}

impl ConflictMatrixPair {
    pub fn r(&self) -> usize {
        self.mx.len()
    }

    fn column(m: &[Vec<u32>], col: usize) -> Vec<u32> {
        m.iter().map(|row| row[col]).collect()
    }

    /// Every row of `(mx | mz)` has `2r` distinct entries.
    pub fn rows_distinct(&self) -> bool {
        self.mx.iter().zip(&self.mz).all(|(a, b)| {
            let mut row: Vec<u32> = a.iter().chain(b).copied().collect();
            row.sort_unstable();
            row.windows(2).all(|w| w[0] != w[1])
        })
    }

    /// Row of each label on one side, indexed by `label - 1`.
    pub fn rows_of(m: &[Vec<u32>]) -> Vec<usize> {
        let r = m.len();
        let mut rows = vec![usize::MAX; r * r];
        for (j, row) in m.iter().enumerate() {
            for &l in row {
                rows[l as usize - 1] = j;
            }
        }
        rows
    }

    /// Shape `r × r`, columns repeat-free, and each side a permutation of `1..=r²`.
    pub fn validate(&self) -> Result<()> {
        let r = self.mx.len();
        for m in [&self.mx, &self.mz] {
            if m.len() != r || m.iter().any(|row| row.len() != r) {
                return Err(Error::ColumnRepeat);
            }
            for col in 0..r {
                let mut c = Self::column(m, col);
                c.sort_unstable();
                if c.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::ColumnRepeat);
                }
            }
            let mut seen = vec![false; r * r];
            for &l in m.iter().flatten() {
                if (1..=r * r).contains(&(l as usize)) {
                    seen[l as usize - 1] = true;
                }
            }
            if let Some(missing) = seen.iter().position(|&s| !s) {
                return Err(Error::MissingLabel(missing + 1));
            }
        }
        Ok(())
    }
}

/// Permutes entries within columns of `(mx | mz)` until every row is repeat-free.
///
/// First keeps `mx` fixed and rematches each column of `mz` to rows avoiding
/// each label's `mx` row; this changes only the arcs from `z`. When some
/// column cannot be matched that way, the labels are viewed as an `r`-regular
/// bipartite multigraph between the columns of `mx` and of `mz` and split into
/// `r` perfect matchings; matching `ρ` fills row `ρ` of `mx` and row `ρ + 1`
/// (mod `r`) of `mz`. Columns are processed left to right and candidates in
/// ascending label order.
pub fn hall_repair(pair: &ConflictMatrixPair) -> Result<ConflictMatrixPair> {
    pair.validate()?;
    if pair.rows_distinct() {
        return Ok(pair.clone());
    }
    if let Some(mz) = rematch_right(pair) {
        return Ok(ConflictMatrixPair { mz, ..pair.clone() });
    }
    let r = pair.r();
    if r < 2 {
        return Err(Error::Parameters("a conflict cannot be repaired with r = 1".into()));
    }
    let (mx, mz) = factorize(pair);
    let out = ConflictMatrixPair { mx, mz, ..pair.clone() };
    debug_assert!(out.rows_distinct());
    Ok(out)
}

#[allow(clippy::needless_range_loop)]
fn rematch_right(pair: &ConflictMatrixPair) -> Option<Vec<Vec<u32>>> {
    let r = pair.r();
    let x_row = ConflictMatrixPair::rows_of(&pair.mx);
    let mut mz = vec![vec![0u32; r]; r];
    for col in 0..r {
        let mut labels = ConflictMatrixPair::column(&pair.mz, col);
        labels.sort_unstable();
        let adj: Vec<Vec<usize>> =
            labels.iter().map(|&l| (0..r).filter(|&row| row != x_row[l as usize - 1]).collect()).collect();
        let rows = perfect_matching(&adj, r)?;
        for (l, row) in labels.into_iter().zip(rows) {
            mz[row][col] = l;
        }
    }
    Some(mz)
}

fn factorize(pair: &ConflictMatrixPair) -> (Vec<Vec<u32>>, Vec<Vec<u32>>) {
    let r = pair.r();
    let mut x_col = vec![0usize; r * r];
    let mut z_col = vec![0usize; r * r];
    for (m, cols) in [(&pair.mx, &mut x_col), (&pair.mz, &mut z_col)] {
        for row in m.iter() {
            for (c, &l) in row.iter().enumerate() {
                cols[l as usize - 1] = c;
            }
        }
    }
    let mut remaining: Vec<bool> = vec![true; r * r];
    let mut mx = vec![vec![0u32; r]; r];
    let mut mz = vec![vec![0u32; r]; r];
    for rho in 0..r {
        // Left: mx columns; right: mz columns; one edge per remaining label.
        let adj: Vec<Vec<usize>> = (0..r)
            .map(|c| {
                let mut zs: Vec<usize> =
                    (0..r * r).filter(|&l| remaining[l] && x_col[l] == c).map(|l| z_col[l]).collect();
                zs.dedup();
                zs
            })
            .collect();
        let m = max_matching(&adj, r);
        for (c, zc) in m.into_iter().enumerate() {
            // A regular bipartite multigraph always has a perfect matching.
            let zc = zc.expect("regular bipartite multigraph has a perfect matching");
            let l = (0..r * r)
                .find(|&l| remaining[l] && x_col[l] == c && z_col[l] == zc)
                .expect("matched edge carries a label");
            remaining[l] = false;
            mx[rho][c] = l as u32 + 1;
            mz[(rho + 1) % r][zc] = l as u32 + 1;
        }
    }
    (mx, mz)
}
