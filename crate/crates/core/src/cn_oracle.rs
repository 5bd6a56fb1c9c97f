//! Symbolic check of the leading coefficient behind the core-tree embedding.
//!
//! For a tree with edges `y_1..y_k` in peeling order,
//! `P = Π_{i<j} (y_j² - y_i²) · Π_{i<j} (Σ_{T(0,i)} y - Σ_{T(0,j)} y)` over
//! `F_p`, where `T(0,i)` holds the edges on the path from the root to `x_i`.
//! The oracle expands `P` and reads the coefficient of `Π y_i^{3(i-1)}`.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::group::is_prime;
use crate::tree::{peeling_ordering, Tree};

pub const ORACLE_MAX_EDGES: usize = 4;

type Monomial = [u8; ORACLE_MAX_EDGES];

struct Poly {
    p: u64,
    terms: HashMap<Monomial, u64>,
}

impl Poly {
    fn one(p: u64) -> Self {
        Poly { p, terms: HashMap::from([([0; ORACLE_MAX_EDGES], 1)]) }
    }

    /// Multiplies by `Σ coeff · y_var^power` over the given terms.
    fn mul(&mut self, factor: &[(usize, u8, u64)]) {
        let mut out: HashMap<Monomial, u64> = HashMap::new();
        for (mono, &c) in &self.terms {
            for &(var, power, coeff) in factor {
                let mut m = *mono;
                m[var] += power;
                let e = out.entry(m).or_insert(0);
                *e = (*e + c * coeff) % self.p;
            }
        }
        out.retain(|_, c| *c != 0);
        self.terms = out;
    }
}

/// Coefficient of `y_k^{3(k-1)} ⋯ y_1^0` in `P`, as a residue mod `p`.
pub fn cn_coefficient_oracle(t0: &Tree, p: u32) -> Result<u32> {
    if !is_prime(p as u64) {
        return Err(Error::NotPrime(p as u64));
    }
    let k = t0.edge_count();
    if k > ORACLE_MAX_EDGES {
        return Err(Error::OracleTooLarge(k));
    }
    let p64 = p as u64;
    let order = peeling_ordering(t0);
    let pos = order.positions();
    let parents = t0.parents();
    // path[i][e]: edge e (0-based, edge e enters x_{e+1}) lies on the root path of x_i.
    let path: Vec<Vec<bool>> = order
        .order()
        .iter()
        .map(|&v| {
            let mut on = vec![false; k];
            let mut w = v;
            while let Some(u) = parents[w] {
                on[pos[w] - 1] = true;
                w = u;
            }
            on
        })
        .collect();

    let mut poly = Poly::one(p64);
    for i in 0..k {
        for j in i + 1..k {
            poly.mul(&[(j, 2, 1), (i, 2, p64 - 1)]);
        }
    }
    for i in 1..=k {
        for j in i + 1..=k {
            let factor: Vec<(usize, u8, u64)> = (0..k)
                .filter_map(|e| match (path[i][e], path[j][e]) {
                    (true, false) => Some((e, 1, 1)),
                    (false, true) => Some((e, 1, p64 - 1)),
                    _ => None,
                })
                .collect();
            poly.mul(&factor);
        }
    }
    let mut target = [0u8; ORACLE_MAX_EDGES];
    for (i, t) in target.iter_mut().enumerate().take(k) {
        *t = 3 * i as u8;
    }
    Ok(poly.terms.get(&target).copied().unwrap_or(0) as u32)
}
