//! Random trees: uniform labeled trees by Prüfer decoding and uniform
//! unlabeled (free) trees by exact-count recursive sampling.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::{BigUint, RandBigInt};
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::seed::{stage_rng, Stage};
use crate::tree::{rooted_encoding, Tree};

/// Uniform labeled tree with `m` edges on vertices `0..=m`, rooted at 0.
pub fn sample_labeled_tree(m: usize, seed: u64) -> Result<Tree> {
    if m == 0 {
        return Err(Error::EmptyTree);
    }
    let n = m + 1;
    let mut rng = stage_rng(seed, Stage::Sampler, 0);
    let code: Vec<usize> = (0..n.saturating_sub(2)).map(|_| rng.gen_range(0..n)).collect();
    Ok(Tree::new(n, prufer_decode(&code, n), 0).expect("Prüfer decoding yields a tree"))
}

/// Edges of the labeled tree on `0..n` with Prüfer sequence `code` (length n - 2).
pub fn prufer_decode(code: &[usize], n: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; n];
    for &c in code {
        degree[c] += 1;
    }
    let mut leaves: BinaryHeap<Reverse<usize>> = (0..n).filter(|&v| degree[v] == 1).map(Reverse).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &c in code {
        let Reverse(leaf) = leaves.pop().expect("a leaf always remains");
        edges.push((leaf, c));
        degree[c] -= 1;
        if degree[c] == 1 {
            leaves.push(Reverse(c));
        }
    }
    let Reverse(u) = leaves.pop().expect("two leaves remain");
    let Reverse(v) = leaves.pop().expect("two leaves remain");
    edges.push((u, v));
    edges
}

/// Growth constant of rooted unlabeled trees; tables are stored divided by
/// its powers so floating-point weights stay in range for large sizes.
const OTTER_RHO: f64 = 2.955_765_285_651_995;

/// Exact counts of forests of rooted unlabeled trees whose components have at
/// most `bound` vertices, for total sizes `0..=len`.
struct ForestTable {
    exact: Vec<BigUint>,
    /// `exact[k] / rho^k`.
    scaled: Vec<f64>,
}

/// Rooted tree counts `t[1..=len]` (index 0 unused) plus cached forest tables.
struct Counts {
    len: usize,
    rooted: Vec<BigUint>,
    rooted_scaled: Vec<f64>,
    forests: HashMap<usize, Arc<ForestTable>>,
}

fn scaled(x: &BigUint, k: usize) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let bits = x.bits();
    let shift = bits.saturating_sub(64);
    let mantissa = (x >> shift).to_f64().expect("64-bit value converts");
    (mantissa.ln() + shift as f64 * std::f64::consts::LN_2 - k as f64 * OTTER_RHO.ln()).exp()
}

impl Counts {
    fn new(len: usize) -> Self {
        // t_{k+1} = f(k) where f counts unbounded forests; n f(n) = sum c(k) f(n-k)
        // with c(k) = sum_{d | k} d t_d.
        let mut rooted = vec![BigUint::zero(); len + 2];
        let mut forest = vec![BigUint::zero(); len + 1];
        let mut c = vec![BigUint::zero(); len + 1];
        forest[0] = BigUint::one();
        rooted[1] = BigUint::one();
        for k in 1..=len {
            for d in (1..=k).filter(|d| k % d == 0) {
                c[k] += &rooted[d] * d;
            }
            let mut acc = BigUint::zero();
            for i in 1..=k {
                acc += &c[i] * &forest[k - i];
            }
            forest[k] = acc / k;
            rooted[k + 1] = forest[k].clone();
        }
        let rooted_scaled = rooted.iter().enumerate().map(|(k, x)| scaled(x, k)).collect();
        Counts { len, rooted, rooted_scaled, forests: HashMap::new() }
    }

    fn forest(&mut self, bound: usize) -> Arc<ForestTable> {
        let bound = bound.min(self.len);
        if let Some(t) = self.forests.get(&bound) {
            return Arc::clone(t);
        }
        let len = self.len;
        let mut c = vec![BigUint::zero(); len + 1];
        for (k, ck) in c.iter_mut().enumerate().skip(1) {
            for d in (1..=k.min(bound)).filter(|d| k % d == 0) {
                *ck += &self.rooted[d] * d;
            }
        }
        let mut exact = vec![BigUint::zero(); len + 1];
        exact[0] = BigUint::one();
        for k in 1..=len {
            let mut acc = BigUint::zero();
            for i in 1..=k {
                acc += &c[i] * &exact[k - i];
            }
            exact[k] = acc / k;
        }
        let scaled = exact.iter().enumerate().map(|(k, x)| scaled(x, k)).collect();
        let table = Arc::new(ForestTable { exact, scaled });
        self.forests.insert(bound, Arc::clone(&table));
        table
    }
}

static COUNTS: OnceLock<Mutex<Option<Arc<Mutex<Counts>>>>> = OnceLock::new();

/// Process-wide count tables covering sizes up to at least `len`.
fn counts(len: usize) -> Arc<Mutex<Counts>> {
    let cell = COUNTS.get_or_init(|| Mutex::new(None));
    let mut guard = cell.lock().expect("count cache poisoned");
    if let Some(c) = guard.as_ref() {
        if c.lock().expect("count cache poisoned").len >= len {
            return Arc::clone(c);
        }
    }
    let fresh = Arc::new(Mutex::new(Counts::new(len.max(16))));
    *guard = Some(Arc::clone(&fresh));
    fresh
}

/// Snapshot of the tables one sample needs, so sampling runs without the lock.
struct Tables {
    rooted: Vec<BigUint>,
    rooted_scaled: Vec<f64>,
    unbounded: Arc<ForestTable>,
}

/// Rooted shape in preorder: `parent[i] < i` for `i > 0`.
type Shape = Vec<usize>;

fn append_subtree(shape: &mut Shape, attach: usize, sub: &Shape) {
    let offset = shape.len();
    shape.push(attach);
    shape.extend(sub.iter().skip(1).map(|&p| p + offset));
}

/// Picks `(j, d)` with probability `d t_d F(n - j d) / (n F(n))`, exactly.
fn pick_component(
    tables: &Tables,
    forest: &ForestTable,
    bound: usize,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> (usize, usize) {
    let total = &forest.exact[n] * n;
    let draw = rng.gen_biguint_below(&total);
    let target = scaled(&draw, n);
    let candidates = (1..=bound.min(n)).flat_map(|d| (1..=n / d).map(move |j| (j, d)));

    let mut acc = 0.0f64;
    for (j, d) in candidates.clone() {
        let rest = n - j * d;
        // d t_d F(rest) / rho^n = d * (t_d / rho^d) * (F(rest) / rho^rest) * rho^{d - j d}
        let w = d as f64 * tables.rooted_scaled[d] * forest.scaled[rest] * OTTER_RHO.powi(d as i32 - (j * d) as i32);
        let next = acc + w;
        if target < next {
            let tolerance = 1e-9 * next.max(f64::MIN_POSITIVE);
            if (next - target) > tolerance && (target - acc) > tolerance {
                return (j, d);
            }
            break;
        }
        acc = next;
    }
    // Too close to a boundary for floating point: redo the scan exactly.
    let mut acc = BigUint::zero();
    for (j, d) in candidates {
        acc += &tables.rooted[d] * &forest.exact[n - j * d] * d;
        if draw < acc {
            return (j, d);
        }
    }
    unreachable!("weights sum to n F(n)")
}

/// Uniform multiset of rooted trees, each of at most `bound` vertices, totalling `n`.
fn sample_forest(
    tables: &Tables,
    forest: &ForestTable,
    bound: usize,
    mut n: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Shape> {
    let mut parts = Vec::new();
    while n > 0 {
        let (j, d) = pick_component(tables, forest, bound, n, rng);
        let tree = sample_rooted(tables, d, rng);
        parts.extend(std::iter::repeat_n(tree, j));
        n -= j * d;
    }
    parts
}

fn sample_rooted(tables: &Tables, n: usize, rng: &mut ChaCha8Rng) -> Shape {
    let mut shape = vec![usize::MAX];
    for sub in sample_forest(tables, &tables.unbounded, n - 1, n - 1, rng) {
        append_subtree(&mut shape, 0, &sub);
    }
    shape
}

fn shape_to_tree(shape: &Shape) -> Tree {
    let edges = shape.iter().enumerate().skip(1).map(|(i, &p)| (p, i)).collect();
    Tree::new(shape.len(), edges, 0).expect("preorder parent array is a tree")
}

/// Uniform unlabeled tree with `m` edges, rooted at vertex 0.
///
/// Free trees on `n` vertices are either rooted at their unique centroid, with
/// every branch below `n / 2` vertices, or (for even `n`) two rooted trees of
/// `n / 2` vertices joined at their roots. Both classes are counted exactly.
pub fn sample_unlabeled_tree(m: usize, seed: u64) -> Result<Tree> {
    if m == 0 {
        return Err(Error::EmptyTree);
    }
    let n = m + 1;
    let mut rng = stage_rng(seed, Stage::Sampler, 1);
    let shared = counts(n);
    let (tables, centroid_forest) = {
        let mut c = shared.lock().expect("count cache poisoned");
        let unbounded = c.forest(usize::MAX);
        let centroid_forest = c.forest((n - 1) / 2);
        (Tables { rooted: c.rooted.clone(), rooted_scaled: c.rooted_scaled.clone(), unbounded }, centroid_forest)
    };
    let bound = (n - 1) / 2;
    let uni = centroid_forest.exact[n - 1].clone();
    let half = n / 2;
    let bi = if n.is_multiple_of(2) {
        let t = &tables.rooted[half];
        t * (t + 1u32) / 2u32
    } else {
        BigUint::zero()
    };
    if rng.gen_biguint_below(&(&uni + &bi)) < uni {
        let mut shape = vec![usize::MAX];
        for sub in sample_forest(&tables, &centroid_forest, bound, n - 1, &mut rng) {
            append_subtree(&mut shape, 0, &sub);
        }
        return Ok(shape_to_tree(&shape));
    }
    // Unordered pair of rooted trees: an ordered draw of a distinct pair is
    // twice as likely as a repeated one, so distinct pairs are kept with
    // probability one half.
    loop {
        let a = sample_rooted(&tables, half, &mut rng);
        let b = sample_rooted(&tables, half, &mut rng);
        let same = rooted_encoding(&shape_to_tree(&a), 0) == rooted_encoding(&shape_to_tree(&b), 0);
        if same || rng.gen_bool(0.5) {
            let mut shape = a;
            append_subtree(&mut shape, 0, &b);
            return Ok(shape_to_tree(&shape));
        }
    }
}

/// Number of rooted unlabeled trees on `n` vertices.
pub fn rooted_tree_count(n: usize) -> BigUint {
    if n == 0 {
        return BigUint::zero();
    }
    let shared = counts(n);
    let c = shared.lock().expect("count cache poisoned");
    c.rooted[n].clone()
}

/// Number of free (unlabeled, unrooted) trees on `n` vertices.
pub fn free_tree_count(n: usize) -> BigUint {
    if n <= 2 {
        return BigUint::from(u32::from(n > 0));
    }
    let shared = counts(n);
    let mut c = shared.lock().expect("count cache poisoned");
    let uni = c.forest((n - 1) / 2).exact[n - 1].clone();
    if n.is_multiple_of(2) {
        let t = &c.rooted[n / 2];
        uni + t * (t + 1u32) / 2u32
    } else {
        uni
    }
}
