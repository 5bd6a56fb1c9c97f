//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

mod common;

use std::collections::HashSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use ringel::blowup::{decompose_blowup, BlowupOptions};
use ringel::cn_oracle::cn_coefficient_oracle;
use ringel::complements::{decompose_clique_complement, decompose_matching_complement, decompose_near_complete};
use ringel::decomposition::Decomposition;
use ringel::hall::{hall_repair, ConflictMatrixPair};
use ringel::rainbow::distinct_sums_permutation;
use ringel::sample::sample_unlabeled_tree;
use ringel::target::{build_target, TargetKind, Vertex};
use ringel::tree::{leaf_count, Tree};
use ringel::verify::{verify_decomposition, Certificate};

use common::*;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

/// Verifies one decomposition; `Err` carries the reason it does not count.
fn check(d: ringel::Result<Decomposition>, copies: usize) -> Result<Certificate, String> {
    let d = d.map_err(|e| e.to_string())?;
    let cert = Certificate::from_decomposition(&d);
    let report = verify_decomposition(&cert).map_err(|e| e.to_string())?;
    if let Some(c) = report.counterexample {
        return Err(c.to_string());
    }
    if cert.copies.len() != copies {
        return Err(format!("{} copies, expected {copies}", cert.copies.len()));
    }
    Ok(cert)
}

/// Runs `instances` in parallel; each must verify within `limit`.
fn run_instances<F>(instances: Vec<(String, F)>, limit: Duration) -> Outcome
where
    F: Fn() -> Result<Certificate, String> + Send + Sync,
{
    let results: Vec<(String, Result<Duration, String>)> = instances
        .par_iter()
        .map(|(name, f)| {
            let start = Instant::now();
            let r = f().and_then(|_| {
                let t = start.elapsed();
                if t <= limit {
                    Ok(t)
                } else {
                    Err(format!("took {t:?}"))
                }
            });
            (name.clone(), r)
        })
        .collect();
    let slowest = results.iter().filter_map(|(_, r)| r.as_ref().ok()).max().copied().unwrap_or_default();
    match results.iter().find(|(_, r)| r.is_err()) {
        Some((name, Err(e))) => outcome(false, format!("{name}: {e}")),
        _ => outcome(true, format!("{} instances verified, slowest {:.2}s", results.len(), slowest.as_secs_f64())),
    }
}

fn blowup_instances(ps: &[u32], rs: &[u32], random: usize) -> Vec<(String, impl Fn() -> Result<Certificate, String>)> {
    let mut out = Vec::new();
    for &p in ps {
        let m = (p as usize - 1) / 2;
        for (k, tree) in battery(m, random).into_iter().enumerate() {
            for &r in rs {
                let tree = tree.clone();
                out.push((format!("p={p} r={r} tree#{k}"), move || {
                    check(decompose_blowup(&tree, p, r, k as u64, BlowupOptions::default()), (r * r * p) as usize)
                }));
            }
        }
    }
    out
}

fn criterion_1() -> Outcome {
    run_instances(blowup_instances(&[11, 13, 17, 19, 23], &[2, 3], 20), Duration::from_secs(10))
}

fn criterion_2() -> Outcome {
    let mut instances = Vec::new();
    for p in [11u32, 13] {
        let m = (p as usize - 1) / 2;
        for (k, tree) in battery(m, 20).into_iter().enumerate() {
            instances.push((format!("p={p} tree#{k}"), move || {
                let d = decompose_matching_complement(&tree, p, k as u64, BlowupOptions::default());
                let cert = check(d, (4 * p) as usize)?;
                let matched = cert.copies.iter().flat_map(|c| &c.arcs).any(|&(u, v)| match (u, v) {
                    (Vertex::Index(a), Vertex::Index(b)) => a / 2 == b / 2,
                    _ => true,
                });
                if matched {
                    return Err("a copy uses a matching edge".into());
                }
                Ok(cert)
            }));
        }
    }
    run_instances(instances, Duration::from_secs(10))
}

fn criterion_3() -> Outcome {
    let mut instances = Vec::new();
    for p in [11u32, 13] {
        let m = (p as usize - 1) / 2;
        let trees = apex_battery(m, 10);
        assert!(trees.len() >= 10);
        for (k, tree) in trees.into_iter().enumerate() {
            instances.push((format!("p={p} tree#{k}"), move || {
                check(decompose_near_complete(&tree, p, k as u64, BlowupOptions::default()), (9 * p) as usize)
            }));
        }
    }
    run_instances(instances, Duration::from_secs(30))
}

fn criterion_4() -> Outcome {
    let (p, r) = (11u32, 5u32);
    let target = build_target(TargetKind::CliqueComplement, p, r).unwrap();
    if target.vertices().len() != 58 {
        return outcome(false, format!("target has {} vertices", target.vertices().len()));
    }
    let trees = apex_battery(5, 6);
    let instances: Vec<_> = trees
        .into_iter()
        .enumerate()
        .map(|(k, tree)| {
            (format!("tree#{k}"), move || {
                check(
                    decompose_clique_complement(&tree, p, r, k as u64, BlowupOptions::default()),
                    (r * r * p) as usize,
                )
            })
        })
        .collect();
    run_instances(instances, Duration::from_secs(120))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut cases = 0;
    for r in 2..=8usize {
        for _ in 0..1000 {
            let mut labels: Vec<u32> = (1..=(r * r) as u32).collect();
            let as_matrix = |v: &[u32]| v.chunks(r).map(<[u32]>::to_vec).collect::<Vec<_>>();
            let mx = as_matrix(&labels);
            rand::seq::SliceRandom::shuffle(labels.as_mut_slice(), &mut rng);
            let input = ConflictMatrixPair { mx, mz: as_matrix(&labels), y: 0, x: 0, z: 0 };
            let out = match hall_repair(&input) {
                Ok(o) => o,
                Err(e) => return outcome(false, format!("r={r}: {e}")),
            };
            for c in 0..r {
                for (a, b) in [(&input.mx, &out.mx), (&input.mz, &out.mz)] {
                    let mut x: Vec<u32> = a.iter().map(|row| row[c]).collect();
                    let mut y: Vec<u32> = b.iter().map(|row| row[c]).collect();
                    x.sort_unstable();
                    y.sort_unstable();
                    if x != y {
                        return outcome(false, format!("r={r}: column {c} changed content"));
                    }
                }
            }
            for (a, b) in out.mx.iter().zip(&out.mz) {
                let row: HashSet<u32> = a.iter().chain(b).copied().collect();
                if row.len() != 2 * r {
                    return outcome(false, format!("r={r}: row repeats a label"));
                }
            }
            cases += 1;
        }
    }
    let t = start.elapsed();
    outcome(t < Duration::from_secs(60), format!("{cases} matrix pairs repaired in {:.2}s", t.as_secs_f64()))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut cases = 0;
    for p in [11u32, 13, 17] {
        let mut rng = ChaCha8Rng::seed_from_u64(p as u64);
        for k in 2..p as usize {
            for case in 0..200u64 {
                let a: Vec<u32> = (0..k).map(|_| rng.gen_range(0..p)).collect();
                let mut pool: Vec<u32> = (0..p).collect();
                rand::seq::SliceRandom::shuffle(pool.as_mut_slice(), &mut rng);
                let b = pool[..k].to_vec();
                let sigma = match distinct_sums_permutation(&a, &b, p, case) {
                    Ok(s) => s,
                    Err(e) => return outcome(false, format!("p={p} k={k}: {e}")),
                };
                let mut perm = sigma.clone();
                perm.sort_unstable();
                let sums: HashSet<u32> = a.iter().zip(&sigma).map(|(&x, &i)| (x + b[i]) % p).collect();
                if perm != (0..k).collect::<Vec<_>>() || sums.len() != k {
                    return outcome(false, format!("p={p} k={k}: invalid permutation {sigma:?}"));
                }
                cases += 1;
            }
        }
    }
    let t = start.elapsed();
    outcome(t < Duration::from_secs(60), format!("{cases} instances solved in {:.2}s", t.as_secs_f64()))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    for n in 2..=5 {
        for tree in free_trees_brute(n) {
            for root in 0..n {
                let rooted = tree.with_root(root).unwrap();
                for p in [13u32, 17] {
                    match cn_coefficient_oracle(&rooted, p) {
                        Ok(c) if c == 1 || c == p - 1 => checked += 1,
                        Ok(c) => {
                            return outcome(
                                false,
                                format!("{:?} rooted at {root}, p={p}: coefficient {c}", tree.edges()),
                            )
                        }
                        Err(e) => return outcome(false, e.to_string()),
                    }
                }
            }
        }
    }
    let t = start.elapsed();
    outcome(t < Duration::from_secs(60), format!("{checked} rooted trees × primes give ±1 in {:.2}s", t.as_secs_f64()))
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let m = 500;
    let samples = 10_000u64;
    let counts: Vec<usize> =
        (0..samples).into_par_iter().map(|s| leaf_count(&sample_unlabeled_tree(m, s).unwrap())).collect();
    let mean = counts.iter().sum::<usize>() as f64 / samples as f64;
    let target = 0.438 * m as f64;
    let rel = (mean - target).abs() / target;
    let meeting = counts.iter().filter(|&&l| l >= leaf_bound(m)).count() as f64 / samples as f64;
    let t = start.elapsed();
    outcome(
        rel <= 0.05 && meeting > 0.9 && t < Duration::from_secs(300),
        format!(
            "mean leaves {mean:.2} vs {target:.1} (off by {:.2}%), {:.2}% meet ⌈2m/5⌉, {:.1}s",
            100.0 * rel,
            100.0 * meeting,
            t.as_secs_f64()
        ),
    )
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let certs: Vec<Certificate> = vec![
        Certificate::from_decomposition(&decompose_blowup(&Tree::star(5), 11, 2, 0, BlowupOptions::default()).unwrap()),
        Certificate::from_decomposition(&decompose_blowup(&broom(6), 13, 3, 1, BlowupOptions::default()).unwrap()),
        Certificate::from_decomposition(
            &decompose_near_complete(&Tree::star(6), 11, 2, BlowupOptions::default()).unwrap(),
        ),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut killed = 0;
    for cert in &certs {
        if !verify_decomposition(cert).unwrap().passed {
            return outcome(false, "an unmutated certificate fails");
        }
        let vertices = build_target(cert.kind, cert.p, cert.r).unwrap().vertices().to_vec();
        for _ in 0..100 {
            let mut mutant = cert.clone();
            let c = rng.gen_range(0..mutant.copies.len());
            let a = rng.gen_range(0..mutant.copies[c].arcs.len());
            let arc = &mut mutant.copies[c].arcs[a];
            let end = if rng.gen_bool(0.5) { &mut arc.0 } else { &mut arc.1 };
            let old = *end;
            while *end == old {
                *end = vertices[rng.gen_range(0..vertices.len())];
            }
            match verify_decomposition(&mutant) {
                Ok(r) if r.passed => {
                    return outcome(false, format!("mutant of copy {} passes", mutant.copies[c].label))
                }
                _ => killed += 1,
            }
        }
    }
    let t = start.elapsed();
    outcome(t < Duration::from_secs(60), format!("{killed}/300 mutants rejected in {:.2}s", t.as_secs_f64()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("blow-up decompositions of K_p(r)", criterion_1),
        ("K_{4m+2} minus a perfect matching", criterion_2),
        ("K_{6m+5} minus an edge", criterion_3),
        ("K_58 minus K_3", criterion_4),
        ("matrix row repair", criterion_5),
        ("distinct-sums permutations", criterion_6),
        ("coefficient oracle", criterion_7),
        ("leaf statistic", criterion_8),
        ("mutation robustness", criterion_9),
    ];
    let mut all = true;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        all &= o.passed;
        println!("criterion {} [{name}]: {} ({})", k + 1, if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
