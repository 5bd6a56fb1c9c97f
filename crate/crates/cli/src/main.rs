use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use ringel::blowup::{decompose_blowup, BlowupOptions};
use ringel::cn_oracle::cn_coefficient_oracle;
use ringel::complements::{decompose_clique_complement, decompose_matching_complement, decompose_near_complete};
use ringel::decomposition::Decomposition;
use ringel::sample::{sample_labeled_tree, sample_unlabeled_tree};
use ringel::target::{TargetKind, TargetSpec};
use ringel::tree::{leaf_count, Tree};
use ringel::verify::{read_certificate, verify_decomposition, write_certificate};
use ringel::Error;

const EXIT_FAIL: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_CONSTRUCTION: u8 = 3;

#[derive(Parser)]
#[command(name = "ringel", version, about = "Tree decompositions of blow-up complete graphs")]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a random tree and report its leaf count.
    SampleTree {
        #[arg(long)]
        m: usize,
        #[arg(long, value_enum, default_value_t = SampleKind::Unlabeled)]
        sample: SampleKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Tree file to write; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a decomposition and write its certificate.
    Decompose(DecomposeArgs),
    /// Check a certificate: exit 0 pass, 1 fail, 2 malformed.
    Verify { path: PathBuf },
    /// Expand the nullstellensatz coefficient for a tree with at most 4 edges.
    CnOracle {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        p: u32,
    },
    /// Leaf-count statistics over many sampled trees.
    LeafStats {
        #[arg(long)]
        m: usize,
        #[arg(long, value_enum, default_value_t = SampleKind::Unlabeled)]
        sample: SampleKind,
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SampleKind {
    Labeled,
    Unlabeled,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Blowup,
    MatchingComplement,
    NearComplete,
    CliqueComplement,
}

impl Kind {
    fn target(self) -> TargetKind {
        match self {
            Kind::Blowup => TargetKind::BlowupComplete,
            Kind::MatchingComplement => TargetKind::MatchingComplement,
            Kind::NearComplete => TargetKind::NearComplete,
            Kind::CliqueComplement => TargetKind::CliqueComplement,
        }
    }

    fn default_r(self) -> Option<u32> {
        match self {
            Kind::MatchingComplement => Some(2),
            Kind::NearComplete => Some(3),
            Kind::Blowup | Kind::CliqueComplement => None,
        }
    }

    /// Tree size the target needs: `(p - 1) / 2`, one more with apexes.
    fn tree_edges(self, p: u32) -> usize {
        let m = (p as usize - 1) / 2;
        match self {
            Kind::Blowup | Kind::MatchingComplement => m,
            Kind::NearComplete | Kind::CliqueComplement => m + 1,
        }
    }
}

#[derive(Args)]
struct DecomposeArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    p: u32,
    /// Coclique size; fixed by the kind for matching-complement and near-complete.
    #[arg(long)]
    r: Option<u32>,
    #[arg(long, conflicts_with = "sample", required_unless_present = "sample")]
    tree: Option<PathBuf>,
    #[arg(long, value_enum)]
    sample: Option<SampleKind>,
    /// Edges of the sampled tree; defaults to the size the target needs.
    #[arg(long, requires = "sample")]
    m: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Run outside the guaranteed regime (small p, few leaves).
    #[arg(long)]
    best_effort: bool,
}

/// A failed command: message and exit code.
struct Failure(String, u8);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotPrime(_)
            | Error::ModulusTooSmall(_)
            | Error::ZeroBlowup
            | Error::InvalidTree(_)
            | Error::EmptyTree
            | Error::Strip { .. }
            | Error::Regime(_)
            | Error::Parameters(_)
            | Error::EvenTournament(_)
            | Error::OracleTooLarge(_) => EXIT_INPUT,
            _ => EXIT_CONSTRUCTION,
        };
        Failure(e.to_string(), code)
    }
}

fn input_error(msg: impl Into<String>) -> Failure {
    Failure(msg.into(), EXIT_INPUT)
}

fn sample(kind: SampleKind, m: usize, seed: u64) -> Result<Tree, Error> {
    match kind {
        SampleKind::Labeled => sample_labeled_tree(m, seed),
        SampleKind::Unlabeled => sample_unlabeled_tree(m, seed),
    }
}

fn leaf_bound(m: usize) -> usize {
    (2 * m).div_ceil(5)
}

fn read_tree(path: &Path) -> Result<Tree, Failure> {
    let text = fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    Ok(Tree::parse(&text)?)
}

/// Writes through a sibling temp file and a rename.
fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let io = |e: std::io::Error| input_error(format!("{}: {e}", path.display()));
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, contents).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

fn cmd_sample_tree(m: usize, kind: SampleKind, seed: u64, out: Option<&Path>) -> Result<(), Failure> {
    if m == 0 {
        return Err(input_error("m must be at least 1"));
    }
    let tree = sample(kind, m, seed)?;
    let leaves = leaf_count(&tree);
    let summary = format!("m={m} leaves={leaves} bound={} meets_bound={}", leaf_bound(m), leaves >= leaf_bound(m));
    match out {
        Some(path) => {
            write_atomic(path, &tree.to_text())?;
            println!("{summary}");
        }
        None => {
            print!("{}", tree.to_text());
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn build(args: &DecomposeArgs, tree: &Tree, r: u32) -> Result<(Decomposition, usize), Error> {
    let opts = BlowupOptions { best_effort: args.best_effort };
    let (p, seed) = (args.p, args.seed);
    let d = match args.kind {
        Kind::Blowup => decompose_blowup(tree, p, r, seed, opts)?,
        Kind::MatchingComplement => decompose_matching_complement(tree, p, seed, opts)?,
        Kind::NearComplete => decompose_near_complete(tree, p, seed, opts)?,
        Kind::CliqueComplement => decompose_clique_complement(tree, p, r, seed, opts)?,
    };
    let conflicts = d.metadata.conflicts_repaired;
    Ok((d, conflicts))
}

fn cmd_decompose(args: &DecomposeArgs) -> Result<(), Failure> {
    let start = Instant::now();
    let r = args
        .r
        .or(args.kind.default_r())
        .ok_or_else(|| input_error(format!("--r is required for kind {}", args.kind.target())))?;
    let spec = TargetSpec::new(args.kind.target(), args.p, r)?;
    let tree = match (&args.tree, args.sample) {
        (Some(path), _) => read_tree(path)?,
        (None, Some(kind)) => sample(kind, args.m.unwrap_or(args.kind.tree_edges(args.p)), args.seed)?,
        (None, None) => return Err(input_error("one of --tree or --sample is required")),
    };
    let (d, conflicts) = build(args, &tree, r)?;
    let cert = write_certificate(&d, &args.out).map_err(|e| input_error(e.to_string()))?;
    let edges = cert.copies.iter().map(|c| c.arcs.len()).sum::<usize>();
    println!(
        "kind={} p={} r={} m={} copies={} edges={} conflicts={} attempt={} wall_ms={}",
        spec.kind,
        spec.p,
        spec.r,
        tree.edge_count(),
        cert.copies.len(),
        edges,
        conflicts,
        d.metadata.attempt,
        start.elapsed().as_millis()
    );
    Ok(())
}

fn cmd_verify(path: &Path) -> Result<(), Failure> {
    let malformed =
        |e: ringel::verify::CertificateError| Failure(format!("malformed certificate ({}): {e}", e.code()), EXIT_INPUT);
    let cert = read_certificate(path).map_err(malformed)?;
    let report = verify_decomposition(&cert).map_err(malformed)?;
    let checks: Vec<String> =
        report.checks.iter().map(|c| format!("{}={}", c.name, if c.passed { "ok" } else { "fail" })).collect();
    println!(
        "result={} copies={} {}",
        if report.passed { "PASS" } else { "FAIL" },
        cert.copies.len(),
        checks.join(" ")
    );
    match report.counterexample {
        None => Ok(()),
        Some(c) => Err(Failure(format!("counterexample: {c}"), EXIT_FAIL)),
    }
}

fn cmd_cn_oracle(path: &Path, p: u32) -> Result<(), Failure> {
    let tree = read_tree(path)?;
    let c = cn_coefficient_oracle(&tree, p)?;
    let unit = c == 1 || c + 1 == p;
    println!("k={} p={p} coefficient={c} result={}", tree.edge_count(), if unit { "PASS" } else { "FAIL" });
    if unit {
        Ok(())
    } else {
        Err(Failure(format!("coefficient {c} is not ±1 mod {p}"), EXIT_FAIL))
    }
}

fn cmd_leaf_stats(m: usize, kind: SampleKind, samples: u64, seed: u64) -> Result<(), Failure> {
    if m == 0 || samples == 0 {
        return Err(input_error("m and samples must be at least 1"));
    }
    let counts: Vec<usize> = (0..samples)
        .into_par_iter()
        .map(|i| sample(kind, m, seed.wrapping_add(i)).map(|t| leaf_count(&t)))
        .collect::<Result<_, _>>()?;
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<usize>() as f64 / n;
    let meeting = counts.iter().filter(|&&l| l >= leaf_bound(m)).count() as f64 / n;
    println!(
        "m={m} samples={samples} mean_leaves={mean:.3} mean_fraction={:.4} meets_bound={meeting:.4}",
        mean / m as f64
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    }
    let result = match &cli.command {
        Command::SampleTree { m, sample, seed, out } => cmd_sample_tree(*m, *sample, *seed, out.as_deref()),
        Command::Decompose(args) => cmd_decompose(args),
        Command::Verify { path } => cmd_verify(path),
        Command::CnOracle { tree, p } => cmd_cn_oracle(tree, *p),
        Command::LeafStats { m, sample, samples, seed } => cmd_leaf_stats(*m, *sample, *samples, *seed),
    };
    let _ = std::io::stdout().flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(msg, code)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
