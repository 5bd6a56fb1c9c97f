//! Certificates and a verifier that checks them without using the constructions.

use std::collections::HashMap;
use std::fmt;
use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomposition::{Decomposition, Metadata, TreeCopy};
use crate::error::Error;
use crate::group::{Arc, ColorSet, Group};
use crate::target::{build_target, edge, Edge, TargetKind, Vertex};
use crate::tree::{canonical_form, canonical_form_of_edges, Tree};

pub const FORMAT_VERSION: &str = "ringel-decomp/1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeRecord {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    /// Free-tree canonical form of `edges`.
    pub canonical: String,
}

/// Self-contained record of a decomposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub version: String,
    pub kind: TargetKind,
    pub p: u32,
    pub r: u32,
    pub tree: TreeRecord,
    pub metadata: Metadata,
    /// Sorted by label, arcs sorted within each copy.
    pub copies: Vec<TreeCopy>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    version: String,
    kind: TargetKind,
    p: u32,
    r: u32,
    tree: TreeRecord,
    copies: usize,
    metadata: Metadata,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CopyLine {
    label: u32,
    arcs: Vec<(Vertex, Vertex)>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CertificateError {
    #[error("i/o error: {0}")]
    Io(String),
    #[error("unsupported certificate version {found:?} (expected {FORMAT_VERSION:?})")]
    Version { found: String },
    #[error("schema violation at line {line}: {detail}")]
    Schema { line: usize, detail: String },
}

impl CertificateError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            CertificateError::Io(_) => "io",
            CertificateError::Version { .. } => "version",
            CertificateError::Schema { .. } => "schema",
        }
    }
}

fn schema(line: usize, detail: impl fmt::Display) -> CertificateError {
    CertificateError::Schema { line, detail: detail.to_string() }
}

impl Certificate {
    pub fn from_decomposition(d: &Decomposition) -> Self {
        let mut copies = d.copies.clone();
        copies.sort_by_key(|c| c.label);
        for c in &mut copies {
            c.arcs.sort_unstable();
        }
        let canonical = String::from_utf8(canonical_form(&d.tree)).expect("canonical forms are ASCII");
        Certificate {
            version: FORMAT_VERSION.to_string(),
            kind: d.target.kind,
            p: d.target.p,
            r: d.target.r,
            tree: TreeRecord { n: d.tree.vertex_count(), edges: d.tree.edges().to_vec(), canonical },
            metadata: d.metadata.clone(),
            copies,
        }
    }

    /// Line-delimited JSON with sorted keys: a header, then one line per copy.
    pub fn to_lines(&self) -> String {
        let header = Header {
            version: self.version.clone(),
            kind: self.kind,
            p: self.p,
            r: self.r,
            tree: self.tree.clone(),
            copies: self.copies.len(),
            metadata: self.metadata.clone(),
        };
        let mut out = sorted_json(&header);
        out.push('\n');
        for c in &self.copies {
            out.push_str(&sorted_json(&CopyLine { label: c.label, arcs: c.arcs.clone() }));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, CertificateError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines.next().ok_or_else(|| schema(1, "empty certificate"))?;
        let raw: serde_json::Value = serde_json::from_str(first).map_err(|e| schema(1, e))?;
        if let Some(v) = raw.get("version").and_then(|v| v.as_str()) {
            if v != FORMAT_VERSION {
                return Err(CertificateError::Version { found: v.to_string() });
            }
        }
        let header: Header = serde_json::from_value(raw).map_err(|e| schema(1, e))?;
        let mut copies = Vec::with_capacity(header.copies);
        for (k, line) in lines {
            let c: CopyLine = serde_json::from_str(line).map_err(|e| schema(k + 1, e))?;
            copies.push(TreeCopy { label: c.label, arcs: c.arcs });
        }
        if copies.len() != header.copies {
            return Err(schema(
                copies.len() + 2,
                format!("header announces {} copies, found {}", header.copies, copies.len()),
            ));
        }
        Ok(Certificate {
            version: header.version,
            kind: header.kind,
            p: header.p,
            r: header.r,
            tree: header.tree,
            metadata: header.metadata,
            copies,
        })
    }
}

fn sorted_json<T: Serialize>(value: &T) -> String {
    // serde_json's default map type is ordered, so going through `Value` sorts keys.
    let v = serde_json::to_value(value).expect("certificate values serialize");
    serde_json::to_string(&v).expect("JSON values serialize")
}

/// Writes the certificate of `d` atomically (temporary file, then rename).
pub fn write_certificate(d: &Decomposition, path: &Path) -> Result<Certificate, CertificateError> {
    let cert = Certificate::from_decomposition(d);
    write_certificate_file(&cert, path)?;
    Ok(cert)
}

pub fn write_certificate_file(cert: &Certificate, path: &Path) -> Result<(), CertificateError> {
    let io = |e: std::io::Error| CertificateError::Io(format!("{}: {e}", path.display()));
    let name = path.file_name().ok_or_else(|| CertificateError::Io(format!("{}: not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(cert.to_lines().as_bytes())?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result.map_err(io)
}

pub fn read_certificate(path: &Path) -> Result<Certificate, CertificateError> {
    let text = std::fs::read_to_string(path).map_err(|e| CertificateError::Io(format!("{}: {e}", path.display())))?;
    Certificate::parse(&text)
}

/// First witness of a failed check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Counterexample {
    WrongSize { label: u32, edges: usize, expected: usize },
    RepeatedEdgeInCopy { label: u32, edge: Edge },
    ForeignEdge { label: u32, edge: Edge },
    DuplicatedEdge { edge: Edge, labels: (u32, u32) },
    MissingEdge { edge: Edge },
    NonIsomorphic { label: u32 },
    CountMismatch { copies: usize, tree_edges: usize, target_edges: usize },
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = |(u, v): &Edge| format!("{{{u}, {v}}}");
        match self {
            Counterexample::WrongSize { label, edges, expected } => {
                write!(f, "copy {label} has {edges} edges, expected {expected}")
            }
            Counterexample::RepeatedEdgeInCopy { label, edge } => {
                write!(f, "copy {label} uses edge {} twice", e(edge))
            }
            Counterexample::ForeignEdge { label, edge } => {
                write!(f, "copy {label} uses edge {} outside the target", e(edge))
            }
            Counterexample::DuplicatedEdge { edge, labels } => {
                write!(f, "edge {} covered by copies {} and {}", e(edge), labels.0, labels.1)
            }
            Counterexample::MissingEdge { edge } => write!(f, "edge {} is not covered", e(edge)),
            Counterexample::NonIsomorphic { label } => write!(f, "copy {label} is not isomorphic to the tree"),
            Counterexample::CountMismatch { copies, tree_edges, target_edges } => {
                write!(f, "{copies} copies × {tree_edges} edges ≠ {target_edges} target edges")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerificationReport {
    pub passed: bool,
    pub checks: Vec<CheckResult>,
    pub counterexample: Option<Counterexample>,
}

/// Checks that the copies are edge-disjoint trees isomorphic to the
/// certificate's tree whose union is exactly the target's edge set.
///
/// A certificate whose target or tree cannot be rebuilt is malformed.
pub fn verify_decomposition(cert: &Certificate) -> Result<VerificationReport, CertificateError> {
    if cert.version != FORMAT_VERSION {
        return Err(CertificateError::Version { found: cert.version.clone() });
    }
    let target = build_target(cert.kind, cert.p, cert.r).map_err(|e| schema(1, e))?;
    let tree = Tree::new(cert.tree.n, cert.tree.edges.clone(), 0).map_err(|e| schema(1, e))?;
    let form = canonical_form(&tree);
    if form != cert.tree.canonical.as_bytes() {
        return Err(schema(1, "recorded canonical form does not match the tree"));
    }
    let m = tree.edge_count();
    let target_edges = target.edges();

    // (a) shape of every copy, (d) isomorphism: independent per copy.
    let per_copy: Vec<(Option<Counterexample>, bool)> = cert
        .copies
        .par_iter()
        .map(|c| {
            let mut edges: Vec<Edge> = c.arcs.iter().map(|&(u, v)| edge(u, v)).collect();
            let shape = if edges.len() != m {
                Some(Counterexample::WrongSize { label: c.label, edges: edges.len(), expected: m })
            } else if let Some(&e) = edges.iter().find(|e| !target_edges.contains(e)) {
                Some(Counterexample::ForeignEdge { label: c.label, edge: e })
            } else {
                edges.sort_unstable();
                edges
                    .windows(2)
                    .find(|w| w[0] == w[1])
                    .map(|w| Counterexample::RepeatedEdgeInCopy { label: c.label, edge: w[0] })
            };
            let iso = canonical_form_of_edges(&edges).is_some_and(|f| f == form);
            (shape, iso)
        })
        .collect();
    let shape_failure = per_copy.iter().find_map(|(s, _)| s.clone());
    let iso_failure = cert
        .copies
        .iter()
        .zip(&per_copy)
        .find(|(_, (_, iso))| !iso)
        .map(|(c, _)| Counterexample::NonIsomorphic { label: c.label });

    // (b) disjointness and (c) coverage through one edge table.
    let mut owner: HashMap<Edge, u32> = HashMap::with_capacity(target_edges.len());
    let mut duplicate = None;
    for c in &cert.copies {
        for &(u, v) in &c.arcs {
            let e = edge(u, v);
            if let Some(&prev) = owner.get(&e) {
                if prev != c.label && duplicate.is_none() {
                    duplicate = Some(Counterexample::DuplicatedEdge { edge: e, labels: (prev, c.label) });
                }
            } else {
                owner.insert(e, c.label);
            }
        }
    }
    let missing =
        target_edges.iter().find(|e| !owner.contains_key(e)).map(|&e| Counterexample::MissingEdge { edge: e });

    // (e) counting identity.
    let count_failure = (cert.copies.len() * m != target_edges.len()).then_some(Counterexample::CountMismatch {
        copies: cert.copies.len(),
        tree_edges: m,
        target_edges: target_edges.len(),
    });

    let results = [
        ("copy-shape", shape_failure),
        ("disjoint", duplicate),
        ("coverage", missing),
        ("isomorphism", iso_failure),
        ("count", count_failure),
    ];
    let checks = results.iter().map(|(name, f)| CheckResult { name, passed: f.is_none() }).collect();
    let counterexample = results.into_iter().find_map(|(_, f)| f);
    Ok(VerificationReport { passed: counterexample.is_none(), checks, counterexample })
}

/// True iff no two arcs share a color `(head - tail)`. Every arc must be an
/// arc of `Cay(group, colors)` (lifted to `colors × Z_r` over a product group).
pub fn verify_rainbow(arcs: &[Arc], colors: &ColorSet, group: &Group) -> Result<bool, Error> {
    let (p, r) = (group.p(), group.r());
    let mut seen = std::collections::HashSet::new();
    let mut rainbow = true;
    for &(u, v) in arcs {
        if u.x >= p || v.x >= p || u.layer >= r || v.layer >= r {
            return Err(Error::ArcNotInDigraph(format!("{u} -> {v}")));
        }
        let s = (v.x + p - u.x) % p;
        if !colors.contains(s) {
            return Err(Error::ArcNotInDigraph(format!("{u} -> {v}")));
        }
        rainbow &= seen.insert((s, (v.layer + r - u.layer) % r));
    }
    Ok(rainbow)
}
