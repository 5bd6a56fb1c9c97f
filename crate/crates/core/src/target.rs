//! Target graphs a decomposition has to partition.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::group::{is_prime, Node};

/// A vertex of a target graph.
///
/// Serialized as `[x, i]` for blow-up vertices, a bare integer for relabeled
/// vertices, and `"alpha:k"` for apex vertices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Vertex {
    Pair(Node),
    Index(u32),
    Apex(u32),
}

impl Vertex {
    pub fn pair(x: u32, layer: u32) -> Self {
        Vertex::Pair(Node::new(x, layer))
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Vertex::Pair(n) => write!(f, "[{},{}]", n.x, n.layer),
            Vertex::Index(i) => write!(f, "{i}"),
            Vertex::Apex(k) => write!(f, "alpha:{k}"),
        }
    }
}

impl Serialize for Vertex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Vertex::Pair(n) => [n.x, n.layer].serialize(s),
            Vertex::Index(i) => s.serialize_u32(*i),
            Vertex::Apex(k) => s.serialize_str(&format!("alpha:{k}")),
        }
    }
}

impl<'de> Deserialize<'de> for Vertex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct VertexVisitor;

        impl<'de> Visitor<'de> for VertexVisitor {
            type Value = Vertex;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a pair [x, i], an integer, or \"alpha:k\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Vertex, E> {
                u32::try_from(v).map(Vertex::Index).map_err(E::custom)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Vertex, E> {
                v.strip_prefix("alpha:")
                    .and_then(|k| k.parse().ok())
                    .map(Vertex::Apex)
                    .ok_or_else(|| E::custom(format!("bad apex vertex {v:?}")))
            }

            fn visit_seq<A: de::SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Vertex, A::Error> {
                let x: u32 = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let i: u32 = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(1, &self))?;
                if seq.next_element::<u32>()?.is_some() {
                    return Err(de::Error::invalid_length(3, &self));
                }
                Ok(Vertex::pair(x, i))
            }
        }

        d.deserialize_any(VertexVisitor)
    }
}

/// An undirected edge with endpoints in increasing order.
pub type Edge = (Vertex, Vertex);

pub fn edge(u: Vertex, v: Vertex) -> Edge {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetKind {
    /// `K_p(r)`.
    #[serde(rename = "blowup")]
    BlowupComplete,
    /// `K_{2p}` minus the perfect matching `{2x, 2x+1}`.
    MatchingComplement,
    /// `K_{3p+2}` minus the edge between the two apexes.
    NearComplete,
    /// `K_{rp+t}` minus the clique on `t = (r+1)/2` apexes.
    CliqueComplement,
}

impl TargetKind {
    pub fn name(&self) -> &'static str {
        match self {
            TargetKind::BlowupComplete => "blowup",
            TargetKind::MatchingComplement => "matching-complement",
            TargetKind::NearComplete => "near-complete",
            TargetKind::CliqueComplement => "clique-complement",
        }
    }
}

impl fmt::Display for TargetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TargetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "blowup" => Ok(TargetKind::BlowupComplete),
            "matching-complement" => Ok(TargetKind::MatchingComplement),
            "near-complete" => Ok(TargetKind::NearComplete),
            "clique-complement" => Ok(TargetKind::CliqueComplement),
            other => Err(Error::Parameters(format!("unknown target kind {other:?}"))),
        }
    }
}

/// Symbolic description of a target graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TargetSpec {
    pub kind: TargetKind,
    pub p: u32,
    pub r: u32,
}

impl TargetSpec {
    pub fn new(kind: TargetKind, p: u32, r: u32) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        if p < 3 {
            return Err(Error::ModulusTooSmall(p as u64));
        }
        match kind {
            TargetKind::BlowupComplete if r >= 1 => {}
            TargetKind::MatchingComplement if r == 2 => {}
            TargetKind::NearComplete if r == 3 => {}
            TargetKind::CliqueComplement if r >= 3 && r % 2 == 1 => {}
            _ => return Err(Error::Parameters(format!("r = {r} is not supported for target kind {kind}"))),
        }
        Ok(TargetSpec { kind, p, r })
    }

    /// Number of apex vertices.
    pub fn apex_count(&self) -> u32 {
        match self.kind {
            TargetKind::BlowupComplete | TargetKind::MatchingComplement => 0,
            TargetKind::NearComplete | TargetKind::CliqueComplement => self.r.div_ceil(2),
        }
    }

    pub fn vertex_count(&self) -> usize {
        (self.p * self.r + self.apex_count()) as usize
    }

    /// Closed-form edge count.
    pub fn expected_edge_count(&self) -> usize {
        let (p, r) = (self.p as usize, self.r as usize);
        let base = r * r * p * (p - 1) / 2;
        match self.kind {
            TargetKind::BlowupComplete | TargetKind::MatchingComplement => base,
            TargetKind::NearComplete | TargetKind::CliqueComplement => {
                let t = self.apex_count() as usize;
                base + t * r * p + p * r * (r - 1) / 2
            }
        }
    }
}

/// Explicit vertex and edge sets of a target graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TargetGraph {
    spec: TargetSpec,
    vertices: Vec<Vertex>,
    edges: BTreeSet<Edge>,
}

pub fn build_target(kind: TargetKind, p: u32, r: u32) -> Result<TargetGraph> {
    let spec = TargetSpec::new(kind, p, r)?;
    let mut vertices = Vec::with_capacity(spec.vertex_count());
    let mut edges = BTreeSet::new();
    match kind {
        TargetKind::MatchingComplement => {
            vertices.extend((0..2 * p).map(Vertex::Index));
            for u in 0..2 * p {
                for v in u + 1..2 * p {
                    if u / 2 != v / 2 {
                        edges.insert((Vertex::Index(u), Vertex::Index(v)));
                    }
                }
            }
        }
        _ => {
            let base: Vec<Vertex> = (0..p).flat_map(|x| (0..r).map(move |i| Vertex::pair(x, i))).collect();
            // Apex targets also join vertices inside a coclique (triangle / tournament).
            let cocliques_joined = spec.apex_count() > 0;
            for (a, &u) in base.iter().enumerate() {
                for &v in &base[a + 1..] {
                    let (Vertex::Pair(nu), Vertex::Pair(nv)) = (u, v) else { unreachable!() };
                    if nu.x != nv.x || cocliques_joined {
                        edges.insert(edge(u, v));
                    }
                }
            }
            for k in 0..spec.apex_count() {
                let apex = Vertex::Apex(k);
                for &u in &base {
                    edges.insert(edge(u, apex));
                }
            }
            vertices = base;
            vertices.extend((0..spec.apex_count()).map(Vertex::Apex));
        }
    }
    Ok(TargetGraph { spec, vertices, edges })
}

impl TargetGraph {
    pub fn spec(&self) -> TargetSpec {
        self.spec
    }

    pub fn kind(&self) -> TargetKind {
        self.spec.kind
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.edges.contains(&edge(u, v))
    }
}
