//! A labeled family of tree copies claimed to partition a target graph.

use serde::{Deserialize, Serialize};

use crate::target::{TargetSpec, Vertex};
use crate::tree::Tree;

/// One copy of the tree, as directed arcs over the target's vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeCopy {
    pub label: u32,
    pub arcs: Vec<(Vertex, Vertex)>,
}

/// Reproduction data. Wall-clock timings are kept out so that equal inputs
/// give byte-identical certificates.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metadata {
    pub seed: u64,
    /// Index of the pipeline restart that succeeded.
    pub attempt: u64,
    pub conflicts_repaired: usize,
    pub core_edges: usize,
    pub forest_edges: usize,
    pub best_effort: bool,
    /// The color set `S`, in assignment order.
    pub colors: Vec<u32>,
    /// Input label of the leaf removed before the base decomposition.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deleted_leaf: Option<usize>,
    /// Connection set of the circulant tournament placed in every coclique.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tournament: Option<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub target: TargetSpec,
    pub tree: Tree,
    pub copies: Vec<TreeCopy>,
    pub metadata: Metadata,
}

impl Decomposition {
    pub fn arc_count(&self) -> usize {
        self.copies.iter().map(|c| c.arcs.len()).sum()
    }
}
