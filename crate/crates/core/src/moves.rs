//! The primitive move basis: atomic, invertible edits of a space.
//!
//! Each move carries enough payload to be undone exactly: removals record
//! the full node or edge data they delete.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::space::{is_known_type, ConceptNode, ConceptSpace, EdgeId, FitnessField, NodeId, TransitionEdge, SCRATCH_ID};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PrimitiveMove {
    RelabelNode { node: NodeId, from: String, to: String },
    AddEdgePair { forward: TransitionEdge, backward: TransitionEdge },
    RemoveEdgePair { forward: TransitionEdge, backward: TransitionEdge },
    AddNode {
        node: ConceptNode,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        fitness: Option<Vec<f64>>,
    },
    RemoveNode {
        node: ConceptNode,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        fitness: Option<Vec<f64>>,
    },
    /// Move the node at `from` to the unoccupied id `to`.
    RemapSingle { from: NodeId, to: NodeId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MoveKind {
    RelabelNode,
    AddEdgePair,
    RemoveEdgePair,
    AddNode,
    RemoveNode,
    RemapSingle,
}

impl MoveKind {
    pub const ALL: [MoveKind; 6] = [
        MoveKind::RelabelNode,
        MoveKind::AddEdgePair,
        MoveKind::RemoveEdgePair,
        MoveKind::AddNode,
        MoveKind::RemoveNode,
        MoveKind::RemapSingle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MoveKind::RelabelNode => "RELABEL_NODE",
            MoveKind::AddEdgePair => "ADD_EDGE_PAIR",
            MoveKind::RemoveEdgePair => "REMOVE_EDGE_PAIR",
            MoveKind::AddNode => "ADD_NODE",
            MoveKind::RemoveNode => "REMOVE_NODE",
            MoveKind::RemapSingle => "REMAP_SINGLE",
        }
    }
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MoveError {
    #[error("ILL_FORMED_MOVE: {0}")]
    IllFormed(String),
}

fn ill(msg: impl Into<String>) -> MoveError {
    MoveError::IllFormed(msg.into())
}

impl PrimitiveMove {
    /// A new reversible transition pair between `a` and `b` with fresh ids.
    pub fn link(space: &ConceptSpace, a: &NodeId, b: &NodeId, label: &str) -> Self {
        let fwd = space.fresh_edge_id(&format!("{a}>{b}"));
        let mut bwd = space.fresh_edge_id(&format!("{b}>{a}"));
        if bwd == fwd {
            bwd = space.fresh_edge_id(&format!("{b}>{a}~"));
        }
        PrimitiveMove::AddEdgePair {
            forward: TransitionEdge {
                id: fwd.clone(),
                src: a.clone(),
                dst: b.clone(),
                label: label.to_owned(),
                inverse_of: bwd.clone(),
                involutive: false,
            },
            backward: TransitionEdge {
                id: bwd,
                src: b.clone(),
                dst: a.clone(),
                label: label.to_owned(),
                inverse_of: fwd,
                involutive: false,
            },
        }
    }

    /// Removal of the pair containing `edge`, capturing its current data.
    pub fn unlink(space: &ConceptSpace, edge: &EdgeId) -> Option<Self> {
        let e = space.edge(edge)?;
        let inv = space.edge(&e.inverse_of)?;
        if inv.id == e.id {
            return None;
        }
        let (forward, backward) = if e.id <= inv.id { (e, inv) } else { (inv, e) };
        Some(PrimitiveMove::RemoveEdgePair { forward: forward.clone(), backward: backward.clone() })
    }

    pub fn kind(&self) -> MoveKind {
        match self {
            PrimitiveMove::RelabelNode { .. } => MoveKind::RelabelNode,
            PrimitiveMove::AddEdgePair { .. } => MoveKind::AddEdgePair,
            PrimitiveMove::RemoveEdgePair { .. } => MoveKind::RemoveEdgePair,
            PrimitiveMove::AddNode { .. } => MoveKind::AddNode,
            PrimitiveMove::RemoveNode { .. } => MoveKind::RemoveNode,
            PrimitiveMove::RemapSingle { .. } => MoveKind::RemapSingle,
        }
    }

    pub fn inverse(&self) -> Self {
        match self.clone() {
            PrimitiveMove::RelabelNode { node, from, to } => PrimitiveMove::RelabelNode { node, from: to, to: from },
            PrimitiveMove::AddEdgePair { forward, backward } => PrimitiveMove::RemoveEdgePair { forward, backward },
            PrimitiveMove::RemoveEdgePair { forward, backward } => PrimitiveMove::AddEdgePair { forward, backward },
            PrimitiveMove::AddNode { node, fitness } => PrimitiveMove::RemoveNode { node, fitness },
            PrimitiveMove::RemoveNode { node, fitness } => PrimitiveMove::AddNode { node, fitness },
            PrimitiveMove::RemapSingle { from, to } => PrimitiveMove::RemapSingle { from: to, to: from },
        }
    }

    /// Nodes whose state this move changes.
    pub fn touched_nodes(&self) -> Vec<NodeId> {
        match self {
            PrimitiveMove::RelabelNode { node, .. } => vec![node.clone()],
            PrimitiveMove::AddEdgePair { forward, .. } | PrimitiveMove::RemoveEdgePair { forward, .. } => {
                vec![forward.src.clone(), forward.dst.clone()]
            }
            PrimitiveMove::AddNode { node, .. } | PrimitiveMove::RemoveNode { node, .. } => vec![node.id.clone()],
            PrimitiveMove::RemapSingle { from, to } => vec![from.clone(), to.clone()],
        }
    }

    /// For edge-pair moves, the unordered endpoint pair.
    pub fn edge_endpoints(&self) -> Option<(NodeId, NodeId)> {
        match self {
            PrimitiveMove::AddEdgePair { forward, .. } | PrimitiveMove::RemoveEdgePair { forward, .. } => {
                let (a, b) = (forward.src.clone(), forward.dst.clone());
                Some(if a <= b { (a, b) } else { (b, a) })
            }
            _ => None,
        }
    }

    pub fn apply(&self, space: &ConceptSpace) -> Result<ConceptSpace, MoveError> {
        match self {
            PrimitiveMove::RelabelNode { node, from, to } => {
                let n = space.node(node).ok_or_else(|| ill(format!("relabel of missing node {node}")))?;
                if &n.label != from {
                    return Err(ill(format!("{node} is labelled {:?}, not {from:?}", n.label)));
                }
                Ok(space.set_label(node, to))
            }
            PrimitiveMove::AddEdgePair { forward, backward } => {
                check_pair(forward, backward)?;
                for e in [forward, backward] {
                    if space.edge(&e.id).is_some() {
                        return Err(ill(format!("edge id {} already in use", e.id)));
                    }
                    for end in [&e.src, &e.dst] {
                        if !space.contains_node(end) {
                            return Err(ill(format!("edge {} references missing node {end}", e.id)));
                        }
                    }
                }
                Ok(space.insert_edges([forward.clone(), backward.clone()]))
            }
            PrimitiveMove::RemoveEdgePair { forward, backward } => {
                check_pair(forward, backward)?;
                for e in [forward, backward] {
                    if space.edge(&e.id) != Some(e) {
                        return Err(ill(format!("edge {} is not present as recorded", e.id)));
                    }
                }
                Ok(space.remove_edges([&forward.id, &backward.id]))
            }
            PrimitiveMove::AddNode { node, .. } => {
                if node.id.as_str() == SCRATCH_ID || space.contains_node(&node.id) {
                    return Err(ill(format!("node id {} unavailable", node.id)));
                }
                if !is_known_type(space.type_vocabulary(), &node.concept_type) {
                    return Err(ill(format!("type {} outside the vocabulary", node.concept_type)));
                }
                if let Some(x) = node.exclusions.iter().find(|x| !space.contains_node(x)) {
                    return Err(ill(format!("exclusion of missing node {x}")));
                }
                Ok(space.insert_node(node.clone()))
            }
            PrimitiveMove::RemoveNode { node, .. } => {
                if space.node(&node.id) != Some(node) {
                    return Err(ill(format!("node {} is not present as recorded", node.id)));
                }
                if space.incident(&node.id).next().is_some() {
                    return Err(ill(format!("node {} still has transitions", node.id)));
                }
                Ok(space.remove_node(&node.id))
            }
            PrimitiveMove::RemapSingle { from, to } => {
                if !space.contains_node(from) {
                    return Err(ill(format!("remap from missing node {from}")));
                }
                if space.contains_node(to) {
                    return Err(ill(format!("remap target {to} is occupied")));
                }
                Ok(space.rename_node(from, to))
            }
        }
    }

    /// Carry a fitness field through this move. `AddNode` without a vector
    /// gets zeros.
    pub fn apply_fitness(&self, fitness: &FitnessField) -> FitnessField {
        match self {
            PrimitiveMove::AddNode { node, fitness: value } => {
                let v = value.clone().unwrap_or_else(|| vec![0.0; fitness.dimension()]);
                fitness.with_value(&node.id, v)
            }
            PrimitiveMove::RemoveNode { node, .. } => fitness.without(&node.id),
            PrimitiveMove::RemapSingle { from, to } => {
                fitness.map_node_ids(|x| if x == from { to.clone() } else { x.clone() })
            }
            _ => fitness.clone(),
        }
    }
}

fn check_pair(forward: &TransitionEdge, backward: &TransitionEdge) -> Result<(), MoveError> {
    let paired = forward.inverse_of == backward.id
        && backward.inverse_of == forward.id
        && forward.src == backward.dst
        && forward.dst == backward.src
        && forward.id != backward.id;
    if paired {
        Ok(())
    } else {
        Err(ill(format!("{} and {} are not a reversible pair", forward.id, backward.id)))
    }
}
