//! Conceptual spaces: typed concept graphs whose transitions come in
//! reversible pairs.
//!
//! A [`ConceptSpace`] is an immutable value. Every edit (see
//! [`crate::moves::PrimitiveMove`]) produces a new space. The neighbor
//! topology is derived from the edge set on construction and never stored
//! independently of it.
//!
//! Contradiction is made decidable through explicit, symmetric exclusion
//! sets on nodes: `b ∈ excl(a)` declares `a` and `b` mutually incompatible.

mod doc;
mod fitness;
pub mod random;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::ids::{EdgeId, NodeId, SpaceRef};
pub use doc::{EdgeDoc, FitnessDoc, NodeDoc, SpaceDocument};
pub use fitness::FitnessField;

/// The distinguished root type. Every vocabulary tag is a subtype of it.
pub const ROOT_TYPE: &str = "Concept";

/// Reserved node id used as the temporary slot when a permutation is
/// factored into single remaps. No space may contain it.
pub const SCRATCH_ID: &str = "#scratch";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptNode {
    pub id: NodeId,
    pub label: String,
    pub concept_type: String,
    pub exclusions: BTreeSet<NodeId>,
}

impl ConceptNode {
    pub fn new(id: impl Into<NodeId>, label: impl Into<String>, concept_type: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            label: label.into(),
            concept_type: concept_type.into(),
            exclusions: BTreeSet::new(),
        }
    }

    /// A node of the root type labelled with its own id.
    pub fn concept(id: impl Into<NodeId>) -> Self {
        let id = id.into();
        let label = id.to_string();
        Self::new(id, label, ROOT_TYPE)
    }

    pub fn excludes(&self, other: &NodeId) -> bool {
        self.exclusions.contains(other)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionEdge {
    pub id: EdgeId,
    pub src: NodeId,
    pub dst: NodeId,
    pub label: String,
    pub inverse_of: EdgeId,
    /// Only a self-loop marked involutive may be its own inverse.
    pub involutive: bool,
}

impl TransitionEdge {
    pub fn endpoints(&self) -> (&NodeId, &NodeId) {
        (&self.src, &self.dst)
    }

    pub fn is_self_loop(&self) -> bool {
        self.src == self.dst
    }

    /// The id that represents this edge pair in reports: the smaller of the
    /// two paired ids.
    pub fn pair_key(&self) -> &EdgeId {
        if self.inverse_of < self.id {
            &self.inverse_of
        } else {
            &self.id
        }
    }
}

/// Input form of an edge for [`SpaceBuilder`]; the inverse may be left for
/// the builder to pair or synthesize.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSpec {
    pub id: EdgeId,
    pub src: NodeId,
    pub dst: NodeId,
    pub label: String,
    pub inverse_of: Option<EdgeId>,
    pub involutive: bool,
}

impl EdgeSpec {
    pub fn new(id: impl Into<EdgeId>, src: impl Into<NodeId>, dst: impl Into<NodeId>, label: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            src: src.into(),
            dst: dst.into(),
            label: label.into(),
            inverse_of: None,
            involutive: false,
        }
    }

    pub fn inverse_of(mut self, id: impl Into<EdgeId>) -> Self {
        self.inverse_of = Some(id.into());
        self
    }

    pub fn involutive(mut self) -> Self {
        self.involutive = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("DUPLICATE_ID: {0}")]
    DuplicateId(String),
    #[error("DANGLING_ENDPOINT: edge {edge} references unknown node {node}")]
    DanglingEndpoint { edge: EdgeId, node: NodeId },
    #[error("MISSING_INVERSE: edge {0} has no paired reverse edge")]
    MissingInverse(EdgeId),
    #[error("INVERSE_MISMATCH: edge {0} names an inverse that does not reverse it")]
    InverseMismatch(EdgeId),
    #[error("ASYMMETRIC_EXCLUSION: {0} excludes {1} but not conversely")]
    AsymmetricExclusion(NodeId, NodeId),
    #[error("UNKNOWN_EXCLUSION: {node} excludes unknown node {target}")]
    UnknownExclusion { node: NodeId, target: NodeId },
    #[error("UNTYPED_NODE: {node} has type {concept_type} outside the vocabulary")]
    UntypedNode { node: NodeId, concept_type: String },
    #[error("RESERVED_ID: {0}")]
    ReservedId(String),
    #[error("UNKNOWN_NODE: {0}")]
    UnknownNode(NodeId),
    #[error("UNKNOWN_EDGE: {0}")]
    UnknownEdge(EdgeId),
    #[error("FITNESS: {0}")]
    Fitness(String),
    #[error("PARSE: {0}")]
    Parse(String),
}

/// One broken invariant found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "invariant", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SpaceViolation {
    DanglingEndpoint { edge: EdgeId, node: NodeId },
    MissingInverse { edge: EdgeId },
    InverseMismatch { edge: EdgeId },
    AsymmetricExclusion { a: NodeId, b: NodeId },
    UnknownExclusion { node: NodeId, target: NodeId },
    UntypedNode { node: NodeId, concept_type: String },
    ReservedId { id: String },
    TopologyStale { node: NodeId },
    FitnessUndefined { node: NodeId },
    FitnessDimension { node: NodeId, expected: usize, found: usize },
}

impl fmt::Display for SpaceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DanglingEndpoint { edge, node } => write!(f, "DANGLING_ENDPOINT({edge}, {node})"),
            Self::MissingInverse { edge } => write!(f, "MISSING_INVERSE({edge})"),
            Self::InverseMismatch { edge } => write!(f, "INVERSE_MISMATCH({edge})"),
            Self::AsymmetricExclusion { a, b } => write!(f, "ASYMMETRIC_EXCLUSION({a},{b})"),
            Self::UnknownExclusion { node, target } => write!(f, "UNKNOWN_EXCLUSION({node},{target})"),
            Self::UntypedNode { node, concept_type } => write!(f, "UNTYPED_NODE({node}: {concept_type})"),
            Self::ReservedId { id } => write!(f, "RESERVED_ID({id})"),
            Self::TopologyStale { node } => write!(f, "TOPOLOGY_STALE({node})"),
            Self::FitnessUndefined { node } => write!(f, "FITNESS_UNDEFINED({node})"),
            Self::FitnessDimension { node, expected, found } => {
                write!(f, "FITNESS_DIMENSION({node}: expected {expected}, found {found})")
            }
        }
    }
}

/// A typed concept graph with reversible transitions.
#[derive(Debug, Clone)]
pub struct ConceptSpace {
    id: SpaceRef,
    order: u32,
    type_vocabulary: BTreeSet<String>,
    nodes: BTreeMap<NodeId, ConceptNode>,
    edges: BTreeMap<EdgeId, TransitionEdge>,
    // Derived from `edges`.
    topology: BTreeMap<NodeId, BTreeSet<NodeId>>,
    outgoing: BTreeMap<NodeId, Vec<EdgeId>>,
    incoming: BTreeMap<NodeId, Vec<EdgeId>>,
}

impl PartialEq for ConceptSpace {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
            && self.order == other.order
            && self.type_vocabulary == other.type_vocabulary
            && self.nodes == other.nodes
            && self.edges == other.edges
    }
}

impl ConceptSpace {
    /// An empty space of order 0.
    pub fn empty(id: impl Into<SpaceRef>) -> Self {
        Self::from_parts_unchecked(id, 0, BTreeSet::new(), Vec::new(), Vec::new())
    }

    /// Assemble a space without checking any invariant. Later duplicates
    /// overwrite earlier ones. Use [`validate`] to audit the result.
    pub fn from_parts_unchecked(
        id: impl Into<SpaceRef>,
        order: u32,
        type_vocabulary: BTreeSet<String>,
        nodes: impl IntoIterator<Item = ConceptNode>,
        edges: impl IntoIterator<Item = TransitionEdge>,
    ) -> Self {
        let mut space = Self {
            id: id.into(),
            order,
            type_vocabulary,
            nodes: nodes.into_iter().map(|n| (n.id.clone(), n)).collect(),
            edges: edges.into_iter().map(|e| (e.id.clone(), e)).collect(),
            topology: BTreeMap::new(),
            outgoing: BTreeMap::new(),
            incoming: BTreeMap::new(),
        };
        space.rebuild_caches();
        space
    }

    fn rebuild_caches(&mut self) {
        self.topology = self.nodes.keys().map(|k| (k.clone(), BTreeSet::new())).collect();
        self.outgoing = self.nodes.keys().map(|k| (k.clone(), Vec::new())).collect();
        self.incoming = self.outgoing.clone();
        for edge in self.edges.values() {
            if let Some(out) = self.outgoing.get_mut(&edge.src) {
                out.push(edge.id.clone());
            }
            if let Some(inc) = self.incoming.get_mut(&edge.dst) {
                inc.push(edge.id.clone());
            }
            if self.nodes.contains_key(&edge.src) && self.nodes.contains_key(&edge.dst) {
                if let Some(n) = self.topology.get_mut(&edge.src) {
                    n.insert(edge.dst.clone());
                }
                if let Some(n) = self.topology.get_mut(&edge.dst) {
                    n.insert(edge.src.clone());
                }
            }
        }
    }

    pub fn id(&self) -> &SpaceRef {
        &self.id
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn type_vocabulary(&self) -> &BTreeSet<String> {
        &self.type_vocabulary
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &ConceptNode> {
        self.nodes.values()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = &NodeId> {
        self.nodes.keys()
    }

    pub fn node(&self, id: &NodeId) -> Option<&ConceptNode> {
        self.nodes.get(id)
    }

    pub fn contains_node(&self, id: &NodeId) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn edges(&self) -> impl Iterator<Item = &TransitionEdge> {
        self.edges.values()
    }

    pub fn edge(&self, id: &EdgeId) -> Option<&TransitionEdge> {
        self.edges.get(id)
    }

    /// Nodes adjacent to `id` through any transition, in either direction.
    pub fn neighbors(&self, id: &NodeId) -> impl Iterator<Item = &NodeId> {
        self.topology.get(id).into_iter().flatten()
    }

    pub fn degree(&self, id: &NodeId) -> usize {
        self.topology.get(id).map_or(0, BTreeSet::len)
    }

    pub fn outgoing(&self, id: &NodeId) -> impl Iterator<Item = &TransitionEdge> {
        self.outgoing
            .get(id)
            .into_iter()
            .flatten()
            .filter_map(|e| self.edges.get(e))
    }

    pub fn incoming(&self, id: &NodeId) -> impl Iterator<Item = &TransitionEdge> {
        self.incoming
            .get(id)
            .into_iter()
            .flatten()
            .filter_map(|e| self.edges.get(e))
    }

    /// Every transition touching `id`, outgoing first.
    pub fn incident(&self, id: &NodeId) -> impl Iterator<Item = &TransitionEdge> {
        self.outgoing(id).chain(self.incoming(id).filter(|e| !e.is_self_loop()))
    }

    /// Whether some transition runs from `src` to `dst`.
    pub fn has_edge(&self, src: &NodeId, dst: &NodeId) -> bool {
        self.outgoing(src).any(|e| &e.dst == dst)
    }

    pub fn edges_between<'a>(&'a self, src: &'a NodeId, dst: &'a NodeId) -> impl Iterator<Item = &'a TransitionEdge> + 'a {
        self.outgoing(src).filter(move |e| &e.dst == dst)
    }

    /// Whether `a` and `b` are declared mutually incompatible.
    pub fn mutually_exclusive(&self, a: &NodeId, b: &NodeId) -> bool {
        self.nodes.get(a).is_some_and(|n| n.excludes(b))
    }

    pub fn concept_type(&self, id: &NodeId) -> Option<&str> {
        self.nodes.get(id).map(|n| n.concept_type.as_str())
    }

    /// Each reversible edge pair once, represented by its [`pair_key`](TransitionEdge::pair_key) edge.
    pub fn edge_pairs(&self) -> impl Iterator<Item = &TransitionEdge> {
        self.edges.values().filter(|e| {
            &e.id == e.pair_key() || !self.edges.contains_key(&e.inverse_of)
        })
    }

    /// Nodes with no transition at all.
    pub fn isolated_nodes(&self) -> impl Iterator<Item = &NodeId> {
        self.nodes.keys().filter(|n| self.degree(n) == 0)
    }

    /// Pairs of mutually exclusive nodes linked by a transition, one entry per edge pair.
    pub fn contradictory_edges(&self) -> impl Iterator<Item = &TransitionEdge> {
        self.edge_pairs().filter(|e| self.mutually_exclusive(&e.src, &e.dst))
    }

    /// A copy of this space carrying a different identity.
    pub fn with_id(&self, id: impl Into<SpaceRef>) -> Self {
        let mut s = self.clone();
        s.id = id.into();
        s
    }

    pub fn with_order(&self, order: u32) -> Self {
        let mut s = self.clone();
        s.order = order;
        s
    }

    /// Fresh edge id based on `base` that is not yet used.
    pub fn fresh_edge_id(&self, base: &str) -> EdgeId {
        let mut candidate = EdgeId::new(base);
        let mut n = 1;
        while self.edges.contains_key(&candidate) {
            candidate = EdgeId::new(format!("{base}#{n}"));
            n += 1;
        }
        candidate
    }

    // Raw edits used by primitive moves. Callers check preconditions.

    pub(crate) fn insert_edges(&self, edges: impl IntoIterator<Item = TransitionEdge>) -> Self {
        let mut s = self.clone();
        for e in edges {
            s.edges.insert(e.id.clone(), e);
        }
        s.rebuild_caches();
        s
    }

    pub(crate) fn remove_edges<'a>(&self, ids: impl IntoIterator<Item = &'a EdgeId>) -> Self {
        let mut s = self.clone();
        for id in ids {
            s.edges.remove(id);
        }
        s.rebuild_caches();
        s
    }

    pub(crate) fn insert_node(&self, node: ConceptNode) -> Self {
        let mut s = self.clone();
        for other in &node.exclusions {
            if let Some(n) = s.nodes.get_mut(other) {
                n.exclusions.insert(node.id.clone());
            }
        }
        s.nodes.insert(node.id.clone(), node);
        s.rebuild_caches();
        s
    }

    pub(crate) fn remove_node(&self, id: &NodeId) -> Self {
        let mut s = self.clone();
        s.nodes.remove(id);
        for n in s.nodes.values_mut() {
            n.exclusions.remove(id);
        }
        s.rebuild_caches();
        s
    }

    pub(crate) fn set_label(&self, id: &NodeId, label: &str) -> Self {
        let mut s = self.clone();
        if let Some(n) = s.nodes.get_mut(id) {
            n.label = label.to_owned();
        }
        s
    }

    /// The subspace induced by `keep`: those nodes, the edges between them,
    /// and exclusions restricted to them. Keeps the space id.
    pub fn induced(&self, keep: &BTreeSet<NodeId>) -> Self {
        let nodes = self.nodes.values().filter(|n| keep.contains(&n.id)).map(|n| ConceptNode {
            exclusions: n.exclusions.intersection(keep).cloned().collect(),
            ..n.clone()
        });
        let edges = self.edges.values().filter(|e| keep.contains(&e.src) && keep.contains(&e.dst)).cloned();
        Self::from_parts_unchecked(self.id.clone(), self.order, self.type_vocabulary.clone(), nodes, edges)
    }

    /// Add `b` to the exclusion set of `a` and vice versa.
    pub(crate) fn add_exclusion(&self, a: &NodeId, b: &NodeId) -> Self {
        let mut s = self.clone();
        if let Some(n) = s.nodes.get_mut(a) {
            n.exclusions.insert(b.clone());
        }
        if let Some(n) = s.nodes.get_mut(b) {
            n.exclusions.insert(a.clone());
        }
        s
    }

    /// Rename node `from` to the unused id `to`, carrying every reference.
    pub(crate) fn rename_node(&self, from: &NodeId, to: &NodeId) -> Self {
        let map = |x: &NodeId| if x == from { to.clone() } else { x.clone() };
        self.map_node_ids(map)
    }

    /// Rewrite every node id through `f`. `f` must be injective on the node set.
    pub(crate) fn map_node_ids(&self, f: impl Fn(&NodeId) -> NodeId) -> Self {
        let nodes = self.nodes.values().map(|n| ConceptNode {
            id: f(&n.id),
            label: n.label.clone(),
            concept_type: n.concept_type.clone(),
            exclusions: n.exclusions.iter().map(&f).collect(),
        });
        let edges = self.edges.values().map(|e| TransitionEdge {
            src: f(&e.src),
            dst: f(&e.dst),
            ..e.clone()
        });
        Self::from_parts_unchecked(self.id.clone(), self.order, self.type_vocabulary.clone(), nodes, edges)
    }
}

/// Whether `concept_type` is admissible in a space with this vocabulary.
pub fn is_known_type(vocabulary: &BTreeSet<String>, concept_type: &str) -> bool {
    concept_type == ROOT_TYPE || vocabulary.contains(concept_type)
}

/// Builder enforcing every [`ConceptSpace`] invariant.
#[derive(Debug, Clone)]
pub struct SpaceBuilder {
    id: SpaceRef,
    order: u32,
    vocabulary: BTreeSet<String>,
    nodes: Vec<ConceptNode>,
    edges: Vec<EdgeSpec>,
    synthesize_inverses: bool,
}

impl SpaceBuilder {
    pub fn new(id: impl Into<SpaceRef>) -> Self {
        Self {
            id: id.into(),
            order: 0,
            vocabulary: BTreeSet::new(),
            nodes: Vec::new(),
            edges: Vec::new(),
            synthesize_inverses: false,
        }
    }

    pub fn order(mut self, order: u32) -> Self {
        self.order = order;
        self
    }

    pub fn vocabulary<I, S>(mut self, tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.vocabulary.extend(tags.into_iter().map(Into::into));
        self
    }

    /// When set, edges without a reverse partner get one synthesized
    /// instead of failing with `MISSING_INVERSE`.
    pub fn synthesize_inverses(mut self, on: bool) -> Self {
        self.synthesize_inverses = on;
        self
    }

    pub fn node(mut self, node: ConceptNode) -> Self {
        self.nodes.push(node);
        self
    }

    /// Root-typed node labelled by its id.
    pub fn concept(self, id: &str) -> Self {
        self.node(ConceptNode::concept(id))
    }

    pub fn concepts<'a>(self, ids: impl IntoIterator<Item = &'a str>) -> Self {
        ids.into_iter().fold(self, Self::concept)
    }

    /// Node of a vocabulary type, labelled by its id. The tag is added to the vocabulary.
    pub fn typed(mut self, id: &str, concept_type: &str) -> Self {
        if concept_type != ROOT_TYPE {
            self.vocabulary.insert(concept_type.to_owned());
        }
        self.node(ConceptNode::new(id, id, concept_type))
    }

    /// Declare `a` and `b` mutually exclusive (both directions).
    pub fn exclusive(mut self, a: &str, b: &str) -> Self {
        let (a, b) = (NodeId::from(a), NodeId::from(b));
        for n in &mut self.nodes {
            if n.id == a {
                n.exclusions.insert(b.clone());
            } else if n.id == b {
                n.exclusions.insert(a.clone());
            }
        }
        self
    }

    pub fn edge(mut self, edge: EdgeSpec) -> Self {
        self.edges.push(edge);
        self
    }

    /// A reversible transition pair `a→b` / `b→a` with ids `a>b` and `b>a`.
    pub fn link(self, a: &str, b: &str) -> Self {
        let fwd = self.unused_edge_id(&format!("{a}>{b}"));
        let bwd = self.unused_edge_id(&format!("{b}>{a}"));
        self.edge(EdgeSpec::new(fwd.clone(), a, b, "step").inverse_of(bwd.clone()))
            .edge(EdgeSpec::new(bwd, b, a, "step").inverse_of(fwd))
    }

    /// Link consecutive ids into a path.
    pub fn path<'a>(self, ids: impl IntoIterator<Item = &'a str>) -> Self {
        let ids: Vec<&str> = ids.into_iter().collect();
        ids.windows(2).fold(self, |b, w| b.link(w[0], w[1]))
    }

    fn unused_edge_id(&self, base: &str) -> EdgeId {
        let taken = |id: &str| self.edges.iter().any(|e| e.id.as_str() == id);
        let mut candidate = base.to_owned();
        let mut n = 1;
        while taken(&candidate) {
            candidate = format!("{base}#{n}");
            n += 1;
        }
        EdgeId::new(candidate)
    }

    pub fn build(self) -> Result<ConceptSpace, SpaceError> {
        let mut node_ids = BTreeSet::new();
        for n in &self.nodes {
            if n.id.as_str() == SCRATCH_ID {
                return Err(SpaceError::ReservedId(n.id.to_string()));
            }
            if !node_ids.insert(n.id.clone()) {
                return Err(SpaceError::DuplicateId(n.id.to_string()));
            }
        }
        let mut edge_ids = BTreeSet::new();
        for e in &self.edges {
            if !edge_ids.insert(e.id.clone()) {
                return Err(SpaceError::DuplicateId(e.id.to_string()));
            }
            for end in [&e.src, &e.dst] {
                if !node_ids.contains(end) {
                    return Err(SpaceError::DanglingEndpoint { edge: e.id.clone(), node: end.clone() });
                }
            }
        }
        for n in &self.nodes {
            if !is_known_type(&self.vocabulary, &n.concept_type) {
                return Err(SpaceError::UntypedNode { node: n.id.clone(), concept_type: n.concept_type.clone() });
            }
            for x in &n.exclusions {
                let Some(other) = self.nodes.iter().find(|m| &m.id == x) else {
                    return Err(SpaceError::UnknownExclusion { node: n.id.clone(), target: x.clone() });
                };
                if !other.exclusions.contains(&n.id) {
                    return Err(SpaceError::AsymmetricExclusion(n.id.clone(), x.clone()));
                }
            }
        }

        let edges = pair_edges(self.edges, &mut edge_ids, self.synthesize_inverses)?;
        Ok(ConceptSpace::from_parts_unchecked(self.id, self.order, self.vocabulary, self.nodes, edges))
    }
}

fn pair_edges(
    specs: Vec<EdgeSpec>,
    edge_ids: &mut BTreeSet<EdgeId>,
    synthesize: bool,
) -> Result<Vec<TransitionEdge>, SpaceError> {
    let by_id: BTreeMap<EdgeId, &EdgeSpec> = specs.iter().map(|e| (e.id.clone(), e)).collect();
    let mut partner: BTreeMap<EdgeId, EdgeId> = BTreeMap::new();

    // Declared pairings first.
    for e in &specs {
        let Some(inv) = &e.inverse_of else { continue };
        let other = by_id.get(inv).ok_or_else(|| SpaceError::MissingInverse(e.id.clone()))?;
        let self_paired = inv == &e.id;
        if self_paired && !(e.involutive && e.src == e.dst) {
            return Err(SpaceError::InverseMismatch(e.id.clone()));
        }
        if other.src != e.dst || other.dst != e.src {
            return Err(SpaceError::InverseMismatch(e.id.clone()));
        }
        if let Some(back) = &other.inverse_of {
            if back != &e.id {
                return Err(SpaceError::InverseMismatch(e.id.clone()));
            }
        }
        if let Some(prev) = partner.get(inv) {
            if prev != &e.id {
                return Err(SpaceError::InverseMismatch(e.id.clone()));
            }
        }
        partner.insert(e.id.clone(), inv.clone());
        partner.insert(inv.clone(), e.id.clone());
    }

    // Undeclared edges pair with an unpaired reverse edge, in id order.
    let mut unpaired: Vec<&EdgeSpec> = specs.iter().filter(|e| !partner.contains_key(&e.id)).collect();
    unpaired.sort_by(|a, b| a.id.cmp(&b.id));
    let mut synthesized = Vec::new();
    for e in &unpaired {
        if partner.contains_key(&e.id) {
            continue;
        }
        if e.involutive && e.src == e.dst {
            partner.insert(e.id.clone(), e.id.clone());
            continue;
        }
        let mate = unpaired.iter().find(|o| {
            o.id != e.id && !partner.contains_key(&o.id) && o.src == e.dst && o.dst == e.src && !o.involutive
        });
        if let Some(o) = mate {
            partner.insert(e.id.clone(), o.id.clone());
            partner.insert(o.id.clone(), e.id.clone());
        } else if synthesize {
            let mut id = EdgeId::new(format!("{}~", e.id));
            let mut n = 1;
            while edge_ids.contains(&id) {
                id = EdgeId::new(format!("{}~{n}", e.id));
                n += 1;
            }
            edge_ids.insert(id.clone());
            partner.insert(e.id.clone(), id.clone());
            synthesized.push(TransitionEdge {
                id,
                src: e.dst.clone(),
                dst: e.src.clone(),
                label: format!("{}^-1", e.label),
                inverse_of: e.id.clone(),
                involutive: false,
            });
        } else {
            return Err(SpaceError::MissingInverse(e.id.clone()));
        }
    }

    let mut edges: Vec<TransitionEdge> = specs
        .into_iter()
        .map(|e| TransitionEdge {
            inverse_of: partner[&e.id].clone(),
            id: e.id,
            src: e.src,
            dst: e.dst,
            label: e.label,
            involutive: e.involutive,
        })
        .collect();
    edges.extend(synthesized);
    Ok(edges)
}

/// Every invariant violation in `space`, sorted. Empty iff the space is well formed.
pub fn validate(space: &ConceptSpace) -> Vec<SpaceViolation> {
    let mut out = Vec::new();
    for n in space.nodes() {
        if n.id.as_str() == SCRATCH_ID {
            out.push(SpaceViolation::ReservedId { id: n.id.to_string() });
        }
        if !is_known_type(&space.type_vocabulary, &n.concept_type) {
            out.push(SpaceViolation::UntypedNode { node: n.id.clone(), concept_type: n.concept_type.clone() });
        }
        for x in &n.exclusions {
            match space.node(x) {
                None => out.push(SpaceViolation::UnknownExclusion { node: n.id.clone(), target: x.clone() }),
                Some(other) if !other.excludes(&n.id) => {
                    out.push(SpaceViolation::AsymmetricExclusion { a: n.id.clone(), b: x.clone() })
                }
                Some(_) => {}
            }
        }
    }
    for e in space.edges() {
        let mut dangling = false;
        for end in [&e.src, &e.dst] {
            if !space.contains_node(end) {
                dangling = true;
                out.push(SpaceViolation::DanglingEndpoint { edge: e.id.clone(), node: end.clone() });
            }
        }
        if dangling {
            continue;
        }
        match space.edge(&e.inverse_of) {
            None => out.push(SpaceViolation::MissingInverse { edge: e.id.clone() }),
            Some(inv) if inv.id == e.id => {
                if !(e.involutive && e.is_self_loop()) {
                    out.push(SpaceViolation::InverseMismatch { edge: e.id.clone() });
                }
            }
            Some(inv) => {
                if inv.src != e.dst || inv.dst != e.src || inv.inverse_of != e.id {
                    out.push(SpaceViolation::InverseMismatch { edge: e.id.clone() });
                }
            }
        }
    }
    let mut derived: BTreeMap<&NodeId, BTreeSet<&NodeId>> = space.node_ids().map(|n| (n, BTreeSet::new())).collect();
    for e in space.edges() {
        if space.contains_node(&e.src) && space.contains_node(&e.dst) {
            derived.entry(&e.src).or_default().insert(&e.dst);
            derived.entry(&e.dst).or_default().insert(&e.src);
        }
    }
    for (node, adj) in derived {
        let cached: BTreeSet<&NodeId> = space.neighbors(node).collect();
        if cached != adj {
            out.push(SpaceViolation::TopologyStale { node: node.clone() });
        }
    }
    out.sort();
    out
}

/// All nodes reachable from `node` within `radius` transition hops.
pub fn neighborhood(space: &ConceptSpace, node: &NodeId, radius: usize) -> Result<BTreeSet<NodeId>, SpaceError> {
    if !space.contains_node(node) {
        return Err(SpaceError::UnknownNode(node.clone()));
    }
    Ok(bfs_distances(space, node, Some(radius)).into_keys().collect())
}

/// Hop distance from `start` to every node reachable within `limit`.
pub fn bfs_distances(space: &ConceptSpace, start: &NodeId, limit: Option<usize>) -> BTreeMap<NodeId, usize> {
    let mut dist = BTreeMap::new();
    dist.insert(start.clone(), 0);
    let mut queue = VecDeque::from([start.clone()]);
    while let Some(u) = queue.pop_front() {
        let d = dist[&u];
        if limit.is_some_and(|r| d >= r) {
            continue;
        }
        for v in space.neighbors(&u) {
            if !dist.contains_key(v) {
                dist.insert(v.clone(), d + 1);
                queue.push_back(v.clone());
            }
        }
    }
    dist
}
