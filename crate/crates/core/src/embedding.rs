//! Structure-preserving embeddings of lower-order spaces into a shared
//! space, transport of transformations along them, and the span
//! construction that produces the shared space.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::space::{validate, ConceptNode, ConceptSpace, NodeId, SpaceError, SpaceRef, TransitionEdge};
use crate::transform::{Transformation, TransformError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmbeddingError {
    #[error("REF_MISMATCH: embedding {expected} does not match space {found}")]
    RefMismatch { expected: SpaceRef, found: SpaceRef },
    #[error("SOURCE_MISMATCH: transformation acts on {found}, embedding source is {expected}")]
    SourceMismatch { expected: SpaceRef, found: SpaceRef },
    #[error("EMBEDDING_INVALID: {0:?}")]
    EmbeddingInvalid(Vec<EmbeddingFailure>),
    #[error("TYPE_COLLISION: label {label} appears with types {first} and {second}")]
    TypeCollision { label: String, first: String, second: String },
    #[error("EMPTY_SPAN: no source spaces")]
    EmptySpan,
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// A total injective map from the nodes of `source_ref` into `target_ref`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Embedding {
    pub source_ref: SpaceRef,
    pub target_ref: SpaceRef,
    pub map: BTreeMap<NodeId, NodeId>,
    /// Declared vocabulary mapping; types not listed map to themselves.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub type_map: BTreeMap<String, String>,
}

impl Embedding {
    pub fn new<I, A, B>(source_ref: impl Into<SpaceRef>, target_ref: impl Into<SpaceRef>, pairs: I) -> Self
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<NodeId>,
        B: Into<NodeId>,
    {
        Self {
            source_ref: source_ref.into(),
            target_ref: target_ref.into(),
            map: pairs.into_iter().map(|(a, b)| (a.into(), b.into())).collect(),
            type_map: BTreeMap::new(),
        }
    }

    pub fn identity(space: &ConceptSpace) -> Self {
        Self::new(space.id().clone(), space.id().clone(), space.node_ids().map(|n| (n.clone(), n.clone())))
    }

    pub fn image(&self, x: &NodeId) -> Option<&NodeId> {
        self.map.get(x)
    }

    pub fn image_nodes(&self) -> BTreeSet<&NodeId> {
        self.map.values().collect()
    }

    fn mapped_type<'a>(&'a self, ty: &'a str) -> &'a str {
        self.type_map.get(ty).map_or(ty, String::as_str)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("embeddings always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, EmbeddingError> {
        serde_json::from_str(text).map_err(|e| EmbeddingError::Space(SpaceError::Parse(e.to_string())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EmbeddingCondition {
    Totality,
    Injectivity,
    EdgePreservation,
    TypePreservation,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EmbeddingFailure {
    pub condition: EmbeddingCondition,
    pub subject: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub passed: bool,
    pub failures: Vec<EmbeddingFailure>,
}

/// Check injectivity, edge preservation (every source transition has an
/// image transition, so radius-1 neighborhoods map into radius-1
/// neighborhoods) and type preservation.
pub fn verify_embedding(
    g: &Embedding,
    source: &ConceptSpace,
    target: &ConceptSpace,
) -> Result<EmbeddingReport, EmbeddingError> {
    if &g.source_ref != source.id() {
        return Err(EmbeddingError::RefMismatch { expected: g.source_ref.clone(), found: source.id().clone() });
    }
    if &g.target_ref != target.id() {
        return Err(EmbeddingError::RefMismatch { expected: g.target_ref.clone(), found: target.id().clone() });
    }
    let mut failures = Vec::new();
    let fail = |c, subject: Vec<String>| EmbeddingFailure { condition: c, subject };

    for n in source.nodes() {
        match g.map.get(&n.id) {
            None => failures.push(fail(EmbeddingCondition::Totality, vec![n.id.to_string()])),
            Some(img) => match target.node(img) {
                None => failures.push(fail(EmbeddingCondition::Totality, vec![n.id.to_string(), img.to_string()])),
                Some(t) if t.concept_type != g.mapped_type(&n.concept_type) => failures.push(fail(
                    EmbeddingCondition::TypePreservation,
                    vec![n.id.to_string(), img.to_string()],
                )),
                Some(_) => {}
            },
        }
    }
    for x in g.map.keys().filter(|x| !source.contains_node(x)) {
        failures.push(fail(EmbeddingCondition::Totality, vec![x.to_string()]));
    }

    let mut preimages: BTreeMap<&NodeId, Vec<&NodeId>> = BTreeMap::new();
    for (a, b) in &g.map {
        preimages.entry(b).or_default().push(a);
    }
    for (img, pre) in preimages.into_iter().filter(|(_, p)| p.len() > 1) {
        let mut subject: Vec<String> = pre.iter().map(|x| x.to_string()).collect();
        subject.push(img.to_string());
        failures.push(fail(EmbeddingCondition::Injectivity, subject));
    }

    for e in source.edges() {
        if let (Some(p), Some(q)) = (g.map.get(&e.src), g.map.get(&e.dst)) {
            if !target.has_edge(p, q) {
                failures.push(fail(
                    EmbeddingCondition::EdgePreservation,
                    vec![e.id.to_string(), p.to_string(), q.to_string()],
                ));
            }
        }
    }
    failures.sort();
    Ok(EmbeddingReport { passed: failures.is_empty(), failures })
}

/// All injective, edge- and type-preserving maps from `source` into
/// `target` (up to `limit`), in lexicographic order of the image tuple
/// taken over source nodes in id order.
pub fn find_embeddings(source: &ConceptSpace, target: &ConceptSpace, limit: Option<usize>) -> Vec<Embedding> {
    let mut out = Vec::new();
    if source.node_count() > target.node_count() || limit == Some(0) {
        return out;
    }
    let order: Vec<&NodeId> = source.node_ids().collect();
    let candidates: Vec<&NodeId> = target.node_ids().collect();
    let mut search = Search {
        source,
        target,
        order: &order,
        candidates: &candidates,
        assigned: BTreeMap::new(),
        used: BTreeSet::new(),
        limit,
        out: &mut out,
    };
    search.extend(0);
    out
}

struct Search<'a> {
    source: &'a ConceptSpace,
    target: &'a ConceptSpace,
    order: &'a [&'a NodeId],
    candidates: &'a [&'a NodeId],
    assigned: BTreeMap<&'a NodeId, &'a NodeId>,
    used: BTreeSet<&'a NodeId>,
    limit: Option<usize>,
    out: &'a mut Vec<Embedding>,
}

impl<'a> Search<'a> {
    fn full(&self) -> bool {
        self.limit.is_some_and(|l| self.out.len() >= l)
    }

    fn extend(&mut self, depth: usize) {
        if self.full() {
            return;
        }
        if depth == self.order.len() {
            self.out.push(Embedding::new(
                self.source.id().clone(),
                self.target.id().clone(),
                self.assigned.iter().map(|(a, b)| ((*a).clone(), (*b).clone())),
            ));
            return;
        }
        let u = self.order[depth];
        for &c in self.candidates {
            if self.used.contains(c) || !self.feasible(u, c) {
                continue;
            }
            self.assigned.insert(u, c);
            self.used.insert(c);
            self.extend(depth + 1);
            self.assigned.remove(u);
            self.used.remove(c);
            if self.full() {
                return;
            }
        }
    }

    fn feasible(&self, u: &NodeId, c: &NodeId) -> bool {
        if self.source.concept_type(u) != self.target.concept_type(c) {
            return false;
        }
        if self.source.degree(u) > self.target.degree(c) {
            return false;
        }
        let image = |w: &NodeId| if w == u { Some(c) } else { self.assigned.get(w).copied() };
        for e in self.source.outgoing(u) {
            if let Some(q) = image(&e.dst) {
                if !self.target.has_edge(c, q) {
                    return false;
                }
            }
        }
        for e in self.source.incoming(u) {
            if let Some(p) = image(&e.src) {
                if !self.target.has_edge(p, c) {
                    return false;
                }
            }
        }
        true
    }
}

/// Transport `t` along `g`: the lifted map sends `γ(x)` to `γ(t(x))` and
/// fixes every target node outside the image.
pub fn lift(
    g: &Embedding,
    t: &Transformation,
    source: &ConceptSpace,
    target: &ConceptSpace,
) -> Result<Transformation, EmbeddingError> {
    if t.space_ref() != &g.source_ref {
        return Err(EmbeddingError::SourceMismatch { expected: g.source_ref.clone(), found: t.space_ref().clone() });
    }
    let report = verify_embedding(g, source, target)?;
    if !report.passed {
        return Err(EmbeddingError::EmbeddingInvalid(report.failures));
    }
    t.check_against(source)?;
    let pairs = t.map().iter().map(|(a, b)| (g.map[a].clone(), g.map[b].clone()));
    Ok(Transformation::new(g.target_ref.clone(), pairs))
}

/// The copy of `source` sitting inside `target` along `g`: target node ids,
/// labels and types, with the source's transitions and exclusions carried
/// across. Lifted transformations act on it exactly as the original acts
/// on `source`.
pub fn image_space(g: &Embedding, source: &ConceptSpace, target: &ConceptSpace) -> Result<ConceptSpace, EmbeddingError> {
    let report = verify_embedding(g, source, target)?;
    if !report.passed {
        return Err(EmbeddingError::EmbeddingInvalid(report.failures));
    }
    let img = |x: &NodeId| g.map[x].clone();
    let nodes = source.nodes().map(|n| {
        let t = target.node(&g.map[&n.id]).expect("verified");
        ConceptNode {
            id: t.id.clone(),
            label: t.label.clone(),
            concept_type: t.concept_type.clone(),
            exclusions: n.exclusions.iter().map(img).collect(),
        }
    });
    let edges = source.edges().map(|e| TransitionEdge { src: img(&e.src), dst: img(&e.dst), ..e.clone() });
    Ok(ConceptSpace::from_parts_unchecked(
        target.id().clone(),
        target.order(),
        target.type_vocabulary().clone(),
        nodes,
        edges,
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbeddingSet {
    pub target_ref: SpaceRef,
    pub embeddings: Vec<Embedding>,
}

impl EmbeddingSet {
    /// Whether all embeddings share the target and overlapping images agree on type.
    pub fn is_consistent(&self, sources: &[&ConceptSpace], target: &ConceptSpace) -> bool {
        if &self.target_ref != target.id() || self.embeddings.iter().any(|g| g.target_ref != self.target_ref) {
            return false;
        }
        let mut seen: BTreeMap<&NodeId, &str> = BTreeMap::new();
        for (g, s) in self.embeddings.iter().zip(sources) {
            for (x, y) in &g.map {
                let Some(ty) = s.concept_type(x) else { return false };
                if let Some(prev) = seen.insert(y, ty) {
                    if prev != ty {
                        return false;
                    }
                }
            }
        }
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpanStrategy {
    /// Sources side by side; node `x` of source `i` becomes `i/x`.
    #[default]
    DisjointUnion,
    /// Nodes with equal label and type are identified across sources.
    MergeByLabel,
}

/// Build a shared space for `sources` together with a verified embedding of each.
pub fn span(sources: &[&ConceptSpace], strategy: SpanStrategy) -> Result<(ConceptSpace, EmbeddingSet), EmbeddingError> {
    let (&first, rest) = sources.split_first().ok_or(EmbeddingError::EmptySpan)?;
    if rest.is_empty() {
        let set = EmbeddingSet { target_ref: first.id().clone(), embeddings: vec![Embedding::identity(first)] };
        return Ok((first.clone(), set));
    }

    let target_ref = SpaceRef::new(format!(
        "span({})",
        sources.iter().map(|s| s.id().as_str()).collect::<Vec<_>>().join("+")
    ));
    let order = sources.iter().map(|s| s.order()).max().unwrap_or(0) + 1;
    let vocabulary: BTreeSet<String> = sources.iter().flat_map(|s| s.type_vocabulary().iter().cloned()).collect();

    let maps: Vec<BTreeMap<NodeId, NodeId>> = match strategy {
        SpanStrategy::DisjointUnion => sources
            .iter()
            .enumerate()
            .map(|(i, s)| s.node_ids().map(|x| (x.clone(), NodeId::new(format!("{i}/{x}")))).collect())
            .collect(),
        SpanStrategy::MergeByLabel => merge_keys(sources)?,
    };

    let mut nodes: BTreeMap<NodeId, ConceptNode> = BTreeMap::new();
    let mut edges = Vec::new();
    for (i, (s, m)) in sources.iter().zip(&maps).enumerate() {
        for n in s.nodes() {
            let id = m[&n.id].clone();
            let entry = nodes
                .entry(id.clone())
                .or_insert_with(|| ConceptNode::new(id, n.label.clone(), n.concept_type.clone()));
            entry.exclusions.extend(n.exclusions.iter().map(|x| m[x].clone()));
        }
        for e in s.edges() {
            edges.push(TransitionEdge {
                id: format!("{i}/{}", e.id).into(),
                src: m[&e.src].clone(),
                dst: m[&e.dst].clone(),
                label: e.label.clone(),
                inverse_of: format!("{i}/{}", e.inverse_of).into(),
                involutive: e.involutive,
            });
        }
    }
    let target = ConceptSpace::from_parts_unchecked(target_ref.clone(), order, vocabulary, nodes.into_values(), edges);
    if let Some(v) = validate(&target).into_iter().next() {
        return Err(SpaceError::Parse(format!("span produced an invalid space: {v}")).into());
    }

    let embeddings: Vec<Embedding> = sources
        .iter()
        .zip(maps)
        .map(|(s, map)| Embedding { source_ref: s.id().clone(), target_ref: target_ref.clone(), map, type_map: BTreeMap::new() })
        .collect();
    for (g, s) in embeddings.iter().zip(sources) {
        let report = verify_embedding(g, s, &target)?;
        if !report.passed {
            return Err(EmbeddingError::EmbeddingInvalid(report.failures));
        }
    }
    Ok((target, EmbeddingSet { target_ref, embeddings }))
}

/// Merged node ids keyed by (label, occurrence of that label within its source).
fn merge_keys(sources: &[&ConceptSpace]) -> Result<Vec<BTreeMap<NodeId, NodeId>>, EmbeddingError> {
    let mut types: BTreeMap<(String, usize), String> = BTreeMap::new();
    let mut maps = Vec::new();
    for s in sources {
        let mut occurrences: BTreeMap<&str, usize> = BTreeMap::new();
        let mut m = BTreeMap::new();
        for n in s.nodes() {
            let j = occurrences.entry(n.label.as_str()).or_insert(0);
            let key = (n.label.clone(), *j);
            *j += 1;
            match types.get(&key) {
                Some(ty) if ty != &n.concept_type => {
                    return Err(EmbeddingError::TypeCollision {
                        label: n.label.clone(),
                        first: ty.clone(),
                        second: n.concept_type.clone(),
                    })
                }
                Some(_) => {}
                None => {
                    types.insert(key.clone(), n.concept_type.clone());
                }
            }
            let id = if key.1 == 0 { key.0.clone() } else { format!("{}#{}", key.0, key.1) };
            m.insert(n.id.clone(), NodeId::new(id));
        }
        maps.push(m);
    }
    Ok(maps)
}
