//! Transformations: node relabelings of a single space.
//!
//! A transformation stores only the nodes it moves. Every node outside the
//! stored map is fixed, so the map is always read through its total
//! extension [`Transformation::image`]. Structural change never happens
//! here; it goes through [`crate::moves::PrimitiveMove`].

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::moves::PrimitiveMove;
use crate::space::{ConceptNode, ConceptSpace, NodeId, SpaceRef, TransitionEdge};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("SPACE_MISMATCH: transformation acts on {found}, space is {expected}")]
    SpaceMismatch { expected: SpaceRef, found: SpaceRef },
    #[error("DOMAIN_MISMATCH: {left} and {right} share no common space")]
    DomainMismatch { left: SpaceRef, right: SpaceRef },
    #[error("TARGET_MISSING: {0} is not a node of the space")]
    TargetMissing(NodeId),
    #[error("NON_INJECTIVE: {0:?} collide")]
    NotInjective(Vec<NodeId>),
    #[error("PARSE: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "TransformationDoc", into = "TransformationDoc")]
pub struct Transformation {
    space_ref: SpaceRef,
    map: BTreeMap<NodeId, NodeId>,
    provenance: Vec<PrimitiveMove>,
}

/// Wire form: `{space_ref, map: {src: dst}, provenance: [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransformationDoc {
    space_ref: SpaceRef,
    map: BTreeMap<NodeId, NodeId>,
    #[serde(default)]
    provenance: Vec<PrimitiveMove>,
}

impl From<TransformationDoc> for Transformation {
    fn from(d: TransformationDoc) -> Self {
        Transformation::new(d.space_ref, d.map).with_provenance(d.provenance)
    }
}

impl From<Transformation> for TransformationDoc {
    fn from(t: Transformation) -> Self {
        TransformationDoc { space_ref: t.space_ref, map: t.map, provenance: t.provenance }
    }
}

/// Equality is equality of the acted-on space and the total node map;
/// provenance is descriptive only.
impl PartialEq for Transformation {
    fn eq(&self, other: &Self) -> bool {
        self.space_ref == other.space_ref && self.map == other.map
    }
}

impl Eq for Transformation {}

impl Transformation {
    pub fn identity(space_ref: impl Into<SpaceRef>) -> Self {
        Self { space_ref: space_ref.into(), map: BTreeMap::new(), provenance: Vec::new() }
    }

    /// Build from arbitrary `(src, dst)` pairs without checking them against
    /// a space. Fixed points are dropped.
    pub fn new<I, A, B>(space_ref: impl Into<SpaceRef>, pairs: I) -> Self
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<NodeId>,
        B: Into<NodeId>,
    {
        let map = pairs
            .into_iter()
            .map(|(a, b)| (a.into(), b.into()))
            .filter(|(a, b)| a != b)
            .collect();
        Self { space_ref: space_ref.into(), map, provenance: Vec::new() }
    }

    /// Build against `space`, checking that every mentioned node exists.
    pub fn on<I, A, B>(space: &ConceptSpace, pairs: I) -> Result<Self, TransformError>
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<NodeId>,
        B: Into<NodeId>,
    {
        let mut map = BTreeMap::new();
        for (a, b) in pairs {
            let (a, b) = (a.into(), b.into());
            for x in [&a, &b] {
                if !space.contains_node(x) {
                    return Err(TransformError::TargetMissing(x.clone()));
                }
            }
            if a != b {
                map.insert(a, b);
            }
        }
        Ok(Self { space_ref: space.id().clone(), map, provenance: Vec::new() })
    }

    pub fn with_provenance(mut self, provenance: Vec<PrimitiveMove>) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn space_ref(&self) -> &SpaceRef {
        &self.space_ref
    }

    /// Non-fixed entries of the node map.
    pub fn map(&self) -> &BTreeMap<NodeId, NodeId> {
        &self.map
    }

    pub fn provenance(&self) -> &[PrimitiveMove] {
        &self.provenance
    }

    pub fn support(&self) -> impl Iterator<Item = &NodeId> {
        self.map.keys()
    }

    pub fn is_identity(&self) -> bool {
        self.map.is_empty()
    }

    /// Image of `x` under the total extension (identity off the support).
    pub fn image<'a>(&'a self, x: &'a NodeId) -> &'a NodeId {
        self.map.get(x).unwrap_or(x)
    }

    /// Whether the total extension is a bijection of the node set.
    pub fn is_permutation(&self) -> bool {
        let targets: BTreeSet<&NodeId> = self.map.values().collect();
        targets.len() == self.map.len() && targets.iter().all(|t| self.map.contains_key(*t))
    }

    /// Groups of distinct nodes sent to the same image by the total extension.
    pub fn collisions(&self) -> Vec<(NodeId, Vec<NodeId>)> {
        let mut preimages: BTreeMap<&NodeId, BTreeSet<&NodeId>> = BTreeMap::new();
        for (a, b) in &self.map {
            preimages.entry(b).or_default().insert(a);
        }
        for target in preimages.keys().copied().collect::<Vec<_>>() {
            if !self.map.contains_key(target) {
                preimages.get_mut(target).unwrap().insert(target);
            }
        }
        preimages
            .into_iter()
            .filter(|(_, pre)| pre.len() > 1)
            .map(|(t, pre)| (t.clone(), pre.into_iter().cloned().collect()))
            .collect()
    }

    pub fn check_against(&self, space: &ConceptSpace) -> Result<(), TransformError> {
        if &self.space_ref != space.id() {
            return Err(TransformError::SpaceMismatch { expected: space.id().clone(), found: self.space_ref.clone() });
        }
        for (a, b) in &self.map {
            for x in [a, b] {
                if !space.contains_node(x) {
                    return Err(TransformError::TargetMissing(x.clone()));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("transformations always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, TransformError> {
        serde_json::from_str(text).map_err(|e| TransformError::Parse(e.to_string()))
    }
}

/// `second ∘ first`: apply `first`, then `second`.
pub fn compose(first: &Transformation, second: &Transformation) -> Result<Transformation, TransformError> {
    if first.space_ref != second.space_ref {
        return Err(TransformError::DomainMismatch {
            left: first.space_ref.clone(),
            right: second.space_ref.clone(),
        });
    }
    let support: BTreeSet<&NodeId> = first.map.keys().chain(second.map.keys()).collect();
    let map = support
        .into_iter()
        .map(|x| (x.clone(), second.image(first.image(x)).clone()))
        .filter(|(a, b)| a != b)
        .collect();
    let mut provenance = first.provenance.clone();
    provenance.extend(second.provenance.iter().cloned());
    Ok(Transformation { space_ref: first.space_ref.clone(), map, provenance })
}

/// Compose a sequence left to right; the empty sequence is the identity on `space_ref`.
pub fn compose_all<'a>(
    space_ref: &SpaceRef,
    ts: impl IntoIterator<Item = &'a Transformation>,
) -> Result<Transformation, TransformError> {
    ts.into_iter()
        .try_fold(Transformation::identity(space_ref.clone()), |acc, t| compose(&acc, t))
}

pub fn inverse(t: &Transformation) -> Result<Transformation, TransformError> {
    if let Some((_, pre)) = t.collisions().into_iter().next() {
        return Err(TransformError::NotInjective(pre));
    }
    let map = t.map.iter().map(|(a, b)| (b.clone(), a.clone())).collect();
    let provenance = t.provenance.iter().rev().map(PrimitiveMove::inverse).collect();
    Ok(Transformation { space_ref: t.space_ref.clone(), map, provenance })
}

/// Relabel the nodes of `space` through `t`: the concept at `x` moves to
/// `t(x)` and every transition follows its endpoints.
pub fn apply(t: &Transformation, space: &ConceptSpace) -> Result<ConceptSpace, TransformError> {
    t.check_against(space)?;
    if let Some((_, pre)) = t.collisions().into_iter().next() {
        return Err(TransformError::NotInjective(pre));
    }
    let nodes = space.nodes().map(|n| ConceptNode {
        id: t.image(&n.id).clone(),
        label: n.label.clone(),
        concept_type: n.concept_type.clone(),
        exclusions: n.exclusions.iter().map(|x| t.image(x).clone()).collect(),
    });
    let edges = space.edges().map(|e| TransitionEdge {
        src: t.image(&e.src).clone(),
        dst: t.image(&e.dst).clone(),
        ..e.clone()
    });
    Ok(ConceptSpace::from_parts_unchecked(
        space.id().clone(),
        space.order(),
        space.type_vocabulary().clone(),
        nodes,
        edges,
    ))
}

/// Number of transitions per ordered node pair.
pub(crate) fn edge_multiplicity(space: &ConceptSpace) -> BTreeMap<(&NodeId, &NodeId), usize> {
    let mut m = BTreeMap::new();
    for e in space.edges() {
        *m.entry((&e.src, &e.dst)).or_insert(0) += 1;
    }
    m
}

/// Whether `t` is a symmetry of `space`: a bijection that maps edges onto
/// edges and non-edges onto non-edges and preserves types and exclusions.
pub fn is_automorphism(t: &Transformation, space: &ConceptSpace) -> Result<bool, TransformError> {
    t.check_against(space)?;
    if !t.is_permutation() {
        return Ok(false);
    }
    for n in space.nodes() {
        let img = space.node(t.image(&n.id)).expect("checked against space");
        if img.concept_type != n.concept_type {
            return Ok(false);
        }
        let mapped: BTreeSet<&NodeId> = n.exclusions.iter().map(|x| t.image(x)).collect();
        if mapped != img.exclusions.iter().collect() {
            return Ok(false);
        }
    }
    // A bijection preserving every pair's multiplicity preserves non-edges too.
    let mult = edge_multiplicity(space);
    for (&(u, v), &k) in &mult {
        if mult.get(&(t.image(u), t.image(v))).copied().unwrap_or(0) != k {
            return Ok(false);
        }
    }
    Ok(true)
}
