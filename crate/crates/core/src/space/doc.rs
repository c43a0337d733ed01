//! JSON file format for spaces.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ConceptNode, ConceptSpace, FitnessField, NodeId, SpaceError, TransitionEdge};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default)]
    pub order: u32,
    #[serde(default)]
    pub type_vocabulary: Vec<String>,
    #[serde(default)]
    pub nodes: Vec<NodeDoc>,
    #[serde(default)]
    pub edges: Vec<EdgeDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitness: Option<FitnessDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDoc {
    pub id: String,
    pub label: String,
    #[serde(rename = "type")]
    pub concept_type: String,
    #[serde(default)]
    pub exclusions: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub id: String,
    pub src: String,
    pub dst: String,
    pub label: String,
    pub inverse_of: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub involutive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitnessDoc {
    pub dimension: usize,
    pub labels: Vec<String>,
    pub values: BTreeMap<String, Vec<f64>>,
}

impl SpaceDocument {
    pub fn from_space(space: &ConceptSpace, fitness: Option<&FitnessField>) -> Self {
        Self {
            id: Some(space.id().to_string()),
            order: space.order(),
            type_vocabulary: space.type_vocabulary().iter().cloned().collect(),
            nodes: space
                .nodes()
                .map(|n| NodeDoc {
                    id: n.id.to_string(),
                    label: n.label.clone(),
                    concept_type: n.concept_type.clone(),
                    exclusions: n.exclusions.iter().map(ToString::to_string).collect(),
                    provenance: None,
                })
                .collect(),
            edges: space
                .edges()
                .map(|e| EdgeDoc {
                    id: e.id.to_string(),
                    src: e.src.to_string(),
                    dst: e.dst.to_string(),
                    label: e.label.clone(),
                    inverse_of: e.inverse_of.to_string(),
                    involutive: e.involutive,
                })
                .collect(),
            fitness: fitness.map(|f| FitnessDoc {
                dimension: f.dimension(),
                labels: f.labels().to_vec(),
                values: f.values().iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            }),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, SpaceError> {
        serde_json::from_str(text).map_err(|e| SpaceError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("space documents always serialize")
    }

    /// Identity used when the document has no `id`: a digest of its content.
    pub fn content_ref(&self) -> String {
        let mut anonymous = self.clone();
        anonymous.id = None;
        let bytes = serde_json::to_vec(&anonymous).expect("space documents always serialize");
        format!("space-{}", &hex::encode(Sha256::digest(&bytes))[..12])
    }

    /// Convert into a space without validating invariants (so that broken
    /// files can be audited with [`super::validate`]). Duplicate ids and
    /// malformed fitness still fail, as they cannot be represented.
    pub fn into_parts(self) -> Result<(ConceptSpace, Option<FitnessField>), SpaceError> {
        let id = self.id.clone().unwrap_or_else(|| self.content_ref());
        let mut seen = BTreeSet::new();
        for n in &self.nodes {
            if !seen.insert(n.id.clone()) {
                return Err(SpaceError::DuplicateId(n.id.clone()));
            }
        }
        let mut seen = BTreeSet::new();
        for e in &self.edges {
            if !seen.insert(e.id.clone()) {
                return Err(SpaceError::DuplicateId(e.id.clone()));
            }
        }
        let nodes = self.nodes.into_iter().map(|n| ConceptNode {
            id: n.id.into(),
            label: n.label,
            concept_type: n.concept_type,
            exclusions: n.exclusions.into_iter().map(NodeId::from).collect(),
        });
        let edges = self.edges.into_iter().map(|e| TransitionEdge {
            id: e.id.into(),
            src: e.src.into(),
            dst: e.dst.into(),
            label: e.label,
            inverse_of: e.inverse_of.into(),
            involutive: e.involutive,
        });
        let space = ConceptSpace::from_parts_unchecked(
            id,
            self.order,
            self.type_vocabulary.into_iter().collect(),
            nodes,
            edges,
        );
        let fitness = self
            .fitness
            .map(|f| {
                if f.dimension != f.labels.len() {
                    return Err(SpaceError::Fitness(format!(
                        "dimension {} does not match {} labels",
                        f.dimension,
                        f.labels.len()
                    )));
                }
                FitnessField::new(f.labels, f.values.into_iter().map(|(k, v)| (NodeId::from(k), v)).collect())
            })
            .transpose()?;
        Ok((space, fitness))
    }
}

impl ConceptSpace {
    pub fn to_json(&self, fitness: Option<&FitnessField>) -> String {
        SpaceDocument::from_space(self, fitness).to_json()
    }

    pub fn from_json(text: &str) -> Result<(ConceptSpace, Option<FitnessField>), SpaceError> {
        SpaceDocument::from_json(text)?.into_parts()
    }
}
