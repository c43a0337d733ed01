use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ConceptSpace, NodeId, SpaceError, SpaceViolation};

/// Multi-criteria fitness: every node carries a vector of `dimension` reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessField {
    labels: Vec<String>,
    values: BTreeMap<NodeId, Vec<f64>>,
}

impl FitnessField {
    pub fn new(labels: Vec<String>, values: BTreeMap<NodeId, Vec<f64>>) -> Result<Self, SpaceError> {
        if labels.is_empty() {
            return Err(SpaceError::Fitness("dimension must be at least 1".into()));
        }
        if let Some((node, v)) = values.iter().find(|(_, v)| v.len() != labels.len()) {
            return Err(SpaceError::Fitness(format!(
                "{node} has {} values, expected {}",
                v.len(),
                labels.len()
            )));
        }
        Ok(Self { labels, values })
    }

    /// The zero field of the given dimensions over every node of `space`.
    pub fn zeros(space: &ConceptSpace, labels: &[&str]) -> Self {
        let labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        let values = space.node_ids().map(|n| (n.clone(), vec![0.0; labels.len()])).collect();
        Self { labels, values }
    }

    /// One-dimensional field from `(node, value)` pairs.
    pub fn scalar<'a>(label: &str, values: impl IntoIterator<Item = (&'a str, f64)>) -> Self {
        Self {
            labels: vec![label.to_owned()],
            values: values.into_iter().map(|(n, v)| (NodeId::from(n), vec![v])).collect(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn values(&self) -> &BTreeMap<NodeId, Vec<f64>> {
        &self.values
    }

    pub fn get(&self, node: &NodeId) -> Option<&[f64]> {
        self.values.get(node).map(Vec::as_slice)
    }

    /// Projection onto one dimension; 0 for unknown nodes.
    pub fn component(&self, node: &NodeId, dim: usize) -> f64 {
        self.values.get(node).and_then(|v| v.get(dim)).copied().unwrap_or(0.0)
    }

    /// Per-dimension mean over all nodes; zeros when empty.
    pub fn mean(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.dimension()];
        if self.values.is_empty() {
            return acc;
        }
        for v in self.values.values() {
            for (a, x) in acc.iter_mut().zip(v) {
                *a += x;
            }
        }
        let n = self.values.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    }

    /// Totality and dimension checks against `space`.
    pub fn validate_against(&self, space: &ConceptSpace) -> Vec<SpaceViolation> {
        let mut out = Vec::new();
        for n in space.node_ids() {
            match self.values.get(n) {
                None => out.push(SpaceViolation::FitnessUndefined { node: n.clone() }),
                Some(v) if v.len() != self.dimension() => out.push(SpaceViolation::FitnessDimension {
                    node: n.clone(),
                    expected: self.dimension(),
                    found: v.len(),
                }),
                Some(_) => {}
            }
        }
        out
    }

    pub(crate) fn with_value(&self, node: &NodeId, value: Vec<f64>) -> Self {
        let mut f = self.clone();
        f.values.insert(node.clone(), value);
        f
    }

    pub(crate) fn without(&self, node: &NodeId) -> Self {
        let mut f = self.clone();
        f.values.remove(node);
        f
    }

    pub(crate) fn map_node_ids(&self, f: impl Fn(&NodeId) -> NodeId) -> Self {
        Self {
            labels: self.labels.clone(),
            values: self.values.iter().map(|(k, v)| (f(k), v.clone())).collect(),
        }
    }
}
