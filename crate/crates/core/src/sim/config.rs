use serde::{Deserialize, Serialize};

use super::ScenarioError;
use crate::space::random::RandomSpaceParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Mode {
    /// Agents compose transformations directly on their own spaces.
    NoSpan,
    /// Transformations are lifted into a shared span before composing.
    SpanOnly,
    /// As `SpanOnly`, and incoherent agents are repaired every step.
    SpanPlusRepair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivergenceWeights {
    #[serde(default = "one")]
    pub add_edge: f64,
    #[serde(default = "one")]
    pub remove_edge: f64,
    /// Never add a transition between mutually exclusive concepts.
    #[serde(default)]
    pub respect_exclusions: bool,
}

fn one() -> f64 {
    1.0
}

impl Default for DivergenceWeights {
    fn default() -> Self {
        Self { add_edge: 1.0, remove_edge: 1.0, respect_exclusions: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FaultKind {
    /// Strip every transition from the lowest-id node that has any.
    Orphan,
    /// Link the lowest mutually exclusive, non-adjacent pair.
    Contradiction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultSpec {
    pub step: usize,
    pub agent: usize,
    pub kind: FaultKind,
}

/// A scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub agent_count: usize,
    pub nodes: usize,
    pub edge_density: f64,
    #[serde(default = "default_types")]
    pub type_count: usize,
    #[serde(default)]
    pub exclusion_rate: f64,
    /// Divergence mutations per agent per step.
    #[serde(default)]
    pub divergence_rate: usize,
    #[serde(default)]
    pub divergence: DivergenceWeights,
    pub steps: usize,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution_cap: Option<usize>,
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples_per_step: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub faults: Vec<FaultSpec>,
}

fn default_types() -> usize {
    1
}

fn default_samples() -> usize {
    32
}

impl ScenarioConfig {
    pub fn new(mode: Mode, agent_count: usize, seed: u64) -> Self {
        Self {
            name: None,
            agent_count,
            nodes: 8,
            edge_density: 0.35,
            type_count: 1,
            exclusion_rate: 0.0,
            divergence_rate: 0,
            divergence: DivergenceWeights::default(),
            steps: 10,
            mode,
            resolution_cap: None,
            seed,
            samples_per_step: 32,
            faults: Vec::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ScenarioError::InvalidConfig(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs always serialize")
    }

    pub fn check(&self) -> Result<(), ScenarioError> {
        let bad = |msg: &str| Err(ScenarioError::InvalidConfig(msg.to_owned()));
        if self.agent_count == 0 || self.nodes == 0 || self.type_count == 0 || self.samples_per_step == 0 {
            return bad("agent_count, nodes, type_count and samples_per_step must be positive");
        }
        for (name, p) in [("edge_density", self.edge_density), ("exclusion_rate", self.exclusion_rate)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(ScenarioError::InvalidConfig(format!("{name} must lie in [0, 1]")));
            }
        }
        let w = &self.divergence;
        if !(w.add_edge >= 0.0 && w.remove_edge >= 0.0) || (self.divergence_rate > 0 && w.add_edge + w.remove_edge <= 0.0) {
            return bad("divergence weights must be non-negative and not all zero");
        }
        if self.resolution_cap == Some(0) {
            return bad("resolution_cap must be positive");
        }
        if let Some(f) = self.faults.iter().find(|f| f.agent >= self.agent_count) {
            return Err(ScenarioError::InvalidConfig(format!("fault targets missing agent {}", f.agent)));
        }
        Ok(())
    }

    pub(crate) fn space_params(&self) -> RandomSpaceParams {
        RandomSpaceParams {
            nodes: self.nodes,
            edge_density: self.edge_density,
            type_count: self.type_count,
            exclusion_rate: self.exclusion_rate,
            orphan_free: true,
            node_prefix: "n".into(),
        }
    }
}
