//! Seeded random spaces for scenarios and test corpora.

use rand::Rng;
use thiserror::Error;

use super::{ConceptNode, ConceptSpace, SpaceBuilder, SpaceRef};

#[derive(Debug, Clone, PartialEq)]
pub struct RandomSpaceParams {
    pub nodes: usize,
    /// Probability that any unordered pair of nodes is linked.
    pub edge_density: f64,
    pub type_count: usize,
    /// Probability that a non-adjacent pair is declared mutually exclusive.
    pub exclusion_rate: f64,
    /// Link every isolated node to some other node after sampling.
    pub orphan_free: bool,
    pub node_prefix: String,
}

impl Default for RandomSpaceParams {
    fn default() -> Self {
        Self {
            nodes: 8,
            edge_density: 0.3,
            type_count: 1,
            exclusion_rate: 0.1,
            orphan_free: true,
            node_prefix: "n".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerationError {
    #[error("GENERATION_FAILED: {0}")]
    Degenerate(String),
}

pub fn random_space<R: Rng + ?Sized>(
    id: impl Into<SpaceRef>,
    params: &RandomSpaceParams,
    rng: &mut R,
) -> Result<ConceptSpace, GenerationError> {
    if params.type_count == 0 {
        return Err(GenerationError::Degenerate("type_count must be positive".into()));
    }
    if params.orphan_free && params.nodes > 1 && params.edge_density <= 0.0 {
        return Err(GenerationError::Degenerate(
            "orphan-free generation needs a positive edge density".into(),
        ));
    }
    let n = params.nodes;
    let name = |i: usize| format!("{}{i}", params.node_prefix);
    let types: Vec<String> = (0..params.type_count).map(|t| format!("T{t}")).collect();

    let mut nodes: Vec<ConceptNode> = (0..n)
        .map(|i| {
            let ty = &types[rng.gen_range(0..types.len())];
            ConceptNode::new(name(i), format!("c{i}"), ty.clone())
        })
        .collect();

    let mut adjacent = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < params.edge_density {
                adjacent[i][j] = true;
                adjacent[j][i] = true;
            }
        }
    }
    if params.orphan_free && n > 1 {
        for i in 0..n {
            if !adjacent[i].iter().any(|&x| x) {
                let mut j = rng.gen_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                adjacent[i][j] = true;
                adjacent[j][i] = true;
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if !adjacent[i][j] && rng.gen::<f64>() < params.exclusion_rate {
                let (a, b) = (nodes[i].id.clone(), nodes[j].id.clone());
                nodes[i].exclusions.insert(b);
                nodes[j].exclusions.insert(a);
            }
        }
    }

    let mut builder = SpaceBuilder::new(id).vocabulary(types);
    for node in nodes {
        builder = builder.node(node);
    }
    for i in 0..n {
        for j in i + 1..n {
            if adjacent[i][j] {
                builder = builder.link(&name(i), &name(j));
            }
        }
    }
    builder
        .build()
        .map_err(|e| GenerationError::Degenerate(e.to_string()))
}
