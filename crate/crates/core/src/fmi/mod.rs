//! The operator algebra over a space: an [`FmiInstance`] plus the six
//! internal functions (evaluate, model, stabilize, adapt, decompose,
//! bridge) built from the primitive move basis.
//!
//! Every mutation goes through [`FmiInstance::commit`], which refuses any
//! move sequence whose resulting space fails [`validate`] or whose identity
//! coherence check is incoherent.

mod closure;
mod history;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coherence::{chi, chi_identity, diagnose, CoherenceVerdict, Violation};
use crate::embedding::{span, EmbeddingError, EmbeddingSet, SpanStrategy};
use crate::moves::{MoveError, PrimitiveMove};
use crate::space::{validate, ConceptNode, ConceptSpace, FitnessField, NodeId, SpaceDocument, SpaceError};
use crate::transform::{TransformError, Transformation};

pub use closure::{f_decompose, recompose};
pub use history::{replay, Genesis, History, HistoryEntry, LogLine, DEFAULT_CAPACITY};

/// Default bound on repair rounds in [`f_adapt`].
pub const DEFAULT_REPAIR_ROUNDS: usize = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FmiError {
    #[error("COMMIT_REJECTED: {0}")]
    CommitRejected(String),
    #[error("REPAIR_EXHAUSTED after {rounds} rounds, {} violations remain", remaining.len())]
    RepairExhausted { rounds: usize, remaining: Vec<Violation> },
    #[error("INCOHERENT_INPUT: {} violations", verdict.violations.len())]
    IncoherentInput { verdict: CoherenceVerdict },
    #[error("TYPE_INCOMPATIBLE_ANCHOR: {a} ({a_type}) and {b} ({b_type})")]
    TypeIncompatibleAnchor { a: NodeId, a_type: String, b: NodeId, b_type: String },
    #[error("UNREPLAYABLE_HISTORY: {0}")]
    UnreplayableHistory(String),
    #[error("FITNESS_DIMENSION: expected {expected}, found {found}")]
    FitnessDimension { expected: usize, found: usize },
    #[error(transparent)]
    Move(#[from] MoveError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// A space with its fitness field and the history that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct FmiInstance {
    pub(crate) space: ConceptSpace,
    pub(crate) fitness: FitnessField,
    pub(crate) history: History,
    pub(crate) revision: u64,
}

impl FmiInstance {
    /// Start an instance. The space must satisfy every structural invariant
    /// and the fitness field must be total over it; identity coherence is
    /// only demanded of later commits.
    pub fn new(space: ConceptSpace, fitness: FitnessField) -> Result<Self, FmiError> {
        Self::with_capacity(space, fitness, DEFAULT_CAPACITY)
    }

    /// An instance with a one-dimensional zero fitness field.
    pub fn bare(space: ConceptSpace) -> Result<Self, FmiError> {
        let fitness = FitnessField::zeros(&space, &["value"]);
        Self::new(space, fitness)
    }

    pub fn with_capacity(space: ConceptSpace, fitness: FitnessField, capacity: usize) -> Result<Self, FmiError> {
        let mut problems = validate(&space);
        problems.extend(fitness.validate_against(&space));
        if let Some(v) = problems.first() {
            return Err(FmiError::CommitRejected(v.to_string()));
        }
        let history = History::new(space.clone(), fitness.clone(), capacity);
        Ok(Self { space, fitness, history, revision: 0 })
    }

    pub fn space(&self) -> &ConceptSpace {
        &self.space
    }

    pub fn fitness(&self) -> &FitnessField {
        &self.fitness
    }

    pub fn order(&self) -> u32 {
        self.space.order()
    }

    pub fn history(&self) -> &History {
        &self.history
    }

    /// Number of history entries ever appended, including folded ones.
    pub fn revision(&self) -> u64 {
        self.revision
    }

    fn apply_moves(&self, moves: &[PrimitiveMove]) -> Result<(ConceptSpace, FitnessField), MoveError> {
        let mut space = self.space.clone();
        let mut fitness = self.fitness.clone();
        for m in moves {
            space = m.apply(&space)?;
            fitness = m.apply_fitness(&fitness);
        }
        Ok((space, fitness))
    }

    /// Apply `moves` atomically through the commit gate.
    pub fn commit(&self, moves: Vec<PrimitiveMove>) -> Result<Self, FmiError> {
        let (space, fitness) = self.apply_moves(&moves)?;
        let mut problems: Vec<String> = validate(&space).iter().map(ToString::to_string).collect();
        problems.extend(fitness.validate_against(&space).iter().map(ToString::to_string));
        if !problems.is_empty() {
            return Err(FmiError::CommitRejected(problems.join(", ")));
        }
        let verdict = history::gate_verdict(&space);
        if !verdict.coherent {
            let described: Vec<String> = verdict.violations.iter().map(ToString::to_string).collect();
            return Err(FmiError::CommitRejected(described.join(", ")));
        }
        Ok(self.append(space, fitness, HistoryEntry::Commit { moves, verdict }))
    }

    /// Apply externally imposed moves without the coherence gate. The moves
    /// must still be well formed.
    pub fn perturb(&self, moves: Vec<PrimitiveMove>) -> Result<Self, FmiError> {
        let (space, fitness) = self.apply_moves(&moves)?;
        Ok(self.append(space, fitness, HistoryEntry::Perturb { moves }))
    }

    fn append(&self, space: ConceptSpace, fitness: FitnessField, entry: HistoryEntry) -> Self {
        let mut history = self.history.clone();
        history.push(entry);
        Self { space, fitness, history, revision: self.revision + 1 }
    }

    /// Replace the state by one that no move sequence reaches (for example
    /// after exclusion sets change). History restarts from the new state;
    /// the revision still advances.
    pub fn rebase(&self, space: ConceptSpace, fitness: FitnessField) -> Result<Self, FmiError> {
        let mut next = Self::with_capacity(space, fitness, self.history.capacity())?;
        next.revision = self.revision + 1;
        next.history.rebase_revision(next.revision);
        Ok(next)
    }

    /// The append-only move log; [`replay`] turns it back into `self`.
    pub fn to_log(&self) -> String {
        self.history.to_log()
    }

    /// Canonical single-document serialization.
    pub fn to_json(&self) -> String {
        let doc = InstanceDoc {
            revision: self.revision,
            space: SpaceDocument::from_space(&self.space, Some(&self.fitness)),
            log: self.to_log(),
        };
        serde_json::to_string(&doc).expect("instances always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, FmiError> {
        let doc: InstanceDoc = serde_json::from_str(text).map_err(|e| SpaceError::Parse(e.to_string()))?;
        let inst = replay(&doc.log)?;
        let (space, fitness) = doc.space.into_parts()?;
        if inst.space != space || Some(&inst.fitness) != fitness.as_ref() || inst.revision != doc.revision {
            return Err(FmiError::UnreplayableHistory("log does not reproduce the recorded state".into()));
        }
        Ok(inst)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    revision: u64,
    space: SpaceDocument,
    log: String,
}

/// Result of evaluating a candidate transformation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub verdict: CoherenceVerdict,
    /// Mean over the support of `fitness(t(x)) - fitness(x)`, per dimension.
    pub delta_fitness: Vec<f64>,
    /// Mean fitness over the image of the support (whole-space mean for the identity).
    pub predicted_fitness: Vec<f64>,
    /// L∞ gap between `predicted_fitness` and the target.
    pub distance_to_target: f64,
}

/// Coherence verdict and fitness delta of `t`; never mutates anything.
pub fn f_eval(inst: &FmiInstance, t: &Transformation, target_fitness: &[f64]) -> Result<EvalReport, FmiError> {
    let verdict = chi(t, &inst.space)?;
    let dim = inst.fitness.dimension();
    if target_fitness.len() != dim {
        return Err(FmiError::FitnessDimension { expected: dim, found: target_fitness.len() });
    }
    let support: Vec<&NodeId> = t.support().collect();
    let mut delta = vec![0.0; dim];
    let mut predicted = vec![0.0; dim];
    if support.is_empty() {
        predicted = inst.fitness.mean();
    } else {
        for x in &support {
            let y = t.image(x);
            for d in 0..dim {
                let after = inst.fitness.component(y, d);
                delta[d] += after - inst.fitness.component(x, d);
                predicted[d] += after;
            }
        }
        let n = support.len() as f64;
        delta.iter_mut().chain(predicted.iter_mut()).for_each(|v| *v /= n);
    }
    let distance_to_target =
        predicted.iter().zip(target_fitness).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    Ok(EvalReport { verdict, delta_fitness: delta, predicted_fitness: predicted, distance_to_target })
}

/// A structural assertion for [`f_model`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "assert", rename_all = "snake_case")]
pub enum Observation {
    Node {
        node: ConceptNode,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        fitness: Option<Vec<f64>>,
    },
    Edge { a: NodeId, b: NodeId, label: String },
}

impl Observation {
    pub fn edge(a: impl Into<NodeId>, b: impl Into<NodeId>, label: &str) -> Self {
        Observation::Edge { a: a.into(), b: b.into(), label: label.to_owned() }
    }
}

/// Incorporate observations as `ADD_NODE` / `ADD_EDGE_PAIR` moves, committed
/// as one batch.
pub fn f_model(inst: &FmiInstance, observations: &[Observation]) -> Result<FmiInstance, FmiError> {
    if observations.is_empty() {
        return Ok(inst.clone());
    }
    let mut space = inst.space.clone();
    let mut moves = Vec::with_capacity(observations.len());
    for obs in observations {
        let m = match obs {
            Observation::Node { node, fitness } => {
                PrimitiveMove::AddNode { node: node.clone(), fitness: fitness.clone() }
            }
            Observation::Edge { a, b, label } => PrimitiveMove::link(&space, a, b, label),
        };
        space = m.apply(&space)?;
        moves.push(m);
    }
    inst.commit(moves)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StabilityDecision {
    Accept,
    Defer,
}

/// Damp oscillation: defer `t` if it moves any node touched by one of the
/// last `window` applied moves.
pub fn f_stability(inst: &FmiInstance, t: &Transformation, window: usize) -> StabilityDecision {
    let recent: BTreeSet<NodeId> = inst.history.recent_moves().take(window).flat_map(|m| m.touched_nodes()).collect();
    if t.support().any(|x| recent.contains(x)) {
        StabilityDecision::Defer
    } else {
        StabilityDecision::Accept
    }
}

/// Repair with the default round bound.
pub fn f_adapt(inst: &FmiInstance, verdict: &CoherenceVerdict) -> Result<FmiInstance, FmiError> {
    f_adapt_bounded(inst, verdict, DEFAULT_REPAIR_ROUNDS)
}

/// Apply repair hints until the identity check on the repaired space is
/// coherent. The first round acts on `verdict`; later rounds on the
/// space's own identity verdict. Each round must strictly decrease
/// (violation count, hint move count) or the repair is abandoned. All
/// applied moves are committed as one batch.
pub fn f_adapt_bounded(inst: &FmiInstance, verdict: &CoherenceVerdict, max_rounds: usize) -> Result<FmiInstance, FmiError> {
    if verdict.coherent {
        return Ok(inst.clone());
    }
    let mut space = inst.space.clone();
    let mut applied = Vec::new();
    repair_round(verdict, &mut space, &mut applied);

    let mut previous: Option<(usize, usize)> = None;
    let mut rounds = 1;
    loop {
        let current = chi_identity(&space);
        if current.coherent {
            break;
        }
        let hints = diagnose(&current, &space);
        let measure = (current.violations.len(), hints.iter().map(|h| h.moves().len()).sum::<usize>());
        let stalled = previous.is_some_and(|p| measure >= p);
        if stalled || rounds >= max_rounds || !repair_round(&current, &mut space, &mut applied) {
            return Err(FmiError::RepairExhausted { rounds, remaining: current.violations });
        }
        previous = Some(measure);
        rounds += 1;
    }
    if applied.is_empty() {
        return Ok(inst.clone());
    }
    inst.commit(applied)
}

/// Apply the deduplicated hint moves that are still well formed; reports
/// whether anything changed.
fn repair_round(verdict: &CoherenceVerdict, space: &mut ConceptSpace, applied: &mut Vec<PrimitiveMove>) -> bool {
    let mut batch: Vec<PrimitiveMove> = Vec::new();
    for hint in diagnose(verdict, space) {
        for m in hint.moves() {
            if !batch.contains(m) {
                batch.push(m.clone());
            }
        }
    }
    let mut changed = false;
    for m in batch {
        if let Ok(next) = m.apply(space) {
            *space = next;
            applied.push(m);
            changed = true;
        }
    }
    changed
}

/// Disjoint union of `a` and `b` plus a `bridge` transition pair between
/// the images of each anchor pair.
pub fn f_bridge(
    a: &ConceptSpace,
    b: &ConceptSpace,
    anchors: &[(NodeId, NodeId)],
) -> Result<(ConceptSpace, EmbeddingSet), FmiError> {
    let (mut shared, set) = span(&[a, b], SpanStrategy::DisjointUnion)?;
    for (x, y) in anchors {
        let x_type = a.concept_type(x).ok_or_else(|| SpaceError::UnknownNode(x.clone()))?;
        let y_type = b.concept_type(y).ok_or_else(|| SpaceError::UnknownNode(y.clone()))?;
        if x_type != y_type {
            return Err(FmiError::TypeIncompatibleAnchor {
                a: x.clone(),
                a_type: x_type.to_owned(),
                b: y.clone(),
                b_type: y_type.to_owned(),
            });
        }
        let (p, q) = (&set.embeddings[0].map[x], &set.embeddings[1].map[y]);
        shared = PrimitiveMove::link(&shared, p, q, "bridge").apply(&shared)?;
    }
    Ok((shared, set))
}
