//! Recursive instantiation: an instance's history becomes a space one
//! order up, over which the same operators run again.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coherence::{CoherenceVerdict, Violation, ViolationKind};
use crate::fmi::{f_bridge, replay, FmiError, FmiInstance, HistoryEntry};
use crate::moves::{MoveKind, PrimitiveMove};
use crate::runtime::{RuntimeError, SnapshotStore};
use crate::space::{ConceptNode, ConceptSpace, EdgeId, FitnessField, NodeId, SpaceDocument, SpaceError, TransitionEdge};

/// Type tag of every meta-level node.
pub const META_TYPE: &str = "MetaState";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RecursionError {
    #[error("TRACE_NOT_IN_SPACE: {0}")]
    TraceNotInSpace(String),
    #[error(transparent)]
    Fmi(#[from] FmiError),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
}

/// A space of order N+1 whose nodes are the successive states of an
/// order-N instance and whose transitions are the batches between them.
#[derive(Debug, Clone, PartialEq)]
pub struct ReifiedSpace {
    pub space: ConceptSpace,
    /// Per-dimension mean of the underlying state's fitness.
    pub fitness: FitnessField,
    /// Snapshot key of the state each node stands for.
    pub provenance: BTreeMap<NodeId, String>,
    /// Moves performed when traversing each edge, in traversal direction.
    pub transitions: BTreeMap<EdgeId, Vec<PrimitiveMove>>,
}

impl ReifiedSpace {
    /// Standard space document with a `provenance` key on every node.
    pub fn to_json(&self) -> String {
        let mut doc = SpaceDocument::from_space(&self.space, Some(&self.fitness));
        for n in &mut doc.nodes {
            n.provenance = self.provenance.get(&NodeId::from(n.id.as_str())).cloned();
        }
        doc.to_json()
    }

    pub fn from_json(text: &str) -> Result<Self, SpaceError> {
        let doc = SpaceDocument::from_json(text)?;
        let provenance = doc
            .nodes
            .iter()
            .filter_map(|n| n.provenance.clone().map(|p| (NodeId::from(n.id.as_str()), p)))
            .collect();
        let (space, fitness) = doc.into_parts()?;
        let fitness = fitness.unwrap_or_else(|| FitnessField::zeros(&space, &["value"]));
        Ok(Self { space, fitness, provenance, transitions: BTreeMap::new() })
    }
}

/// Node id of the `i`-th state.
pub fn state_id(i: usize) -> NodeId {
    NodeId::new(format!("s{i}"))
}

fn batch_label(entry: &HistoryEntry) -> String {
    let kinds: Vec<&str> = entry.moves().iter().map(|m| m.kind().as_str()).collect();
    let body = if kinds.is_empty() { "NOOP".to_owned() } else { kinds.join("+") };
    match entry {
        HistoryEntry::Commit { .. } => body,
        HistoryEntry::Perturb { .. } => format!("PERTURB:{body}"),
    }
}

/// Fold a move log into a reified space, storing every intermediate state
/// in `store`.
pub fn reify(log: &str, store: &SnapshotStore) -> Result<ReifiedSpace, RecursionError> {
    let last = replay(log)?;
    let genesis = last.history().genesis();
    let mut inst = FmiInstance::with_capacity(genesis.space.clone(), genesis.fitness.clone(), last.history().capacity())?;

    let mut states = vec![inst.clone()];
    for entry in last.history().entries() {
        inst = match entry {
            HistoryEntry::Commit { moves, .. } => inst.commit(moves.clone())?,
            HistoryEntry::Perturb { moves } => inst.perturb(moves.clone())?,
        };
        states.push(inst.clone());
    }

    let order = genesis.space.order() + 1;
    let labels: Vec<&str> = last.fitness().labels().iter().map(String::as_str).collect();
    let mut provenance = BTreeMap::new();
    let mut values = BTreeMap::new();
    let mut nodes = Vec::new();
    for (i, state) in states.iter().enumerate() {
        let id = state_id(i);
        provenance.insert(id.clone(), store.store(state)?);
        values.insert(id.clone(), state.fitness().mean());
        nodes.push(ConceptNode::new(id.clone(), id.to_string(), META_TYPE));
    }

    let mut edges = Vec::new();
    let mut transitions = BTreeMap::new();
    for (i, entry) in last.history().entries().enumerate() {
        let (a, b) = (state_id(i), state_id(i + 1));
        let fwd = EdgeId::new(format!("{a}>{b}"));
        let bwd = EdgeId::new(format!("{b}>{a}"));
        let label = batch_label(entry);
        edges.push(TransitionEdge {
            id: fwd.clone(),
            src: a.clone(),
            dst: b.clone(),
            label: label.clone(),
            inverse_of: bwd.clone(),
            involutive: false,
        });
        edges.push(TransitionEdge { id: bwd.clone(), src: b, dst: a, label, inverse_of: fwd.clone(), involutive: false });
        transitions.insert(fwd, entry.moves().to_vec());
        transitions.insert(bwd, entry.moves().iter().rev().map(PrimitiveMove::inverse).collect());
    }

    let id = format!("meta({})", genesis.space.id());
    let vocabulary = BTreeSet::from([META_TYPE.to_owned()]);
    let space = ConceptSpace::from_parts_unchecked(id, order, vocabulary, nodes, edges);
    let labels = if labels.is_empty() { vec!["value"] } else { labels };
    let fitness = FitnessField::new(labels.iter().map(|s| s.to_string()).collect(), values)
        .expect("state means share the base dimension");
    Ok(ReifiedSpace { space, fitness, provenance, transitions })
}

/// Join two reified spaces side by side, bridging every pair of nodes that
/// stand for the same snapshot.
pub fn bridge_reified(a: &ReifiedSpace, b: &ReifiedSpace) -> Result<ReifiedSpace, RecursionError> {
    let mut anchors = Vec::new();
    for (x, kx) in &a.provenance {
        for (y, ky) in &b.provenance {
            if kx == ky {
                anchors.push((x.clone(), y.clone()));
            }
        }
    }
    let (space, set) = f_bridge(&a.space, &b.space, &anchors)?;
    let mut provenance = BTreeMap::new();
    let mut values = BTreeMap::new();
    let mut transitions = BTreeMap::new();
    for (i, (side, g)) in [a, b].into_iter().zip(&set.embeddings).enumerate() {
        for (x, key) in &side.provenance {
            provenance.insert(g.map[x].clone(), key.clone());
        }
        for (x, v) in side.fitness.values() {
            values.insert(g.map[x].clone(), v.clone());
        }
        for (e, moves) in &side.transitions {
            transitions.insert(EdgeId::new(format!("{i}/{e}")), moves.clone());
        }
    }
    let fitness = FitnessField::new(a.fitness.labels().to_vec(), values).map_err(FmiError::from)?;
    Ok(ReifiedSpace { space, fitness, provenance, transitions })
}

/// A policy's route through meta-states.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyTrace {
    pub name: String,
    pub path: Vec<NodeId>,
}

impl PolicyTrace {
    pub fn new<'a>(name: &str, path: impl IntoIterator<Item = &'a str>) -> Self {
        Self { name: name.to_owned(), path: path.into_iter().map(NodeId::from).collect() }
    }
}

struct Step<'a> {
    from: &'a NodeId,
    to: &'a NodeId,
    moves: &'a [PrimitiveMove],
}

fn resolve<'a>(reified: &'a ReifiedSpace, trace: &'a PolicyTrace) -> Result<Vec<Step<'a>>, RecursionError> {
    let space = &reified.space;
    if let Some(n) = trace.path.iter().find(|n| !space.contains_node(n)) {
        return Err(RecursionError::TraceNotInSpace(format!("{}: unknown meta-state {n}", trace.name)));
    }
    trace
        .path
        .windows(2)
        .map(|w| {
            let edge = space.edges_between(&w[0], &w[1]).map(|e| &e.id).min().ok_or_else(|| {
                RecursionError::TraceNotInSpace(format!("{}: no transition {} -> {}", trace.name, w[0], w[1]))
            })?;
            let moves = reified.transitions.get(edge).map_or(&[][..], Vec::as_slice);
            Ok(Step { from: &w[0], to: &w[1], moves })
        })
        .collect()
}

type EndpointSet = BTreeSet<(NodeId, NodeId)>;

/// Edge endpoints a batch adds and removes.
fn edge_effects(moves: &[PrimitiveMove]) -> (EndpointSet, EndpointSet) {
    let (mut added, mut removed) = (BTreeSet::new(), BTreeSet::new());
    for m in moves {
        if let Some(ends) = m.edge_endpoints() {
            match m.kind() {
                MoveKind::AddEdgePair => added.insert(ends),
                _ => removed.insert(ends),
            };
        }
    }
    (added, removed)
}

/// Meta-level coherence of a set of policies: two policies contradict each
/// other when, from states with the same snapshot, one adds a transition
/// between two concepts and the other removes one between the same pair.
/// Their successor meta-states are then mutually exclusive.
pub fn meta_chi(reified: &ReifiedSpace, policies: &[PolicyTrace]) -> Result<CoherenceVerdict, RecursionError> {
    let resolved: Vec<Vec<Step>> = policies.iter().map(|p| resolve(reified, p)).collect::<Result<_, _>>()?;
    let state = |n: &NodeId| reified.provenance.get(n).cloned().unwrap_or_else(|| n.to_string());
    let mut violations = Vec::new();
    for (pi, p) in resolved.iter().enumerate() {
        for q in &resolved[pi + 1..] {
            for (i, sp) in p.iter().enumerate() {
                let (p_add, p_rem) = edge_effects(sp.moves);
                for (j, sq) in q.iter().enumerate() {
                    if state(sp.from) != state(sq.from) {
                        continue;
                    }
                    let (q_add, q_rem) = edge_effects(sq.moves);
                    if !p_add.is_disjoint(&q_rem) || !p_rem.is_disjoint(&q_add) {
                        let subject = vec![sp.from.to_string(), sp.to.to_string(), sq.from.to_string(), sq.to.to_string()];
                        violations.push(Violation::new(ViolationKind::ExclusionContradiction, subject, i.max(j) + 1));
                    }
                }
            }
        }
    }
    let depth = resolved.iter().map(Vec::len).max().unwrap_or(0);
    violations.sort();
    violations.dedup();
    Ok(CoherenceVerdict::from_violations(violations, depth))
}

/// A full instance one order up.
pub fn stack(reified: &ReifiedSpace) -> Result<FmiInstance, FmiError> {
    FmiInstance::new(reified.space.clone(), reified.fitness.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coherence::chi_identity;
    use crate::fmi::{f_model, Observation};
    use crate::space::{validate, SpaceBuilder};

    fn base() -> FmiInstance {
        let s = SpaceBuilder::new("base").concepts(["w", "x", "y", "z"]).path(["w", "x", "y", "z"]).build().unwrap();
        FmiInstance::bare(s).unwrap()
    }

    pub(crate) fn three_commits() -> FmiInstance {
        let mut inst = base();
        for (a, b) in [("w", "y"), ("x", "z"), ("w", "z")] {
            inst = f_model(&inst, &[Observation::edge(a, b, "learned")]).unwrap();
        }
        inst
    }

    #[test]
    fn single_state() {
        let store = SnapshotStore::in_memory();
        let r = reify(&base().to_log(), &store).unwrap();
        assert_eq!((r.space.node_count(), r.space.edge_count()), (1, 0));
        assert_eq!(r.space.order(), 1);
    }

    #[test]
    fn three_commit_history() {
        let store = SnapshotStore::in_memory();
        let r = reify(&three_commits().to_log(), &store).unwrap();
        assert_eq!((r.space.node_count(), r.space.edge_count()), (4, 6));
        assert!(validate(&r.space).is_empty());
        assert!(chi_identity(&r.space).coherent);
        for key in r.provenance.values() {
            store.recall(key).unwrap();
        }
        assert_eq!(r.space.edge(&"s0>s1".into()).unwrap().label, "ADD_EDGE_PAIR");
        let back = ReifiedSpace::from_json(&r.to_json()).unwrap();
        assert_eq!((back.space, back.provenance), (r.space.clone(), r.provenance.clone()));

        let meta = stack(&r).unwrap();
        assert_eq!(meta.order(), 1);
        let meta = f_model(&meta, &[Observation::edge("s0", "s3", "shortcut")]).unwrap();
        let r2 = reify(&meta.to_log(), &store).unwrap();
        assert_eq!(r2.space.order(), 2);
        assert_eq!(r2.space.node_count(), 2);
    }

    #[test]
    fn corrupted_log() {
        let mut log = three_commits().to_log();
        log.insert_str(log.len() / 2, "}}");
        assert!(matches!(
            reify(&log, &SnapshotStore::in_memory()),
            Err(RecursionError::Fmi(FmiError::UnreplayableHistory(_)))
        ));
    }

    #[test]
    fn conflicting_policies() {
        let store = SnapshotStore::in_memory();
        let start = base();
        let adds = f_model(&start, &[Observation::edge("x", "y", "again")]).unwrap();
        let cut = crate::moves::PrimitiveMove::unlink(start.space(), &"x>y".into()).unwrap();
        let removes = start.perturb(vec![cut]).unwrap();
        let ra = reify(&adds.to_log(), &store).unwrap();
        let rb = reify(&removes.to_log(), &store).unwrap();
        assert_eq!(ra.provenance[&state_id(0)], rb.provenance[&state_id(0)]);

        let joint = bridge_reified(&ra, &rb).unwrap();
        assert!(validate(&joint.space).is_empty());
        let a = PolicyTrace::new("add", ["0/s0", "0/s1"]);
        let b = PolicyTrace::new("remove", ["1/s0", "1/s1"]);
        let v = meta_chi(&joint, &[a.clone(), b.clone()]).unwrap();
        assert!(!v.coherent);
        assert_eq!(v.violations[0].kind, ViolationKind::ExclusionContradiction);
        assert_eq!(v.violations[0].layer, 1);

        assert!(meta_chi(&joint, std::slice::from_ref(&a)).unwrap().coherent);
        let late = PolicyTrace::new("late", ["1/s1", "1/s0"]);
        assert!(meta_chi(&joint, &[a, late]).unwrap().coherent);
        let bogus = PolicyTrace::new("bogus", ["0/s0", "1/s1"]);
        assert!(matches!(meta_chi(&joint, &[bogus]), Err(RecursionError::TraceNotInSpace(_))));
    }
}
