//! Execution environment around an instance: content-addressed snapshot
//! storage and two traversal modes.
//!
//! System-1 answers from an attractor cache when it can and otherwise runs
//! a fitness-greedy search; neither path is checked against the current
//! space. System-2 searches the current space and admits a step only if
//! the transformation it induces is coherent.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};
use std::cmp::Reverse;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::RwLock;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::coherence::chi;
use crate::fmi::{FmiError, FmiInstance};
use crate::space::{ConceptNode, ConceptSpace, EdgeId, NodeId, SpaceError, TransitionEdge};
use crate::transform::Transformation;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuntimeError {
    #[error("UNKNOWN_KEY: {0}")]
    UnknownKey(String),
    #[error("UNKNOWN_NODE: {0}")]
    UnknownNode(NodeId),
    #[error("IO: {0}")]
    Io(String),
    #[error(transparent)]
    Fmi(#[from] FmiError),
}

impl From<std::io::Error> for RuntimeError {
    fn from(e: std::io::Error) -> Self {
        RuntimeError::Io(e.to_string())
    }
}

/// Hex SHA-256 of an instance's canonical serialization.
pub fn snapshot_key(inst: &FmiInstance) -> String {
    hex::encode(Sha256::digest(inst.to_json().as_bytes()))
}

/// Snapshot store: an in-memory map, optionally mirrored to a directory of
/// `<key>.json` files. Readers share a lock; writers are serialized.
#[derive(Debug, Default)]
pub struct SnapshotStore {
    entries: RwLock<BTreeMap<String, String>>,
    dir: Option<PathBuf>,
}

impl SnapshotStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// A store backed by `dir`, which is created if missing. Existing files
    /// are found lazily on recall.
    pub fn at_dir(dir: impl AsRef<Path>) -> Result<Self, RuntimeError> {
        fs::create_dir_all(dir.as_ref())?;
        Ok(Self { entries: RwLock::default(), dir: Some(dir.as_ref().to_path_buf()) })
    }

    pub fn store(&self, inst: &FmiInstance) -> Result<String, RuntimeError> {
        let payload = inst.to_json();
        let key = hex::encode(Sha256::digest(payload.as_bytes()));
        if let Some(dir) = &self.dir {
            let path = dir.join(format!("{key}.json"));
            if !path.exists() {
                fs::write(&path, &payload)?;
            }
        }
        self.entries.write().expect("snapshot lock poisoned").insert(key.clone(), payload);
        Ok(key)
    }

    pub fn recall(&self, key: &str) -> Result<FmiInstance, RuntimeError> {
        let cached = self.entries.read().expect("snapshot lock poisoned").get(key).cloned();
        let payload = match (cached, &self.dir) {
            (Some(p), _) => p,
            (None, Some(dir)) if is_key(key) => {
                let path = dir.join(format!("{key}.json"));
                fs::read_to_string(path).map_err(|_| RuntimeError::UnknownKey(key.to_owned()))?
            }
            _ => return Err(RuntimeError::UnknownKey(key.to_owned())),
        };
        Ok(FmiInstance::from_json(&payload)?)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.read().expect("snapshot lock poisoned").contains_key(key)
            || self.dir.as_ref().is_some_and(|d| is_key(key) && d.join(format!("{key}.json")).exists())
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("snapshot lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn is_key(key: &str) -> bool {
    key.len() == 64 && key.bytes().all(|b| b.is_ascii_hexdigit())
}

pub type TraversalPath = Vec<EdgeId>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub start: NodeId,
    pub goal: NodeId,
    pub path: TraversalPath,
    /// Instance revision when the path was cached.
    pub revision: u64,
}

/// Previously found paths, keyed by (start, goal).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AttractorCache {
    entries: BTreeMap<(NodeId, NodeId), CacheEntry>,
}

impl AttractorCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, start: &NodeId, goal: &NodeId) -> Option<&CacheEntry> {
        self.entries.get(&(start.clone(), goal.clone()))
    }

    /// Mutations of `inst` since the entry was cached.
    pub fn staleness(&self, start: &NodeId, goal: &NodeId, inst: &FmiInstance) -> Option<u64> {
        self.get(start, goal).map(|e| inst.revision().saturating_sub(e.revision))
    }

    pub fn insert(&mut self, inst: &FmiInstance, start: &NodeId, goal: &NodeId, path: TraversalPath) {
        debug_assert!(path.iter().all(|e| inst.space().edge(e).is_some()));
        let entry = CacheEntry { start: start.clone(), goal: goal.clone(), path, revision: inst.revision() };
        self.entries.insert((start.clone(), goal.clone()), entry);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_json(&self) -> String {
        let list: Vec<&CacheEntry> = self.entries.values().collect();
        serde_json::to_string_pretty(&list).expect("cache entries always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, SpaceError> {
        let list: Vec<CacheEntry> = serde_json::from_str(text).map_err(|e| SpaceError::Parse(e.to_string()))?;
        Ok(Self { entries: list.into_iter().map(|e| ((e.start.clone(), e.goal.clone()), e)).collect() })
    }
}

fn check_endpoints(space: &ConceptSpace, start: &NodeId, goal: &NodeId) -> Result<(), RuntimeError> {
    for n in [start, goal] {
        if !space.contains_node(n) {
            return Err(RuntimeError::UnknownNode(n.clone()));
        }
    }
    Ok(())
}

/// System-1 with the first fitness dimension as priority.
pub fn system1_traverse(
    inst: &FmiInstance,
    start: &NodeId,
    goal: &NodeId,
    cache: &mut AttractorCache,
) -> Result<Option<TraversalPath>, RuntimeError> {
    system1_traverse_by(inst, start, goal, cache, 0)
}

/// Cached path if there is one (returned as is, never re-checked);
/// otherwise greedy best-first toward the node whose fitness component
/// `dim` is closest to the goal's, ties by node id. Found paths are cached.
pub fn system1_traverse_by(
    inst: &FmiInstance,
    start: &NodeId,
    goal: &NodeId,
    cache: &mut AttractorCache,
    dim: usize,
) -> Result<Option<TraversalPath>, RuntimeError> {
    let space = inst.space();
    check_endpoints(space, start, goal)?;
    if start == goal {
        return Ok(Some(Vec::new()));
    }
    if let Some(hit) = cache.get(start, goal) {
        return Ok(Some(hit.path.clone()));
    }
    let target = inst.fitness().component(goal, dim);
    let priority = |n: &NodeId| OrderedF64((inst.fitness().component(n, dim) - target).abs());

    let mut parent: BTreeMap<NodeId, EdgeId> = BTreeMap::new();
    let mut closed = BTreeSet::new();
    let mut open = BinaryHeap::new();
    open.push(Reverse((priority(start), start.clone())));
    while let Some(Reverse((_, n))) = open.pop() {
        if !closed.insert(n.clone()) {
            continue;
        }
        if &n == goal {
            let path = unwind(space, &parent, start, goal);
            cache.insert(inst, start, goal, path.clone());
            return Ok(Some(path));
        }
        for e in sorted_outgoing(space, &n) {
            if !closed.contains(&e.dst) && !parent.contains_key(&e.dst) && &e.dst != start {
                parent.insert(e.dst.clone(), e.id.clone());
                open.push(Reverse((priority(&e.dst), e.dst.clone())));
            }
        }
    }
    Ok(None)
}

/// Uniform-cost search over the current edges, expanding in edge-id order;
/// a step is admitted only if [`step_transformation`] is coherent.
pub fn system2_traverse(inst: &FmiInstance, start: &NodeId, goal: &NodeId) -> Result<Option<TraversalPath>, RuntimeError> {
    let space = inst.space();
    check_endpoints(space, start, goal)?;
    if start == goal {
        return Ok(Some(Vec::new()));
    }
    let mut parent: BTreeMap<NodeId, EdgeId> = BTreeMap::new();
    let mut queue = VecDeque::from([start.clone()]);
    while let Some(n) = queue.pop_front() {
        for e in sorted_outgoing(space, &n) {
            if &e.dst == start || parent.contains_key(&e.dst) || !step_coherent(space, e) {
                continue;
            }
            parent.insert(e.dst.clone(), e.id.clone());
            if &e.dst == goal {
                return Ok(Some(unwind(space, &parent, start, goal)));
            }
            queue.push_back(e.dst.clone());
        }
    }
    Ok(None)
}

/// The transformation induced by traversing `edge`: the transposition of
/// its endpoints, acting on the two-node space spanned by the edge pair.
pub fn step_transformation(space: &ConceptSpace, edge: &TransitionEdge) -> (ConceptSpace, Transformation) {
    let ends: BTreeSet<&NodeId> = [&edge.src, &edge.dst].into();
    let nodes = ends.iter().filter_map(|n| space.node(n)).map(|n| ConceptNode {
        exclusions: n.exclusions.iter().filter(|x| ends.contains(x)).cloned().collect(),
        ..n.clone()
    });
    let edges = [Some(edge), space.edge(&edge.inverse_of)].into_iter().flatten().cloned();
    let local = ConceptSpace::from_parts_unchecked(
        space.id().clone(),
        space.order(),
        space.type_vocabulary().clone(),
        nodes,
        edges,
    );
    let t = Transformation::new(space.id().clone(), [(&edge.src, &edge.dst), (&edge.dst, &edge.src)]);
    (local, t)
}

pub fn step_coherent(space: &ConceptSpace, edge: &TransitionEdge) -> bool {
    let (local, t) = step_transformation(space, edge);
    chi(&t, &local).is_ok_and(|v| v.coherent)
}

/// Whether `path` is a walk from `start` to `goal` over edges present in `space`.
pub fn path_is_valid(space: &ConceptSpace, path: &[EdgeId], start: &NodeId, goal: &NodeId) -> bool {
    let mut at = start;
    for id in path {
        match space.edge(id) {
            Some(e) if &e.src == at => at = &e.dst,
            _ => return false,
        }
    }
    at == goal
}

fn sorted_outgoing<'a>(space: &'a ConceptSpace, n: &NodeId) -> Vec<&'a TransitionEdge> {
    let mut out: Vec<&TransitionEdge> = space.outgoing(n).collect();
    out.sort_by(|a, b| a.id.cmp(&b.id));
    out
}

fn unwind(space: &ConceptSpace, parent: &BTreeMap<NodeId, EdgeId>, start: &NodeId, goal: &NodeId) -> TraversalPath {
    let mut path = Vec::new();
    let mut at = goal.clone();
    while &at != start {
        let e = &parent[&at];
        path.push(e.clone());
        at = space.edge(e).expect("search only follows live edges").src.clone();
    }
    path.reverse();
    path
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrderedF64(f64);

impl Eq for OrderedF64 {}

impl PartialOrd for OrderedF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrderedF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fmi::f_model;
    use crate::fmi::Observation;
    use crate::moves::PrimitiveMove;
    use crate::space::{FitnessField, SpaceBuilder};

    fn ids(path: &[&str]) -> TraversalPath {
        path.iter().map(|e| EdgeId::from(*e)).collect()
    }

    fn path3() -> FmiInstance {
        let s = SpaceBuilder::new("p").concepts(["a", "b", "c"]).path(["a", "b", "c"]).build().unwrap();
        FmiInstance::new(s, FitnessField::scalar("v", [("a", 0.0), ("b", 1.0), ("c", 2.0)])).unwrap()
    }

    /// Square a–b–c–d–a where the greedy route a→c runs through b.
    pub(crate) fn drift_fixture() -> FmiInstance {
        let s = SpaceBuilder::new("square")
            .concepts(["a", "b", "c", "d"])
            .path(["a", "b", "c", "d", "a"])
            .build()
            .unwrap();
        let f = FitnessField::scalar("v", [("a", 0.0), ("b", 1.8), ("c", 2.0), ("d", 1.0)]);
        FmiInstance::new(s, f).unwrap()
    }

    #[test]
    fn trivial_paths() {
        let inst = path3();
        let a = NodeId::from("a");
        assert_eq!(system1_traverse(&inst, &a, &a, &mut AttractorCache::new()).unwrap(), Some(vec![]));
        assert_eq!(system2_traverse(&inst, &a, &a).unwrap(), Some(vec![]));
        let z = NodeId::from("z");
        assert!(matches!(system2_traverse(&inst, &a, &z), Err(RuntimeError::UnknownNode(_))));
    }

    #[test]
    fn path_fixture_both_modes() {
        let inst = path3();
        let (a, c) = (NodeId::from("a"), NodeId::from("c"));
        let mut cache = AttractorCache::new();
        let p1 = system1_traverse(&inst, &a, &c, &mut cache).unwrap().unwrap();
        assert_eq!(p1, ids(&["a>b", "b>c"]));
        assert_eq!(cache.len(), 1);
        assert_eq!(system2_traverse(&inst, &a, &c).unwrap(), Some(p1));
    }

    #[test]
    fn stale_cache_drift() {
        let inst = drift_fixture();
        let (a, c) = (NodeId::from("a"), NodeId::from("c"));
        let mut cache = AttractorCache::new();
        let cached = system1_traverse(&inst, &a, &c, &mut cache).unwrap().unwrap();
        assert_eq!(cached, ids(&["a>b", "b>c"]));

        let cut = PrimitiveMove::unlink(inst.space(), &"b>c".into()).unwrap();
        let later = inst.commit(vec![cut]).unwrap();
        assert_eq!(cache.staleness(&a, &c, &later), Some(1));

        let s1 = system1_traverse(&later, &a, &c, &mut cache).unwrap().unwrap();
        assert!(!path_is_valid(later.space(), &s1, &a, &c));
        let s2 = system2_traverse(&later, &a, &c).unwrap().unwrap();
        assert_eq!(s2, ids(&["a>d", "d>c"]));
        assert!(path_is_valid(later.space(), &s2, &a, &c));
    }

    #[test]
    fn system2_refuses_incoherent_steps() {
        let s = SpaceBuilder::new("t").typed("a", "X").typed("b", "Y").link("a", "b").vocabulary(["X", "Y"]).build().unwrap();
        let inst = FmiInstance::bare(s).unwrap();
        assert_eq!(system2_traverse(&inst, &"a".into(), &"b".into()).unwrap(), None);
        assert!(system1_traverse(&inst, &"a".into(), &"b".into(), &mut AttractorCache::new()).unwrap().is_some());
    }

    #[test]
    fn store_and_recall() {
        let store = SnapshotStore::in_memory();
        let inst = path3();
        let k = store.store(&inst).unwrap();
        assert_eq!(store.store(&inst.clone()).unwrap(), k);
        assert_eq!(store.recall(&k).unwrap(), inst);
        let other = f_model(&inst, &[Observation::edge("a", "c", "x")]).unwrap();
        let k2 = store.store(&other).unwrap();
        assert_ne!(k, k2);
        assert_eq!(store.recall(&k).unwrap(), inst);
        assert!(matches!(store.recall("nope"), Err(RuntimeError::UnknownKey(_))));
    }

    #[test]
    fn directory_store_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let inst = drift_fixture();
        let key = SnapshotStore::at_dir(dir.path()).unwrap().store(&inst).unwrap();
        let reopened = SnapshotStore::at_dir(dir.path()).unwrap();
        assert!(reopened.contains(&key));
        assert_eq!(reopened.recall(&key).unwrap(), inst);
        assert_eq!(key, snapshot_key(&inst));
    }

    #[test]
    fn cache_json_round_trip() {
        let inst = drift_fixture();
        let mut cache = AttractorCache::new();
        system1_traverse(&inst, &"a".into(), &"c".into(), &mut cache).unwrap();
        assert_eq!(AttractorCache::from_json(&cache.to_json()).unwrap(), cache);
    }
}
