//! The coherence predicate.
//!
//! `chi(t, S)` holds iff the total extension `π` of `t` satisfies, on `S`:
//!
//! * C1: `π` is injective;
//! * C2: every transition `u→v` has an image transition `π(u)→π(v)`;
//! * C3: `π` preserves concept types;
//! * C4: no concept is orphaned: in a space of two or more nodes, every node
//!   keeps at least one incident transition whose image exists (a node with
//!   no transitions at all is already orphaned);
//! * C5: no node is sent into its own exclusion set, and no transition's
//!   image links two mutually exclusive concepts.
//!
//! `chi_path` audits every prefix composite of a sequence and adds C6, an
//! orbit test: a composite permutation must not move a node into the
//! exclusion set of any node on the same cycle.
//!
//! All checks are polynomial in nodes plus edges.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::moves::PrimitiveMove;
use crate::space::{bfs_distances, ConceptSpace, EdgeId, NodeId};
use crate::transform::{compose, Transformation, TransformError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationKind {
    NonInjective,
    AdjacencyBroken,
    TypeViolation,
    OrphanedConcept,
    ExclusionContradiction,
    CycleInconsistent,
}

impl ViolationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationKind::NonInjective => "NON_INJECTIVE",
            ViolationKind::AdjacencyBroken => "ADJACENCY_BROKEN",
            ViolationKind::TypeViolation => "TYPE_VIOLATION",
            ViolationKind::OrphanedConcept => "ORPHANED_CONCEPT",
            ViolationKind::ExclusionContradiction => "EXCLUSION_CONTRADICTION",
            ViolationKind::CycleInconsistent => "CYCLE_INCONSISTENT",
        }
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One failed clause. `subject` lists node and edge ids of the audited space:
///
/// | kind | subject |
/// |---|---|
/// | NON_INJECTIVE | colliding nodes, then their common image if not among them |
/// | ADJACENCY_BROKEN | edge (pair key), image source, image target |
/// | TYPE_VIOLATION | node, image |
/// | ORPHANED_CONCEPT | node, and its image if it moved |
/// | EXCLUSION_CONTRADICTION | node, image; or edge, image source, image target; at the meta level, the two conflicting steps |
/// | CYCLE_INCONSISTENT | the nodes of the offending cycle |
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub subject: Vec<String>,
    pub layer: usize,
}

impl Violation {
    pub fn new(kind: ViolationKind, subject: Vec<String>, layer: usize) -> Self {
        Self { kind, subject, layer }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}) at layer {}", self.kind, self.subject.join(","), self.layer)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoherenceVerdict {
    pub coherent: bool,
    pub violations: Vec<Violation>,
    pub checked_depth: usize,
}

impl CoherenceVerdict {
    pub fn from_violations(violations: Vec<Violation>, checked_depth: usize) -> Self {
        Self { coherent: violations.is_empty(), violations, checked_depth }
    }

    pub fn coherent(checked_depth: usize) -> Self {
        Self::from_violations(Vec::new(), checked_depth)
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.count(kind) > 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("verdicts always serialize")
    }
}

/// C1–C5 for the total extension of `t` on `space`.
pub(crate) fn audit(t: &Transformation, space: &ConceptSpace, layer: usize) -> Vec<Violation> {
    use ViolationKind::*;
    let s = |x: &NodeId| x.to_string();
    let mut out = Vec::new();

    for (target, pre) in t.collisions() {
        let mut subject: Vec<String> = pre.iter().map(s).collect();
        if !pre.contains(&target) {
            subject.push(s(&target));
        }
        out.push(Violation::new(NonInjective, subject, layer));
    }

    for e in space.edge_pairs() {
        let (p, q) = (t.image(&e.src), t.image(&e.dst));
        if !space.has_edge(p, q) {
            out.push(Violation::new(AdjacencyBroken, vec![e.id.to_string(), s(p), s(q)], layer));
        }
        if space.mutually_exclusive(p, q) {
            out.push(Violation::new(ExclusionContradiction, vec![e.id.to_string(), s(p), s(q)], layer));
        }
    }

    let many = space.node_count() >= 2;
    for n in space.nodes() {
        let img = t.image(&n.id);
        let moved = img != &n.id;
        if space.concept_type(img) != Some(n.concept_type.as_str()) {
            out.push(Violation::new(TypeViolation, vec![s(&n.id), s(img)], layer));
        }
        if many && !space.incident(&n.id).any(|e| space.has_edge(t.image(&e.src), t.image(&e.dst))) {
            let mut subject = vec![s(&n.id)];
            if moved {
                subject.push(s(img));
            }
            out.push(Violation::new(OrphanedConcept, subject, layer));
        }
        if n.excludes(img) {
            out.push(Violation::new(ExclusionContradiction, vec![s(&n.id), s(img)], layer));
        }
    }

    out.sort();
    out
}

/// C6 on a composite: cycles that carry a node into the exclusion set of a
/// node on the same cycle.
fn cycle_consistency(t: &Transformation, space: &ConceptSpace, layer: usize) -> Vec<Violation> {
    if t.is_identity() || !t.is_permutation() {
        return Vec::new();
    }
    let mut seen: BTreeSet<&NodeId> = BTreeSet::new();
    let mut out = Vec::new();
    for start in t.support() {
        if seen.contains(start) {
            continue;
        }
        let mut cycle = vec![start];
        let mut x = t.image(start);
        while x != start {
            cycle.push(x);
            x = t.image(x);
        }
        seen.extend(cycle.iter().copied());
        let inconsistent = cycle.iter().any(|x| {
            let landed = t.image(x);
            cycle.iter().any(|y| space.mutually_exclusive(y, landed))
        });
        if inconsistent {
            let mut subject: Vec<String> = cycle.iter().map(|x| x.to_string()).collect();
            subject.sort();
            out.push(Violation::new(ViolationKind::CycleInconsistent, subject, layer));
        }
    }
    out
}

/// Coherence of a single transformation.
pub fn chi(t: &Transformation, space: &ConceptSpace) -> Result<CoherenceVerdict, TransformError> {
    t.check_against(space)?;
    Ok(CoherenceVerdict::from_violations(audit(t, space, 1), 1))
}

/// Coherence of the identity on `space`: the space's own structural audit.
pub fn chi_identity(space: &ConceptSpace) -> CoherenceVerdict {
    CoherenceVerdict::from_violations(audit(&Transformation::identity(space.id().clone()), space, 1), 1)
}

/// Audit every prefix composite `T1`, `T2∘T1`, …; stops at the first failing layer.
pub fn chi_path(ts: &[Transformation], space: &ConceptSpace) -> Result<CoherenceVerdict, TransformError> {
    let Some(first) = ts.first() else {
        return Ok(CoherenceVerdict::coherent(0));
    };
    if let Some(other) = ts.iter().find(|t| t.space_ref() != first.space_ref()) {
        return Err(TransformError::DomainMismatch {
            left: first.space_ref().clone(),
            right: other.space_ref().clone(),
        });
    }
    let mut composite = Transformation::identity(first.space_ref().clone());
    for (i, t) in ts.iter().enumerate() {
        t.check_against(space)?;
        let layer = i + 1;
        composite = compose(&composite, t)?;
        let mut violations = audit(&composite, space, layer);
        violations.extend(cycle_consistency(&composite, space, layer));
        if !violations.is_empty() {
            violations.sort();
            return Ok(CoherenceVerdict::from_violations(violations, layer));
        }
    }
    Ok(CoherenceVerdict::coherent(ts.len()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "remedy", content = "moves", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Remedy {
    Moves(Vec<PrimitiveMove>),
    NoneAvailable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepairHint {
    pub violation: Violation,
    pub remedy: Remedy,
}

impl RepairHint {
    pub fn moves(&self) -> &[PrimitiveMove] {
        match &self.remedy {
            Remedy::Moves(m) => m,
            Remedy::NoneAvailable => &[],
        }
    }
}

/// For each violation, the primitive moves that clear it, where the basis
/// has any:
///
/// * orphaned concept: bridge it to the nearest non-adjacent node of the
///   same type that it does not exclude;
/// * broken adjacency: add the missing image transition;
/// * a transition linking exclusive concepts: remove that transition pair.
///
/// Everything else is a property of the transformation, not of the space,
/// and has no structural remedy.
pub fn diagnose(verdict: &CoherenceVerdict, space: &ConceptSpace) -> Vec<RepairHint> {
    verdict
        .violations
        .iter()
        .map(|v| RepairHint { violation: v.clone(), remedy: remedy_for(v, space) })
        .collect()
}

fn remedy_for(v: &Violation, space: &ConceptSpace) -> Remedy {
    let node = |i: usize| v.subject.get(i).map(|x| NodeId::from(x.as_str()));
    let moves = match v.kind {
        ViolationKind::OrphanedConcept => node(0).and_then(|x| bridge_candidate(space, &x).map(|y| {
            vec![PrimitiveMove::link(space, &x, &y, "bridge")]
        })),
        ViolationKind::AdjacencyBroken if v.subject.len() == 3 => {
            let (p, q) = (node(1).unwrap(), node(2).unwrap());
            let ok = p != q
                && space.contains_node(&p)
                && space.contains_node(&q)
                && !space.mutually_exclusive(&p, &q)
                && !space.has_edge(&p, &q);
            ok.then(|| vec![PrimitiveMove::link(space, &p, &q, "reroute")])
        }
        ViolationKind::ExclusionContradiction if v.subject.len() == 3 => {
            let edge = EdgeId::from(v.subject[0].as_str());
            let (p, q) = (node(1).unwrap(), node(2).unwrap());
            space
                .edge(&edge)
                .filter(|e| e.src == p && e.dst == q)
                .and_then(|_| PrimitiveMove::unlink(space, &edge))
                .map(|m| vec![m])
        }
        _ => None,
    };
    moves.map_or(Remedy::NoneAvailable, Remedy::Moves)
}

/// Nearest same-type, non-excluded, non-adjacent node; unreachable nodes
/// rank after reachable ones, then by id.
pub fn bridge_candidate(space: &ConceptSpace, x: &NodeId) -> Option<NodeId> {
    let node = space.node(x)?;
    let dist = bfs_distances(space, x, None);
    space
        .nodes()
        .filter(|n| {
            n.id != *x
                && n.concept_type == node.concept_type
                && !node.excludes(&n.id)
                && !space.neighbors(x).any(|m| m == &n.id)
        })
        .min_by_key(|n| (dist.get(&n.id).copied().unwrap_or(usize::MAX), n.id.clone()))
        .map(|n| n.id.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::SpaceBuilder;
    use crate::transform::inverse;

    fn path3() -> ConceptSpace {
        SpaceBuilder::new("p").concepts(["a", "b", "c"]).path(["a", "b", "c"]).build().unwrap()
    }

    fn kinds(v: &CoherenceVerdict) -> BTreeSet<ViolationKind> {
        v.violations.iter().map(|x| x.kind).collect()
    }

    #[test]
    fn identity_is_coherent() {
        let v = chi(&Transformation::identity("p"), &path3()).unwrap();
        assert!(v.coherent);
        assert!(v.violations.is_empty());
    }

    #[test]
    fn merge_is_non_injective() {
        let s = path3();
        let t = Transformation::on(&s, [("a", "a"), ("b", "c"), ("c", "c")]).unwrap();
        let v = chi(&t, &s).unwrap();
        assert!(!v.coherent);
        let ni: Vec<&Violation> = v.violations.iter().filter(|x| x.kind == ViolationKind::NonInjective).collect();
        assert_eq!(ni.len(), 1);
        assert_eq!(ni[0].subject, vec!["b", "c"]);
    }

    #[test]
    fn mapping_into_exclusion_set() {
        let s = SpaceBuilder::new("x")
            .concepts(["a", "z", "m"])
            .path(["a", "m", "z"])
            .exclusive("a", "z")
            .build()
            .unwrap();
        let t = Transformation::on(&s, [("a", "z"), ("z", "a")]).unwrap();
        let v = chi(&t, &s).unwrap();
        assert!(v.violations.iter().any(|x| x.kind == ViolationKind::ExclusionContradiction
            && x.subject == vec!["a".to_string(), "z".to_string()]));
    }

    #[test]
    fn path_orphaning_and_adjacency() {
        let s = path3();
        // b↔c swap: a–b maps to a–c, which is missing; a loses its only transition.
        let t = Transformation::on(&s, [("b", "c"), ("c", "b")]).unwrap();
        let v = chi(&t, &s).unwrap();
        assert_eq!(
            kinds(&v),
            [ViolationKind::AdjacencyBroken, ViolationKind::OrphanedConcept].into_iter().collect()
        );
        assert!(v.violations.iter().any(|x| x.kind == ViolationKind::OrphanedConcept && x.subject == ["a"]));
    }

    #[test]
    fn isolated_node_is_orphaned_under_identity() {
        let s = SpaceBuilder::new("o").concepts(["x", "y", "z"]).link("y", "z").build().unwrap();
        let v = chi_identity(&s);
        assert_eq!(v.violations.len(), 1);
        assert_eq!(v.violations[0].kind, ViolationKind::OrphanedConcept);
        let single = SpaceBuilder::new("one").concept("x").build().unwrap();
        assert!(chi_identity(&single).coherent);
    }

    #[test]
    fn chi_path_basics() {
        let s = path3();
        assert_eq!(chi_path(&[], &s).unwrap(), CoherenceVerdict::coherent(0));
        let swap = Transformation::on(&s, [("a", "c"), ("c", "a")]).unwrap();
        let v = chi_path(&[swap.clone(), inverse(&swap).unwrap()], &s).unwrap();
        assert!(v.coherent);
        assert_eq!(v.checked_depth, 2);
        let foreign = Transformation::new("q", [("a", "b")]);
        assert!(matches!(chi_path(&[swap, foreign], &s), Err(TransformError::DomainMismatch { .. })));
    }

    /// 4-cycle a–b–c–d with a ⊥ c. Reflecting b↔d is coherent; following it
    /// with the reflection a↔c gives the half-turn, which sends a onto c.
    #[test]
    fn composite_failure_reports_second_layer() {
        let s = SpaceBuilder::new("sq")
            .concepts(["a", "b", "c", "d"])
            .path(["a", "b", "c", "d", "a"])
            .exclusive("a", "c")
            .build()
            .unwrap();
        let t1 = Transformation::on(&s, [("b", "d"), ("d", "b")]).unwrap();
        let t2 = Transformation::on(&s, [("a", "c"), ("c", "a")]).unwrap();
        assert!(chi(&t1, &s).unwrap().coherent);
        let v = chi_path(&[t1, t2], &s).unwrap();
        assert!(!v.coherent);
        assert_eq!(v.checked_depth, 2);
        assert!(v.violations.iter().all(|x| x.layer == 2));
        assert!(v.has(ViolationKind::ExclusionContradiction));
    }

    #[test]
    fn cycle_consistency_flags_rotation_across_exclusion() {
        let s = SpaceBuilder::new("sq")
            .concepts(["a", "b", "c", "d"])
            .path(["a", "b", "c", "d", "a"])
            .exclusive("a", "c")
            .exclusive("b", "d")
            .build()
            .unwrap();
        let r = Transformation::on(&s, [("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")]).unwrap();
        assert!(chi(&r, &s).unwrap().coherent);
        let v = chi_path(&[r], &s).unwrap();
        assert_eq!(kinds(&v), [ViolationKind::CycleInconsistent].into_iter().collect());
    }

    #[test]
    fn hints() {
        let s = SpaceBuilder::new("o").concepts(["x", "y", "z"]).link("y", "z").build().unwrap();
        assert!(diagnose(&chi_identity(&path3()), &path3()).is_empty());

        let hints = diagnose(&chi_identity(&s), &s);
        assert_eq!(hints.len(), 1);
        match &hints[0].moves()[0] {
            PrimitiveMove::AddEdgePair { forward, .. } => {
                assert_eq!((forward.src.as_str(), forward.dst.as_str()), ("x", "y"));
            }
            m => panic!("unexpected {m:?}"),
        }

        let p = path3();
        let t = Transformation::on(&p, [("b", "c"), ("c", "b")]).unwrap();
        let v = chi(&t, &p).unwrap();
        let broken = diagnose(&v, &p)
            .into_iter()
            .find(|h| h.violation.kind == ViolationKind::AdjacencyBroken)
            .unwrap();
        assert!(matches!(&broken.moves()[0], PrimitiveMove::AddEdgePair { forward, .. }
            if forward.src.as_str() == "a" && forward.dst.as_str() == "c"));

        let merge = Transformation::on(&p, [("b", "c")]).unwrap();
        let v = chi(&merge, &p).unwrap();
        let h = diagnose(&v, &p).into_iter().find(|h| h.violation.kind == ViolationKind::NonInjective).unwrap();
        assert_eq!(h.remedy, Remedy::NoneAvailable);
    }

    #[test]
    fn verdict_json_shape() {
        let v = chi_identity(&path3());
        assert_eq!(v.to_json(), r#"{"coherent":true,"violations":[],"checked_depth":1}"#);
    }
}
