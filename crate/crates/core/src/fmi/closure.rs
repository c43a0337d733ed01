//! Factoring coherent transformations into single remaps and composing
//! them back.

use std::collections::{BTreeMap, BTreeSet};

use crate::coherence::chi;
use crate::moves::{MoveError, PrimitiveMove};
use crate::space::{ConceptSpace, NodeId, SCRATCH_ID};
use crate::transform::Transformation;

use super::FmiError;

/// Cycle decomposition of `t` as `REMAP_SINGLE` moves through the scratch
/// slot. For a cycle `x1 → x2 → … → xk → x1` starting at its smallest id:
/// `x1 → σ`, `xk → x1`, `x(k-1) → xk`, …, `x2 → x3`, `σ → x2`; a
/// k-cycle costs k + 1 moves.
pub fn f_decompose(t: &Transformation, space: &ConceptSpace) -> Result<Vec<PrimitiveMove>, FmiError> {
    let verdict = chi(t, space)?;
    if !verdict.coherent {
        return Err(FmiError::IncoherentInput { verdict });
    }
    let scratch = NodeId::new(SCRATCH_ID);
    let remap = |from: &NodeId, to: &NodeId| PrimitiveMove::RemapSingle { from: from.clone(), to: to.clone() };
    let mut seen = BTreeSet::new();
    let mut moves = Vec::new();
    for start in t.support() {
        if seen.contains(start) {
            continue;
        }
        let mut cycle = vec![start.clone()];
        let mut x = t.image(start);
        while x != start {
            cycle.push(x.clone());
            x = t.image(x);
        }
        seen.extend(cycle.iter().cloned());
        moves.push(remap(&cycle[0], &scratch));
        for i in (1..cycle.len()).rev() {
            moves.push(remap(&cycle[i], &cycle[(i + 1) % cycle.len()]));
        }
        moves.push(remap(&scratch, &cycle[1]));
    }
    Ok(moves)
}

fn ill(msg: String) -> FmiError {
    FmiError::Move(MoveError::IllFormed(msg))
}

/// The node permutation realized by a sequence of single remaps, read left
/// to right. Occupancy is tracked so every step must move an occupied id
/// into a free one, and the sequence must end on the original node set.
pub fn recompose(moves: &[PrimitiveMove], space: &ConceptSpace) -> Result<Transformation, FmiError> {
    // current id -> original id
    let mut occupant: BTreeMap<NodeId, NodeId> = space.node_ids().map(|x| (x.clone(), x.clone())).collect();
    for m in moves {
        let PrimitiveMove::RemapSingle { from, to } = m else {
            return Err(ill(format!("{} is not a remap", m.kind())));
        };
        if occupant.contains_key(to) {
            return Err(ill(format!("remap target {to} is occupied")));
        }
        let origin = occupant.remove(from).ok_or_else(|| ill(format!("remap from missing node {from}")))?;
        occupant.insert(to.clone(), origin);
    }
    if let Some(stray) = occupant.keys().find(|x| !space.contains_node(x)) {
        return Err(ill(format!("sequence leaves a node at {stray}")));
    }
    let pairs = occupant.into_iter().map(|(now, origin)| (origin, now));
    Ok(Transformation::new(space.id().clone(), pairs).with_provenance(moves.to_vec()))
}
