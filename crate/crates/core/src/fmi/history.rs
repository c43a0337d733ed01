//! Bounded, replayable history of an instance and its line-delimited
//! JSON move log.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::coherence::{chi_identity, CoherenceVerdict};
use crate::moves::PrimitiveMove;
use crate::space::{validate, ConceptSpace, FitnessField, SpaceDocument};

use super::{FmiError, FmiInstance};

pub const DEFAULT_CAPACITY: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "entry", rename_all = "snake_case")]
pub enum HistoryEntry {
    /// Moves that passed the commit gate, with the verdict that admitted them.
    Commit { moves: Vec<PrimitiveMove>, verdict: CoherenceVerdict },
    /// Moves imposed from outside (drift, injected faults); not gated.
    Perturb { moves: Vec<PrimitiveMove> },
}

impl HistoryEntry {
    pub fn moves(&self) -> &[PrimitiveMove] {
        match self {
            HistoryEntry::Commit { moves, .. } | HistoryEntry::Perturb { moves } => moves,
        }
    }

    pub fn is_commit(&self) -> bool {
        matches!(self, HistoryEntry::Commit { .. })
    }
}

/// The state the retained entries start from.
#[derive(Debug, Clone, PartialEq)]
pub struct Genesis {
    pub space: ConceptSpace,
    pub fitness: FitnessField,
    pub revision: u64,
}

/// Entries beyond `capacity` are folded into the genesis state, so the log
/// always replays to the current instance.
#[derive(Debug, Clone, PartialEq)]
pub struct History {
    genesis: Genesis,
    entries: VecDeque<HistoryEntry>,
    capacity: usize,
}

impl History {
    pub fn new(space: ConceptSpace, fitness: FitnessField, capacity: usize) -> Self {
        Self { genesis: Genesis { space, fitness, revision: 0 }, entries: VecDeque::new(), capacity: capacity.max(1) }
    }

    pub fn genesis(&self) -> &Genesis {
        &self.genesis
    }

    pub fn entries(&self) -> impl DoubleEndedIterator<Item = &HistoryEntry> + ExactSizeIterator {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn commit_count(&self) -> usize {
        self.entries.iter().filter(|e| e.is_commit()).count()
    }

    /// Most recent moves first.
    pub fn recent_moves(&self) -> impl Iterator<Item = &PrimitiveMove> {
        self.entries.iter().rev().flat_map(|e| e.moves().iter().rev())
    }

    pub(crate) fn rebase_revision(&mut self, revision: u64) {
        self.genesis.revision = revision;
    }

    pub(crate) fn push(&mut self, entry: HistoryEntry) {
        self.entries.push_back(entry);
        while self.entries.len() > self.capacity {
            let oldest = self.entries.pop_front().expect("non-empty");
            let mut space = self.genesis.space.clone();
            let mut fitness = self.genesis.fitness.clone();
            for m in oldest.moves() {
                space = m.apply(&space).expect("history moves replay");
                fitness = m.apply_fitness(&fitness);
            }
            self.genesis = Genesis { space, fitness, revision: self.genesis.revision + 1 };
        }
    }

    pub fn to_log(&self) -> String {
        let mut out = String::new();
        let mut line = |value: &LogLine| {
            out.push_str(&serde_json::to_string(value).expect("log lines always serialize"));
            out.push('\n');
        };
        line(&LogLine::Genesis {
            revision: self.genesis.revision,
            capacity: self.capacity,
            space: Box::new(SpaceDocument::from_space(&self.genesis.space, Some(&self.genesis.fitness))),
        });
        for entry in &self.entries {
            for m in entry.moves() {
                line(&LogLine::Move { r#move: m.clone() });
            }
            match entry {
                HistoryEntry::Commit { verdict, .. } => line(&LogLine::Commit { verdict: verdict.clone() }),
                HistoryEntry::Perturb { .. } => line(&LogLine::Perturb),
            }
        }
        out
    }
}

/// One line of the move log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "entry", rename_all = "snake_case", deny_unknown_fields)]
pub enum LogLine {
    Genesis { revision: u64, capacity: usize, space: Box<SpaceDocument> },
    Move { r#move: PrimitiveMove },
    Commit { verdict: CoherenceVerdict },
    Perturb,
}

fn unreplayable(line: usize, msg: impl std::fmt::Display) -> FmiError {
    FmiError::UnreplayableHistory(format!("line {line}: {msg}"))
}

/// Rebuild an instance from its move log. Every committed batch must
/// re-pass the commit gate with the verdict that was logged.
pub fn replay(log: &str) -> Result<FmiInstance, FmiError> {
    let mut lines = log.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (first_no, first) = lines.next().ok_or_else(|| unreplayable(0, "empty log"))?;
    let parse = |no: usize, text: &str| serde_json::from_str::<LogLine>(text).map_err(|e| unreplayable(no + 1, e));
    let LogLine::Genesis { revision, capacity, space } = parse(first_no, first)? else {
        return Err(unreplayable(first_no + 1, "log must start with a genesis line"));
    };
    let (space, fitness) = space.into_parts().map_err(|e| unreplayable(first_no + 1, e))?;
    let fitness = fitness.ok_or_else(|| unreplayable(first_no + 1, "genesis has no fitness field"))?;
    if let Some(v) = validate(&space).into_iter().next() {
        return Err(unreplayable(first_no + 1, v));
    }
    let mut inst = FmiInstance::with_capacity(space, fitness, capacity).map_err(|e| unreplayable(first_no + 1, e))?;
    inst.revision = revision;
    inst.history.genesis.revision = revision;

    let mut pending = Vec::new();
    let mut last = first_no;
    for (no, text) in lines {
        last = no;
        match parse(no, text)? {
            LogLine::Genesis { .. } => return Err(unreplayable(no + 1, "second genesis line")),
            LogLine::Move { r#move } => pending.push(r#move),
            LogLine::Perturb => {
                inst = inst.perturb(std::mem::take(&mut pending)).map_err(|e| unreplayable(no + 1, e))?;
            }
            LogLine::Commit { verdict } => {
                let moves = std::mem::take(&mut pending);
                let next = inst.commit(moves).map_err(|e| unreplayable(no + 1, e))?;
                let recorded = next.history.entries.back().cloned();
                if let Some(HistoryEntry::Commit { verdict: found, .. }) = recorded {
                    if found != verdict {
                        return Err(unreplayable(no + 1, "logged verdict does not match the replayed state"));
                    }
                }
                inst = next;
            }
        }
    }
    if !pending.is_empty() {
        return Err(unreplayable(last + 1, "trailing moves without a commit or perturb line"));
    }
    Ok(inst)
}

/// Verdict a commit of `space` would record.
pub(crate) fn gate_verdict(space: &ConceptSpace) -> CoherenceVerdict {
    chi_identity(space)
}
