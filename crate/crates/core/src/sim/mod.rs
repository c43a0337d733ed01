//! Seeded multi-agent scenarios: agents drift apart, cross-agent
//! compositions are attempted each step, and the outcome is recorded as a
//! metrics series.
//!
//! Every agent owns a ChaCha stream derived from the scenario seed, and
//! composition sampling draws from a separate stream. Divergence draws
//! index fixed pools (the initial edges and the initial non-adjacent
//! pairs), so two runs of the same seed in different modes see the same
//! mutation stream even after their spaces differ.

mod config;
mod metrics;
pub mod presets;

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::coherence::{chi_identity, chi_path, ViolationKind};
use crate::embedding::{find_embeddings, lift, span, EmbeddingSet, SpanStrategy};
use crate::fmi::{f_adapt, FmiError, FmiInstance};
use crate::moves::PrimitiveMove;
use crate::recursion::RecursionError;
use crate::space::random::{random_space, GenerationError};
use crate::space::{ConceptSpace, FitnessField, NodeId};
use crate::transform::{compose, is_automorphism, Transformation};

pub use config::{DivergenceWeights, FaultKind, FaultSpec, Mode, ScenarioConfig};
pub use metrics::{MetricsSeries, StepMetrics, CSV_HEADER};

/// Automorphism candidates kept per agent and step.
const CANDIDATE_LIMIT: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("INVALID_SCENARIO: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Generation(#[from] GenerationError),
    #[error(transparent)]
    Fmi(#[from] FmiError),
    #[error(transparent)]
    Recursion(#[from] RecursionError),
}

type Pair = (NodeId, NodeId);

#[derive(Debug, Clone)]
pub struct Agent {
    pub id: String,
    pub instance: FmiInstance,
    initial_edges: BTreeSet<Pair>,
    add_pool: Vec<Pair>,
    remove_pool: Vec<Pair>,
    rng: ChaCha8Rng,
}

impl Agent {
    pub fn space(&self) -> &ConceptSpace {
        self.instance.space()
    }

    /// 1 − Jaccard similarity of the current and initial edge sets.
    pub fn drift(&self) -> f64 {
        let now = edge_set(self.space());
        let union = now.union(&self.initial_edges).count();
        if union == 0 {
            return 0.0;
        }
        1.0 - now.intersection(&self.initial_edges).count() as f64 / union as f64
    }
}

fn edge_set(space: &ConceptSpace) -> BTreeSet<Pair> {
    space
        .edges()
        .map(|e| if e.src <= e.dst { (e.src.clone(), e.dst.clone()) } else { (e.dst.clone(), e.src.clone()) })
        .collect()
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Scenario state between steps.
#[derive(Debug, Clone)]
pub struct World {
    pub cfg: ScenarioConfig,
    pub agents: Vec<Agent>,
    /// Shared space and embeddings of the current agent spaces (span modes only).
    pub span: Option<(ConceptSpace, EmbeddingSet)>,
    pub steps_taken: usize,
    sampler: ChaCha8Rng,
}

pub fn generate_scenario(cfg: &ScenarioConfig) -> Result<World, ScenarioError> {
    cfg.check()?;
    let params = cfg.space_params();
    let mut agents = Vec::with_capacity(cfg.agent_count);
    for i in 0..cfg.agent_count {
        let mut rng = stream(cfg.seed, i as u64 + 1);
        let space = random_space(format!("agent{i}"), &params, &mut rng)?;
        let fitness = FitnessField::scalar("value", []);
        let values: Vec<(NodeId, f64)> = space.node_ids().map(|n| (n.clone(), rng.gen::<f64>())).collect();
        let fitness = values.iter().fold(fitness, |f, (n, v)| f.with_value(n, vec![*v]));
        let initial_edges = edge_set(&space);
        let ids: Vec<&NodeId> = space.node_ids().collect();
        let mut add_pool = Vec::new();
        for (k, a) in ids.iter().enumerate() {
            for b in &ids[k + 1..] {
                if !initial_edges.contains(&((*a).clone(), (*b).clone())) {
                    add_pool.push(((*a).clone(), (*b).clone()));
                }
            }
        }
        let remove_pool = initial_edges.iter().cloned().collect();
        let mut instance = FmiInstance::new(space, fitness)?;
        if let Some(cap) = cfg.resolution_cap {
            instance = blur_labels(&instance, cap)?;
        }
        agents.push(Agent { id: format!("agent{i}"), instance, initial_edges, add_pool, remove_pool, rng });
    }
    let mut world = World { cfg: cfg.clone(), agents, span: None, steps_taken: 0, sampler: stream(cfg.seed, 0) };
    world.rebuild_span();
    Ok(world)
}

impl World {
    fn rebuild_span(&mut self) {
        if self.cfg.mode == Mode::NoSpan {
            return;
        }
        let spaces: Vec<&ConceptSpace> = self.agents.iter().map(Agent::space).collect();
        let shared = span(&spaces, SpanStrategy::DisjointUnion).expect("disjoint union of valid spaces");
        self.span = Some(shared);
    }

    fn diverge(&mut self, step: usize) {
        let cfg = &self.cfg;
        let w = &cfg.divergence;
        for (i, agent) in self.agents.iter_mut().enumerate() {
            let mut space = agent.space().clone();
            let mut moves = Vec::new();
            let mut push = |m: PrimitiveMove, space: &mut ConceptSpace| {
                *space = m.apply(space).expect("divergence moves are well formed");
                moves.push(m);
            };
            for _ in 0..cfg.divergence_rate {
                let roll = agent.rng.gen::<f64>() * (w.add_edge + w.remove_edge);
                let pick = agent.rng.next_u64();
                if roll < w.add_edge {
                    let Some((a, b)) = pick_from(&agent.add_pool, pick) else { continue };
                    let blocked = w.respect_exclusions && space.mutually_exclusive(a, b);
                    if !space.has_edge(a, b) && !blocked {
                        let m = PrimitiveMove::link(&space, a, b, "drift");
                        push(m, &mut space);
                    }
                } else {
                    let Some((a, b)) = pick_from(&agent.remove_pool, pick) else { continue };
                    let edge = space.edges_between(a, b).map(|e| e.id.clone()).min();
                    if let Some(m) = edge.and_then(|e| PrimitiveMove::unlink(&space, &e)) {
                        push(m, &mut space);
                    }
                }
            }
            for fault in cfg.faults.iter().filter(|f| f.step == step && f.agent == i) {
                for m in fault_moves(&space, fault.kind) {
                    push(m, &mut space);
                }
            }
            if !moves.is_empty() {
                agent.instance = agent.instance.perturb(moves).expect("moves were checked on the working copy");
            }
        }
    }

    /// Coherent automorphisms of each agent's space; the identity when none is coherent.
    fn candidates(&self) -> Vec<Vec<Transformation>> {
        self.agents
            .iter()
            .map(|a| {
                let space = a.space();
                let mut out: Vec<Transformation> = find_embeddings(space, space, Some(CANDIDATE_LIMIT))
                    .into_iter()
                    .map(|g| Transformation::new(space.id().clone(), g.map))
                    .filter(|t| {
                        is_automorphism(t, space).unwrap_or(false)
                            && chi_path(std::slice::from_ref(t), space).is_ok_and(|v| v.coherent)
                    })
                    .collect();
                if out.is_empty() {
                    out.push(Transformation::identity(space.id().clone()));
                }
                out
            })
            .collect()
    }

    fn sample_compositions(&mut self) -> f64 {
        let k = self.agents.len() as u64;
        let candidates = self.candidates();
        let mut pair_spaces: BTreeMap<(usize, usize), ConceptSpace> = BTreeMap::new();
        let mut wellformed = 0usize;
        let samples = self.cfg.samples_per_step;
        for _ in 0..samples {
            let i = (self.sampler.next_u64() % k) as usize;
            let j = if k == 1 { i } else { ((i as u64 + 1 + self.sampler.next_u64() % (k - 1)) % k) as usize };
            let ti = &candidates[i][(self.sampler.next_u64() % candidates[i].len() as u64) as usize];
            let tj = &candidates[j][(self.sampler.next_u64() % candidates[j].len() as u64) as usize];
            let ok = match &self.span {
                None => compose(ti, tj).is_ok()
                    && chi_path(&[ti.clone(), tj.clone()], self.agents[i].space()).is_ok_and(|v| v.coherent),
                Some((shared, set)) => {
                    let lifted = (
                        lift(&set.embeddings[i], ti, self.agents[i].space(), shared),
                        lift(&set.embeddings[j], tj, self.agents[j].space(), shared),
                    );
                    match lifted {
                        (Ok(li), Ok(lj)) => {
                            let region = pair_spaces.entry((i.min(j), i.max(j))).or_insert_with(|| {
                                let keep: BTreeSet<NodeId> = set.embeddings[i]
                                    .map
                                    .values()
                                    .chain(set.embeddings[j].map.values())
                                    .cloned()
                                    .collect();
                                shared.induced(&keep)
                            });
                            chi_path(&[li, lj], region).is_ok_and(|v| v.coherent)
                        }
                        _ => false,
                    }
                }
            };
            wellformed += usize::from(ok);
        }
        wellformed as f64 / samples as f64
    }

    fn repair(&mut self) -> usize {
        let mut invocations = 0;
        for agent in &mut self.agents {
            let verdict = chi_identity(agent.space());
            if verdict.coherent {
                continue;
            }
            invocations += 1;
            if let Ok(fixed) = f_adapt(&agent.instance, &verdict) {
                agent.instance = fixed;
            }
        }
        invocations
    }

    fn blur(&mut self) {
        if let Some(cap) = self.cfg.resolution_cap {
            for agent in &mut self.agents {
                agent.instance = blur_labels(&agent.instance, cap).expect("blurring keeps spaces valid");
            }
        }
    }

    /// (orphans, contradictions) found by the identity check, over all agents.
    fn violation_counts(&self) -> (usize, usize) {
        self.agents.iter().map(|a| chi_identity(a.space())).fold((0, 0), |(o, c), v| {
            (o + v.count(ViolationKind::OrphanedConcept), c + v.count(ViolationKind::ExclusionContradiction))
        })
    }

    fn record(&self, step: usize, rate: f64, repairs: usize, before: (usize, usize)) -> StepMetrics {
        let (orphans, contradictions) = self.violation_counts();
        let labels = self
            .agents
            .iter()
            .map(|a| a.space().nodes().map(|n| n.label.as_str()).collect::<BTreeSet<_>>().len())
            .sum();
        let drift = self.agents.iter().map(Agent::drift).sum::<f64>() / self.agents.len() as f64;
        StepMetrics {
            step,
            composite_wellformed_rate: rate,
            orphan_count: orphans,
            contradiction_count: contradictions,
            drift,
            repair_invocations: repairs,
            distinct_labels: labels,
            orphans_before_repair: before.0,
            contradictions_before_repair: before.1,
        }
    }
}

fn pick_from(pool: &[Pair], draw: u64) -> Option<&Pair> {
    (!pool.is_empty()).then(|| &pool[(draw % pool.len() as u64) as usize])
}

fn fault_moves(space: &ConceptSpace, kind: FaultKind) -> Vec<PrimitiveMove> {
    match kind {
        FaultKind::Orphan => {
            let Some(x) = space.node_ids().find(|n| space.degree(n) > 0) else { return Vec::new() };
            let pairs: BTreeSet<_> = space.incident(x).map(|e| e.pair_key().clone()).collect();
            pairs.iter().filter_map(|e| PrimitiveMove::unlink(space, e)).collect()
        }
        FaultKind::Contradiction => space
            .nodes()
            .flat_map(|n| n.exclusions.iter().filter(move |y| n.id < **y).map(move |y| (&n.id, y)))
            .find(|(a, b)| !space.has_edge(a, b))
            .map(|(a, b)| vec![PrimitiveMove::link(space, a, b, "fault")])
            .unwrap_or_default(),
    }
}

/// Quotient labels down to `cap` distinct values: the k-th label in sorted
/// order becomes label `k mod cap`, and nodes sharing a label inherit the
/// union of their exclusion sets.
pub fn blur_labels(inst: &FmiInstance, cap: usize) -> Result<FmiInstance, FmiError> {
    let space = inst.space();
    let labels: Vec<&str> = space.nodes().map(|n| n.label.as_str()).collect::<BTreeSet<_>>().into_iter().collect();
    if labels.len() <= cap {
        return Ok(inst.clone());
    }
    let target: BTreeMap<&str, &str> = labels.iter().enumerate().map(|(k, l)| (*l, labels[k % cap])).collect();
    let mut blurred = space.clone();
    let mut classes: BTreeMap<&str, Vec<NodeId>> = BTreeMap::new();
    for n in space.nodes() {
        let to = target[n.label.as_str()];
        blurred = blurred.set_label(&n.id, to);
        classes.entry(to).or_default().push(n.id.clone());
    }
    for members in classes.values() {
        let union: BTreeSet<NodeId> =
            members.iter().flat_map(|m| space.node(m).expect("member").exclusions.iter().cloned()).collect();
        for m in members {
            for y in union.iter().filter(|y| *y != m) {
                blurred = blurred.add_exclusion(m, y);
            }
        }
    }
    inst.rebase(blurred, inst.fitness().clone())
}

/// One step: diverge, sample compositions, repair, record, blur.
pub fn step(world: &mut World) -> StepMetrics {
    let t = world.steps_taken;
    world.diverge(t);
    world.rebuild_span();
    let rate = world.sample_compositions();
    let before = world.violation_counts();
    let repairs = if world.cfg.mode == Mode::SpanPlusRepair { world.repair() } else { 0 };
    let metrics = world.record(t, rate, repairs, before);
    world.blur();
    if repairs > 0 || world.cfg.resolution_cap.is_some() {
        world.rebuild_span();
    }
    world.steps_taken += 1;
    metrics
}

pub fn run(cfg: &ScenarioConfig) -> Result<MetricsSeries, ScenarioError> {
    let mut world = generate_scenario(cfg)?;
    let records = (0..cfg.steps).map(|_| step(&mut world)).collect();
    Ok(MetricsSeries { records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::validate;

    fn cfg(mode: Mode, k: usize) -> ScenarioConfig {
        ScenarioConfig { steps: 6, ..ScenarioConfig::new(mode, k, 7) }
    }

    #[test]
    fn single_agent_identity_span() {
        let w = generate_scenario(&cfg(Mode::SpanOnly, 1)).unwrap();
        let (shared, set) = w.span.as_ref().unwrap();
        assert_eq!(shared, w.agents[0].space());
        assert_eq!(set.embeddings.len(), 1);
    }

    #[test]
    fn deterministic_generation() {
        let a = generate_scenario(&cfg(Mode::NoSpan, 3)).unwrap();
        let b = generate_scenario(&cfg(Mode::NoSpan, 3)).unwrap();
        for (x, y) in a.agents.iter().zip(&b.agents) {
            assert_eq!(x.instance, y.instance);
        }
        assert!(a.span.is_none());
    }

    #[test]
    fn zero_density_fails() {
        let c = ScenarioConfig { edge_density: 0.0, ..cfg(Mode::NoSpan, 2) };
        assert!(matches!(generate_scenario(&c), Err(ScenarioError::Generation(_))));
    }

    #[test]
    fn zero_steps_is_empty() {
        let c = ScenarioConfig { steps: 0, ..cfg(Mode::SpanOnly, 2) };
        assert!(run(&c).unwrap().is_empty());
    }

    #[test]
    fn no_span_never_composes() {
        let c = ScenarioConfig { divergence_rate: 1, ..cfg(Mode::NoSpan, 2) };
        assert!(run(&c).unwrap().rates().all(|r| r == 0.0));
    }

    #[test]
    fn static_span_always_composes() {
        let series = run(&cfg(Mode::SpanOnly, 3)).unwrap();
        assert!(series.rates().all(|r| r == 1.0));
        assert!(series.records.iter().all(|r| r.drift == 0.0));
    }

    #[test]
    fn repair_clears_fault() {
        let c = ScenarioConfig {
            exclusion_rate: 0.3,
            faults: vec![
                FaultSpec { step: 1, agent: 0, kind: FaultKind::Contradiction },
                FaultSpec { step: 3, agent: 1, kind: FaultKind::Orphan },
            ],
            ..cfg(Mode::SpanPlusRepair, 2)
        };
        let mut world = generate_scenario(&c).unwrap();
        for _ in 0..c.steps {
            let m = step(&mut world);
            assert_eq!((m.contradiction_count, m.orphan_count), (0, 0), "{m:?}");
            for a in &world.agents {
                assert!(validate(a.space()).is_empty());
            }
        }
    }

    #[test]
    fn blur_caps_labels_and_spreads_exclusions() {
        let c = ScenarioConfig { exclusion_rate: 0.3, resolution_cap: Some(3), ..cfg(Mode::SpanOnly, 1) };
        let w = generate_scenario(&c).unwrap();
        let s = w.agents[0].space();
        assert!(s.nodes().map(|n| &n.label).collect::<BTreeSet<_>>().len() <= 3);
        assert!(validate(s).is_empty());
    }

    #[test]
    fn csv_header_and_rows() {
        let series = run(&cfg(Mode::SpanOnly, 2)).unwrap();
        let csv = series.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(lines.count(), 6);
    }
}
