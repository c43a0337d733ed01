//! Shipped scenarios and the three-level phase table.

use serde::{Deserialize, Serialize};

use super::{generate_scenario, step, FaultKind, FaultSpec, Mode, ScenarioConfig, ScenarioError};
use crate::recursion::{bridge_reified, meta_chi, reify, stack, state_id, PolicyTrace};
use crate::runtime::{path_is_valid, system1_traverse, system2_traverse, AttractorCache, SnapshotStore};
use crate::space::NodeId;

/// Seeds every shipped preset is checked against.
pub const SHIPPED_SEEDS: [u64; 3] = [11, 23, 42];

pub const PRESET_NAMES: [&str; 8] = [
    "necessity",
    "static_span",
    "drift",
    "drift_repair",
    "fault_contradiction",
    "fault_orphan",
    "resolution_cap",
    "resolution_uncapped",
];

fn base(name: &str, mode: Mode, seed: u64) -> ScenarioConfig {
    ScenarioConfig { name: Some(name.to_owned()), agent_count: 3, steps: 12, ..ScenarioConfig::new(mode, 3, seed) }
}

fn faults(kind: FaultKind) -> Vec<FaultSpec> {
    vec![FaultSpec { step: 2, agent: 0, kind }, FaultSpec { step: 8, agent: 1, kind }]
}

pub fn preset(name: &str, seed: u64) -> Option<ScenarioConfig> {
    let cfg = match name {
        "necessity" => ScenarioConfig { divergence_rate: 1, ..base(name, Mode::NoSpan, seed) },
        "static_span" => base(name, Mode::SpanOnly, seed),
        "drift" => ScenarioConfig { divergence_rate: 2, steps: 20, ..base(name, Mode::SpanOnly, seed) },
        "drift_repair" => ScenarioConfig { divergence_rate: 2, steps: 20, ..base(name, Mode::SpanPlusRepair, seed) },
        "fault_contradiction" | "fault_orphan" => ScenarioConfig {
            agent_count: 2,
            exclusion_rate: 0.3,
            steps: 18,
            faults: faults(if name == "fault_orphan" { FaultKind::Orphan } else { FaultKind::Contradiction }),
            ..base(name, Mode::SpanPlusRepair, seed)
        },
        "resolution_cap" | "resolution_uncapped" => ScenarioConfig {
            agent_count: 2,
            nodes: 10,
            exclusion_rate: 0.25,
            divergence_rate: 1,
            steps: 15,
            resolution_cap: (name == "resolution_cap").then_some(4),
            ..base(name, Mode::SpanOnly, seed)
        },
        _ => return None,
    };
    Some(cfg)
}

/// Growing space sizes at fixed drift; exploratory, no expected shape.
pub fn capacity_sweep(seed: u64) -> Vec<ScenarioConfig> {
    (6..=14)
        .step_by(2)
        .map(|nodes| ScenarioConfig {
            name: Some(format!("capacity_{nodes}")),
            nodes,
            exclusion_rate: 0.15,
            divergence_rate: 2,
            steps: 12,
            ..base("capacity", Mode::SpanPlusRepair, seed)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub phase: String,
    pub order: u32,
    pub metric: String,
    pub value: f64,
}

fn row(phase: &str, order: u32, metric: &str, value: f64) -> PhaseRow {
    PhaseRow { phase: phase.to_owned(), order, metric: metric.to_owned(), value }
}

/// Three levels: fitness-guided traversal in one space, a repaired
/// multi-agent span, and a meta-level check over the agents' histories.
pub fn phase_table(seed: u64) -> Result<Vec<PhaseRow>, ScenarioError> {
    let mut rows = Vec::new();

    let single = ScenarioConfig { name: Some("fmi0".into()), divergence_rate: 2, ..ScenarioConfig::new(Mode::SpanOnly, 1, seed) };
    let mut world = generate_scenario(&single)?;
    let nodes: Vec<NodeId> = world.agents[0].space().node_ids().cloned().collect();
    let queries: Vec<(NodeId, NodeId)> =
        nodes.iter().flat_map(|a| nodes.iter().filter(move |b| a != *b).map(move |b| (a.clone(), b.clone()))).collect();
    let mut cache = AttractorCache::new();
    for (a, b) in &queries {
        system1_traverse(&world.agents[0].instance, a, b, &mut cache).expect("nodes exist");
    }
    for _ in 0..3 {
        step(&mut world);
    }
    let inst = &world.agents[0].instance;
    let (mut s1_ok, mut s2_ok, mut found) = (0usize, 0usize, 0usize);
    for (a, b) in &queries {
        if let Some(p) = system1_traverse(inst, a, b, &mut cache).expect("nodes exist") {
            s1_ok += usize::from(path_is_valid(inst.space(), &p, a, b));
            found += 1;
        }
        if let Some(p) = system2_traverse(inst, a, b).expect("nodes exist") {
            s2_ok += usize::from(path_is_valid(inst.space(), &p, a, b));
        }
    }
    let queried = queries.len().max(1) as f64;
    rows.push(row("FMI0", 0, "system1_valid_fraction", s1_ok as f64 / found.max(1) as f64));
    rows.push(row("FMI0", 0, "system2_valid_fraction", s2_ok as f64 / queried));

    let cfg = ScenarioConfig { name: Some("fmi1".into()), ..preset("drift_repair", seed).expect("shipped preset") };
    let mut world = generate_scenario(&cfg)?;
    let rates: Vec<f64> = (0..cfg.steps).map(|_| step(&mut world).composite_wellformed_rate).collect();
    let mean_rate = rates.iter().sum::<f64>() / rates.len().max(1) as f64;
    rows.push(row("FMI1", 1, "mean_composite_wellformed_rate", mean_rate));

    let store = SnapshotStore::in_memory();
    let ra = reify(&world.agents[0].instance.to_log(), &store)?;
    let rb = reify(&world.agents[1].instance.to_log(), &store)?;
    let joint = bridge_reified(&ra, &rb)?;
    let trace = |side: usize, r: &crate::recursion::ReifiedSpace| PolicyTrace {
        name: format!("agent{side}"),
        path: (0..r.space.node_count()).map(|i| NodeId::new(format!("{side}/{}", state_id(i)))).collect(),
    };
    let verdict = meta_chi(&joint, &[trace(0, &ra), trace(1, &rb)])?;
    let meta = stack(&ra)?;
    rows.push(row("FMI2", meta.order(), "meta_states", ra.space.node_count() as f64));
    rows.push(row("FMI2", meta.order(), "meta_coherent", if verdict.coherent { 1.0 } else { 0.0 }));
    Ok(rows)
}
