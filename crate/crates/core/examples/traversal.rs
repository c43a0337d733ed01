//! Cached greedy traversal against audited search after the space drifts.

use std::error::Error;

use cograph::fmi::FmiInstance;
use cograph::moves::PrimitiveMove;
use cograph::runtime::{path_is_valid, snapshot_key, system1_traverse, system2_traverse, AttractorCache, SnapshotStore};
use cograph::space::{EdgeId, FitnessField, NodeId, SpaceBuilder};

fn show(path: &[EdgeId]) -> String {
    path.iter().map(EdgeId::as_str).collect::<Vec<_>>().join(", ")
}

pub fn run() -> Result<(), Box<dyn Error>> {
    let space = SpaceBuilder::new("square").concepts(["a", "b", "c", "d"]).path(["a", "b", "c", "d", "a"]).build()?;
    let fitness = FitnessField::scalar("v", [("a", 0.0), ("b", 1.8), ("c", 2.0), ("d", 1.0)]);
    let inst = FmiInstance::new(space, fitness)?;
    let (a, c) = (NodeId::from("a"), NodeId::from("c"));

    let mut cache = AttractorCache::new();
    let warm = system1_traverse(&inst, &a, &c, &mut cache)?.ok_or("no route")?;
    println!("cached route: {}", show(&warm));

    let store = SnapshotStore::in_memory();
    let before = store.store(&inst)?;
    let cut = PrimitiveMove::unlink(inst.space(), &"b>c".into()).ok_or("edge")?;
    let later = inst.commit(vec![cut])?;
    println!("snapshots {} -> {}", &before[..12], &snapshot_key(&later)[..12]);
    println!("cache is {} revision(s) stale", cache.staleness(&a, &c, &later).unwrap_or(0));

    let fast = system1_traverse(&later, &a, &c, &mut cache)?.ok_or("no route")?;
    let slow = system2_traverse(&later, &a, &c)?.ok_or("no route")?;
    println!("system 1: {} valid {}", show(&fast), path_is_valid(later.space(), &fast, &a, &c));
    println!("system 2: {} valid {}", show(&slow), path_is_valid(later.space(), &slow, &a, &c));
    assert_eq!(store.recall(&before)?, inst);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
