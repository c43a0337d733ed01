//! Turn an instance's history into a space of states and reason over it.

use std::error::Error;

use cograph::fixtures;
use cograph::fmi::{f_model, Observation};
use cograph::recursion::{meta_chi, reify, stack};
use cograph::runtime::SnapshotStore;
use cograph::space::validate;

pub fn run() -> Result<(), Box<dyn Error>> {
    let inst = fixtures::three_commits();
    let store = SnapshotStore::in_memory();
    let reified = reify(&inst.to_log(), &store)?;
    println!("order {} space of {} states, valid {}", reified.space.order(), reified.space.node_count(), validate(&reified.space).is_empty());
    for e in reified.space.edges().filter(|e| e.src < e.dst) {
        println!("  {} --{}--> {}", e.src, e.label, e.dst);
    }

    let meta = stack(&reified)?;
    let meta = f_model(&meta, &[Observation::edge("s0", "s3", "shortcut")])?;
    let higher = reify(&meta.to_log(), &store)?;
    println!("reifying the meta instance gives order {}", higher.space.order());

    let (joint, traces) = fixtures::conflicting_policies();
    let verdict = meta_chi(&joint, &traces)?;
    for v in &verdict.violations {
        println!("policy conflict: {v}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
