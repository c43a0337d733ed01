//! One row per level: single-space traversal, repaired multi-agent span,
//! and the meta level over agent histories.

use std::error::Error;

use cograph::sim::presets::{phase_table, SHIPPED_SEEDS};

pub fn run() -> Result<(), Box<dyn Error>> {
    for seed in SHIPPED_SEEDS {
        println!("seed {seed}");
        for row in phase_table(seed)? {
            println!("  {:<5} order {}  {:<32} {:.4}", row.phase, row.order, row.metric, row.value);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
