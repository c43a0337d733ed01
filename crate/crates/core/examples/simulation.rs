//! Run the shipped scenarios and compare span modes side by side.

use std::error::Error;

use cograph::sim::presets::{preset, PRESET_NAMES};
use cograph::sim::run as simulate;

pub fn run() -> Result<(), Box<dyn Error>> {
    let seed = 11;
    println!("{:<22}{:>10}{:>10}{:>10}{:>10}", "preset", "min rate", "mean rate", "repairs", "drift");
    for name in PRESET_NAMES {
        let cfg = preset(name, seed).ok_or("preset")?;
        let series = simulate(&cfg)?;
        let rates: Vec<f64> = series.rates().collect();
        let min = rates.iter().copied().fold(f64::INFINITY, f64::min);
        let mean = rates.iter().sum::<f64>() / rates.len() as f64;
        let repairs: usize = series.records.iter().map(|r| r.repair_invocations).sum();
        let drift = series.records.last().map_or(0.0, |r| r.drift);
        println!("{name:<22}{min:>10.3}{mean:>10.3}{repairs:>10}{drift:>10.3}");
    }
    let csv = simulate(&preset("fault_contradiction", seed).ok_or("preset")?)?.to_csv();
    println!("\n{}", csv.lines().take(6).collect::<Vec<_>>().join("\n"));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
