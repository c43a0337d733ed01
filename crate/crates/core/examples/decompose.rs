//! Factor a coherent transformation into single remaps and rebuild it.

use std::error::Error;

use cograph::fmi::{f_decompose, recompose};
use cograph::space::SpaceBuilder;
use cograph::transform::Transformation;

pub fn run() -> Result<(), Box<dyn Error>> {
    let ring = SpaceBuilder::new("ring")
        .concepts(["a", "b", "c", "d", "e", "f"])
        .path(["a", "b", "c", "d", "e", "f", "a"])
        .build()?;
    let turn = Transformation::on(&ring, [("a", "c"), ("b", "d"), ("c", "e"), ("d", "f"), ("e", "a"), ("f", "b")])?;
    let moves = f_decompose(&turn, &ring)?;
    println!("two-step turn = {} remaps", moves.len());
    for m in &moves {
        println!("  {}", serde_json::to_string(m)?);
    }
    let back = recompose(&moves, &ring)?;
    assert_eq!(back, turn);
    println!("recompose: {}", if back == turn { "EXACT" } else { "MISMATCH" });

    let bad = Transformation::on(&ring, [("a", "b"), ("b", "a")])?;
    println!("adjacent swap: {}", f_decompose(&bad, &ring).unwrap_err());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
