//! Embedding search, shared spans, and lifting transformations into them.

use std::error::Error;

use cograph::coherence::{chi, chi_path};
use cograph::embedding::{find_embeddings, image_space, lift, span, SpanStrategy};
use cograph::space::SpaceBuilder;
use cograph::transform::{compose, Transformation};

pub fn run() -> Result<(), Box<dyn Error>> {
    let edge = SpaceBuilder::new("edge").concepts(["a", "b"]).link("a", "b").build()?;
    let triangle = SpaceBuilder::new("triangle").concepts(["x", "y", "z"]).path(["x", "y", "z", "x"]).build()?;
    let found = find_embeddings(&edge, &triangle, None);
    println!("edge into triangle: {} embeddings", found.len());
    println!("first: {}", found[0].to_json());
    println!("triangle into edge: {}", find_embeddings(&triangle, &edge, None).len());

    let flip = Transformation::on(&edge, [("a", "b"), ("b", "a")])?;
    let lifted = lift(&found[0], &flip, &edge, &triangle)?;
    let image = image_space(&found[0], &edge, &triangle)?;
    println!("lifted flip {}: coherent on source {}, on image {}", lifted.to_json(), chi(&flip, &edge)?.coherent, chi(&lifted, &image)?.coherent);

    let left = SpaceBuilder::new("left").concepts(["p", "q"]).link("p", "q").build()?;
    let right = SpaceBuilder::new("right").concepts(["r", "s", "t"]).path(["r", "s", "t"]).build()?;
    let tl = Transformation::on(&left, [("p", "q"), ("q", "p")])?;
    let tr = Transformation::on(&right, [("r", "t"), ("t", "r")])?;
    println!("direct compose: {}", compose(&tl, &tr).unwrap_err());

    for strategy in [SpanStrategy::DisjointUnion, SpanStrategy::MergeByLabel] {
        let (joint, set) = span(&[&left, &right], strategy)?;
        let la = lift(&set.embeddings[0], &tl, &left, &joint)?;
        let lb = lift(&set.embeddings[1], &tr, &right, &joint)?;
        let verdict = chi_path(&[la, lb], &joint)?;
        println!("{strategy:?} span {}: {} nodes, path coherent {}", joint.id(), joint.node_count(), verdict.coherent);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
