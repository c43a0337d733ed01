//! Build a concept space, break it, and audit it.

use std::error::Error;

use cograph::space::{validate, ConceptSpace, FitnessField, SpaceBuilder};

pub fn run() -> Result<(), Box<dyn Error>> {
    let space = SpaceBuilder::new("kitchen")
        .typed("flour", "Ingredient")
        .typed("dough", "Intermediate")
        .typed("bread", "Product")
        .typed("ash", "Product")
        .path(["flour", "dough", "bread"])
        .link("bread", "ash")
        .exclusive("bread", "ash")
        .build()?;
    println!("{} nodes, {} transitions, valid: {}", space.node_count(), space.edge_count(), validate(&space).is_empty());
    println!("contradictory edges: {:?}", space.contradictory_edges().map(|e| e.id.as_str()).collect::<Vec<_>>());

    let fitness = FitnessField::scalar("effort", [("flour", 0.0), ("dough", 1.0), ("bread", 2.0), ("ash", 3.0)]);
    let text = space.to_json(Some(&fitness));
    let (back, back_fitness) = ConceptSpace::from_json(&text)?;
    assert_eq!(back, space);
    assert_eq!(back_fitness.as_ref(), Some(&fitness));

    let mut doc: serde_json::Value = serde_json::from_str(&text)?;
    doc["edges"].as_array_mut().ok_or("edges")?.retain(|e| e["id"] != "dough>flour");
    let (broken, _) = ConceptSpace::from_json(&doc.to_string())?;
    for v in validate(&broken) {
        println!("broken copy: {v}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
