//! Transformations, their algebra, and the coherence verdict.

use std::error::Error;

use cograph::coherence::{chi, chi_identity, chi_path};
use cograph::space::SpaceBuilder;
use cograph::transform::{compose, inverse, is_automorphism, Transformation};

pub fn run() -> Result<(), Box<dyn Error>> {
    let square = SpaceBuilder::new("square")
        .concepts(["a", "b", "c", "d"])
        .path(["a", "b", "c", "d", "a"])
        .build()?;
    let rotate = Transformation::on(&square, [("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")])?;
    let flip = Transformation::on(&square, [("b", "d"), ("d", "b")])?;
    let collapse = Transformation::on(&square, [("a", "b")])?;

    for (name, t) in [("rotate", &rotate), ("flip", &flip), ("collapse", &collapse)] {
        let v = chi(t, &square)?;
        println!("{name:>8}: automorphism {}, coherent {}", is_automorphism(t, &square)?, v.coherent);
        for violation in &v.violations {
            println!("          {violation}");
        }
    }

    let both = compose(&rotate, &flip)?;
    let pairs: Vec<String> = both.map().iter().map(|(x, y)| format!("{x}->{y}")).collect();
    println!("flip after rotate: {}", pairs.join(" "));
    assert!(compose(&rotate, &inverse(&rotate)?)?.is_identity());
    println!("path audit: {}", chi_path(&[rotate.clone(), flip, rotate], &square)?.to_json());

    let strained = SpaceBuilder::new("strained").concepts(["p", "q", "r"]).path(["p", "q", "r"]).exclusive("p", "r").build()?;
    let swap = Transformation::on(&strained, [("p", "r"), ("r", "p")])?;
    println!("identity on strained: {}", chi_identity(&strained).coherent);
    println!("swap on strained: {}", chi(&swap, &strained)?.to_json());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
