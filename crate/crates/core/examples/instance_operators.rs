//! An evolving instance: evaluation, modelling, the commit gate, repair,
//! damping and bridging.

use std::error::Error;

use cograph::coherence::chi_identity;
use cograph::fmi::{f_adapt, f_bridge, f_eval, f_model, f_stability, FmiInstance, Observation};
use cograph::moves::PrimitiveMove;
use cograph::space::{FitnessField, SpaceBuilder};
use cograph::transform::Transformation;

pub fn run() -> Result<(), Box<dyn Error>> {
    let space = SpaceBuilder::new("route")
        .concepts(["home", "park", "shop", "work"])
        .path(["home", "park", "shop", "work", "home"])
        .exclusive("home", "shop")
        .build()?;
    let fitness = FitnessField::scalar("comfort", [("home", 3.0), ("park", 2.0), ("shop", 1.0), ("work", 0.0)]);
    let inst = FmiInstance::new(space, fitness)?;

    let mirror = Transformation::on(inst.space(), [("park", "work"), ("work", "park")])?;
    let report = f_eval(&inst, &mirror, &[2.0])?;
    println!("mirror: coherent {}, delta {:?}, gap {}", report.verdict.coherent, report.delta_fitness, report.distance_to_target);

    let inst = f_model(&inst, &[Observation::edge("park", "work", "shortcut")])?;
    println!("after modelling: revision {}, {} transitions", inst.revision(), inst.space().edge_count());
    match f_model(&inst, &[Observation::edge("home", "shop", "bad idea")]) {
        Ok(_) => println!("contradiction accepted?"),
        Err(e) => println!("gate: {e}"),
    }
    println!("mirror right after touching park: {:?}", f_stability(&inst, &mirror, 1));

    let cut = PrimitiveMove::unlink(inst.space(), &"shop>work".into()).ok_or("edge")?;
    let cut2 = PrimitiveMove::unlink(inst.space(), &"park>shop".into()).ok_or("edge")?;
    let shaken = inst.perturb(vec![cut, cut2])?;
    let verdict = chi_identity(shaken.space());
    println!("perturbed: {} violation(s)", verdict.violations.len());
    let repaired = f_adapt(&shaken, &verdict)?;
    println!("repaired: coherent {}, revision {}", chi_identity(repaired.space()).coherent, repaired.revision());

    let gym = SpaceBuilder::new("gym").concepts(["lobby", "track"]).link("lobby", "track").build()?;
    let (bridged, _) = f_bridge(repaired.space(), &gym, &[("work".into(), "lobby".into())])?;
    println!("bridged {}: {} nodes, {} transitions", bridged.id(), bridged.node_count(), bridged.edge_count());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
