//! Every example runs to completion.

#[path = "../examples/spaces.rs"]
mod spaces;
#[path = "../examples/coherence.rs"]
mod coherence;
#[path = "../examples/embeddings.rs"]
mod embeddings;
#[path = "../examples/instance_operators.rs"]
mod instance_operators;
#[path = "../examples/decompose.rs"]
mod decompose;
#[path = "../examples/traversal.rs"]
mod traversal;
#[path = "../examples/recursion.rs"]
mod recursion;
#[path = "../examples/simulation.rs"]
mod simulation;
#[path = "../examples/phase_table.rs"]
mod phase_table;
#[path = "../examples/write_fixtures.rs"]
mod write_fixtures;

#[test]
fn spaces_runs() {
    spaces::run().unwrap();
}

#[test]
fn coherence_runs() {
    coherence::run().unwrap();
}

#[test]
fn embeddings_runs() {
    embeddings::run().unwrap();
}

#[test]
fn instance_operators_runs() {
    instance_operators::run().unwrap();
}

#[test]
fn decompose_runs() {
    decompose::run().unwrap();
}

#[test]
fn traversal_runs() {
    traversal::run().unwrap();
}

#[test]
fn recursion_runs() {
    recursion::run().unwrap();
}

#[test]
fn simulation_runs() {
    simulation::run().unwrap();
}

#[test]
fn phase_table_runs() {
    phase_table::run().unwrap();
}

#[test]
fn write_fixtures_runs() {
    let dir = tempfile::tempdir().unwrap();
    write_fixtures::run_in(dir.path().to_path_buf()).unwrap();
}
