//! Write the fixture corpus to a directory and check it, as `selftest` does.
//! Usage: `cargo run --example write_fixtures [DIR]`.

use std::error::Error;
use std::path::PathBuf;

use cograph::fixtures::{run_checks, write_corpus};

pub fn run_in(dir: PathBuf) -> Result<(), Box<dyn Error>> {
    write_corpus(&dir)?;
    let checks = run_checks(&dir)?;
    let failed = checks.iter().filter(|(_, ok)| !ok).count();
    println!("{}: {} checks, {failed} failed", dir.display(), checks.len());
    if failed > 0 {
        return Err("corpus failed its own checks".into());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("cograph-fixtures"));
    run_in(dir)
}
