//! The shipped fixture corpus, built in code and written to disk by
//! [`write_corpus`]. `cograph selftest` reads the files back and checks each
//! one against the behavior it was built to exhibit.

use std::fs;
use std::io;
use std::path::Path;

use crate::coherence::{chi, chi_path, ViolationKind};
use crate::embedding::find_embeddings;
use crate::fmi::{f_decompose, f_model, recompose, replay, FmiInstance, Observation};
use crate::moves::PrimitiveMove;
use crate::recursion::{bridge_reified, reify, PolicyTrace, ReifiedSpace};
use crate::runtime::{path_is_valid, system1_traverse, system2_traverse, AttractorCache, SnapshotStore};
use crate::sim::presets::{preset, PRESET_NAMES, SHIPPED_SEEDS};
use crate::sim::ScenarioConfig;
use crate::space::{validate, ConceptSpace, FitnessField, NodeId, SpaceBuilder};
use crate::transform::{TransformError, Transformation};

/// One directed edge whose declared inverse does not exist.
pub const MISSING_INVERSE_JSON: &str = r#"{
  "id": "broken",
  "order": 0,
  "type_vocabulary": [],
  "nodes": [
    { "id": "a", "label": "a", "type": "Concept" },
    { "id": "b", "label": "b", "type": "Concept" }
  ],
  "edges": [
    { "id": "a>b", "src": "a", "dst": "b", "label": "step", "inverse_of": "b>a" }
  ]
}
"#;

pub fn edge() -> ConceptSpace {
    SpaceBuilder::new("edge").concepts(["a", "b"]).link("a", "b").build().expect("fixture is valid")
}

pub fn path() -> ConceptSpace {
    SpaceBuilder::new("path").concepts(["a", "b", "c"]).path(["a", "b", "c"]).build().expect("fixture is valid")
}

pub fn triangle() -> ConceptSpace {
    SpaceBuilder::new("triangle").concepts(["x", "y", "z"]).path(["x", "y", "z", "x"]).build().expect("fixture is valid")
}

/// Path a–b–c with a and c mutually exclusive.
pub fn exclusion() -> ConceptSpace {
    SpaceBuilder::new("exclusion")
        .concepts(["a", "b", "c"])
        .path(["a", "b", "c"])
        .exclusive("a", "c")
        .build()
        .expect("fixture is valid")
}

/// Square a–b–c–d–a whose fitness pulls the greedy route a→c through b.
pub fn square() -> (ConceptSpace, FitnessField) {
    let s = SpaceBuilder::new("square")
        .concepts(["a", "b", "c", "d"])
        .path(["a", "b", "c", "d", "a"])
        .build()
        .expect("fixture is valid");
    (s, FitnessField::scalar("v", [("a", 0.0), ("b", 1.8), ("c", 2.0), ("d", 1.0)]))
}

fn map(space: &str, pairs: &[(&str, &str)]) -> Transformation {
    Transformation::new(space, pairs.iter().copied())
}

/// Named transformations, each paired with the space file it acts on.
pub fn transforms() -> Vec<(&'static str, Transformation)> {
    vec![
        ("edge_identity", Transformation::identity("edge")),
        ("path_identity", Transformation::identity("path")),
        ("path_swap", map("path", &[("a", "c"), ("c", "a")])),
        ("path_bad", map("path", &[("a", "b"), ("b", "a")])),
        ("triangle_rotation", map("triangle", &[("x", "y"), ("y", "z"), ("z", "x")])),
        ("swap_exclusive", map("exclusion", &[("a", "c"), ("c", "a")])),
    ]
}

/// Path w–x–y–z after three committed shortcuts w–y, x–z, w–z.
pub fn three_commits() -> FmiInstance {
    let s = SpaceBuilder::new("base").concepts(["w", "x", "y", "z"]).path(["w", "x", "y", "z"]).build().expect("fixture is valid");
    let mut inst = FmiInstance::bare(s).expect("fixture is valid");
    for (a, b) in [("w", "y"), ("x", "z"), ("w", "z")] {
        inst = f_model(&inst, &[Observation::edge(a, b, "learned")]).expect("shortcuts are coherent");
    }
    inst
}

/// The square before and after dropping b–c, and a cache warmed on the
/// first: the cached a→c route is stale on the second.
pub fn stale_cache() -> (FmiInstance, FmiInstance, AttractorCache) {
    let (s, f) = square();
    let before = FmiInstance::new(s, f).expect("fixture is valid");
    let mut cache = AttractorCache::new();
    system1_traverse(&before, &"a".into(), &"c".into(), &mut cache).expect("nodes exist");
    let cut = PrimitiveMove::unlink(before.space(), &"b>c".into()).expect("edge exists");
    let after = before.commit(vec![cut]).expect("square minus one side stays coherent");
    (before, after, cache)
}

/// Two histories from the same start: one adds x–y a second time, the
/// other cuts x–y. Bridged, with one trace walking each.
pub fn conflicting_policies() -> (ReifiedSpace, Vec<PolicyTrace>) {
    let s = SpaceBuilder::new("base").concepts(["w", "x", "y", "z"]).path(["w", "x", "y", "z"]).build().expect("fixture is valid");
    let start = FmiInstance::bare(s).expect("fixture is valid");
    let adds = f_model(&start, &[Observation::edge("x", "y", "again")]).expect("parallel edge is coherent");
    let cut = PrimitiveMove::unlink(start.space(), &"x>y".into()).expect("edge exists");
    let removes = start.perturb(vec![cut]).expect("removal is well formed");
    let store = SnapshotStore::in_memory();
    let ra = reify(&adds.to_log(), &store).expect("own log replays");
    let rb = reify(&removes.to_log(), &store).expect("own log replays");
    let joint = bridge_reified(&ra, &rb).expect("shared start state anchors the bridge");
    let traces = vec![PolicyTrace::new("add", ["0/s0", "0/s1"]), PolicyTrace::new("remove", ["1/s0", "1/s1"])];
    (joint, traces)
}

pub fn scenarios() -> Vec<ScenarioConfig> {
    PRESET_NAMES.iter().map(|n| preset(n, SHIPPED_SEEDS[0]).expect("shipped preset")).collect()
}

/// Write the whole corpus under `dir`.
pub fn write_corpus(dir: &Path) -> io::Result<()> {
    for sub in ["spaces", "transforms", "logs", "scenarios"] {
        fs::create_dir_all(dir.join(sub))?;
    }
    let (sq, sq_fit) = square();
    for (name, text) in [
        ("edge", edge().to_json(None)),
        ("path", path().to_json(None)),
        ("triangle", triangle().to_json(None)),
        ("exclusion", exclusion().to_json(None)),
        ("square", sq.to_json(Some(&sq_fit))),
    ] {
        fs::write(dir.join(format!("spaces/{name}.json")), text + "\n")?;
    }
    fs::write(dir.join("spaces/invalid_missing_inverse.json"), MISSING_INVERSE_JSON)?;
    for (name, t) in transforms() {
        fs::write(dir.join(format!("transforms/{name}.json")), t.to_json() + "\n")?;
    }
    let (_, after, cache) = stale_cache();
    fs::write(dir.join("logs/three_commits.jsonl"), three_commits().to_log())?;
    fs::write(dir.join("logs/stale_cache.jsonl"), after.to_log())?;
    fs::write(dir.join("logs/stale_cache.cache.json"), cache.to_json() + "\n")?;
    for cfg in scenarios() {
        let name = cfg.name.clone().expect("presets are named");
        fs::write(dir.join(format!("scenarios/{name}.json")), cfg.to_json() + "\n")?;
    }
    Ok(())
}

type Check = (String, bool);

fn read(dir: &Path, rel: &str) -> Result<String, String> {
    fs::read_to_string(dir.join(rel)).map_err(|e| format!("{rel}: {e}"))
}

fn load_space(dir: &Path, name: &str) -> Result<ConceptSpace, String> {
    let text = read(dir, &format!("spaces/{name}.json"))?;
    ConceptSpace::from_json(&text).map(|(s, _)| s).map_err(|e| format!("spaces/{name}.json: {e}"))
}

fn load_transform(dir: &Path, name: &str) -> Result<Transformation, String> {
    let text = read(dir, &format!("transforms/{name}.json"))?;
    Transformation::from_json(&text).map_err(|e| format!("transforms/{name}.json: {e}"))
}

fn sorted_files(dir: &Path, ext: &str) -> Result<Vec<std::path::PathBuf>, String> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .map_err(|e| format!("{}: {e}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == ext))
        .collect();
    out.sort();
    Ok(out)
}

/// Run every corpus check. Errors only when a file is missing or unreadable;
/// a wrong result is reported as a failed check.
pub fn run_checks(dir: &Path) -> Result<Vec<Check>, String> {
    let mut out = Vec::new();

    for file in sorted_files(&dir.join("spaces"), "json")? {
        let stem = file.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_owned();
        let text = fs::read_to_string(&file).map_err(|e| e.to_string())?;
        let clean = match ConceptSpace::from_json(&text) {
            Ok((s, f)) => validate(&s).is_empty() && f.is_none_or(|f| f.validate_against(&s).is_empty()),
            Err(_) => false,
        };
        out.push((format!("validate:{stem}"), clean != stem.starts_with("invalid_")));
    }

    let (e, p, t) = (load_space(dir, "edge")?, load_space(dir, "path")?, load_space(dir, "triangle")?);
    for (name, src, tgt, want) in [("edge->triangle", &e, &t, 6), ("path->triangle", &p, &t, 6), ("triangle->path", &t, &p, 0)] {
        out.push((format!("embed:{name}"), find_embeddings(src, tgt, None).len() == want));
    }

    let ex = load_space(dir, "exclusion")?;
    let coherent = |t: &Transformation, s: &ConceptSpace| chi(t, s).is_ok_and(|v| v.coherent);
    out.push(("check:path_identity".into(), coherent(&load_transform(dir, "path_identity")?, &p)));
    out.push(("check:path_swap".into(), coherent(&load_transform(dir, "path_swap")?, &p)));
    out.push(("check:triangle_rotation".into(), coherent(&load_transform(dir, "triangle_rotation")?, &t)));
    out.push(("check:path_bad".into(), !coherent(&load_transform(dir, "path_bad")?, &p)));
    let exclusive = chi(&load_transform(dir, "swap_exclusive")?, &ex)
        .is_ok_and(|v| v.violations.iter().any(|v| v.kind == ViolationKind::ExclusionContradiction));
    out.push(("check:swap_exclusive".into(), exclusive));
    let mixed = [load_transform(dir, "path_identity")?, load_transform(dir, "edge_identity")?];
    let mismatch = matches!(chi_path(&mixed, &p), Err(TransformError::DomainMismatch { .. }));
    out.push(("check:domain_mismatch".into(), mismatch));

    let swap = load_transform(dir, "path_swap")?;
    let exact = f_decompose(&swap, &p).is_ok_and(|m| m.len() == 3 && recompose(&m, &p).is_ok_and(|r| r == swap));
    out.push(("decompose:path_swap".into(), exact));

    let log = read(dir, "logs/three_commits.jsonl")?;
    let shape = reify(&log, &SnapshotStore::in_memory())
        .is_ok_and(|r| (r.space.node_count(), r.space.edge_count()) == (4, 6) && validate(&r.space).is_empty());
    out.push(("replay:three_commits".into(), shape));

    let contrast = (|| {
        let inst = replay(&read(dir, "logs/stale_cache.jsonl").ok()?).ok()?;
        let mut cache = AttractorCache::from_json(&read(dir, "logs/stale_cache.cache.json").ok()?).ok()?;
        let (a, c) = (NodeId::from("a"), NodeId::from("c"));
        let s1 = system1_traverse(&inst, &a, &c, &mut cache).ok()??;
        let s2 = system2_traverse(&inst, &a, &c).ok()??;
        Some(!path_is_valid(inst.space(), &s1, &a, &c) && path_is_valid(inst.space(), &s2, &a, &c))
    })();
    out.push(("traverse:stale_cache".into(), contrast == Some(true)));

    for file in sorted_files(&dir.join("scenarios"), "json")? {
        let stem = file.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_owned();
        let text = fs::read_to_string(&file).map_err(|e| e.to_string())?;
        out.push((format!("scenario:{stem}"), ScenarioConfig::from_json(&text).is_ok()));
    }
    Ok(out)
}
