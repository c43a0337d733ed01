//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//! Run with `cargo test --test acceptance` (optimized test profile).

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use cograph::coherence::{chi, chi_path, ViolationKind};
use cograph::embedding::{find_embeddings, image_space, lift, span, SpanStrategy};
use cograph::fixtures;
use cograph::fmi::{f_decompose, recompose};
use cograph::moves::{MoveKind, PrimitiveMove};
use cograph::recursion::{meta_chi, reify, stack};
use cograph::runtime::{path_is_valid, step_coherent, system1_traverse, system2_traverse, SnapshotStore};
use cograph::sim::presets::{preset, PRESET_NAMES, SHIPPED_SEEDS};
use cograph::sim::{run, Mode};
use cograph::space::{validate, ConceptNode, ConceptSpace, NodeId};
use cograph::transform::{compose, inverse, Transformation, TransformError};
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration, detail: String) -> Outcome {
    let took = start.elapsed();
    ensure(took < limit, || format!("{detail}; took {took:.1?}, limit {limit:?}"))?;
    Ok(format!("{detail}; {took:.1?}"))
}

fn random_perm<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        p.swap(i, rng.gen_range(0..=i));
    }
    p
}

fn random_map<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    if rng.gen_bool(0.5) {
        random_perm(rng, n)
    } else {
        (0..n).map(|_| rng.gen_range(0..n)).collect()
    }
}

fn self_maps(s: &ConceptSpace) -> Vec<Transformation> {
    find_embeddings(s, s, None).into_iter().map(|g| Transformation::new(s.id().clone(), g.map)).collect()
}

fn necessity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for k in 0..1000 {
        let (n, m) = (rng.gen_range(1..=12), rng.gen_range(1..=12));
        let a = random_graph(&mut rng, n, 0.3, 2, 0.1).to_space(&format!("left{k}"));
        let b = random_graph(&mut rng, m, 0.3, 2, 0.1).to_space(&format!("right{k}"));
        let ta = transform(&a, &random_map(&mut rng, n));
        let tb = transform(&b, &random_map(&mut rng, m));
        ensure(matches!(compose(&ta, &tb), Err(TransformError::DomainMismatch { .. })), || format!("pair {k} composed"))?;
        let (joint, set) = span(&[&a, &b], SpanStrategy::DisjointUnion).map_err(|e| e.to_string())?;
        let la = lift(&set.embeddings[0], &ta, &a, &joint).map_err(|e| e.to_string())?;
        let lb = lift(&set.embeddings[1], &tb, &b, &joint).map_err(|e| e.to_string())?;
        ensure(compose(&la, &lb).is_ok(), || format!("pair {k}: lifted compose failed"))?;
        ensure(chi_path(&[la, lb], &joint).is_ok(), || format!("pair {k}: chi_path undefined"))?;
    }
    within(start, Duration::from_secs(10), "1000/1000 DOMAIN_MISMATCH, 1000/1000 defined after span+lift".into())
}

fn lifting() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut cases, mut coherent) = (0usize, 0usize);
    while cases < 1200 {
        let n = rng.gen_range(1..=8);
        let g = random_clean_graph(&mut rng, n, 0.4, 2, 0.2);
        let s = g.to_space("src");
        let host_n = (n + rng.gen_range(0..=3)).min(9);
        let mut host = random_graph(&mut rng, host_n, 0.3, 2, 0.1);
        let perm = random_perm(&mut rng, host_n);
        for (i, j) in pairs(n) {
            if g.adj[i][j] {
                host.link(perm[i], perm[j]);
            }
        }
        for i in 0..n {
            host.types[perm[i]] = g.types[i];
        }
        let target = host.to_space("dst");
        let found = find_embeddings(&s, &target, Some(16));
        ensure(!found.is_empty(), || format!("no embedding for case {cases}"))?;
        let emb = &found[rng.gen_range(0..found.len())];
        let image = image_space(emb, &s, &target).map_err(|e| e.to_string())?;
        let autos = self_maps(&s);
        for _ in 0..4 {
            let t = if rng.gen_bool(0.5) {
                autos[rng.gen_range(0..autos.len())].clone()
            } else {
                transform(&s, &random_map(&mut rng, n))
            };
            let lifted = lift(emb, &t, &s, &target).map_err(|e| e.to_string())?;
            let here = chi(&t, &s).map_err(|e| e.to_string())?.coherent;
            let there = chi(&lifted, &image).map_err(|e| e.to_string())?.coherent;
            ensure(here == there, || format!("case {cases}: {here} vs {there}"))?;
            cases += 1;
            coherent += usize::from(here);
        }
    }
    within(start, Duration::from_secs(30), format!("{cases} triples agree ({coherent} coherent)"))
}

fn closure_case(s: &ConceptSpace, t: &Transformation) -> Result<bool, String> {
    if !chi(t, s).map_err(|e| e.to_string())?.coherent {
        return Ok(false);
    }
    let moves = f_decompose(t, s).map_err(|e| e.to_string())?;
    let back = recompose(&moves, s).map_err(|e| e.to_string())?;
    ensure(&back == t, || format!("recompose differs on {}: {t:?}", s.id()))?;
    Ok(true)
}

fn closure() -> Outcome {
    let start = Instant::now();
    // Coherent maps are injective, edge- and type-preserving, so they are
    // among the self-embeddings. Confirm that by brute force on small spaces.
    for g in exhaustive_corpus(4) {
        let s = g.to_space("g");
        let via_search: BTreeSet<Vec<usize>> = self_maps(&s)
            .iter()
            .filter(|t| chi(t, &s).unwrap().coherent)
            .map(|t| (0..g.n).map(|i| t.image(&node(i).into()).as_str()[1..].parse().unwrap()).collect())
            .collect();
        let brute: BTreeSet<Vec<usize>> = all_maps(g.n, g.n).filter(|m| oracle_coherent(&g, m)).collect();
        ensure(via_search == brute, || format!("coherent set incomplete on {g:?}"))?;
    }
    let mut exhaustive = 0usize;
    for g in exhaustive_corpus(6) {
        let s = g.to_space("g");
        for t in self_maps(&s) {
            exhaustive += usize::from(closure_case(&s, &t)?);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut random = 0usize;
    while random < 1000 {
        let n = rng.gen_range(2..=8);
        let s = random_clean_graph(&mut rng, n, 0.45, 1, 0.15).to_space("r");
        let maps = self_maps(&s);
        let t = &maps[rng.gen_range(0..maps.len())];
        random += usize::from(closure_case(&s, t)?);
    }
    within(start, Duration::from_secs(60), format!("{exhaustive} exhaustive (<=6 nodes) + {random} random (<=8) exact"))
}

fn chi_oracle() -> Outcome {
    let start = Instant::now();
    let mut checked = 0usize;
    let mut check = |g: &Graph, maps: &mut dyn Iterator<Item = Vec<usize>>| -> Result<(), String> {
        let s = g.to_space("g");
        let ids = node_ids(g.n);
        for m in maps {
            let got: BTreeSet<ViolationKind> = chi(&transform_ids(&s, &ids, &m), &s).unwrap().violations.iter().map(|v| v.kind).collect();
            ensure(got == oracle_chi(g, &m), || format!("{g:?} {m:?}: {got:?}"))?;
            checked += 1;
        }
        Ok(())
    };
    // Every labelled graph up to five nodes, decorated variants up to four,
    // then seeded decorated spaces of five and six nodes; all maps on each.
    let plain5 = (1..=5).flat_map(|n| (0..1u64 << pairs(n).len()).map(move |mask| Graph::from_mask(n, mask)));
    let decorated4 = exhaustive_corpus(4).into_iter().filter(|g| g.types.iter().any(|&t| t > 0) || g.excl.iter().flatten().any(|&x| x));
    for g in plain5.chain(decorated4) {
        check(&g, &mut all_maps(g.n, g.n))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for k in 0..224 {
        let n = if k < 200 { 5 } else { 6 };
        let g = random_graph(&mut rng, n, 0.45, 2, 0.15);
        check(&g, &mut all_maps(n, n))?;
    }
    within(start, Duration::from_secs(60), format!("{checked} (space, map) pairs agree"))
}

fn embedding_completeness() -> Outcome {
    let start = Instant::now();
    let counts = [
        find_embeddings(&fixtures::edge(), &fixtures::triangle(), None).len(),
        find_embeddings(&fixtures::path(), &fixtures::triangle(), None).len(),
        find_embeddings(&fixtures::triangle(), &fixtures::path(), None).len(),
    ];
    ensure(counts == [6, 6, 0], || format!("fixture counts {counts:?}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut sources: Vec<Graph> = exhaustive_corpus(3);
    sources.extend((0..30).map(|i| random_graph(&mut rng, 4 + i % 2, 0.5, 2, 0.0)));
    let targets: Vec<Graph> = (0..30).map(|i| random_graph(&mut rng, 5 + i % 3, 0.5, 2, 0.0)).collect();
    let (mut pairs_checked, mut total) = (0usize, 0usize);
    for t in &targets {
        let ts = t.to_space("t");
        for s in &sources {
            let found: Vec<Vec<usize>> =
                find_embeddings(&s.to_space("s"), &ts, None).iter().map(|g| as_indices(&g.map, s.n)).collect();
            let set: BTreeSet<Vec<usize>> = found.iter().cloned().collect();
            ensure(set.len() == found.len(), || "duplicate embeddings".into())?;
            ensure(set == oracle_embeddings(s, t), || format!("{s:?} into {t:?}"))?;
            pairs_checked += 1;
            total += found.len();
        }
    }
    within(start, Duration::from_secs(60), format!("6/6/0 fixtures; {pairs_checked} pairs, {total} embeddings match"))
}

fn reversibility() -> Outcome {
    let mut autos = 0usize;
    for g in exhaustive_corpus(5) {
        let s = g.to_space("g");
        let id = Transformation::identity("g");
        for t in self_maps(&s).into_iter().filter(|t| t.is_permutation()) {
            let inv = inverse(&t).map_err(|e| e.to_string())?;
            ensure(compose(&t, &inv).unwrap() == id && compose(&inv, &t).unwrap() == id, || format!("{t:?}"))?;
            autos += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut kinds = BTreeSet::new();
    let mut moves = 0usize;
    for _ in 0..300 {
        let n = rng.gen_range(2..=7);
        let s = random_graph(&mut rng, n, 0.5, 1, 0.2).to_space("m");
        let a = NodeId::from(node(rng.gen_range(0..n)));
        let b = NodeId::from(node(rng.gen_range(0..n)));
        let grown = PrimitiveMove::AddNode { node: ConceptNode::concept("extra"), fitness: None };
        let bigger = grown.apply(&s).map_err(|e| e.to_string())?;
        let mut cases = vec![
            (s.clone(), PrimitiveMove::RelabelNode { node: a.clone(), from: s.node(&a).unwrap().label.clone(), to: "x".into() }),
            (s.clone(), PrimitiveMove::link(&s, &a, &b, "probe")),
            (s.clone(), grown),
            (bigger.clone(), PrimitiveMove::RemoveNode { node: bigger.node(&"extra".into()).unwrap().clone(), fitness: None }),
            (s.clone(), PrimitiveMove::RemapSingle { from: a.clone(), to: "moved".into() }),
        ];
        if let Some(e) = s.edges().next() {
            cases.push((s.clone(), PrimitiveMove::unlink(&s, &e.id).unwrap()));
        }
        for (space, m) in cases {
            let back = m.inverse().apply(&m.apply(&space).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            ensure(back == space, || format!("{:?} did not reverse", m.kind()))?;
            kinds.insert(m.kind());
            moves += 1;
        }
    }
    ensure(kinds.len() == MoveKind::ALL.len(), || format!("only {kinds:?} exercised"))?;
    Ok(format!("{autos} automorphisms cancel; {moves} moves over all {} kinds restore", kinds.len()))
}

fn simulator_contrast() -> Outcome {
    let start = Instant::now();
    let mut faults_checked = 0usize;
    for &seed in &SHIPPED_SEEDS {
        for name in PRESET_NAMES {
            let cfg = preset(name, seed).unwrap();
            let series = run(&cfg).map_err(|e| e.to_string())?;
            let rates: Vec<f64> = series.rates().collect();
            if cfg.mode == Mode::NoSpan {
                ensure(rates.iter().all(|&r| r == 0.0), || format!("{name}/{seed}: NO_SPAN rate {rates:?}"))?;
            }
            if cfg.mode == Mode::SpanOnly && cfg.divergence_rate == 0 {
                ensure(rates.iter().all(|&r| r == 1.0), || format!("{name}/{seed}: static rate {rates:?}"))?;
            }
            for f in &cfg.faults {
                let r = &series.records;
                let seen = match f.kind {
                    cograph::sim::FaultKind::Contradiction => r[f.step].contradictions_before_repair,
                    cograph::sim::FaultKind::Orphan => r[f.step].orphans_before_repair,
                };
                ensure(seen > 0, || format!("{name}/{seed}: fault at step {} not visible", f.step))?;
                let cleared = r[f.step..(f.step + 10).min(r.len())]
                    .iter()
                    .any(|m| m.contradiction_count == 0 && m.orphan_count == 0);
                ensure(cleared, || format!("{name}/{seed}: fault at step {} not cleared in 10 steps", f.step))?;
                faults_checked += 1;
            }
        }
    }
    within(
        start,
        Duration::from_secs(120),
        format!("{} presets x {} seeds; NO_SPAN = 0, static SPAN_ONLY = 1, {faults_checked} faults cleared", PRESET_NAMES.len(), SHIPPED_SEEDS.len()),
    )
}

fn show(path: &[cograph::space::EdgeId]) -> String {
    path.iter().map(|e| e.as_str()).collect::<Vec<_>>().join(", ")
}

fn traversal_contrast() -> Outcome {
    let (_, after, mut cache) = fixtures::stale_cache();
    let (a, c) = (NodeId::from("a"), NodeId::from("c"));
    let s1 = system1_traverse(&after, &a, &c, &mut cache).map_err(|e| e.to_string())?.ok_or("system1 found nothing")?;
    ensure(!path_is_valid(after.space(), &s1, &a, &c), || format!("system1 path {s1:?} is still valid"))?;
    let s2 = system2_traverse(&after, &a, &c).map_err(|e| e.to_string())?;
    match s2 {
        Some(p) => {
            ensure(path_is_valid(after.space(), &p, &a, &c), || format!("system2 path {p:?} invalid"))?;
            for e in &p {
                ensure(after.space().edge(e).is_some_and(|x| step_coherent(after.space(), x)), || format!("step {e} incoherent"))?;
            }
            Ok(format!("system1 stale [{}]; system2 valid [{}]", show(&s1), show(&p)))
        }
        None => Ok(format!("system1 stale [{}]; system2 NO_PATH", show(&s1))),
    }
}

fn recursion() -> Outcome {
    let inst = fixtures::three_commits();
    let store = SnapshotStore::in_memory();
    let r = reify(&inst.to_log(), &store).map_err(|e| e.to_string())?;
    let shape = (r.space.node_count(), r.space.edge_count() / 2, r.space.order());
    ensure(shape == (4, 3, inst.order() + 1), || format!("reified shape {shape:?}"))?;
    ensure(validate(&r.space).is_empty(), || "reified space invalid".into())?;
    let meta = stack(&r).map_err(|e| e.to_string())?;
    fmi_suite(&meta)?;
    let (joint, traces) = fixtures::conflicting_policies();
    fmi_suite(&stack(&joint).map_err(|e| e.to_string())?)?;
    let v = meta_chi(&joint, &traces).map_err(|e| e.to_string())?;
    ensure(v.has(ViolationKind::ExclusionContradiction), || format!("meta verdict {v:?}"))?;
    Ok(format!("4 states, 3 pairs, order {}; fmi suite passes on reified spaces; meta EXCLUSION_CONTRADICTION", shape.2))
}

fn determinism() -> Outcome {
    let fx = |rel: &str| format!("{}/fixtures/{rel}", env!("CARGO_MANIFEST_DIR"));
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = |k: usize| dir.path().join(format!("run{k}")).to_string_lossy().into_owned();
    let commands: Vec<Vec<String>> = vec![
        vec!["validate".into(), fx("spaces/square.json")],
        vec!["validate".into(), fx("spaces/invalid_missing_inverse.json")],
        vec!["embed".into(), fx("spaces/edge.json"), fx("spaces/triangle.json")],
        vec!["check".into(), "--path".into(), fx("spaces/path.json"), fx("transforms/path_swap.json"), fx("transforms/path_bad.json")],
        vec!["decompose".into(), fx("spaces/triangle.json"), fx("transforms/triangle_rotation.json")],
        vec!["replay".into(), fx("logs/three_commits.jsonl")],
        vec!["simulate".into(), fx("scenarios/drift_repair.json"), "--format".into(), "json".into()],
        vec!["simulate".into(), "--preset".into(), "phase_table".into()],
        vec!["selftest".into()],
    ];
    let exe = env!("CARGO_BIN_EXE_cograph");
    for args in &commands {
        let a = Command::new(exe).args(args).output().map_err(|e| e.to_string())?;
        let b = Command::new(exe).args(args).output().map_err(|e| e.to_string())?;
        ensure(a.stdout == b.stdout && a.stderr == b.stderr && a.status == b.status, || format!("{args:?} differs"))?;
    }
    for k in 0..2 {
        let run = Command::new(exe).args(["simulate", &fx("scenarios/fault_orphan.json"), "--out", &out(k)]).output();
        ensure(run.is_ok_and(|r| r.status.success()), || "simulate --out failed".into())?;
    }
    for file in ["fault_orphan.csv", "fault_orphan.json"] {
        let read = |k: usize| std::fs::read(dir.path().join(format!("run{k}")).join(file)).unwrap_or_default();
        ensure(!read(0).is_empty() && read(0) == read(1), || format!("{file} differs"))?;
    }
    for name in PRESET_NAMES {
        let cfg = preset(name, SHIPPED_SEEDS[1]).unwrap();
        let (x, y) = (run(&cfg).map_err(|e| e.to_string())?, run(&cfg).map_err(|e| e.to_string())?);
        ensure(x.to_csv() == y.to_csv() && x.to_json() == y.to_json(), || format!("{name} differs"))?;
    }
    Ok(format!("{} CLI invocations and {} simulator runs byte-identical", commands.len() + 1, PRESET_NAMES.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("necessity", necessity),
        ("lifting coherence", lifting),
        ("closure", closure),
        ("chi oracle equivalence", chi_oracle),
        ("embedding completeness", embedding_completeness),
        ("reversibility", reversibility),
        ("simulator contrast", simulator_contrast),
        ("system-1/system-2 contrast", traversal_contrast),
        ("recursion", recursion),
        ("determinism", determinism),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let k = i + 1;
        if !only.is_empty() && !only.contains(&k) {
            continue;
        }
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match result {
            Ok(detail) => println!("[PASS] criterion {k:>2} {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] criterion {k:>2} {name}: {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
