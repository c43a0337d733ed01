//! Brute-force oracles and corpora shared by the integration tests.
//!
//! Graphs here are plain adjacency matrices. Nothing below calls into the
//! library's algorithms; `to_space` and `transform` only translate.

#![allow(dead_code)]

use std::collections::BTreeSet;

use cograph::coherence::ViolationKind;
use cograph::fmi::{f_decompose, f_eval, f_stability, recompose, replay, FmiInstance, StabilityDecision};
use cograph::moves::PrimitiveMove;
use cograph::space::{validate, ConceptNode, ConceptSpace, NodeId, SpaceBuilder};
use cograph::transform::Transformation;
use cograph::coherence::{chi, chi_identity};
use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    pub n: usize,
    pub adj: Vec<Vec<bool>>,
    pub types: Vec<usize>,
    pub excl: Vec<Vec<bool>>,
}

pub fn node(i: usize) -> String {
    format!("v{i}")
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Self { n, adj: vec![vec![false; n]; n], types: vec![0; n], excl: vec![vec![false; n]; n] }
    }

    /// Undirected graph whose edges are the set bits of `mask` over the
    /// pairs `(i, j), i < j`, in lexicographic order.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        let mut g = Self::empty(n);
        for (k, (i, j)) in pairs(n).into_iter().enumerate() {
            if mask >> k & 1 == 1 {
                g.link(i, j);
            }
        }
        g
    }

    pub fn link(&mut self, i: usize, j: usize) {
        self.adj[i][j] = true;
        self.adj[j][i] = true;
    }

    pub fn exclude(&mut self, i: usize, j: usize) {
        self.excl[i][j] = true;
        self.excl[j][i] = true;
    }

    pub fn edge_count(&self) -> usize {
        pairs(self.n).into_iter().filter(|&(i, j)| self.adj[i][j]).count()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].iter().filter(|&&b| b).count()
    }

    pub fn to_space(&self, id: &str) -> ConceptSpace {
        let mut b = SpaceBuilder::new(id);
        for i in 0..self.n {
            let ty = if self.types[i] == 0 { "Concept".to_owned() } else { format!("T{}", self.types[i]) };
            b = b.typed(&node(i), &ty);
        }
        for (i, j) in pairs(self.n) {
            if self.adj[i][j] {
                b = b.link(&node(i), &node(j));
            }
            if self.excl[i][j] {
                b = b.exclusive(&node(i), &node(j));
            }
        }
        b.build().expect("oracle graphs are valid spaces")
    }
}

pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// `map[i]` is the image of node `i`.
pub fn transform(space: &ConceptSpace, map: &[usize]) -> Transformation {
    Transformation::new(space.id().clone(), map.iter().enumerate().map(|(i, &j)| (node(i), node(j))))
}

/// As [`transform`], reusing precomputed node ids.
pub fn transform_ids(space: &ConceptSpace, ids: &[NodeId], map: &[usize]) -> Transformation {
    Transformation::new(space.id().clone(), map.iter().enumerate().map(|(i, &j)| (ids[i].clone(), ids[j].clone())))
}

pub fn node_ids(n: usize) -> Vec<NodeId> {
    (0..n).map(|i| NodeId::from(node(i))).collect()
}

/// Violation kinds of the map on `g`, straight from the clause definitions.
pub fn oracle_chi(g: &Graph, map: &[usize]) -> BTreeSet<ViolationKind> {
    use ViolationKind::*;
    let mut out = BTreeSet::new();
    for i in 0..g.n {
        for j in i + 1..g.n {
            if map[i] == map[j] {
                out.insert(NonInjective);
            }
        }
    }
    for (i, j) in pairs(g.n) {
        if g.adj[i][j] {
            if !g.adj[map[i]][map[j]] {
                out.insert(AdjacencyBroken);
            }
            if g.excl[map[i]][map[j]] {
                out.insert(ExclusionContradiction);
            }
        }
    }
    for i in 0..g.n {
        if g.types[map[i]] != g.types[i] {
            out.insert(TypeViolation);
        }
        if g.excl[i][map[i]] {
            out.insert(ExclusionContradiction);
        }
        if g.n >= 2 && !(0..g.n).any(|j| g.adj[i][j] && g.adj[map[i]][map[j]]) {
            out.insert(OrphanedConcept);
        }
    }
    out
}

pub fn oracle_coherent(g: &Graph, map: &[usize]) -> bool {
    oracle_chi(g, map).is_empty()
}

/// Every map `0..n → 0..m`, as digit vectors in base `m`.
pub fn all_maps(n: usize, m: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = m.checked_pow(n as u32).expect("small");
    (0..total).map(move |mut k| {
        (0..n)
            .map(|_| {
                let d = k % m;
                k /= m;
                d
            })
            .collect()
    })
}

/// Every injective map `0..n → 0..m`.
pub fn injective_maps(n: usize, m: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, m: usize, cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for j in 0..m {
            if !used[j] {
                used[j] = true;
                cur.push(j);
                go(n, m, cur, used, out);
                cur.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    if n <= m {
        go(n, m, &mut Vec::new(), &mut vec![false; m], &mut out);
    }
    out
}

/// Injective, type- and edge-preserving maps of `s` into `t`.
pub fn oracle_embeddings(s: &Graph, t: &Graph) -> BTreeSet<Vec<usize>> {
    injective_maps(s.n, t.n)
        .into_iter()
        .filter(|m| (0..s.n).all(|i| s.types[i] == t.types[m[i]]))
        .filter(|m| pairs(s.n).into_iter().all(|(i, j)| !s.adj[i][j] || t.adj[m[i]][m[j]]))
        .collect()
}

/// Permutations preserving adjacency, non-adjacency, types and exclusions.
pub fn oracle_automorphisms(g: &Graph) -> Vec<Vec<usize>> {
    injective_maps(g.n, g.n)
        .into_iter()
        .filter(|p| {
            (0..g.n).all(|i| g.types[i] == g.types[p[i]])
                && pairs(g.n).into_iter().all(|(i, j)| g.adj[i][j] == g.adj[p[i]][p[j]] && g.excl[i][j] == g.excl[p[i]][p[j]])
        })
        .collect()
}

/// Read an embedding's map back as an index vector.
pub fn as_indices(map: &std::collections::BTreeMap<NodeId, NodeId>, n: usize) -> Vec<usize> {
    (0..n).map(|i| map[&NodeId::from(node(i))].as_str()[1..].parse().unwrap()).collect()
}

pub fn random_graph<R: Rng>(rng: &mut R, n: usize, density: f64, type_count: usize, excl_rate: f64) -> Graph {
    let mut g = Graph::empty(n);
    for (i, j) in pairs(n) {
        if rng.gen_bool(density) {
            g.link(i, j);
        }
        if rng.gen_bool(excl_rate) {
            g.exclude(i, j);
        }
    }
    for t in g.types.iter_mut() {
        *t = rng.gen_range(0..type_count.max(1));
    }
    g
}

/// Random graph without isolated nodes and without contradictory edges.
pub fn random_clean_graph<R: Rng>(rng: &mut R, n: usize, density: f64, type_count: usize, excl_rate: f64) -> Graph {
    let mut g = random_graph(rng, n, density, type_count, 0.0);
    if n >= 2 {
        for i in 0..n {
            if g.degree(i) == 0 {
                let j = (i + 1 + rng.gen_range(0..n - 1)) % n;
                g.link(i, j);
            }
        }
    }
    for (i, j) in pairs(n) {
        if !g.adj[i][j] && rng.gen_bool(excl_rate) {
            g.exclude(i, j);
        }
    }
    g
}

/// Every labelled graph with `1..=max_n` nodes, plain, then each again with
/// a two-type colouring and one exclusion chosen from its mask.
pub fn exhaustive_corpus(max_n: usize) -> Vec<Graph> {
    let mut out = Vec::new();
    for n in 1..=max_n {
        let p = pairs(n).len();
        for mask in 0..(1u64 << p) {
            let g = Graph::from_mask(n, mask);
            out.push(g.clone());
            if n >= 2 {
                let mut d = g;
                for i in 0..n {
                    d.types[i] = ((mask >> i) & 1) as usize;
                }
                let (i, j) = pairs(n)[(mask as usize) % p];
                d.exclude(i, j);
                out.push(d);
            }
        }
    }
    out
}

/// Property suite for the instance operators; any instance should pass.
pub fn fmi_suite(inst: &FmiInstance) -> Result<(), String> {
    let space = inst.space();
    let fail = |what: &str| Err(format!("{what} on {}", space.id()));

    if !validate(space).is_empty() {
        return fail("instance space invalid");
    }
    match FmiInstance::from_json(&inst.to_json()) {
        Ok(back) if &back == inst => {}
        _ => return fail("json round trip"),
    }
    match replay(&inst.to_log()) {
        Ok(back) if back.space() == space && back.fitness() == inst.fitness() => {}
        _ => return fail("log replay"),
    }

    let ids: Vec<NodeId> = space.node_ids().cloned().collect();
    let before = inst.clone();
    let identity = Transformation::identity(space.id().clone());
    let target = vec![0.0; inst.fitness().dimension()];
    let e1 = f_eval(inst, &identity, &target).map_err(|e| e.to_string())?;
    let e2 = f_eval(inst, &identity, &target).map_err(|e| e.to_string())?;
    if e1 != e2 || inst != &before || e1.verdict != chi_identity(space) {
        return fail("f_eval purity");
    }
    if f_stability(inst, &identity, usize::MAX) != StabilityDecision::Accept {
        return fail("identity deferred");
    }

    let swaps = ids.iter().enumerate().flat_map(|(i, a)| ids[i + 1..].iter().map(move |b| (a, b)));
    for (a, b) in swaps.take(12) {
        let t = Transformation::new(space.id().clone(), [(a.clone(), b.clone()), (b.clone(), a.clone())]);
        let verdict = chi(&t, space).map_err(|e| e.to_string())?;
        match f_decompose(&t, space) {
            Ok(moves) if verdict.coherent => {
                if recompose(&moves, space).map_err(|e| e.to_string())? != t {
                    return fail("closure");
                }
            }
            Ok(_) => return fail("incoherent input decomposed"),
            Err(_) if verdict.coherent => return fail("coherent input refused"),
            Err(_) => {}
        }
    }

    let gated = ids.iter().enumerate().flat_map(|(i, a)| ids[i + 1..].iter().map(move |b| (a, b)));
    for (a, b) in gated.filter(|(a, b)| !space.has_edge(a, b)).take(6) {
        let m = PrimitiveMove::link(space, a, b, "probe");
        let after = m.apply(space).map_err(|e| e.to_string())?;
        let expect_ok = chi_identity(&after).coherent;
        match inst.commit(vec![m.clone()]) {
            Ok(next) => {
                if !expect_ok || next.revision() != inst.revision() + 1 || next.space() != &after {
                    return fail("commit accepted incoherent move");
                }
                let undone = next.commit(vec![m.inverse()]);
                if chi_identity(space).coherent && !undone.is_ok_and(|u| u.space() == space) {
                    return fail("commit not reversible");
                }
            }
            Err(_) if expect_ok => return fail("commit rejected coherent move"),
            Err(_) => {}
        }
    }

    let extra = ConceptNode::concept("fresh_probe");
    if !space.contains_node(&extra.id) {
        let m = PrimitiveMove::AddNode { node: extra, fitness: Some(target.clone()) };
        let after = m.apply(space).map_err(|e| e.to_string())?;
        if inst.commit(vec![m]).is_ok() != chi_identity(&after).coherent {
            return fail("gate disagrees with identity check");
        }
    }
    Ok(())
}
