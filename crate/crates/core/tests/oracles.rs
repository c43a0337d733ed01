//! Library results against the brute-force oracles in `common`.

mod common;

use std::collections::BTreeSet;

use cograph::coherence::chi;
use cograph::embedding::find_embeddings;
use cograph::transform::is_automorphism;
use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn kinds(g: &Graph, map: &[usize]) -> BTreeSet<cograph::coherence::ViolationKind> {
    let s = g.to_space("g");
    chi(&transform(&s, map), &s).unwrap().violations.iter().map(|v| v.kind).collect()
}

#[test]
fn chi_matches_oracle_on_every_map_up_to_four_nodes() {
    let mut checked = 0;
    for g in exhaustive_corpus(4) {
        let s = g.to_space("g");
        for map in all_maps(g.n, g.n) {
            let got: BTreeSet<_> = chi(&transform(&s, &map), &s).unwrap().violations.iter().map(|v| v.kind).collect();
            assert_eq!(got, oracle_chi(&g, &map), "{g:?} {map:?}");
            checked += 1;
        }
    }
    assert!(checked > 10_000);
}

#[test]
fn chi_matches_oracle_on_random_six_node_spaces() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..40 {
        let g = random_graph(&mut rng, 6, 0.45, 2, 0.15);
        for map in injective_maps(6, 6).iter().step_by(7) {
            assert_eq!(kinds(&g, map), oracle_chi(&g, map), "{g:?} {map:?}");
        }
    }
}

#[test]
fn embeddings_match_exhaustive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sources: Vec<Graph> = (0..25).map(|i| random_graph(&mut rng, 1 + i % 4, 0.5, 2, 0.0)).collect();
    let targets: Vec<Graph> = (0..12).map(|i| random_graph(&mut rng, 3 + i % 3, 0.55, 2, 0.0)).collect();
    for s in &sources {
        let ss = s.to_space("s");
        for t in &targets {
            let found: BTreeSet<Vec<usize>> =
                find_embeddings(&ss, &t.to_space("t"), None).iter().map(|g| as_indices(&g.map, s.n)).collect();
            assert_eq!(found, oracle_embeddings(s, t), "{s:?} into {t:?}");
        }
    }
}

#[test]
fn automorphism_test_matches_oracle() {
    for g in exhaustive_corpus(4) {
        let s = g.to_space("g");
        let want: BTreeSet<Vec<usize>> = oracle_automorphisms(&g).into_iter().collect();
        let got: BTreeSet<Vec<usize>> = injective_maps(g.n, g.n)
            .into_iter()
            .filter(|p| is_automorphism(&transform(&s, p), &s).unwrap())
            .collect();
        assert_eq!(got, want, "{g:?}");
    }
}

#[test]
fn oracle_sanity() {
    let path = Graph::from_mask(3, 0b101);
    assert!(path.adj[0][1] && path.adj[1][2] && !path.adj[0][2]);
    assert!(oracle_coherent(&path, &[2, 1, 0]));
    assert!(!oracle_coherent(&path, &[1, 0, 2]));
    assert_eq!(oracle_embeddings(&Graph::from_mask(2, 1), &Graph::from_mask(3, 0b111)).len(), 6);
    assert_eq!(oracle_embeddings(&Graph::from_mask(3, 0b111), &path).len(), 0);
    assert_eq!(oracle_automorphisms(&Graph::from_mask(3, 0b111)).len(), 6);
}
