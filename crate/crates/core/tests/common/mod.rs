#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use socialrank::features::{normalize, EdgeFeatures};
use socialrank::{GroupCatalog, Labels, SocialGraph};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Directed graph with each ordered pair present with probability `p`.
pub fn random_digraph(n: usize, p: f64, seed: u64) -> SocialGraph {
    let mut r = rng(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && r.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    SocialGraph::from_index_edges(n, &edges).unwrap()
}

/// Random digraph where a share of the pairs are reciprocal.
pub fn random_social(n: usize, p_recip: f64, p_one: f64, seed: u64) -> SocialGraph {
    let mut r = rng(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let x: f64 = r.random();
            if x < p_recip {
                edges.push((u, v));
                edges.push((v, u));
            } else if x < p_recip + p_one {
                edges.push(if r.random::<bool>() { (u, v) } else { (v, u) });
            }
        }
    }
    SocialGraph::from_index_edges(n, &edges).unwrap()
}

pub fn catalog(m: usize) -> GroupCatalog {
    GroupCatalog::new((0..m).map(|i| format!("h{i}")).collect()).unwrap()
}

/// Labels each node with probability `p_labeled` into one (sometimes two) groups.
pub fn random_labels(n: usize, m: usize, p_labeled: f64, seed: u64) -> Labels {
    let mut r = rng(seed);
    let sets = (0..n)
        .map(|_| {
            if r.random::<f64>() >= p_labeled {
                return vec![];
            }
            let mut s = vec![r.random_range(0..m)];
            if m > 1 && r.random::<f64>() < 0.15 {
                s.push(r.random_range(0..m));
            }
            s
        })
        .collect();
    Labels::new(catalog(m), sets).unwrap()
}

pub fn features(g: &SocialGraph) -> EdgeFeatures {
    let opts = socialrank::centrality::PageRankOptions::default();
    let pr = socialrank::centrality::pagerank(g, &opts).unwrap();
    let rpr = socialrank::centrality::reversed_pagerank(g, &opts).unwrap();
    let raw = socialrank::features::extract_features(g, &pr, &rpr).unwrap();
    let all: Vec<usize> = (0..raw.len()).collect();
    normalize(&raw, &all).unwrap()
}
