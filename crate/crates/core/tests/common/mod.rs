#![allow(dead_code)]

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use transprox::synthetic::gnp;
use transprox::{Graph, GraphKind};

/// Directed G(n, p) with n in [20, 200] and p in [0.02, 0.1], derived from `seed`.
pub fn random_digraph(seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let n = rng.random_range(20..=200);
    let p = rng.random_range(0.02..=0.1);
    gnp(n, p, GraphKind::Directed, seed)
}

pub fn random_undirected(seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x51ed_2701);
    let n = rng.random_range(20..=150);
    let p = rng.random_range(0.02..=0.1);
    gnp(n, p, GraphKind::Undirected, seed)
}

pub fn star(k: u32) -> Graph {
    let edges: Vec<_> = (1..=k).map(|l| (0, l)).collect();
    Graph::from_edges(k as usize + 1, &edges, GraphKind::Directed).unwrap()
}
