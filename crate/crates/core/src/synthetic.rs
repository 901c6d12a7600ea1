//! Random graph generators for tests, benchmarks and parameter studies.

use std::collections::HashSet;

use rand::{RngExt, SeedableRng};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphKind};

/// G(n, p): every ordered pair (unordered when undirected) is an edge with probability `p`.
pub fn gnp(n: usize, p: f64, kind: GraphKind, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n as u32 {
        let start = match kind {
            GraphKind::Directed => 0,
            GraphKind::Undirected => u + 1,
        };
        for v in start..n as u32 {
            if u != v && rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges, kind).expect("generated ids are in range")
}

/// G(n, m): `m` distinct edges drawn uniformly.
pub fn gnm(n: usize, m: usize, kind: GraphKind, seed: u64) -> Result<Graph> {
    let pairs = match kind {
        GraphKind::Directed => n * n.saturating_sub(1),
        GraphKind::Undirected => n * n.saturating_sub(1) / 2,
    };
    if m > pairs {
        return Err(Error::invalid(format!("{m} edges do not fit in {n} nodes")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::with_capacity(m);
    let mut edges = Vec::with_capacity(m);
    while edges.len() < m {
        let a = rng.random_range(0..n as u32);
        let b = rng.random_range(0..n as u32);
        if a == b {
            continue;
        }
        let e = match kind {
            GraphKind::Directed => (a, b),
            GraphKind::Undirected => (a.min(b), a.max(b)),
        };
        if seen.insert(e) {
            edges.push(e);
        }
    }
    Graph::from_edges(n, &edges, kind)
}

fn cumulative(weights: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    weights
        .iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect()
}

fn draw(cdf: &[f64], rng: &mut ChaCha8Rng) -> u32 {
    let x = rng.random::<f64>() * cdf[cdf.len() - 1];
    cdf.partition_point(|&c| c <= x).min(cdf.len() - 1) as u32
}

/// Directed Chung–Lu graph with power-law in- and out-degrees.
///
/// Node weights follow `rank^(-1 / (exponent - 1))`, which gives degree tails
/// `P(k) ~ k^-exponent`. Out- and in-weights are assigned by independent
/// random permutations, so a node's out-degree says little about its in-degree.
/// Arcs are drawn until `avg_degree · n` distinct non-loop arcs exist.
pub fn power_law_digraph(n: usize, avg_degree: f64, exponent: f64, seed: u64) -> Result<Graph> {
    if n < 2 || exponent <= 1.0 || avg_degree <= 0.0 {
        return Err(Error::invalid("need n >= 2, exponent > 1 and positive average degree"));
    }
    let m = (avg_degree * n as f64).round() as usize;
    if m > n * (n - 1) / 2 {
        return Err(Error::invalid("average degree too high for a sparse generator"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base: Vec<f64> = (0..n)
        .map(|i| ((i + 1) as f64).powf(-1.0 / (exponent - 1.0)))
        .collect();
    let mut out_perm: Vec<usize> = (0..n).collect();
    let mut in_perm: Vec<usize> = (0..n).collect();
    out_perm.shuffle(&mut rng);
    in_perm.shuffle(&mut rng);
    let out_w: Vec<f64> = out_perm.iter().map(|&i| base[i]).collect();
    let in_w: Vec<f64> = in_perm.iter().map(|&i| base[i]).collect();
    let (out_cdf, in_cdf) = (cumulative(&out_w), cumulative(&in_w));

    let mut seen = HashSet::with_capacity(m);
    let mut edges = Vec::with_capacity(m);
    let max_draws = 1000 * m;
    let mut draws = 0;
    while edges.len() < m {
        if draws == max_draws {
            return Err(Error::invalid("power-law generator failed to place enough arcs"));
        }
        draws += 1;
        let u = draw(&out_cdf, &mut rng);
        let v = draw(&in_cdf, &mut rng);
        if u != v && seen.insert((u, v)) {
            edges.push((u, v));
        }
    }
    Graph::from_edges(n, &edges, GraphKind::Directed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Direction;

    #[test]
    fn gnm_has_exact_edge_count() {
        let g = gnm(100, 500, GraphKind::Directed, 1).unwrap();
        assert_eq!(g.edge_count(), 500);
        let u = gnm(20, 30, GraphKind::Undirected, 1).unwrap();
        assert_eq!(u.edge_count(), 60);
        assert!(gnm(3, 7, GraphKind::Directed, 1).is_err());
    }

    #[test]
    fn gnp_is_deterministic() {
        assert_eq!(
            gnp(50, 0.1, GraphKind::Directed, 9),
            gnp(50, 0.1, GraphKind::Directed, 9)
        );
    }

    #[test]
    fn power_law_is_skewed() {
        let g = power_law_digraph(2000, 10.0, 2.2, 5).unwrap();
        assert_eq!(g.edge_count(), 20_000);
        let out = g.degrees(Direction::Out);
        let max = *out.iter().max().unwrap();
        assert!(max > 300, "max out-degree {max}");
        g.check_consistency().unwrap();
    }
}
