mod common;

use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use transprox::evaluate::{
    precision_at_positives, rank_order, reconstructed_degree_histograms, reconstructed_degrees,
    Summary,
};
use transprox::pipeline::{adjacency_matrix, embed_with, Method};
use transprox::synthetic::{gnm, gnp, power_law_digraph};
use transprox::{
    extract_embeddings, link_prediction_precision, make_link_split, randomized_svd, reconstruction_precision, top_m_pairs,
    EmbeddingPair, Graph, GraphKind, ScoredPair, EmbedConfig, SvdParams,
};

fn random_embedding(n: usize, dim: usize, seed: u64) -> EmbeddingPair {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |k| (0..k).map(|_| rng.sample::<f64, _>(StandardNormal)).collect::<Vec<_>>();
    let s = draw(n * dim);
    let t = draw(n * dim);
    EmbeddingPair::from_rows(n, dim, s, t, None).unwrap()
}

fn exact_factor(g: &Graph) -> EmbeddingPair {
    let n = g.node_count();
    let params = SvdParams { dim: n, oversample: 0, power_iters: 2, seed: 0 };
    extract_embeddings(&randomized_svd(&adjacency_matrix(g), &params).unwrap(), None)
}

fn brute_force(emb: &EmbeddingPair, m: usize) -> Vec<ScoredPair> {
    let n = emb.node_count();
    let mut all = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v {
                all.push(ScoredPair { u: u as u32, v: v as u32, score: emb.score(u, v).unwrap() });
            }
        }
    }
    all.sort_by(rank_order);
    all.truncate(m);
    all
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn top_pairs_match_exhaustive_ranking(n in 2usize..60, dim in 1usize..6, seed in 0u64..10_000, frac in 0.0f64..1.0, quantize in any::<bool>()) {
        let mut emb = random_embedding(n, dim, seed);
        if quantize {
            // Coarse values force many exact ties.
            let s: Vec<f64> = (0..n).flat_map(|u| emb.source_row(u).to_vec()).map(f64::round).collect();
            let t: Vec<f64> = (0..n).flat_map(|u| emb.target_row(u).to_vec()).map(f64::round).collect();
            emb = EmbeddingPair::from_rows(n, dim, s, t, None).unwrap();
        }
        let m = ((n * (n - 1)) as f64 * frac) as usize;
        prop_assert_eq!(top_m_pairs(&emb, m).unwrap(), brute_force(&emb, m));
    }

    #[test]
    fn splits_satisfy_invariants(seed in 0u64..10_000, undirected in any::<bool>(), ratio in 0.1f64..0.9) {
        let kind = if undirected { GraphKind::Undirected } else { GraphKind::Directed };
        let g = gnp(60, 0.08, kind, seed);
        let split = make_link_split(&g, ratio, seed).unwrap();
        split.check(&g).unwrap();
        prop_assert_eq!(split.train_edges.len() + split.test_pos.len(), g.edges().len());
        prop_assert_eq!(split.test_neg.len(), split.test_pos.len());
    }
}

#[test]
fn identity_rows_tie_break() {
    let emb = EmbeddingPair::from_rows(3, 3, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0], None).unwrap();
    let top: Vec<_> = top_m_pairs(&emb, 2).unwrap().iter().map(|p| (p.u, p.v)).collect();
    assert_eq!(top, vec![(0, 1), (0, 2)]);
}

#[test]
fn exact_factor_recovers_every_arc() {
    for seed in 0..5 {
        let g = common::random_digraph(900 + seed);
        let emb = exact_factor(&g);
        assert_eq!(reconstruction_precision(&g, &emb).unwrap(), 1.0);
        let cmp = reconstructed_degrees(&g, &emb).unwrap();
        assert_eq!(cmp.original_out, cmp.reconstructed_out);
        assert_eq!(cmp.original_in, cmp.reconstructed_in);
        let h = reconstructed_degree_histograms(&g, &emb).unwrap();
        assert_eq!(h.original_out, h.reconstructed_out);
        assert_eq!(h.original_in, h.reconstructed_in);
    }
}

#[test]
fn random_embeddings_score_at_edge_density() {
    let g = gnm(100, 500, GraphKind::Directed, 3).unwrap();
    let values: Vec<f64> = (0..20)
        .map(|seed| reconstruction_precision(&g, &random_embedding(100, 16, seed)).unwrap())
        .collect();
    let s = Summary::of(values);
    let expected = 500.0 / (100.0 * 99.0);
    let half_width = 3.0 * s.stddev / (20f64).sqrt();
    eprintln!("null model precision {:.4} +- {:.4}, expected {expected:.4}", s.mean, s.stddev);
    assert!((s.mean - expected).abs() <= half_width, "{} vs {expected}", s.mean);
}

#[test]
fn null_model_degrees_near_average() {
    let g = gnm(100, 500, GraphKind::Directed, 4).unwrap();
    let cmp = reconstructed_degrees(&g, &random_embedding(100, 16, 9)).unwrap();
    let mean = cmp.reconstructed_out.iter().sum::<usize>() as f64 / 100.0;
    let max = *cmp.reconstructed_out.iter().max().unwrap();
    eprintln!("null model reconstructed out-degree mean {mean}, max {max}");
}

#[test]
fn separated_scores_give_full_precision() {
    let pos: Vec<f64> = (0..50).map(|i| 10.0 + i as f64).collect();
    let neg: Vec<f64> = (0..50).map(|i| -(i as f64)).collect();
    assert_eq!(precision_at_positives(&pos, &neg, 0), 1.0);
}

#[test]
fn tied_scores_give_half_precision() {
    let pos = vec![0.0; 250];
    let neg = vec![0.0; 250];
    let mut sum = 0.0;
    for seed in 0..200 {
        let p = precision_at_positives(&pos, &neg, seed);
        assert!((0.4..=0.6).contains(&p), "seed {seed}: {p}");
        sum += p;
    }
    assert!((sum / 200.0 - 0.5).abs() < 0.02);
}

#[test]
fn split_sizes_and_determinism() {
    let g = gnm(100, 500, GraphKind::Directed, 1).unwrap();
    let a = make_link_split(&g, 0.5, 17).unwrap();
    assert_eq!((a.test_pos.len(), a.test_neg.len()), (250, 250));
    a.check(&g).unwrap();
    let b = make_link_split(&g, 0.5, 17).unwrap();
    assert_eq!(a.train_edges, b.train_edges);
    assert_eq!(a.test_pos, b.test_pos);
    assert_eq!(a.test_neg, b.test_neg);
}

#[test]
fn undirected_edges_move_whole() {
    let g = gnp(50, 0.1, GraphKind::Undirected, 2);
    let split = make_link_split(&g, 0.5, 5).unwrap();
    let train = split.train_graph().unwrap();
    for &(u, v) in &split.test_pos {
        assert!(!train.has_edge(u as usize, v as usize) && !train.has_edge(v as usize, u as usize));
    }
}

#[test]
fn triangle_has_no_negatives() {
    let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)], GraphKind::Undirected).unwrap();
    assert!(make_link_split(&g, 2.0 / 3.0, 0).is_err());
}

#[test]
fn transpose_pass_preserves_out_degrees_better() {
    let config = EmbedConfig::default();
    for seed in [42, 7] {
        let g = power_law_digraph(2000, 10.0, 2.2, seed).unwrap();
        let rho = |method| {
            let out = embed_with(&g, &config, method).unwrap();
            reconstructed_degrees(&g, &out.embedding).unwrap().out_degree_spearman()
        };
        let (both, forward) = (rho(Method::TransposeProximity), rho(Method::ForwardProximity));
        eprintln!("seed {seed}: transpose rho {both:.4}, forward-only rho {forward:.4}");
        assert!(both >= forward);
    }
}

#[test]
fn link_prediction_beats_chance_on_sparse_graph() {
    let g = power_law_digraph(500, 8.0, 2.2, 3).unwrap();
    let config = EmbedConfig { dim: 32, eps: 1e-4, ..EmbedConfig::default() };
    let p = link_prediction_precision(&g, &config, 0.5, 1).unwrap();
    eprintln!("link prediction precision {p:.4}");
    assert!(p > 0.6);
}
