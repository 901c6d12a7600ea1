//! End-to-end embedding: proximity assembly, log transform, randomized SVD.

use std::time::{Duration, Instant};

use crate::error::Result;
use crate::factorize::{extract_embeddings, randomized_svd, EmbeddingPair, SvdParams};
use crate::graph::Graph;
use crate::proximity::{ProximityBuilder, ProximityKind, EmbedConfig};
use crate::sparse::CsrMatrix;

/// What gets factorized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Log of the sparse transpose proximity.
    TransposeProximity,
    /// Log of the forward half only; the ablation of the transpose pass.
    ForwardProximity,
    /// Plain adjacency matrix, no proximity and no log.
    AdjacencySvd,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::TransposeProximity => "transpose",
            Method::ForwardProximity => "forward",
            Method::AdjacencySvd => "adjacency",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct StageTimings {
    pub push_forward: Duration,
    pub push_transpose: Duration,
    /// Merge of the two halves plus the log transform.
    pub transform: Duration,
    pub svd: Duration,
    pub total: Duration,
}

#[derive(Debug, Clone)]
pub struct EmbedOutput {
    pub embedding: EmbeddingPair,
    pub timings: StageTimings,
    /// Non-zeros of the factorized matrix.
    pub nnz: usize,
    pub pushes: u64,
}

pub fn embed(g: &Graph, config: &EmbedConfig) -> Result<EmbedOutput> {
    embed_with(g, config, Method::TransposeProximity)
}

pub fn embed_with(g: &Graph, config: &EmbedConfig, method: Method) -> Result<EmbedOutput> {
    config.validate(g.node_count())?;
    let started = Instant::now();
    let mut timings = StageTimings::default();
    let svd_params = SvdParams::from_config(config);

    let (matrix, pushes): (CsrMatrix, u64) = match method {
        Method::TransposeProximity | Method::ForwardProximity => {
            let kind = if method == Method::TransposeProximity {
                ProximityKind::Transpose
            } else {
                ProximityKind::ForwardOnly
            };
            let (p, stats) = ProximityBuilder::new(config.alpha, config.eps)?
                .kind(kind)
                .build(g)?;
            timings.push_forward = stats.push_forward;
            timings.push_transpose = stats.push_transpose;
            let start = Instant::now();
            let p = p.log_transform()?;
            timings.transform = stats.merge + start.elapsed();
            (
                p.matrix().clone(),
                stats.pushes_forward + stats.pushes_transpose,
            )
        }
        Method::AdjacencySvd => (adjacency_matrix(g), 0),
    };

    let start = Instant::now();
    let svd = randomized_svd(&matrix, &svd_params)?;
    timings.svd = start.elapsed();
    let embedding = extract_embeddings(&svd, Some(*config));
    timings.total = started.elapsed();
    log::info!(
        "embedded n={} m={} with {}: nnz={} pushes={} total={:.2?}",
        g.node_count(),
        g.edge_count(),
        method.as_str(),
        matrix.nnz(),
        pushes,
        timings.total
    );
    Ok(EmbedOutput {
        embedding,
        timings,
        nnz: matrix.nnz(),
        pushes,
    })
}

/// 0/1 adjacency matrix, row `u` holding the out-neighbors of `u`.
pub fn adjacency_matrix(g: &Graph) -> CsrMatrix {
    let n = g.node_count();
    let mut row_ptr = Vec::with_capacity(n + 1);
    row_ptr.push(0);
    let mut cols = Vec::with_capacity(g.edge_count());
    for u in 0..n {
        cols.extend_from_slice(g.out_neighbors(u));
        row_ptr.push(cols.len());
    }
    let vals = vec![1.0; cols.len()];
    CsrMatrix::from_parts(n, n, row_ptr, cols, vals).expect("graph adjacency is valid CSR")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphKind;

    #[test]
    fn two_cycle_full_rank_scores() {
        let g = Graph::from_edges(2, &[(0, 1), (1, 0)], GraphKind::Directed).unwrap();
        let config = EmbedConfig {
            eps: 1e-4,
            dim: 2,
            ..EmbedConfig::default()
        };
        let out = embed(&g, &config).unwrap();
        let emb = &out.embedding;
        // P_01 = 2/3 up to 2 eps, and the rank-2 factorization of a 2x2 matrix is exact.
        let want = (2.0 / config.eps * (2.0 / 3.0)).ln();
        assert!((emb.score(0, 1).unwrap() - want).abs() <= 1e-3);
        assert!((emb.score(1, 0).unwrap() - want).abs() <= 1e-3);
        assert_eq!(emb.config, Some(config));
    }

    #[test]
    fn adjacency_baseline_on_cycle() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (2, 0)], GraphKind::Directed).unwrap();
        let config = EmbedConfig {
            dim: 3,
            ..EmbedConfig::default()
        };
        let out = embed_with(&g, &config, Method::AdjacencySvd).unwrap();
        let scores = out.embedding.score_matrix();
        for u in 0..3 {
            for v in 0..3 {
                let want = if g.has_edge(u, v) { 1.0 } else { 0.0 };
                assert!((scores[(u, v)] - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rejects_dim_above_n() {
        let g = Graph::from_edges(2, &[(0, 1)], GraphKind::Directed).unwrap();
        assert!(embed(&g, &EmbedConfig::default()).is_err());
    }
}
