//! Node embeddings from sparse transpose proximities.
//!
//! The pipeline runs a backward push towards every node on the graph and on
//! its transpose, keeps the reserves above `eps / 2` as a sparse proximity
//! matrix `P[u][v] = π(u, v) + πᵀ(v, u)`, takes `ln((2 / eps) · P)` entry-wise
//! and factorizes the result with a randomized truncated SVD. The content and
//! context vectors are `U √Σ` and `V √Σ`.
//!
//! ```no_run
//! use transprox::{embed, load_edge_list, GraphKind, EmbedConfig};
//!
//! let loaded = load_edge_list("graph.txt", GraphKind::Directed)?;
//! let out = embed(&loaded.graph, &EmbedConfig { dim: 64, ..EmbedConfig::default() })?;
//! out.embedding.write_file(&loaded.ids, "graph.emb")?;
//! # Ok::<(), transprox::Error>(())
//! ```

pub mod cli;
pub mod error;
pub mod evaluate;
pub mod factorize;
pub mod graph;
pub mod pipeline;
pub mod ppr;
pub mod proximity;
pub mod sparse;
pub mod synthetic;

pub use error::{Error, Result};
pub use evaluate::{
    link_prediction_precision, make_link_split, reconstruction_precision, top_m_pairs, LinkSplit,
    ScoredPair,
};
pub use factorize::{extract_embeddings, randomized_svd, EmbeddingPair, SvdParams, SvdResult};
pub use graph::{degree_histogram, load_edge_list, Direction, Graph, GraphKind, LoadedGraph};
pub use pipeline::{embed, embed_with, EmbedOutput, Method, StageTimings};
pub use ppr::{backward_push, exact_ppr_row, global_pagerank, PprParams, PushResult};
pub use proximity::{
    build_transpose_proximity, ProximityBuilder, ProximityKind, SparseProximityMatrix, EmbedConfig,
};
pub use sparse::CsrMatrix;
