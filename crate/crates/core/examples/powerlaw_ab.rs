//! Degree preservation of the transpose proximity versus the forward-only ablation
//! on a synthetic power-law digraph.

use std::time::Instant;

use transprox::evaluate::reconstructed_degrees;
use transprox::pipeline::{embed_with, Method};
use transprox::synthetic::power_law_digraph;
use transprox::EmbedConfig;

fn main() -> anyhow::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args.get(1).map_or(Ok(2000), |s| s.parse())?;
    let eps: f64 = args.get(2).map_or(Ok(1e-5), |s| s.parse())?;
    let dim: usize = args.get(3).map_or(Ok(128), |s| s.parse())?;
    let g = power_law_digraph(n, 10.0, 2.2, 42)?;
    let config = EmbedConfig { eps, dim, ..EmbedConfig::default() };
    for method in [Method::TransposeProximity, Method::ForwardProximity, Method::AdjacencySvd] {
        let start = Instant::now();
        let out = embed_with(&g, &config, method)?;
        let t = &out.timings;
        let cmp = reconstructed_degrees(&g, &out.embedding)?;
        println!(
            "{:<10} nnz={:<9} pushes={:<11} push={:.2?}+{:.2?} svd={:.2?} total={:.2?} out_rho={:.4} in_rho={:.4}",
            method.as_str(),
            out.nnz,
            out.pushes,
            t.push_forward,
            t.push_transpose,
            t.svd,
            start.elapsed(),
            cmp.out_degree_spearman(),
            cmp.in_degree_spearman()
        );
    }
    Ok(())
}
