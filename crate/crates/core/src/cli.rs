//! Command-line front end.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::evaluate::{
    link_prediction_repeated, reconstructed_degrees, reconstruction_precision, write_histogram_tsv,
    write_metrics_tsv,
};
use crate::factorize::EmbeddingPair;
use crate::graph::{load_edge_list, GraphKind, LoadedGraph};
use crate::pipeline::{embed_with, Method};
use crate::ppr::{backward_push, exact_ppr_row, PprParams};
use crate::proximity::{ProximityBuilder, ProximityKind, EmbedConfig};

#[derive(Debug, Parser)]
#[command(name = "transprox", version, about = "Graph embeddings from sparse transpose proximities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute content/context embeddings for a graph.
    Embed(EmbedArgs),
    /// Evaluate embeddings.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Backward-push PPR values towards one target node.
    Ppr(PprArgs),
    /// Dump the sparse proximity matrix as `u v value` triples.
    Proximity(ProximityArgs),
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// Precision of the top-m reconstructed pairs.
    Reconstruct(EmbeddingEvalArgs),
    /// Link-prediction precision on random edge holdouts.
    Linkpred(LinkpredArgs),
    /// Original and reconstructed degree distributions.
    Degdist(EmbeddingEvalArgs),
}

#[derive(Debug, Args)]
#[group(id = "kind", required = true, multiple = false)]
pub struct KindArgs {
    /// Treat every line as a directed arc.
    #[arg(long, group = "kind")]
    pub directed: bool,
    /// Treat every line as an undirected edge.
    #[arg(long, group = "kind")]
    pub undirected: bool,
}

impl KindArgs {
    fn kind(&self) -> GraphKind {
        if self.undirected {
            GraphKind::Undirected
        } else {
            GraphKind::Directed
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Transpose,
    Forward,
    Adjacency,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Transpose => Method::TransposeProximity,
            MethodArg::Forward => Method::ForwardProximity,
            MethodArg::Adjacency => Method::AdjacencySvd,
        }
    }
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Stopping probability of the random walk.
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Error parameter of the sparse proximity.
    #[arg(long, default_value_t = 1e-5)]
    pub eps: f64,
    /// Embedding dimension.
    #[arg(long, default_value_t = 128)]
    pub dim: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub oversample: usize,
    #[arg(long, default_value_t = 10)]
    pub power_iters: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::Transpose)]
    pub method: MethodArg,
    /// Worker threads; 0 uses every available core.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

impl ConfigArgs {
    fn config(&self) -> EmbedConfig {
        EmbedConfig {
            alpha: self.alpha,
            eps: self.eps,
            dim: self.dim,
            seed: self.seed,
            svd_oversample: self.oversample,
            svd_power_iters: self.power_iters,
        }
    }
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub kind: KindArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Embedding file; a `.manifest` sidecar is written next to it.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct EmbeddingEvalArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub kind: KindArgs,
    #[arg(long)]
    pub embedding: PathBuf,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct LinkpredArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub kind: KindArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Fraction of edges kept for training.
    #[arg(long, default_value_t = 0.5)]
    pub ratio: f64,
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct PprArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub kind: KindArgs,
    /// Target node, as it appears in the input file.
    #[arg(long)]
    pub target: u64,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub rmax: f64,
    /// Also print power-series values and the largest deviation.
    #[arg(long)]
    pub oracle: bool,
}

#[derive(Debug, Args)]
pub struct ProximityArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub kind: KindArgs,
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1e-5)]
    pub eps: f64,
    /// Apply the entry-wise logarithm before writing.
    #[arg(long)]
    pub log: bool,
    #[arg(long, value_enum, default_value_t = MethodArg::Transpose)]
    pub method: MethodArg,
    #[arg(long)]
    pub output: PathBuf,
}

/// Key-value record of one `embed` run, written next to the embedding file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub entries: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn sidecar_path(embedding: &Path) -> PathBuf {
        let mut s = embedding.as_os_str().to_owned();
        s.push(".manifest");
        PathBuf::from(s)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    pub fn parse(text: &str) -> RunManifest {
        let entries = text
            .lines()
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
            .collect();
        RunManifest { entries }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// The configuration recorded by `embed`, if every field is present.
    pub fn config(&self) -> Option<EmbedConfig> {
        Some(EmbedConfig {
            alpha: self.get("alpha")?.parse().ok()?,
            eps: self.get("eps")?.parse().ok()?,
            dim: self.get("dim")?.parse().ok()?,
            seed: self.get("seed")?.parse().ok()?,
            svd_oversample: self.get("svd_oversample")?.parse().ok()?,
            svd_power_iters: self.get("svd_power_iters")?.parse().ok()?,
        })
    }
}

/// Parses `args` (program name first) and runs the command. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match execute(cli, &mut out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    Ok(pool.install(f))
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> anyhow::Result<()> {
    match cli.command {
        Command::Embed(args) => cmd_embed(args),
        Command::Eval(EvalCommand::Reconstruct(args)) => cmd_reconstruct(args, out),
        Command::Eval(EvalCommand::Linkpred(args)) => cmd_linkpred(args, out),
        Command::Eval(EvalCommand::Degdist(args)) => cmd_degdist(args, out),
        Command::Ppr(args) => cmd_ppr(args, out),
        Command::Proximity(args) => cmd_proximity(args),
    }
}

fn cmd_embed(args: EmbedArgs) -> anyhow::Result<()> {
    let started = std::time::Instant::now();
    let kind = args.kind.kind();
    let loaded = load_edge_list(&args.input, kind)?;
    let config = args.config.config();
    let method: Method = args.config.method.into();
    let result = with_threads(args.config.threads, || {
        embed_with(&loaded.graph, &config, method)
    })??;
    result.embedding.write_file(&loaded.ids, &args.output)?;

    let t = &result.timings;
    let mut entries = BTreeMap::new();
    let mut put = |k: &str, v: String| {
        entries.insert(k.to_string(), v);
    };
    put("alpha", config.alpha.to_string());
    put("eps", config.eps.to_string());
    put("dim", config.dim.to_string());
    put("seed", config.seed.to_string());
    put("svd_oversample", config.svd_oversample.to_string());
    put("svd_power_iters", config.svd_power_iters.to_string());
    put("method", method.as_str().to_string());
    put("input", args.input.display().to_string());
    put("kind", kind.as_str().to_string());
    put("n", loaded.graph.node_count().to_string());
    put("m", loaded.graph.edge_count().to_string());
    put("nnz", result.nnz.to_string());
    put("pushes", result.pushes.to_string());
    put("time_push_forward_s", t.push_forward.as_secs_f64().to_string());
    put("time_push_transpose_s", t.push_transpose.as_secs_f64().to_string());
    put("time_transform_s", t.transform.as_secs_f64().to_string());
    put("time_svd_s", t.svd.as_secs_f64().to_string());
    put("time_pipeline_s", t.total.as_secs_f64().to_string());
    put("time_wall_s", started.elapsed().as_secs_f64().to_string());
    put("output", args.output.display().to_string());
    let manifest = RunManifest { entries };
    let path = RunManifest::sidecar_path(&args.output);
    std::fs::write(&path, manifest.render()).map_err(|e| Error::io(&path, e))?;
    Ok(())
}

fn load_embedding_for(graph: &LoadedGraph, path: &Path) -> Result<(EmbeddingPair, String)> {
    let (emb, ids) = EmbeddingPair::read_file(path)?;
    if ids != graph.ids {
        return Err(Error::ShapeMismatch(format!(
            "embedding {} covers {} nodes, graph has {} (or node ids differ)",
            path.display(),
            ids.len(),
            graph.ids.len()
        )));
    }
    let manifest = std::fs::read_to_string(RunManifest::sidecar_path(path))
        .ok()
        .map(|t| RunManifest::parse(&t));
    let fingerprint = match manifest.as_ref().and_then(RunManifest::config) {
        Some(c) => c.fingerprint(),
        None => format!("d{}", emb.dim()),
    };
    Ok((emb, fingerprint))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn cmd_reconstruct(args: EmbeddingEvalArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let loaded = load_edge_list(&args.input, args.kind.kind())?;
    let (emb, fp) = load_embedding_for(&loaded, &args.embedding)?;
    let precision = with_threads(args.threads, || reconstruction_precision(&loaded.graph, &emb))??;
    ensure_dir(&args.out_dir)?;
    write_metrics_tsv(
        &args.out_dir.join(format!("reconstruct_{fp}.tsv")),
        &[
            ("reconstruction_precision".into(), precision),
            ("n".into(), loaded.graph.node_count() as f64),
            ("m".into(), loaded.graph.edge_count() as f64),
        ],
    )?;
    writeln!(out, "reconstruction_precision\t{precision:?}")?;
    Ok(())
}

fn cmd_linkpred(args: LinkpredArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let loaded = load_edge_list(&args.input, args.kind.kind())?;
    let config = args.config.config();
    let method: Method = args.config.method.into();
    let summary = with_threads(args.config.threads, || {
        link_prediction_repeated(
            &loaded.graph,
            &config,
            method,
            args.ratio,
            config.seed,
            args.repeats,
        )
    })??;
    ensure_dir(&args.out_dir)?;
    let mut rows: Vec<(String, f64)> = summary
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| (format!("precision_seed{}", config.seed + i as u64), v))
        .collect();
    rows.push(("link_prediction_precision".into(), summary.mean));
    rows.push(("link_prediction_stddev".into(), summary.stddev));
    write_metrics_tsv(
        &args
            .out_dir
            .join(format!("linkpred_{}_{}.tsv", method.as_str(), config.fingerprint())),
        &rows,
    )?;
    writeln!(out, "link_prediction_precision\t{:?}", summary.mean)?;
    writeln!(out, "link_prediction_stddev\t{:?}", summary.stddev)?;
    Ok(())
}

fn cmd_degdist(args: EmbeddingEvalArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let loaded = load_edge_list(&args.input, args.kind.kind())?;
    let (emb, fp) = load_embedding_for(&loaded, &args.embedding)?;
    let cmp = with_threads(args.threads, || reconstructed_degrees(&loaded.graph, &emb))??;
    let hist = cmp.histograms();
    ensure_dir(&args.out_dir)?;
    for (name, h) in [
        ("original_in", &hist.original_in),
        ("original_out", &hist.original_out),
        ("reconstructed_in", &hist.reconstructed_in),
        ("reconstructed_out", &hist.reconstructed_out),
    ] {
        write_histogram_tsv(&args.out_dir.join(format!("degree_{name}_{fp}.tsv")), h)?;
    }
    writeln!(out, "out_degree_spearman\t{:?}", cmp.out_degree_spearman())?;
    writeln!(out, "in_degree_spearman\t{:?}", cmp.in_degree_spearman())?;
    Ok(())
}

fn cmd_ppr(args: PprArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let loaded = load_edge_list(&args.input, args.kind.kind())?;
    let g = &loaded.graph;
    let target = loaded.dense_id(args.target).ok_or(Error::NodeOutOfRange {
        node: args.target as usize,
        n: g.node_count(),
    })?;
    let res = backward_push(g, target, PprParams::new(args.alpha, args.rmax)?)?;
    if !args.oracle {
        for &(u, pi) in &res.reserves {
            writeln!(out, "{} {pi:?}", loaded.ids[u as usize])?;
        }
        return Ok(());
    }
    let exact: Vec<f64> = (0..g.node_count())
        .map(|u| exact_ppr_row(g, u, args.alpha, 1e-12)[target])
        .collect();
    for &(u, pi) in &res.reserves {
        writeln!(out, "{} {pi:?} {:?}", loaded.ids[u as usize], exact[u as usize])?;
    }
    let deviation = (0..g.node_count())
        .map(|u| (exact[u] - res.reserve(u)).abs())
        .fold(0.0, f64::max);
    writeln!(out, "max_deviation\t{deviation:?}")?;
    Ok(())
}

fn cmd_proximity(args: ProximityArgs) -> anyhow::Result<()> {
    let loaded = load_edge_list(&args.input, args.kind.kind())?;
    let kind = match args.method {
        MethodArg::Transpose => ProximityKind::Transpose,
        MethodArg::Forward => ProximityKind::ForwardOnly,
        MethodArg::Adjacency => anyhow::bail!("the adjacency method has no proximity matrix"),
    };
    let (mut p, _) = ProximityBuilder::new(args.alpha, args.eps)?
        .kind(kind)
        .build(&loaded.graph)?;
    if args.log {
        p = p.log_transform()?;
    }
    let file = std::fs::File::create(&args.output).map_err(|e| Error::io(&args.output, e))?;
    p.write_triples(file).map_err(|e| Error::io(&args.output, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trip() {
        let c = EmbedConfig {
            alpha: 0.3,
            eps: 1e-4,
            dim: 16,
            seed: 4,
            svd_oversample: 5,
            svd_power_iters: 2,
        };
        let mut entries = BTreeMap::new();
        entries.insert("alpha".into(), c.alpha.to_string());
        entries.insert("eps".into(), c.eps.to_string());
        entries.insert("dim".into(), c.dim.to_string());
        entries.insert("seed".into(), c.seed.to_string());
        entries.insert("svd_oversample".into(), c.svd_oversample.to_string());
        entries.insert("svd_power_iters".into(), c.svd_power_iters.to_string());
        let m = RunManifest { entries };
        let back = RunManifest::parse(&m.render());
        assert_eq!(back, m);
        assert_eq!(back.config(), Some(c));
    }

    #[test]
    fn kind_flags_are_exclusive_and_required() {
        assert!(Cli::try_parse_from(["t", "ppr", "--input", "x", "--target", "0"]).is_err());
        assert!(Cli::try_parse_from([
            "t", "ppr", "--input", "x", "--target", "0", "--directed", "--undirected"
        ])
        .is_err());
        assert!(Cli::try_parse_from(["t", "ppr", "--input", "x", "--target", "0", "--directed"]).is_ok());
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(
            RunManifest::sidecar_path(Path::new("out/emb.txt")),
            PathBuf::from("out/emb.txt.manifest")
        );
    }
}
