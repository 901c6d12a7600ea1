//! Evaluation protocols: graph reconstruction, link prediction and
//! degree-distribution comparison of reconstructed graphs.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashSet};
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::factorize::EmbeddingPair;
use crate::graph::{degree_histogram, Direction, Graph, GraphKind};
use crate::pipeline::{embed_with, Method};
use crate::proximity::EmbedConfig;

/// Rows scored together when searching for the top pairs.
pub const BLOCK_ROWS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredPair {
    pub u: u32,
    pub v: u32,
    pub score: f64,
}

/// Ranking order: higher score first, then smaller `u`, then smaller `v`.
pub fn rank_order(a: &ScoredPair, b: &ScoredPair) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.u.cmp(&b.u))
        .then(a.v.cmp(&b.v))
}

/// Heap entry whose maximum is the worst-ranked pair.
struct Ranked(ScoredPair);

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        rank_order(&self.0, &other.0) == Ordering::Equal
    }
}
impl Eq for Ranked {}
impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        rank_order(&self.0, &other.0)
    }
}

fn block_top(emb: &EmbeddingPair, rows: std::ops::Range<usize>, m: usize) -> Vec<ScoredPair> {
    let n = emb.node_count();
    let mut heap: BinaryHeap<Ranked> = BinaryHeap::with_capacity(m + 1);
    for u in rows {
        let s = emb.source_row(u);
        for v in 0..n {
            if u == v {
                continue;
            }
            let cand = ScoredPair {
                u: u as u32,
                v: v as u32,
                score: crate::factorize::dot(s, emb.target_row(v)),
            };
            if heap.len() < m {
                heap.push(Ranked(cand));
            } else if let Some(worst) = heap.peek() {
                if rank_order(&cand, &worst.0) == Ordering::Less {
                    heap.pop();
                    heap.push(Ranked(cand));
                }
            }
        }
    }
    heap.into_sorted_vec().into_iter().map(|r| r.0).collect()
}

fn merge_top(a: Vec<ScoredPair>, b: Vec<ScoredPair>, m: usize) -> Vec<ScoredPair> {
    let mut out = Vec::with_capacity(m.min(a.len() + b.len()));
    let (mut i, mut j) = (0, 0);
    while out.len() < m && (i < a.len() || j < b.len()) {
        let take_a = j == b.len() || (i < a.len() && rank_order(&a[i], &b[j]) != Ordering::Greater);
        if take_a {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out
}

/// The `m` best ordered pairs `(u, v)`, `u != v`, in ranking order.
///
/// Rows are scored in blocks of [`BLOCK_ROWS`], each keeping a bounded heap,
/// so the `n²` scores are never materialized. The ranking order is total, so
/// the result does not depend on how blocks are scheduled.
pub fn top_m_pairs(emb: &EmbeddingPair, m: usize) -> Result<Vec<ScoredPair>> {
    let n = emb.node_count();
    let available = n.saturating_mul(n.saturating_sub(1));
    if m > available {
        return Err(Error::invalid(format!(
            "requested {m} pairs but only {available} ordered pairs exist"
        )));
    }
    if m == 0 {
        return Ok(Vec::new());
    }
    let blocks: Vec<_> = (0..n).step_by(BLOCK_ROWS).collect();
    Ok(blocks
        .into_par_iter()
        .map(|start| block_top(emb, start..(start + BLOCK_ROWS).min(n), m))
        .reduce(Vec::new, |a, b| merge_top(a, b, m)))
}

fn check_shape(g: &Graph, emb: &EmbeddingPair) -> Result<()> {
    if g.node_count() != emb.node_count() {
        return Err(Error::ShapeMismatch(format!(
            "graph has {} nodes but the embedding has {}",
            g.node_count(),
            emb.node_count()
        )));
    }
    Ok(())
}

/// Fraction of true arcs among the top-`m` pairs, `m` being the arc count of `g`.
pub fn reconstruction_precision(g: &Graph, emb: &EmbeddingPair) -> Result<f64> {
    check_shape(g, emb)?;
    let m = g.edge_count();
    if m == 0 {
        return Err(Error::invalid("graph has no edges to reconstruct"));
    }
    let top = top_m_pairs(emb, m)?;
    let hits = top
        .iter()
        .filter(|p| g.has_edge(p.u as usize, p.v as usize))
        .count();
    Ok(hits as f64 / m as f64)
}

/// Graph made of the top-`m` pairs.
pub fn reconstructed_graph(g: &Graph, emb: &EmbeddingPair) -> Result<Graph> {
    check_shape(g, emb)?;
    let top = top_m_pairs(emb, g.edge_count())?;
    let arcs: Vec<(u32, u32)> = top.iter().map(|p| (p.u, p.v)).collect();
    Graph::from_edges(g.node_count(), &arcs, GraphKind::Directed)
}

/// Train/test partition for link prediction.
///
/// For undirected graphs every list holds edges once as `(u, v)` with `u < v`,
/// and a hidden edge hides both of its arcs.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSplit {
    pub n: usize,
    pub kind: GraphKind,
    pub train_edges: Vec<(u32, u32)>,
    pub test_pos: Vec<(u32, u32)>,
    pub test_neg: Vec<(u32, u32)>,
    /// Fraction of edges kept for training.
    pub ratio: f64,
    pub seed: u64,
}

impl LinkSplit {
    pub fn train_graph(&self) -> Result<Graph> {
        Graph::from_edges(self.n, &self.train_edges, self.kind)
    }

    /// Full-scan check of the partition against the original graph.
    pub fn check(&self, g: &Graph) -> Result<()> {
        let fail = |m: String| Err(Error::Consistency(m));
        let edges: HashSet<(u32, u32)> = g.edges().into_iter().collect();
        let train: HashSet<_> = self.train_edges.iter().copied().collect();
        let pos: HashSet<_> = self.test_pos.iter().copied().collect();
        let neg: HashSet<_> = self.test_neg.iter().copied().collect();
        if train.len() != self.train_edges.len() || pos.len() != self.test_pos.len() || neg.len() != self.test_neg.len() {
            return fail("duplicate entries in split".into());
        }
        if !train.is_disjoint(&pos) {
            return fail("train and test positives overlap".into());
        }
        if train.union(&pos).copied().collect::<HashSet<_>>() != edges {
            return fail("train and test positives do not cover the edge set".into());
        }
        if self.test_neg.len() != self.test_pos.len() {
            return fail("unbalanced negatives".into());
        }
        for &(u, v) in &self.test_neg {
            if u == v || g.has_edge(u as usize, v as usize) {
                return fail(format!("negative ({u}, {v}) is a self-loop or an edge"));
            }
            if self.kind == GraphKind::Undirected && u > v {
                return fail(format!("undirected negative ({u}, {v}) is not normalized"));
            }
        }
        Ok(())
    }
}

pub fn make_link_split(g: &Graph, ratio: f64, seed: u64) -> Result<LinkSplit> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::invalid(format!("training ratio must lie in (0, 1), got {ratio}")));
    }
    let n = g.node_count();
    let kind = g.kind();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = g.edges();
    edges.shuffle(&mut rng);
    let n_train = ((edges.len() as f64) * ratio).round() as usize;
    let test_pos = edges.split_off(n_train);
    let train_edges = edges;

    let needed = test_pos.len();
    let pairs = match kind {
        GraphKind::Directed => n * n.saturating_sub(1),
        GraphKind::Undirected => n * n.saturating_sub(1) / 2,
    };
    let free = pairs - g.edges().len();
    if free < needed {
        return Err(Error::NegativeSampling {
            needed,
            reason: format!("only {free} non-adjacent pairs exist"),
        });
    }
    let max_attempts = 100 * needed + 10_000;
    let mut chosen: HashSet<(u32, u32)> = HashSet::with_capacity(needed);
    let mut test_neg = Vec::with_capacity(needed);
    let mut attempts = 0;
    while test_neg.len() < needed {
        if attempts == max_attempts {
            return Err(Error::NegativeSampling {
                needed,
                reason: format!("gave up after {max_attempts} draws"),
            });
        }
        attempts += 1;
        let a = rng.random_range(0..n as u32);
        let b = rng.random_range(0..n as u32);
        if a == b {
            continue;
        }
        let pair = match kind {
            GraphKind::Directed => (a, b),
            GraphKind::Undirected => (a.min(b), a.max(b)),
        };
        if g.has_edge(pair.0 as usize, pair.1 as usize) || !chosen.insert(pair) {
            continue;
        }
        test_neg.push(pair);
    }
    Ok(LinkSplit {
        n,
        kind,
        train_edges,
        test_pos,
        test_neg,
        ratio,
        seed,
    })
}

/// Share of positives among the `|pos|` best-scored candidates of `pos ∪ neg`.
///
/// Candidates are shuffled with `seed` before a stable sort by score, so tied
/// scores are ordered at random.
pub fn precision_at_positives(pos: &[f64], neg: &[f64], seed: u64) -> f64 {
    if pos.is_empty() {
        return 0.0;
    }
    let mut cands: Vec<(f64, bool)> = pos
        .iter()
        .map(|&s| (s, true))
        .chain(neg.iter().map(|&s| (s, false)))
        .collect();
    cands.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    cands.sort_by(|a, b| b.0.total_cmp(&a.0));
    let hits = cands[..pos.len()].iter().filter(|c| c.1).count();
    hits as f64 / pos.len() as f64
}

/// Scores of the test pairs of a split under `emb`.
pub fn score_split(split: &LinkSplit, emb: &EmbeddingPair) -> Result<(Vec<f64>, Vec<f64>)> {
    let score = |pairs: &[(u32, u32)]| -> Result<Vec<f64>> {
        pairs
            .iter()
            .map(|&(u, v)| emb.score(u as usize, v as usize))
            .collect()
    };
    Ok((score(&split.test_pos)?, score(&split.test_neg)?))
}

/// Trains on a random `ratio` share of the edges and measures precision on the held-out pairs.
pub fn link_prediction_precision(g: &Graph, config: &EmbedConfig, ratio: f64, seed: u64) -> Result<f64> {
    link_prediction_with(g, config, Method::TransposeProximity, ratio, seed)
}

pub fn link_prediction_with(
    g: &Graph,
    config: &EmbedConfig,
    method: Method,
    ratio: f64,
    seed: u64,
) -> Result<f64> {
    let split = make_link_split(g, ratio, seed)?;
    let train = split.train_graph()?;
    let emb = embed_with(&train, config, method)?.embedding;
    let (pos, neg) = score_split(&split, &emb)?;
    Ok(precision_at_positives(&pos, &neg, seed))
}

/// Mean and sample standard deviation over repeated runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub values: Vec<f64>,
    pub mean: f64,
    /// Sample (n − 1) standard deviation; zero for a single value.
    pub stddev: f64,
}

impl Summary {
    pub fn of(values: Vec<f64>) -> Summary {
        let k = values.len() as f64;
        let mean = values.iter().sum::<f64>() / k;
        let stddev = if values.len() > 1 {
            (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
        } else {
            0.0
        };
        Summary {
            values,
            mean,
            stddev,
        }
    }
}

/// Link prediction repeated with split seeds `seed, seed + 1, ...`.
pub fn link_prediction_repeated(
    g: &Graph,
    config: &EmbedConfig,
    method: Method,
    ratio: f64,
    seed: u64,
    repeats: usize,
) -> Result<Summary> {
    if repeats == 0 {
        return Err(Error::invalid("repeats must be at least 1"));
    }
    let values = (0..repeats as u64)
        .map(|i| link_prediction_with(g, config, method, ratio, seed + i))
        .collect::<Result<Vec<_>>>()?;
    Ok(Summary::of(values))
}

/// Per-node degrees of the original graph and of its reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeComparison {
    pub original_in: Vec<usize>,
    pub original_out: Vec<usize>,
    pub reconstructed_in: Vec<usize>,
    pub reconstructed_out: Vec<usize>,
}

pub type Histogram = BTreeMap<usize, usize>;

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeHistograms {
    pub original_in: Histogram,
    pub original_out: Histogram,
    pub reconstructed_in: Histogram,
    pub reconstructed_out: Histogram,
}

impl DegreeComparison {
    pub fn out_degree_spearman(&self) -> f64 {
        spearman(&as_f64(&self.original_out), &as_f64(&self.reconstructed_out))
    }

    pub fn in_degree_spearman(&self) -> f64 {
        spearman(&as_f64(&self.original_in), &as_f64(&self.reconstructed_in))
    }

    pub fn histograms(&self) -> DegreeHistograms {
        let hist = |d: &[usize]| {
            let mut h = Histogram::new();
            for &x in d {
                *h.entry(x).or_insert(0) += 1;
            }
            h
        };
        DegreeHistograms {
            original_in: hist(&self.original_in),
            original_out: hist(&self.original_out),
            reconstructed_in: hist(&self.reconstructed_in),
            reconstructed_out: hist(&self.reconstructed_out),
        }
    }
}

impl DegreeHistograms {
    /// Plot-ready rows `degree, orig_in, orig_out, recon_in, recon_out`.
    pub fn table(&self) -> Vec<[usize; 5]> {
        let mut degrees: Vec<usize> = [
            &self.original_in,
            &self.original_out,
            &self.reconstructed_in,
            &self.reconstructed_out,
        ]
        .iter()
        .flat_map(|h| h.keys().copied())
        .collect();
        degrees.sort_unstable();
        degrees.dedup();
        let get = |h: &Histogram, d| h.get(&d).copied().unwrap_or(0);
        degrees
            .into_iter()
            .map(|d| {
                [
                    d,
                    get(&self.original_in, d),
                    get(&self.original_out, d),
                    get(&self.reconstructed_in, d),
                    get(&self.reconstructed_out, d),
                ]
            })
            .collect()
    }
}

pub fn reconstructed_degrees(g: &Graph, emb: &EmbeddingPair) -> Result<DegreeComparison> {
    let rec = reconstructed_graph(g, emb)?;
    Ok(DegreeComparison {
        original_in: g.degrees(Direction::In),
        original_out: g.degrees(Direction::Out),
        reconstructed_in: rec.degrees(Direction::In),
        reconstructed_out: rec.degrees(Direction::Out),
    })
}

pub fn reconstructed_degree_histograms(g: &Graph, emb: &EmbeddingPair) -> Result<DegreeHistograms> {
    let rec = reconstructed_graph(g, emb)?;
    Ok(DegreeHistograms {
        original_in: degree_histogram(g, Direction::In),
        original_out: degree_histogram(g, Direction::Out),
        reconstructed_in: degree_histogram(&rec, Direction::In),
        reconstructed_out: degree_histogram(&rec, Direction::Out),
    })
}

fn as_f64(xs: &[usize]) -> Vec<f64> {
    xs.iter().map(|&x| x as f64).collect()
}

/// Ranks starting at 1; tied values share their average rank.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation; NaN when either input is constant.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    pearson(&average_ranks(a), &average_ranks(b))
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let k = a.len() as f64;
    let ma = a.iter().sum::<f64>() / k;
    let mb = b.iter().sum::<f64>() / k;
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma).powi(2);
        vb += (y - mb).powi(2);
    }
    if va == 0.0 || vb == 0.0 {
        return f64::NAN;
    }
    cov / (va * vb).sqrt()
}

/// Writes `degree count` rows.
pub fn write_histogram_tsv(path: &Path, hist: &Histogram) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "degree\tcount").map_err(io)?;
    for (d, c) in hist {
        writeln!(w, "{d}\t{c}").map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Writes `metric value` rows.
pub fn write_metrics_tsv(path: &Path, rows: &[(String, f64)]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "metric\tvalue").map_err(io)?;
    for (name, value) in rows {
        writeln!(w, "{name}\t{value:?}").map_err(io)?;
    }
    w.flush().map_err(io)
}
