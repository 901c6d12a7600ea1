//! Immutable directed graphs in compressed adjacency form.
//!
//! Both the out- and in-adjacency are stored, so a graph gives constant-time
//! access to out-neighbors, in-neighbors and degrees. Undirected graphs are
//! stored as two directed arcs per edge and `m` counts arcs.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GraphKind {
    Directed,
    /// Every edge is materialized as both arcs `u -> v` and `v -> u`.
    Undirected,
}

impl GraphKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GraphKind::Directed => "directed",
            GraphKind::Undirected => "undirected",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    In,
    Out,
}

/// Compressed row layout: `offsets[u]..offsets[u + 1]` indexes `targets`.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Adjacency {
    /// Builds the layout from arcs sorted by `(row, col)` with no duplicates.
    fn from_sorted(n: usize, arcs: impl Iterator<Item = (u32, u32)>) -> Self {
        let mut offsets = vec![0usize; n + 1];
        let mut targets = Vec::new();
        for (row, col) in arcs {
            offsets[row as usize + 1] += 1;
            targets.push(col);
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        Adjacency { offsets, targets }
    }

    #[inline]
    fn row(&self, u: usize) -> &[u32] {
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }

    #[inline]
    fn len_of(&self, u: usize) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }
}

/// A simple directed graph on dense node ids `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    kind: GraphKind,
    out_adj: Adjacency,
    in_adj: Adjacency,
}

impl Graph {
    /// Builds a graph from arcs over nodes `0..n`.
    ///
    /// Self-loops are dropped and duplicates removed. For [`GraphKind::Undirected`]
    /// the reverse of every arc is added.
    pub fn from_edges(n: usize, edges: &[(u32, u32)], kind: GraphKind) -> Result<Graph> {
        if n > u32::MAX as usize {
            return Err(Error::invalid(format!("{n} nodes exceed the u32 id space")));
        }
        let mut arcs: Vec<(u32, u32)> = Vec::with_capacity(match kind {
            GraphKind::Directed => edges.len(),
            GraphKind::Undirected => 2 * edges.len(),
        });
        for &(u, v) in edges {
            for node in [u, v] {
                if node as usize >= n {
                    return Err(Error::NodeOutOfRange {
                        node: node as usize,
                        n,
                    });
                }
            }
            if u == v {
                continue;
            }
            arcs.push((u, v));
            if kind == GraphKind::Undirected {
                arcs.push((v, u));
            }
        }
        arcs.sort_unstable();
        arcs.dedup();
        let out_adj = Adjacency::from_sorted(n, arcs.iter().copied());
        let mut reversed: Vec<(u32, u32)> = arcs.iter().map(|&(u, v)| (v, u)).collect();
        reversed.sort_unstable();
        let in_adj = Adjacency::from_sorted(n, reversed.into_iter());
        Ok(Graph {
            kind,
            out_adj,
            in_adj,
        })
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn node_count(&self) -> usize {
        self.out_adj.offsets.len() - 1
    }

    /// Number of directed arcs.
    pub fn edge_count(&self) -> usize {
        self.out_adj.targets.len()
    }

    #[inline]
    pub fn out_neighbors(&self, u: usize) -> &[u32] {
        self.out_adj.row(u)
    }

    #[inline]
    pub fn in_neighbors(&self, v: usize) -> &[u32] {
        self.in_adj.row(v)
    }

    #[inline]
    pub fn out_degree(&self, u: usize) -> usize {
        self.out_adj.len_of(u)
    }

    #[inline]
    pub fn in_degree(&self, v: usize) -> usize {
        self.in_adj.len_of(v)
    }

    /// Binary search in the sorted out-neighbor list of `u`.
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.node_count() && v <= u32::MAX as usize && {
            self.out_neighbors(u).binary_search(&(v as u32)).is_ok()
        }
    }

    /// All arcs in `(u, v)` order.
    pub fn arcs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.node_count()).flat_map(move |u| {
            self.out_neighbors(u)
                .iter()
                .map(move |&v| (u as u32, v))
        })
    }

    /// Edges as stored for the graph kind: every arc when directed, `u < v` when undirected.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        match self.kind {
            GraphKind::Directed => self.arcs().collect(),
            GraphKind::Undirected => self.arcs().filter(|&(u, v)| u < v).collect(),
        }
    }

    /// The edge-reversed graph. Out- and in-adjacency swap roles.
    pub fn transpose(&self) -> Graph {
        Graph {
            kind: self.kind,
            out_adj: self.in_adj.clone(),
            in_adj: self.out_adj.clone(),
        }
    }

    pub fn degree(&self, u: usize, direction: Direction) -> usize {
        match direction {
            Direction::In => self.in_degree(u),
            Direction::Out => self.out_degree(u),
        }
    }

    pub fn degrees(&self, direction: Direction) -> Vec<usize> {
        (0..self.node_count())
            .map(|u| self.degree(u, direction))
            .collect()
    }

    /// Full scan of the structural invariants. Used by tests and after deserialization.
    pub fn check_consistency(&self) -> Result<()> {
        let n = self.node_count();
        if self.in_adj.offsets.len() != n + 1 {
            return Err(Error::Consistency("in/out node counts differ".into()));
        }
        if self.in_adj.targets.len() != self.edge_count() {
            return Err(Error::Consistency("in/out arc counts differ".into()));
        }
        for u in 0..n {
            for adj in [&self.out_adj, &self.in_adj] {
                let row = adj.row(u);
                if row.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Consistency(format!(
                        "neighbor list of {u} is not strictly increasing"
                    )));
                }
                if row.iter().any(|&x| x as usize >= n || x as usize == u) {
                    return Err(Error::Consistency(format!(
                        "neighbor list of {u} has an invalid entry"
                    )));
                }
            }
            for &v in self.out_neighbors(u) {
                if self.in_neighbors(v as usize).binary_search(&(u as u32)).is_err() {
                    return Err(Error::Consistency(format!(
                        "arc {u}->{v} missing from in-adjacency"
                    )));
                }
            }
            for &w in self.in_neighbors(u) {
                if self.out_neighbors(w as usize).binary_search(&(u as u32)).is_err() {
                    return Err(Error::Consistency(format!(
                        "arc {w}->{u} missing from out-adjacency"
                    )));
                }
            }
            if self.kind == GraphKind::Undirected && self.out_neighbors(u) != self.in_neighbors(u) {
                return Err(Error::Consistency(format!(
                    "undirected graph is not symmetric at node {u}"
                )));
            }
        }
        Ok(())
    }
}

/// Histogram `degree -> number of nodes with that degree`.
pub fn degree_histogram(g: &Graph, direction: Direction) -> BTreeMap<usize, usize> {
    let mut hist = BTreeMap::new();
    for u in 0..g.node_count() {
        *hist.entry(g.degree(u, direction)).or_insert(0) += 1;
    }
    hist
}

/// A graph loaded from an edge list together with the original node ids.
///
/// `ids[u]` is the id that dense node `u` had in the input file. Ids are
/// assigned in ascending order of the original ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadedGraph {
    pub graph: Graph,
    pub ids: Vec<u64>,
}

impl LoadedGraph {
    pub fn dense_id(&self, original: u64) -> Option<usize> {
        self.ids.binary_search(&original).ok()
    }
}

pub fn load_edge_list(path: impl AsRef<Path>, kind: GraphKind) -> Result<LoadedGraph> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_edge_list(BufReader::new(file), path, kind)
}

/// Parses `u v` lines; `#` starts a comment line, blank lines are skipped.
/// Any tokens after the first two on a line are ignored.
pub fn read_edge_list<R: Read>(reader: R, path: &Path, kind: GraphKind) -> Result<LoadedGraph> {
    let mut raw: Vec<(u64, u64)> = Vec::new();
    let reader = BufReader::new(reader);
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let mut parse = |what: &str| -> Result<u64> {
            let tok = tokens.next().ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                message: format!("missing {what} node id"),
            })?;
            tok.parse::<u64>().map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: idx + 1,
                message: format!("bad {what} node id {tok:?}: {e}"),
            })
        };
        let u = parse("source")?;
        let v = parse("target")?;
        raw.push((u, v));
    }
    if raw.is_empty() {
        return Err(Error::EmptyGraph(path.to_path_buf()));
    }

    let mut ids: Vec<u64> = raw.iter().flat_map(|&(u, v)| [u, v]).collect();
    ids.sort_unstable();
    ids.dedup();
    let index: HashMap<u64, u32> = ids
        .iter()
        .enumerate()
        .map(|(i, &id)| (id, i as u32))
        .collect();
    let edges: Vec<(u32, u32)> = raw.iter().map(|(u, v)| (index[u], index[v])).collect();
    let graph = Graph::from_edges(ids.len(), &edges, kind)?;
    log::debug!(
        "loaded {}: n={} m={} ({})",
        path.display(),
        graph.node_count(),
        graph.edge_count(),
        kind.as_str()
    );
    Ok(LoadedGraph { graph, ids })
}

/// Writes `u v` lines in original-id space sorted by `(u, v)`.
///
/// Undirected edges are written once with `u < v`. A node with no incident
/// edge is written as a self-loop line so that it survives a reload (the
/// loader drops the loop but keeps the node).
pub fn write_edge_list<W: Write>(loaded: &LoadedGraph, writer: W) -> std::io::Result<()> {
    let g = &loaded.graph;
    let mut w = BufWriter::new(writer);
    for u in 0..g.node_count() {
        let uid = loaded.ids[u];
        if g.out_degree(u) == 0 && g.in_degree(u) == 0 {
            writeln!(w, "{uid} {uid}")?;
            continue;
        }
        for &v in g.out_neighbors(u) {
            if g.kind() == GraphKind::Undirected && (v as usize) < u {
                continue;
            }
            writeln!(w, "{} {}", uid, loaded.ids[v as usize])?;
        }
    }
    w.flush()
}
