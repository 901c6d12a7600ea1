//! Personalized PageRank: backward push from a target node, and a
//! power-series reference used to check it.
//!
//! `PPR(u, v)` is the probability that a random walk from `u`, stopping with
//! probability `alpha` at every step and otherwise moving to a uniform
//! out-neighbor, stops at `v`. A walk that reaches a node without
//! out-neighbors and does not stop there is lost, so a sink `s` has
//! `PPR(s, ·) = alpha · e_s` and rows through sinks sum to less than one.
//! Backward push computes exactly this quantity.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Decay factor and push threshold for one backward-push run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PprParams {
    alpha: f64,
    r_max: f64,
}

impl PprParams {
    pub fn new(alpha: f64, r_max: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::invalid(format!("r_max must be positive, got {r_max}")));
        }
        Ok(PprParams { alpha, r_max })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }
}

/// Outcome of one backward push towards `target`.
///
/// Both vectors are sorted by node and hold strictly positive values only.
#[derive(Debug, Clone, PartialEq)]
pub struct PushResult {
    pub target: usize,
    pub reserves: Vec<(u32, f64)>,
    pub residues: Vec<(u32, f64)>,
    pub pushes: u64,
}

impl PushResult {
    pub fn reserve(&self, u: usize) -> f64 {
        lookup(&self.reserves, u)
    }

    pub fn residue(&self, u: usize) -> f64 {
        lookup(&self.residues, u)
    }
}

fn lookup(sparse: &[(u32, f64)], u: usize) -> f64 {
    match sparse.binary_search_by_key(&(u as u32), |&(x, _)| x) {
        Ok(i) => sparse[i].1,
        Err(_) => 0.0,
    }
}

/// Scratch state for backward push, reusable across targets on graphs with
/// the same node count. Only touched slots are reset between runs, so a run
/// costs time proportional to the nodes it reaches rather than to `n`.
#[derive(Debug, Clone)]
pub struct PushWorkspace {
    reserve: Vec<f64>,
    residue: Vec<f64>,
    seen: Vec<bool>,
    queued: Vec<bool>,
    touched: Vec<u32>,
    queue: VecDeque<u32>,
}

impl PushWorkspace {
    pub fn new(n: usize) -> Self {
        PushWorkspace {
            reserve: vec![0.0; n],
            residue: vec![0.0; n],
            seen: vec![false; n],
            queued: vec![false; n],
            touched: Vec::new(),
            queue: VecDeque::new(),
        }
    }

    fn len(&self) -> usize {
        self.reserve.len()
    }

    fn clear(&mut self) {
        for &x in &self.touched {
            let x = x as usize;
            self.reserve[x] = 0.0;
            self.residue[x] = 0.0;
            self.seen[x] = false;
            self.queued[x] = false;
        }
        self.touched.clear();
        self.queue.clear();
    }

    #[inline]
    fn touch(&mut self, x: usize) {
        if !self.seen[x] {
            self.seen[x] = true;
            self.touched.push(x as u32);
        }
    }
}

/// Backward push towards a single target, advanced one push at a time.
///
/// Nodes whose residue exceeds `r_max` wait in a FIFO queue; a node is queued
/// at most once at a time and is pushed with whatever residue it holds when
/// dequeued.
pub struct BackwardPush<'g> {
    graph: &'g Graph,
    target: usize,
    params: PprParams,
    ws: PushWorkspace,
    pushes: u64,
}

impl<'g> BackwardPush<'g> {
    pub fn new(graph: &'g Graph, target: usize, params: PprParams) -> Result<Self> {
        Self::with_workspace(graph, target, params, PushWorkspace::new(graph.node_count()))
    }

    pub fn with_workspace(
        graph: &'g Graph,
        target: usize,
        params: PprParams,
        mut ws: PushWorkspace,
    ) -> Result<Self> {
        let n = graph.node_count();
        if target >= n {
            return Err(Error::NodeOutOfRange { node: target, n });
        }
        if ws.len() != n {
            ws = PushWorkspace::new(n);
        } else {
            ws.clear();
        }
        ws.touch(target);
        ws.residue[target] = 1.0;
        if 1.0 > params.r_max {
            ws.queued[target] = true;
            ws.queue.push_back(target as u32);
        }
        Ok(BackwardPush {
            graph,
            target,
            params,
            ws,
            pushes: 0,
        })
    }

    /// Performs one push. Returns `false` once no residue exceeds `r_max`.
    pub fn step(&mut self) -> bool {
        let Some(x) = self.ws.queue.pop_front() else {
            return false;
        };
        let x = x as usize;
        self.ws.queued[x] = false;
        let r = self.ws.residue[x];
        let alpha = self.params.alpha;
        let r_max = self.params.r_max;
        let spread = (1.0 - alpha) * r;
        for &y in self.graph.in_neighbors(x) {
            let y = y as usize;
            // y -> x exists, so d_out(y) >= 1.
            let share = spread / self.graph.out_degree(y) as f64;
            self.ws.touch(y);
            self.ws.residue[y] += share;
            if self.ws.residue[y] > r_max && !self.ws.queued[y] {
                self.ws.queued[y] = true;
                self.ws.queue.push_back(y as u32);
            }
        }
        self.ws.reserve[x] += alpha * r;
        self.ws.residue[x] = 0.0;
        self.pushes += 1;
        true
    }

    pub fn run(&mut self) {
        while self.step() {}
    }

    pub fn is_done(&self) -> bool {
        self.ws.queue.is_empty()
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn pushes(&self) -> u64 {
        self.pushes
    }

    pub fn reserve(&self, x: usize) -> f64 {
        self.ws.reserve[x]
    }

    pub fn residue(&self, x: usize) -> f64 {
        self.ws.residue[x]
    }

    /// Nodes whose reserve or residue has been written in this run, in first-touch order.
    pub fn touched(&self) -> &[u32] {
        &self.ws.touched
    }

    /// Runs to completion and extracts the sparse result, returning the
    /// workspace for reuse.
    pub fn finish(mut self) -> (PushResult, PushWorkspace) {
        self.run();
        let mut nodes = self.ws.touched.clone();
        nodes.sort_unstable();
        let reserves = nodes
            .iter()
            .map(|&x| (x, self.ws.reserve[x as usize]))
            .filter(|&(_, p)| p > 0.0)
            .collect();
        let residues = nodes
            .iter()
            .map(|&x| (x, self.ws.residue[x as usize]))
            .filter(|&(_, r)| r > 0.0)
            .collect();
        let result = PushResult {
            target: self.target,
            reserves,
            residues,
            pushes: self.pushes,
        };
        (result, self.ws)
    }
}

/// Backward push from `target` to completion.
pub fn backward_push(g: &Graph, target: usize, params: PprParams) -> Result<PushResult> {
    Ok(BackwardPush::new(g, target, params)?.finish().0)
}

fn check_oracle_args(alpha: f64, tol: f64) {
    assert!(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
    assert!(tol > 0.0, "tol must be positive");
}

/// Accumulates `alpha · Σ_k ((1 - alpha) Wᵀ)^k · start` where `W` is the
/// random-walk transition matrix, stopping once the walk mass still in
/// flight drops below `tol`. The untouched remainder bounds the error of
/// every entry.
fn propagate(g: &Graph, alpha: f64, tol: f64, mut mass: Vec<f64>) -> Vec<f64> {
    let n = g.node_count();
    let mut acc = vec![0.0; n];
    let mut next = vec![0.0; n];
    loop {
        let in_flight: f64 = mass.iter().sum();
        if in_flight < tol {
            return acc;
        }
        next.iter_mut().for_each(|x| *x = 0.0);
        for w in 0..n {
            let m = mass[w];
            if m == 0.0 {
                continue;
            }
            acc[w] += alpha * m;
            let out = g.out_neighbors(w);
            if out.is_empty() {
                continue;
            }
            let share = (1.0 - alpha) * m / out.len() as f64;
            for &x in out {
                next[x as usize] += share;
            }
        }
        std::mem::swap(&mut mass, &mut next);
    }
}

/// `PPR(u, ·)` by power series, every entry within `tol` of the exact value.
pub fn exact_ppr_row(g: &Graph, u: usize, alpha: f64, tol: f64) -> Vec<f64> {
    check_oracle_args(alpha, tol);
    let mut start = vec![0.0; g.node_count()];
    start[u] = 1.0;
    propagate(g, alpha, tol, start)
}

/// Dense `n × n` PPR matrix, row `u` being [`exact_ppr_row`] of `u`.
pub fn exact_ppr_matrix(g: &Graph, alpha: f64, tol: f64) -> Vec<Vec<f64>> {
    (0..g.node_count())
        .map(|u| exact_ppr_row(g, u, alpha, tol))
        .collect()
}

/// Global PageRank under the same walk semantics: `PR(v) = (1/n) Σ_u PPR(u, v)`.
pub fn global_pagerank(g: &Graph, alpha: f64, tol: f64) -> Vec<f64> {
    check_oracle_args(alpha, tol);
    let n = g.node_count();
    propagate(g, alpha, tol, vec![1.0 / n as f64; n])
}
