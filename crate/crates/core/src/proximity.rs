//! The sparse transpose-proximity matrix.
//!
//! `P[u][v] = π(u, v) + πᵀ(v, u)`, where `π(·, v)` comes from a backward push
//! towards `v` on the graph and `πᵀ(·, u)` from a backward push towards `u` on
//! the transpose graph. Each contribution is kept only when it reaches
//! `eps / 2`, so every row of either half holds at most `2 / eps` entries and
//! the whole matrix at most `4n / eps`.

use std::io::{BufWriter, Write};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::ppr::{BackwardPush, PprParams, PushWorkspace};
use crate::sparse::CsrMatrix;

/// Parameters of one embedding run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbedConfig {
    /// Stopping probability of the random walk.
    pub alpha: f64,
    /// Error parameter; pushes use `r_max = eps / 2`.
    pub eps: f64,
    /// Embedding dimension.
    pub dim: usize,
    pub seed: u64,
    /// Extra columns sampled by the randomized range finder.
    pub svd_oversample: usize,
    /// Power iterations of the randomized range finder.
    pub svd_power_iters: usize,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        EmbedConfig {
            alpha: 0.5,
            eps: 1e-5,
            dim: 128,
            seed: 0,
            svd_oversample: 10,
            svd_power_iters: 10,
        }
    }
}

impl EmbedConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::invalid(format!("eps must lie in (0, 1), got {}", self.eps)));
        }
        if self.dim == 0 {
            return Err(Error::invalid("dim must be at least 1"));
        }
        if self.dim > n {
            return Err(Error::invalid(format!(
                "dim {} exceeds node count {n}",
                self.dim
            )));
        }
        Ok(())
    }

    /// Short tag identifying the parameters, used in output file names.
    pub fn fingerprint(&self) -> String {
        format!(
            "a{}-e{:e}-d{}-s{}",
            self.alpha, self.eps, self.dim, self.seed
        )
    }
}

/// Which backward-push passes contribute to the matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProximityKind {
    /// `π(u, v) + πᵀ(v, u)`.
    Transpose,
    /// `π(u, v)` only. The ablation without the transpose-graph pass.
    ForwardOnly,
}

/// Timings and work counters from matrix assembly.
#[derive(Debug, Clone, Default)]
pub struct BuildStats {
    pub push_forward: Duration,
    pub push_transpose: Duration,
    pub merge: Duration,
    pub pushes_forward: u64,
    pub pushes_transpose: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseProximityMatrix {
    matrix: CsrMatrix,
    eps: f64,
    transformed: bool,
}

impl AsRef<CsrMatrix> for SparseProximityMatrix {
    fn as_ref(&self) -> &CsrMatrix {
        &self.matrix
    }
}

impl SparseProximityMatrix {
    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn nnz(&self) -> usize {
        self.matrix.nnz()
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn is_transformed(&self) -> bool {
        self.transformed
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// Stored value, `None` for an absent entry.
    pub fn get(&self, u: usize, v: usize) -> Option<f64> {
        self.matrix.get(u, v)
    }

    pub fn entries(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.matrix.iter()
    }

    /// Replaces every stored `x` by `ln((2 / eps) · x)`; the sparsity pattern is kept.
    ///
    /// Fails if the matrix was already transformed or holds a value below
    /// `eps / 2`, which assembly never produces.
    pub fn log_transform(mut self) -> Result<Self> {
        if self.transformed {
            return Err(Error::Consistency("matrix is already log-transformed".into()));
        }
        let floor = self.eps / 2.0;
        for x in self.matrix.values_mut() {
            if !(*x >= floor) {
                return Err(Error::Consistency(format!(
                    "stored value {x} is below eps/2 = {floor}"
                )));
            }
            // x / floor >= 1 holds exactly under correctly rounded division.
            *x = (*x / floor).ln();
        }
        self.transformed = true;
        Ok(self)
    }

    /// Sums of stored entries per row. Only defined before the log transform.
    pub fn row_sums(&self) -> Result<Vec<f64>> {
        self.require_raw()?;
        Ok((0..self.n())
            .map(|u| self.matrix.row(u).1.iter().sum())
            .collect())
    }

    /// Sums of stored entries per column. Only defined before the log transform.
    pub fn col_sums(&self) -> Result<Vec<f64>> {
        self.require_raw()?;
        let mut sums = vec![0.0; self.n()];
        for (_, v, x) in self.matrix.iter() {
            sums[v as usize] += x;
        }
        Ok(sums)
    }

    fn require_raw(&self) -> Result<()> {
        if self.transformed {
            Err(Error::invalid(
                "degree sums are only meaningful before the log transform",
            ))
        } else {
            Ok(())
        }
    }

    /// Writes `u v value` lines sorted by `(u, v)`, values with 17 significant digits.
    pub fn write_triples<W: Write>(&self, writer: W) -> std::io::Result<()> {
        let mut w = BufWriter::new(writer);
        for (u, v, x) in self.entries() {
            writeln!(w, "{u} {v} {x:.16e}")?;
        }
        w.flush()
    }

    /// Checks the structural invariants of an assembled matrix.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.n() as f64;
        let bound = 4.0 * n / self.eps;
        if self.nnz() as f64 > bound {
            return Err(Error::Consistency(format!(
                "nnz {} exceeds 4n/eps = {bound}",
                self.nnz()
            )));
        }
        for (u, v, x) in self.entries() {
            let ok = if self.transformed {
                x >= 0.0
            } else {
                x >= self.eps / 2.0 && x <= 2.0 + 1e-12
            };
            if !ok {
                return Err(Error::Consistency(format!("entry ({u}, {v}) = {x} out of range")));
            }
        }
        Ok(())
    }
}

/// Assembles the proximity matrix with backward pushes run in parallel on the
/// current rayon pool. Output is independent of the number of threads.
#[derive(Debug, Clone, Copy)]
pub struct ProximityBuilder {
    params: PprParams,
    eps: f64,
    kind: ProximityKind,
}

impl ProximityBuilder {
    pub fn new(alpha: f64, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::invalid(format!("eps must lie in (0, 1), got {eps}")));
        }
        Ok(ProximityBuilder {
            params: PprParams::new(alpha, eps / 2.0)?,
            eps,
            kind: ProximityKind::Transpose,
        })
    }

    pub fn kind(mut self, kind: ProximityKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn build(&self, g: &Graph) -> Result<(SparseProximityMatrix, BuildStats)> {
        let n = g.node_count();
        let keep = self.eps / 2.0;
        let mut stats = BuildStats::default();

        // Column v of the forward half: (u, π(u, v)).
        let start = Instant::now();
        let (forward, pushes) = push_all(g, self.params, keep)?;
        stats.push_forward = start.elapsed();
        stats.pushes_forward = pushes;

        // Row u of the transpose half: (v, πᵀ(v, u)).
        let backward = if self.kind == ProximityKind::Transpose {
            let start = Instant::now();
            let gt = g.transpose();
            let (rows, pushes) = push_all(&gt, self.params, keep)?;
            stats.push_transpose = start.elapsed();
            stats.pushes_transpose = pushes;
            Some(rows)
        } else {
            None
        };

        let start = Instant::now();
        let forward = columns_to_rows(n, &forward);
        let matrix = match backward {
            Some(rows) => merge_rows(n, &forward, &rows)?,
            None => forward,
        };
        stats.merge = start.elapsed();
        log::debug!(
            "proximity: n={n} nnz={} pushes={}+{}",
            matrix.nnz(),
            stats.pushes_forward,
            stats.pushes_transpose
        );
        Ok((
            SparseProximityMatrix {
                matrix,
                eps: self.eps,
                transformed: false,
            },
            stats,
        ))
    }
}

/// Untransformed transpose-proximity matrix of `g`.
pub fn build_transpose_proximity(g: &Graph, alpha: f64, eps: f64) -> Result<SparseProximityMatrix> {
    Ok(ProximityBuilder::new(alpha, eps)?.build(g)?.0)
}

type SparseVec = Vec<(u32, f64)>;

/// One backward push per target; keeps reserves `>= keep`. Lists are indexed by target.
fn push_all(g: &Graph, params: PprParams, keep: f64) -> Result<(Vec<SparseVec>, u64)> {
    let n = g.node_count();
    let results: Vec<Result<(SparseVec, u64)>> = (0..n)
        .into_par_iter()
        .map_init(
            || PushWorkspace::new(n),
            |ws, target| {
                let owned = std::mem::replace(ws, PushWorkspace::new(0));
                let (res, back) = BackwardPush::with_workspace(g, target, params, owned)?.finish();
                *ws = back;
                let kept: SparseVec = res.reserves.into_iter().filter(|&(_, p)| p >= keep).collect();
                Ok((kept, res.pushes))
            },
        )
        .collect();
    let mut lists = Vec::with_capacity(n);
    let mut pushes = 0;
    for r in results {
        let (list, p) = r?;
        pushes += p;
        lists.push(list);
    }
    Ok((lists, pushes))
}

/// Scatters per-column lists into CSR; rows come out sorted because columns are visited in order.
fn columns_to_rows(n: usize, columns: &[SparseVec]) -> CsrMatrix {
    let mut row_ptr = vec![0usize; n + 1];
    for col in columns {
        for &(u, _) in col {
            row_ptr[u as usize + 1] += 1;
        }
    }
    for i in 0..n {
        row_ptr[i + 1] += row_ptr[i];
    }
    let nnz = row_ptr[n];
    let mut next = row_ptr.clone();
    let mut cols = vec![0u32; nnz];
    let mut vals = vec![0.0; nnz];
    for (v, col) in columns.iter().enumerate() {
        for &(u, x) in col {
            let slot = &mut next[u as usize];
            cols[*slot] = v as u32;
            vals[*slot] = x;
            *slot += 1;
        }
    }
    CsrMatrix::from_parts(n, n, row_ptr, cols, vals).expect("scatter produces valid CSR")
}

/// Sorted join of the forward half with per-row transpose contributions.
fn merge_rows(n: usize, forward: &CsrMatrix, extra: &[SparseVec]) -> Result<CsrMatrix> {
    let mut row_ptr = Vec::with_capacity(n + 1);
    row_ptr.push(0);
    let mut cols = Vec::with_capacity(forward.nnz() + extra.iter().map(Vec::len).sum::<usize>());
    let mut vals = Vec::with_capacity(cols.capacity());
    for u in 0..n {
        let (fc, fv) = forward.row(u);
        let add = &extra[u];
        let (mut i, mut j) = (0, 0);
        while i < fc.len() || j < add.len() {
            let take_f = j == add.len() || (i < fc.len() && fc[i] <= add[j].0);
            let take_a = i == fc.len() || (j < add.len() && add[j].0 <= fc[i]);
            let (c, x) = match (take_f, take_a) {
                (true, true) => {
                    let r = (fc[i], fv[i] + add[j].1);
                    i += 1;
                    j += 1;
                    r
                }
                (true, false) => {
                    let r = (fc[i], fv[i]);
                    i += 1;
                    r
                }
                (false, true) => {
                    let r = add[j];
                    j += 1;
                    r
                }
                (false, false) => unreachable!(),
            };
            cols.push(c);
            vals.push(x);
        }
        row_ptr.push(cols.len());
    }
    CsrMatrix::from_parts(n, n, row_ptr, cols, vals)
}
