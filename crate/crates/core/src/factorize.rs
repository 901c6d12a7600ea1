//! Randomized truncated SVD of sparse matrices and the content/context
//! embeddings derived from it.
//!
//! The range finder draws a Gaussian test panel, runs power iterations with
//! a QR re-orthogonalization after every product, and finishes with a dense
//! SVD of the small projected matrix (Halko, Martinsson & Tropp). Symmetric
//! inputs are projected on both sides and finished with an eigendecomposition
//! instead, which makes `U diag(sigma) Vᵀ` symmetric by construction.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::proximity::EmbedConfig;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SvdParams {
    pub dim: usize,
    pub oversample: usize,
    pub power_iters: usize,
    pub seed: u64,
}

impl SvdParams {
    pub fn from_config(config: &EmbedConfig) -> Self {
        SvdParams {
            dim: config.dim,
            oversample: config.svd_oversample,
            power_iters: config.svd_power_iters,
            seed: config.seed,
        }
    }
}

/// Thin factorization `A ≈ U diag(sigma) Vᵀ`, `sigma` non-increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdResult {
    pub u: DMatrix<f64>,
    pub sigma: Vec<f64>,
    pub v: DMatrix<f64>,
}

impl SvdResult {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    /// Dense `U diag(sigma) Vᵀ`. For tests and small matrices.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut us = self.u.clone();
        for (k, s) in self.sigma.iter().enumerate() {
            us.column_mut(k).scale_mut(*s);
        }
        us * self.v.transpose()
    }
}

fn orthonormal_basis(m: DMatrix<f64>) -> DMatrix<f64> {
    m.qr().q()
}

pub fn randomized_svd<M: AsRef<CsrMatrix>>(matrix: &M, params: &SvdParams) -> Result<SvdResult> {
    let a = matrix.as_ref();
    let (nrows, ncols) = (a.nrows(), a.ncols());
    let full = nrows.min(ncols);
    if params.dim == 0 {
        return Err(Error::invalid("svd dimension must be at least 1"));
    }
    if params.dim > full {
        return Err(Error::invalid(format!(
            "svd dimension {} exceeds matrix size {nrows}x{ncols}",
            params.dim
        )));
    }
    let width = (params.dim + params.oversample).min(full);
    let at = a.transpose();

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let omega_t = DMatrix::<f64>::from_fn(width, ncols, |_, _| StandardNormal.sample(&mut rng));

    let mut q = orthonormal_basis(a.mul_panel_t(&omega_t).transpose());
    for _ in 0..params.power_iters {
        let z = orthonormal_basis(at.mul_panel_t(&q.transpose()).transpose());
        q = orthonormal_basis(a.mul_panel_t(&z.transpose()).transpose());
    }

    if at == *a {
        return Ok(symmetric_finish(a, &q, params.dim));
    }

    // Bᵀ = Aᵀ Q = W S Xᵀ, so A ≈ Q B = (Q X) S Wᵀ.
    let bt = at.mul_panel_t(&q.transpose()).transpose();
    let svd = bt.svd(true, true);
    let w = svd.u.expect("left vectors requested");
    let x = svd.v_t.expect("right vectors requested").transpose();
    let left = q * x;

    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .total_cmp(&svd.singular_values[i])
            .then(i.cmp(&j))
    });
    order.truncate(params.dim);

    let mut out = SvdResult {
        u: DMatrix::zeros(nrows, params.dim),
        sigma: Vec::with_capacity(params.dim),
        v: DMatrix::zeros(ncols, params.dim),
    };
    for (k, &src) in order.iter().enumerate() {
        let uc = left.column(src).into_owned();
        let vc = w.column(src).into_owned();
        push_pair(&mut out, k, uc, vc, svd.singular_values[src].max(0.0));
    }
    Ok(out)
}

fn push_pair(out: &mut SvdResult, k: usize, mut uc: DVector<f64>, mut vc: DVector<f64>, s: f64) {
    // Largest-magnitude entry of each left vector is made positive.
    let pivot = uc
        .iter()
        .copied()
        .fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
    if pivot < 0.0 {
        uc.neg_mut();
        vc.neg_mut();
    }
    out.u.set_column(k, &uc);
    out.v.set_column(k, &vc);
    out.sigma.push(s);
}

/// `A ≈ Q (Qᵀ A Q) Qᵀ = (Q W) Λ (Q W)ᵀ`; singular values are `|λ|` and each
/// right vector is its left vector times `sign(λ)`.
fn symmetric_finish(a: &CsrMatrix, q: &DMatrix<f64>, dim: usize) -> SvdResult {
    let aq_t = a.mul_panel_t(&q.transpose());
    let b = &aq_t * q;
    let b = (&b + b.transpose()) * 0.5;
    let eig = b.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .abs()
            .total_cmp(&eig.eigenvalues[i].abs())
            .then(i.cmp(&j))
    });
    order.truncate(dim);
    let left = q * &eig.eigenvectors;
    let n = a.nrows();
    let mut out = SvdResult {
        u: DMatrix::zeros(n, dim),
        sigma: Vec::with_capacity(dim),
        v: DMatrix::zeros(n, dim),
    };
    for (k, &src) in order.iter().enumerate() {
        let lambda = eig.eigenvalues[src];
        let uc = left.column(src).into_owned();
        let vc = if lambda < 0.0 { -&uc } else { uc.clone() };
        push_pair(&mut out, k, uc, vc, lambda.abs());
    }
    out
}

/// Content (`source`) and context (`target`) vectors, row-major `n × dim`.
///
/// `score(u, v) = ⟨source_u, target_v⟩` models the proximity of `v` from `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingPair {
    n: usize,
    dim: usize,
    source: Vec<f64>,
    target: Vec<f64>,
    pub config: Option<EmbedConfig>,
}

impl EmbeddingPair {
    pub fn from_rows(
        n: usize,
        dim: usize,
        source: Vec<f64>,
        target: Vec<f64>,
        config: Option<EmbedConfig>,
    ) -> Result<Self> {
        if source.len() != n * dim || target.len() != n * dim {
            return Err(Error::ShapeMismatch(format!(
                "expected {n}x{dim} embeddings, got {} and {} values",
                source.len(),
                target.len()
            )));
        }
        Ok(EmbeddingPair {
            n,
            dim,
            source,
            target,
            config,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn source_row(&self, u: usize) -> &[f64] {
        &self.source[u * self.dim..(u + 1) * self.dim]
    }

    #[inline]
    pub fn target_row(&self, v: usize) -> &[f64] {
        &self.target[v * self.dim..(v + 1) * self.dim]
    }

    /// Inner product without bounds checking beyond slice indexing.
    #[inline]
    pub fn score_unchecked(&self, u: usize, v: usize) -> f64 {
        dot(self.source_row(u), self.target_row(v))
    }

    pub fn score(&self, u: usize, v: usize) -> Result<f64> {
        for node in [u, v] {
            if node >= self.n {
                return Err(Error::NodeOutOfRange { node, n: self.n });
            }
        }
        Ok(self.score_unchecked(u, v))
    }

    /// Dense `S · Tᵀ`. For tests and small graphs.
    pub fn score_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |u, v| self.score_unchecked(u, v))
    }

    /// Canonical text form: `n d`, then `n` source rows and `n` target rows,
    /// each prefixed by the node's original id.
    pub fn write<W: Write>(&self, ids: &[u64], writer: W) -> Result<()> {
        if ids.len() != self.n {
            return Err(Error::ShapeMismatch(format!(
                "{} ids for {} embedded nodes",
                ids.len(),
                self.n
            )));
        }
        let io = |e| Error::io("<embedding output>", e);
        let mut w = BufWriter::new(writer);
        writeln!(w, "{} {}", self.n, self.dim).map_err(io)?;
        for block in [&self.source, &self.target] {
            for (u, id) in ids.iter().enumerate() {
                write!(w, "{id}").map_err(io)?;
                for x in &block[u * self.dim..(u + 1) * self.dim] {
                    write!(w, " {x:.16e}").map_err(io)?;
                }
                writeln!(w).map_err(io)?;
            }
        }
        w.flush().map_err(io)
    }

    pub fn write_file(&self, ids: &[u64], path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write(ids, file)
    }

    /// Parses the canonical text form. Returns the embedding and the id column.
    pub fn read<R: Read>(reader: R, path: &Path) -> Result<(EmbeddingPair, Vec<u64>)> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = BufReader::new(reader).lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| parse_err(1, "missing header".into()))?;
        let header = header.map_err(|e| Error::io(path, e))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| parse_err(1, format!("bad header {header:?}: {e}")))?;
        let [n, dim] = dims[..] else {
            return Err(parse_err(1, format!("header must be `n d`, got {header:?}")));
        };

        let mut ids = Vec::with_capacity(n);
        let mut source = Vec::with_capacity(n * dim);
        let mut target = Vec::with_capacity(n * dim);
        for block in 0..2 {
            for u in 0..n {
                let (idx, line) = lines
                    .next()
                    .ok_or_else(|| parse_err(2 + block * n + u, "unexpected end of file".into()))?;
                let line = line.map_err(|e| Error::io(path, e))?;
                let mut tokens = line.split_whitespace();
                let id: u64 = tokens
                    .next()
                    .ok_or_else(|| parse_err(idx + 1, "empty row".into()))?
                    .parse()
                    .map_err(|e| parse_err(idx + 1, format!("bad node id: {e}")))?;
                if block == 0 {
                    ids.push(id);
                } else if ids[u] != id {
                    return Err(parse_err(
                        idx + 1,
                        format!("target row id {id} does not match source row id {}", ids[u]),
                    ));
                }
                let dst = if block == 0 { &mut source } else { &mut target };
                let before = dst.len();
                for tok in tokens {
                    dst.push(
                        tok.parse::<f64>()
                            .map_err(|e| parse_err(idx + 1, format!("bad value {tok:?}: {e}")))?,
                    );
                }
                if dst.len() - before != dim {
                    return Err(parse_err(
                        idx + 1,
                        format!("expected {dim} values, got {}", dst.len() - before),
                    ));
                }
            }
        }
        for (idx, line) in lines {
            let line = line.map_err(|e| Error::io(path, e))?;
            if !line.trim().is_empty() {
                return Err(parse_err(idx + 1, "trailing content".into()));
            }
        }
        Ok((EmbeddingPair::from_rows(n, dim, source, target, None)?, ids))
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<(EmbeddingPair, Vec<u64>)> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        EmbeddingPair::read(file, path)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `S = U √Σ`, `T = V √Σ`.
pub fn extract_embeddings(svd: &SvdResult, config: Option<EmbedConfig>) -> EmbeddingPair {
    let dim = svd.rank();
    let n = svd.u.nrows();
    let roots: Vec<f64> = svd.sigma.iter().map(|s| s.sqrt()).collect();
    let scale = |m: &DMatrix<f64>| -> Vec<f64> {
        let mut out = Vec::with_capacity(m.nrows() * dim);
        for r in 0..m.nrows() {
            for k in 0..dim {
                out.push(m[(r, k)] * roots[k]);
            }
        }
        out
    };
    EmbeddingPair {
        n,
        dim,
        source: scale(&svd.u),
        target: scale(&svd.v),
        config,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(dim: usize) -> SvdParams {
        SvdParams {
            dim,
            oversample: 10,
            power_iters: 10,
            seed: 7,
        }
    }

    #[test]
    fn diagonal() {
        let m = CsrMatrix::from_triplets(3, 3, vec![(0, 0, 3.0), (1, 1, 2.0), (2, 2, 1.0)]).unwrap();
        let svd = randomized_svd(&m, &params(2)).unwrap();
        assert!((svd.sigma[0] - 3.0).abs() < 1e-12);
        assert!((svd.sigma[1] - 2.0).abs() < 1e-12);
        let err = (m.to_dense() - svd.reconstruct()).norm();
        assert!((err - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_one_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a: Vec<f64> = (0..50).map(|_| StandardNormal.sample(&mut rng)).collect();
        let b: Vec<f64> = (0..50).map(|_| StandardNormal.sample(&mut rng)).collect();
        let dense = DMatrix::from_fn(50, 50, |r, c| a[r] * b[c]);
        let m = CsrMatrix::from_dense(&dense);
        let svd = randomized_svd(&m, &params(1)).unwrap();
        assert!((dense - svd.reconstruct()).norm() <= 1e-8);
    }

    #[test]
    fn zero_matrix() {
        let m = CsrMatrix::from_triplets(4, 4, vec![]).unwrap();
        let svd = randomized_svd(&m, &params(2)).unwrap();
        assert_eq!(svd.sigma, vec![0.0, 0.0]);
        let emb = extract_embeddings(&svd, None);
        assert!((0..4).all(|u| (0..4).all(|v| emb.score(u, v).unwrap() == 0.0)));
        let gram = svd.u.transpose() * &svd.u;
        assert!((gram - DMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn dimension_checks() {
        let m = CsrMatrix::from_triplets(3, 3, vec![(0, 0, 1.0)]).unwrap();
        assert!(randomized_svd(&m, &params(4)).is_err());
        assert!(randomized_svd(&m, &params(0)).is_err());
        assert!(randomized_svd(&m, &params(3)).is_ok());
    }

    #[test]
    fn sign_convention() {
        let m = CsrMatrix::from_triplets(2, 2, vec![(0, 0, -2.0), (1, 1, 1.0)]).unwrap();
        let svd = randomized_svd(&m, &params(2)).unwrap();
        for k in 0..2 {
            let col = svd.u.column(k);
            let pivot = col.iter().copied().fold(0.0f64, |b, x| if x.abs() > b.abs() { x } else { b });
            assert!(pivot > 0.0);
        }
        assert!((m.to_dense() - svd.reconstruct()).norm() < 1e-12);
    }

    #[test]
    fn embedding_scaling() {
        let svd = SvdResult {
            u: DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]),
            sigma: vec![4.0, 1.0],
            v: DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
        };
        let emb = extract_embeddings(&svd, None);
        assert_eq!(emb.source_row(0), &[2.0, 0.0]);
        assert_eq!(emb.source_row(1), &[0.0, 1.0]);
        assert_eq!(emb.target_row(0), &[0.0, 1.0]);
        assert_eq!(emb.target_row(1), &[2.0, 0.0]);
        assert_eq!(emb.score(0, 1).unwrap(), 4.0);
        assert_eq!(emb.score(1, 0).unwrap(), 1.0);
        assert!(emb.score(2, 0).is_err());
    }

    #[test]
    fn file_round_trip_is_exact() {
        let svd = randomized_svd(
            &CsrMatrix::from_triplets(3, 3, vec![(0, 1, 0.3), (1, 2, 1.7), (2, 0, 1e-9), (1, 1, 2.5)])
                .unwrap(),
            &params(2),
        )
        .unwrap();
        let emb = extract_embeddings(&svd, None);
        let ids = [10, 20, 30];
        let mut buf = Vec::new();
        emb.write(&ids, &mut buf).unwrap();
        let (back, back_ids) = EmbeddingPair::read(buf.as_slice(), Path::new("<mem>")).unwrap();
        assert_eq!(back_ids, ids);
        assert_eq!(back, emb);
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("3 2"));
        assert_eq!(text.lines().count(), 7);
    }

    #[test]
    fn malformed_embedding_files() {
        let read = |s: &str| EmbeddingPair::read(s.as_bytes(), Path::new("<mem>"));
        assert!(read("").is_err());
        assert!(read("2 1\n0 1.0\n1 2.0\n0 1.0\n").is_err());
        assert!(read("1 2\n0 1.0\n0 1.0 2.0\n").is_err());
        assert!(read("1 1\n0 1.0\n5 1.0\n").is_err());
        assert!(read("1 1\n0 1.0\n0 1.0\nextra\n").is_err());
        assert!(read("1 1\n0 1.0\n0 1.0\n").is_ok());
    }
}
