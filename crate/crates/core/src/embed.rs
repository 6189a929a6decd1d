//! Spectral embeddings of the similarity graph.
//!
//! * L-embedding: eigenvectors of the combinatorial Laplacian `D - S` for the
//!   `k` smallest eigenvalues.
//! * K-embedding: `z_i = Lambda^{1/2} V_i'` from the eigendecomposition of
//!   `K = -1/2 J A J`, `A = 11' - I - S`. For `r = n`,
//!   `|z_i - z_l|^2 = 1 - S_il` whenever `K` is positive semidefinite; when it
//!   is not, every off-diagonal dissimilarity is shifted by `2 sigma` with
//!   `sigma = -lambda_min(K)` (Lingoes correction) and the distances become
//!   `1 - S_il + 2 sigma`.
//! * NormK: the K pipeline applied to `D^-1/2 S D^-1/2`.

use ndarray::{s, Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::corpus::{SimilarityMatrix, TermMatrix};
use crate::spectra::{eig_sym, EigenSystem, DEFAULT_TOL};
use crate::{Error, Result};

/// Eigenvalues above `-NEGATIVE_EIGEN_TOL` are treated as numerical zeros.
pub const NEGATIVE_EIGEN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EmbeddingKind {
    L,
    K,
    NormK,
    W,
}

impl std::fmt::Display for EmbeddingKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            EmbeddingKind::L => "L",
            EmbeddingKind::K => "K",
            EmbeddingKind::NormK => "NormK",
            EmbeddingKind::W => "W",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for EmbeddingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "L" => Ok(EmbeddingKind::L),
            "K" => Ok(EmbeddingKind::K),
            "NormK" => Ok(EmbeddingKind::NormK),
            "W" => Ok(EmbeddingKind::W),
            other => Err(Error::InvalidConfig(format!(
                "unknown embedding kind {other:?}"
            ))),
        }
    }
}

/// Row `i` of `coords` embeds document `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub kind: EmbeddingKind,
    pub coords: Array2<f64>,
    pub eigenvalues_used: Vec<f64>,
    pub lingoes_sigma: f64,
    pub source_dim: usize,
}

impl Embedding {
    pub fn n(&self) -> usize {
        self.coords.nrows()
    }

    pub fn dim(&self) -> usize {
        self.coords.ncols()
    }

    pub fn squared_distance(&self, i: usize, l: usize) -> f64 {
        self.coords
            .row(i)
            .iter()
            .zip(self.coords.row(l))
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    /// The term vectors themselves, as an embedding.
    pub fn from_terms(w: &TermMatrix) -> Self {
        Self {
            kind: EmbeddingKind::W,
            coords: w.rows().clone(),
            eigenvalues_used: Vec::new(),
            lingoes_sigma: 0.0,
            source_dim: w.n_docs(),
        }
    }
}

fn degrees(s: &SimilarityMatrix) -> Array1<f64> {
    s.matrix().sum_axis(ndarray::Axis(1))
}

/// Combinatorial Laplacian `L = D - S`.
pub fn laplacian(s: &SimilarityMatrix) -> Array2<f64> {
    let d = degrees(s);
    let mut l = -s.matrix();
    for (i, di) in d.iter().enumerate() {
        l[[i, i]] += di;
    }
    l
}

fn inv_sqrt_degrees(s: &SimilarityMatrix) -> Result<Array1<f64>> {
    let d = degrees(s);
    if let Some(i) = d.iter().position(|&v| v <= 0.0) {
        return Err(Error::IsolatedDocument(i));
    }
    Ok(d.mapv(|v| 1.0 / v.sqrt()))
}

/// `D^-1/2 S D^-1/2` with a zero diagonal.
pub fn normalized_similarity(s: &SimilarityMatrix) -> Result<Array2<f64>> {
    let inv = inv_sqrt_degrees(s)?;
    let n = s.n();
    let mut out = Array2::zeros((n, n));
    for i in 0..n {
        for l in 0..n {
            if i != l {
                out[[i, l]] = inv[i] * s.get(i, l) * inv[l];
            }
        }
    }
    Ok(out)
}

/// Normalized Laplacian `I - D^-1/2 S D^-1/2`.
pub fn normalized_laplacian(s: &SimilarityMatrix) -> Result<Array2<f64>> {
    let mut l = -normalized_similarity(s)?;
    for i in 0..s.n() {
        l[[i, i]] += 1.0;
    }
    Ok(l)
}

fn check_range(what: &'static str, value: usize, min: usize, max: usize) -> Result<()> {
    if value < min || value > max {
        return Err(Error::OutOfRange {
            what,
            value,
            min,
            max,
        });
    }
    Ok(())
}

/// Bottom-`k` eigenvectors of the Laplacian `l`, in ascending eigenvalue
/// order. With `drop_trivial` the smallest (constant) eigenvector is skipped
/// and the next `k` are used instead.
pub fn l_embedding(l: &Array2<f64>, k: usize, drop_trivial: bool) -> Result<Embedding> {
    let n = l.nrows();
    check_range("k", k, 2, if drop_trivial { n - 1 } else { n })?;
    let es = eig_sym(l, DEFAULT_TOL)?;
    l_embedding_from(&es, k, drop_trivial)
}

/// [`l_embedding`] from a precomputed Laplacian eigensystem.
pub fn l_embedding_from(es: &EigenSystem, k: usize, drop_trivial: bool) -> Result<Embedding> {
    let n = es.n();
    let skip = usize::from(drop_trivial);
    check_range("k", k, 2, n - skip)?;
    // values are descending; ascending position p lives at column n-1-p.
    let cols: Vec<usize> = (skip..skip + k).map(|p| n - 1 - p).collect();
    let mut coords = Array2::zeros((n, k));
    for (dst, &src) in cols.iter().enumerate() {
        coords.column_mut(dst).assign(&es.vectors.column(src));
    }
    Ok(Embedding {
        kind: EmbeddingKind::L,
        coords,
        eigenvalues_used: cols.iter().map(|&c| es.values[c]).collect(),
        lingoes_sigma: 0.0,
        source_dim: n,
    })
}

/// Dissimilarity matrix `A = 11' - I - S`.
pub fn dissimilarity_a(s: &Array2<f64>) -> Array2<f64> {
    let n = s.nrows();
    Array2::from_shape_fn((n, n), |(i, l)| if i == l { 0.0 } else { 1.0 - s[[i, l]] })
}

/// Double centering `K = -1/2 J A J`, `J = I - 11'/n`.
pub fn gram_k(a: &Array2<f64>) -> Array2<f64> {
    let n = a.nrows();
    let row_means = a.mean_axis(ndarray::Axis(1)).expect("non-empty");
    let col_means = a.mean_axis(ndarray::Axis(0)).expect("non-empty");
    let grand = row_means.sum() / n as f64;
    let mut k = Array2::zeros((n, n));
    for i in 0..n {
        for l in 0..n {
            k[[i, l]] = -0.5 * (a[[i, l]] - row_means[i] - col_means[l] + grand);
        }
    }
    // Exact symmetry for the eigensolver.
    for i in 0..n {
        for l in (i + 1)..n {
            let m = 0.5 * (k[[i, l]] + k[[l, i]]);
            k[[i, l]] = m;
            k[[l, i]] = m;
        }
    }
    k
}

/// Lingoes correction: if `lambda_min < -NEGATIVE_EIGEN_TOL`, adds
/// `2 sigma` (`sigma = -lambda_min`) to every off-diagonal entry of `a`.
pub fn lingoes_correct(a: &Array2<f64>, lambda_min: f64) -> (Array2<f64>, f64) {
    if lambda_min >= -NEGATIVE_EIGEN_TOL {
        return (a.clone(), 0.0);
    }
    let sigma = -lambda_min;
    let mut out = a.clone();
    for ((i, l), v) in out.indexed_iter_mut() {
        if i != l {
            *v += 2.0 * sigma;
        }
    }
    (out, sigma)
}

/// Eigendecomposition of the (corrected) Gram matrix behind a K-type
/// embedding. Compute it once and cut embeddings of several ranks from it.
#[derive(Debug, Clone)]
pub struct GramSpectrum {
    pub kind: EmbeddingKind,
    /// The Gram matrix that was decomposed, after any correction.
    pub gram: Array2<f64>,
    pub eigen: EigenSystem,
    pub lingoes_sigma: f64,
}

impl GramSpectrum {
    fn build(kind: EmbeddingKind, s: &Array2<f64>) -> Result<Self> {
        let a = dissimilarity_a(s);
        let k = gram_k(&a);
        let es = eig_sym(&k, DEFAULT_TOL)?;
        let lambda_min = *es.values.last().expect("n >= 1");
        let (a2, sigma) = lingoes_correct(&a, lambda_min);
        if sigma == 0.0 {
            return Ok(Self {
                kind,
                gram: k,
                eigen: es,
                lingoes_sigma: 0.0,
            });
        }
        let k2 = gram_k(&a2);
        let es2 = eig_sym(&k2, DEFAULT_TOL)?;
        Ok(Self {
            kind,
            gram: k2,
            eigen: es2,
            lingoes_sigma: sigma,
        })
    }

    /// Spectrum of `K` built from `S`.
    pub fn from_similarity(s: &SimilarityMatrix) -> Result<Self> {
        Self::build(EmbeddingKind::K, s.matrix())
    }

    /// Spectrum of the normalized variant built from `D^-1/2 S D^-1/2`.
    pub fn normalized(s: &SimilarityMatrix) -> Result<Self> {
        Self::build(EmbeddingKind::NormK, &normalized_similarity(s)?)
    }

    /// Coordinates from the top-`r` eigenpairs; eigenvalues that are
    /// numerically negative are clamped to zero.
    pub fn embedding(&self, r: usize) -> Result<Embedding> {
        let n = self.eigen.n();
        check_range("r", r, 1, n)?;
        let used: Vec<f64> = self.eigen.values[..r].iter().map(|&v| v.max(0.0)).collect();
        let mut coords = self.eigen.vectors.slice(s![.., 0..r]).to_owned();
        for (mut col, &lam) in coords.columns_mut().into_iter().zip(&used) {
            let f = lam.sqrt();
            col.mapv_inplace(|x| x * f);
        }
        Ok(Embedding {
            kind: self.kind,
            coords,
            eigenvalues_used: used,
            lingoes_sigma: self.lingoes_sigma,
            source_dim: n,
        })
    }
}

/// K-embedding of rank `r`.
pub fn k_embedding(s: &SimilarityMatrix, r: usize) -> Result<Embedding> {
    check_range("r", r, 1, s.n())?;
    GramSpectrum::from_similarity(s)?.embedding(r)
}

/// Normalized K-embedding of rank `r`.
pub fn k_embedding_normalized(s: &SimilarityMatrix, r: usize) -> Result<Embedding> {
    check_range("r", r, 1, s.n())?;
    GramSpectrum::normalized(s)?.embedding(r)
}

/// Mean over pairs `i < l` of `|(1 - S_il) - |z_i - z_l|^2|`.
pub fn distance_reconstruction_error(s: &Array2<f64>, emb: &Embedding) -> f64 {
    let n = emb.n();
    let mut total = 0.0;
    for i in 0..n {
        for l in (i + 1)..n {
            total += ((1.0 - s[[i, l]]) - emb.squared_distance(i, l)).abs();
        }
    }
    total / (n * (n - 1) / 2) as f64
}
