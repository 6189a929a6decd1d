//! Dense symmetric eigendecomposition and low-rank reconstruction.
//!
//! The solver reduces the matrix to tridiagonal form with Householder
//! reflections, accumulates the orthogonal factor, and diagonalizes the
//! tridiagonal matrix with the implicit-shift QL method. Eigenvectors are
//! kept as rows during the QL sweeps so each Givens rotation touches two
//! contiguous slices.

use ndarray::{s, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default relative symmetry tolerance for [`eig_sym`].
pub const DEFAULT_TOL: f64 = 1e-10;

const MAX_QL_ITERATIONS: usize = 60;

/// Eigenvalues sorted descending; column `j` of `vectors` pairs with `values[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: Array2<f64>,
}

impl EigenSystem {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Eigenvalues in ascending order.
    pub fn ascending_values(&self) -> Vec<f64> {
        self.values.iter().rev().copied().collect()
    }

    fn selected(&self, r: usize, from: Selection) -> Result<std::ops::Range<usize>> {
        let n = self.n();
        if r < 1 || r > n {
            return Err(Error::OutOfRange {
                what: "r",
                value: r,
                min: 1,
                max: n,
            });
        }
        Ok(match from {
            Selection::Top => 0..r,
            Selection::Bottom => n - r..n,
        })
    }
}

/// Which end of the spectrum a truncated reconstruction keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selection {
    Top,
    Bottom,
}

/// Full eigendecomposition of a real symmetric matrix.
///
/// `tol` bounds the accepted asymmetry relative to the largest entry; the
/// matrix is symmetrized exactly before solving. Each eigenvector is signed so
/// that its largest-magnitude entry is positive.
pub fn eig_sym(m: &Array2<f64>, tol: f64) -> Result<EigenSystem> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::InvalidMatrix(format!(
            "expected a square matrix, got {}x{}",
            n,
            m.ncols()
        )));
    }
    let mut scale = 0.0f64;
    for ((i, j), &v) in m.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFinite(i, j));
        }
        scale = scale.max(v.abs());
    }
    if n == 0 {
        return Ok(EigenSystem {
            values: Vec::new(),
            vectors: Array2::zeros((0, 0)),
        });
    }

    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let (x, y) = (m[[i, j]], m[[j, i]]);
            if (x - y).abs() > tol * scale.max(1.0) {
                return Err(Error::InvalidMatrix(format!(
                    "not symmetric at ({i}, {j}): {x} vs {y}"
                )));
            }
            a[i * n + j] = 0.5 * (x + y);
        }
    }

    let (mut d, mut e, mut zt) = tridiagonalize(&mut a, n);
    tql(&mut d, &mut e, &mut zt, n)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| d[y].total_cmp(&d[x]));
    let values = order.iter().map(|&i| d[i]).collect();
    let mut vectors = Array2::zeros((n, n));
    for (col, &src) in order.iter().enumerate() {
        let row = &zt[src * n..(src + 1) * n];
        let mut pivot = 0;
        for (i, v) in row.iter().enumerate() {
            if v.abs() > row[pivot].abs() {
                pivot = i;
            }
        }
        let sign = if row[pivot] < 0.0 { -1.0 } else { 1.0 };
        for (i, v) in row.iter().enumerate() {
            vectors[[i, col]] = sign * v;
        }
    }
    Ok(EigenSystem { values, vectors })
}

/// Householder reduction of the dense row-major matrix `a` to tridiagonal
/// form. Returns the diagonal, the subdiagonal (`e[i] = T[i+1][i]`,
/// `e[n-1] = 0`) and the transpose of the accumulated orthogonal factor.
fn tridiagonalize(a: &mut [f64], n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let mut betas = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut w = vec![0.0; n];

    for k in 0..n.saturating_sub(1) {
        d[k] = a[k * n + k];
        let lo = k + 1;
        let x0 = a[k * n + lo];
        let sigma: f64 = a[k * n + lo + 1..(k + 1) * n].iter().map(|v| v * v).sum();
        if sigma == 0.0 {
            e[k] = x0;
            continue;
        }
        let alpha = -x0.signum() * (x0 * x0 + sigma).sqrt();
        e[k] = alpha;
        a[k * n + lo] = x0 - alpha;
        let v0 = a[k * n + lo];
        let beta = 2.0 / (v0 * v0 + sigma);
        betas[k] = beta;

        let (head, tail) = a.split_at_mut(lo * n);
        let v = &head[k * n + lo..(k + 1) * n];
        let m = n - lo;
        // p = beta * B v
        for i in 0..m {
            let row = &tail[i * n + lo..(i + 1) * n];
            p[i] = beta * dot(row, v);
        }
        let kk = 0.5 * beta * dot(&p[..m], v);
        for i in 0..m {
            w[i] = p[i] - kk * v[i];
        }
        // B -= v w' + w v'
        for i in 0..m {
            let (vi, wi) = (v[i], w[i]);
            let row = &mut tail[i * n + lo..(i + 1) * n];
            for ((b, &vj), &wj) in row.iter_mut().zip(v).zip(&w[..m]) {
                *b -= vi * wj + wi * vj;
            }
        }
    }
    d[n - 1] = a[(n - 1) * n + n - 1];

    // Q = H_0 H_1 ... H_{n-2}, accumulated from the right end.
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        q[i * n + i] = 1.0;
    }
    let mut u = vec![0.0; n];
    for k in (0..n.saturating_sub(1)).rev() {
        let beta = betas[k];
        if beta == 0.0 {
            continue;
        }
        let lo = k + 1;
        let m = n - lo;
        let v = &a[k * n + lo..(k + 1) * n];
        let u = &mut u[..m];
        u.iter_mut().for_each(|x| *x = 0.0);
        for (i, &vi) in v.iter().enumerate() {
            let row = &q[(lo + i) * n + lo..(lo + i + 1) * n];
            for (uj, &qj) in u.iter_mut().zip(row) {
                *uj += vi * qj;
            }
        }
        for (i, &vi) in v.iter().enumerate() {
            let f = beta * vi;
            let row = &mut q[(lo + i) * n + lo..(lo + i + 1) * n];
            for (qj, &uj) in row.iter_mut().zip(u.iter()) {
                *qj -= f * uj;
            }
        }
    }

    let mut qt = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            qt[j * n + i] = q[i * n + j];
        }
    }
    (d, e, qt)
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Implicit-shift QL on the symmetric tridiagonal matrix `(d, e)`. Rotations
/// are applied to rows of `zt`, which on return holds the eigenvectors of the
/// original matrix as rows (unsorted, paired with `d`).
fn tql(d: &mut [f64], e: &mut [f64], zt: &mut [f64], n: usize) -> Result<()> {
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(Error::NonConvergence(l));
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    let (first, second) = zt.split_at_mut((i + 1) * n);
                    let zi = &mut first[i * n..];
                    let zi1 = &mut second[..n];
                    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                        let hb = *b;
                        *b = s * *a + c * hb;
                        *a = c * *a - s * hb;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// `sum_j lambda_j v_j v_j'` over the `r` largest (`Top`) or smallest
/// (`Bottom`) eigenpairs.
pub fn truncated_reconstruct(es: &EigenSystem, r: usize, from: Selection) -> Result<Array2<f64>> {
    let range = es.selected(r, from)?;
    Ok(partial_sum(es, range))
}

fn partial_sum(es: &EigenSystem, range: std::ops::Range<usize>) -> Array2<f64> {
    let v = es.vectors.slice(s![.., range.clone()]);
    let mut scaled = v.to_owned();
    for (mut col, &lambda) in scaled.axis_iter_mut(Axis(1)).zip(&es.values[range]) {
        col.mapv_inplace(|x| x * lambda);
    }
    scaled.dot(&v.t())
}

fn mean_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let total: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).sum();
    total / a.len() as f64
}

/// Mean absolute entrywise error of the rank-`r` reconstruction of `m`.
pub fn reconstruction_error(
    m: &Array2<f64>,
    es: &EigenSystem,
    r: usize,
    from: Selection,
) -> Result<f64> {
    if m.dim() != (es.n(), es.n()) {
        return Err(Error::InvalidMatrix(
            "matrix and eigensystem sizes differ".into(),
        ));
    }
    let approx = truncated_reconstruct(es, r, from)?;
    Ok(mean_abs_diff(m, &approx))
}

/// [`reconstruction_error`] for several ranks, sharing the partial sums.
/// Results are in the order of `ranks`.
pub fn reconstruction_errors(
    m: &Array2<f64>,
    es: &EigenSystem,
    ranks: &[usize],
    from: Selection,
) -> Result<Vec<f64>> {
    let n = es.n();
    if m.dim() != (n, n) {
        return Err(Error::InvalidMatrix(
            "matrix and eigensystem sizes differ".into(),
        ));
    }
    for &r in ranks {
        es.selected(r, from)?;
    }
    let mut sorted: Vec<usize> = ranks.to_vec();
    sorted.sort_unstable();
    sorted.dedup();

    let mut approx = Array2::zeros((n, n));
    let mut done = 0;
    let mut errors = std::collections::HashMap::new();
    for &r in &sorted {
        let range = match from {
            Selection::Top => done..r,
            Selection::Bottom => n - r..n - done,
        };
        if !range.is_empty() {
            approx += &partial_sum(es, range);
        }
        done = r;
        errors.insert(r, mean_abs_diff(m, &approx));
    }
    Ok(ranks.iter().map(|r| errors[r]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = Array2::zeros((n, n));
        for i in 0..n {
            for j in i..n {
                let v: f64 = rng.gen_range(-1.0..1.0);
                m[[i, j]] = v;
                m[[j, i]] = v;
            }
        }
        m
    }

    fn max_abs(a: &Array2<f64>) -> f64 {
        a.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    fn check_decomposition(m: &Array2<f64>, es: &EigenSystem, tol: f64) {
        let n = m.nrows();
        let v = &es.vectors;
        let vtv = v.t().dot(v) - Array2::<f64>::eye(n);
        assert!(max_abs(&vtv) < tol, "orthonormality {}", max_abs(&vtv));
        let lam = Array2::from_diag(&ndarray::Array1::from(es.values.clone()));
        let residual = m.dot(v) - v.dot(&lam);
        assert!(max_abs(&residual) < tol * max_abs(m).max(1.0));
        for w in es.values.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn identity_spectrum() {
        let es = eig_sym(&Array2::eye(3), DEFAULT_TOL).unwrap();
        assert_eq!(es.values, vec![1.0, 1.0, 1.0]);
        check_decomposition(&Array2::eye(3), &es, 1e-12);
    }

    #[test]
    fn centered_two_by_two() {
        let s = 0.5;
        let a = 0.25 * (1.0 - s);
        let m = array![[a, -a], [-a, a]];
        let es = eig_sym(&m, DEFAULT_TOL).unwrap();
        assert!((es.values[0] - 0.25).abs() < 1e-15);
        assert!(es.values[1].abs() < 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((es.vectors[[0, 1]].abs() - h).abs() < 1e-12);
        assert!((es.vectors[[0, 1]] - es.vectors[[1, 1]]).abs() < 1e-12);
    }

    #[test]
    fn random_reconstruction_and_trace() {
        for seed in 0..5 {
            let m = random_symmetric(20, seed);
            let es = eig_sym(&m, DEFAULT_TOL).unwrap();
            check_decomposition(&m, &es, 1e-8);
            let full = truncated_reconstruct(&es, 20, Selection::Top).unwrap();
            assert!(max_abs(&(&m - &full)) < 1e-8);
            let trace: f64 = m.diag().sum();
            assert!((es.values.iter().sum::<f64>() - trace).abs() < 1e-8 * 20.0);
            assert!(reconstruction_error(&m, &es, 20, Selection::Bottom).unwrap() < 1e-10);
        }
    }

    #[test]
    fn sign_convention_and_errors() {
        let m = random_symmetric(12, 9);
        let es = eig_sym(&m, DEFAULT_TOL).unwrap();
        for col in es.vectors.columns() {
            let piv = col
                .iter()
                .fold(0.0f64, |a, &v| if v.abs() > a.abs() { v } else { a });
            assert!(piv > 0.0);
        }
        let mut bad = m.clone();
        bad[[0, 1]] += 1e-3;
        assert!(matches!(
            eig_sym(&bad, DEFAULT_TOL),
            Err(Error::InvalidMatrix(_))
        ));
        bad[[0, 1]] = f64::NAN;
        assert!(matches!(
            eig_sym(&bad, DEFAULT_TOL),
            Err(Error::NonFinite(0, 1))
        ));
        assert!(truncated_reconstruct(&es, 0, Selection::Top).is_err());
        assert!(truncated_reconstruct(&es, 13, Selection::Top).is_err());
    }

    #[test]
    fn rank_one_top_reconstruction_is_exact() {
        let v = ndarray::arr1(&[1.0, -2.0, 0.5, 3.0]);
        let m = v
            .view()
            .insert_axis(Axis(1))
            .dot(&v.view().insert_axis(Axis(0)));
        let es = eig_sym(&m, DEFAULT_TOL).unwrap();
        let r1 = truncated_reconstruct(&es, 1, Selection::Top).unwrap();
        assert!(max_abs(&(&m - &r1)) < 1e-12);
    }

    #[test]
    fn psd_top_error_sweep_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let b = Array2::from_shape_fn((30, 30), |_| rng.gen_range(-1.0..1.0));
        let m = b.dot(&b.t());
        let es = eig_sym(&m, DEFAULT_TOL).unwrap();
        let ranks: Vec<usize> = (1..=30).collect();
        let errs = reconstruction_errors(&m, &es, &ranks, Selection::Top).unwrap();
        // Frobenius residual is monotone by construction; the mean absolute
        // residual must be checked directly.
        for (r, e) in ranks.iter().zip(&errs) {
            let direct = reconstruction_error(&m, &es, *r, Selection::Top).unwrap();
            assert!((direct - e).abs() < 1e-10);
        }
        assert!(errs[29] < 1e-10);
        let fro: Vec<f64> = ranks
            .iter()
            .map(|&r| {
                let d = &m - &truncated_reconstruct(&es, r, Selection::Top).unwrap();
                d.iter().map(|x| x * x).sum::<f64>()
            })
            .collect();
        for w in fro.windows(2) {
            assert!(w[1] <= w[0] + 1e-9);
        }
    }

    #[test]
    fn degenerate_eigenspaces_compare_by_projector() {
        // diag(2, 2, 1) rotated: the top eigenspace is two-dimensional.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = Array2::from_shape_fn((3, 3), |_| rng.gen_range(-1.0..1.0));
        let q = eig_sym(&(&b + &b.t()), DEFAULT_TOL).unwrap().vectors;
        let lam = Array2::from_diag(&ndarray::arr1(&[2.0, 2.0, 1.0]));
        let m = q.dot(&lam).dot(&q.t());
        let es = eig_sym(&m, DEFAULT_TOL).unwrap();
        let top = |v: &Array2<f64>| {
            let s = v.slice(s![.., 0..2]);
            s.dot(&s.t())
        };
        assert!(max_abs(&(top(&es.vectors) - top(&q))) < 1e-10);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
        #[test]
        fn eigen_invariants_hold(n in 1usize..200, seed in 0u64..1000) {
            let m = random_symmetric(n, seed);
            let es = eig_sym(&m, DEFAULT_TOL).unwrap();
            check_decomposition(&m, &es, 1e-8);
            let trace: f64 = m.diag().sum();
            proptest::prop_assert!((es.values.iter().sum::<f64>() - trace).abs() < 1e-8 * n as f64);
        }
    }
}
