//! Lloyd k-means, spherical k-means and the objective identities that tie
//! k-means on the K-embedding to the similarity graph.

use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::SimilarityMatrix;
use crate::{Error, Result};

/// Generator behind every seeded initialization.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Init {
    #[serde(rename = "kmeans++")]
    KMeansPlusPlus,
    Random,
}

impl std::str::FromStr for Init {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kmeans++" | "k-means++" | "kmeanspp" => Ok(Init::KMeansPlusPlus),
            "random" => Ok(Init::Random),
            other => Err(Error::InvalidConfig(format!("unknown init {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub k: usize,
    pub init: Init,
    pub seed: u64,
    pub max_iter: usize,
    /// Convergence threshold on the largest squared centroid movement.
    pub tol: f64,
}

impl KMeansConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            init: Init::KMeansPlusPlus,
            seed: 0,
            max_iter: 300,
            tol: 1e-9,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.k < 1 || self.k > n {
            return Err(Error::OutOfRange {
                what: "k",
                value: self.k,
                min: 1,
                max: n,
            });
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// A hard partition of `n` documents into `k` non-empty clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub labels: Vec<usize>,
    pub k: usize,
    /// Within-cluster sum of squares for k-means (minimized), total cosine
    /// to the centroid directions for spherical k-means (maximized).
    pub objective: f64,
    pub iterations: usize,
    pub seed: u64,
    /// Objective after every iteration.
    pub trace: Vec<f64>,
}

fn sq_dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// k-means++ seeding: the first centroid uniformly, each further one with
/// probability proportional to the squared distance to the nearest chosen
/// centroid. When all remaining distances are zero a uniform point is taken.
pub fn kmeans_pp_init<R: Rng>(x: ArrayView2<f64>, k: usize, rng: &mut R) -> Array2<f64> {
    let n = x.nrows();
    let mut centroids = Array2::zeros((k, x.ncols()));
    let first = rng.gen_range(0..n);
    centroids.row_mut(0).assign(&x.row(first));
    let mut nearest: Vec<f64> = (0..n).map(|i| sq_dist(x.row(i), x.row(first))).collect();
    for c in 1..k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in nearest.iter().enumerate() {
                if target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            // Guard against rounding landing on a zero-weight tail point.
            while nearest[chosen] == 0.0 && chosen > 0 {
                chosen -= 1;
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        centroids.row_mut(c).assign(&x.row(pick));
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(sq_dist(x.row(i), x.row(pick)));
        }
    }
    centroids
}

/// `k` distinct rows chosen uniformly at random.
fn random_init<R: Rng>(x: ArrayView2<f64>, k: usize, rng: &mut R) -> Array2<f64> {
    let picks = rand::seq::index::sample(rng, x.nrows(), k);
    let mut centroids = Array2::zeros((k, x.ncols()));
    for (c, i) in picks.iter().enumerate() {
        centroids.row_mut(c).assign(&x.row(i));
    }
    centroids
}

fn initial_centroids(x: ArrayView2<f64>, cfg: &KMeansConfig) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    match cfg.init {
        Init::KMeansPlusPlus => kmeans_pp_init(x, cfg.k, &mut rng),
        Init::Random => random_init(x, cfg.k, &mut rng),
    }
}

/// Index of the best-scoring centroid; ties go to the lowest index.
fn argbest(scores: impl Iterator<Item = f64>, better: impl Fn(f64, f64) -> bool) -> (usize, f64) {
    let mut best = (0, f64::NAN);
    for (j, s) in scores.enumerate() {
        if j == 0 || better(s, best.1) {
            best = (j, s);
        }
    }
    best
}

fn means(x: ArrayView2<f64>, labels: &[usize], k: usize) -> (Array2<f64>, Vec<usize>) {
    let mut sums = Array2::zeros((k, x.ncols()));
    let mut sizes = vec![0usize; k];
    for (i, &c) in labels.iter().enumerate() {
        sizes[c] += 1;
        let mut row = sums.row_mut(c);
        row += &x.row(i);
    }
    for (c, &size) in sizes.iter().enumerate() {
        if size > 0 {
            sums.row_mut(c).mapv_inplace(|v| v / size as f64);
        }
    }
    (sums, sizes)
}

/// Fills empty clusters by moving the point farthest from its centroid
/// (taken from a cluster with at least two members) into a new singleton.
/// `badness[i]` ranks how poorly point `i` fits; higher is worse.
fn repair_empty(labels: &mut [usize], sizes: &mut [usize], badness: &mut [f64]) {
    for empty in 0..sizes.len() {
        if sizes[empty] != 0 {
            continue;
        }
        let mut pick: Option<usize> = None;
        for i in 0..labels.len() {
            if sizes[labels[i]] < 2 {
                continue;
            }
            if pick.is_none_or(|p| badness[i] > badness[p]) {
                pick = Some(i);
            }
        }
        let i = pick.expect("k <= n leaves a cluster with two members");
        sizes[labels[i]] -= 1;
        labels[i] = empty;
        sizes[empty] = 1;
        badness[i] = f64::NEG_INFINITY;
    }
}

/// Lloyd's algorithm. The objective is the within-cluster sum of squared
/// distances to the cluster means and never increases between iterations.
pub fn kmeans(x: ArrayView2<f64>, cfg: &KMeansConfig) -> Result<Clustering> {
    let n = x.nrows();
    cfg.validate(n)?;
    let k = cfg.k;
    let mut centroids = initial_centroids(x, cfg);
    let mut labels = vec![usize::MAX; n];
    let mut trace: Vec<f64> = Vec::new();
    let mut iterations = 0;

    while iterations < cfg.max_iter {
        iterations += 1;
        let mut badness = vec![0.0; n];
        let mut changed = false;
        for i in 0..n {
            let (j, d) = argbest(
                centroids.rows().into_iter().map(|c| sq_dist(x.row(i), c)),
                |a, b| a < b,
            );
            changed |= labels[i] != j;
            labels[i] = j;
            badness[i] = d;
        }
        let mut sizes = vec![0usize; k];
        for &c in &labels {
            sizes[c] += 1;
        }
        repair_empty(&mut labels, &mut sizes, &mut badness);

        let (new_centroids, _) = means(x, &labels, k);
        let shift = new_centroids
            .rows()
            .into_iter()
            .zip(centroids.rows())
            .map(|(a, b)| sq_dist(a, b))
            .fold(0.0, f64::max);
        centroids = new_centroids;
        let q = centroid_objective(x, &labels, &centroids);
        if let Some(&prev) = trace.last() {
            debug_assert!(
                q <= prev + 1e-9 * prev.abs().max(1.0),
                "Lloyd objective rose"
            );
        }
        trace.push(q);
        if shift < cfg.tol || !changed {
            break;
        }
    }
    Ok(Clustering {
        labels,
        k,
        objective: *trace.last().expect("at least one iteration"),
        iterations,
        seed: cfg.seed,
        trace,
    })
}

fn centroid_objective(x: ArrayView2<f64>, labels: &[usize], centroids: &Array2<f64>) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(i, &c)| sq_dist(x.row(i), centroids.row(c)))
        .sum()
}

fn unit_rows(x: ArrayView2<f64>) -> Result<Array2<f64>> {
    let mut out = x.to_owned();
    for (i, mut row) in out.rows_mut().into_iter().enumerate() {
        let norm = row.dot(&row).sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroVector(i));
        }
        row.mapv_inplace(|v| v / norm);
    }
    Ok(out)
}

/// Spherical k-means: rows are projected onto the unit sphere, points join
/// the centroid direction with the largest cosine, and each centroid is the
/// normalized mean of its members. The objective (total cosine) never
/// decreases between iterations.
pub fn spherical_kmeans(x: ArrayView2<f64>, cfg: &KMeansConfig) -> Result<Clustering> {
    let n = x.nrows();
    cfg.validate(n)?;
    let k = cfg.k;
    let u = unit_rows(x)?;
    let mut centroids = initial_centroids(u.view(), cfg);
    let mut labels = vec![usize::MAX; n];
    let mut trace: Vec<f64> = Vec::new();
    let mut iterations = 0;

    while iterations < cfg.max_iter {
        iterations += 1;
        let mut badness = vec![0.0; n];
        let mut changed = false;
        for i in 0..n {
            let (j, cos) = argbest(
                centroids.rows().into_iter().map(|c| u.row(i).dot(&c)),
                |a, b| a > b,
            );
            changed |= labels[i] != j;
            labels[i] = j;
            badness[i] = -cos;
        }
        let mut sizes = vec![0usize; k];
        for &c in &labels {
            sizes[c] += 1;
        }
        repair_empty(&mut labels, &mut sizes, &mut badness);

        let (mut new_centroids, _) = means(u.view(), &labels, k);
        for (c, mut row) in new_centroids.rows_mut().into_iter().enumerate() {
            let norm = row.dot(&row).sqrt();
            if norm > 0.0 {
                row.mapv_inplace(|v| v / norm);
            } else {
                // Members cancel out exactly; keep the previous direction.
                row.assign(&centroids.row(c));
            }
        }
        let shift = new_centroids
            .rows()
            .into_iter()
            .zip(centroids.rows())
            .map(|(a, b)| sq_dist(a, b))
            .fold(0.0, f64::max);
        centroids = new_centroids;
        let obj: f64 = labels
            .iter()
            .enumerate()
            .map(|(i, &c)| u.row(i).dot(&centroids.row(c)))
            .sum();
        if let Some(&prev) = trace.last() {
            debug_assert!(
                obj >= prev - 1e-9 * prev.abs().max(1.0),
                "spherical objective fell"
            );
        }
        trace.push(obj);
        if shift < cfg.tol || !changed {
            break;
        }
    }
    Ok(Clustering {
        labels,
        k,
        objective: *trace.last().expect("at least one iteration"),
        iterations,
        seed: cfg.seed,
        trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Clusterer {
    KMeans,
    Spherical,
}

impl std::str::FromStr for Clusterer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kmeans" => Ok(Clusterer::KMeans),
            "spherical" => Ok(Clusterer::Spherical),
            other => Err(Error::InvalidConfig(format!("unknown clusterer {other:?}"))),
        }
    }
}

impl Clusterer {
    pub fn run(self, x: ArrayView2<f64>, cfg: &KMeansConfig) -> Result<Clustering> {
        match self {
            Clusterer::KMeans => kmeans(x, cfg),
            Clusterer::Spherical => spherical_kmeans(x, cfg),
        }
    }

    /// True when `a` is a strictly better objective value than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Clusterer::KMeans => a < b,
            Clusterer::Spherical => a > b,
        }
    }
}

/// Runs `restarts` independent clusterings with seeds `cfg.seed + i` and
/// returns the index of the best run (ties go to the smaller seed) together
/// with all runs in seed order.
pub fn best_of_restarts(
    clusterer: Clusterer,
    x: ArrayView2<f64>,
    cfg: &KMeansConfig,
    restarts: usize,
) -> Result<(usize, Vec<Clustering>)> {
    if restarts < 1 {
        return Err(Error::InvalidConfig("restarts must be at least 1".into()));
    }
    let runs: Vec<Clustering> = (0..restarts as u64)
        .into_par_iter()
        .map(|i| {
            let cfg = KMeansConfig {
                seed: cfg.seed.wrapping_add(i),
                ..cfg.clone()
            };
            clusterer.run(x, &cfg)
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, run) in runs.iter().enumerate().skip(1) {
        if clusterer.better(run.objective, runs[best].objective) {
            best = i;
        }
    }
    Ok((best, runs))
}

/// Members of each cluster; fails if any label in `0..k` is unused.
fn cluster_members(labels: &[usize]) -> Result<Vec<Vec<usize>>> {
    let k = labels.iter().max().map_or(0, |&m| m + 1);
    let mut members = vec![Vec::new(); k];
    for (i, &c) in labels.iter().enumerate() {
        members[c].push(i);
    }
    if let Some(j) = members.iter().position(Vec::is_empty) {
        return Err(Error::EmptyCluster(j));
    }
    Ok(members)
}

/// Centroid form of the k-means objective, `sum_j sum_{i in C_j} |z_i - mu_j|^2`.
pub fn kmeans_objective(x: ArrayView2<f64>, labels: &[usize]) -> Result<f64> {
    if labels.len() != x.nrows() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: x.nrows(),
        });
    }
    let members = cluster_members(labels)?;
    let (centroids, _) = means(x, labels, members.len());
    Ok(centroid_objective(x, labels, &centroids))
}

/// Pairwise form `sum_j 1/(2 n_j) sum_{i, l in C_j} |z_i - z_l|^2`.
pub fn kmeans_objective_pairwise(x: ArrayView2<f64>, labels: &[usize]) -> Result<f64> {
    if labels.len() != x.nrows() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: x.nrows(),
        });
    }
    let members = cluster_members(labels)?;
    let mut q = 0.0;
    for m in &members {
        let mut sum = 0.0;
        for &i in m {
            for &l in m {
                sum += sq_dist(x.row(i), x.row(l));
            }
        }
        q += sum / (2.0 * m.len() as f64);
    }
    Ok(q)
}

/// `sum_j 1/(2 n_j) sum_{i != l in C_j} S_il`, the clustering-dependent part
/// of the K-embedding k-means objective `(n - k)/2 - this`.
pub fn similarity_objective(s: &SimilarityMatrix, labels: &[usize]) -> Result<f64> {
    if labels.len() != s.n() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: s.n(),
        });
    }
    let members = cluster_members(labels)?;
    let mut total = 0.0;
    for m in &members {
        let mut sum = 0.0;
        for &i in m {
            for &l in m {
                if i != l {
                    sum += s.get(i, l);
                }
            }
        }
        total += sum / (2.0 * m.len() as f64);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    /// Every labelling of `n` points into exactly `k` non-empty clusters,
    /// as restricted growth strings.
    fn partitions(n: usize, k: usize) -> Vec<Vec<usize>> {
        fn rec(
            prefix: &mut Vec<usize>,
            used: usize,
            n: usize,
            k: usize,
            out: &mut Vec<Vec<usize>>,
        ) {
            if prefix.len() == n {
                if used == k {
                    out.push(prefix.clone());
                }
                return;
            }
            if used + (n - prefix.len()) < k {
                return;
            }
            for c in 0..=used.min(k - 1) {
                prefix.push(c);
                rec(prefix, used.max(c + 1), n, k, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        rec(&mut Vec::new(), 0, n, k, &mut out);
        out
    }

    fn planted(seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((8, 2), |(i, _)| {
            let center = if i < 4 { 0.0 } else { 5.0 };
            center + rng.gen_range(-1.0..1.0)
        })
    }

    #[test]
    fn partition_counts_match_stirling_numbers() {
        assert_eq!(partitions(10, 2).len(), 511);
        assert_eq!(partitions(10, 3).len(), 9330);
    }

    #[test]
    fn separable_pairs() {
        let x = array![[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]];
        let c = kmeans(x.view(), &KMeansConfig::new(2)).unwrap();
        assert_eq!(c.labels[0], c.labels[1]);
        assert_eq!(c.labels[2], c.labels[3]);
        assert_ne!(c.labels[0], c.labels[2]);
        // Each pair at distance 1 contributes 1/2.
        assert!((c.objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn k_equals_n_gives_zero() {
        let x = planted(1);
        let c = kmeans(x.view(), &KMeansConfig::new(8)).unwrap();
        assert_eq!(c.objective, 0.0);
        let mut seen = c.labels.clone();
        seen.sort();
        assert_eq!(seen, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn invalid_inputs() {
        let x = planted(1);
        assert!(matches!(
            kmeans(x.view(), &KMeansConfig::new(9)),
            Err(Error::OutOfRange { .. })
        ));
        let cfg = KMeansConfig {
            max_iter: 0,
            ..KMeansConfig::new(2)
        };
        assert!(matches!(
            kmeans(x.view(), &cfg),
            Err(Error::InvalidConfig(_))
        ));
        let mut z = x.clone();
        z.row_mut(3).fill(0.0);
        assert!(matches!(
            spherical_kmeans(z.view(), &KMeansConfig::new(2)),
            Err(Error::ZeroVector(3))
        ));
    }

    #[test]
    fn lloyd_matches_exhaustive_minimum() {
        for seed in 0..10 {
            let x = planted(seed);
            let best = partitions(8, 2)
                .iter()
                .map(|p| kmeans_objective(x.view(), p).unwrap())
                .fold(f64::INFINITY, f64::min);
            let (b, runs) =
                best_of_restarts(Clusterer::KMeans, x.view(), &KMeansConfig::new(2), 5).unwrap();
            assert!((runs[b].objective - best).abs() < 1e-9);
            for run in &runs {
                for w in run.trace.windows(2) {
                    assert!(w[1] <= w[0] + 1e-12);
                }
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let x = planted(3);
        for init in [Init::KMeansPlusPlus, Init::Random] {
            let cfg = KMeansConfig {
                init,
                seed: 17,
                ..KMeansConfig::new(3)
            };
            assert_eq!(
                kmeans(x.view(), &cfg).unwrap(),
                kmeans(x.view(), &cfg).unwrap()
            );
        }
    }

    #[test]
    fn empty_clusters_are_repaired() {
        // All points identical except one: random init will hit duplicates.
        let x = array![[1.0], [1.0], [1.0], [1.0], [2.0]];
        for seed in 0..20 {
            let cfg = KMeansConfig {
                init: Init::Random,
                seed,
                ..KMeansConfig::new(3)
            };
            let c = kmeans(x.view(), &cfg).unwrap();
            for j in 0..3 {
                assert!(c.labels.contains(&j));
            }
        }
    }

    #[test]
    fn kmeanspp_edge_cases() {
        let x = planted(4);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = kmeans_pp_init(x.view(), 1, &mut rng);
        assert!(x.rows().into_iter().any(|r| r == c.row(0)));
        let dup = Array2::from_elem((6, 3), 2.5);
        let c = kmeans_pp_init(dup.view(), 4, &mut rng);
        assert!(c.iter().all(|&v| v == 2.5));
    }

    #[test]
    fn kmeanspp_spreads_over_planted_clusters() {
        // Four tight, well-separated clusters.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let centers = [[0.0, 0.0], [20.0, 0.0], [0.0, 20.0], [20.0, 20.0]];
        let x = Array2::from_shape_fn((40, 2), |(i, d)| {
            centers[i / 10][d] + rng.gen_range(-0.5..0.5)
        });
        let mut hits = 0;
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let c = kmeans_pp_init(x.view(), 4, &mut rng);
            let mut owners: Vec<usize> = c
                .rows()
                .into_iter()
                .map(|r| {
                    (0..4)
                        .min_by(|&a, &b| {
                            let da =
                                (r[0] - centers[a][0]).powi(2) + (r[1] - centers[a][1]).powi(2);
                            let db =
                                (r[0] - centers[b][0]).powi(2) + (r[1] - centers[b][1]).powi(2);
                            da.total_cmp(&db)
                        })
                        .unwrap()
                })
                .collect();
            owners.sort();
            owners.dedup();
            hits += usize::from(owners.len() == 4);
        }
        assert!(hits >= 90, "{hits}");
    }

    #[test]
    fn spherical_examples() {
        let x = array![[1.0, 0.0], [2.0, 0.0], [0.0, 3.0], [0.0, 0.5]];
        let c = spherical_kmeans(x.view(), &KMeansConfig::new(2)).unwrap();
        assert_eq!(c.labels[0], c.labels[1]);
        assert_eq!(c.labels[2], c.labels[3]);
        assert_ne!(c.labels[0], c.labels[2]);
        assert!((c.objective - 4.0).abs() < 1e-12);

        let same = Array2::from_elem((5, 3), 0.7);
        let c = spherical_kmeans(same.view(), &KMeansConfig::new(1)).unwrap();
        assert!((c.objective - 5.0).abs() < 1e-12);
    }

    #[test]
    fn spherical_matches_exhaustive_best() {
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = Array2::from_shape_fn((8, 3), |(i, d)| {
                let base = if i < 4 {
                    [1.0, 0.2, 0.0]
                } else {
                    [0.0, 0.3, 1.0]
                };
                base[d] + rng.gen_range(0.0..0.4)
            });
            let u = unit_rows(x.view()).unwrap();
            let cos_obj = |p: &Vec<usize>| -> f64 {
                let (m, _) = means(u.view(), p, 2);
                (0..2)
                    .map(|c| {
                        m.row(c).dot(&m.row(c)).sqrt()
                            * p.iter().filter(|&&l| l == c).count() as f64
                    })
                    .sum()
            };
            let best = partitions(8, 2)
                .iter()
                .map(cos_obj)
                .fold(f64::NEG_INFINITY, f64::max);
            let (b, runs) =
                best_of_restarts(Clusterer::Spherical, x.view(), &KMeansConfig::new(2), 5).unwrap();
            assert!(
                (runs[b].objective - best).abs() < 1e-9,
                "{} vs {best}",
                runs[b].objective
            );
            for run in &runs {
                for w in run.trace.windows(2) {
                    assert!(w[1] >= w[0] - 1e-12);
                }
            }
        }
    }

    #[test]
    fn pairwise_objective_examples() {
        let x = array![[0.0, 0.0], [3.0, 4.0], [9.0, 9.0]];
        assert_eq!(
            kmeans_objective_pairwise(x.view(), &[0, 1, 2]).unwrap(),
            0.0
        );
        assert!((kmeans_objective_pairwise(x.view(), &[0, 0, 1]).unwrap() - 12.5).abs() < 1e-12);
        assert!(matches!(
            kmeans_objective_pairwise(x.view(), &[0, 2, 2]),
            Err(Error::EmptyCluster(1))
        ));
    }

    #[test]
    fn similarity_objective_examples() {
        let s = SimilarityMatrix::new(Array2::zeros((4, 4))).unwrap();
        assert_eq!(similarity_objective(&s, &[0, 0, 1, 1]).unwrap(), 0.0);
        let s = SimilarityMatrix::new(array![[0.0, 0.6], [0.6, 0.0]]).unwrap();
        assert!((similarity_objective(&s, &[0, 0]).unwrap() - 0.3).abs() < 1e-15);
    }

    proptest::proptest! {
        #[test]
        fn pairwise_equals_centroid_form(seed in 0u64..10_000, n in 2usize..40, k in 1usize..6) {
            let k = k.min(n);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = Array2::from_shape_fn((n, 3), |_| rng.gen_range(-5.0..5.0));
            let mut labels: Vec<usize> = (0..n).map(|i| if i < k { i } else { rng.gen_range(0..k) }).collect();
            labels.rotate_left(seed as usize % n);
            let a = kmeans_objective(x.view(), &labels).unwrap();
            let b = kmeans_objective_pairwise(x.view(), &labels).unwrap();
            proptest::prop_assert!((a - b).abs() < 1e-8 * a.max(1.0));
        }
    }
}
