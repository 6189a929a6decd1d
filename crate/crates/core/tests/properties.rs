use gsx::cluster::{
    kmeans, kmeans_objective_pairwise, similarity_objective, spherical_kmeans, KMeansConfig,
};
use gsx::corpus::{similarity_matrix, SimilarityMatrix, TermMatrix};
use gsx::embed::{dissimilarity_a, gram_k, laplacian, GramSpectrum};
use gsx::explain::{
    cluster_profile, explain_clustering, membership_score, supporting_contributions,
};
use gsx::spectra::{eig_sym, DEFAULT_TOL};
use ndarray::Array2;
use proptest::prelude::*;

fn term_matrix(rows: &[Vec<f64>]) -> TermMatrix {
    let d = rows[0].len();
    let mut m = Array2::zeros((rows.len(), d));
    for (i, r) in rows.iter().enumerate() {
        for (t, v) in r.iter().enumerate() {
            // Keep every row non-empty.
            m[[i, t]] = if t == i % d { v + 0.05 } else { *v };
        }
    }
    TermMatrix::from_rows((0..d).map(|t| format!("t{t:02}")).collect(), m).unwrap()
}

fn nonneg_rows(max_n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2usize..max_n, 1usize..8).prop_flat_map(|(n, d)| {
        proptest::collection::vec(proptest::collection::vec(0.0f64..1.0, d), n)
    })
}

fn similarity(max_n: usize) -> impl Strategy<Value = SimilarityMatrix> {
    (2usize..max_n)
        .prop_flat_map(|n| (Just(n), proptest::collection::vec(0.0f64..1.0, n * n)))
        .prop_map(|(n, v)| {
            let mut m = Array2::zeros((n, n));
            for i in 0..n {
                for j in i + 1..n {
                    m[[i, j]] = v[i * n + j];
                    m[[j, i]] = v[i * n + j];
                }
            }
            SimilarityMatrix::new(m).unwrap()
        })
}

/// Labels in `0..k` with every cluster non-empty.
fn labels_for(n: usize, k: usize, raw: &[usize]) -> Vec<usize> {
    (0..n).map(|i| if i < k { i } else { raw[i] % k }).collect()
}

fn full_embedding(s: &SimilarityMatrix) -> (Array2<f64>, f64) {
    let e = GramSpectrum::from_similarity(s)
        .unwrap()
        .embedding(s.n())
        .unwrap();
    (e.coords, e.lingoes_sigma)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn similarity_is_cosine_symmetric_and_equivariant(rows in nonneg_rows(15), shift in 0usize..15) {
        let w = term_matrix(&rows);
        let s = similarity_matrix(&w);
        let n = w.n_docs();
        for i in 0..n {
            prop_assert_eq!(s.get(i, i), 0.0);
            for l in 0..n {
                prop_assert_eq!(s.get(i, l), s.get(l, i));
                if i != l {
                    let dot: f64 = w.row(i).dot(&w.row(l));
                    prop_assert!((s.get(i, l) - dot).abs() < 1e-12);
                }
            }
        }
        // Rotate the document order.
        let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let permuted = Array2::from_shape_fn((n, w.n_terms()), |(i, t)| w.rows()[[perm[i], t]]);
        let sp = similarity_matrix(&TermMatrix::from_rows(w.vocab().to_vec(), permuted).unwrap());
        for i in 0..n {
            for l in 0..n {
                prop_assert!((sp.get(i, l) - s.get(perm[i], perm[l])).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn k_embedding_reproduces_dissimilarity(s in similarity(25)) {
        let (z, sigma) = full_embedding(&s);
        prop_assert!(sigma >= 0.0);
        let n = s.n();
        for i in 0..n {
            for l in 0..n {
                if i != l {
                    let d: f64 = z.row(i).iter().zip(z.row(l)).map(|(a, b)| (a - b) * (a - b)).sum();
                    prop_assert!((d - (1.0 - s.get(i, l)) - 2.0 * sigma).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn laplacian_and_gram_null_spaces(s in similarity(25)) {
        let n = s.n();
        let l = laplacian(&s);
        for row in l.rows() {
            prop_assert!(row.sum().abs() < 1e-10);
        }
        let min_l = *eig_sym(&l, DEFAULT_TOL).unwrap().values.last().unwrap();
        prop_assert!(min_l >= -1e-8);
        let k = gram_k(&dissimilarity_a(s.matrix()));
        for row in k.rows() {
            prop_assert!(row.sum().abs() < 1e-10 * n as f64);
        }
        let corrected = GramSpectrum::from_similarity(&s).unwrap();
        prop_assert!(*corrected.eigen.values.last().unwrap() >= -1e-8);
    }

    #[test]
    fn lloyd_and_spherical_traces_are_monotone(
        rows in nonneg_rows(40),
        k in 1usize..5,
        seed in 0u64..1000,
    ) {
        let w = term_matrix(&rows);
        let k = k.min(w.n_docs());
        let cfg = KMeansConfig { seed, ..KMeansConfig::new(k) };
        let c = kmeans(w.rows().view(), &cfg).unwrap();
        for pair in c.trace.windows(2) {
            prop_assert!(pair[1] <= pair[0] + 1e-12 * pair[0].abs().max(1.0));
        }
        let c = spherical_kmeans(w.rows().view(), &cfg).unwrap();
        for pair in c.trace.windows(2) {
            prop_assert!(pair[1] >= pair[0] - 1e-12 * pair[0].abs().max(1.0));
        }
    }

    #[test]
    fn objective_bridge_and_lingoes_shift(
        rows in nonneg_rows(10),
        s in similarity(10),
        k in 1usize..4,
        raw in proptest::collection::vec(0usize..100, 10),
    ) {
        let w = term_matrix(&rows);
        let cos = similarity_matrix(&w);
        let n = cos.n();
        let k = k.min(n);
        let labels = labels_for(n, k, &raw);
        let (z, sigma) = full_embedding(&cos);
        prop_assert_eq!(sigma, 0.0);
        let q = kmeans_objective_pairwise(z.view(), &labels).unwrap();
        let half = (n - k) as f64 / 2.0;
        prop_assert!((q + similarity_objective(&cos, &labels).unwrap() - half).abs() < 1e-8);

        let n = s.n();
        let k = k.min(n);
        let labels = labels_for(n, k, &raw);
        let (z, sigma) = full_embedding(&s);
        let q = kmeans_objective_pairwise(z.view(), &labels).unwrap();
        let base = (n - k) as f64 / 2.0 - similarity_objective(&s, &labels).unwrap();
        prop_assert!((q - base - sigma * (n - k) as f64).abs() < 1e-8);
    }

    #[test]
    fn attribution_is_complete_nonnegative_and_prefix(
        rows in nonneg_rows(16),
        k in 1usize..4,
        raw in proptest::collection::vec(0usize..100, 16),
        m in 1usize..6,
    ) {
        let w = term_matrix(&rows);
        let n = w.n_docs();
        // Clusters of at least two documents so that memb is defined.
        let k = k.min(n / 2).max(1);
        let labels: Vec<usize> = (0..n).map(|i| if i < 2 * k { i / 2 } else { raw[i] % k }).collect();
        let s = similarity_matrix(&w);
        let ids: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let id_refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        let (explanations, _) = explain_clustering(&w, &s, &labels, &id_refs, m).unwrap();
        let (z, _) = full_embedding(&s);
        for (i, e) in explanations.iter().enumerate() {
            let profile = cluster_profile(&w, &labels, labels[i], m).unwrap();
            let contrib = supporting_contributions(&w, &profile, i);
            prop_assert!(contrib.iter().all(|&c| c >= 0.0));
            let dot: f64 = w.row(i).iter().zip(&profile.centroid).map(|(a, b)| a * b).sum();
            prop_assert!((contrib.iter().sum::<f64>() - dot).abs() < 1e-12);
            let mut sorted: Vec<f64> = contrib.into_iter().filter(|&c| c > 0.0).collect();
            sorted.sort_by(|a, b| b.total_cmp(a));
            let got: Vec<f64> = e.supporting_terms.iter().map(|t| t.score).collect();
            prop_assert_eq!(&got[..], &sorted[..got.len()]);
            prop_assert_eq!(got.len(), m.min(sorted.len()));

            let others: Vec<usize> = (0..n).filter(|&l| l != i && labels[l] == labels[i]).collect();
            let mean_d: f64 = others
                .iter()
                .map(|&l| z.row(i).iter().zip(z.row(l)).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
                .sum::<f64>()
                / others.len() as f64;
            let memb = membership_score(&s, &labels, i).unwrap();
            prop_assert!((memb - (1.0 - mean_d)).abs() < 1e-8);
            prop_assert!((e.memb - memb).abs() == 0.0);
        }
    }
}

#[test]
fn blk_k_spectrum_has_leading_block_eigenvalues() {
    use gsx::corpus::{vectorize_tfidf, VectorizerConfig};
    use gsx::synth::{generate_blk, BlkConfig};
    let cfg = BlkConfig {
        n_per_class: 100,
        ..BlkConfig::default()
    };
    let corpus = generate_blk(&cfg).unwrap();
    let w = vectorize_tfidf(&corpus, &VectorizerConfig::default()).unwrap();
    let g = GramSpectrum::from_similarity(&similarity_matrix(&w)).unwrap();
    let v = &g.eigen.values;
    // Centering removes one block direction, so k blocks leave k - 1 leaders.
    let k = cfg.k;
    assert!(v[k - 2] / v[k - 1] > 2.0, "{:?}", &v[..k + 1]);
    assert!(v[k - 1] / v[k] < 2.0, "{:?}", &v[..k + 1]);
}
