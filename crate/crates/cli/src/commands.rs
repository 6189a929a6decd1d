use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use gsx::cluster::{best_of_restarts, Clusterer, KMeansConfig, RNG_ALGORITHM};
use gsx::corpus::{
    load_corpus, similarity_matrix, vectorize_tfidf, Corpus, SimilarityMatrix, TermMatrix,
    VectorizerConfig,
};
use gsx::embed::{
    k_embedding, k_embedding_normalized, l_embedding, l_embedding_from, laplacian, Embedding,
    EmbeddingKind, GramSpectrum,
};
use gsx::eval::{confusion, encode_labels, match_labels, render_table, ScoreReport};
use gsx::explain::{explain_clustering, render_text};
use gsx::io::{self, fmt_f64, Metadata};
use gsx::spectra::{eig_sym, reconstruction_errors, Selection, DEFAULT_TOL};
use gsx::synth::{generate_blk, BlkConfig, BLK_RNG_ALGORITHM};
use gsx::{Error, Result};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::{
    ClusterArgs, ClustererArg, CorpusArgs, EmbedArgs, EmbeddingArgs, EvalArgs, ExplainArgs,
    GenBlkArgs, ReconstructArgs, SpectrumArgs,
};

struct Loaded {
    corpus: Corpus,
    w: TermMatrix,
    s: SimilarityMatrix,
}

impl Loaded {
    fn ids(&self) -> Vec<&str> {
        self.corpus.ids()
    }
}

fn load(args: &CorpusArgs) -> Result<Loaded> {
    let corpus = load_corpus(&args.corpus)?;
    let cfg = VectorizerConfig {
        allow_empty: args.allow_empty,
        ..VectorizerConfig::default()
    };
    let w = vectorize_tfidf(&corpus, &cfg)?;
    let s = similarity_matrix(&w);
    Ok(Loaded { corpus, w, s })
}

fn out_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path)?;
    Ok(())
}

fn default_r(args: &EmbeddingArgs) -> usize {
    match args.kind {
        EmbeddingKind::L => args.k,
        _ => args.k + 1,
    }
}

fn build_embedding(data: &Loaded, args: &EmbeddingArgs) -> Result<Embedding> {
    match args.kind {
        EmbeddingKind::W => Ok(Embedding::from_terms(&data.w)),
        _ => embed_similarity(&data.s, args),
    }
}

/// Corpus labels as dense ids, or `None` when any document is unlabelled.
fn corpus_labels(corpus: &Corpus) -> Option<Vec<usize>> {
    corpus.labels().map(|l| encode_labels(&l).0)
}

pub fn gen_blk(args: &GenBlkArgs) -> Result<()> {
    let cfg = BlkConfig {
        k: args.k,
        n_per_class: args.n_per_class,
        vocab_per_class: args.vocab_per_class,
        shared_vocab: args.shared_vocab,
        doc_len: args.doc_len,
        noise: args.noise,
        seed: args.seed,
    };
    let corpus = generate_blk(&cfg)?;
    if let Some(dir) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        out_dir(dir)?;
    }
    let mut out = io::create_file(&args.out)?;
    corpus.write_jsonl(&mut out)?;
    out.flush()?;
    let meta = Metadata::new("gen-blk", args)?
        .with_seed(args.seed, BLK_RNG_ALGORITHM)
        .with_details(&cfg)?;
    io::write_metadata(&args.out, &meta)?;
    eprintln!("wrote {} documents to {}", corpus.len(), args.out.display());
    Ok(())
}

/// `--similarity` input: ids from the header, or row indices.
fn load_similarity(path: &Path) -> Result<(Vec<String>, SimilarityMatrix)> {
    let (ids, s) = io::read_similarity_csv(path)?;
    let ids = ids.unwrap_or_else(|| (0..s.n()).map(|i| i.to_string()).collect());
    Ok((ids, s))
}

fn embed_similarity(s: &SimilarityMatrix, args: &EmbeddingArgs) -> Result<Embedding> {
    let r = args.r.unwrap_or_else(|| default_r(args));
    match args.kind {
        EmbeddingKind::K => k_embedding(s, r),
        EmbeddingKind::NormK => k_embedding_normalized(s, r),
        EmbeddingKind::L => l_embedding(&laplacian(s), r, args.drop_trivial),
        EmbeddingKind::W => Err(Error::InvalidConfig("kind W needs --corpus".to_string())),
    }
}

pub fn embed(args: &EmbedArgs) -> Result<()> {
    let (owned_ids, s, emb) = match (&args.corpus, &args.similarity) {
        (Some(corpus), _) => {
            let data = load(&CorpusArgs {
                corpus: corpus.clone(),
                allow_empty: args.allow_empty,
            })?;
            let emb = build_embedding(&data, &args.embedding)?;
            let ids = data.ids().into_iter().map(str::to_string).collect();
            (ids, data.s, emb)
        }
        (None, Some(path)) => {
            let (ids, s) = load_similarity(path)?;
            let emb = embed_similarity(&s, &args.embedding)?;
            (ids, s, emb)
        }
        (None, None) => {
            return Err(Error::InvalidConfig(
                "pass --corpus or --similarity".to_string(),
            ))
        }
    };
    out_dir(&args.out)?;
    let ids: Vec<&str> = owned_ids.iter().map(String::as_str).collect();
    let path = args.out.join("embedding.csv");
    io::write_embedding(&path, &emb, &ids, Metadata::new("embed", args)?)?;
    if args.write_similarity {
        let meta = Metadata::new("embed", args)?;
        let plain = args.out.join("similarity.csv");
        io::write_similarity_csv(io::create_file(&plain)?, &s, None)?;
        io::write_metadata(&plain, &meta)?;
        let headed = args.out.join("similarity_ids.csv");
        io::write_similarity_csv(io::create_file(&headed)?, &s, Some(&ids))?;
        io::write_metadata(&headed, &meta)?;
    }
    eprintln!(
        "{} embedding: {} documents x {} dimensions, lingoes sigma {}",
        emb.kind,
        emb.n(),
        emb.dim(),
        emb.lingoes_sigma
    );
    Ok(())
}

#[derive(Serialize)]
struct RunRecord {
    run: usize,
    seed: u64,
    objective: f64,
    iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    scores: Option<ScoreReport>,
}

#[derive(Serialize)]
struct ClusterSummary {
    best_run: usize,
    lingoes_sigma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    best_run_scores: Option<ScoreReport>,
    /// Per-metric best over all runs (minimum for the error rate).
    #[serde(skip_serializing_if = "Option::is_none")]
    max_over_runs: Option<ScoreReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    f_score_average: Option<f64>,
    runs: Vec<RunRecord>,
}

pub fn cluster(args: &ClusterArgs) -> Result<()> {
    let data = load(&args.corpus)?;
    let emb = build_embedding(&data, &args.embedding)?;
    let cfg = KMeansConfig {
        init: args.init,
        seed: args.seed,
        max_iter: args.max_iter,
        ..KMeansConfig::new(args.embedding.k)
    };
    let clusterer = match args.clusterer {
        ClustererArg::Kmeans => Clusterer::KMeans,
        ClustererArg::Spherical => Clusterer::Spherical,
    };
    let (best, runs) = best_of_restarts(clusterer, emb.coords.view(), &cfg, args.restarts)?;
    let truth = corpus_labels(&data.corpus);
    let records = runs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            Ok(RunRecord {
                run: i,
                seed: c.seed,
                objective: c.objective,
                iterations: c.iterations,
                scores: truth
                    .as_ref()
                    .map(|t| ScoreReport::compute(&c.labels, t))
                    .transpose()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let reports: Vec<ScoreReport> = records.iter().filter_map(|r| r.scores.clone()).collect();
    let summary = ClusterSummary {
        best_run: best,
        lingoes_sigma: emb.lingoes_sigma,
        best_run_scores: records[best].scores.clone(),
        max_over_runs: ScoreReport::best_of(&reports),
        f_score_average: (!reports.is_empty())
            .then(|| reports.iter().map(|r| r.f_score).sum::<f64>() / reports.len() as f64),
        runs: records,
    };

    out_dir(&args.out)?;
    let ids = data.ids();
    let path = args.out.join("clustering.csv");
    io::write_labels_csv(io::create_file(&path)?, &ids, &runs[best].labels)?;
    let meta = Metadata::new("cluster", args)?
        .with_seed(args.seed, RNG_ALGORITHM)
        .with_details(serde_json::json!({
            "best_run": best,
            "seed": runs[best].seed,
            "objective": runs[best].objective,
            "iterations": runs[best].iterations,
        }))?;
    io::write_metadata(&path, &meta)?;
    let runs_path = args.out.join("runs.json");
    io::write_json(&runs_path, &summary)?;
    io::write_metadata(
        &runs_path,
        &Metadata::new("cluster", args)?.with_seed(args.seed, RNG_ALGORITHM),
    )?;

    println!(
        "best run {best} (seed {}): objective {}",
        runs[best].seed,
        fmt_f64(runs[best].objective)
    );
    if let (Some(b), Some(m)) = (&summary.best_run_scores, &summary.max_over_runs) {
        print!("{}", render_table(&[("best run", b), ("max of runs", m)]));
        if let Some(avg) = summary.f_score_average {
            println!("{:<30} {avg:>12.6}", "F-score average");
        }
    }
    Ok(())
}

/// Reads `doc_id,label` pairs from a CSV or a labelled JSONL corpus.
fn read_labelled(path: &Path) -> Result<Vec<(String, String)>> {
    let is_jsonl = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("jsonl") || e.eq_ignore_ascii_case("json"));
    if !is_jsonl {
        return io::read_labels_csv(path);
    }
    let corpus = load_corpus(path)?;
    corpus
        .docs()
        .iter()
        .map(|d| match &d.label {
            Some(l) => Ok((d.id.clone(), l.clone())),
            None => Err(Error::InvalidConfig(format!(
                "document {:?} in {} has no label",
                d.id,
                path.display()
            ))),
        })
        .collect()
}

/// Reorders `pairs` to follow `ids`; every id must appear exactly once.
fn align(ids: &[&str], pairs: Vec<(String, String)>, origin: &Path) -> Result<Vec<String>> {
    if pairs.len() != ids.len() {
        return Err(Error::LengthMismatch {
            left: pairs.len(),
            right: ids.len(),
        });
    }
    let mut by_id: HashMap<String, String> = HashMap::with_capacity(pairs.len());
    for (id, label) in pairs {
        if by_id.insert(id.clone(), label).is_some() {
            return Err(Error::DuplicateId(id));
        }
    }
    ids.iter()
        .map(|id| {
            by_id.remove(*id).ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "{} has no label for document {id:?}",
                    origin.display()
                ))
            })
        })
        .collect()
}

pub fn explain(args: &ExplainArgs) -> Result<()> {
    let data = load(&args.corpus)?;
    let ids = data.ids();
    let labels = match &args.labels {
        Some(path) => {
            let aligned = align(&ids, io::read_labels_csv(path)?, path)?;
            encode_labels(&aligned).0
        }
        None => corpus_labels(&data.corpus).ok_or_else(|| {
            Error::InvalidConfig("corpus is not fully labelled; pass --labels".to_string())
        })?,
    };
    let (explanations, profiles) = explain_clustering(&data.w, &data.s, &labels, &ids, args.m)?;
    out_dir(&args.out)?;
    let meta = Metadata::new("explain", args)?;
    let path = args.out.join("explanations.json");
    io::write_json(&path, &explanations)?;
    io::write_metadata(&path, &meta)?;
    let path = args.out.join("profiles.json");
    io::write_json(&path, &profiles)?;
    io::write_metadata(&path, &meta)?;
    let text = render_text(&explanations);
    fs::write(args.out.join("explanations.txt"), &text)?;
    if args.print {
        // A closed pipe (e.g. `| head`) is not an error worth reporting.
        let _ = std::io::stdout().lock().write_all(text.as_bytes());
    }
    eprintln!(
        "explained {} documents in {} clusters",
        explanations.len(),
        profiles.len()
    );
    Ok(())
}

#[derive(Serialize)]
struct EvalReport {
    n: usize,
    matched: usize,
    confusion: Vec<Vec<usize>>,
    pred_labels: Vec<String>,
    truth_labels: Vec<String>,
    scores: ScoreReport,
}

pub fn eval(args: &EvalArgs) -> Result<()> {
    let truth_pairs = read_labelled(&args.truth)?;
    let ids: Vec<String> = truth_pairs.iter().map(|(id, _)| id.clone()).collect();
    let id_refs: Vec<&str> = ids.iter().map(String::as_str).collect();
    let pred = align(&id_refs, read_labelled(&args.pred)?, &args.pred)?;
    let truth: Vec<String> = truth_pairs.into_iter().map(|(_, l)| l).collect();
    let (p, pred_names) = encode_labels(&pred);
    let (t, truth_names) = encode_labels(&truth);
    let scores = ScoreReport::compute(&p, &t)?;
    let cm = confusion(&p, &t)?;
    let m = match_labels(&cm);

    println!("confusion (rows: predicted, columns: true)");
    print!("{:>12}", "");
    for name in &truth_names {
        print!(" {name:>8}");
    }
    println!();
    for (r, row) in cm.counts.iter().enumerate() {
        print!("{:>12}", pred_names[r]);
        for c in row {
            print!(" {c:>8}");
        }
        println!();
    }
    println!("matched {} of {}", m.matched, p.len());
    print!("{}", render_table(&[("value", &scores)]));

    if let Some(out) = &args.out {
        let report = EvalReport {
            n: p.len(),
            matched: m.matched,
            confusion: cm.counts,
            pred_labels: pred_names,
            truth_labels: truth_names,
            scores,
        };
        io::write_json(out, &report)?;
        io::write_metadata(out, &Metadata::new("eval", args)?)?;
    }
    Ok(())
}

pub fn spectrum(args: &SpectrumArgs) -> Result<()> {
    let data = load(&args.corpus)?;
    let (values, sigma) = match args.kind {
        EmbeddingKind::K => {
            let g = GramSpectrum::from_similarity(&data.s)?;
            (g.eigen.values, g.lingoes_sigma)
        }
        EmbeddingKind::NormK => {
            let g = GramSpectrum::normalized(&data.s)?;
            (g.eigen.values, g.lingoes_sigma)
        }
        EmbeddingKind::L => (
            eig_sym(&laplacian(&data.s), DEFAULT_TOL)?.ascending_values(),
            0.0,
        ),
        EmbeddingKind::W => {
            return Err(Error::InvalidConfig(
                "spectrum needs kind K, NormK or L".to_string(),
            ));
        }
    };
    if let Some(dir) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        out_dir(dir)?;
    }
    io::write_spectrum_csv(io::create_file(&args.out)?, &values)?;
    let order = if args.kind == EmbeddingKind::L {
        "ascending"
    } else {
        "descending"
    };
    let meta = Metadata::new("spectrum", args)?.with_details(serde_json::json!({
        "kind": args.kind,
        "order": order,
        "lingoes_sigma": sigma,
    }))?;
    io::write_metadata(&args.out, &meta)?;
    eprintln!("wrote {} eigenvalues ({order})", values.len());
    Ok(())
}

pub fn reconstruct(args: &ReconstructArgs) -> Result<()> {
    let data = load(&args.corpus)?;
    let n = data.s.n();
    if args.sample < 2 || args.sample > n {
        return Err(Error::OutOfRange {
            what: "sample",
            value: args.sample,
            min: 2,
            max: n,
        });
    }
    if args.r.is_empty() {
        return Err(Error::InvalidConfig(
            "at least one r is required".to_string(),
        ));
    }
    if let Some(&bad) = args.r.iter().find(|&&r| r < 1 || r > n) {
        return Err(Error::OutOfRange {
            what: "r",
            value: bad,
            min: 1,
            max: n,
        });
    }
    let k = GramSpectrum::from_similarity(&data.s)?;
    let l = laplacian(&data.s);
    let l_eig = eig_sym(&l, DEFAULT_TOL)?;
    let err_k = reconstruction_errors(&k.gram, &k.eigen, &args.r, Selection::Top)?;
    let err_l = reconstruction_errors(&l, &l_eig, &args.r, Selection::Bottom)?;

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut picked = sample(&mut rng, n, args.sample).into_vec();
    picked.sort_unstable();

    out_dir(&args.out)?;
    let ids = data.ids();
    let scatter_path = args.out.join("scatter.csv");
    let mut w = csv::Writer::from_writer(io::create_file(&scatter_path)?);
    w.write_record([
        "embedding",
        "r",
        "doc_i",
        "doc_l",
        "similarity",
        "squared_distance",
    ])?;
    for &r in &args.r {
        let embeddings = [k.embedding(r)?, l_embedding_from(&l_eig, r, false)?];
        for emb in &embeddings {
            let kind = emb.kind.to_string();
            for (a, &i) in picked.iter().enumerate() {
                for &j in &picked[a + 1..] {
                    w.write_record([
                        kind.as_str(),
                        &r.to_string(),
                        ids[i],
                        ids[j],
                        &fmt_f64(data.s.get(i, j)),
                        &fmt_f64(emb.squared_distance(i, j)),
                    ])?;
                }
            }
        }
    }
    w.flush()?;
    let meta = Metadata::new("reconstruct", args)?
        .with_seed(args.seed, RNG_ALGORITHM)
        .with_details(serde_json::json!({ "lingoes_sigma": k.lingoes_sigma, "sampled": picked }))?;
    io::write_metadata(&scatter_path, &meta)?;

    let rows: Vec<Vec<f64>> = args
        .r
        .iter()
        .zip(err_k.iter().zip(&err_l))
        .map(|(&r, (&ek, &el))| vec![r as f64, ek, el])
        .collect();
    let errors_path = args.out.join("errors.csv");
    io::write_table_csv(
        io::create_file(&errors_path)?,
        &["r", "errorK", "errorL"],
        &rows,
    )?;
    io::write_metadata(&errors_path, &Metadata::new("reconstruct", args)?)?;

    println!("{:>6} {:>12} {:>12}", "r", "errorK", "errorL");
    for row in &rows {
        println!("{:>6} {:>12.6} {:>12.6}", row[0], row[1], row[2]);
    }
    Ok(())
}
