//! `gsx`: K-embedding spectral clustering with explanations.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input or configuration,
//! 3 numerical failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gsx::cluster::Init;
use gsx::embed::EmbeddingKind;
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "gsx",
    version,
    about = "Explainable graph spectral clustering of documents"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic block-structured (BLK) labelled corpus.
    GenBlk(GenBlkArgs),
    /// Compute an embedding of a corpus.
    Embed(EmbedArgs),
    /// Cluster an embedding with restarts; scores against labels when present.
    Cluster(ClusterArgs),
    /// Explain cluster memberships with supporting and contrastive terms.
    Explain(ExplainArgs),
    /// Score predicted labels against true labels.
    Eval(EvalArgs),
    /// Export the eigenvalue spectrum of K, NormK or L.
    Spectrum(SpectrumArgs),
    /// Compare similarities with embedding distances and matrix reconstruction errors.
    Reconstruct(ReconstructArgs),
}

#[derive(Args, Serialize)]
pub struct GenBlkArgs {
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    #[arg(long, default_value_t = 500)]
    pub n_per_class: usize,
    #[arg(long, default_value_t = 60)]
    pub vocab_per_class: usize,
    #[arg(long, default_value_t = 300)]
    pub shared_vocab: usize,
    #[arg(long, default_value_t = 50)]
    pub doc_len: usize,
    /// Probability that a token is drawn from the shared vocabulary.
    #[arg(long, default_value_t = 0.2)]
    pub noise: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output JSONL file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize, Clone)]
pub struct CorpusArgs {
    /// JSONL corpus with `id`, `text` and optional `label` fields.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Keep documents with no tokens as zero rows instead of failing.
    #[arg(long)]
    pub allow_empty: bool,
}

#[derive(Args, Serialize, Clone)]
pub struct EmbeddingArgs {
    /// K, L, NormK or W.
    #[arg(long, default_value = "K")]
    pub kind: EmbeddingKind,
    /// Embedding dimension; defaults to k+1 for K and NormK and to k for L.
    #[arg(long)]
    pub r: Option<usize>,
    /// Number of clusters.
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    /// Drop the constant eigenvector from the L-embedding.
    #[arg(long)]
    pub drop_trivial: bool,
}

#[derive(Args, Serialize)]
#[group(id = "input", required = true, multiple = false, args = ["corpus", "similarity"])]
pub struct EmbedArgs {
    /// JSONL corpus with `id`, `text` and optional `label` fields.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Precomputed similarity matrix CSV, plain or with a `doc_id` header.
    #[arg(long)]
    pub similarity: Option<PathBuf>,
    /// Keep documents with no tokens as zero rows instead of failing.
    #[arg(long)]
    pub allow_empty: bool,
    #[command(flatten)]
    pub embedding: EmbeddingArgs,
    /// Also write the similarity matrix (plain and with doc ids).
    #[arg(long)]
    pub write_similarity: bool,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClustererArg {
    Kmeans,
    Spherical,
}

#[derive(Args, Serialize)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub embedding: EmbeddingArgs,
    #[arg(long, value_enum, default_value = "kmeans")]
    pub clusterer: ClustererArg,
    /// kmeans++ or random.
    #[arg(long, default_value = "kmeans++")]
    pub init: Init,
    /// Base seed; restart i uses seed + i.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    #[arg(long, default_value_t = 300)]
    pub max_iter: usize,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct ExplainArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// `doc_id,label` CSV; defaults to the corpus labels.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Terms per list.
    #[arg(long, default_value_t = 10)]
    pub m: usize,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Also print the text report.
    #[arg(long)]
    pub print: bool,
}

#[derive(Args, Serialize)]
pub struct EvalArgs {
    /// Predicted labels: `doc_id,label` CSV or labelled JSONL corpus.
    #[arg(long)]
    pub pred: PathBuf,
    /// True labels: `doc_id,label` CSV or labelled JSONL corpus.
    #[arg(long)]
    pub truth: PathBuf,
    /// Optional JSON score report.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// K, NormK or L.
    #[arg(long, default_value = "K")]
    pub kind: EmbeddingKind,
    /// Output CSV file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Serialize)]
pub struct ReconstructArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Number of documents sampled for the scatter data.
    #[arg(long, default_value_t = 80)]
    pub sample: usize,
    /// Ranks to evaluate.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "4,8,16,31,62,125,250,500,1000"
    )]
    pub r: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenBlk(a) => commands::gen_blk(&a),
        Command::Embed(a) => commands::embed(&a),
        Command::Cluster(a) => commands::cluster(&a),
        Command::Explain(a) => commands::explain(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Spectrum(a) => commands::spectrum(&a),
        Command::Reconstruct(a) => commands::reconstruct(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                ref e if e.is_numerical() => 3,
                gsx::Error::Io(_) => 1,
                _ => 2,
            })
        }
    }
}
