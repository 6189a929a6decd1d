//! Explainable graph spectral clustering of text documents.
//!
//! The pipeline runs from a JSONL corpus to tf-idf term vectors (the
//! W-embedding) and a cosine similarity graph `S`, then to one of three
//! spectral embeddings:
//!
//! * the combinatorial Laplacian embedding (`L = D - S`, bottom eigenvectors),
//! * the K-embedding, built from the double-centered dissimilarity matrix
//!   `K = -1/2 J (11' - I - S) J`, whose squared distances reproduce `1 - S`,
//! * the normalized variant built from `D^-1/2 S D^-1/2`.
//!
//! Clusters found in any of them are explained in the term space: a
//! document's membership score is its mean similarity to the rest of its
//! cluster, supporting terms are the largest summands of `w_i . mu_j` and
//! contrastive terms the largest summands of `|w_i - mu_j'|^2`.

pub mod cluster;
pub mod corpus;
pub mod embed;
mod error;
pub mod eval;
pub mod explain;
pub mod io;
pub mod spectra;
pub mod synth;

pub use error::{Error, Result};
