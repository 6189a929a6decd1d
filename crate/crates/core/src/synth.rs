//! Synthetic block-structured corpora (BLK).
//!
//! Each class owns a private vocabulary; every token of a class-`j` document
//! is drawn uniformly from that vocabulary with probability `1 - noise`, and
//! uniformly from a pool shared by all classes otherwise. The resulting
//! similarity matrix has dense within-class blocks and sparse cross-class
//! entries.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Document};
use crate::{Error, Result};

/// Name of the generator behind [`generate_blk`], recorded in run metadata.
pub const BLK_RNG_ALGORITHM: &str = "ChaCha8Rng";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlkConfig {
    pub k: usize,
    pub n_per_class: usize,
    pub vocab_per_class: usize,
    pub shared_vocab: usize,
    pub doc_len: usize,
    pub noise: f64,
    pub seed: u64,
}

impl Default for BlkConfig {
    fn default() -> Self {
        Self {
            k: 4,
            n_per_class: 500,
            vocab_per_class: 60,
            shared_vocab: 300,
            doc_len: 50,
            noise: 0.2,
            seed: 42,
        }
    }
}

impl BlkConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.k < 2 {
            return bad("k must be at least 2");
        }
        if self.n_per_class < 2 {
            return bad("n_per_class must be at least 2");
        }
        if !(0.0..=1.0).contains(&self.noise) {
            return bad("noise must lie in [0, 1]");
        }
        if self.doc_len < 1 {
            return bad("doc_len must be at least 1");
        }
        if self.vocab_per_class < 1 {
            return bad("vocab_per_class must be at least 1");
        }
        if self.noise > 0.0 && self.shared_vocab < 1 {
            return bad("shared_vocab must be at least 1 when noise > 0");
        }
        Ok(())
    }

    pub fn n_docs(&self) -> usize {
        self.k * self.n_per_class
    }
}

pub fn class_term(class: usize, idx: usize) -> String {
    format!("c{class}t{idx}")
}

pub fn shared_term(idx: usize) -> String {
    format!("s{idx}")
}

/// The private vocabulary planted for `class`.
pub fn planted_vocab(cfg: &BlkConfig, class: usize) -> Vec<String> {
    (0..cfg.vocab_per_class)
        .map(|t| class_term(class, t))
        .collect()
}

/// Generates `k * n_per_class` labelled documents, class-major. Labels are
/// the class index as a decimal string.
pub fn generate_blk(cfg: &BlkConfig) -> Result<Corpus> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut docs = Vec::with_capacity(cfg.n_docs());
    let width = cfg.n_docs().to_string().len();
    for class in 0..cfg.k {
        for _ in 0..cfg.n_per_class {
            let tokens: Vec<String> = (0..cfg.doc_len)
                .map(|_| {
                    if rng.gen::<f64>() < cfg.noise {
                        shared_term(rng.gen_range(0..cfg.shared_vocab))
                    } else {
                        class_term(class, rng.gen_range(0..cfg.vocab_per_class))
                    }
                })
                .collect();
            docs.push(Document {
                id: format!("blk{:0width$}", docs.len()),
                text: tokens.join(" "),
                label: Some(class.to_string()),
            });
        }
    }
    Corpus::new(docs)
}
