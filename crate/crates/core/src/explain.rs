//! Term-level explanations of cluster membership.
//!
//! Cluster centers live in the tf-idf space as plain (unnormalized) means of
//! their members' unit rows. A document's closeness to its own center can be
//! read either directly or through the similarity graph:
//!
//! ```text
//! |w_i - mu_j|^2 = S_CC - (2/|C_j|) sum_{l in C_j, l != i} S_il
//! S_CC          = (|C_j| - 2)/|C_j| + mu_j' mu_j
//! ```
//!
//! Since all coordinates are non-negative, the largest summands of
//! `w_i' mu_j` name the terms that hold a document in its cluster, and the
//! largest summands of `|w_i - mu_j'|^2` name the terms that keep it out of
//! another cluster `j'`.

use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::{SimilarityMatrix, TermMatrix};
use crate::{Error, Result};

/// Default number of terms per explanation list.
pub const DEFAULT_TERMS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermScore {
    pub term: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterProfile {
    pub cluster: usize,
    pub size: usize,
    /// Mean of the member rows, indexed like the vocabulary.
    pub centroid: Vec<f64>,
    pub top_terms: Vec<TermScore>,
    /// `S_CC = (|C| - 2)/|C| + mu' mu`.
    pub self_constant: f64,
}

impl ClusterProfile {
    pub fn centroid_norm(&self) -> f64 {
        self.centroid.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contrast {
    pub cluster: usize,
    /// Largest summands of `|w_i - mu_j'|^2` over the whole vocabulary.
    pub terms: Vec<TermScore>,
    /// The same summands restricted to terms weighted higher in `mu_j'`
    /// than in the document, i.e. what the document lacks.
    pub missing: Vec<TermScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterDistance {
    pub cluster: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub doc_id: String,
    pub cluster: usize,
    pub memb: f64,
    pub supporting_terms: Vec<TermScore>,
    pub contrastive: Vec<Contrast>,
    pub center_distance_own: f64,
    pub center_distance_others: Vec<ClusterDistance>,
}

fn check_labels(labels: &[usize], n: usize) -> Result<()> {
    if labels.len() != n {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: n,
        });
    }
    Ok(())
}

/// `memb(i, C_j)`: mean similarity of document `i` to the other members of
/// its cluster.
pub fn membership_score(s: &SimilarityMatrix, labels: &[usize], i: usize) -> Result<f64> {
    check_labels(labels, s.n())?;
    let own = labels[i];
    let (mut sum, mut count) = (0.0, 0usize);
    for (l, &c) in labels.iter().enumerate() {
        if c == own && l != i {
            sum += s.get(i, l);
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::SingletonNoScore(i));
    }
    Ok(sum / count as f64)
}

/// Top `m` entries of `scores` with positive weight; ties are broken by the
/// term, lexicographically.
fn top_terms(vocab: &[String], scores: impl Iterator<Item = f64>, m: usize) -> Vec<TermScore> {
    let mut all: Vec<(usize, f64)> = scores.enumerate().filter(|&(_, v)| v > 0.0).collect();
    all.sort_by(|a, b| match b.1.total_cmp(&a.1) {
        Ordering::Equal => vocab[a.0].cmp(&vocab[b.0]),
        o => o,
    });
    all.into_iter()
        .take(m)
        .map(|(t, score)| TermScore {
            term: vocab[t].clone(),
            score,
        })
        .collect()
}

pub fn cluster_profile(
    w: &TermMatrix,
    labels: &[usize],
    j: usize,
    m: usize,
) -> Result<ClusterProfile> {
    check_labels(labels, w.n_docs())?;
    let mut centroid = vec![0.0; w.n_terms()];
    let mut size = 0usize;
    for (i, _) in labels.iter().enumerate().filter(|(_, &c)| c == j) {
        size += 1;
        for (c, v) in centroid.iter_mut().zip(w.row(i)) {
            *c += v;
        }
    }
    if size == 0 {
        return Err(Error::EmptyCluster(j));
    }
    centroid.iter_mut().for_each(|c| *c /= size as f64);
    let norm2: f64 = centroid.iter().map(|v| v * v).sum();
    let nj = size as f64;
    Ok(ClusterProfile {
        cluster: j,
        size,
        top_terms: top_terms(w.vocab(), centroid.iter().copied(), m),
        centroid,
        self_constant: (nj - 2.0) / nj + norm2,
    })
}

/// Per-term summands of `w_i . mu_j` over the whole vocabulary; the
/// supporting terms are the largest of these.
pub fn supporting_contributions(w: &TermMatrix, profile: &ClusterProfile, i: usize) -> Vec<f64> {
    w.row(i)
        .iter()
        .zip(&profile.centroid)
        .map(|(a, b)| a * b)
        .collect()
}

/// `|w_i - mu_j|^2`, computed in the term space.
pub fn center_distance(w: &TermMatrix, profile: &ClusterProfile, i: usize) -> f64 {
    w.row(i)
        .iter()
        .zip(&profile.centroid)
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

/// `|w_i - mu_j|^2` for a member `i` of cluster `j`, computed from the
/// similarity graph alone. Requires unit term rows.
pub fn center_distance_from_similarity(
    s: &SimilarityMatrix,
    labels: &[usize],
    profile: &ClusterProfile,
    i: usize,
) -> Result<f64> {
    check_labels(labels, s.n())?;
    if labels[i] != profile.cluster {
        return Err(Error::InvalidConfig(format!(
            "document {i} is not a member of cluster {}",
            profile.cluster
        )));
    }
    let sum: f64 = labels
        .iter()
        .enumerate()
        .filter(|&(l, &c)| c == profile.cluster && l != i)
        .map(|(l, _)| s.get(i, l))
        .sum();
    Ok(profile.self_constant - 2.0 * sum / profile.size as f64)
}

fn cluster_count(labels: &[usize]) -> usize {
    labels.iter().max().map_or(0, |&m| m + 1)
}

fn profiles(w: &TermMatrix, labels: &[usize], m: usize) -> Result<Vec<ClusterProfile>> {
    (0..cluster_count(labels))
        .map(|j| cluster_profile(w, labels, j, m))
        .collect()
}

fn explain_with(
    w: &TermMatrix,
    s: &SimilarityMatrix,
    labels: &[usize],
    profiles: &[ClusterProfile],
    doc_id: &str,
    i: usize,
    m: usize,
) -> Result<Explanation> {
    let own = labels[i];
    let memb = membership_score(s, labels, i)?;
    let row = w.row(i);
    let supporting_terms = top_terms(
        w.vocab(),
        supporting_contributions(w, &profiles[own], i).into_iter(),
        m,
    );
    let mut contrastive = Vec::new();
    let mut center_distance_others = Vec::new();
    for p in profiles.iter().filter(|p| p.cluster != own) {
        contrastive.push(Contrast {
            cluster: p.cluster,
            terms: top_terms(
                w.vocab(),
                row.iter().zip(&p.centroid).map(|(a, b)| (a - b) * (a - b)),
                m,
            ),
            missing: top_terms(
                w.vocab(),
                row.iter()
                    .zip(&p.centroid)
                    .map(|(a, b)| if b > a { (a - b) * (a - b) } else { 0.0 }),
                m,
            ),
        });
        center_distance_others.push(ClusterDistance {
            cluster: p.cluster,
            distance: center_distance(w, p, i),
        });
    }
    Ok(Explanation {
        doc_id: doc_id.to_string(),
        cluster: own,
        memb,
        supporting_terms,
        contrastive,
        center_distance_own: center_distance(w, &profiles[own], i),
        center_distance_others,
    })
}

/// Explanation of document `i`'s membership, with up to `m` terms per list.
pub fn explain_document(
    w: &TermMatrix,
    s: &SimilarityMatrix,
    labels: &[usize],
    doc_id: &str,
    i: usize,
    m: usize,
) -> Result<Explanation> {
    check_labels(labels, w.n_docs())?;
    check_labels(labels, s.n())?;
    let profiles = profiles(w, labels, m)?;
    explain_with(w, s, labels, &profiles, doc_id, i, m)
}

/// Explanations for every document plus one profile per cluster.
pub fn explain_clustering(
    w: &TermMatrix,
    s: &SimilarityMatrix,
    labels: &[usize],
    doc_ids: &[&str],
    m: usize,
) -> Result<(Vec<Explanation>, Vec<ClusterProfile>)> {
    check_labels(labels, w.n_docs())?;
    check_labels(labels, s.n())?;
    check_labels(labels, doc_ids.len())?;
    let profiles = profiles(w, labels, m)?;
    let explanations = (0..labels.len())
        .map(|i| explain_with(w, s, labels, &profiles, doc_ids[i], i, m))
        .collect::<Result<_>>()?;
    Ok((explanations, profiles))
}

fn join_terms(terms: &[TermScore]) -> String {
    terms
        .iter()
        .map(|t| format!("{}({:.4})", t.term, t.score))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Plain-text report, one block per document.
pub fn render_text(explanations: &[Explanation]) -> String {
    let mut out = String::new();
    for e in explanations {
        let _ = writeln!(
            out,
            "{}: cluster {} (memb {:.4}, distance {:.4})",
            e.doc_id, e.cluster, e.memb, e.center_distance_own
        );
        let _ = writeln!(out, "  because of: {}", join_terms(&e.supporting_terms));
        for c in &e.contrastive {
            let _ = writeln!(
                out,
                "  not cluster {} because missing: {}",
                c.cluster,
                join_terms(&c.missing)
            );
        }
    }
    out
}
