//! Clustering quality metrics, confusion matrices and cluster-to-class matching.
//!
//! Conventions:
//! * logarithms are natural, so mutual information is in nats;
//! * NMI and AMI normalize by the arithmetic mean of the two entropies;
//! * the F-score is the macro average, over true classes, of the F1 of each
//!   class against the cluster it is matched to by [`match_labels`]
//!   (unmatched classes score 0);
//! * two labellings describing the same partition score 1 on every
//!   normalized or adjusted measure; otherwise a vanishing normalizer yields 0.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Maps arbitrary labels to dense ids `0..k` in sorted label order.
pub fn encode_labels<T: Ord + Clone>(labels: &[T]) -> (Vec<usize>, Vec<T>) {
    let mut ids: BTreeMap<T, usize> = BTreeMap::new();
    for l in labels {
        ids.entry(l.clone()).or_insert(0);
    }
    for (i, v) in ids.values_mut().enumerate() {
        *v = i;
    }
    let encoded = labels.iter().map(|l| ids[l]).collect();
    (encoded, ids.into_keys().collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    /// `counts[c][t]`: documents in predicted cluster `c` and true class `t`.
    pub counts: Vec<Vec<usize>>,
    /// Original label of each row.
    pub pred_labels: Vec<usize>,
    /// Original label of each column.
    pub truth_labels: Vec<usize>,
}

impl ConfusionMatrix {
    /// Wraps a count table whose rows and columns are already dense ids.
    pub fn from_counts(counts: Vec<Vec<usize>>) -> Result<Self> {
        let cols = counts.first().map_or(0, Vec::len);
        if let Some(bad) = counts.iter().find(|r| r.len() != cols) {
            return Err(Error::LengthMismatch {
                left: bad.len(),
                right: cols,
            });
        }
        Ok(Self {
            pred_labels: (0..counts.len()).collect(),
            truth_labels: (0..cols).collect(),
            counts,
        })
    }

    pub fn n(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    fn row_sums(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    fn col_sums(&self) -> Vec<usize> {
        let cols = self.truth_labels.len();
        (0..cols)
            .map(|t| self.counts.iter().map(|r| r[t]).sum())
            .collect()
    }

    /// Both labellings describe the same partition.
    fn is_bijective(&self) -> bool {
        let rows_ok = self
            .counts
            .iter()
            .all(|r| r.iter().filter(|&&c| c > 0).count() == 1);
        let cols_ok = (0..self.truth_labels.len())
            .all(|t| self.counts.iter().filter(|r| r[t] > 0).count() == 1);
        rows_ok && cols_ok
    }
}

fn check_len(pred: &[usize], truth: &[usize]) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    Ok(())
}

/// Contingency table of predicted clusters against true classes. Only labels
/// that occur get a row or column.
pub fn confusion(pred: &[usize], truth: &[usize]) -> Result<ConfusionMatrix> {
    check_len(pred, truth)?;
    let (p, pred_labels) = encode_labels(pred);
    let (t, truth_labels) = encode_labels(truth);
    let mut counts = vec![vec![0usize; truth_labels.len()]; pred_labels.len()];
    for (&a, &b) in p.iter().zip(&t) {
        counts[a][b] += 1;
    }
    Ok(ConfusionMatrix {
        counts,
        pred_labels,
        truth_labels,
    })
}

/// Optimal one-to-one matching of clusters to classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelMatch {
    /// `assignment[c]`: class column matched to cluster row `c`, if any.
    pub assignment: Vec<Option<usize>>,
    pub matched: usize,
    pub error_rate: f64,
}

/// Maximum-weight bipartite matching of rows to columns of `cm`
/// (Hungarian algorithm); `error_rate = 1 - matched / n`.
pub fn match_labels(cm: &ConfusionMatrix) -> LabelMatch {
    let rows = cm.counts.len();
    let cols = cm.truth_labels.len();
    let size = rows.max(cols);
    let max = cm.counts.iter().flatten().copied().max().unwrap_or(0) as i64;
    let mut cost = vec![vec![max; size]; size];
    for (r, row) in cm.counts.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            cost[r][c] = max - v as i64;
        }
    }
    let col_of_row = hungarian(&cost);
    let mut assignment = vec![None; rows];
    let mut matched = 0;
    for (r, slot) in assignment.iter_mut().enumerate() {
        let c = col_of_row[r];
        if c < cols {
            *slot = Some(c);
            matched += cm.counts[r][c];
        }
    }
    let n = cm.n();
    LabelMatch {
        assignment,
        matched,
        error_rate: if n == 0 {
            0.0
        } else {
            1.0 - matched as f64 / n as f64
        },
    }
}

/// Minimum-cost perfect assignment on a square matrix, `O(n^3)`
/// (shortest augmenting paths with potentials). Returns the column of each row.
fn hungarian(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    const INF: i64 = i64::MAX / 4;
    // 1-based with a virtual column 0.
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut row_of_col = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of_col[0] = i;
        let mut j0 = 0;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of_col[j0];
            let mut delta = INF;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of_col[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of_col[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of_col[j0] = row_of_col[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of_row = vec![0; n];
    for j in 1..=n {
        if row_of_col[j] > 0 {
            col_of_row[row_of_col[j] - 1] = j - 1;
        }
    }
    col_of_row
}

fn comb2(x: usize) -> f64 {
    let x = x as f64;
    x * (x - 1.0) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairScores {
    pub rand: f64,
    pub adjusted_rand: f64,
    pub fowlkes_mallows: f64,
}

/// Rand index, adjusted Rand index and Fowlkes-Mallows index.
pub fn pair_scores(pred: &[usize], truth: &[usize]) -> Result<PairScores> {
    let cm = confusion(pred, truth)?;
    Ok(pair_scores_from(&cm))
}

fn pair_scores_from(cm: &ConfusionMatrix) -> PairScores {
    let n = cm.n();
    let total = comb2(n);
    let same_both: f64 = cm.counts.iter().flatten().map(|&c| comb2(c)).sum();
    let same_pred: f64 = cm.row_sums().into_iter().map(comb2).sum();
    let same_truth: f64 = cm.col_sums().into_iter().map(comb2).sum();
    if cm.is_bijective() || total == 0.0 {
        return PairScores {
            rand: 1.0,
            adjusted_rand: 1.0,
            fowlkes_mallows: 1.0,
        };
    }
    let agreements = total + 2.0 * same_both - same_pred - same_truth;
    let expected = same_pred * same_truth / total;
    let max_index = 0.5 * (same_pred + same_truth);
    let adjusted_rand = if max_index - expected == 0.0 {
        0.0
    } else {
        (same_both - expected) / (max_index - expected)
    };
    let fm_den = (same_pred * same_truth).sqrt();
    PairScores {
        rand: agreements / total,
        adjusted_rand,
        fowlkes_mallows: if fm_den == 0.0 {
            0.0
        } else {
            same_both / fm_den
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoScores {
    pub mutual_info: f64,
    pub normalized_mutual_info: f64,
    pub adjusted_mutual_info: f64,
    pub homogeneity: f64,
    pub completeness: f64,
    pub v_measure: f64,
}

fn entropy(counts: &[usize], n: usize) -> f64 {
    let n = n as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

fn mutual_info_from(cm: &ConfusionMatrix) -> f64 {
    let n = cm.n() as f64;
    let a = cm.row_sums();
    let b = cm.col_sums();
    let mut mi = 0.0;
    for (r, row) in cm.counts.iter().enumerate() {
        for (c, &nij) in row.iter().enumerate() {
            if nij > 0 {
                let nij = nij as f64;
                mi += nij / n * (n * nij / (a[r] as f64 * b[c] as f64)).ln();
            }
        }
    }
    mi.max(0.0)
}

/// Expected mutual information of two labellings with the given marginals
/// under the hypergeometric (permutation) model.
pub fn expected_mutual_info(a: &[usize], b: &[usize], n: usize) -> f64 {
    let mut log_fact = vec![0.0f64; n + 1];
    for i in 1..=n {
        log_fact[i] = log_fact[i - 1] + (i as f64).ln();
    }
    let nf = n as f64;
    let mut emi = 0.0;
    for &ai in a {
        for &bj in b {
            let lo = (ai + bj).saturating_sub(n).max(1);
            let hi = ai.min(bj);
            for nij in lo..=hi {
                let term = nij as f64 / nf * (nf * nij as f64 / (ai as f64 * bj as f64)).ln();
                let log_p = log_fact[ai] + log_fact[bj] + log_fact[n - ai] + log_fact[n - bj]
                    - log_fact[n]
                    - log_fact[nij]
                    - log_fact[ai - nij]
                    - log_fact[bj - nij]
                    - log_fact[n + nij - ai - bj];
                emi += term * log_p.exp();
            }
        }
    }
    emi
}

/// Mutual information (nats), NMI, AMI, homogeneity, completeness and V-measure.
/// `pred` are the clusters, `truth` the classes.
pub fn info_scores(pred: &[usize], truth: &[usize]) -> Result<InfoScores> {
    let cm = confusion(pred, truth)?;
    Ok(info_scores_from(&cm))
}

fn info_scores_from(cm: &ConfusionMatrix) -> InfoScores {
    let n = cm.n();
    let a = cm.row_sums();
    let b = cm.col_sums();
    let h_pred = entropy(&a, n);
    let h_truth = entropy(&b, n);
    let mi = mutual_info_from(cm);
    if cm.is_bijective() {
        return InfoScores {
            mutual_info: mi,
            normalized_mutual_info: 1.0,
            adjusted_mutual_info: 1.0,
            homogeneity: 1.0,
            completeness: 1.0,
            v_measure: 1.0,
        };
    }
    let mean_h = 0.5 * (h_pred + h_truth);
    let nmi = if mean_h == 0.0 { 0.0 } else { mi / mean_h };
    let emi = expected_mutual_info(&a, &b, n);
    let ami_den = mean_h - emi;
    let ami = if ami_den.abs() < f64::EPSILON {
        0.0
    } else {
        (mi - emi) / ami_den
    };
    // H(truth | pred) = H(truth) - MI, H(pred | truth) = H(pred) - MI.
    let homogeneity = if h_truth == 0.0 { 1.0 } else { mi / h_truth };
    let completeness = if h_pred == 0.0 { 1.0 } else { mi / h_pred };
    let v_measure = if homogeneity + completeness == 0.0 {
        0.0
    } else {
        2.0 * homogeneity * completeness / (homogeneity + completeness)
    };
    InfoScores {
        mutual_info: mi,
        normalized_mutual_info: nmi.min(1.0),
        adjusted_mutual_info: ami,
        homogeneity: homogeneity.min(1.0),
        completeness: completeness.min(1.0),
        v_measure: v_measure.min(1.0),
    }
}

/// Macro-averaged F1 over true classes after matching clusters to classes.
pub fn f_score(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let cm = confusion(pred, truth)?;
    Ok(f_score_from(&cm, &match_labels(&cm)))
}

fn f_score_from(cm: &ConfusionMatrix, m: &LabelMatch) -> f64 {
    let a = cm.row_sums();
    let b = cm.col_sums();
    let classes = b.len();
    if classes == 0 {
        return 0.0;
    }
    let mut total = 0.0;
    for (r, slot) in m.assignment.iter().enumerate() {
        let Some(c) = *slot else { continue };
        let hit = cm.counts[r][c] as f64;
        if hit > 0.0 {
            let precision = hit / a[r] as f64;
            let recall = hit / b[c] as f64;
            total += 2.0 * precision * recall / (precision + recall);
        }
    }
    total / classes as f64
}

/// All scores for one labelling against the truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub rand: f64,
    pub adjusted_rand: f64,
    pub fowlkes_mallows: f64,
    pub mutual_info: f64,
    pub normalized_mutual_info: f64,
    pub adjusted_mutual_info: f64,
    pub homogeneity: f64,
    pub completeness: f64,
    pub v_measure: f64,
    pub f_score: f64,
    pub error_rate: f64,
}

impl ScoreReport {
    pub fn compute(pred: &[usize], truth: &[usize]) -> Result<Self> {
        let cm = confusion(pred, truth)?;
        let pair = pair_scores_from(&cm);
        let info = info_scores_from(&cm);
        let m = match_labels(&cm);
        Ok(Self {
            rand: pair.rand,
            adjusted_rand: pair.adjusted_rand,
            fowlkes_mallows: pair.fowlkes_mallows,
            mutual_info: info.mutual_info,
            normalized_mutual_info: info.normalized_mutual_info,
            adjusted_mutual_info: info.adjusted_mutual_info,
            homogeneity: info.homogeneity,
            completeness: info.completeness,
            v_measure: info.v_measure,
            f_score: f_score_from(&cm, &m),
            error_rate: m.error_rate,
        })
    }

    /// `(row name, value)` pairs in report order.
    pub fn rows(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("adjusted mutual info score", self.adjusted_mutual_info),
            ("adjusted rand score", self.adjusted_rand),
            ("completeness score", self.completeness),
            ("fowlkes mallows score", self.fowlkes_mallows),
            ("homogeneity score", self.homogeneity),
            ("mutual info score", self.mutual_info),
            ("normalized mutual info score", self.normalized_mutual_info),
            ("rand score", self.rand),
            ("v measure score", self.v_measure),
            ("F-score", self.f_score),
            ("error rate", self.error_rate),
        ]
    }

    /// Element-wise best over several runs: maximum for every score, minimum
    /// for the error rate.
    pub fn best_of(reports: &[ScoreReport]) -> Option<ScoreReport> {
        let first = reports.first()?.clone();
        Some(reports.iter().skip(1).fold(first, |acc, r| ScoreReport {
            rand: acc.rand.max(r.rand),
            adjusted_rand: acc.adjusted_rand.max(r.adjusted_rand),
            fowlkes_mallows: acc.fowlkes_mallows.max(r.fowlkes_mallows),
            mutual_info: acc.mutual_info.max(r.mutual_info),
            normalized_mutual_info: acc.normalized_mutual_info.max(r.normalized_mutual_info),
            adjusted_mutual_info: acc.adjusted_mutual_info.max(r.adjusted_mutual_info),
            homogeneity: acc.homogeneity.max(r.homogeneity),
            completeness: acc.completeness.max(r.completeness),
            v_measure: acc.v_measure.max(r.v_measure),
            f_score: acc.f_score.max(r.f_score),
            error_rate: acc.error_rate.min(r.error_rate),
        }))
    }
}

/// Aligned text table, one row per score, one column per named report.
pub fn render_table(columns: &[(&str, &ScoreReport)]) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:<30}", "Score");
    for (name, _) in columns {
        let _ = write!(out, " {name:>12}");
    }
    out.push('\n');
    let rows: Vec<Vec<(&str, f64)>> = columns.iter().map(|(_, r)| r.rows()).collect();
    for idx in 0..rows.first().map_or(0, Vec::len) {
        let _ = write!(out, "{:<30}", rows[0][idx].0);
        for r in &rows {
            let _ = write!(out, " {:>12.6}", r[idx].1);
        }
        out.push('\n');
    }
    out
}
