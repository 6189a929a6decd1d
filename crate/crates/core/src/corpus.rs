//! Corpus ingestion, tokenization, tf-idf term vectors and cosine similarity.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// An ordered collection of at least two documents with unique ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    docs: Vec<Document>,
}

impl Corpus {
    pub fn new(docs: Vec<Document>) -> Result<Self> {
        if docs.len() < 2 {
            return Err(Error::TooFewDocuments(docs.len()));
        }
        let mut seen = HashSet::with_capacity(docs.len());
        for d in &docs {
            if !seen.insert(d.id.as_str()) {
                return Err(Error::DuplicateId(d.id.clone()));
            }
        }
        Ok(Self { docs })
    }

    pub fn docs(&self) -> &[Document] {
        &self.docs
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.docs.iter().map(|d| d.id.as_str()).collect()
    }

    /// Ground-truth labels, if every document carries one.
    pub fn labels(&self) -> Option<Vec<&str>> {
        self.docs.iter().map(|d| d.label.as_deref()).collect()
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for d in &self.docs {
            serde_json::to_writer(&mut out, d)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Reads a JSONL corpus: one `{"id", "text", "label"?}` object per line.
/// Blank lines are skipped.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    parse_jsonl(reader, path)
}

pub fn parse_jsonl<R: BufRead>(reader: R, origin: &Path) -> Result<Corpus> {
    let mut docs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        docs.push(doc);
    }
    Corpus::new(docs)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizerConfig {
    pub lowercase: bool,
    pub min_token_len: usize,
    pub stopwords: HashSet<String>,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        Self {
            lowercase: true,
            min_token_len: 1,
            stopwords: HashSet::new(),
        }
    }
}

/// Splits `text` into maximal alphanumeric runs, then applies case folding,
/// the length filter and the stopword list. Length is counted in chars.
pub fn tokenize(text: &str, cfg: &TokenizerConfig) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|tok| !tok.is_empty())
        .map(|tok| {
            if cfg.lowercase {
                tok.to_lowercase()
            } else {
                tok.to_string()
            }
        })
        .filter(|tok| tok.chars().count() >= cfg.min_token_len && !cfg.stopwords.contains(tok))
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VectorizerConfig {
    pub tokenizer: TokenizerConfig,
    /// Keep documents without surviving tokens as all-zero rows instead of
    /// failing.
    pub allow_empty: bool,
}

/// Row-normalized tf-idf matrix, one row per document.
#[derive(Debug, Clone, PartialEq)]
pub struct TermMatrix {
    vocab: Vec<String>,
    rows: Array2<f64>,
    empty: Vec<bool>,
}

impl TermMatrix {
    /// Builds a term matrix from precomputed rows, normalizing each non-zero
    /// row to unit length.
    pub fn from_rows(vocab: Vec<String>, mut rows: Array2<f64>) -> Result<Self> {
        if rows.ncols() != vocab.len() {
            return Err(Error::LengthMismatch {
                left: rows.ncols(),
                right: vocab.len(),
            });
        }
        for ((i, j), &v) in rows.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::NonFinite(i, j));
            }
            if v < 0.0 {
                return Err(Error::InvalidMatrix(format!(
                    "negative term weight at ({i}, {j})"
                )));
            }
        }
        let mut empty = Vec::with_capacity(rows.nrows());
        for mut row in rows.rows_mut() {
            let norm = row.dot(&row).sqrt();
            if norm > 0.0 {
                row.mapv_inplace(|v| v / norm);
                empty.push(false);
            } else {
                empty.push(true);
            }
        }
        Ok(Self { vocab, rows, empty })
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn rows(&self) -> &Array2<f64> {
        &self.rows
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.rows.row(i)
    }

    pub fn n_docs(&self) -> usize {
        self.rows.nrows()
    }

    pub fn n_terms(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty_row(&self, i: usize) -> bool {
        self.empty[i]
    }
}

/// Smooth inverse document frequency `ln((1 + n) / (1 + df)) + 1`.
pub fn smooth_idf(n_docs: usize, df: usize) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + df as f64)).ln() + 1.0
}

/// Raw term counts times smooth idf, each row scaled to unit L2 norm.
/// The vocabulary is every surviving token, sorted lexicographically.
pub fn vectorize_tfidf(corpus: &Corpus, cfg: &VectorizerConfig) -> Result<TermMatrix> {
    let n = corpus.len();
    let mut counts: Vec<BTreeMap<String, usize>> = Vec::with_capacity(n);
    for doc in corpus.docs() {
        let mut tf = BTreeMap::new();
        for tok in tokenize(&doc.text, &cfg.tokenizer) {
            *tf.entry(tok).or_insert(0) += 1;
        }
        if tf.is_empty() && !cfg.allow_empty {
            return Err(Error::EmptyDocument(doc.id.clone()));
        }
        counts.push(tf);
    }

    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for tf in &counts {
        for term in tf.keys() {
            *df.entry(term.as_str()).or_insert(0) += 1;
        }
    }
    let vocab: Vec<String> = df.keys().map(|t| t.to_string()).collect();
    let index: HashMap<&str, usize> = vocab
        .iter()
        .enumerate()
        .map(|(j, t)| (t.as_str(), j))
        .collect();
    let idf: Vec<f64> = df.values().map(|&d| smooth_idf(n, d)).collect();

    let mut rows = Array2::zeros((n, vocab.len()));
    for (i, tf) in counts.iter().enumerate() {
        for (term, &c) in tf {
            let j = index[term.as_str()];
            rows[[i, j]] = c as f64 * idf[j];
        }
    }
    TermMatrix::from_rows(vocab, rows)
}

/// Symmetric cosine similarity matrix with zero diagonal and entries in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    s: Array2<f64>,
}

impl SimilarityMatrix {
    /// Validates an externally supplied similarity matrix. Asymmetry up to
    /// `1e-12` is symmetrized away; anything larger is rejected.
    pub fn new(mut s: Array2<f64>) -> Result<Self> {
        let n = s.nrows();
        if s.ncols() != n {
            return Err(Error::InvalidMatrix(format!(
                "similarity matrix must be square, got {}x{}",
                n,
                s.ncols()
            )));
        }
        for ((i, j), &v) in s.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::NonFinite(i, j));
            }
        }
        for i in 0..n {
            if s[[i, i]] != 0.0 {
                return Err(Error::InvalidMatrix(format!(
                    "diagonal entry {i} is not zero"
                )));
            }
            for j in (i + 1)..n {
                let (a, b) = (s[[i, j]], s[[j, i]]);
                if (a - b).abs() > 1e-12 {
                    return Err(Error::InvalidMatrix(format!("not symmetric at ({i}, {j})")));
                }
                let m = 0.5 * (a + b);
                if !(0.0..=1.0).contains(&m) {
                    return Err(Error::InvalidMatrix(format!(
                        "similarity {m} at ({i}, {j}) outside [0, 1]"
                    )));
                }
                s[[i, j]] = m;
                s[[j, i]] = m;
            }
        }
        Ok(Self { s })
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.s
    }

    pub fn n(&self) -> usize {
        self.s.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.s[[i, j]]
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.s
    }
}

/// `S = W W'` with the diagonal forced to zero and the result symmetrized.
pub fn similarity_matrix(w: &TermMatrix) -> SimilarityMatrix {
    let rows = w.rows();
    let mut s = rows.dot(&rows.t());
    let n = s.nrows();
    for i in 0..n {
        s[[i, i]] = 0.0;
        for j in (i + 1)..n {
            let m = (0.5 * (s[[i, j]] + s[[j, i]])).clamp(0.0, 1.0);
            s[[i, j]] = m;
            s[[j, i]] = m;
        }
    }
    SimilarityMatrix { s }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(texts: &[&str]) -> Corpus {
        Corpus::new(
            texts
                .iter()
                .enumerate()
                .map(|(i, t)| Document {
                    id: format!("d{i}"),
                    text: t.to_string(),
                    label: None,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn tokenizer_examples() {
        let cfg = TokenizerConfig::default();
        assert_eq!(tokenize("Cats, cats!", &cfg), vec!["cats", "cats"]);
        assert_eq!(
            tokenize("Ukraine2022 war", &cfg),
            vec!["ukraine2022", "war"]
        );
        let cfg2 = TokenizerConfig {
            min_token_len: 2,
            ..Default::default()
        };
        assert!(tokenize("a b", &cfg2).is_empty());
        let cfg3 = TokenizerConfig {
            lowercase: false,
            stopwords: ["the".to_string()].into_iter().collect(),
            ..Default::default()
        };
        assert_eq!(tokenize("the The", &cfg3), vec!["The"]);
    }

    #[test]
    fn corpus_invariants() {
        let doc = |id: &str| Document {
            id: id.into(),
            text: "x".into(),
            label: None,
        };
        assert!(matches!(
            Corpus::new(vec![doc("a"), doc("a")]),
            Err(Error::DuplicateId(id)) if id == "a"
        ));
        assert!(matches!(
            Corpus::new(vec![doc("a")]),
            Err(Error::TooFewDocuments(1))
        ));
    }

    #[test]
    fn jsonl_parse_errors_carry_line_numbers() {
        let text = "{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"b\"}\n";
        let err = parse_jsonl(text.as_bytes(), Path::new("c.jsonl")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let ok = "{\"id\":\"a\",\"text\":\"x\",\"label\":\"p\"}\n\n{\"id\":\"b\",\"text\":\"y\"}\n";
        let c = parse_jsonl(ok.as_bytes(), Path::new("c.jsonl")).unwrap();
        assert_eq!(c.ids(), vec!["a", "b"]);
        assert_eq!(c.docs()[0].label.as_deref(), Some("p"));
        assert!(c.labels().is_none());
        assert!(matches!(
            parse_jsonl("".as_bytes(), Path::new("e")),
            Err(Error::TooFewDocuments(0))
        ));
    }

    #[test]
    fn identical_docs_give_identical_rows() {
        let w = vectorize_tfidf(&corpus(&["red fox", "red fox"]), &Default::default()).unwrap();
        assert_eq!(w.row(0), w.row(1));
        let s = similarity_matrix(&w);
        assert!((s.get(0, 1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_docs_are_orthogonal_basis_rows() {
        let w = vectorize_tfidf(&corpus(&["x", "y"]), &Default::default()).unwrap();
        assert_eq!(w.vocab(), &["x".to_string(), "y".to_string()]);
        assert_eq!(w.rows(), &ndarray::array![[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(similarity_matrix(&w).get(0, 1), 0.0);
    }

    #[test]
    fn hand_evaluated_tfidf_cosine() {
        // n = 2; df(x) = 1, df(y) = 2.
        let idf_x = (3.0f64 / 2.0).ln() + 1.0;
        let idf_y = (3.0f64 / 3.0).ln() + 1.0;
        let d1 = [2.0 * idf_x, idf_y];
        let d2 = [0.0, idf_y];
        let norm = |v: &[f64; 2]| (v[0] * v[0] + v[1] * v[1]).sqrt();
        let expected = (d1[0] * d2[0] + d1[1] * d2[1]) / (norm(&d1) * norm(&d2));

        let w = vectorize_tfidf(&corpus(&["x x y", "y"]), &Default::default()).unwrap();
        let s = similarity_matrix(&w);
        assert!((s.get(0, 1) - expected).abs() < 1e-12);
        assert!((w.row(0).dot(&w.row(1)) - expected).abs() < 1e-12);
    }

    #[test]
    fn empty_documents_rejected_unless_allowed() {
        let c = corpus(&["a b", "!!!"]);
        assert!(matches!(
            vectorize_tfidf(&c, &Default::default()),
            Err(Error::EmptyDocument(id)) if id == "d1"
        ));
        let cfg = VectorizerConfig {
            allow_empty: true,
            ..Default::default()
        };
        let w = vectorize_tfidf(&c, &cfg).unwrap();
        assert!(w.is_empty_row(1));
        assert!(w.row(1).iter().all(|&v| v == 0.0));
        let s = similarity_matrix(&w);
        assert_eq!(s.matrix().row(1).sum(), 0.0);
    }

    #[test]
    fn three_doc_similarity_matches_dot_products() {
        let w =
            vectorize_tfidf(&corpus(&["x x y", "y z", "x z z q"]), &Default::default()).unwrap();
        let s = similarity_matrix(&w);
        for i in 0..3 {
            let norm: f64 = w.row(i).iter().map(|v| v * v).sum();
            assert!((norm - 1.0).abs() < 1e-12);
            for j in 0..3 {
                let dot: f64 = (0..w.n_terms())
                    .map(|t| w.rows()[[i, t]] * w.rows()[[j, t]])
                    .sum();
                let expected = if i == j { 0.0 } else { dot };
                assert!((s.get(i, j) - expected).abs() < 1e-12);
                assert_eq!(s.get(i, j), s.get(j, i));
            }
        }
    }

    #[test]
    fn similarity_validation() {
        assert!(SimilarityMatrix::new(ndarray::array![[0.0, 0.5], [0.5, 0.0]]).is_ok());
        assert!(SimilarityMatrix::new(ndarray::array![[0.1, 0.5], [0.5, 0.0]]).is_err());
        assert!(SimilarityMatrix::new(ndarray::array![[0.0, 0.5], [0.4, 0.0]]).is_err());
        assert!(SimilarityMatrix::new(ndarray::array![[0.0, 1.5], [1.5, 0.0]]).is_err());
    }
}
