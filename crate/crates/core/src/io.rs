//! File formats: CSV exports of similarity matrices, embeddings, clusterings and
//! spectra, plus JSON metadata sidecars (`<file>.meta.json`).
//!
//! Floats in CSV are written with 17 significant digits, so every value reads
//! back bit-identical.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::corpus::SimilarityMatrix;
use crate::embed::{Embedding, EmbeddingKind};
use crate::{Error, Result};

pub const TOOL_NAME: &str = "gsx";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(s: &str, path: &Path, line: usize) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("not a number: {s:?}"),
    })
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Provenance attached to every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng: Option<String>,
    /// Full command configuration.
    pub config: serde_json::Value,
    /// Format-specific payload, e.g. embedding eigenvalues.
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub details: serde_json::Value,
}

impl Metadata {
    pub fn new(command: &str, config: impl Serialize) -> Result<Self> {
        Ok(Self {
            tool: TOOL_NAME.to_string(),
            version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            seed: None,
            rng: None,
            config: serde_json::to_value(config)?,
            details: serde_json::Value::Null,
        })
    }

    pub fn with_seed(mut self, seed: u64, rng: &str) -> Self {
        self.seed = Some(seed);
        self.rng = Some(rng.to_string());
        self
    }

    pub fn with_details(mut self, details: impl Serialize) -> Result<Self> {
        self.details = serde_json::to_value(details)?;
        Ok(self)
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

pub fn write_metadata(path: &Path, meta: &Metadata) -> Result<()> {
    write_json(&sidecar_path(path), meta)
}

pub fn read_metadata(path: &Path) -> Result<Metadata> {
    read_json(&sidecar_path(path))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn records(path: &Path) -> Result<Vec<(usize, csv::StringRecord)>> {
    read_records(File::open(path)?, path)
}

fn read_records<R: Read>(reader: R, origin: &Path) -> Result<Vec<(usize, csv::StringRecord)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        out.push((line, rec));
    }
    if out.is_empty() {
        return Err(parse_err(origin, 0, "empty file"));
    }
    Ok(out)
}

/// n×n similarity matrix. With `ids`, the first row is `doc_id,<ids...>` and
/// each row starts with its document id.
pub fn write_similarity_csv<W: Write>(
    out: W,
    s: &SimilarityMatrix,
    ids: Option<&[&str]>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if let Some(ids) = ids {
        if ids.len() != s.n() {
            return Err(Error::LengthMismatch {
                left: ids.len(),
                right: s.n(),
            });
        }
        w.write_field("doc_id")?;
        w.write_record(ids)?;
    }
    for (i, row) in s.matrix().outer_iter().enumerate() {
        if let Some(ids) = ids {
            w.write_field(ids[i])?;
        }
        w.write_record(row.iter().map(|&v| fmt_f64(v)))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads either layout written by [`write_similarity_csv`]; ids are returned
/// when present.
pub fn read_similarity_csv(path: &Path) -> Result<(Option<Vec<String>>, SimilarityMatrix)> {
    let recs = records(path)?;
    let headered = recs[0].1.get(0).is_some_and(|f| f.trim() == "doc_id");
    let (ids, body, skip) = if headered {
        let ids: Vec<String> = recs[0].1.iter().skip(1).map(str::to_string).collect();
        (Some(ids), &recs[1..], 1)
    } else {
        (None, &recs[..], 0)
    };
    let n = body.len();
    let mut m = Array2::zeros((n, n));
    for (i, (line, rec)) in body.iter().enumerate() {
        let fields: Vec<&str> = rec.iter().skip(skip).collect();
        if fields.len() != n {
            return Err(parse_err(
                path,
                *line,
                format!("expected {n} values, found {}", fields.len()),
            ));
        }
        if let Some(ids) = &ids {
            if rec.get(0) != Some(ids[i].as_str()) {
                return Err(parse_err(path, *line, "row id does not match header"));
            }
        }
        for (j, f) in fields.iter().enumerate() {
            m[[i, j]] = parse_f64(f, path, *line)?;
        }
    }
    if let Some(ids) = &ids {
        if ids.len() != n {
            return Err(parse_err(
                path,
                1,
                format!("{} ids for {n} rows", ids.len()),
            ));
        }
    }
    Ok((ids, SimilarityMatrix::new(m)?))
}

/// Embedding description stored in the sidecar's `details`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingMeta {
    pub kind: EmbeddingKind,
    pub r: usize,
    pub eigenvalues_used: Vec<f64>,
    pub lingoes_sigma: f64,
    pub source_dim: usize,
}

impl From<&Embedding> for EmbeddingMeta {
    fn from(e: &Embedding) -> Self {
        Self {
            kind: e.kind,
            r: e.dim(),
            eigenvalues_used: e.eigenvalues_used.clone(),
            lingoes_sigma: e.lingoes_sigma,
            source_dim: e.source_dim,
        }
    }
}

/// Writes `doc_id,z_1..z_r` rows and the sidecar. `meta.details` is replaced
/// by the embedding description.
pub fn write_embedding(path: &Path, emb: &Embedding, ids: &[&str], meta: Metadata) -> Result<()> {
    if ids.len() != emb.n() {
        return Err(Error::LengthMismatch {
            left: ids.len(),
            right: emb.n(),
        });
    }
    let mut w = csv::Writer::from_writer(create(path)?);
    let mut header = vec!["doc_id".to_string()];
    header.extend((1..=emb.dim()).map(|c| format!("z_{c}")));
    w.write_record(&header)?;
    for (i, row) in emb.coords.outer_iter().enumerate() {
        w.write_field(ids[i])?;
        w.write_record(row.iter().map(|&v| fmt_f64(v)))?;
    }
    w.flush()?;
    write_metadata(path, &meta.with_details(EmbeddingMeta::from(emb))?)
}

pub fn read_embedding(path: &Path) -> Result<(Vec<String>, Embedding)> {
    let meta: EmbeddingMeta = serde_json::from_value(read_metadata(path)?.details)?;
    let recs = records(path)?;
    let r = recs[0].1.len().saturating_sub(1);
    if r != meta.r {
        return Err(parse_err(
            path,
            1,
            format!("header has {r} coordinates, metadata says {}", meta.r),
        ));
    }
    let body = &recs[1..];
    let mut coords = Array2::zeros((body.len(), r));
    let mut ids = Vec::with_capacity(body.len());
    for (i, (line, rec)) in body.iter().enumerate() {
        if rec.len() != r + 1 {
            return Err(parse_err(path, *line, format!("expected {} fields", r + 1)));
        }
        ids.push(rec[0].to_string());
        for c in 0..r {
            coords[[i, c]] = parse_f64(&rec[c + 1], path, *line)?;
        }
    }
    Ok((
        ids,
        Embedding {
            kind: meta.kind,
            coords,
            eigenvalues_used: meta.eigenvalues_used,
            lingoes_sigma: meta.lingoes_sigma,
            source_dim: meta.source_dim,
        },
    ))
}

/// `doc_id,label` rows.
pub fn write_labels_csv<W: Write, L: ToString>(out: W, ids: &[&str], labels: &[L]) -> Result<()> {
    if ids.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: ids.len(),
            right: labels.len(),
        });
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["doc_id", "label"])?;
    for (id, l) in ids.iter().zip(labels) {
        w.write_record([*id, l.to_string().as_str()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `doc_id,label` rows; labels are kept as strings.
pub fn read_labels_csv(path: &Path) -> Result<Vec<(String, String)>> {
    let recs = records(path)?;
    let mut out = Vec::with_capacity(recs.len());
    for (line, rec) in &recs[1..] {
        if rec.len() != 2 {
            return Err(parse_err(path, *line, "expected doc_id,label"));
        }
        out.push((rec[0].to_string(), rec[1].to_string()));
    }
    Ok(out)
}

/// `index,eigenvalue` rows, index starting at 1, values in the given order.
pub fn write_spectrum_csv<W: Write>(out: W, values: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "eigenvalue"])?;
    for (i, v) in values.iter().enumerate() {
        w.write_record([(i + 1).to_string(), fmt_f64(*v)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_spectrum_csv(path: &Path) -> Result<Vec<f64>> {
    let recs = records(path)?;
    recs[1..]
        .iter()
        .map(|(line, rec)| match rec.get(1) {
            Some(v) => parse_f64(v, path, *line),
            None => Err(parse_err(path, *line, "expected index,eigenvalue")),
        })
        .collect()
}

/// Generic headered numeric table (used for scatter and error tables).
pub fn write_table_csv<W: Write>(out: W, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::LengthMismatch {
                left: row.len(),
                right: header.len(),
            });
        }
        w.write_record(row.iter().map(|&v| fmt_f64(v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_table_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let recs = records(path)?;
    let header: Vec<String> = recs[0].1.iter().map(str::to_string).collect();
    let rows = recs[1..]
        .iter()
        .map(|(line, rec)| rec.iter().map(|f| parse_f64(f, path, *line)).collect())
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok((header, rows))
}

/// Opens `path` for writing, buffered.
pub fn create_file(path: &Path) -> Result<BufWriter<File>> {
    create(path)
}
