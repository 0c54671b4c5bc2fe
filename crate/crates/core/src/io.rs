//! File formats: graph documents, pair manifests (JSON lines), embedding
//! matrices, and atomic writes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{GwcaError, Result};
use crate::graph::{Graph, GraphJson};
use crate::synth::SynthDataset;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> GwcaError + '_ {
    move |source| GwcaError::Io { path: path.to_path_buf(), source }
}

fn parse_err(path: &Path, message: impl std::fmt::Display) -> GwcaError {
    GwcaError::Parse { path: path.to_path_buf(), message: message.to_string() }
}

/// Writes `bytes` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(path))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.as_file().sync_all().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| GwcaError::Io { path: path.to_path_buf(), source: e.error })?;
    Ok(())
}

pub fn read_graph(path: &Path) -> Result<Graph> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let doc: GraphJson = serde_json::from_str(&text).map_err(|e| parse_err(path, e))?;
    Graph::from_json(&doc).map_err(|e| parse_err(path, e))
}

pub fn graph_to_string(g: &Graph) -> String {
    serde_json::to_string(&g.to_json()).expect("graph documents always serialize")
}

pub fn write_graph(path: &Path, g: &Graph) -> Result<()> {
    write_atomic(path, graph_to_string(g).as_bytes())
}

/// One manifest line: `{"id": .., "view1": path, "view2": path}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub view1: String,
    pub view2: String,
}

/// Reads a JSON-lines manifest. Relative view paths are resolved against the
/// manifest's directory. Blank lines are skipped.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let base = path.parent().unwrap_or(Path::new(""));
    let resolve = |p: &str| -> String {
        let pb = Path::new(p);
        if pb.is_absolute() {
            p.to_string()
        } else {
            base.join(pb).to_string_lossy().into_owned()
        }
    };
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let e: ManifestEntry =
                serde_json::from_str(line).map_err(|e| parse_err(path, format!("line {}: {e}", i + 1)))?;
            Ok(ManifestEntry { view1: resolve(&e.view1), view2: resolve(&e.view2), id: e.id })
        })
        .collect()
}

pub fn manifest_to_string(entries: &[ManifestEntry]) -> String {
    entries.iter().map(|e| serde_json::to_string(e).expect("manifest entries always serialize") + "\n").collect()
}

/// A loaded pair: id plus both view graphs.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedPair {
    pub id: String,
    pub view1: Graph,
    pub view2: Graph,
}

pub fn load_pairs(manifest: &Path) -> Result<Vec<LoadedPair>> {
    read_manifest(manifest)?
        .into_iter()
        .map(|e| {
            Ok(LoadedPair {
                view1: read_graph(Path::new(&e.view1))?,
                view2: read_graph(Path::new(&e.view2))?,
                id: e.id,
            })
        })
        .collect()
}

#[derive(Deserialize)]
struct EmbeddingsJson {
    embeddings: Vec<Vec<f64>>,
}

fn rows_to_matrix(path: &Path, rows: Vec<Vec<f64>>) -> Result<DMatrix<f64>> {
    let d = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || d == 0 {
        return Err(parse_err(path, "no embedding rows"));
    }
    if let Some(i) = rows.iter().position(|r| r.len() != d) {
        return Err(parse_err(path, format!("row {i} has {} values, expected {d}", rows[i].len())));
    }
    Ok(DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]))
}

/// Reads an embedding matrix, one node per row, from either
/// `{"embeddings": [[...], ...]}` or a headerless CSV.
pub fn read_embeddings(path: &Path) -> Result<DMatrix<f64>> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    if text.trim_start().starts_with('{') {
        let doc: EmbeddingsJson = serde_json::from_str(&text).map_err(|e| parse_err(path, e))?;
        return rows_to_matrix(path, doc.embeddings);
    }
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| parse_err(path, e))?;
        let row = record
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| parse_err(path, format!("row {i}: {f:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    rows_to_matrix(path, rows)
}

/// Paths written by [`write_dataset`].
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetFiles {
    pub manifest: PathBuf,
    /// Present when a test split was requested.
    pub split: Option<(PathBuf, PathBuf)>,
    pub graph_files: usize,
}

/// Writes every pair as `graphs/<id>_v1.json` / `graphs/<id>_v2.json` under
/// `out`, plus `manifest.jsonl`. With `test > 0` the last `test` pairs also go
/// to `test.jsonl` and the rest to `train.jsonl`.
///
/// Files are staged in a temporary directory inside `out` and moved into
/// place only once everything has been written; manifests move last.
pub fn write_dataset(out: &Path, ds: &SynthDataset, test: usize) -> Result<DatasetFiles> {
    if test > ds.pairs.len() {
        return Err(GwcaError::InvalidConfig(format!("test split of {test} exceeds {} pairs", ds.pairs.len())));
    }
    fs::create_dir_all(out).map_err(io_err(out))?;
    let stage = tempfile::Builder::new().prefix(".staging-").tempdir_in(out).map_err(io_err(out))?;
    let stage_graphs = stage.path().join("graphs");
    fs::create_dir_all(&stage_graphs).map_err(io_err(&stage_graphs))?;

    let mut entries = Vec::with_capacity(ds.pairs.len());
    for p in &ds.pairs {
        let v1 = format!("graphs/{}_v1.json", p.id);
        let v2 = format!("graphs/{}_v2.json", p.id);
        for (rel, g) in [(&v1, &p.view1), (&v2, &p.view2)] {
            let path = stage.path().join(rel);
            fs::write(&path, graph_to_string(g)).map_err(io_err(&path))?;
        }
        entries.push(ManifestEntry { id: p.id.clone(), view1: v1, view2: v2 });
    }
    let mut manifests = vec![("manifest.jsonl", manifest_to_string(&entries))];
    if test > 0 {
        let cut = entries.len() - test;
        manifests.push(("train.jsonl", manifest_to_string(&entries[..cut])));
        manifests.push(("test.jsonl", manifest_to_string(&entries[cut..])));
    }
    for (name, body) in &manifests {
        let path = stage.path().join(name);
        fs::write(&path, body).map_err(io_err(&path))?;
    }

    let graphs = out.join("graphs");
    if !entries.is_empty() {
        fs::create_dir_all(&graphs).map_err(io_err(&graphs))?;
    }
    for e in &entries {
        for rel in [&e.view1, &e.view2] {
            let to = out.join(rel);
            fs::rename(stage.path().join(rel), &to).map_err(io_err(&to))?;
        }
    }
    for (name, _) in &manifests {
        let to = out.join(name);
        fs::rename(stage.path().join(name), &to).map_err(io_err(&to))?;
    }

    Ok(DatasetFiles {
        manifest: out.join("manifest.jsonl"),
        split: (test > 0).then(|| (out.join("train.jsonl"), out.join("test.jsonl"))),
        graph_files: 2 * entries.len(),
    })
}
