//! Loading many graph files at once.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::LabeledGraph;

use super::{load_edge_list, load_graph_with};

#[derive(Debug, Clone)]
pub struct DatasetEntry {
    pub id: String,
    pub path: PathBuf,
    pub graph: LabeledGraph,
}

/// A `.json` graph file or, for any other extension, an edge list.
pub fn read_graph(path: &Path, default_stop: f64) -> Result<LabeledGraph> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => load_graph_with(path, default_stop),
        _ => load_edge_list(path, default_stop),
    }
}

/// A directory yields its `*.json` and `*.edges` files in name order; any
/// other file is read as a list of graph paths, one per line, relative to
/// the list's directory. Files are parsed in parallel.
pub fn load_dataset(source: &Path, default_stop: f64) -> Result<Vec<DatasetEntry>> {
    let paths: Vec<PathBuf> = if source.is_dir() {
        let mut v: Vec<PathBuf> = fs::read_dir(source)
            .map_err(|e| Error::io(source, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.is_file() && matches!(p.extension().and_then(|e| e.to_str()), Some("json" | "edges"))
            })
            .collect();
        v.sort();
        v
    } else {
        let text = fs::read_to_string(source).map_err(|e| Error::io(source, e))?;
        let base = source.parent().unwrap_or(Path::new(""));
        text.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| base.join(l))
            .collect()
    };
    paths
        .into_par_iter()
        .map(|path| {
            let graph = read_graph(&path, default_stop)?;
            let id = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or_default()
                .to_string();
            Ok(DatasetEntry { id, path, graph })
        })
        .collect()
}
