//! Result files, run manifests and input loading.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use roundness_core::metric::SpaceFile;
use roundness_core::{load_graph, parse_edge_list, FiniteMetricSpace, Graph};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Provenance embedded in every emitted file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub tool_version: String,
    /// Seconds since the Unix epoch at the start of the run.
    pub wall_clock: u64,
    pub runtime_ms: u128,
    /// SHA-256 of each input file, keyed by path.
    pub input_hashes: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str, parameters: &impl Serialize, seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            parameters: serde_json::to_value(parameters).unwrap_or(serde_json::Value::Null),
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_clock: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            runtime_ms: 0,
            input_hashes: BTreeMap::new(),
        }
    }

    pub fn hash_input(&mut self, path: &Path, bytes: &[u8]) {
        self.input_hashes.insert(path.display().to_string(), hex::encode(Sha256::digest(bytes)));
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ResultFile<T> {
    pub manifest: RunManifest,
    pub result: T,
}

/// Space file as written by `gen`: the loader format plus a manifest.
#[derive(Debug, Serialize)]
pub struct SpaceOutput<'a> {
    pub labels: &'a [String],
    pub dist: Vec<Vec<f64>>,
    pub manifest: &'a RunManifest,
}

pub fn read_input(path: &Path, manifest: &mut RunManifest) -> Result<Vec<u8>> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    manifest.hash_input(path, &bytes);
    Ok(bytes)
}

/// Loads a space file, refusing invalid metrics unless `force` is set.
pub fn load_space(path: &Path, force: bool, manifest: &mut RunManifest) -> Result<FiniteMetricSpace> {
    let bytes = read_input(path, manifest)?;
    let raw: SpaceFile =
        serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", path.display()))?;
    let space = if force {
        FiniteMetricSpace::new_unchecked(raw.labels, raw.dist)
    } else {
        FiniteMetricSpace::new(raw.labels, raw.dist)
    };
    space.with_context(|| format!("loading {}", path.display()))
}

/// Loads a graph from an edge list, or from a space file by taking the
/// pairs at distance 1 as edges.
pub fn load_graph_file(path: &Path, manifest: &mut RunManifest) -> Result<(Graph, FiniteMetricSpace)> {
    if path.extension().is_some_and(|e| e == "json") {
        let space = load_space(path, false, manifest)?;
        let n = space.len();
        let edges: Vec<(usize, usize)> =
            (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| space.exact(i, j) == Some(1)).collect();
        let graph = Graph::new(space.labels().to_vec(), &edges)?;
        let metric = graph.metric().with_context(|| format!("graph of {}", path.display()))?;
        anyhow::ensure!(
            metric == space,
            "{} is not the graph metric of its unit-distance pairs",
            path.display()
        );
        return Ok((graph, space));
    }
    let bytes = read_input(path, manifest)?;
    let text = String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))?;
    let edges = parse_edge_list(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(load_graph(&edges).with_context(|| format!("loading {}", path.display()))?)
}

pub fn write_json(out: Option<&PathBuf>, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(out, &text)
}

pub fn write_text(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// One row of a roundness summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub space_id: String,
    pub n_points: usize,
    pub p_star: Option<f64>,
    pub capped: Option<bool>,
    pub tol: f64,
    pub p_max: f64,
    pub runtime_ms: Option<u128>,
    pub seed: u64,
}

/// CSV with the manifest on a leading `#` comment line.
pub fn csv_with_manifest<R: Serialize>(manifest: &RunManifest, rows: &[R]) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row)?;
    }
    let body = String::from_utf8(writer.into_inner()?)?;
    Ok(format!("# {}\n{body}", serde_json::to_string(manifest)?))
}
