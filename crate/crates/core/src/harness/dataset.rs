//! JSON Lines manifests and contract-level splits.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frontend::{parse_source, FrontendError, SourceFile};
use crate::graph::{build_mrng, Mrng};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}")]
    Io { path: String, source: std::io::Error },
    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
    #[error("{path}")]
    Frontend { path: String, source: FrontendError },
    #[error("{path}: {message}")]
    Labels { path: String, message: String },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("split ratios {0:?} must be non-negative and sum to 1")]
    Ratios([f64; 3]),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VulnerabilityClass {
    Arithmetic,
    Reentrancy,
    Timestamp,
}

impl VulnerabilityClass {
    pub fn as_str(self) -> &'static str {
        match self {
            VulnerabilityClass::Arithmetic => "arithmetic",
            VulnerabilityClass::Reentrancy => "reentrancy",
            VulnerabilityClass::Timestamp => "timestamp",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionLabel {
    pub name: String,
    pub arity: usize,
    pub label: u8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub path: String,
    pub class: VulnerabilityClass,
    pub functions: Vec<FunctionLabel>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
    /// Directory relative entry paths resolve against.
    pub base: PathBuf,
}

impl DatasetManifest {
    pub fn parse(text: &str, base: impl Into<PathBuf>) -> Result<DatasetManifest, DatasetError> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: ManifestEntry = serde_json::from_str(line).map_err(|e| DatasetError::Manifest {
                line: i + 1,
                message: e.to_string(),
            })?;
            if let Some(f) = entry.functions.iter().find(|f| f.label > 1) {
                return Err(DatasetError::Manifest {
                    line: i + 1,
                    message: format!("label {} of {} is not 0 or 1", f.label, f.name),
                });
            }
            entries.push(entry);
        }
        Ok(DatasetManifest {
            entries,
            base: base.into(),
        })
    }

    pub fn load(path: &Path) -> Result<DatasetManifest, DatasetError> {
        let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        DatasetManifest::parse(&text, base)
    }

    pub fn to_jsonl(&self) -> String {
        self.entries
            .iter()
            .map(|e| serde_json::to_string(e).expect("manifest entry serializes") + "\n")
            .collect()
    }

    pub fn resolve(&self, entry: &ManifestEntry) -> PathBuf {
        self.base.join(&entry.path)
    }
}

/// One labelled contract file with its graph.
#[derive(Clone, Debug, PartialEq)]
pub struct Contract {
    pub path: String,
    pub graph: Mrng,
    /// Aligned with `graph.functions`.
    pub labels: Vec<f64>,
}

/// Matches labels to functions by `(name, arity)` in order of occurrence.
pub fn align_labels(graph: &Mrng, labels: &[FunctionLabel], path: &str) -> Result<Vec<f64>, DatasetError> {
    let mut pool: HashMap<(&str, usize), Vec<u8>> = HashMap::new();
    for l in labels.iter().rev() {
        pool.entry((l.name.as_str(), l.arity)).or_default().push(l.label);
    }
    let mut out = Vec::with_capacity(graph.functions.len());
    for f in &graph.functions {
        let label = pool
            .get_mut(&(f.name.as_str(), f.arity))
            .and_then(Vec::pop)
            .ok_or_else(|| DatasetError::Labels {
                path: path.to_string(),
                message: format!("no label for function {:?}/{}", f.name, f.arity),
            })?;
        out.push(f64::from(label));
    }
    if let Some(((name, arity), _)) = pool.iter().find(|(_, v)| !v.is_empty()) {
        return Err(DatasetError::Labels {
            path: path.to_string(),
            message: format!("label for unknown function {name:?}/{arity}"),
        });
    }
    Ok(out)
}

pub fn load_contract(path: &Path, display: &str) -> Result<Mrng, DatasetError> {
    let bytes = std::fs::read(path).map_err(|source| DatasetError::Io {
        path: display.to_string(),
        source,
    })?;
    let file = SourceFile::from_bytes(display, bytes).map_err(|source| DatasetError::Frontend {
        path: display.to_string(),
        source,
    })?;
    let ast = parse_source(&file).map_err(|source| DatasetError::Frontend {
        path: display.to_string(),
        source,
    })?;
    Ok(build_mrng(display, &ast))
}

/// Parses every entry and aligns its labels.
pub fn load_dataset(manifest: &DatasetManifest) -> Result<Vec<Contract>, DatasetError> {
    manifest
        .entries
        .iter()
        .map(|entry| {
            let graph = load_contract(&manifest.resolve(entry), &entry.path)?;
            let labels = align_labels(&graph, &entry.functions, &entry.path)?;
            Ok(Contract {
                path: entry.path.clone(),
                graph,
                labels,
            })
        })
        .collect()
}

/// Index partition of a dataset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seeded shuffle of `n` contracts; validation and test get
/// `floor(ratio·n)` each, train the remainder.
pub fn split_dataset(n: usize, ratios: [f64; 3], seed: u64) -> Result<Split, DatasetError> {
    if n == 0 {
        return Err(DatasetError::EmptyDataset);
    }
    if ratios.iter().any(|r| !(0.0..=1.0).contains(r)) || (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(DatasetError::Ratios(ratios));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let take = |r: f64| (r * n as f64 + 1e-9).floor() as usize;
    let (nv, nt) = (take(ratios[1]), take(ratios[2]));
    let train = order[..n - nv - nt].to_vec();
    let validation = order[n - nv - nt..n - nt].to_vec();
    let test = order[n - nt..].to_vec();
    Ok(Split {
        train,
        validation,
        test,
    })
}
