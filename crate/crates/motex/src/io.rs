//! File formats: measure CSV, cost and study JSON, certificates, and atomic
//! output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use motex_core::costs::Payoff;
use motex_core::experiments::{Density, Method};
use motex_core::mot::DualCertificate;
use motex_core::{CostSpec, DiscreteMeasure};
use serde::{Deserialize, Serialize};

use crate::format::num;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.to_owned(),
        source,
    })
}

fn invalid(path: &Path, message: impl ToString) -> IoError {
    IoError::Invalid {
        path: path.to_owned(),
        message: message.to_string(),
    }
}

/// Parses `x,weight` lines. Blank lines and lines starting with `#` are
/// skipped; atoms may come in any order.
pub fn parse_measure(text: &str, path: &Path) -> Result<DiscreteMeasure, IoError> {
    let mut pairs = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| IoError::Parse {
            path: path.to_owned(),
            line: k + 1,
            message,
        };
        let mut fields = line.split(',').map(str::trim);
        let (Some(x), Some(w), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(err(format!("expected `x,weight`, found `{line}`")));
        };
        let x: f64 = x.parse().map_err(|_| err(format!("invalid atom `{x}`")))?;
        let w: f64 = w.parse().map_err(|_| err(format!("invalid weight `{w}`")))?;
        if !x.is_finite() || !w.is_finite() {
            return Err(err("atoms and weights must be finite".into()));
        }
        if w < 0.0 {
            return Err(err(format!("negative weight {w}")));
        }
        pairs.push((x, w));
    }
    DiscreteMeasure::from_pairs(pairs).map_err(|e| invalid(path, e))
}

pub fn read_measure(path: &Path) -> Result<DiscreteMeasure, IoError> {
    parse_measure(&read(path)?, path)
}

pub fn format_measure(measure: &DiscreteMeasure) -> String {
    measure
        .iter()
        .map(|(x, w)| format!("{},{}\n", num(x), num(w)))
        .collect()
}

/// Cost file contents, keyed by `"type"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CostFile {
    AmericanPut {
        #[serde(rename = "K1")]
        k1: f64,
        #[serde(rename = "K2")]
        k2: f64,
    },
    PutPlusQuadratic {
        #[serde(rename = "K1")]
        k1: f64,
        #[serde(rename = "K2")]
        k2: f64,
        epsilon: f64,
    },
    QuadraticSpread {
        #[serde(default)]
        c1: f64,
    },
    Constant {
        value: f64,
        #[serde(rename = "L", default = "two")]
        count: usize,
    },
    /// `c1[i]` per μ-atom and `c2[i][j]` per (μ-atom, ν-atom), in sorted atom
    /// order.
    Table {
        c1: Vec<f64>,
        c2: Vec<Vec<f64>>,
    },
    American {
        c1: Payoff,
        c2: Payoff,
    },
    Generic {
        components: Vec<Payoff>,
    },
}

fn two() -> usize {
    2
}

impl CostFile {
    pub fn is_tabulated(&self) -> bool {
        matches!(self, Self::Table { .. })
    }

    /// Builds the cost; tables are bound to the given grids.
    pub fn build(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> motex_core::Result<CostSpec> {
        match self.clone() {
            Self::AmericanPut { k1, k2 } => CostSpec::american_put(k1, k2),
            Self::PutPlusQuadratic { k1, k2, epsilon } => CostSpec::put_plus_quadratic(k1, k2, epsilon),
            Self::QuadraticSpread { c1 } => CostSpec::quadratic_spread(c1),
            Self::Constant { value, count } => CostSpec::constant(value, count),
            Self::Table { c1, c2 } => CostSpec::table(mu, nu, c1, c2),
            Self::American { c1, c2 } => CostSpec::american(c1, c2),
            Self::Generic { components } => CostSpec::generic(components),
        }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, IoError> {
    serde_json::from_str(&read(path)?).map_err(|source| IoError::Json {
        path: path.to_owned(),
        source,
    })
}

pub fn read_cost(path: &Path, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<CostSpec, IoError> {
    let file: CostFile = read_json(path)?;
    file.build(mu, nu).map_err(|e| invalid(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyFile {
    pub mu_density: Density,
    pub nu_density: Density,
    pub cost: CostFile,
    pub sizes: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Fixed μ size; defaults to each entry of `sizes`.
    #[serde(default)]
    pub mu_size: Option<usize>,
    #[serde(default)]
    pub method: Method,
}

pub fn read_study(path: &Path) -> Result<StudyFile, IoError> {
    let study: StudyFile = read_json(path)?;
    if study.cost.is_tabulated() {
        return Err(invalid(path, "tabulated costs cannot follow a changing grid"));
    }
    if study.sizes.is_empty() {
        return Err(invalid(path, "sizes must not be empty"));
    }
    Ok(study)
}

pub fn read_certificate(path: &Path) -> Result<DualCertificate, IoError> {
    read_json(path)
}

/// Writes through a temporary file in the same directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), IoError> {
    let err = |source| IoError::Write {
        path: path.to_owned(),
        source,
    };
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| err(std::io::Error::new(std::io::ErrorKind::InvalidInput, "not a file path")))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = fs::File::create(&tmp)
        .and_then(|mut f| {
            f.write_all(contents.as_bytes())?;
            f.sync_all()
        })
        .and_then(|()| fs::rename(&tmp, path));
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(err)
}
