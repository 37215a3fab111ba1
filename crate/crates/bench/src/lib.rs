//! Benchmark harness for the trisection method and its DIRECT baselines.
//!
//! [`harness::run_class`] runs a set of methods over a generated problem
//! class, [`criteria`] condenses per-problem trial counts into class figures,
//! [`report`] renders them and [`diagram`] draws SVG pictures of single runs.

use std::fs;
use std::path::Path;

use thiserror::Error;
use trisect_core::problems::{ClassManifest, Difficulty, GenerateError, ProblemClass};

pub mod criteria;
pub mod diagram;
pub mod harness;
pub mod report;

pub use harness::{run_class, run_class_with, ClassReport, Method};

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed manifest: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Generate(#[from] GenerateError),
    #[error("class descriptor {0:?} is not dim:difficulty:count")]
    Descriptor(String),
}

pub fn write_manifest(class: &ProblemClass, path: &Path) -> Result<ClassManifest, ManifestError> {
    let m = class.manifest();
    fs::write(path, serde_json::to_string_pretty(&m)? + "\n")?;
    Ok(m)
}

/// Loads a manifest and checks it against a fresh regeneration.
pub fn read_manifest(path: &Path) -> Result<ClassManifest, ManifestError> {
    let m: ClassManifest = serde_json::from_str(&fs::read_to_string(path)?)?;
    m.verify()?;
    Ok(m)
}

/// `dim:difficulty:count`, e.g. `2:hard:20`.
pub fn parse_class(descriptor: &str, seed: u64) -> Result<ProblemClass, ManifestError> {
    let bad = || ManifestError::Descriptor(descriptor.to_string());
    let parts: Vec<&str> = descriptor.split(':').collect();
    let [dim, diff, count] = parts[..] else { return Err(bad()) };
    let dim: usize = dim.parse().map_err(|_| bad())?;
    let difficulty: Difficulty = diff.parse().map_err(|_| bad())?;
    let count: usize = count.parse().map_err(|_| bad())?;
    if dim == 0 || count == 0 {
        return Err(bad());
    }
    Ok(ProblemClass::new(dim, difficulty, count, seed))
}
