use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use wwm_core::phasespace::io::read_function;
use wwm_core::phasespace::{Axis, PhaseFunction, PhaseGrid, Polynomial};
use wwm_core::{Error, Result};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

/// Resolves `path` against the directory of the file that referenced it.
pub fn relative_to(base: &Path, path: &str) -> PathBuf {
    let p = Path::new(path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.parent().unwrap_or(Path::new(".")).join(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
    pub counts: Vec<usize>,
    #[serde(default)]
    pub periodic: Vec<bool>,
}

impl GridSpec {
    pub fn grid(&self) -> Result<PhaseGrid> {
        let n = self.mins.len();
        if self.maxs.len() != n || self.counts.len() != n || !(self.periodic.is_empty() || self.periodic.len() == n) {
            return Err(Error::Invalid("grid arrays differ in length".into()));
        }
        PhaseGrid::new(
            (0..n)
                .map(|k| {
                    let periodic = self.periodic.get(k).copied().unwrap_or(false);
                    if periodic {
                        Axis::periodic(self.mins[k], self.maxs[k], self.counts[k])
                    } else {
                        Axis::new(self.mins[k], self.maxs[k], self.counts[k])
                    }
                })
                .collect(),
        )
    }
}

/// A polynomial sampled on a grid: `{"polynomial": {...}, "grid": {...}}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolynomialFunctionFile {
    polynomial: Polynomial,
    grid: GridSpec,
}

/// Loads a phase function from a CSV (with sidecar) or a polynomial JSON file.
/// Returns the function and the `hbar` recorded with it, if any.
pub fn load_function(path: &Path) -> Result<(PhaseFunction, Option<f64>)> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => read_function(path).map(|(f, h)| (f, Some(h))),
        Some("json") => {
            let file: PolynomialFunctionFile = read_json(path)?;
            Ok((PhaseFunction::from_polynomial(file.grid.grid()?, file.polynomial)?, None))
        }
        _ => Err(Error::Invalid(format!("{}: expected a .csv or .json function file", path.display()))),
    }
}

pub fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',').map(|v| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"))).collect()
}
