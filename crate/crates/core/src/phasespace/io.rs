//! CSV + JSON sidecar storage for phase functions.
//!
//! The CSV has header `axis0,axis1,...,re,im` with one row per node in
//! row-major order; the sidecar `<name>.json` records the grid and `hbar`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Axis, PhaseFunction, PhaseGrid};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSidecar {
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
    pub counts: Vec<usize>,
    pub periodic: Vec<bool>,
    pub hbar: f64,
}

impl GridSidecar {
    pub fn new(grid: &PhaseGrid, hbar: f64) -> Self {
        let a = grid.axes();
        Self {
            mins: a.iter().map(|a| a.min).collect(),
            maxs: a.iter().map(|a| a.max).collect(),
            counts: a.iter().map(|a| a.count).collect(),
            periodic: a.iter().map(|a| a.periodic).collect(),
            hbar,
        }
    }

    pub fn grid(&self) -> Result<PhaseGrid> {
        let n = self.mins.len();
        if self.maxs.len() != n || self.counts.len() != n || self.periodic.len() != n {
            return Err(Error::Format("sidecar arrays differ in length".into()));
        }
        PhaseGrid::new((0..n).map(|k| Axis { min: self.mins[k], max: self.maxs[k], count: self.counts[k], periodic: self.periodic[k] }).collect())
    }
}

pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Writes the CSV rows to any writer.
pub fn write_function_csv_to<W: Write>(f: &PhaseFunction, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let d = f.grid().ndim();
    let mut header: Vec<String> = (0..d).map(|k| format!("axis{k}")).collect();
    header.push("re".into());
    header.push("im".into());
    w.write_record(&header)?;
    for (i, v) in f.values().iter().enumerate() {
        let mut row: Vec<String> = f.grid().point(i).iter().map(|x| format!("{x:e}")).collect();
        row.push(format!("{:e}", v.re));
        row.push(format!("{:e}", v.im));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_function(f: &PhaseFunction, csv_path: &Path, hbar: f64) -> Result<()> {
    write_function_csv_to(f, BufWriter::new(File::create(csv_path)?))?;
    let side = serde_json::to_string_pretty(&GridSidecar::new(f.grid(), hbar))?;
    std::fs::write(sidecar_path(csv_path), side)?;
    Ok(())
}

/// Reads a function and its `hbar` back from CSV + sidecar.
pub fn read_function(csv_path: &Path) -> Result<(PhaseFunction, f64)> {
    let side: GridSidecar = serde_json::from_str(&std::fs::read_to_string(sidecar_path(csv_path))?)?;
    let grid = side.grid()?;
    let mut r = csv::Reader::from_path(csv_path)?;
    let d = grid.ndim();
    let headers = r.headers()?.clone();
    if headers.len() != d + 2 || &headers[d] != "re" || &headers[d + 1] != "im" {
        return Err(Error::Format(format!("expected {} columns ending in re,im", d + 2)));
    }
    let mut values = Vec::with_capacity(grid.len());
    for rec in r.records() {
        let rec = rec?;
        let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Format(format!("bad number {s:?}: {e}")));
        values.push(Complex64::new(parse(&rec[d])?, parse(&rec[d + 1])?));
    }
    Ok((PhaseFunction::from_values(grid, values)?, side.hbar))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = std::env::temp_dir().join(format!("wwm-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let g = PhaseGrid::new(vec![Axis::new(-1.0, 1.0, 5), Axis::periodic(0.0, 3.0, 4)]).unwrap();
        let f = PhaseFunction::from_fn(g, |x| Complex64::new(x[0].sin(), x[1] / 3.0));
        let path = dir.join("f.csv");
        write_function(&f, &path, 0.25).unwrap();
        let (g2, hbar) = read_function(&path).unwrap();
        assert_eq!(hbar, 0.25);
        assert!(g2.grid().same_as(f.grid()));
        assert_eq!(g2.values(), f.values());
        std::fs::remove_dir_all(dir).ok();
    }
}
