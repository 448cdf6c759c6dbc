use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};
use wwm_core::charts::{Atlas, AtlasFile, Chart};
use wwm_core::classical::{chi_square_2d, classical_density, config_volume, sample_trajectories, LevelSpec, MicroVolume};
use wwm_core::phasespace::io::read_function;
use wwm_core::phasespace::{integrate_phase, Integrator, PolynomialHamiltonian, Polynomial};
use wwm_core::{Error, Result};

use crate::inputs::{read_json, relative_to, GridSpec};
use crate::output::{csv_row, Output};
use crate::Common;

#[derive(Args, Debug, Serialize)]
pub struct ClassicalArgs {
    /// Atlas JSON written by `charts build`.
    #[arg(long)]
    pub atlas: PathBuf,
    /// Level specifications JSON.
    #[arg(long)]
    pub specs: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub count: usize,
    pub times: Vec<f64>,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_bins")]
    pub bins: usize,
}

fn default_dt() -> f64 {
    0.02
}

fn default_bins() -> usize {
    32
}

fn default_samples() -> usize {
    400_000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecsFile {
    pub hamiltonian: Polynomial,
    pub eta: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    pub levels: Vec<LevelSpec>,
    pub grid: GridSpec,
    #[serde(default)]
    pub ensemble: Option<EnsembleConfig>,
}

#[derive(Debug, Serialize)]
pub struct ClassicalReport {
    pub normalization: f64,
    pub raw_normalization: f64,
    pub min_value: f64,
    pub chi_square_p: Vec<Option<f64>>,
    pub volumes: Vec<MicroVolume>,
}

pub fn load_charts(atlas_path: &Path, file: &AtlasFile) -> Result<Vec<Chart>> {
    file.charts
        .iter()
        .map(|e| {
            let constants = e.constants.iter().map(|p| read_function(&relative_to(atlas_path, p)).map(|r| r.0)).collect::<Result<Vec<_>>>()?;
            Ok(Chart { id: e.id, region: e.region.clone(), frontier_width: e.epsilon, constants, angles: None })
        })
        .collect()
}

/// Density, ensemble and report for already loaded charts.
pub fn run_specs(c: &Common, charts: &[Chart], atlas: Option<&Atlas>, specs: &SpecsFile, out: &mut Output) -> Result<ClassicalReport> {
    let mut volumes = Vec::new();
    for (k, s) in specs.levels.iter().enumerate() {
        let chart = charts.iter().find(|ch| ch.id == s.chart).ok_or(Error::UnknownChart(s.chart))?;
        volumes.push(config_volume(chart, atlas, &s.levels, specs.eta, specs.samples, c.seed.wrapping_add(k as u64))?);
    }
    let rho = classical_density(charts, atlas, &specs.levels, &volumes, specs.grid.grid()?)?;
    out.add_function("density", &rho.function, c.hbar)?;
    let normalization = integrate_phase(&rho.function, None)?.re;
    let mut chi = Vec::new();
    let mut rows = Vec::new();
    if let Some(e) = &specs.ensemble {
        let h = PolynomialHamiltonian::new(&specs.hamiltonian);
        let ens = sample_trajectories(&rho, &h, e.count, &e.times, e.dt, Integrator::Symplectic { order: 4 }, c.seed)?;
        let window = rho.function.grid().bounds();
        let weight = 1.0 / e.count as f64;
        for en in &ens {
            chi.push(if window.dim() == 2 { Some(chi_square_2d(&en.states, |x| rho.model.eval(x), &window, e.bins)?.p_value) } else { None });
            for s in &en.states {
                let mut r = vec![en.time];
                r.extend_from_slice(s);
                r.push(weight);
                rows.push(csv_row(&r));
            }
        }
    }
    let n = specs.grid.mins.len() / 2;
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((0..n).map(|k| format!("q{k}")))
        .chain((0..n).map(|k| format!("p{k}")))
        .chain(std::iter::once("weight".to_string()))
        .collect();
    out.add_csv("ensemble.csv", &header.join(","), rows);
    Ok(ClassicalReport { normalization, raw_normalization: rho.raw_normalization, min_value: rho.min_value, chi_square_p: chi, volumes })
}

pub fn run(c: &Common, a: &ClassicalArgs, out: &mut Output) -> Result<serde_json::Value> {
    let file: AtlasFile = read_json(&a.atlas)?;
    let specs: SpecsFile = read_json(&a.specs)?;
    let charts = load_charts(&a.atlas, &file)?;
    // A lone chart has no frontier to blend across.
    let atlas = if charts.len() > 1 { Some(file.to_atlas()?) } else { None };
    let report = run_specs(c, &charts, atlas.as_ref(), &specs, out)?;
    out.add_json("report.json", &report)?;
    Ok(serde_json::to_value(a)?)
}
