use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use serde::{Deserialize, Serialize};
use wwm_core::charts::{
    build_involutive_set, lipschitz_check, trusted_nodes, AtlasFile, ChartEntry, Hypersurface, TransportOptions, DEFAULT_BRACKET_TOL, DEFAULT_LIPSCHITZ_CAP,
};
use wwm_core::phasespace::io::read_function;
use wwm_core::phasespace::{poisson_bracket, Axis, AxisBox, PhaseFunction, PhaseGrid, Polynomial};
use wwm_core::{Error, Result};

use crate::inputs::{read_json, relative_to, GridSpec};
use crate::output::Output;
use crate::Common;

#[derive(Subcommand, Debug)]
pub enum ChartsCommand {
    /// Transport seed data into each chart and write the atlas.
    Build(BuildArgs),
    /// Re-check brackets and scale ordering of an existing atlas.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct BuildArgs {
    /// Atlas configuration JSON.
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub atlas: PathBuf,
    /// Polynomial Hamiltonian JSON.
    #[arg(long)]
    pub hamiltonian: PathBuf,
    #[arg(long, default_value_t = DEFAULT_BRACKET_TOL)]
    pub bracket_tol: f64,
}

/// Seed of one extra constant: a polynomial on a grid over the remaining
/// axes, or a function CSV.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedConfig {
    pub axis: usize,
    pub value: f64,
    #[serde(default)]
    pub polynomial: Option<Polynomial>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub function: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartConfig {
    #[serde(rename = "box")]
    pub region: AxisBox,
    pub counts: Vec<usize>,
    #[serde(default)]
    pub seeds: Vec<SeedConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildConfig {
    pub hamiltonian: Polynomial,
    pub epsilon: f64,
    #[serde(default)]
    pub periods: Vec<Option<f64>>,
    #[serde(default)]
    pub bracket_tol: Option<f64>,
    #[serde(default)]
    pub transport: Option<TransportOptions>,
    #[serde(default)]
    pub lipschitz_cap: Option<f64>,
    pub charts: Vec<ChartConfig>,
}

#[derive(Debug, Serialize)]
pub struct ChartReport {
    pub id: usize,
    pub nodes: usize,
    pub flagged: usize,
    pub residuals: Vec<Vec<f64>>,
    pub lipschitz_bound: f64,
    pub lipschitz_ok: bool,
    pub min_transversality: Option<f64>,
    #[serde(skip)]
    pub constants: Vec<PhaseFunction>,
}

fn seed_surface(base: &Path, s: &SeedConfig) -> Result<Hypersurface> {
    let f = match (&s.polynomial, &s.grid, &s.function) {
        (Some(p), Some(g), None) => PhaseFunction::from_polynomial(g.grid()?, p.clone())?,
        (None, None, Some(path)) => read_function(&relative_to(base, path))?.0,
        _ => return Err(Error::Invalid("a seed needs either polynomial and grid, or function".into())),
    };
    Hypersurface::new(s.axis, s.value, f)
}

fn chart_grid(c: &ChartConfig) -> Result<PhaseGrid> {
    if c.counts.len() != c.region.dim() {
        return Err(Error::Invalid("chart counts must match the box dimension".into()));
    }
    PhaseGrid::new((0..c.counts.len()).map(|k| Axis::new(c.region.lo[k], c.region.hi[k], c.counts[k])).collect())
}

/// Builds every chart of `cfg`, adding the constant files to `out`.
/// Returns the atlas description and per-chart reports.
pub fn build_atlas(c: &Common, base: &Path, cfg: &BuildConfig, out: &mut Output) -> Result<(AtlasFile, Vec<ChartReport>)> {
    let boxes: Vec<AxisBox> = cfg.charts.iter().map(|ch| AxisBox::new(ch.region.lo.clone(), ch.region.hi.clone())).collect::<Result<_>>()?;
    // Validates geometry and the scale ordering before any transport work.
    wwm_core::charts::build_partition(&boxes, cfg.epsilon, &cfg.periods, c.hbar, c.action_scale)?;
    let tol = cfg.bracket_tol.unwrap_or(DEFAULT_BRACKET_TOL);
    let opts = cfg.transport.clone().unwrap_or_default();
    let mut entries = Vec::new();
    let mut reports = Vec::new();
    for (id, ch) in cfg.charts.iter().enumerate() {
        let grid = chart_grid(ch)?;
        let h = PhaseFunction::from_polynomial(grid.clone(), cfg.hamiltonian.clone())?;
        let seeds = ch.seeds.iter().map(|s| seed_surface(base, s)).collect::<Result<Vec<_>>>()?;
        let set = build_involutive_set(&h, &seeds, &grid, tol, &opts)?;
        let lip = lipschitz_check(&h, None, seeds.first(), cfg.lipschitz_cap.unwrap_or(DEFAULT_LIPSCHITZ_CAP))?;
        let mut files = Vec::new();
        for (k, f) in set.constants.iter().enumerate() {
            let stem = format!("chart{id}_c{k}");
            out.add_function(&stem, f, c.hbar)?;
            files.push(format!("{stem}.csv"));
        }
        entries.push(ChartEntry { id, region: ch.region.clone(), epsilon: cfg.epsilon, constants: files });
        reports.push(ChartReport {
            id,
            nodes: grid.len(),
            flagged: set.flagged.len(),
            residuals: set.residuals,
            lipschitz_bound: lip.bound,
            lipschitz_ok: lip.ok,
            min_transversality: (!seeds.is_empty()).then_some(lip.min_transversality),
            constants: set.constants,
        });
    }
    let atlas = AtlasFile { charts: entries, epsilon: cfg.epsilon, hbar: c.hbar, action_scale: c.action_scale, periods: cfg.periods.clone() };
    Ok((atlas, reports))
}

#[derive(Debug, Serialize)]
struct VerifyChart {
    id: usize,
    max_bracket: f64,
    trusted: usize,
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    ok: bool,
    bracket_tol: f64,
    hbar_ratio: f64,
    action_ratio: f64,
    partition_defect: f64,
    charts: Vec<VerifyChart>,
}

fn verify(a: &VerifyArgs, out: &mut Output) -> Result<()> {
    let file: AtlasFile = read_json(&a.atlas)?;
    let atlas = file.to_atlas()?;
    let h_poly: Polynomial = read_json(&a.hamiltonian)?;
    let mut charts = Vec::new();
    let mut probes = Vec::new();
    for entry in &file.charts {
        let mut constants = Vec::new();
        for path in &entry.constants {
            constants.push(read_function(&relative_to(&a.atlas, path))?.0);
        }
        let Some(first) = constants.first() else {
            return Err(Error::Invalid(format!("chart {} lists no constants", entry.id)));
        };
        let grid = first.grid().clone();
        for i in (0..grid.len()).step_by(97) {
            probes.push(grid.point(i));
        }
        let h = PhaseFunction::from_polynomial(grid.clone(), h_poly.clone())?;
        let valid: Vec<bool> = (0..grid.len()).map(|i| constants.iter().all(|f| f.values()[i].re.is_finite())).collect();
        let trusted = trusted_nodes(&grid, &valid);
        let mut all = vec![h];
        all.extend(constants.into_iter().skip(1));
        let mut worst = (0.0f64, 0, 0, Vec::new());
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                let b = poisson_bracket(&all[i], &all[j])?;
                for &n in &trusted {
                    let v = b.values()[n].norm();
                    if v > worst.0 {
                        worst = (v, i, j, grid.point(n));
                    }
                }
            }
        }
        if worst.0 > a.bracket_tol {
            return Err(Error::NotInvolutive { i: worst.1, j: worst.2, value: worst.0, location: worst.3 });
        }
        charts.push(VerifyChart { id: entry.id, max_bracket: worst.0, trusted: trusted.len() });
    }
    let covered: Vec<Vec<f64>> = probes.into_iter().filter(|x| atlas.chart_of(x).is_some()).collect();
    let report = VerifyReport {
        ok: true,
        bracket_tol: a.bracket_tol,
        hbar_ratio: atlas.hbar_ratio(),
        action_ratio: atlas.action_ratio(),
        partition_defect: atlas.partition_defect(&covered),
        charts,
    };
    out.add_json("verify.json", &report)
}

pub fn run(c: &Common, cmd: &ChartsCommand, out: &mut Output) -> Result<(&'static str, serde_json::Value)> {
    match cmd {
        ChartsCommand::Build(a) => {
            let cfg: BuildConfig = read_json(&a.config)?;
            let (atlas, reports) = build_atlas(c, &a.config, &cfg, out)?;
            out.add_json("atlas.json", &atlas)?;
            out.add_json("report.json", &reports)?;
            Ok(("charts build", serde_json::to_value(a)?))
        }
        ChartsCommand::Verify(a) => {
            verify(a, out)?;
            Ok(("charts verify", serde_json::to_value(a)?))
        }
    }
}
