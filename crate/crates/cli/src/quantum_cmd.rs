use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Serialize;
use wwm_core::phasespace::{integrate_phase, poisson_bracket, Polynomial};
use wwm_core::weylwigner::io::{operator_from_json, operator_to_json};
use wwm_core::weylwigner::{moyal_bracket, star_product, weyl_quantize, wigner_symb, OperatorMatrix, PositionBasis, SymbolKind, DEFAULT_MAX_DEGREE, DEFAULT_ORDER};
use wwm_core::{Error, Result};

use crate::inputs::{load_function, read_json};
use crate::output::Output;
use crate::Common;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Observable,
    State,
}

#[derive(Args, Debug, Serialize)]
pub struct SymbArgs {
    /// Operator JSON file.
    #[arg(long, conflicts_with = "oscillator")]
    pub input: Option<PathBuf>,
    /// Use the n-th oscillator eigenstate instead of a file.
    #[arg(long)]
    pub oscillator: Option<usize>,
    /// Lattice size (odd) for generated states.
    #[arg(long, default_value_t = 65)]
    pub dim: usize,
    #[arg(long, default_value_t = 0.25)]
    pub dq: f64,
    #[arg(long, value_enum, default_value_t = Kind::State)]
    pub kind: Kind,
}

#[derive(Serialize)]
struct SymbolSummary {
    hbar: f64,
    dim: usize,
    integral: [f64; 2],
    min: f64,
    max: f64,
    max_imag: f64,
}

pub fn symb(c: &Common, a: &SymbArgs, out: &mut Output) -> Result<serde_json::Value> {
    let op = match (&a.input, a.oscillator) {
        (Some(p), _) => operator_from_json(&std::fs::read_to_string(p)?)?,
        (None, Some(n)) => OperatorMatrix::oscillator_state(PositionBasis::centered(a.dim, a.dq)?, c.hbar, n)?,
        (None, None) => return Err(Error::Invalid("give --input or --oscillator".into())),
    };
    let kind = match a.kind {
        Kind::Observable => SymbolKind::Observable,
        Kind::State => SymbolKind::State,
    };
    let w = wigner_symb(&op, kind)?;
    let integral = integrate_phase(&w.function, None)?;
    let re = w.function.real_values();
    out.add_function("symbol", &w.function, op.hbar())?;
    out.add_json(
        "summary.json",
        &SymbolSummary {
            hbar: op.hbar(),
            dim: op.dim(),
            integral: [integral.re, integral.im],
            min: re.iter().cloned().fold(f64::INFINITY, f64::min),
            max: re.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            max_imag: w.function.max_imag(),
        },
    )?;
    Ok(serde_json::to_value(a)?)
}

#[derive(Args, Debug, Serialize)]
pub struct QuantizeArgs {
    /// Polynomial JSON in (q, p): {"nvars": 2, "terms": [{"powers": [a, b], "coeff": [re, im]}]}.
    #[arg(long)]
    pub poly: PathBuf,
    #[arg(long, default_value_t = 65)]
    pub dim: usize,
    #[arg(long, default_value_t = 0.25)]
    pub dq: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_DEGREE)]
    pub max_degree: usize,
}

pub fn quantize(c: &Common, a: &QuantizeArgs, out: &mut Output) -> Result<serde_json::Value> {
    let poly: Polynomial = read_json(&a.poly)?;
    let op = weyl_quantize(&poly, PositionBasis::centered(a.dim, a.dq)?, c.hbar, a.max_degree)?;
    out.add("operator.json", (operator_to_json(&op)? + "\n").into_bytes());
    let tr = op.trace();
    out.add_json("summary.json", &serde_json::json!({ "hbar": c.hbar, "dim": op.dim(), "trace": [tr.re, tr.im], "hermitian_defect": op.hermitian_defect() }))?;
    Ok(serde_json::to_value(a)?)
}

#[derive(Args, Debug, Serialize)]
pub struct StarArgs {
    /// First function (.csv with sidecar, or polynomial .json with a grid).
    #[arg(long)]
    pub f: PathBuf,
    #[arg(long)]
    pub g: PathBuf,
    /// Truncation order for sampled inputs.
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    pub order: usize,
}

pub fn star(c: &Common, a: &StarArgs, out: &mut Output) -> Result<serde_json::Value> {
    let (f, _) = load_function(&a.f)?;
    let (g, _) = load_function(&a.g)?;
    let s = star_product(&f, &g, a.order, c.hbar)?;
    out.add_function("star", &s.function, c.hbar)?;
    out.add_json("summary.json", &serde_json::json!({ "hbar": c.hbar, "order": s.order, "exact": s.exact, "trusted": s.trusted }))?;
    Ok(serde_json::to_value(a)?)
}

#[derive(Args, Debug, Serialize)]
pub struct BracketArgs {
    #[arg(long)]
    pub f: PathBuf,
    #[arg(long)]
    pub g: PathBuf,
    /// Moyal instead of Poisson bracket.
    #[arg(long)]
    pub moyal: bool,
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    pub order: usize,
}

pub fn bracket(c: &Common, a: &BracketArgs, out: &mut Output) -> Result<serde_json::Value> {
    let (f, _) = load_function(&a.f)?;
    let (g, _) = load_function(&a.g)?;
    let (b, kind) = if a.moyal { (moyal_bracket(&f, &g, a.order, c.hbar)?.function, "moyal") } else { (poisson_bracket(&f, &g)?, "poisson") };
    out.add_function("bracket", &b, c.hbar)?;
    out.add_json("summary.json", &serde_json::json!({ "kind": kind, "hbar": c.hbar, "max_abs": b.max_abs(), "exact": b.exact().is_some() }))?;
    Ok(serde_json::to_value(a)?)
}
