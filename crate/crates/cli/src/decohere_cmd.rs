use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Serialize;
use wwm_core::vanhove::io::kernels_from_json;
use wwm_core::vanhove::scenarios::{decoherence_scenario, Profile};
use wwm_core::vanhove::{decoherence_time, OmegaGrid, Pairing, VanHoveObservable, VanHoveState};
use wwm_core::{Error, Result};

use crate::output::{csv_row, Output};
use crate::Common;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Gaussian,
    Lorentzian,
}

#[derive(Args, Debug, Serialize)]
pub struct DecohereArgs {
    /// Shape of the built-in regular kernel.
    #[arg(long, value_enum, default_value_t = ProfileKind::Gaussian)]
    pub profile: ProfileKind,
    /// Kernel width along w - w'.
    #[arg(long, default_value_t = 0.5)]
    pub width: f64,
    #[arg(long, default_value_t = 10.0)]
    pub omega_max: f64,
    /// Energy nodes.
    #[arg(long, default_value_t = 401)]
    pub count: usize,
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    /// State kernel JSON (replaces the built-in scenario, needs --observable).
    #[arg(long, requires = "observable")]
    pub state: Option<PathBuf>,
    #[arg(long, requires = "state")]
    pub observable: Option<PathBuf>,
    /// End of the time series (default: the resolution horizon).
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    /// Fraction of the initial regular magnitude defining the decoherence time.
    #[arg(long, default_value_t = 0.01)]
    pub threshold: f64,
}

#[derive(Serialize)]
struct Summary {
    hbar: f64,
    horizon: f64,
    decoherence_time: Option<f64>,
    analytic_time: Option<f64>,
    singular: [f64; 2],
    initial_regular: f64,
    note: Option<String>,
}

pub fn run(c: &Common, a: &DecohereArgs, out: &mut Output) -> Result<serde_json::Value> {
    let (profile, rho, obs) = match (&a.state, &a.observable) {
        (Some(s), Some(o)) => {
            let rho = VanHoveState::new(kernels_from_json(&std::fs::read_to_string(s)?)?)?;
            let obs = VanHoveObservable::new(kernels_from_json(&std::fs::read_to_string(o)?)?)?;
            (None, rho, obs)
        }
        _ => {
            let p = match a.profile {
                ProfileKind::Gaussian => Profile::Gaussian { sigma: a.width },
                ProfileKind::Lorentzian => Profile::Lorentzian { gamma: a.width },
            };
            let (rho, obs) = decoherence_scenario(p, c.hbar, OmegaGrid::new(a.omega_max, a.count)?, a.amplitude)?;
            (Some(p), rho, obs)
        }
    };
    if a.steps == 0 {
        return Err(Error::Invalid("steps must be positive".into()));
    }
    let pairing = Pairing::new(&rho, &obs)?;
    let horizon = pairing.horizon();
    let t_max = a.t_max.unwrap_or(horizon);
    if !(t_max > 0.0) {
        return Err(Error::Invalid("t-max must be positive".into()));
    }
    let r0 = pairing.regular_unchecked(0.0).norm();
    let mut rows = Vec::with_capacity(a.steps + 1);
    for k in 0..=a.steps {
        let t = t_max * k as f64 / a.steps as f64;
        let m = pairing.mean_value(t)?;
        let total = m.total();
        let env = if r0 > 0.0 { m.regular.norm() / r0 } else { 0.0 };
        rows.push(csv_row(&[t, total.re, total.im, m.singular.re, env]));
    }
    out.add_csv("decohere.csv", "t,total_re,total_im,singular_re,regular_envelope", rows);
    let (time, note) = match decoherence_time(&rho, &obs, a.threshold) {
        Ok(d) => (Some(d.time), None),
        Err(e @ (Error::NoDecay { .. } | Error::NoRegularPart)) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let s = pairing.singular();
    out.add_json(
        "summary.json",
        &Summary {
            hbar: rho.kernels().hbar,
            horizon,
            decoherence_time: time,
            analytic_time: profile.map(|p| p.decoherence_time(a.threshold, rho.kernels().hbar)),
            singular: [s.re, s.im],
            initial_regular: r0,
            note,
        },
    )?;
    Ok(serde_json::to_value(a)?)
}
