use clap::Args;
use serde::Serialize;
use wwm_core::billiard::{conservation_table, lyapunov, simulate_billiard, BilliardSpec, DomainStats, LyapunovEstimate, LyapunovOptions, SimOptions};
use wwm_core::Result;

use crate::inputs::parse_list;

fn parse_state(s: &str) -> std::result::Result<[f64; 4], String> {
    parse_list(s)?.try_into().map_err(|v: Vec<f64>| format!("expected qx,qy,px,py, got {} values", v.len()))
}
use crate::output::{csv_row, Output};
use crate::Common;

#[derive(Args, Debug, Serialize)]
pub struct BilliardArgs {
    /// Half-width of the table.
    #[arg(long, default_value_t = 1.0)]
    pub lx: f64,
    /// Half-height of the table.
    #[arg(long, default_value_t = 1.0)]
    pub ly: f64,
    /// Radius of the corner disc (0 for the plain rectangle).
    #[arg(long, default_value_t = 0.25)]
    pub radius: f64,
    /// Wall softness length.
    #[arg(long, default_value_t = 0.05)]
    pub d: f64,
    /// Initial state qx,qy,px,py.
    #[arg(long, value_parser = parse_state, default_value = "0.3,0.2,0.7648421872844885,0.644217687237691")]
    pub start: [f64; 4],
    #[arg(long, default_value_t = 10.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-5)]
    pub dt: f64,
    #[arg(long, default_value_t = 100)]
    pub sample_every: usize,
    /// Also estimate the largest Lyapunov exponent.
    #[arg(long)]
    pub lyapunov: bool,
    #[arg(long, default_value_t = 1000.0)]
    pub lyapunov_time: f64,
    #[arg(long, default_value_t = 5e-4)]
    pub lyapunov_dt: f64,
}

#[derive(Serialize)]
struct Summary {
    spec: BilliardSpec,
    samples: usize,
    relative_energy_drift: f64,
    domains: Vec<DomainStats>,
    lyapunov: Option<LyapunovEstimate>,
}

pub fn run(c: &Common, a: &BilliardArgs, out: &mut Output) -> Result<serde_json::Value> {
    let spec = BilliardSpec::new(a.lx, a.ly, a.radius, a.d)?;
    let start = a.start;
    let opts = SimOptions { dt: a.dt, sample_every: a.sample_every, ..SimOptions::default() };
    let traj = simulate_billiard(&spec, start, a.t_end, &opts)?;
    let rows = (0..traj.len()).map(|i| {
        let s = traj.states[i];
        let inv = traj.invariants[i];
        let label = traj.labels[i].index() as f64;
        csv_row(&[traj.times[i], s[0], s[1], s[2], s[3], label, inv.h, inv.px, inv.py, inv.ptheta])
    });
    out.add_csv("trajectory.csv", "t,qx,qy,px,py,domain,H,Px,Py,Ptheta", rows.collect::<Vec<_>>());
    let lyap = if a.lyapunov {
        Some(lyapunov(&spec, start, a.lyapunov_time, &LyapunovOptions { dt: a.lyapunov_dt, seed: c.seed, ..LyapunovOptions::default() })?)
    } else {
        None
    };
    out.add_json(
        "summary.json",
        &Summary { spec, samples: traj.len(), relative_energy_drift: traj.relative_energy_drift(), domains: conservation_table(&spec, &traj), lyapunov: lyap },
    )?;
    Ok(serde_json::to_value(a)?)
}
