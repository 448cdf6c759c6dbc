//! End-to-end scenarios. Each ends in a list of named checks; the run exits
//! with status 3 when any of them fails, after writing its report.

use clap::{Args, ValueEnum};
use serde::Serialize;
use wwm_core::billiard::{conservation_table, lyapunov, simulate_billiard, BilliardSpec, DomainLabel, LyapunovOptions, SimOptions};
use wwm_core::charts::{build_partition, Chart};
use wwm_core::classical::LevelSpec;
use wwm_core::phasespace::{integrate_phase, AxisBox, PhaseFunction, PhaseGrid, Polynomial};
use wwm_core::vanhove::scenarios::{decoherence_scenario, Profile};
use wwm_core::vanhove::{decoherence_time, OmegaGrid, Pairing};
use wwm_core::weylwigner::{star_product_poly, trace_pairing, weyl_operator, weyl_quantize, wigner_symb, OperatorMatrix, PositionBasis, SymbolKind};
use wwm_core::{Complex64, Result};

use crate::charts_cmd::{build_atlas, BuildConfig, ChartConfig, SeedConfig};
use crate::classical_cmd::{run_specs, EnsembleConfig, SpecsFile};
use crate::inputs::GridSpec;
use crate::output::Output;
use crate::Common;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Oscillator Wigner functions, inversion, pairing and the star commutator.
    WeylWigner,
    /// Gaussian van Hove kernel against its analytic envelope.
    Decoherence,
    /// Two-chart atlas of a separable 2-DOF oscillator.
    Charts,
    /// Microcanonical density of the 1-DOF oscillator and its sampled ensemble.
    ClassicalLimit,
    /// Sinai billiard: energy, per-domain constants and chaos.
    Billiard,
}

#[derive(Args, Debug, Serialize)]
pub struct WalkthroughArgs {
    #[arg(value_enum)]
    pub scenario: Scenario,
}

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: String,
    pub pass: bool,
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    fn below(&mut self, name: &str, value: f64, limit: f64) {
        self.0.push(Check { name: name.into(), value, limit: format!("< {limit:e}"), pass: value < limit });
    }

    fn above(&mut self, name: &str, value: f64, limit: f64) {
        self.0.push(Check { name: name.into(), value, limit: format!("> {limit:e}"), pass: value > limit });
    }
}

#[derive(Serialize)]
struct Report<'a> {
    scenario: Scenario,
    pass: bool,
    checks: &'a [Check],
    details: serde_json::Value,
}

/// Runs the scenario and returns the recorded arguments plus, if a check
/// failed, a message naming the failures.
pub fn run(c: &Common, a: &WalkthroughArgs, out: &mut Output) -> Result<(serde_json::Value, Option<String>)> {
    let mut checks = Checks::default();
    let details = match a.scenario {
        Scenario::WeylWigner => weyl_wigner(c, &mut checks, out)?,
        Scenario::Decoherence => decoherence(c, &mut checks, out)?,
        Scenario::Charts => charts(c, &mut checks, out)?,
        Scenario::ClassicalLimit => classical_limit(c, &mut checks, out)?,
        Scenario::Billiard => billiard(c, &mut checks, out)?,
    };
    let pass = checks.0.iter().all(|k| k.pass);
    out.add_json("report.json", &Report { scenario: a.scenario, pass, checks: &checks.0, details })?;
    let failed: Vec<&str> = checks.0.iter().filter(|k| !k.pass).map(|k| k.name.as_str()).collect();
    let failure = (!failed.is_empty()).then(|| format!("walkthrough checks failed: {}", failed.join(", ")));
    Ok((serde_json::to_value(a)?, failure))
}

fn weyl_wigner(c: &Common, checks: &mut Checks, out: &mut Output) -> Result<serde_json::Value> {
    let hbar = c.hbar;
    let basis = PositionBasis::centered(65, 0.25 * hbar.sqrt())?;
    let ho = (&Polynomial::q(1, 0).pow(2) + &Polynomial::p(1, 0).pow(2)).scale(0.5);
    let h_op = weyl_quantize(&ho, basis, hbar, 8)?;
    let mut mins = Vec::new();
    for n in 0..2 {
        let rho = OperatorMatrix::oscillator_state(basis, hbar, n)?;
        let w = wigner_symb(&rho, SymbolKind::State)?;
        out.add_function(&format!("wigner_n{n}"), &w.function, hbar)?;
        let norm = integrate_phase(&w.function, None)?;
        checks.below(&format!("n{n}_normalization"), (norm - Complex64::new(1.0, 0.0)).norm(), 1e-8);
        checks.below(&format!("n{n}_inversion"), weyl_operator(&w)?.max_difference(&rho), 1e-12);
        let t = trace_pairing(&rho, &h_op)?;
        let energy = (n as f64 + 0.5) * hbar;
        checks.below(&format!("n{n}_energy_trace"), (t.quantum.re - energy).abs() / energy, 1e-4);
        checks.below(&format!("n{n}_energy_phase_space"), (t.classical.re - energy).abs() / energy, 1e-4);
        mins.push(w.function.min_real());
    }
    // W_1(0, 0) = -1 / (pi hbar).
    checks.below("n1_negative_minimum", mins[1], -0.01);
    checks.below("n1_minimum_value", (mins[1] * std::f64::consts::PI * hbar + 1.0).abs(), 1e-6);
    let comm = &star_product_poly(&Polynomial::q(1, 0), &Polynomial::p(1, 0), hbar) - &star_product_poly(&Polynomial::p(1, 0), &Polynomial::q(1, 0), hbar);
    let expected = Polynomial::constant(2, Complex64::new(0.0, hbar));
    checks.below("qp_star_commutator", comm.max_coefficient_difference(&expected), 1e-14);
    Ok(serde_json::json!({ "hbar": hbar, "dim": basis.dim, "dq": basis.dq, "minima": mins }))
}

fn decoherence(c: &Common, checks: &mut Checks, out: &mut Output) -> Result<serde_json::Value> {
    let sigma = 0.5;
    let profile = Profile::Gaussian { sigma };
    let (rho, obs) = decoherence_scenario(profile, c.hbar, OmegaGrid::new(10.0, 401)?, 1.0)?;
    let pairing = Pairing::new(&rho, &obs)?;
    let r0 = pairing.regular_unchecked(0.0).norm();
    let t_dec = profile.decoherence_time(1e-3, c.hbar);
    let mut worst: f64 = 0.0;
    let mut rows = Vec::new();
    for k in 0..=100 {
        let t = t_dec * k as f64 / 100.0;
        let m = pairing.mean_value(t)?;
        let env = m.regular.norm() / r0;
        let exact = profile.envelope(t, c.hbar);
        worst = worst.max((env - exact).abs() / exact);
        rows.push(crate::output::csv_row(&[t, env, exact]));
    }
    out.add_csv("envelope.csv", "t,numeric,analytic", rows);
    checks.below("envelope_relative_error", worst, 0.02);
    let d = decoherence_time(&rho, &obs, 0.01)?;
    let exact = profile.decoherence_time(0.01, c.hbar);
    checks.below("decoherence_time_relative_error", (d.time - exact).abs() / exact, 0.02);
    checks.below("decoherence_before_horizon", d.time / d.horizon, 1.0);
    Ok(serde_json::json!({ "sigma": sigma, "hbar": c.hbar, "decoherence_time": d.time, "analytic": exact, "horizon": d.horizon }))
}

fn charts(c: &Common, checks: &mut Checks, out: &mut Output) -> Result<serde_json::Value> {
    // Atlas scales need hbar << eps^2 << S; fixed here so the scenario runs
    // independently of the global knobs.
    let scales = Common { hbar: 1e-3, action_scale: 10.0, ..c.clone() };
    let ho2 = (&(&Polynomial::var(4, 0).pow(2) + &Polynomial::var(4, 1).pow(2)) + &(&Polynomial::var(4, 2).pow(2) + &Polynomial::var(4, 3).pow(2))).scale(0.5);
    let h2_seed = (&Polynomial::var(3, 0).pow(2) + &Polynomial::var(3, 2).pow(2)).scale(0.5);
    let seed = SeedConfig {
        axis: 0,
        value: 0.0,
        polynomial: Some(h2_seed),
        grid: Some(GridSpec { mins: vec![-2.0; 3], maxs: vec![2.0; 3], counts: vec![5; 3], periodic: vec![] }),
        function: None,
    };
    let chart = |lo: f64, hi: f64| ChartConfig {
        region: AxisBox { lo: vec![-0.5, lo, 0.5, -0.6], hi: vec![0.5, hi, 1.5, 0.6] },
        counts: vec![11, 7, 11, 9],
        seeds: vec![seed.clone()],
    };
    let cfg = BuildConfig {
        hamiltonian: ho2,
        epsilon: 0.2,
        periods: vec![],
        bracket_tol: None,
        transport: None,
        lipschitz_cap: None,
        charts: vec![chart(-0.6, 0.0), chart(0.0, 0.6)],
    };
    let (file, reports) = build_atlas(&scales, std::path::Path::new("."), &cfg, out)?;
    for r in &reports {
        checks.below(&format!("chart{}_bracket_residual", r.id), r.residuals[0][1], 1e-6);
        checks.below(&format!("chart{}_flagged_fraction", r.id), r.flagged as f64 / r.nodes as f64, 0.5);
        // The seeded constant is exactly (q2^2 + p2^2) / 2.
        let o = &r.constants[1];
        let grid = o.grid();
        let err = (0..grid.len())
            .filter(|&i| o.values()[i].re.is_finite())
            .map(|i| {
                let x = grid.point(i);
                (o.values()[i].re - 0.5 * (x[1] * x[1] + x[3] * x[3])).abs()
            })
            .fold(0.0, f64::max);
        checks.below(&format!("chart{}_transport_error", r.id), err, 1e-9);
    }
    let atlas = file.to_atlas()?;
    let probe = PhaseGrid::cube(4, -0.6, 0.6, 9)?;
    let points: Vec<Vec<f64>> = (0..probe.len()).map(|i| probe.point(i)).map(|mut x| {
        x[2] += 1.0;
        x
    }).collect();
    checks.below("partition_defect", atlas.partition_defect(&points), 1e-12);
    checks.below("hbar_over_eps2", atlas.hbar_ratio(), 0.1);
    checks.below("eps2_over_action", atlas.action_ratio(), 0.1);
    // A hbar at the action scale must be refused.
    let refused = build_partition(&[file.charts[0].region.clone()], 0.2, &[], 1.0, 1.0).is_err();
    checks.above("large_hbar_refused", refused as u8 as f64, 0.5);
    out.add_json("atlas.json", &file)?;
    Ok(serde_json::to_value(&reports)?)
}

fn classical_limit(c: &Common, checks: &mut Checks, out: &mut Output) -> Result<serde_json::Value> {
    let ho = (&Polynomial::q(1, 0).pow(2) + &Polynomial::p(1, 0).pow(2)).scale(0.5);
    let grid = GridSpec { mins: vec![-2.0; 2], maxs: vec![2.0; 2], counts: vec![401; 2], periodic: vec![] };
    let g = grid.grid()?;
    let chart = Chart { id: 0, region: g.bounds(), frontier_width: 0.0, constants: vec![PhaseFunction::from_polynomial(g, ho.clone())?], angles: None };
    let specs = SpecsFile {
        hamiltonian: ho,
        eta: 0.1,
        samples: 400_000,
        levels: vec![LevelSpec { chart: 0, levels: vec![1.0], weight: 1.0 }],
        grid,
        ensemble: Some(EnsembleConfig { count: 20_000, times: vec![0.0, 1.0, 10.0], dt: 0.02, bins: 32 }),
    };
    let report = run_specs(c, &[chart], None, &specs, out)?;
    checks.below("normalization_error", (report.normalization - 1.0).abs(), 1e-3);
    // Before renormalization on the grid, the Monte Carlo volume alone sets the total.
    let mc = report.volumes[0].relative_error();
    checks.below("raw_normalization_error", (report.raw_normalization - 1.0).abs(), 3.0 * mc + 1e-3);
    checks.above("min_density", report.min_value, -1e-12);
    checks.below("volume_mc_relative_error", report.volumes[0].relative_error(), 0.05);
    for (p, t) in report.chi_square_p.iter().zip(&specs.ensemble.as_ref().map(|e| e.times.clone()).unwrap_or_default()) {
        checks.above(&format!("chi_square_p_t{t}"), p.unwrap_or(0.0), 0.01);
    }
    Ok(serde_json::to_value(&report)?)
}

fn billiard(c: &Common, checks: &mut Checks, out: &mut Output) -> Result<serde_json::Value> {
    let spec = BilliardSpec::new(1.0, 1.0, 0.25, 0.05)?;
    let start = [0.3, 0.2, 0.7f64.cos(), 0.7f64.sin()];
    let traj = simulate_billiard(&spec, start, 50.0, &SimOptions::default())?;
    checks.below("energy_drift", traj.relative_energy_drift(), 1e-6);
    let table = conservation_table(&spec, &traj);
    for d in &table {
        if d.samples > 0 {
            let limit = if d.label == DomainLabel::D4 { 1e-4 } else { 1e-5 };
            checks.below(&format!("{}_{}_drift", d.label, d.constant), d.constant_drift, limit);
        }
    }
    let lyap = lyapunov(&spec, start, 2000.0, &LyapunovOptions { dt: 5e-4, seed: c.seed, ..LyapunovOptions::default() })?;
    checks.above("lyapunov_significance", lyap.lambda_max / lyap.stderr, 5.0);
    let rows = (0..traj.len()).map(|i| {
        let s = traj.states[i];
        crate::output::csv_row(&[traj.times[i], s[0], s[1], s[2], s[3], traj.labels[i].index() as f64])
    });
    out.add_csv("trajectory.csv", "t,qx,qy,px,py,domain", rows.collect::<Vec<_>>());
    Ok(serde_json::json!({ "domains": table, "lyapunov": lyap }))
}
